use std::fmt;

use thiserror::Error;

use super::lexer::{lex, Tok, Token};
use super::{Access, Expr, Program, Stmt};
use crate::ir::{AssignOp, Op};

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}, column {col}: {msg}")]
pub struct SyntaxError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

impl SyntaxError {
    pub(super) fn new(line: usize, col: usize, msg: impl Into<String>) -> Self {
        SyntaxError { line, col, msg: msg.into() }
    }
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Num { value, .. } => write!(f, "number {value}"),
            Tok::Inf => write!(f, "`∞`"),
            Tok::Sym(s) => write!(f, "`{s}`"),
            Tok::Newline => write!(f, "end of line"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

struct Parser {
    toks: Vec<Token>,
    at: usize,
    next_id: usize,
}

pub fn parse(src: &str) -> Result<Program, SyntaxError> {
    let mut p = Parser { toks: lex(src)?, at: 0, next_id: 0 };
    let body = p.block()?;
    match p.peek() {
        Tok::Eof => Ok(Program { body }),
        _ => Err(p.error("unmatched `end`")),
    }
}

fn is_kw(t: &Tok, kw: &str) -> bool {
    matches!(t, Tok::Ident(s) if s == kw)
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].tok.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn error(&self, msg: impl Into<String>) -> SyntaxError {
        let t = &self.toks[self.at];
        SyntaxError::new(t.line, t.col, msg)
    }

    fn expected(&self, what: &str) -> SyntaxError {
        self.error(format!("expected {what}, found {}", self.peek()))
    }

    fn eat(&mut self, sym: &str) -> bool {
        if matches!(self.peek(), Tok::Sym(s) if *s == sym) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, sym: &str) -> Result<(), SyntaxError> {
        if self.eat(sym) {
            Ok(())
        } else {
            Err(self.expected(&format!("`{sym}`")))
        }
    }

    fn ident(&mut self) -> Result<String, SyntaxError> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.expected("an identifier")),
        }
    }

    fn skip_separators(&mut self) {
        while matches!(self.peek(), Tok::Newline | Tok::Sym(";")) {
            self.bump();
        }
    }

    /// Statements up to a matching `end` (consumed) or the end of input.
    fn block(&mut self) -> Result<Vec<Stmt>, SyntaxError> {
        let mut out = Vec::new();
        loop {
            self.skip_separators();
            match self.peek() {
                Tok::Eof => return Ok(out),
                t if is_kw(t, "end") => {
                    return Ok(out);
                }
                _ => out.push(self.stmt()?),
            }
        }
    }

    fn body(&mut self) -> Result<Vec<Stmt>, SyntaxError> {
        let b = self.block()?;
        if is_kw(self.peek(), "end") {
            self.bump();
        }
        Ok(b)
    }

    fn stmt(&mut self) -> Result<Stmt, SyntaxError> {
        let t = self.peek().clone();
        if is_kw(&t, "for") {
            self.bump();
            let var = self.ident()?;
            self.expect("=")?;
            let lo = self.expr()?;
            self.expect(":")?;
            let hi = self.expr()?;
            let forced = match self.peek() {
                t if is_kw(t, "continuous") => Some(true),
                t if is_kw(t, "discrete") => Some(false),
                _ => None,
            };
            if forced.is_some() {
                self.bump();
            }
            let continuous = match forced {
                Some(c) => c,
                None => match (lo.has_float(), hi.has_float()) {
                    (a, b) if a == b => a,
                    _ => return Err(self.error(format!("loop `{var}` mixes real and integer bounds; add `continuous` or `discrete`"))),
                },
            };
            self.end_of_header()?;
            let body = self.body()?;
            return Ok(if continuous { Stmt::ForCont { var, lo, hi, body } } else { Stmt::ForDisc { var, lo, hi, body } });
        }
        if is_kw(&t, "if") {
            self.bump();
            let cond = self.expr()?;
            self.end_of_header()?;
            return Ok(Stmt::If { cond, body: self.body()? });
        }
        if is_kw(&t, "let") {
            self.bump();
            let var = self.ident()?;
            self.expect("=")?;
            let value = self.expr()?;
            self.end_of_header()?;
            return Ok(Stmt::Let { var, value, body: self.body()? });
        }
        let name = self.ident()?;
        let id = self.fresh_id();
        let idx = if self.eat("[") { self.index_list()? } else { vec![] };
        let lhs = Access { tensor: name, idx, id };
        let op = match self.bump() {
            Tok::Sym("=") => AssignOp::Overwrite,
            Tok::Sym("+=") => AssignOp::Add,
            Tok::Sym("|=") => AssignOp::Or,
            Tok::Sym("&=") => AssignOp::And,
            Tok::Sym("max=") => AssignOp::Max,
            Tok::Sym("min=") => AssignOp::Min,
            _ => {
                self.at -= 1;
                return Err(self.expected("an assignment operator"));
            }
        };
        let rhs = self.expr()?;
        match self.peek() {
            Tok::Newline | Tok::Eof | Tok::Sym(";") => Ok(Stmt::Assign { lhs, op, rhs }),
            t if is_kw(t, "end") => Ok(Stmt::Assign { lhs, op, rhs }),
            _ => Err(self.expected("end of statement")),
        }
    }

    fn end_of_header(&mut self) -> Result<(), SyntaxError> {
        match self.peek() {
            Tok::Newline | Tok::Sym(";") | Tok::Eof => Ok(()),
            _ => Err(self.expected("end of line or `;`")),
        }
    }

    fn fresh_id(&mut self) -> usize {
        self.next_id += 1;
        self.next_id - 1
    }

    fn index_list(&mut self) -> Result<Vec<Expr>, SyntaxError> {
        let mut idx = Vec::new();
        if self.eat("]") {
            return Ok(idx);
        }
        loop {
            idx.push(self.expr()?);
            if self.eat("]") {
                return Ok(idx);
            }
            if !self.eat(",") {
                return Err(self.expected("`,` or `]`"));
            }
        }
    }

    pub fn expr(&mut self) -> Result<Expr, SyntaxError> {
        self.binary(1)
    }

    fn binary(&mut self, min_prec: u8) -> Result<Expr, SyntaxError> {
        let mut lhs = self.unary()?;
        while let Some(op) = match self.peek() {
            Tok::Sym(s) => binop(s),
            _ => None,
        } {
            let prec = binprec(op);
            if prec < min_prec {
                break;
            }
            self.bump();
            let rhs = self.binary(prec + 1)?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, SyntaxError> {
        if self.eat("-") {
            return Ok(Expr::Unary(Op::Neg, Box::new(self.unary()?)));
        }
        if self.eat("!") {
            return Ok(Expr::Unary(Op::Not, Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, SyntaxError> {
        match self.peek().clone() {
            Tok::Num { value, float } => {
                self.bump();
                Ok(Expr::Num { value, float })
            }
            Tok::Inf => {
                self.bump();
                Ok(Expr::Num { value: f64::INFINITY, float: true })
            }
            Tok::Sym("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect(")")?;
                Ok(e)
            }
            Tok::Ident(s) if s == "true" || s == "false" => {
                self.bump();
                Ok(Expr::Bool(s == "true"))
            }
            Tok::Ident(_) => {
                let name = self.ident()?;
                if self.eat("[") {
                    let id = self.fresh_id();
                    let idx = self.index_list()?;
                    return Ok(Expr::Access(Access { tensor: name, idx, id }));
                }
                if self.eat("(") {
                    let mut args = Vec::new();
                    if !self.eat(")") {
                        loop {
                            args.push(self.expr()?);
                            if self.eat(")") {
                                break;
                            }
                            if !self.eat(",") {
                                return Err(self.expected("`,` or `)`"));
                            }
                        }
                    }
                    if name == "d" {
                        return match args.as_slice() {
                            [Expr::Var(v)] => Ok(Expr::Diff(v.clone())),
                            _ => Err(self.error("d(...) takes a single loop index")),
                        };
                    }
                    return Ok(Expr::Call(name, args));
                }
                Ok(Expr::Var(name))
            }
            _ => Err(self.expected("an expression")),
        }
    }
}

const KEYWORDS: [&str; 8] = ["for", "if", "let", "end", "true", "false", "continuous", "discrete"];

fn binop(s: &str) -> Option<Op> {
    Some(match s {
        "||" => Op::Or,
        "&&" => Op::And,
        "<" => Op::Lt,
        "<=" => Op::Le,
        ">" => Op::Gt,
        ">=" => Op::Ge,
        "==" => Op::Eq,
        "!=" => Op::Ne,
        "+" => Op::Add,
        "-" => Op::Sub,
        "*" => Op::Mul,
        "/" => Op::Div,
        _ => return None,
    })
}

pub(super) fn binprec(op: Op) -> u8 {
    match op {
        Op::Or => 1,
        Op::And => 2,
        Op::Lt | Op::Le | Op::Gt | Op::Ge | Op::Eq | Op::Ne => 3,
        Op::Add | Op::Sub => 4,
        Op::Mul | Op::Div => 5,
        _ => 6,
    }
}
