//! The kernel language: a small loop language over tensors.
//!
//! ```text
//! for i = -∞:∞
//!   if Mask[i]
//!     for j = -∞:∞
//!       Z[i] += A[i+j] * B[j] * d(j)
//! ```
//!
//! A loop is continuous when a bound has a decimal point or is infinite,
//! discrete when both bounds are integers or symbols; the keywords
//! `continuous` and `discrete` after the bounds override this. Bodies run to
//! a matching `end` or to the end of the file, and `;` separates statements
//! on one line.

mod lexer;
mod parser;
mod print;
pub mod scope;
pub mod validate;

use crate::ir::{AssignOp, Op};

pub use parser::{parse, SyntaxError};
pub use validate::{validate, Diagnostic, Rule, Signature};

#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub body: Vec<Stmt>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Stmt {
    ForCont { var: String, lo: Expr, hi: Expr, body: Vec<Stmt> },
    ForDisc { var: String, lo: Expr, hi: Expr, body: Vec<Stmt> },
    If { cond: Expr, body: Vec<Stmt> },
    Let { var: String, value: Expr, body: Vec<Stmt> },
    Assign { lhs: Access, op: AssignOp, rhs: Expr },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Access {
    pub tensor: String,
    pub idx: Vec<Expr>,
    /// Position among all accesses of the program, in source order.
    pub id: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    /// A literal; `float` records whether it was written with a decimal
    /// point, exponent or as infinity.
    Num { value: f64, float: bool },
    Bool(bool),
    Var(String),
    Access(Access),
    Diff(String),
    Call(String, Vec<Expr>),
    Unary(Op, Box<Expr>),
    Binary(Op, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        match self {
            Expr::Access(a) => a.idx.iter().for_each(|e| e.visit(f)),
            Expr::Call(_, args) => args.iter().for_each(|e| e.visit(f)),
            Expr::Unary(_, e) => e.visit(f),
            Expr::Binary(_, a, b) => {
                a.visit(f);
                b.visit(f)
            }
            _ => {}
        }
    }

    /// Variables read by this expression, accesses included.
    pub fn vars(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.visit(&mut |e| {
            if let Expr::Var(v) = e {
                if !out.contains(&v.as_str()) {
                    out.push(v.as_str());
                }
            }
        });
        out
    }

    pub fn accesses(&self) -> Vec<&Access> {
        let mut out = Vec::new();
        self.visit(&mut |e| {
            if let Expr::Access(a) = e {
                out.push(a);
            }
        });
        out
    }

    fn has_float(&self) -> bool {
        let mut hit = false;
        self.visit(&mut |e| hit |= matches!(e, Expr::Num { float: true, .. }));
        hit
    }

    /// Operands of a top-level chain of `op`, e.g. the factors of `a*b*c`.
    pub fn chain(&self, op: Op) -> Vec<&Expr> {
        match self {
            Expr::Binary(o, a, b) if *o == op => {
                let mut v = a.chain(op);
                v.extend(b.chain(op));
                v
            }
            e => vec![e],
        }
    }
}

impl Stmt {
    pub fn body(&self) -> &[Stmt] {
        match self {
            Stmt::ForCont { body, .. } | Stmt::ForDisc { body, .. } | Stmt::If { body, .. } | Stmt::Let { body, .. } => body,
            Stmt::Assign { .. } => &[],
        }
    }
}

impl Program {
    /// Every statement in pre-order.
    pub fn stmts(&self) -> Vec<&Stmt> {
        fn go<'a>(s: &'a [Stmt], out: &mut Vec<&'a Stmt>) {
            for st in s {
                out.push(st);
                go(st.body(), out);
            }
        }
        let mut out = Vec::new();
        go(&self.body, &mut out);
        out
    }

    pub fn assignments(&self) -> Vec<(&Access, AssignOp, &Expr)> {
        self.stmts()
            .into_iter()
            .filter_map(|s| match s {
                Stmt::Assign { lhs, op, rhs } => Some((lhs, *op, rhs)),
                _ => None,
            })
            .collect()
    }

    /// Names of tensors read on right-hand sides and in conditions, in order
    /// of first appearance.
    pub fn inputs(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        let mut add = |e: &Expr| {
            for a in e.accesses() {
                if !out.contains(&a.tensor) {
                    out.push(a.tensor.clone());
                }
            }
        };
        for s in self.stmts() {
            match s {
                Stmt::ForCont { lo, hi, .. } | Stmt::ForDisc { lo, hi, .. } => {
                    add(lo);
                    add(hi)
                }
                Stmt::If { cond, .. } => add(cond),
                Stmt::Let { value, .. } => add(value),
                Stmt::Assign { rhs, lhs, .. } => {
                    lhs.idx.iter().for_each(&mut add);
                    add(rhs)
                }
            }
        }
        out
    }

    /// Identifiers that are neither loop indices nor `let` names.
    pub fn params(&self) -> Vec<String> {
        let mut bound = Vec::new();
        for s in self.stmts() {
            match s {
                Stmt::ForCont { var, .. } | Stmt::ForDisc { var, .. } | Stmt::Let { var, .. } => bound.push(var.clone()),
                _ => {}
            }
        }
        let mut out: Vec<String> = Vec::new();
        let mut add = |e: &Expr| {
            for v in e.vars() {
                if !bound.iter().any(|b| b == v) && !out.iter().any(|o| o == v) {
                    out.push(v.to_string());
                }
            }
        };
        for s in self.stmts() {
            match s {
                Stmt::ForCont { lo, hi, .. } | Stmt::ForDisc { lo, hi, .. } => {
                    add(lo);
                    add(hi)
                }
                Stmt::If { cond, .. } => add(cond),
                Stmt::Let { value, .. } => add(value),
                Stmt::Assign { lhs, rhs, .. } => {
                    lhs.idx.iter().for_each(&mut add);
                    add(rhs)
                }
            }
        }
        out
    }
}
