use std::fmt;

use super::parser::binprec;
use super::{Access, Expr, Program, Stmt};
use crate::ir::Op;

fn num(value: f64, float: bool) -> String {
    if value.is_infinite() {
        return if value > 0.0 { "∞".into() } else { "-∞".into() };
    }
    if float {
        format!("{value:?}")
    } else {
        format!("{value}")
    }
}

fn write_expr(o: &mut String, e: &Expr, parent: u8) {
    match e {
        Expr::Num { value, float } => o.push_str(&num(*value, *float)),
        Expr::Bool(b) => o.push_str(if *b { "true" } else { "false" }),
        Expr::Var(v) => o.push_str(v),
        Expr::Access(a) => write_access(o, a),
        Expr::Diff(v) => {
            o.push_str("d(");
            o.push_str(v);
            o.push(')');
        }
        Expr::Call(f, args) => {
            o.push_str(f);
            o.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    o.push_str(", ");
                }
                write_expr(o, a, 0);
            }
            o.push(')');
        }
        Expr::Unary(op, inner) => {
            let wrap = parent > 6;
            if wrap {
                o.push('(');
            }
            o.push_str(if *op == Op::Neg { "-" } else { "!" });
            write_expr(o, inner, 6);
            if wrap {
                o.push(')');
            }
        }
        Expr::Binary(op, a, b) => {
            let p = binprec(*op);
            let wrap = p < parent;
            if wrap {
                o.push('(');
            }
            write_expr(o, a, p);
            o.push(' ');
            o.push_str(op.symbol());
            o.push(' ');
            write_expr(o, b, p + 1);
            if wrap {
                o.push(')');
            }
        }
    }
}

fn write_access(o: &mut String, a: &Access) {
    o.push_str(&a.tensor);
    if a.idx.is_empty() {
        return;
    }
    o.push('[');
    for (i, e) in a.idx.iter().enumerate() {
        if i > 0 {
            o.push_str(", ");
        }
        write_expr(o, e, 0);
    }
    o.push(']');
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_expr(&mut s, self, 0);
        f.write_str(&s)
    }
}

impl fmt::Display for Access {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_access(&mut s, self);
        f.write_str(&s)
    }
}

fn write_stmts(o: &mut String, body: &[Stmt], depth: usize) {
    let pad = "  ".repeat(depth);
    for s in body {
        match s {
            Stmt::ForCont { var, lo, hi, body } => {
                let tag = if lo.has_float() && hi.has_float() { "" } else { " continuous" };
                o.push_str(&format!("{pad}for {var} = {lo}:{hi}{tag}\n"));
                write_stmts(o, body, depth + 1);
                o.push_str(&format!("{pad}end\n"));
            }
            Stmt::ForDisc { var, lo, hi, body } => {
                let tag = if lo.has_float() || hi.has_float() { " discrete" } else { "" };
                o.push_str(&format!("{pad}for {var} = {lo}:{hi}{tag}\n"));
                write_stmts(o, body, depth + 1);
                o.push_str(&format!("{pad}end\n"));
            }
            Stmt::If { cond, body } => {
                o.push_str(&format!("{pad}if {cond}\n"));
                write_stmts(o, body, depth + 1);
                o.push_str(&format!("{pad}end\n"));
            }
            Stmt::Let { var, value, body } => {
                o.push_str(&format!("{pad}let {var} = {value}\n"));
                write_stmts(o, body, depth + 1);
                o.push_str(&format!("{pad}end\n"));
            }
            Stmt::Assign { lhs, op, rhs } => {
                o.push_str(&format!("{pad}{lhs} {} {rhs}\n", op.symbol()));
            }
        }
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_stmts(&mut s, &self.body, 0);
        f.write_str(&s)
    }
}
