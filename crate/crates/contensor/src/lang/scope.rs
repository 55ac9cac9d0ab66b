//! Index scoping shared by the validator, the compiler and the oracle.

use super::Expr;
use crate::ir::Op;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Continuous,
    Discrete,
    Let,
}

/// Indices in scope, outermost first.
#[derive(Debug, Clone, Default)]
pub struct Scope {
    vars: Vec<(String, VarKind)>,
}

impl Scope {
    pub fn push(&mut self, name: &str, kind: VarKind) {
        self.vars.push((name.to_string(), kind));
    }

    pub fn pop(&mut self) {
        self.vars.pop();
    }

    /// Nesting depth and kind of `name`.
    pub fn get(&self, name: &str) -> Option<(usize, VarKind)> {
        self.vars.iter().rposition(|v| v.0 == name).map(|d| (d, self.vars[d].1))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.get(name).is_some()
    }

    /// The innermost in-scope index read by `dim`, which decides the loop at
    /// which that dimension is consumed. `None` for constant dimensions.
    pub fn key<'a>(&self, dim: &'a Expr) -> Option<(&'a str, VarKind)> {
        dim.vars()
            .into_iter()
            .filter_map(|v| self.get(v).map(|(d, k)| (d, v, k)))
            .max_by_key(|x| x.0)
            .map(|(_, v, k)| (v, k))
    }

    pub fn continuous_in<'a>(&self, e: &'a Expr) -> Vec<&'a str> {
        e.vars().into_iter().filter(|v| matches!(self.get(v), Some((_, VarKind::Continuous)))).collect()
    }
}

/// `Σ coef·index + Σ sign·constant`, where constants read no in-scope index.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Affine {
    pub terms: Vec<(String, f64)>,
    pub consts: Vec<(f64, Expr)>,
}

impl Affine {
    pub fn coef(&self, name: &str) -> f64 {
        self.terms.iter().filter(|t| t.0 == name).map(|t| t.1).sum()
    }
}

/// Splits an index expression into index terms and a constant remainder.
pub fn affine(e: &Expr, scope: &Scope) -> Result<Affine, String> {
    let mut out = Affine::default();
    collect(e, 1.0, scope, &mut out)?;
    let mut merged: Vec<(String, f64)> = Vec::new();
    for (v, c) in out.terms.drain(..) {
        match merged.iter_mut().find(|m| m.0 == v) {
            Some(m) => m.1 += c,
            None => merged.push((v, c)),
        }
    }
    out.terms = merged;
    Ok(out)
}

fn reads_scope(e: &Expr, scope: &Scope) -> bool {
    e.vars().iter().any(|v| scope.contains(v))
}

fn collect(e: &Expr, sign: f64, scope: &Scope, out: &mut Affine) -> Result<(), String> {
    match e {
        Expr::Var(v) if scope.contains(v) => out.terms.push((v.clone(), sign)),
        Expr::Binary(Op::Add, a, b) => {
            collect(a, sign, scope, out)?;
            collect(b, sign, scope, out)?;
        }
        Expr::Binary(Op::Sub, a, b) => {
            collect(a, sign, scope, out)?;
            collect(b, -sign, scope, out)?;
        }
        Expr::Unary(Op::Neg, a) => collect(a, -sign, scope, out)?,
        Expr::Access(a) => return Err(format!("tensor access {a} inside an index")),
        Expr::Call(f, _) => return Err(format!("function `{f}` has no usable inverse")),
        Expr::Diff(_) => return Err("d(...) inside an index".into()),
        e if reads_scope(e, scope) => return Err(format!("`{e}` is not a sum of indices and constants")),
        e => out.consts.push((sign, e.clone())),
    }
    Ok(())
}
