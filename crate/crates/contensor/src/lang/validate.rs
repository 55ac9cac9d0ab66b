//! Static validity rules.
//!
//! * `R-INV`: every index expression must be invertible in the index that
//!   consumes it: a sum of at most two continuous indices plus constants,
//!   with coefficient +1 on the consuming index.
//! * `R-PIN`: a continuous index may only be read outside the dimension it
//!   consumes when a pinpoint access keyed by it annihilates the program
//!   everywhere else.
//! * `R-SUM`: `+=` without `d(i)` sums over a continuous index, which is
//!   only finite over pinpoints.
//! * `R-ARITY`: tensors must exist, have matching rank, and take only
//!   discrete indices on dense dimensions.

use std::collections::HashMap;
use std::fmt;

use super::scope::{affine, Scope, VarKind};
use super::{Access, Expr, Program, Stmt};
use crate::ir::{AssignOp, Op};
use crate::storage::{ContTensor, LevelKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    Inv,
    Pin,
    Sum,
    Arity,
}

impl Rule {
    pub fn id(self) -> &'static str {
        match self {
            Rule::Inv => "R-INV",
            Rule::Pin => "R-PIN",
            Rule::Sum => "R-SUM",
            Rule::Arity => "R-ARITY",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub rule: Rule,
    pub msg: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.rule.id(), self.msg)
    }
}

/// What the validator needs to know about a bound tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Signature {
    pub levels: Vec<(LevelKind, bool)>,
    pub fill_is_zero: bool,
}

impl Signature {
    pub fn of(t: &ContTensor) -> Signature {
        Signature {
            levels: t.levels.iter().map(|l| (l.kind(), l.is_pinpoint())).collect(),
            fill_is_zero: !t.fill.truthy(),
        }
    }
}

struct Checker<'a> {
    sigs: &'a HashMap<String, Signature>,
    scope: Scope,
    diags: Vec<Diagnostic>,
    /// Continuous indices read outside their own dimension.
    pin_uses: Vec<(String, String)>,
    /// Enclosing conditions, innermost last.
    conds: Vec<&'a Expr>,
    /// Continuous loops enclosing the assignment.
    cont_loops: Vec<String>,
    assigns: usize,
    outputs: Vec<String>,
}

pub fn validate(p: &Program, sigs: &HashMap<String, Signature>) -> Vec<Diagnostic> {
    let mut c = Checker {
        sigs,
        scope: Scope::default(),
        diags: Vec::new(),
        pin_uses: Vec::new(),
        conds: Vec::new(),
        cont_loops: Vec::new(),
        assigns: 0,
        outputs: Vec::new(),
    };
    c.stmts(&p.body);
    if c.assigns != 1 {
        c.report(Rule::Arity, format!("a kernel needs exactly one assignment, found {}", c.assigns));
    }
    let inputs = p.inputs();
    for o in c.outputs.clone() {
        if inputs.contains(&o) {
            c.report(Rule::Arity, format!("tensor {o} is both read and written"));
        }
    }
    c.diags
}

impl<'a> Checker<'a> {
    fn report(&mut self, rule: Rule, msg: String) {
        let d = Diagnostic { rule, msg };
        if !self.diags.contains(&d) {
            self.diags.push(d);
        }
    }

    fn bind(&mut self, var: &str, kind: VarKind) {
        if self.scope.contains(var) {
            self.report(Rule::Arity, format!("index `{var}` is bound twice"));
        }
        self.scope.push(var, kind);
    }

    fn stmts(&mut self, body: &'a [Stmt]) {
        for s in body {
            match s {
                Stmt::ForCont { var, lo, hi, body } | Stmt::ForDisc { var, lo, hi, body } => {
                    self.expr(lo, "a loop bound");
                    self.expr(hi, "a loop bound");
                    let cont = matches!(s, Stmt::ForCont { .. });
                    self.bind(var, if cont { VarKind::Continuous } else { VarKind::Discrete });
                    if cont {
                        self.cont_loops.push(var.clone());
                    }
                    let before = self.pin_uses.len();
                    self.stmts(body);
                    if cont {
                        self.settle_pins(var, before, body);
                        self.cont_loops.pop();
                    }
                    self.scope.pop();
                }
                Stmt::If { cond, body } => {
                    self.expr(cond, "a condition");
                    self.conds.push(cond);
                    self.stmts(body);
                    self.conds.pop();
                }
                Stmt::Let { var, value, body } => {
                    self.expr(value, "a let binding");
                    self.bind(var, VarKind::Let);
                    self.stmts(body);
                    self.scope.pop();
                }
                Stmt::Assign { lhs, op, rhs } => {
                    self.assigns += 1;
                    if !self.outputs.contains(&lhs.tensor) {
                        self.outputs.push(lhs.tensor.clone());
                    }
                    self.lhs(lhs);
                    self.expr(rhs, "the right-hand side");
                    self.reduction(lhs, *op, rhs);
                }
            }
        }
    }

    /// Records reads of continuous indices outside index positions and
    /// checks every access.
    fn expr(&mut self, e: &'a Expr, place: &str) {
        match e {
            Expr::Var(v) => {
                if let Some((_, VarKind::Continuous)) = self.scope.get(v) {
                    self.pin_uses.push((v.clone(), format!("`{v}` is read in {place}")));
                }
            }
            Expr::Access(a) => self.access(a),
            Expr::Diff(v) => {
                if !matches!(self.scope.get(v), Some((_, VarKind::Continuous))) {
                    self.report(Rule::Sum, format!("d({v}) does not name an enclosing continuous loop"));
                }
            }
            Expr::Call(f, args) => {
                self.report(Rule::Inv, format!("function `{f}` is not supported"));
                args.iter().for_each(|a| self.expr(a, place));
            }
            Expr::Unary(_, a) => self.expr(a, place),
            Expr::Binary(_, a, b) => {
                self.expr(a, place);
                self.expr(b, place)
            }
            Expr::Num { .. } | Expr::Bool(_) => {}
        }
    }

    fn access(&mut self, a: &'a Access) {
        let Some(sig) = self.sigs.get(&a.tensor) else {
            self.report(Rule::Arity, format!("no tensor is bound to {}", a.tensor));
            return;
        };
        if sig.levels.len() != a.idx.len() {
            self.report(Rule::Arity, format!("{a} uses {} indices but {} has rank {}", a.idx.len(), a.tensor, sig.levels.len()));
            return;
        }
        for (k, dim) in a.idx.iter().enumerate() {
            let conts = self.scope.continuous_in(dim);
            let key = self.scope.key(dim);
            let dense = sig.levels[k].0 == LevelKind::Dense;
            if dense && !conts.is_empty() {
                self.report(Rule::Arity, format!("continuous index `{}` addresses dense dimension {k} of {}", conts[0], a.tensor));
                continue;
            }
            let Some((kv, VarKind::Continuous)) = key else {
                if let Err(m) = check_plain(dim) {
                    self.report(Rule::Inv, format!("{a}: {m}"));
                }
                for v in conts {
                    self.pin_uses.push((v.to_string(), format!("`{v}` offsets {a}")));
                }
                continue;
            };
            match affine(dim, &self.scope) {
                Err(m) => self.report(Rule::Inv, format!("{a}: {m}")),
                Ok(af) => {
                    if conts.len() > 2 {
                        self.report(Rule::Inv, format!("{a}: more than two continuous indices in one dimension"));
                    }
                    let c = af.coef(kv);
                    if c == -1.0 {
                        self.report(Rule::Inv, format!("{a}: reflected index `{kv}` is not supported"));
                    } else if c != 1.0 || af.terms.iter().any(|t| t.1.abs() != 1.0) {
                        self.report(Rule::Inv, format!("{a}: index coefficients must be +1 or -1"));
                    }
                    for v in conts.into_iter().filter(|v| *v != kv) {
                        self.pin_uses.push((v.to_string(), format!("`{v}` offsets {a}")));
                    }
                }
            }
        }
    }

    fn lhs(&mut self, lhs: &'a Access) {
        for dim in &lhs.idx {
            let conts = self.scope.continuous_in(dim);
            match dim {
                Expr::Var(_) => {}
                _ if !conts.is_empty() => {
                    self.report(Rule::Inv, format!("output index `{dim}` of {} must be a bare continuous index", lhs.tensor))
                }
                _ => {
                    if let Err(m) = check_plain(dim) {
                        self.report(Rule::Inv, format!("{lhs}: {m}"));
                    }
                }
            }
        }
    }

    fn reduction(&mut self, lhs: &Access, op: AssignOp, rhs: &'a Expr) {
        let factors = rhs.chain(Op::Mul);
        let mut diffs = Vec::new();
        rhs.visit(&mut |e| {
            if let Expr::Diff(v) = e {
                diffs.push(v.clone());
            }
        });
        for v in &diffs {
            if op != AssignOp::Add {
                self.report(Rule::Sum, format!("d({v}) is only meaningful with +="));
            }
            if !factors.iter().any(|f| matches!(f, Expr::Diff(w) if w == v)) {
                self.report(Rule::Sum, format!("d({v}) must multiply the whole right-hand side"));
            }
            if lhs.idx.iter().any(|d| matches!(d, Expr::Var(w) if w == v)) {
                self.report(Rule::Sum, format!("integral over `{v}` written into a dimension indexed by `{v}`"));
            }
        }
        if op != AssignOp::Add {
            return;
        }
        for v in self.cont_loops.clone() {
            let writes_v = lhs.idx.iter().any(|d| matches!(d, Expr::Var(w) if *w == v));
            if writes_v || diffs.contains(&v) {
                continue;
            }
            if !self.licensed(&v, rhs, op) {
                self.report(Rule::Sum, format!("+= without d({v}) sums over `{v}`, which ranges over non-pinpoint pieces"));
            }
        }
    }

    /// True when an access keyed by `v` on a pinpoint level with a zero fill
    /// makes the assignment a no-op away from its points.
    fn licensed(&self, v: &str, rhs: &Expr, op: AssignOp) -> bool {
        let mut cands: Vec<&Expr> = Vec::new();
        if matches!(op, AssignOp::Add | AssignOp::Or) {
            cands.extend(rhs.chain(Op::Mul));
            cands.extend(rhs.chain(Op::And));
        }
        for c in &self.conds {
            cands.extend(c.chain(Op::And));
        }
        cands.iter().any(|e| match e {
            Expr::Access(a) => self.pins(a, v),
            _ => false,
        })
    }

    fn pins(&self, a: &Access, v: &str) -> bool {
        let Some(sig) = self.sigs.get(&a.tensor) else { return false };
        if !sig.fill_is_zero || sig.levels.len() != a.idx.len() {
            return false;
        }
        a.idx.iter().enumerate().any(|(k, dim)| self.scope.key(dim).map(|x| x.0) == Some(v) && sig.levels[k].1)
    }

    fn settle_pins(&mut self, var: &str, from: usize, body: &'a [Stmt]) {
        let uses: Vec<(String, String)> = self.pin_uses[from..].iter().filter(|u| u.0 == var).cloned().collect();
        self.pin_uses.retain(|u| u.0 != var);
        if uses.is_empty() {
            return;
        }
        let Some((_, op, rhs, conds)) = find_assign(body, Vec::new()) else { return };
        let saved = std::mem::replace(&mut self.conds, conds);
        let ok = self.licensed_in(var, rhs, op, body);
        self.conds = saved;
        if !ok {
            for (_, why) in uses {
                self.report(Rule::Pin, format!("{why}, but no pinpoint access keyed by `{var}` pins it"));
            }
        }
    }

    fn licensed_in(&self, var: &str, rhs: &Expr, op: AssignOp, body: &[Stmt]) -> bool {
        let mut scope = self.scope.clone();
        bind_all(body, &mut scope);
        let inner = Checker {
            sigs: self.sigs,
            scope,
            diags: Vec::new(),
            pin_uses: Vec::new(),
            conds: self.conds.clone(),
            cont_loops: Vec::new(),
            assigns: 0,
            outputs: Vec::new(),
        };
        inner.licensed(var, rhs, op)
    }
}

fn bind_all(body: &[Stmt], scope: &mut Scope) {
    for s in body {
        match s {
            Stmt::ForCont { var, body, .. } => {
                scope.push(var, VarKind::Continuous);
                bind_all(body, scope)
            }
            Stmt::ForDisc { var, body, .. } => {
                scope.push(var, VarKind::Discrete);
                bind_all(body, scope)
            }
            Stmt::Let { var, body, .. } => {
                scope.push(var, VarKind::Let);
                bind_all(body, scope)
            }
            Stmt::If { body, .. } => bind_all(body, scope),
            Stmt::Assign { .. } => {}
        }
    }
}

type Found<'a> = (&'a Access, AssignOp, &'a Expr, Vec<&'a Expr>);

fn find_assign<'a>(body: &'a [Stmt], mut conds: Vec<&'a Expr>) -> Option<Found<'a>> {
    for s in body {
        match s {
            Stmt::Assign { lhs, op, rhs } => return Some((lhs, *op, rhs, conds)),
            Stmt::If { cond, body } => {
                conds.push(cond);
                if let Some(f) = find_assign(body, conds.clone()) {
                    return Some(f);
                }
                conds.pop();
            }
            s => {
                if let Some(f) = find_assign(s.body(), conds.clone()) {
                    return Some(f);
                }
            }
        }
    }
    None
}

fn check_plain(dim: &Expr) -> Result<(), String> {
    let mut err = Ok(());
    dim.visit(&mut |e| match e {
        Expr::Access(a) if err.is_ok() => err = Err(format!("tensor access {a} inside an index")),
        Expr::Call(f, _) if err.is_ok() => err = Err(format!("function `{f}` has no usable inverse")),
        Expr::Diff(_) if err.is_ok() => err = Err("d(...) inside an index".into()),
        _ => {}
    });
    err
}
