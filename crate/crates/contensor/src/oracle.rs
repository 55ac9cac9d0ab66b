//! Reference semantics computed straight from the program text.
//!
//! [`eval`] splits every continuous loop into the regions cut out by the
//! Cartesian product of the pieces (fill pieces included) of every dimension
//! the loop index consumes, and runs the body once per non-empty region. A
//! region that is a single point binds the index to that point. Nothing here
//! goes through looplets or plans.
//!
//! [`riemann`] approximates integrals by midpoint sums and serves as an
//! independent check on the measure handling of both.

use std::collections::HashMap;

use thiserror::Error;

use crate::compiler::{infer_upper_bound, output_spec, CompileError, OutputSpec, Params, Tensors};
use crate::exec::{Builder, ExecError, SumMode};
use crate::interval::Interval;
use crate::ir::{AssignOp, Op};
use crate::lang::scope::{Scope, VarKind};
use crate::lang::{Access, Expr, Program, Stmt};
use crate::limit::Limit;
use crate::storage::{ContTensor, Level, Seg};
use crate::value::Value;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Exec(#[from] ExecError),
    #[error("no tensor is bound to {0}")]
    MissingTensor(String),
    #[error("no value for parameter {0}")]
    MissingParam(String),
    #[error("index `{0}` is read as a scalar over a region that is not a point")]
    Unpinned(String),
    #[error("{0}")]
    Layout(String),
    #[error("{0}")]
    Unsupported(String),
}

type Res<T> = Result<T, OracleError>;

#[derive(Debug, Clone, Copy)]
enum Bound {
    Disc(f64),
    Point(f64),
    Region(Interval),
}

/// The evaluation state along one path through the loop nest.
#[derive(Clone, Default)]
struct Frame {
    vars: Vec<(String, Bound)>,
    /// Piece chosen for `(access id, level)` by the enclosing continuous loop.
    chosen: HashMap<(usize, usize), Option<usize>>,
}

impl Frame {
    fn get(&self, v: &str) -> Option<Bound> {
        self.vars.iter().rev().find(|b| b.0 == v).map(|b| b.1)
    }
}

struct Oracle<'a> {
    program: &'a Program,
    tensors: &'a Tensors,
    params: &'a Params,
    mode: SumMode,
    out: Builder,
    scope: Scope,
    lets: Vec<String>,
    /// Set while running a body whose guard could not be evaluated: any
    /// update other than the identity is then an error.
    probing: bool,
    op: AssignOp,
}

/// Output of `program` by piecewise enumeration.
pub fn eval(program: &Program, tensors: &Tensors, params: &Params, mode: SumMode) -> Result<ContTensor, OracleError> {
    for name in program.inputs() {
        if !tensors.contains_key(&name) {
            return Err(OracleError::MissingTensor(name));
        }
    }
    let spec: OutputSpec = output_spec(program, tensors, params)?;
    let mut o = Oracle {
        program,
        tensors,
        params,
        mode,
        out: Builder::new(&spec),
        scope: Scope::default(),
        lets: vec![],
        probing: false,
        op: spec.op,
    };
    o.stmts(&program.body, &Frame::default())?;
    Ok(o.out.finish()?)
}

fn num(v: Value) -> f64 {
    v.as_f64()
}

fn with_zero(e: &Expr, var: &str) -> Expr {
    match e {
        Expr::Var(v) if v == var => Expr::Num { value: 0.0, float: true },
        Expr::Unary(op, a) => Expr::Unary(*op, Box::new(with_zero(a, var))),
        Expr::Binary(op, a, b) => Expr::Binary(*op, Box::new(with_zero(a, var)), Box::new(with_zero(b, var))),
        e => e.clone(),
    }
}

fn shift(iv: Interval, off: f64) -> Interval {
    Interval::new(iv.start - Limit::exact(off), iv.stop - Limit::exact(off))
}

fn length(iv: &Interval) -> f64 {
    iv.length().unwrap_or(0.0)
}

impl Oracle<'_> {
    fn tensor(&self, name: &str) -> &ContTensor {
        &self.tensors[name]
    }

    fn scalar(&self, v: &str, f: &Frame) -> Res<f64> {
        match f.get(v) {
            Some(Bound::Disc(x)) | Some(Bound::Point(x)) => Ok(x),
            Some(Bound::Region(_)) => Err(OracleError::Unpinned(v.to_string())),
            None => self.params.get(v).copied().ok_or_else(|| OracleError::MissingParam(v.to_string())),
        }
    }

    fn region(&self, v: &str, f: &Frame) -> Option<Interval> {
        match f.get(v) {
            Some(Bound::Region(iv)) => Some(iv),
            Some(Bound::Point(x)) => Some(Interval::point(x)),
            _ => None,
        }
    }

    /// Fiber of level `k` of `a`, following chosen pieces and coordinates.
    fn fiber(&self, a: &Access, k: usize, f: &Frame) -> Res<Option<usize>> {
        let t = self.tensor(&a.tensor);
        let mut pos = 0usize;
        for lvl in 0..k {
            match &t.levels[lvl] {
                Level::Dense { size } => {
                    let x = num(self.expr(&a.idx[lvl], f)?);
                    if x < 0.0 || x.fract() != 0.0 || x >= *size as f64 {
                        return Err(OracleError::Layout(format!("{a}: coordinate {x} outside dense level {lvl}")));
                    }
                    pos = pos * size + x as usize;
                }
                level => {
                    let p = match f.chosen.get(&(a.id, lvl)) {
                        Some(p) => *p,
                        None => level.locate(pos, num(self.expr(&a.idx[lvl], f)?)),
                    };
                    match p {
                        Some(p) => pos = p,
                        None => return Ok(None),
                    }
                }
            }
        }
        Ok(Some(pos))
    }

    fn access(&self, a: &Access, f: &Frame) -> Res<Value> {
        let t = self.tensor(&a.tensor);
        match self.fiber(a, t.rank(), f)? {
            Some(p) => Ok(t.values[p]),
            None => Ok(t.fill),
        }
    }

    fn expr(&self, e: &Expr, f: &Frame) -> Res<Value> {
        Ok(match e {
            Expr::Num { value, .. } => Value::Num(*value),
            Expr::Bool(b) => Value::Bool(*b),
            Expr::Var(v) => Value::Num(self.scalar(v, f)?),
            Expr::Access(a) => self.access(a, f)?,
            Expr::Diff(v) => match self.region(v, f) {
                Some(iv) => Value::Num(length(&iv)),
                None => return Err(OracleError::Unsupported(format!("d({v}) outside its loop"))),
            },
            Expr::Call(name, _) => return Err(OracleError::Unsupported(format!("function `{name}`"))),
            Expr::Unary(op, a) => {
                let x = self.expr(a, f)?;
                match op {
                    Op::Not => Value::Bool(!x.truthy()),
                    _ => Value::Num(-num(x)),
                }
            }
            Expr::Binary(op, a, b) => {
                if *op == Op::And || *op == Op::Or {
                    let x = self.expr(a, f)?.truthy();
                    if (*op == Op::And && !x) || (*op == Op::Or && x) {
                        return Ok(Value::Bool(x));
                    }
                    return Ok(Value::Bool(self.expr(b, f)?.truthy()));
                }
                let (x, y) = (self.expr(a, f)?, self.expr(b, f)?);
                binary(*op, x, y)
            }
        })
    }

    fn stmts(&mut self, body: &[Stmt], f: &Frame) -> Res<()> {
        for s in body {
            self.stmt(s, f)?;
        }
        Ok(())
    }

    fn disc_bound(&self, var: &str, e: &Expr, hi: bool, f: &Frame) -> Res<f64> {
        match self.expr(e, f) {
            Ok(v) => Ok(num(v)),
            Err(OracleError::MissingParam(_)) if !hi => Ok(0.0),
            Err(OracleError::MissingParam(p)) => {
                infer_upper_bound(self.program, self.tensors, var).ok_or(OracleError::MissingParam(p))
            }
            Err(e) => Err(e),
        }
    }

    fn stmt(&mut self, s: &Stmt, f: &Frame) -> Res<()> {
        match s {
            Stmt::ForDisc { var, lo, hi, body } => {
                let lo = self.disc_bound(var, lo, false, f)?;
                let hi = self.disc_bound(var, hi, true, f)?;
                self.scope.push(var, VarKind::Discrete);
                let mut inner = f.clone();
                inner.vars.push((var.clone(), Bound::Disc(0.0)));
                let mut i = lo.ceil();
                while i <= hi {
                    inner.vars.last_mut().unwrap().1 = Bound::Disc(i);
                    self.stmts(body, &inner)?;
                    i += 1.0;
                }
                self.scope.pop();
            }
            Stmt::ForCont { var, lo, hi, body } => {
                let range = Interval::closed(num(self.expr(lo, f)?), num(self.expr(hi, f)?));
                self.scope.push(var, VarKind::Continuous);
                let r = self.continuous(var, range, body, f);
                self.scope.pop();
                r?;
            }
            Stmt::If { cond, body } => match self.expr(cond, f) {
                Ok(c) => {
                    if c.truthy() {
                        self.stmts(body, f)?;
                    }
                }
                Err(OracleError::Unpinned(v)) => {
                    let was = std::mem::replace(&mut self.probing, true);
                    let r = self.stmts(body, f);
                    self.probing = was;
                    r.map_err(|e| match e {
                        OracleError::Unsupported(_) => OracleError::Unpinned(v),
                        e => e,
                    })?;
                }
                Err(e) => return Err(e),
            },
            Stmt::Let { var, value, body } => {
                let x = self.expr(value, f)?;
                let mut inner = f.clone();
                inner.vars.push((var.clone(), Bound::Disc(num(x))));
                self.scope.push(var, VarKind::Let);
                self.lets.push(var.clone());
                let r = self.stmts(body, &inner);
                self.lets.pop();
                self.scope.pop();
                r?;
            }
            Stmt::Assign { lhs, op, rhs } => self.assign(lhs, *op, rhs, f)?,
        }
        Ok(())
    }

    /// Every `(access, level)` in `body` whose dimension the index `var` consumes.
    fn participants<'b>(&self, var: &str, body: &'b [Stmt]) -> Vec<(&'b Access, usize)> {
        let mut out = Vec::new();
        let mut scope = self.scope.clone();
        collect(body, &mut scope, &mut |a, scope| {
            for (k, d) in a.idx.iter().enumerate() {
                if scope.key(d).map(|x| x.0) == Some(var) {
                    out.push((a, k));
                }
            }
        });
        out
    }

    fn continuous(&mut self, var: &str, range: Interval, body: &[Stmt], f: &Frame) -> Res<()> {
        let parts = self.participants(var, body);
        let mut lists: Vec<Vec<(Interval, Option<usize>)>> = Vec::with_capacity(parts.len());
        for (a, k) in &parts {
            let t = self.tensor(&a.tensor);
            if t.levels[*k].is_dense() {
                return Err(OracleError::Layout(format!("{a}: continuous index `{var}` on a dense level")));
            }
            let off = num(self.expr(&with_zero(&a.idx[*k], var), f).map_err(|e| match e {
                OracleError::Unpinned(v) => OracleError::Layout(format!("{a}: index `{v}` is not pinned")),
                e => e,
            })?);
            let pieces = match self.fiber(a, *k, f) {
                Ok(Some(fib)) => t.fiber_pieces(*k, fib, true),
                Ok(None) => vec![(Interval::everything(), None)],
                Err(OracleError::Unpinned(v)) => {
                    return Err(OracleError::Layout(format!("{a}: level {k} is reached before `{v}` is pinned")))
                }
                Err(e) => return Err(e),
            };
            lists.push(pieces.into_iter().map(|(iv, p)| (shift(iv, off), p)).collect());
        }
        let mut pick = vec![0usize; lists.len()];
        loop {
            let mut region = range;
            for (l, &i) in lists.iter().zip(&pick) {
                region = region.intersect(&l[i].0);
            }
            if !region.is_empty() {
                let mut inner = f.clone();
                for ((a, k), (l, &i)) in parts.iter().zip(lists.iter().zip(&pick)) {
                    inner.chosen.insert((a.id, *k), l[i].1);
                }
                let b = if region.is_pinpoint().unwrap_or(false) { Bound::Point(region.start.val) } else { Bound::Region(region) };
                inner.vars.push((var.to_string(), b));
                self.stmts(body, &inner)?;
            }
            let mut d = 0;
            while d < pick.len() {
                pick[d] += 1;
                if pick[d] < lists[d].len() {
                    break;
                }
                pick[d] = 0;
                d += 1;
            }
            if d == pick.len() {
                break;
            }
        }
        Ok(())
    }

    fn assign(&mut self, lhs: &Access, op: AssignOp, rhs: &Expr, f: &Frame) -> Res<()> {
        let v = self.expr(rhs, f)?;
        if self.probing {
            if v.same(self.op.identity()) || (op == AssignOp::Overwrite && !v.truthy()) {
                return Ok(());
            }
            return Err(OracleError::Unsupported("an update depends on an unpinned index".into()));
        }
        let mut diffs = Vec::new();
        rhs.visit(&mut |e| {
            if let Expr::Diff(v) = e {
                diffs.push(v.clone());
            }
        });
        let spans: Vec<&str> = lhs.idx.iter().filter_map(|d| if let Expr::Var(v) = d { Some(v.as_str()) } else { None }).collect();
        if op == AssignOp::Add {
            for (name, b) in &f.vars {
                if let Bound::Region(iv) = b {
                    if spans.contains(&name.as_str()) || diffs.contains(name) {
                        continue;
                    }
                    if length(iv) > 0.0 && !v.same(Value::Num(0.0)) {
                        match self.mode {
                            SumMode::Strict => return Err(ExecError::SummationOverInterval(*iv).into()),
                            SumMode::SkipIntervals => return Ok(()),
                        }
                    }
                }
            }
        }
        let mut path = Vec::with_capacity(lhs.idx.len());
        let mut emit = false;
        for d in &lhs.idx {
            match d {
                Expr::Var(v) if self.region(v, f).is_some() => {
                    emit = true;
                    path.push(Seg::Span(self.region(v, f).unwrap()));
                }
                d => {
                    let x = num(self.expr(d, f)?);
                    if x < 0.0 || x.fract() != 0.0 {
                        return Err(ExecError::OutputRange { name: lhs.tensor.clone(), coord: x, size: 0 }.into());
                    }
                    path.push(Seg::Index(x as usize));
                }
            }
        }
        if emit {
            if v.same(self.op.identity()) && op != AssignOp::Overwrite {
                return Ok(());
            }
            self.out.emit(path, v)?;
        } else {
            let at: Vec<f64> = path.iter().map(|s| if let Seg::Index(i) = s { *i as f64 } else { 0.0 }).collect();
            self.out.update(&at, v)?;
        }
        Ok(())
    }
}

fn binary(op: Op, x: Value, y: Value) -> Value {
    let (a, b) = (num(x), num(y));
    match op {
        Op::Add => Value::Num(a + b),
        Op::Sub => Value::Num(a - b),
        Op::Mul if (a == 0.0 && b.is_infinite()) || (b == 0.0 && a.is_infinite()) => Value::Num(0.0),
        Op::Mul => Value::Num(a * b),
        Op::Div => Value::Num(a / b),
        Op::Lt => Value::Bool(a < b),
        Op::Le => Value::Bool(a <= b),
        Op::Gt => Value::Bool(a > b),
        Op::Ge => Value::Bool(a >= b),
        Op::Eq => Value::Bool(a == b),
        Op::Ne => Value::Bool(a != b),
        Op::Max => Value::Num(a.max(b)),
        Op::Min => Value::Num(a.min(b)),
        Op::And => Value::Bool(x.truthy() && y.truthy()),
        Op::Or => Value::Bool(x.truthy() || y.truthy()),
        Op::Neg => Value::Num(-a),
        Op::Not => Value::Bool(!x.truthy()),
    }
}

/// Calls `f` on every right-hand-side access in `body` with the scope it sits in.
fn collect<'b>(body: &'b [Stmt], scope: &mut Scope, f: &mut impl FnMut(&'b Access, &Scope)) {
    for s in body {
        let exprs = |e: &'b Expr, scope: &Scope, f: &mut dyn FnMut(&'b Access, &Scope)| {
            e.visit(&mut |x| {
                if let Expr::Access(a) = x {
                    f(a, scope)
                }
            })
        };
        match s {
            Stmt::ForCont { var, lo, hi, body } | Stmt::ForDisc { var, lo, hi, body } => {
                exprs(lo, scope, f);
                exprs(hi, scope, f);
                let kind = if matches!(s, Stmt::ForCont { .. }) { VarKind::Continuous } else { VarKind::Discrete };
                scope.push(var, kind);
                collect(body, scope, f);
                scope.pop();
            }
            Stmt::If { cond, body } => {
                exprs(cond, scope, f);
                collect(body, scope, f);
            }
            Stmt::Let { var, value, body } => {
                exprs(value, scope, f);
                scope.push(var, VarKind::Let);
                collect(body, scope, f);
                scope.pop();
            }
            Stmt::Assign { rhs, .. } => exprs(rhs, scope, f),
        }
    }
}

/// Options for [`riemann`].
#[derive(Debug, Clone, Copy)]
pub struct Riemann {
    /// Sample spacing along integrated indices.
    pub step: f64,
    /// Bounds used for integrated indices whose loop is unbounded.
    pub window: Option<(f64, f64)>,
}

/// Midpoint-rule approximation of a program whose continuous indices are
/// either integrated (`d(i)` on the right-hand side) or pinned by pinpoint
/// dimensions, in which case the stored coordinates are visited.
pub fn riemann(program: &Program, tensors: &Tensors, params: &Params, opts: Riemann) -> Result<ContTensor, OracleError> {
    let spec = output_spec(program, tensors, params)?;
    let Some((lhs, _, rhs)) = program.assignments().first().copied() else {
        return Err(OracleError::Unsupported("no assignment".into()));
    };
    let mut integrated = Vec::new();
    rhs.visit(&mut |e| {
        if let Expr::Diff(v) = e {
            integrated.push(v.clone());
        }
    });
    let mut s = Sampler {
        program,
        tensors,
        params,
        opts,
        integrated,
        lhs: lhs.clone(),
        out: Builder::new(&spec),
        vars: vec![],
        weight: HashMap::new(),
        scope: Scope::default(),
    };
    s.stmts(&program.body)?;
    Ok(s.out.finish()?)
}

struct Sampler<'a> {
    program: &'a Program,
    tensors: &'a Tensors,
    params: &'a Params,
    opts: Riemann,
    integrated: Vec<String>,
    lhs: Access,
    out: Builder,
    vars: Vec<(String, f64)>,
    weight: HashMap<String, f64>,
    scope: Scope,
}

impl Sampler<'_> {
    fn var(&self, v: &str) -> Res<f64> {
        match self.vars.iter().rev().find(|b| b.0 == v) {
            Some(b) => Ok(b.1),
            None => self.params.get(v).copied().ok_or_else(|| OracleError::MissingParam(v.to_string())),
        }
    }

    fn expr(&self, e: &Expr) -> Res<Value> {
        Ok(match e {
            Expr::Num { value, .. } => Value::Num(*value),
            Expr::Bool(b) => Value::Bool(*b),
            Expr::Var(v) => Value::Num(self.var(v)?),
            Expr::Access(a) => {
                let coords = a.idx.iter().map(|d| self.expr(d).map(num)).collect::<Res<Vec<f64>>>()?;
                self.tensors[&a.tensor].eval(&coords).map_err(|e| OracleError::Layout(e.to_string()))?
            }
            Expr::Diff(v) => Value::Num(self.weight.get(v).copied().unwrap_or(0.0)),
            Expr::Call(name, _) => return Err(OracleError::Unsupported(format!("function `{name}`"))),
            Expr::Unary(Op::Not, a) => Value::Bool(!self.expr(a)?.truthy()),
            Expr::Unary(_, a) => Value::Num(-num(self.expr(a)?)),
            Expr::Binary(op, a, b) => binary(*op, self.expr(a)?, self.expr(b)?),
        })
    }

    fn stmts(&mut self, body: &[Stmt]) -> Res<()> {
        for s in body {
            self.stmt(s)?;
        }
        Ok(())
    }

    fn run_at(&mut self, var: &str, x: f64, body: &[Stmt]) -> Res<()> {
        self.vars.push((var.to_string(), x));
        let r = self.stmts(body);
        self.vars.pop();
        r
    }

    fn stmt(&mut self, s: &Stmt) -> Res<()> {
        match s {
            Stmt::ForDisc { var, lo, hi, body } => {
                let lo = match self.expr(lo) {
                    Ok(v) => num(v),
                    Err(OracleError::MissingParam(_)) => 0.0,
                    Err(e) => return Err(e),
                };
                let hi = match self.expr(hi) {
                    Ok(v) => num(v),
                    Err(OracleError::MissingParam(p)) => {
                        infer_upper_bound(self.program, self.tensors, var).ok_or(OracleError::MissingParam(p))?
                    }
                    Err(e) => return Err(e),
                };
                self.scope.push(var, VarKind::Discrete);
                let mut i = lo.ceil();
                while i <= hi {
                    self.run_at(var, i, body)?;
                    i += 1.0;
                }
                self.scope.pop();
            }
            Stmt::ForCont { var, lo, hi, body } => {
                let (mut a, mut b) = (num(self.expr(lo)?), num(self.expr(hi)?));
                self.scope.push(var, VarKind::Continuous);
                if self.integrated.contains(var) {
                    if !a.is_finite() || !b.is_finite() {
                        let Some(w) = self.opts.window else {
                            self.scope.pop();
                            return Err(OracleError::Unsupported(format!("loop over `{var}` is unbounded; give a window")));
                        };
                        a = a.max(w.0);
                        b = b.min(w.1);
                    }
                    let h = self.opts.step;
                    let n = ((b - a) / h).ceil().max(0.0) as usize;
                    for k in 0..n {
                        let lo = a + k as f64 * h;
                        let hi = (lo + h).min(b);
                        self.weight.insert(var.clone(), hi - lo);
                        self.run_at(var, 0.5 * (lo + hi), body)?;
                    }
                    self.weight.remove(var);
                } else {
                    let mut xs = self.pinpoints(var, body)?;
                    xs.retain(|x| *x >= a && *x <= b);
                    for x in xs {
                        self.run_at(var, x, body)?;
                    }
                }
                self.scope.pop();
            }
            Stmt::If { cond, body } => {
                if self.expr(cond)?.truthy() {
                    self.stmts(body)?;
                }
            }
            Stmt::Let { var, value, body } => {
                let x = num(self.expr(value)?);
                self.scope.push(var, VarKind::Let);
                self.run_at(var, x, body)?;
                self.scope.pop();
            }
            Stmt::Assign { lhs, rhs, .. } => {
                let v = self.expr(rhs)?;
                if v.same(self.out_identity()) {
                    return Ok(());
                }
                let mut path = Vec::new();
                let mut point = false;
                for d in &lhs.idx {
                    let x = num(self.expr(d)?);
                    if matches!(d, Expr::Var(v) if matches!(self.scope.get(v), Some((_, VarKind::Continuous)))) {
                        point = true;
                        path.push(Seg::Span(Interval::point(x)));
                    } else {
                        path.push(Seg::Index(x as usize));
                    }
                }
                if point {
                    self.out.emit(path, v)?;
                } else {
                    let at: Vec<f64> = path.iter().map(|s| if let Seg::Index(i) = s { *i as f64 } else { 0.0 }).collect();
                    self.out.update(&at, v)?;
                }
            }
        }
        Ok(())
    }

    fn out_identity(&self) -> Value {
        self.program.assignments()[0].1.identity()
    }

    /// Every stored coordinate, across all fibers, of pinpoint dimensions
    /// consumed by `var`, shifted into the index's frame.
    fn pinpoints(&self, var: &str, body: &[Stmt]) -> Res<Vec<f64>> {
        let mut found: Vec<(Access, usize)> = Vec::new();
        let mut scope = self.scope.clone();
        collect(body, &mut scope, &mut |a, scope| {
            for (k, d) in a.idx.iter().enumerate() {
                if scope.key(d).map(|x| x.0) == Some(var) {
                    found.push((a.clone(), k));
                }
            }
        });
        let mut xs = Vec::new();
        for (a, k) in found {
            let level = &self.tensors[&a.tensor].levels[k];
            if !level.is_pinpoint() {
                continue;
            }
            let off = num(self.expr(&with_zero(&a.idx[k], var))?);
            xs.extend((0..level.entry_count()).map(|p| level.start(p).val - off));
        }
        if xs.is_empty() && self.lhs.idx.iter().any(|d| matches!(d, Expr::Var(v) if v == var)) {
            return Err(OracleError::Unsupported(format!("`{var}` is neither integrated nor pinned")));
        }
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        Ok(xs)
    }
}
