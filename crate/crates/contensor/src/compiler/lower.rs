use std::collections::{BTreeMap, HashMap};

use super::simplify::{simplify, simplify_ex, st_uses};
use super::{CompileError, LowerOptions, OutDim, OutputSpec, Params, Plan, Tensors};
use crate::ir::{Ex, Lhs, LhsIdx, Measure, Names, Op, Slot, Slots, St, StepperState};
use crate::lang::scope::Scope;
use crate::lang::scope::VarKind;
use crate::lang::{Access, Expr, Program, Stmt};
use crate::looplet::{unfurl, unfurl_empty, unfurl_single, Looplet, Payload};
use crate::storage::ContTensor;

type Res<T> = Result<T, CompileError>;

/// Where an input access stands: the next level to consume and the fiber it
/// is read from, or the finished scalar expression.
#[derive(Debug, Clone)]
enum Acc {
    Live { t: usize, lvl: usize, fiber: Ex },
    Done(Ex),
}

#[derive(Debug, Clone, Copy)]
enum Bind {
    Slot(Slot),
    /// A continuous index bound to a whole region; reading it is an error.
    Unpinned(Slot),
}

#[derive(Debug, Clone)]
struct Cont {
    var: String,
    slot: Slot,
    region: Slot,
    pinned: bool,
}

#[derive(Debug, Clone, Default)]
struct Ctx {
    acc: BTreeMap<usize, Acc>,
    binds: Vec<(String, Bind)>,
    conts: Vec<Cont>,
}

#[derive(Debug, Clone)]
struct Range {
    start: Ex,
    stop: Ex,
    region: Option<Slot>,
}

struct Info {
    t: usize,
    dims: Vec<Expr>,
    /// The index that consumes each dimension: the innermost one it reads.
    keys: Vec<Option<String>>,
    text: String,
}

struct Lowerer<'a> {
    tensors: Vec<&'a ContTensor>,
    inputs: Vec<String>,
    info: BTreeMap<usize, Info>,
    loops: HashMap<String, (bool, Expr, Expr)>,
    params: &'a Params,
    opts: &'a LowerOptions,
    slots: Slots,
    looplets: String,
}

impl<'a> Lowerer<'a> {
    fn new(program: &Program, tensors: &'a Tensors, params: &'a Params, opts: &'a LowerOptions) -> Self {
        let inputs = program.inputs();
        let mut lw = Lowerer {
            tensors: inputs.iter().map(|n| &tensors[n]).collect(),
            inputs,
            info: BTreeMap::new(),
            loops: HashMap::new(),
            params,
            opts,
            slots: Slots::default(),
            looplets: String::new(),
        };
        lw.collect(&program.body, &mut Scope::default());
        lw
    }

    fn output_spec(&self, program: &Program) -> Res<OutputSpec> {
        let Some((lhs, op, _)) = program.assignments().first().copied() else {
            return Err(CompileError::Unsupported("a kernel needs an assignment".into()));
        };
        Ok(OutputSpec { name: lhs.tensor.clone(), dims: self.output_dims(lhs)?, op })
    }
}

pub(super) fn lower(program: &Program, tensors: &Tensors, params: &Params, opts: &LowerOptions) -> Res<Plan> {
    let mut lw = Lowerer::new(program, tensors, params, opts);
    let output = lw.output_spec(program)?;
    let mut ctx = Ctx::default();
    for (id, inf) in &lw.info {
        ctx.acc.insert(*id, Acc::Live { t: inf.t, lvl: 0, fiber: Ex::Num(0.0) });
    }
    lw.advance(&mut ctx)?;
    let body = lw.stmts(&program.body, &ctx)?;
    let inputs = lw.inputs;
    Ok(Plan { body, slots: lw.slots, inputs, output, looplets: lw.looplets })
}

/// Shape of the tensor `program` writes.
pub fn output_spec(program: &Program, tensors: &Tensors, params: &Params) -> Res<OutputSpec> {
    Lowerer::new(program, tensors, params, &LowerOptions::default()).output_spec(program)
}

/// Upper bound of a discrete index whose bound names no parameter: the last
/// coordinate of a level indexed by it alone.
pub fn infer_upper_bound(program: &Program, tensors: &Tensors, var: &str) -> Option<f64> {
    let params = Params::new();
    Lowerer::new(program, tensors, &params, &LowerOptions::default()).infer_hi(var)
}

fn subst_zero(e: &Expr, var: &str) -> Expr {
    match e {
        Expr::Var(v) if v == var => Expr::Num { value: 0.0, float: true },
        Expr::Unary(op, a) => Expr::Unary(*op, Box::new(subst_zero(a, var))),
        Expr::Binary(op, a, b) => Expr::Binary(*op, Box::new(subst_zero(a, var)), Box::new(subst_zero(b, var))),
        e => e.clone(),
    }
}

fn replace_diff(e: Ex, slot: Slot, with: f64) -> Ex {
    e.map(&mut |e| match e {
        Ex::Diff(s) if s == slot => Ex::Num(with),
        e => e,
    })
}

fn fill_of(t: &ContTensor) -> Ex {
    Ex::from_value(t.fill)
}

impl<'a> Lowerer<'a> {
    fn collect(&mut self, body: &[Stmt], scope: &mut Scope) {
        for s in body {
            let record = |lw: &mut Self, e: &Expr, scope: &Scope| {
                for a in e.accesses() {
                    lw.record(a, scope);
                }
            };
            match s {
                Stmt::ForCont { var, lo, hi, body } | Stmt::ForDisc { var, lo, hi, body } => {
                    record(self, lo, scope);
                    record(self, hi, scope);
                    let cont = matches!(s, Stmt::ForCont { .. });
                    self.loops.insert(var.clone(), (cont, lo.clone(), hi.clone()));
                    scope.push(var, if cont { VarKind::Continuous } else { VarKind::Discrete });
                    self.collect(body, scope);
                    scope.pop();
                }
                Stmt::If { cond, body } => {
                    record(self, cond, scope);
                    self.collect(body, scope);
                }
                Stmt::Let { var, value, body } => {
                    record(self, value, scope);
                    scope.push(var, VarKind::Let);
                    self.collect(body, scope);
                    scope.pop();
                }
                Stmt::Assign { rhs, .. } => record(self, rhs, scope),
            }
        }
    }

    fn record(&mut self, a: &Access, scope: &Scope) {
        let t = self.inputs.iter().position(|n| *n == a.tensor).expect("inputs cover every read tensor");
        let keys = a.idx.iter().map(|d| scope.key(d).map(|(v, _)| v.to_string())).collect();
        self.info.insert(a.id, Info { t, dims: a.idx.clone(), keys, text: a.to_string() });
    }

    fn names(&self) -> Names {
        Names { slots: self.slots.names.clone(), tensors: self.inputs.clone(), outputs: vec![], accesses: vec![] }
    }

    fn simp(&self, s: St) -> St {
        if self.opts.no_simplify {
            s
        } else {
            simplify(s)
        }
    }

    fn simp_ex(&self, e: Ex) -> Ex {
        if self.opts.no_simplify {
            e
        } else {
            simplify_ex(e)
        }
    }

    fn lookup<'c>(&self, name: &str, ctx: &'c Ctx) -> Option<&'c Bind> {
        ctx.binds.iter().rev().find(|b| b.0 == name).map(|b| &b.1)
    }

    /// Whether every index read by `e` has a scalar value here.
    fn ready(&self, e: &Expr, ctx: &Ctx) -> bool {
        e.vars().iter().all(|v| match self.lookup(v, ctx) {
            Some(Bind::Slot(_)) => true,
            Some(Bind::Unpinned(_)) => false,
            None => !self.loops.contains_key(*v),
        })
    }

    fn ex_of(&self, e: &Expr, ctx: &Ctx) -> Res<Ex> {
        Ok(match e {
            Expr::Num { value, .. } => Ex::Num(*value),
            Expr::Bool(b) => Ex::Bool(*b),
            Expr::Var(v) => match self.lookup(v, ctx) {
                Some(Bind::Slot(s)) | Some(Bind::Unpinned(s)) => Ex::Var(*s),
                None => match self.params.get(v) {
                    Some(x) => Ex::Num(*x),
                    None if self.loops.contains_key(v) => {
                        return Err(CompileError::Layout(format!("index `{v}` is read outside its loop")))
                    }
                    None => return Err(CompileError::MissingParam(v.clone())),
                },
            },
            Expr::Access(a) => match ctx.acc.get(&a.id) {
                Some(Acc::Done(e)) => e.clone(),
                _ => {
                    return Err(CompileError::Layout(format!(
                        "{a} is read before all of its dimensions are consumed; loop order does not match its level order"
                    )))
                }
            },
            Expr::Diff(v) => match ctx.conts.iter().rev().find(|c| c.var == *v) {
                Some(c) => Ex::Diff(c.slot),
                None => return Err(CompileError::Unsupported(format!("d({v}) outside its loop"))),
            },
            Expr::Call(f, _) => return Err(CompileError::Unsupported(format!("function `{f}`"))),
            Expr::Unary(op, a) => Ex::call(*op, vec![self.ex_of(a, ctx)?]),
            Expr::Binary(op, a, b) => Ex::bin(*op, self.ex_of(a, ctx)?, self.ex_of(b, ctx)?),
        })
    }

    /// Consumes every level whose coordinate is already known.
    fn advance(&self, ctx: &mut Ctx) -> Res<()> {
        let ids: Vec<usize> = ctx.acc.keys().copied().collect();
        for id in ids {
            while let Some(Acc::Live { t, lvl, fiber }) = ctx.acc.get(&id).cloned() {
                let info = &self.info[&id];
                if lvl == info.dims.len() {
                    ctx.acc.insert(id, Acc::Done(Ex::Val { t, pos: Box::new(fiber) }));
                    break;
                }
                let dim = &info.dims[lvl];
                if !self.ready(dim, ctx) {
                    break;
                }
                let coord = Box::new(self.simp_ex(self.ex_of(dim, ctx)?));
                let fiber = Box::new(fiber);
                let next = if self.tensors[t].levels[lvl].is_dense() {
                    Ex::DensePos { t, lvl, fiber, idx: coord }
                } else {
                    Ex::Locate { t, lvl, fiber, coord }
                };
                ctx.acc.insert(id, Acc::Live { t, lvl: lvl + 1, fiber: next });
            }
        }
        Ok(())
    }

    fn stmts(&mut self, body: &[Stmt], ctx: &Ctx) -> Res<St> {
        let mut out = Vec::with_capacity(body.len());
        for s in body {
            out.push(self.stmt(s, ctx)?);
        }
        Ok(self.simp(St::block(out)))
    }

    fn stmt(&mut self, s: &Stmt, ctx: &Ctx) -> Res<St> {
        match s {
            Stmt::ForDisc { var, lo, hi, body } => self.discrete(var, lo, hi, body, ctx),
            Stmt::ForCont { var, lo, hi, body } => self.continuous(var, lo, hi, body, ctx),
            Stmt::If { cond, body } => {
                let cond = self.ex_of(cond, ctx)?;
                if simplify_ex(cond.clone()) == Ex::Bool(false) {
                    return Ok(St::empty());
                }
                let cond = self.simp_ex(cond);
                let body = self.stmts(body, ctx)?;
                Ok(self.simp(St::If { cond, body: Box::new(body) }))
            }
            Stmt::Let { var, value, body } => {
                let ex = self.simp_ex(self.ex_of(value, ctx)?);
                let slot = self.slots.fresh(var);
                let mut inner = ctx.clone();
                inner.binds.push((var.clone(), Bind::Slot(slot)));
                self.advance(&mut inner)?;
                let body = self.stmts(body, &inner)?;
                Ok(self.simp(St::Let { var: slot, ex, body: Box::new(body) }))
            }
            Stmt::Assign { lhs, op, rhs } => self.assign(lhs, *op, rhs, ctx),
        }
    }

    /// Largest coordinate any tensor offers along a dimension indexed by `var` alone.
    fn infer_hi(&self, var: &str) -> Option<f64> {
        for inf in self.info.values() {
            for (k, d) in inf.dims.iter().enumerate() {
                if matches!(d, Expr::Var(v) if v == var) {
                    let level = &self.tensors[inf.t].levels[k];
                    if let crate::storage::Level::Dense { size } = level {
                        return Some(*size as f64 - 1.0);
                    }
                    let hi = (0..level.entry_count()).map(|p| level.start(p).val).fold(f64::NEG_INFINITY, f64::max);
                    return Some(if hi.is_finite() { hi.floor() } else { -1.0 });
                }
            }
        }
        None
    }

    fn disc_bound(&self, var: &str, e: &Expr, is_hi: bool, ctx: &Ctx) -> Res<Ex> {
        match self.ex_of(e, ctx) {
            Ok(x) => Ok(simplify_ex(x)),
            Err(CompileError::MissingParam(p)) => {
                if !is_hi {
                    return Ok(Ex::Num(0.0));
                }
                self.infer_hi(var).map(Ex::Num).ok_or(CompileError::MissingParam(p))
            }
            Err(e) => Err(e),
        }
    }

    fn output_dims(&self, lhs: &Access) -> Res<Vec<OutDim>> {
        let mut dims = Vec::with_capacity(lhs.idx.len());
        for d in &lhs.idx {
            let size = match d {
                Expr::Var(v) => match self.loops.get(v) {
                    Some((true, _, _)) => {
                        dims.push(OutDim::Continuous);
                        continue;
                    }
                    Some((false, _, hi)) => match self.disc_bound(v, hi, true, &Ctx::default())? {
                        Ex::Num(h) if h.fract() == 0.0 => (h + 1.0).max(0.0) as usize,
                        _ => return Err(CompileError::Unsupported(format!("output index `{v}` needs a constant upper bound"))),
                    },
                    None => return Err(CompileError::Unsupported(format!("output index `{v}` is not a loop index"))),
                },
                Expr::Num { value, .. } if value.fract() == 0.0 && *value >= 0.0 => *value as usize + 1,
                d => return Err(CompileError::Unsupported(format!("output index `{d}`"))),
            };
            dims.push(OutDim::Discrete(size));
        }
        Ok(dims)
    }

    fn discrete(&mut self, var: &str, lo: &Expr, hi: &Expr, body: &[Stmt], ctx: &Ctx) -> Res<St> {
        let lo = self.disc_bound(var, lo, false, ctx)?;
        let hi = self.disc_bound(var, hi, true, ctx)?;
        let slot = self.slots.fresh(var);
        let mut inner = ctx.clone();
        inner.binds.push((var.to_string(), Bind::Slot(slot)));
        let driver = inner.acc.iter().find_map(|(id, a)| match a {
            Acc::Live { t, lvl, fiber } => {
                let level = &self.tensors[*t].levels[*lvl];
                let keyed = matches!(&self.info[id].dims[*lvl], Expr::Var(v) if v == var);
                (keyed && level.is_pinpoint()).then(|| (*id, *t, *lvl, fiber.clone()))
            }
            Acc::Done(_) => None,
        });
        let Some((id, t, lvl, fiber)) = driver else {
            self.advance(&mut inner)?;
            let body = self.stmts(body, &inner)?;
            return Ok(self.simp(St::DiscLoop { var: slot, lo, hi, body: Box::new(body) }));
        };
        let pos = self.slots.fresh(&format!("p_{}{lvl}", self.inputs[t]));
        let mut stored = inner.clone();
        stored.acc.insert(id, Acc::Live { t, lvl: lvl + 1, fiber: Ex::Var(pos) });
        self.advance(&mut stored)?;
        let stored = self.stmts(body, &stored)?;
        let mut fill = inner;
        fill.acc.insert(id, Acc::Done(fill_of(self.tensors[t])));
        self.advance(&mut fill)?;
        let fill = self.stmts(body, &fill)?;
        Ok(self.simp(St::SparseLoop { var: slot, pos, t, lvl, fiber, lo, hi, stored: Box::new(stored), fill: Box::new(fill) }))
    }

    fn looplet_of(&mut self, t: usize, lvl: usize, fiber: Ex, offset: Ex) -> Looplet {
        let tensor = self.tensors[t];
        if let Ex::Num(f) = fiber {
            let r = tensor.levels[lvl].fiber(f as usize);
            match r.len() {
                0 => return unfurl_empty(),
                1 => return unfurl_single(tensor, t, lvl, r.start, offset),
                _ => {}
            }
        }
        unfurl(tensor, t, lvl, fiber, offset, &mut self.slots)
    }

    fn continuous(&mut self, var: &str, lo: &Expr, hi: &Expr, body: &[Stmt], ctx: &Ctx) -> Res<St> {
        let start = simplify_ex(self.ex_of(lo, ctx)?);
        let stop = simplify_ex(self.ex_of(hi, ctx)?);
        let mut lps = Vec::new();
        for (id, a) in &ctx.acc {
            let Acc::Live { t, lvl, fiber } = a else { continue };
            let info = &self.info[id];
            let key = info.keys[*lvl].as_deref();
            if key != Some(var) {
                if info.keys[*lvl..].iter().any(|k| k.as_deref() == Some(var)) {
                    return Err(CompileError::Layout(format!(
                        "{} is consumed by `{var}` before its dimension {lvl} is; reorder the loops or the tensor levels",
                        info.text
                    )));
                }
                continue;
            }
            if self.tensors[*t].levels[*lvl].is_dense() {
                return Err(CompileError::Layout(format!("{}: continuous index `{var}` on a dense level", info.text)));
            }
            let offset = subst_zero(&info.dims[*lvl], var);
            if !self.ready(&offset, ctx) {
                return Err(CompileError::Layout(format!(
                    "{}: the other indices of `{}` are not scalars here; they must be pinned",
                    info.text, info.dims[*lvl]
                )));
            }
            let offset = simplify_ex(self.ex_of(&offset, ctx)?);
            let text = info.text.clone();
            let lp = self.looplet_of(*t, *lvl, fiber.clone(), offset);
            self.looplets.push_str(&format!("{text} along {var}:\n{}", lp.pretty(&self.names())));
            lps.push((*id, lp));
        }
        let range = Range { start, stop, region: None };
        self.walk(var, lps, range, false, body, ctx.clone())
    }

    fn resolve(&self, ctx: &mut Ctx, id: usize, payload: Payload, var: &str) -> Res<()> {
        let Some(Acc::Live { t, lvl, .. }) = ctx.acc.get(&id).cloned() else { unreachable!("resolved access resolved again") };
        let info = &self.info[&id];
        let next = match payload {
            Payload::Fill => Acc::Done(fill_of(self.tensors[t])),
            Payload::At(p) if lvl + 1 == info.dims.len() => Acc::Done(Ex::Val { t, pos: Box::new(p) }),
            Payload::At(p) => {
                if info.keys[lvl + 1].as_deref() == Some(var) {
                    return Err(CompileError::Layout(format!("{} reads `{var}` in two dimensions", info.text)));
                }
                Acc::Live { t, lvl: lvl + 1, fiber: p }
            }
        };
        ctx.acc.insert(id, next);
        self.advance(ctx)
    }

    fn walk(&mut self, var: &str, mut lps: Vec<(usize, Looplet)>, range: Range, pinned: bool, body: &[Stmt], mut ctx: Ctx) -> Res<St> {
        if let Some(k) = lps.iter().position(|l| matches!(l.1, Looplet::Run { .. })) {
            let (id, Looplet::Run { payload, point }) = lps.remove(k) else { unreachable!() };
            self.resolve(&mut ctx, id, payload, var)?;
            return self.walk(var, lps, range, pinned || point, body, ctx);
        }
        if lps.iter().any(|l| matches!(l.1, Looplet::Phase { .. })) {
            let mut starts = vec![range.start];
            let mut stops = vec![range.stop];
            let lps: Vec<(usize, Looplet)> = lps
                .into_iter()
                .map(|(id, l)| match l {
                    Looplet::Phase { start, stop, body } => {
                        starts.extend(start);
                        stops.push(stop);
                        (id, *body)
                    }
                    l => (id, l),
                })
                .collect();
            let r = self.slots.fresh("R");
            let inner = Range { start: Ex::RStart(r), stop: Ex::RStop(r), region: Some(r) };
            let inner = self.walk(var, lps, inner, pinned, body, ctx)?;
            let guarded = St::Guard { region: r, body: Box::new(inner) };
            return Ok(self.simp(St::Intersect { region: r, starts, stops, body: Box::new(guarded) }));
        }
        if let Some(k) = lps.iter().position(|l| matches!(l.1, Looplet::Sequence(_))) {
            let (id, Looplet::Sequence(phases)) = lps[k].clone() else { unreachable!() };
            let mut prev: Option<Ex> = None;
            let mut out = Vec::with_capacity(phases.len());
            for ph in phases {
                let Looplet::Phase { start, stop, body: inner } = ph else { unreachable!("sequences hold phases") };
                let start = start.or_else(|| prev.clone().map(|p| Ex::Nudge(Box::new(p), 1)));
                let mut branch = lps.clone();
                branch[k] = (id, Looplet::Phase { start, stop: stop.clone(), body: inner });
                out.push(self.walk(var, branch, range.clone(), pinned, body, ctx.clone())?);
                prev = Some(stop);
            }
            return Ok(self.simp(St::block(out)));
        }
        if lps.iter().any(|l| matches!(l.1, Looplet::Stepper { .. })) {
            let (r, wrap) = match range.region {
                Some(r) => (r, None),
                None => (self.slots.fresh("R"), Some((range.start, range.stop))),
            };
            let seg = self.slots.fresh("S");
            let mut steppers = Vec::new();
            let mut stops = Vec::new();
            let lps: Vec<(usize, Looplet)> = lps
                .into_iter()
                .map(|(id, l)| match l {
                    Looplet::Stepper { t, lvl, fiber, pos, offset, body, stop } => {
                        steppers.push(StepperState { pos, t, lvl, fiber, offset });
                        stops.push(stop);
                        (id, *body)
                    }
                    l => (id, l),
                })
                .collect();
            let inner = Range { start: Ex::RStart(seg), stop: Ex::RStop(seg), region: Some(seg) };
            let inner = self.walk(var, lps, inner, pinned, body, ctx)?;
            let co = St::Coiter { range: r, segment: seg, steppers, stops, body: Box::new(inner) };
            let out = match wrap {
                Some((a, b)) => St::Intersect { region: r, starts: vec![a], stops: vec![b], body: Box::new(co) },
                None => co,
            };
            return Ok(self.simp(out));
        }
        if let Some((id, _)) = lps.first() {
            return Err(CompileError::Layout(format!("{}: `{var}` reaches a dense level", self.info[id].text)));
        }
        self.finish(var, range, pinned, body, ctx)
    }

    /// Every access is constant over the region: bind the index and lower the body.
    fn finish(&mut self, var: &str, range: Range, pinned: bool, body: &[Stmt], mut ctx: Ctx) -> Res<St> {
        let (r, wrap) = match range.region {
            Some(r) => (r, None),
            None => (self.slots.fresh("R"), Some((range.start, range.stop))),
        };
        let slot = self.slots.fresh(var);
        ctx.conts.push(Cont { var: var.to_string(), slot, region: r, pinned });
        ctx.binds.push((var.to_string(), if pinned { Bind::Slot(slot) } else { Bind::Unpinned(slot) }));
        self.advance(&mut ctx)?;
        let inner = self.stmts(body, &ctx)?;
        if !pinned && !self.opts.no_simplify && st_uses(&inner, slot) {
            return Err(CompileError::Layout(format!(
                "continuous index `{var}` is read as a scalar over a region that is not a single point"
            )));
        }
        let mut out = if pinned { St::Pin { var: slot, region: r, body: Box::new(inner) } } else { inner };
        if let Some((a, b)) = wrap {
            out = St::Intersect { region: r, starts: vec![a], stops: vec![b], body: Box::new(St::Guard { region: r, body: Box::new(out) }) };
        }
        Ok(self.simp(out))
    }

    /// Collapses the assignment over every enclosing continuous region.
    fn assign(&mut self, lhs: &Access, op: crate::ir::AssignOp, rhs: &Expr, ctx: &Ctx) -> Res<St> {
        let mut rhs = self.ex_of(rhs, ctx)?;
        let mut idx = Vec::with_capacity(lhs.idx.len());
        for d in &lhs.idx {
            match d {
                Expr::Var(v) if ctx.conts.iter().any(|c| c.var == *v) => {
                    let c = ctx.conts.iter().rev().find(|c| c.var == *v).unwrap();
                    idx.push(LhsIdx::Span(c.region));
                }
                d => idx.push(LhsIdx::At(self.simp_ex(self.ex_of(d, ctx)?))),
            }
        }
        let mut zero_len = Vec::new();
        let mut measure = Measure::Counting;
        for c in &ctx.conts {
            if c.pinned {
                rhs = replace_diff(rhs, c.slot, 0.0);
            } else if idx.contains(&LhsIdx::Span(c.region)) {
                continue;
            } else if rhs.any(&|e| *e == Ex::Diff(c.slot)) {
                rhs = Ex::bin(Op::Mul, Ex::Len(c.region), replace_diff(rhs, c.slot, 1.0));
                measure = Measure::Lebesgue;
            } else if op == crate::ir::AssignOp::Add {
                zero_len.push(c.region);
            }
        }
        let rhs = self.simp_ex(rhs);
        let lhs = Lhs { out: 0, idx };
        let s = if lhs.idx.iter().any(|i| matches!(i, LhsIdx::Span(_))) {
            St::EmitPiece { lhs, op, rhs, zero_len }
        } else {
            St::Accumulate { lhs, op, rhs, measure, zero_len }
        };
        Ok(self.simp(s))
    }
}
