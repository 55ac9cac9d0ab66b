//! Interpreter for lowered plans and the assembly of their outputs.

use std::cmp::Ordering;

use serde::Serialize;
use thiserror::Error;

use crate::compiler::{has_mul, OutDim, OutputSpec, Plan, Tensors};
use crate::interval::Interval;
use crate::ir::{AssignOp, Env, EvalError, Ex, LhsIdx, Slot, St, V};
use crate::limit::Limit;
use crate::storage::{merge_adjacent, BuildError, ContTensor, DimSpec, Level, Seg};
use crate::value::Value;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Stats {
    /// Updates applied whose right-hand side contains a product.
    pub multiplies: u64,
    /// Segments produced by co-iteration.
    pub segments_visited: u64,
    /// Pieces written to continuous outputs.
    pub pieces_emitted: u64,
    pub nan_values: u64,
}

/// What a `+=` over a region of positive length does when the right-hand
/// side does not carry `d(i)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum SumMode {
    #[default]
    Strict,
    SkipIntervals,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ExecOptions {
    pub sum_mode: SumMode,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExecError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("summation over the interval {0} without d(i); the sum is undefined")]
    SummationOverInterval(Interval),
    #[error("overlapping writes to {0} at {1} and {2}")]
    Overlap(String, String, String),
    #[error("output index {coord} is outside 0..{size} of {name}")]
    OutputRange { name: String, coord: f64, size: usize },
    #[error(transparent)]
    Build(#[from] BuildError),
}

/// Collects the updates of one output tensor.
#[derive(Debug, Clone)]
pub struct Builder {
    spec: OutputSpec,
    sizes: Option<Vec<usize>>,
    flat: Vec<Value>,
    touched: bool,
    saw_bool: bool,
    pieces: Vec<(Vec<Seg>, Value)>,
}

impl Builder {
    pub fn new(spec: &OutputSpec) -> Builder {
        let sizes: Option<Vec<usize>> = spec
            .dims
            .iter()
            .map(|d| match d {
                OutDim::Discrete(n) => Some(*n),
                OutDim::Continuous => None,
            })
            .collect();
        let flat = match &sizes {
            Some(s) => vec![spec.op.identity(); s.iter().product()],
            None => vec![],
        };
        Builder { spec: spec.clone(), sizes, flat, touched: false, saw_bool: false, pieces: vec![] }
    }

    fn index(&self, k: usize, x: f64) -> Result<usize, ExecError> {
        let size = match self.spec.dims[k] {
            OutDim::Discrete(n) => n,
            OutDim::Continuous => usize::MAX,
        };
        if x < 0.0 || x.fract() != 0.0 || x >= size as f64 {
            return Err(ExecError::OutputRange { name: self.spec.name.clone(), coord: x, size });
        }
        Ok(x as usize)
    }

    /// Combines `v` into the entry at discrete coordinates `at`.
    pub fn update(&mut self, at: &[f64], v: Value) -> Result<(), ExecError> {
        self.saw_bool |= v.is_bool();
        match &self.sizes {
            Some(sizes) => {
                let mut p = 0;
                for (k, x) in at.iter().enumerate() {
                    p = p * sizes[k] + self.index(k, *x)?;
                }
                if self.spec.op == AssignOp::Overwrite && !self.touched && v.is_bool() {
                    for e in &mut self.flat {
                        *e = Value::Bool(false);
                    }
                }
                self.touched = true;
                self.flat[p] = self.spec.op.combine(self.flat[p], v);
            }
            None => {
                let path = at.iter().enumerate().map(|(k, x)| self.index(k, *x).map(Seg::Index)).collect::<Result<_, _>>()?;
                self.pieces.push((path, v));
            }
        }
        Ok(())
    }

    /// Writes `v` over a path whose continuous ranks carry whole regions.
    pub fn emit(&mut self, path: Vec<Seg>, v: Value) -> Result<(), ExecError> {
        self.saw_bool |= v.is_bool();
        for (k, s) in path.iter().enumerate() {
            if let Seg::Index(i) = s {
                self.index(k, *i as f64)?;
            }
        }
        self.pieces.push((path, v));
        Ok(())
    }

    fn fill(&self) -> Value {
        match (self.spec.op, self.saw_bool) {
            (AssignOp::Overwrite, true) => Value::Bool(false),
            (op, _) => op.identity(),
        }
    }

    pub fn finish(self) -> Result<ContTensor, ExecError> {
        let fill = self.fill();
        let name = self.spec.name.clone();
        if let Some(sizes) = &self.sizes {
            if sizes.is_empty() {
                return Ok(ContTensor::scalar(&name, self.flat[0]));
            }
            let levels = sizes.iter().map(|n| Level::Dense { size: *n }).collect();
            return Ok(ContTensor::new(&name, levels, self.flat, fill)?);
        }
        let op = self.spec.op;
        let mut pieces = self.pieces;
        pieces.sort_by(|a, b| path_cmp(&a.0, &b.0));
        let mut combined: Vec<(Vec<Seg>, Value)> = Vec::with_capacity(pieces.len());
        for (path, v) in pieces {
            match combined.last_mut() {
                Some((p, acc)) if *p == path => *acc = op.combine(*acc, v),
                Some((p, _)) if overlaps(p, &path) => {
                    let show = |p: &[Seg]| p.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",");
                    return Err(ExecError::Overlap(name, show(p), show(&path)));
                }
                _ => combined.push((path, op.combine(op.identity(), v))),
            }
        }
        combined.retain(|(_, v)| !v.same(fill));
        let dims: Vec<DimSpec> = self
            .spec
            .dims
            .iter()
            .map(|d| match d {
                OutDim::Discrete(n) => DimSpec::Dense(*n),
                OutDim::Continuous => DimSpec::Auto,
            })
            .collect();
        Ok(ContTensor::from_entries(&name, &dims, fill, merge_adjacent(combined))?)
    }
}

fn seg_cmp(a: &Seg, b: &Seg) -> Ordering {
    match (a, b) {
        (Seg::Index(x), Seg::Index(y)) => x.cmp(y),
        (Seg::Span(x), Seg::Span(y)) => x.start.cmp_total(&y.start).then(x.stop.cmp_total(&y.stop)),
        (Seg::Index(_), Seg::Span(_)) => Ordering::Less,
        (Seg::Span(_), Seg::Index(_)) => Ordering::Greater,
    }
}

fn path_cmp(a: &[Seg], b: &[Seg]) -> Ordering {
    a.iter().zip(b).map(|(x, y)| seg_cmp(x, y)).find(|o| o.is_ne()).unwrap_or(Ordering::Equal)
}

fn overlaps(a: &[Seg], b: &[Seg]) -> bool {
    a.iter().zip(b).all(|(x, y)| match (x, y) {
        (Seg::Span(x), Seg::Span(y)) => x.overlaps(y),
        (x, y) => x == y,
    })
}

struct Machine<'a> {
    env: Env<'a>,
    out: Builder,
    stats: Stats,
    opts: ExecOptions,
}

/// Runs a plan against the tensors it was lowered for.
pub fn run(plan: &Plan, tensors: &Tensors, opts: ExecOptions) -> Result<(ContTensor, Stats), ExecError> {
    let inputs: Vec<&ContTensor> = plan.inputs.iter().map(|n| &tensors[n]).collect();
    let mut m = Machine {
        env: Env { tensors: &inputs, slots: vec![V::Num(0.0); plan.slots.len()] },
        out: Builder::new(&plan.output),
        stats: Stats::default(),
        opts,
    };
    m.exec(&plan.body)?;
    let stats = m.stats;
    Ok((m.out.finish()?, stats))
}

impl Machine<'_> {
    fn eval(&self, e: &Ex) -> Result<V, ExecError> {
        Ok(self.env.eval(e)?)
    }

    fn iv(&self, r: Slot) -> Interval {
        self.env.slots[r].iv()
    }

    /// Whether an update over these regions may proceed.
    fn summable(&self, zero_len: &[Slot], rhs: Value) -> Result<bool, ExecError> {
        for r in zero_len {
            let iv = self.iv(*r);
            if iv.length().unwrap_or(0.0) > 0.0 && !rhs.same(Value::Num(0.0)) {
                return match self.opts.sum_mode {
                    SumMode::Strict => Err(ExecError::SummationOverInterval(iv)),
                    SumMode::SkipIntervals => Ok(false),
                };
            }
        }
        Ok(true)
    }

    fn count(&mut self, rhs: &Ex, v: Value) {
        if has_mul(rhs) {
            self.stats.multiplies += 1;
        }
        if v.is_nan() {
            self.stats.nan_values += 1;
        }
    }

    fn exec(&mut self, s: &St) -> Result<(), ExecError> {
        match s {
            St::Block(v) => {
                for s in v {
                    self.exec(s)?;
                }
            }
            St::ForCont { .. } => return Err(EvalError::Unresolved("continuous loop").into()),
            St::If { cond, body } => {
                if self.eval(cond)?.truthy() {
                    self.exec(body)?;
                }
            }
            St::Let { var, ex, body } => {
                self.env.slots[*var] = self.eval(ex)?;
                self.exec(body)?;
            }
            St::Intersect { region, starts, stops, body } => {
                let mut iv = Interval::everything();
                for e in starts {
                    iv.start = iv.start.max(self.eval(e)?.lim());
                }
                for e in stops {
                    iv.stop = iv.stop.min(self.eval(e)?.lim());
                }
                self.env.slots[*region] = V::Iv(iv);
                self.exec(body)?;
            }
            St::Guard { region, body } => {
                if !self.iv(*region).is_empty() {
                    self.exec(body)?;
                }
            }
            St::Pin { var, region, body } => {
                self.env.slots[*var] = V::Num(self.iv(*region).start.val);
                self.exec(body)?;
            }
            St::DiscLoop { var, lo, hi, body } => {
                let (lo, hi) = (self.eval(lo)?.num(), self.eval(hi)?.num());
                let mut i = lo.ceil();
                while i <= hi {
                    self.env.slots[*var] = V::Num(i);
                    self.exec(body)?;
                    i += 1.0;
                }
            }
            St::SparseLoop { var, pos, t, lvl, fiber, lo, hi, stored, fill } => {
                let (lo, hi) = (self.eval(lo)?.num(), self.eval(hi)?.num());
                let f = self.eval(fiber)?.pos();
                let level = &self.env.tensors[*t].levels[*lvl];
                let mut coords: Vec<(f64, usize)> = match f {
                    Some(f) => level.fiber(f).map(|p| (level.start(p).val, p)).collect(),
                    None => vec![],
                };
                coords.retain(|(x, _)| *x >= lo && *x <= hi && x.fract() == 0.0);
                let mut next = coords.into_iter().peekable();
                let mut i = lo.ceil();
                while i <= hi {
                    self.env.slots[*var] = V::Num(i);
                    match next.peek() {
                        Some((x, p)) if *x == i => {
                            self.env.slots[*pos] = V::Pos(Some(*p));
                            next.next();
                            self.exec(stored)?;
                        }
                        _ => {
                            if fill.is_empty() {
                                match next.peek() {
                                    Some((x, _)) => {
                                        i = *x;
                                        continue;
                                    }
                                    None => break,
                                }
                            }
                            self.exec(fill)?;
                        }
                    }
                    i += 1.0;
                }
            }
            St::Coiter { range, segment, steppers, stops, body } => {
                let r = self.iv(*range);
                for st in steppers {
                    let Some(f) = self.eval(&st.fiber)?.pos() else { return Ok(()) };
                    let off = self.eval(&st.offset)?.num();
                    let p = self.env.tensors[st.t].levels[st.lvl].seek(f, r.start + off);
                    self.env.slots[st.pos] = V::Pos(Some(p));
                }
                let mut i = r.start;
                while i.cmp_total(&r.stop).is_le() {
                    let mut ends = Vec::with_capacity(stops.len());
                    let mut stop = r.stop;
                    for e in stops {
                        let s = self.eval(e)?.lim();
                        stop = stop.min(s);
                        ends.push(s);
                    }
                    self.env.slots[*segment] = V::Iv(Interval::new(i, stop));
                    self.stats.segments_visited += 1;
                    self.exec(body)?;
                    for (st, s) in steppers.iter().zip(ends) {
                        if s == stop {
                            if let V::Pos(Some(p)) = self.env.slots[st.pos] {
                                self.env.slots[st.pos] = V::Pos(Some(p + 1));
                            }
                        }
                    }
                    if stop == Limit::POS_INF {
                        break;
                    }
                    i = stop.nudge(1);
                }
            }
            St::Accumulate { lhs, rhs, zero_len, .. } => {
                let v = self.eval(rhs)?.value();
                if !self.summable(zero_len, v)? {
                    return Ok(());
                }
                let at = lhs
                    .idx
                    .iter()
                    .map(|i| match i {
                        LhsIdx::At(e) => self.eval(e).map(|v| v.num()),
                        LhsIdx::Span(_) => unreachable!("accumulate with a region index"),
                    })
                    .collect::<Result<Vec<f64>, _>>()?;
                self.count(rhs, v);
                self.out.update(&at, v)?;
            }
            St::EmitPiece { lhs, rhs, zero_len, .. } => {
                let v = self.eval(rhs)?.value();
                if !self.summable(zero_len, v)? {
                    return Ok(());
                }
                let mut path = Vec::with_capacity(lhs.idx.len());
                for i in &lhs.idx {
                    path.push(match i {
                        LhsIdx::At(e) => {
                            let x = self.eval(e)?.num();
                            if x < 0.0 || x.fract() != 0.0 {
                                return Err(ExecError::OutputRange { name: self.out.spec.name.clone(), coord: x, size: 0 });
                            }
                            Seg::Index(x as usize)
                        }
                        LhsIdx::Span(r) => {
                            let iv = self.iv(*r);
                            if iv.is_empty() {
                                return Ok(());
                            }
                            Seg::Span(iv)
                        }
                    });
                }
                self.count(rhs, v);
                self.stats.pieces_emitted += 1;
                self.out.emit(path, v)?;
            }
        }
        Ok(())
    }
}
