//! Expression and statement trees shared by lowering, simplification and
//! execution, plus the scalar evaluator.
//!
//! Before lowering a tree still holds continuous loops, raw tensor accesses
//! and `d(i)` markers; a finished plan holds none of them.

use std::fmt::{self, Write};

use thiserror::Error;

use crate::interval::Interval;
use crate::limit::{fmt_num, Limit};
use crate::storage::{ContTensor, Level};
use crate::value::Value;

pub type Slot = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
    Not,
    Max,
    Min,
}

impl Op {
    pub fn symbol(self) -> &'static str {
        match self {
            Op::Add => "+",
            Op::Sub | Op::Neg => "-",
            Op::Mul => "*",
            Op::Div => "/",
            Op::Lt => "<",
            Op::Le => "<=",
            Op::Gt => ">",
            Op::Ge => ">=",
            Op::Eq => "==",
            Op::Ne => "!=",
            Op::And => "&&",
            Op::Or => "||",
            Op::Not => "!",
            Op::Max => "max",
            Op::Min => "min",
        }
    }

    fn prec(self) -> u8 {
        match self {
            Op::Or => 1,
            Op::And => 2,
            Op::Lt | Op::Le | Op::Gt | Op::Ge | Op::Eq | Op::Ne => 3,
            Op::Add | Op::Sub => 4,
            Op::Mul | Op::Div => 5,
            Op::Neg | Op::Not => 6,
            Op::Max | Op::Min => 7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AssignOp {
    Overwrite,
    Add,
    Or,
    And,
    Max,
    Min,
}

impl AssignOp {
    pub fn symbol(self) -> &'static str {
        match self {
            AssignOp::Overwrite => "=",
            AssignOp::Add => "+=",
            AssignOp::Or => "|=",
            AssignOp::And => "&=",
            AssignOp::Max => "max=",
            AssignOp::Min => "min=",
        }
    }

    /// Identity element, which is also the fill of an output written with this op.
    pub fn identity(self) -> Value {
        match self {
            AssignOp::Overwrite | AssignOp::Add => Value::Num(0.0),
            AssignOp::Or => Value::Bool(false),
            AssignOp::And => Value::Bool(true),
            AssignOp::Max => Value::Num(f64::NEG_INFINITY),
            AssignOp::Min => Value::Num(f64::INFINITY),
        }
    }

    pub fn combine(self, acc: Value, x: Value) -> Value {
        match self {
            AssignOp::Overwrite => x,
            AssignOp::Add => match (acc, x) {
                (Value::Bool(a), Value::Bool(b)) => Value::Num(a as u8 as f64 + b as u8 as f64),
                (a, b) => Value::Num(a.as_f64() + b.as_f64()),
            },
            AssignOp::Or => Value::Bool(acc.truthy() || x.truthy()),
            AssignOp::And => Value::Bool(acc.truthy() && x.truthy()),
            AssignOp::Max => Value::Num(acc.as_f64().max(x.as_f64())),
            AssignOp::Min => Value::Num(acc.as_f64().min(x.as_f64())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Ex {
    Num(f64),
    Bool(bool),
    Lim(Limit),
    Var(Slot),
    /// Unresolved tensor access, by access id.
    Access(usize),
    /// The `d(i)` marker of an integral.
    Diff(Slot),
    Call(Op, Vec<Ex>),
    /// Leaf payload of tensor `t` at a position.
    Val { t: usize, pos: Box<Ex> },
    /// Lower endpoint of a stored entry.
    Start { t: usize, lvl: usize, pos: Box<Ex> },
    /// Upper endpoint of a stored entry.
    Stop { t: usize, lvl: usize, pos: Box<Ex> },
    /// Upper endpoint of the last entry of a fiber.
    LastStop { t: usize, lvl: usize, fiber: Box<Ex> },
    /// Child position `fiber·size + idx` of a dense level.
    DensePos { t: usize, lvl: usize, fiber: Box<Ex>, idx: Box<Ex> },
    /// Position whose piece contains a coordinate, if any.
    Locate { t: usize, lvl: usize, fiber: Box<Ex>, coord: Box<Ex> },
    RStart(Slot),
    RStop(Slot),
    /// `drop_eps(stop - start)` of a region.
    Len(Slot),
    Nudge(Box<Ex>, i8),
}

impl Ex {
    pub fn call(op: Op, args: Vec<Ex>) -> Ex {
        Ex::Call(op, args)
    }

    pub fn bin(op: Op, a: Ex, b: Ex) -> Ex {
        Ex::Call(op, vec![a, b])
    }

    pub fn is_const(&self) -> bool {
        matches!(self, Ex::Num(_) | Ex::Bool(_) | Ex::Lim(_))
    }

    pub fn from_value(v: Value) -> Ex {
        match v {
            Value::Num(x) => Ex::Num(x),
            Value::Bool(b) => Ex::Bool(b),
        }
    }

    /// Visits every sub-expression, parents first.
    pub fn visit(&self, f: &mut impl FnMut(&Ex)) {
        f(self);
        match self {
            Ex::Call(_, args) => args.iter().for_each(|a| a.visit(f)),
            Ex::Val { pos, .. } | Ex::Start { pos, .. } | Ex::Stop { pos, .. } => pos.visit(f),
            Ex::LastStop { fiber, .. } => fiber.visit(f),
            Ex::DensePos { fiber, idx, .. } => {
                fiber.visit(f);
                idx.visit(f)
            }
            Ex::Locate { fiber, coord, .. } => {
                fiber.visit(f);
                coord.visit(f)
            }
            Ex::Nudge(e, _) => e.visit(f),
            _ => {}
        }
    }

    pub fn any(&self, pred: &impl Fn(&Ex) -> bool) -> bool {
        let mut hit = false;
        self.visit(&mut |e| hit |= pred(e));
        hit
    }

    pub fn uses_var(&self, s: Slot) -> bool {
        self.any(&|e| matches!(e, Ex::Var(v) if *v == s))
    }

    /// Rebuilds the tree bottom-up through `f`.
    pub fn map(self, f: &mut impl FnMut(Ex) -> Ex) -> Ex {
        let e = match self {
            Ex::Call(op, args) => Ex::Call(op, args.into_iter().map(|a| a.map(f)).collect()),
            Ex::Val { t, pos } => Ex::Val { t, pos: Box::new(pos.map(f)) },
            Ex::Start { t, lvl, pos } => Ex::Start { t, lvl, pos: Box::new(pos.map(f)) },
            Ex::Stop { t, lvl, pos } => Ex::Stop { t, lvl, pos: Box::new(pos.map(f)) },
            Ex::LastStop { t, lvl, fiber } => Ex::LastStop { t, lvl, fiber: Box::new(fiber.map(f)) },
            Ex::DensePos { t, lvl, fiber, idx } => {
                Ex::DensePos { t, lvl, fiber: Box::new(fiber.map(f)), idx: Box::new(idx.map(f)) }
            }
            Ex::Locate { t, lvl, fiber, coord } => {
                Ex::Locate { t, lvl, fiber: Box::new(fiber.map(f)), coord: Box::new(coord.map(f)) }
            }
            Ex::Nudge(e, k) => Ex::Nudge(Box::new(e.map(f)), k),
            e => e,
        };
        f(e)
    }
}

/// Output coordinate in an assignment target.
#[derive(Debug, Clone, PartialEq)]
pub enum LhsIdx {
    At(Ex),
    /// A whole region of a continuous output rank.
    Span(Slot),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lhs {
    pub out: usize,
    pub idx: Vec<LhsIdx>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    Counting,
    Lebesgue,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepperState {
    pub pos: Slot,
    pub t: usize,
    pub lvl: usize,
    pub fiber: Ex,
    pub offset: Ex,
}

#[derive(Debug, Clone, PartialEq)]
pub enum St {
    Block(Vec<St>),
    /// A continuous loop that was never lowered; valid plans hold none.
    ForCont { idx: Slot, start: Ex, stop: Ex, body: Box<St> },
    If { cond: Ex, body: Box<St> },
    Let { var: Slot, ex: Ex, body: Box<St> },
    /// Binds `region = [max(starts), min(stops)]`.
    Intersect { region: Slot, starts: Vec<Ex>, stops: Vec<Ex>, body: Box<St> },
    /// Runs the body only when the region is non-empty.
    Guard { region: Slot, body: Box<St> },
    /// Binds a continuous index to the start of a pinpoint region.
    Pin { var: Slot, region: Slot, body: Box<St> },
    DiscLoop { var: Slot, lo: Ex, hi: Ex, body: Box<St> },
    /// Discrete loop over a sparse level: `stored` runs at stored coordinates
    /// with `pos` bound, `fill` everywhere else in `lo..=hi`.
    SparseLoop { var: Slot, pos: Slot, t: usize, lvl: usize, fiber: Ex, lo: Ex, hi: Ex, stored: Box<St>, fill: Box<St> },
    /// Lock-step walk of several steppers over `range`, binding each
    /// segment to `segment`.
    Coiter { range: Slot, segment: Slot, steppers: Vec<StepperState>, stops: Vec<Ex>, body: Box<St> },
    /// `zero_len` lists regions whose length must be zero for the update to
    /// count (summation over a continuous index).
    Accumulate { lhs: Lhs, op: AssignOp, rhs: Ex, measure: Measure, zero_len: Vec<Slot> },
    /// Writes `rhs` over the regions named by `Span` coordinates.
    EmitPiece { lhs: Lhs, op: AssignOp, rhs: Ex, zero_len: Vec<Slot> },
}

impl St {
    pub fn empty() -> St {
        St::Block(vec![])
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, St::Block(v) if v.is_empty())
    }

    pub fn block(stmts: Vec<St>) -> St {
        let mut out = Vec::new();
        for s in stmts {
            match s {
                St::Block(inner) => out.extend(inner),
                s => out.push(s),
            }
        }
        if out.len() == 1 {
            out.pop().unwrap()
        } else {
            St::Block(out)
        }
    }

    pub fn visit(&self, f: &mut impl FnMut(&St)) {
        f(self);
        match self {
            St::Block(v) => v.iter().for_each(|s| s.visit(f)),
            St::ForCont { body, .. }
            | St::If { body, .. }
            | St::Let { body, .. }
            | St::Intersect { body, .. }
            | St::Guard { body, .. }
            | St::Pin { body, .. }
            | St::DiscLoop { body, .. }
            | St::Coiter { body, .. } => body.visit(f),
            St::SparseLoop { stored, fill, .. } => {
                stored.visit(f);
                fill.visit(f)
            }
            St::Accumulate { .. } | St::EmitPiece { .. } => {}
        }
    }

    pub fn count(&self, pred: impl Fn(&St) -> bool) -> usize {
        let mut n = 0;
        self.visit(&mut |s| n += pred(s) as usize);
        n
    }
}

/// Runtime scalar.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum V {
    Num(f64),
    Bool(bool),
    Lim(Limit),
    Pos(Option<usize>),
    Iv(Interval),
}

impl V {
    pub fn num(self) -> f64 {
        match self {
            V::Num(x) => x,
            V::Bool(b) => b as u8 as f64,
            V::Lim(l) => l.val,
            V::Pos(p) => p.map(|p| p as f64).unwrap_or(f64::NAN),
            V::Iv(_) => f64::NAN,
        }
    }

    pub fn truthy(self) -> bool {
        match self {
            V::Bool(b) => b,
            V::Num(x) => x != 0.0,
            _ => true,
        }
    }

    pub fn lim(self) -> Limit {
        match self {
            V::Lim(l) => l,
            v => Limit::exact(v.num()),
        }
    }

    pub fn pos(self) -> Option<usize> {
        match self {
            V::Pos(p) => p,
            V::Num(x) if x >= 0.0 && x.fract() == 0.0 => Some(x as usize),
            _ => None,
        }
    }

    pub fn iv(self) -> Interval {
        match self {
            V::Iv(iv) => iv,
            _ => panic!("region slot read before it was bound"),
        }
    }

    pub fn value(self) -> Value {
        match self {
            V::Bool(b) => Value::Bool(b),
            v => Value::Num(v.num()),
        }
    }

    pub fn from_value(v: Value) -> V {
        match v {
            Value::Num(x) => V::Num(x),
            Value::Bool(b) => V::Bool(b),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("comparison against a NaN endpoint")]
    NanComparison,
    #[error("coordinate {coord} is outside dense level {lvl} of tensor {tensor} (size {size})")]
    DenseOutOfRange { tensor: String, lvl: usize, coord: f64, size: usize },
    #[error("unresolved {0} reached the evaluator")]
    Unresolved(&'static str),
}

pub struct Env<'a> {
    pub tensors: &'a [&'a ContTensor],
    pub slots: Vec<V>,
}

fn arith(op: Op, a: V, b: V) -> V {
    match (a, b) {
        (V::Lim(_), _) | (_, V::Lim(_)) if matches!(op, Op::Add | Op::Sub) => {
            let (x, y) = (a.lim(), b.lim());
            V::Lim(if op == Op::Add { x + y } else { x - y })
        }
        _ => {
            let (x, y) = (a.num(), b.num());
            V::Num(match op {
                Op::Add => x + y,
                Op::Sub => x - y,
                Op::Mul if (x == 0.0 && y.is_infinite()) || (y == 0.0 && x.is_infinite()) => 0.0,
                Op::Mul => x * y,
                _ => x / y,
            })
        }
    }
}

fn compare(op: Op, a: V, b: V) -> Result<V, EvalError> {
    let ord = match (a, b) {
        (V::Lim(_), _) | (_, V::Lim(_)) => Some(a.lim().try_cmp(&b.lim()).map_err(|_| EvalError::NanComparison)?),
        (V::Bool(x), V::Bool(y)) => Some(x.cmp(&y)),
        _ => a.num().partial_cmp(&b.num()),
    };
    let Some(o) = ord else {
        return Ok(V::Bool(op == Op::Ne));
    };
    Ok(V::Bool(match op {
        Op::Lt => o.is_lt(),
        Op::Le => o.is_le(),
        Op::Gt => o.is_gt(),
        Op::Ge => o.is_ge(),
        Op::Eq => o.is_eq(),
        _ => o.is_ne(),
    }))
}

fn extreme(is_max: bool, a: V, b: V) -> Result<V, EvalError> {
    match (a, b) {
        (V::Lim(_), _) | (_, V::Lim(_)) => {
            let (x, y) = (a.lim(), b.lim());
            let o = x.try_cmp(&y).map_err(|_| EvalError::NanComparison)?;
            Ok(V::Lim(if o.is_lt() == is_max { y } else { x }))
        }
        _ => Ok(V::Num(if is_max { a.num().max(b.num()) } else { a.num().min(b.num()) })),
    }
}

impl Env<'_> {
    fn level(&self, t: usize, lvl: usize) -> &Level {
        &self.tensors[t].levels[lvl]
    }

    pub fn eval(&self, e: &Ex) -> Result<V, EvalError> {
        Ok(match e {
            Ex::Num(x) => V::Num(*x),
            Ex::Bool(b) => V::Bool(*b),
            Ex::Lim(l) => V::Lim(*l),
            Ex::Var(s) => self.slots[*s],
            Ex::Access(_) => return Err(EvalError::Unresolved("tensor access")),
            Ex::Diff(_) => return Err(EvalError::Unresolved("d(i) marker")),
            Ex::Call(op, args) => match op {
                Op::And => {
                    for a in args {
                        if !self.eval(a)?.truthy() {
                            return Ok(V::Bool(false));
                        }
                    }
                    V::Bool(true)
                }
                Op::Or => {
                    for a in args {
                        if self.eval(a)?.truthy() {
                            return Ok(V::Bool(true));
                        }
                    }
                    V::Bool(false)
                }
                Op::Not => V::Bool(!self.eval(&args[0])?.truthy()),
                Op::Neg => match self.eval(&args[0])? {
                    V::Lim(l) => V::Lim(Limit::exact(0.0) - l),
                    v => V::Num(-v.num()),
                },
                Op::Add | Op::Mul => {
                    let mut acc = self.eval(&args[0])?;
                    for a in &args[1..] {
                        acc = arith(*op, acc, self.eval(a)?);
                    }
                    acc
                }
                Op::Sub | Op::Div => arith(*op, self.eval(&args[0])?, self.eval(&args[1])?),
                Op::Max | Op::Min => {
                    let mut acc = self.eval(&args[0])?;
                    for a in &args[1..] {
                        acc = extreme(*op == Op::Max, acc, self.eval(a)?)?;
                    }
                    acc
                }
                _ => compare(*op, self.eval(&args[0])?, self.eval(&args[1])?)?,
            },
            Ex::Val { t, pos } => match self.eval(pos)?.pos() {
                Some(p) => V::from_value(self.tensors[*t].values[p]),
                None => V::from_value(self.tensors[*t].fill),
            },
            Ex::Start { t, lvl, pos } => V::Lim(match self.eval(pos)?.pos() {
                Some(p) => self.level(*t, *lvl).start(p),
                None => Limit::POS_INF,
            }),
            Ex::Stop { t, lvl, pos } => V::Lim(match self.eval(pos)?.pos() {
                Some(p) => self.level(*t, *lvl).stop(p),
                None => Limit::NEG_INF,
            }),
            Ex::LastStop { t, lvl, fiber } => V::Lim(match self.eval(fiber)?.pos() {
                Some(f) => self.level(*t, *lvl).last_stop(f),
                None => Limit::below(f64::NEG_INFINITY),
            }),
            Ex::DensePos { t, lvl, fiber, idx } => {
                let f = self.eval(fiber)?.pos();
                let i = self.eval(idx)?.num();
                let Level::Dense { size } = *self.level(*t, *lvl) else { unreachable!() };
                if i < 0.0 || i.fract() != 0.0 || i >= size as f64 {
                    return Err(EvalError::DenseOutOfRange {
                        tensor: self.tensors[*t].name.clone(),
                        lvl: *lvl,
                        coord: i,
                        size,
                    });
                }
                V::Pos(f.map(|f| f * size + i as usize))
            }
            Ex::Locate { t, lvl, fiber, coord } => match self.eval(fiber)?.pos() {
                Some(f) => V::Pos(self.level(*t, *lvl).locate(f, self.eval(coord)?.num())),
                None => V::Pos(None),
            },
            Ex::RStart(r) => V::Lim(self.slots[*r].iv().start),
            Ex::RStop(r) => V::Lim(self.slots[*r].iv().stop),
            Ex::Len(r) => {
                let iv = self.slots[*r].iv();
                V::Num(iv.length().unwrap_or(0.0))
            }
            Ex::Nudge(e, k) => V::Lim(self.eval(e)?.lim().nudge(*k)),
        })
    }
}

/// Names used when printing trees.
#[derive(Debug, Clone, Default)]
pub struct Names {
    pub slots: Vec<String>,
    pub tensors: Vec<String>,
    pub outputs: Vec<String>,
    pub accesses: Vec<String>,
}

impl Names {
    fn slot(&self, s: Slot) -> &str {
        self.slots.get(s).map(String::as_str).unwrap_or("?")
    }

    pub fn ex(&self, e: &Ex) -> String {
        let mut s = String::new();
        self.write_ex(&mut s, e, 0).unwrap();
        s
    }

    fn write_ex(&self, o: &mut String, e: &Ex, parent: u8) -> fmt::Result {
        match e {
            Ex::Num(x) => {
                let mut t = String::new();
                write_num(&mut t, *x)?;
                if *x < 0.0 && parent > 0 {
                    write!(o, "({t})")
                } else {
                    o.push_str(&t);
                    Ok(())
                }
            }
            Ex::Bool(b) => write!(o, "{b}"),
            Ex::Lim(l) => write!(o, "{l}"),
            Ex::Var(s) => write!(o, "{}", self.slot(*s)),
            Ex::Access(a) => write!(o, "{}", self.accesses.get(*a).cloned().unwrap_or_else(|| format!("access{a}"))),
            Ex::Diff(s) => write!(o, "d({})", self.slot(*s)),
            Ex::Call(op @ (Op::Max | Op::Min), args) => {
                write!(o, "{}(", op.symbol())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        o.push_str(", ");
                    }
                    self.write_ex(o, a, 0)?;
                }
                o.push(')');
                Ok(())
            }
            Ex::Call(op @ (Op::Neg | Op::Not), args) => {
                o.push_str(op.symbol());
                self.write_ex(o, &args[0], op.prec())
            }
            Ex::Call(op, args) => {
                let p = op.prec();
                if p <= parent {
                    o.push('(');
                }
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(o, " {} ", op.symbol())?;
                    }
                    self.write_ex(o, a, if i == 0 { p - 1 } else { p })?;
                }
                if p <= parent {
                    o.push(')');
                }
                Ok(())
            }
            Ex::Val { t, pos } => {
                write!(o, "{}.val[", self.tensors[*t])?;
                self.write_ex(o, pos, 0)?;
                o.push(']');
                Ok(())
            }
            Ex::Start { t, lvl, pos } => {
                write!(o, "{}.start{lvl}[", self.tensors[*t])?;
                self.write_ex(o, pos, 0)?;
                o.push(']');
                Ok(())
            }
            Ex::Stop { t, lvl, pos } => {
                write!(o, "{}.stop{lvl}[", self.tensors[*t])?;
                self.write_ex(o, pos, 0)?;
                o.push(']');
                Ok(())
            }
            Ex::LastStop { t, lvl, fiber } => {
                write!(o, "{}.last{lvl}[", self.tensors[*t])?;
                self.write_ex(o, fiber, 0)?;
                o.push(']');
                Ok(())
            }
            Ex::DensePos { t, lvl, fiber, idx } => {
                write!(o, "{}.pos{lvl}[", self.tensors[*t])?;
                self.write_ex(o, fiber, 0)?;
                o.push_str(", ");
                self.write_ex(o, idx, 0)?;
                o.push(']');
                Ok(())
            }
            Ex::Locate { t, lvl, fiber, coord } => {
                write!(o, "{}.locate{lvl}[", self.tensors[*t])?;
                self.write_ex(o, fiber, 0)?;
                o.push_str(", ");
                self.write_ex(o, coord, 0)?;
                o.push(']');
                Ok(())
            }
            Ex::RStart(r) => write!(o, "{}.start", self.slot(*r)),
            Ex::RStop(r) => write!(o, "{}.stop", self.slot(*r)),
            Ex::Len(r) => write!(o, "drop_eps({0}.stop - {0}.start)", self.slot(*r)),
            Ex::Nudge(e, k) => {
                self.write_ex(o, e, 4)?;
                o.push_str(if *k > 0 { "+eps" } else { "-eps" });
                Ok(())
            }
        }
    }

    fn lhs(&self, l: &Lhs) -> String {
        let name = &self.outputs[l.out];
        if l.idx.is_empty() {
            return name.clone();
        }
        let idx: Vec<String> = l
            .idx
            .iter()
            .map(|i| match i {
                LhsIdx::At(e) => self.ex(e),
                LhsIdx::Span(r) => self.slot(*r).to_string(),
            })
            .collect();
        format!("{name}[{}]", idx.join(","))
    }

    pub fn st(&self, s: &St) -> String {
        let mut o = String::new();
        self.write_st(&mut o, s, 0);
        o
    }

    fn write_st(&self, o: &mut String, s: &St, d: usize) {
        let pad = "  ".repeat(d);
        match s {
            St::Block(v) if v.is_empty() => o.push_str(&format!("{pad}block()\n")),
            St::Block(v) => v.iter().for_each(|s| self.write_st(o, s, d)),
            St::ForCont { idx, start, stop, body } => {
                o.push_str(&format!("{pad}for {} = {}:{} continuous\n", self.slot(*idx), self.ex(start), self.ex(stop)));
                self.write_st(o, body, d + 1);
            }
            St::DiscLoop { var: idx, lo, hi, body } => {
                o.push_str(&format!("{pad}for {} = {}:{}\n", self.slot(*idx), self.ex(lo), self.ex(hi)));
                self.write_st(o, body, d + 1);
            }
            St::If { cond, body } => {
                o.push_str(&format!("{pad}if {}\n", self.ex(cond)));
                self.write_st(o, body, d + 1);
            }
            St::Let { var, ex, body } => {
                o.push_str(&format!("{pad}let {} = {}\n", self.slot(*var), self.ex(ex)));
                self.write_st(o, body, d + 1);
            }
            St::Intersect { region, starts, stops, body } => {
                let join = |v: &[Ex], f: &str| {
                    if v.len() == 1 {
                        self.ex(&v[0])
                    } else {
                        format!("{f}({})", v.iter().map(|e| self.ex(e)).collect::<Vec<_>>().join(", "))
                    }
                };
                o.push_str(&format!("{pad}let {} = [{}, {}]\n", self.slot(*region), join(starts, "max"), join(stops, "min")));
                self.write_st(o, body, d);
            }
            St::Guard { region, body } => {
                let r = self.slot(*region);
                o.push_str(&format!("{pad}if {r}.start <= {r}.stop\n"));
                self.write_st(o, body, d + 1);
            }
            St::Pin { var, region, body } => {
                o.push_str(&format!("{pad}let {} = {}.start\n", self.slot(*var), self.slot(*region)));
                self.write_st(o, body, d);
            }
            St::SparseLoop { var, pos, t, lvl, fiber, lo, hi, stored, fill } => {
                o.push_str(&format!(
                    "{pad}for {} = {}:{} over {}.level{lvl}[{}] as {}\n",
                    self.slot(*var),
                    self.ex(lo),
                    self.ex(hi),
                    self.tensors[*t],
                    self.ex(fiber),
                    self.slot(*pos)
                ));
                self.write_st(o, stored, d + 1);
                if !fill.is_empty() {
                    o.push_str(&format!("{pad}otherwise\n"));
                    self.write_st(o, fill, d + 1);
                }
            }
            St::Coiter { range, segment, steppers, stops, body } => {
                for s in steppers {
                    o.push_str(&format!(
                        "{pad}{} = seek({}.level{}[{}], {}.start + {})\n",
                        self.slot(s.pos),
                        self.tensors[s.t],
                        s.lvl,
                        self.ex(&s.fiber),
                        self.slot(*range),
                        self.ex(&s.offset)
                    ));
                }
                let r = self.slot(*range);
                let seg = self.slot(*segment);
                let st: Vec<String> = stops.iter().map(|e| self.ex(e)).collect();
                o.push_str(&format!("{pad}cur = {r}.start\n{pad}while cur <= {r}.stop\n"));
                o.push_str(&format!("{pad}  {seg} = [cur, min({r}.stop, {})]\n", st.join(", ")));
                self.write_st(o, body, d + 1);
                for (s, e) in steppers.iter().zip(&st) {
                    o.push_str(&format!("{pad}  if {seg}.stop == {e}: {} += 1\n", self.slot(s.pos)));
                }
                o.push_str(&format!("{pad}  cur = {seg}.stop + eps\n"));
            }
            St::Accumulate { lhs, op, rhs, zero_len, .. } => {
                self.write_update(o, &pad, "", lhs, *op, rhs, zero_len);
            }
            St::EmitPiece { lhs, op, rhs, zero_len } => {
                self.write_update(o, &pad, "emit ", lhs, *op, rhs, zero_len);
            }
        }
    }
}

impl Names {
    #[allow(clippy::too_many_arguments)]
    fn write_update(&self, o: &mut String, pad: &str, tag: &str, lhs: &Lhs, op: AssignOp, rhs: &Ex, zero_len: &[Slot]) {
        let line = format!("{tag}{} {} {}", self.lhs(lhs), op.symbol(), self.ex(rhs));
        if zero_len.is_empty() {
            o.push_str(&format!("{pad}{line}\n"));
        } else {
            let conds: Vec<String> = zero_len.iter().map(|r| format!("length({}) == 0", self.slot(*r))).collect();
            o.push_str(&format!("{pad}if {}\n{pad}  {line}\n", conds.join(" && ")));
        }
    }
}

fn write_num(o: &mut String, x: f64) -> fmt::Result {
    struct W(f64);
    impl fmt::Display for W {
        fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            fmt_num(self.0, f)
        }
    }
    write!(o, "{}", W(x))
}

/// Allocator for named scalar slots.
#[derive(Debug, Clone, Default)]
pub struct Slots {
    pub names: Vec<String>,
}

impl Slots {
    pub fn fresh(&mut self, base: &str) -> Slot {
        let name = if self.names.iter().any(|n| n == base) {
            let mut k = 1;
            while self.names.iter().any(|n| *n == format!("{base}{k}")) {
                k += 1;
            }
            format!("{base}{k}")
        } else {
            base.to_string()
        };
        self.names.push(name);
        self.names.len() - 1
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}
