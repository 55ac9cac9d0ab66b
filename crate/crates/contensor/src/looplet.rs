//! Looplets: trees describing a fiber over the whole real line, fill regions
//! included, and the translation of each level format into one.
//!
//! Endpoint expressions are symbolic ([`Ex`]) so the compiler can splice them
//! into plans; [`Looplet::eval_at`] and [`Looplet::segments`] interpret them
//! directly against a tensor.

use crate::interval::Interval;
use crate::ir::{Env, EvalError, Ex, Names, Op, Slot, Slots, V};
use crate::limit::Limit;
use crate::storage::ContTensor;

/// What a run carries: the fill value, or a stored position of the level.
#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Fill,
    At(Ex),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Looplet {
    /// A constant. `point` is set when the enclosing phase is a single point.
    Run { payload: Payload, point: bool },
    /// The extent up to `stop`; `start` is explicit when known, otherwise it
    /// follows the previous phase.
    Phase { start: Option<Ex>, stop: Ex, body: Box<Looplet> },
    Sequence(Vec<Looplet>),
    /// Repeats `body` for successive positions `pos` of a fiber.
    Stepper { t: usize, lvl: usize, fiber: Ex, pos: Slot, offset: Ex, body: Box<Looplet>, stop: Ex },
    /// A dense level, walked by an ordinary discrete loop.
    Dense { t: usize, lvl: usize },
}

fn shifted(e: Ex, offset: &Ex) -> Ex {
    match offset {
        Ex::Num(x) if *x == 0.0 => e,
        off => Ex::bin(Op::Sub, e, off.clone()),
    }
}

fn fill_phase(stop: Ex) -> Looplet {
    Looplet::Phase { start: None, stop, body: Box::new(Looplet::Run { payload: Payload::Fill, point: false }) }
}

/// Symbolic looplet of level `lvl` of tensor `t` at fiber `fiber`, with
/// coordinates seen through `i = coord - offset`.
pub fn unfurl(tensor: &ContTensor, t: usize, lvl: usize, fiber: Ex, offset: Ex, slots: &mut Slots) -> Looplet {
    let level = &tensor.levels[lvl];
    if level.is_dense() {
        return Looplet::Dense { t, lvl };
    }
    let pos = slots.fresh(&format!("p_{}{lvl}", tensor.name));
    let p = Box::new(Ex::Var(pos));
    let start = shifted(Ex::Start { t, lvl, pos: p.clone() }, &offset);
    let stop = shifted(Ex::Stop { t, lvl, pos: p.clone() }, &offset);
    let body = Looplet::Sequence(vec![
        fill_phase(Ex::Nudge(Box::new(start.clone()), -1)),
        Looplet::Phase {
            start: Some(start),
            stop: stop.clone(),
            body: Box::new(Looplet::Run { payload: Payload::At(Ex::Var(pos)), point: level.is_pinpoint() }),
        },
    ]);
    let last = shifted(Ex::LastStop { t, lvl, fiber: Box::new(fiber.clone()) }, &offset);
    Looplet::Sequence(vec![
        Looplet::Phase {
            start: None,
            stop: last,
            body: Box::new(Looplet::Stepper { t, lvl, fiber, pos, offset, body: Box::new(body), stop }),
        },
        fill_phase(Ex::Lim(Limit::POS_INF)),
    ])
}

/// Looplet of a fiber known to hold exactly the entry at position `p`:
/// fill, the entry, fill, with no stepping.
pub fn unfurl_single(tensor: &ContTensor, t: usize, lvl: usize, p: usize, offset: Ex) -> Looplet {
    let pos = Box::new(Ex::Num(p as f64));
    let start = shifted(Ex::Start { t, lvl, pos: pos.clone() }, &offset);
    let stop = shifted(Ex::Stop { t, lvl, pos }, &offset);
    Looplet::Sequence(vec![
        fill_phase(Ex::Nudge(Box::new(start.clone()), -1)),
        Looplet::Phase {
            start: Some(start),
            stop,
            body: Box::new(Looplet::Run { payload: Payload::At(Ex::Num(p as f64)), point: tensor.levels[lvl].is_pinpoint() }),
        },
        fill_phase(Ex::Lim(Limit::POS_INF)),
    ])
}

/// The looplet of an empty fiber.
pub fn unfurl_empty() -> Looplet {
    fill_phase(Ex::Lim(Limit::POS_INF))
}

fn concrete(tensor: &ContTensor, lvl: usize, pos: usize, slots: &mut Slots) -> Looplet {
    let level = &tensor.levels[lvl];
    if !level.is_dense() && level.fiber(pos).is_empty() {
        return fill_phase(Ex::Lim(Limit::POS_INF));
    }
    unfurl(tensor, 0, lvl, Ex::Num(pos as f64), Ex::Num(0.0), slots)
}

/// Looplet of an interval-level fiber.
pub fn unfurl_interval(tensor: &ContTensor, lvl: usize, pos: usize, slots: &mut Slots) -> Looplet {
    concrete(tensor, lvl, pos, slots)
}

/// Looplet of a pinpoint-level fiber: an interval looplet with `left = right = crd`.
pub fn unfurl_pinpoint(tensor: &ContTensor, lvl: usize, pos: usize, slots: &mut Slots) -> Looplet {
    concrete(tensor, lvl, pos, slots)
}

/// Looplet of a regular-level fiber; endpoints are computed from `stride`,
/// `len` and `xs` when evaluated.
pub fn unfurl_regular(tensor: &ContTensor, lvl: usize, pos: usize, slots: &mut Slots) -> Looplet {
    concrete(tensor, lvl, pos, slots)
}

pub fn unfurl_dense(lvl: usize) -> Looplet {
    Looplet::Dense { t: 0, lvl }
}

impl Looplet {
    pub fn kind_rank(&self) -> u8 {
        match self {
            Looplet::Run { .. } => 0,
            Looplet::Phase { .. } => 1,
            Looplet::Sequence(_) => 2,
            Looplet::Stepper { .. } => 3,
            Looplet::Dense { .. } => 4,
        }
    }

    /// Payload at coordinate `x`, descending phases. Stepper positions are
    /// written into `env`.
    pub fn eval_at(&self, x: f64, env: &mut Env) -> Result<Option<usize>, EvalError> {
        let at = Limit::exact(x);
        match self {
            Looplet::Run { payload: Payload::Fill, .. } => Ok(None),
            Looplet::Run { payload: Payload::At(e), .. } => Ok(env.eval(e)?.pos()),
            Looplet::Phase { body, .. } => body.eval_at(x, env),
            Looplet::Sequence(phases) => {
                for ph in phases {
                    let Looplet::Phase { stop, .. } = ph else { unreachable!() };
                    if at.cmp_total(&env.eval(stop)?.lim()).is_le() {
                        return ph.eval_at(x, env);
                    }
                }
                Ok(None)
            }
            Looplet::Stepper { t, lvl, fiber, pos, offset, body, .. } => {
                let f = env.eval(fiber)?.pos().unwrap();
                let target = at + env.eval(offset)?.num();
                let p = env.tensors[*t].levels[*lvl].seek(f, target);
                env.slots[*pos] = V::Pos(Some(p));
                body.eval_at(x, env)
            }
            Looplet::Dense { .. } => Ok(None),
        }
    }

    /// Concrete `(range, payload)` segments covering `[lo, hi]`, in order.
    /// Empty ranges are skipped.
    pub fn segments(&self, lo: Limit, hi: Limit, env: &mut Env, out: &mut Vec<(Interval, Option<usize>)>) -> Result<(), EvalError> {
        if lo.cmp_total(&hi).is_gt() {
            return Ok(());
        }
        match self {
            Looplet::Run { payload, .. } => {
                let p = match payload {
                    Payload::Fill => None,
                    Payload::At(e) => env.eval(e)?.pos(),
                };
                out.push((Interval::new(lo, hi), p));
            }
            Looplet::Phase { start, stop, body } => {
                let mut a = lo;
                if let Some(s) = start {
                    a = a.max(env.eval(s)?.lim());
                }
                let b = hi.min(env.eval(stop)?.lim());
                body.segments(a, b, env, out)?;
            }
            Looplet::Sequence(phases) => {
                let mut cur = lo;
                for ph in phases {
                    let Looplet::Phase { stop, .. } = ph else { unreachable!() };
                    let s = env.eval(stop)?.lim();
                    ph.segments(cur, hi, env, out)?;
                    cur = cur.max(s.nudge(1));
                }
            }
            Looplet::Stepper { t, lvl, fiber, pos, offset, body, stop } => {
                let f = env.eval(fiber)?.pos().unwrap();
                let level = &env.tensors[*t].levels[*lvl];
                let end = level.fiber(f).end;
                let mut p = level.seek(f, lo + env.eval(offset)?.num());
                let mut cur = lo;
                while cur.cmp_total(&hi).is_le() && p < end {
                    env.slots[*pos] = V::Pos(Some(p));
                    let s = env.eval(stop)?.lim();
                    let b = hi.min(s);
                    body.segments(cur, b, env, out)?;
                    if b == s {
                        p += 1;
                    }
                    cur = b.nudge(1);
                }
            }
            Looplet::Dense { .. } => {}
        }
        Ok(())
    }

    /// Indented rendering for debugging and golden files.
    pub fn pretty(&self, names: &Names) -> String {
        let mut o = String::new();
        self.write(names, 0, &mut o);
        o
    }

    fn write(&self, n: &Names, d: usize, o: &mut String) {
        let pad = "  ".repeat(d);
        match self {
            Looplet::Run { payload: Payload::Fill, .. } => o.push_str(&format!("{pad}Run(fill)\n")),
            Looplet::Run { payload: Payload::At(e), point } => {
                let tag = if *point { ", pinpoint" } else { "" };
                o.push_str(&format!("{pad}Run(payload {}{tag})\n", n.ex(e)));
            }
            Looplet::Phase { start, stop, body } => {
                match start {
                    Some(s) => o.push_str(&format!("{pad}Phase(start = {}, stop = {})\n", n.ex(s), n.ex(stop))),
                    None => o.push_str(&format!("{pad}Phase(stop = {})\n", n.ex(stop))),
                }
                body.write(n, d + 1, o);
            }
            Looplet::Sequence(ps) => {
                o.push_str(&format!("{pad}Sequence\n"));
                ps.iter().for_each(|p| p.write(n, d + 1, o));
            }
            Looplet::Stepper { t, lvl, fiber, pos, body, .. } => {
                let pname = n.slots.get(*pos).cloned().unwrap_or_default();
                o.push_str(&format!(
                    "{pad}Stepper(seek = search({}.stop{lvl}, fiber {}), next = {pname} += 1)\n",
                    n.tensors.get(*t).cloned().unwrap_or_default(),
                    n.ex(fiber)
                ));
                body.write(n, d + 1, o);
            }
            Looplet::Dense { t, lvl } => {
                o.push_str(&format!("{pad}Dense({}.level{lvl})\n", n.tensors.get(*t).cloned().unwrap_or_default()))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::Value;

    fn one_piece() -> ContTensor {
        ContTensor::from_pieces("a", &[(Interval::closed(1.0, 3.0), Value::Num(5.0))], Value::Num(0.0)).unwrap()
    }

    #[test]
    fn single_piece_phases() {
        let t = one_piece();
        let mut slots = Slots::default();
        let lp = unfurl_interval(&t, 0, 0, &mut slots);
        let tensors = [&t];
        let mut env = Env { tensors: &tensors, slots: vec![V::Pos(None); slots.len()] };
        let mut segs = Vec::new();
        lp.segments(Limit::NEG_INF, Limit::POS_INF, &mut env, &mut segs).unwrap();
        let stops: Vec<Limit> = segs.iter().map(|s| s.0.stop).collect();
        assert_eq!(stops, vec![Limit::below(1.0), Limit::exact(3.0), Limit::POS_INF]);
        assert_eq!(segs[1].1, Some(0));
    }

    #[test]
    fn empty_fiber_is_one_fill_phase() {
        let t = ContTensor::from_pieces("e", &[], Value::Num(0.0)).unwrap();
        let mut slots = Slots::default();
        let lp = unfurl_interval(&t, 0, 0, &mut slots);
        assert_eq!(lp, fill_phase(Ex::Lim(Limit::POS_INF)));
    }
}
