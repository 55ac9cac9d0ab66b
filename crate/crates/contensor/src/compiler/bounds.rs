//! A small prover over `a <= b` facts between endpoint expressions, used to
//! delete region guards and prune `max`/`min` operands that can never win.
//!
//! Facts come from the plan itself (a region lies inside every bound it was
//! intersected from, a guarded region is non-empty, a segment lies inside its
//! range) and from the structure of endpoints (`x - eps <= x <= x + eps`, a
//! stored entry starts no later than it stops), plus any assumed facts.
//! Queries are answered by reachability in the resulting order graph, so a
//! `false` answer only means "unknown".

use std::collections::{HashMap, VecDeque};

use crate::ir::{Env, Ex, Op, Slot, St};

/// `lhs <= rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Fact {
    pub lhs: Ex,
    pub rhs: Ex,
}

impl Fact {
    pub fn le(lhs: Ex, rhs: Ex) -> Fact {
        Fact { lhs, rhs }
    }

    /// Parses `A.start <= B.stop`, where each side names an input tensor and
    /// an endpoint of the first entry of its root level (`start`, `stop`,
    /// optionally followed by a level number, as in `start1`).
    pub fn parse(text: &str, inputs: &[String]) -> Result<Fact, String> {
        let (l, r) = text.split_once("<=").ok_or_else(|| format!("`{text}`: expected `lhs <= rhs`"))?;
        let side = |s: &str| -> Result<Ex, String> {
            let s = s.trim();
            let (t, end) = s.split_once('.').ok_or_else(|| format!("`{s}`: expected `tensor.start` or `tensor.stop`"))?;
            let t = inputs.iter().position(|n| n == t).ok_or_else(|| format!("`{t}` is not an input of the program"))?;
            let (kind, lvl) = end.split_at(end.find(|c: char| c.is_ascii_digit()).unwrap_or(end.len()));
            let lvl = if lvl.is_empty() { 0 } else { lvl.parse().map_err(|_| format!("bad level in `{s}`"))? };
            let pos = Box::new(Ex::Num(0.0));
            match kind {
                "start" => Ok(Ex::Start { t, lvl, pos }),
                "stop" => Ok(Ex::Stop { t, lvl, pos }),
                _ => Err(format!("`{s}`: expected `start` or `stop`")),
            }
        };
        Ok(Fact::le(side(l)?, side(r)?))
    }
}

const SEARCH_LIMIT: usize = 4096;

#[derive(Debug, Clone, Default)]
pub struct Prover {
    facts: Vec<Fact>,
    regions: HashMap<Slot, (Vec<Ex>, Vec<Ex>)>,
}

fn constant(e: &Ex) -> Option<crate::limit::Limit> {
    match e {
        Ex::Num(_) | Ex::Lim(_) | Ex::Bool(_) => Env { tensors: &[], slots: vec![] }.eval(e).ok().map(|v| v.lim()),
        _ => None,
    }
}

/// Successors of `x` that follow from the shape of the expression alone.
fn structural(x: &Ex) -> Vec<Ex> {
    let mut out = Vec::new();
    if !matches!(x, Ex::Nudge(_, k) if *k > 0) {
        out.push(Ex::Nudge(Box::new(x.clone()), 1));
    }
    match x {
        Ex::Nudge(inner, k) if *k < 0 => out.push((**inner).clone()),
        Ex::Start { t, lvl, pos } => out.push(Ex::Stop { t: *t, lvl: *lvl, pos: pos.clone() }),
        Ex::Call(Op::Sub, args) => {
            if let Ex::Start { t, lvl, pos } = &args[0] {
                out.push(Ex::bin(Op::Sub, Ex::Stop { t: *t, lvl: *lvl, pos: pos.clone() }, args[1].clone()));
            }
        }
        _ => {}
    }
    out
}

impl Prover {
    pub fn new(assumed: Vec<Fact>) -> Prover {
        Prover { facts: assumed, regions: HashMap::new() }
    }

    pub fn assume(&mut self, f: Fact) {
        self.facts.push(f);
    }

    /// True when `a <= b` follows from the facts.
    pub fn le(&self, a: &Ex, b: &Ex) -> bool {
        if a == b {
            return true;
        }
        match (a, b) {
            (Ex::Call(Op::Max, xs), _) => return xs.iter().all(|x| self.le(x, b)),
            (_, Ex::Call(Op::Min, ys)) => return ys.iter().all(|y| self.le(a, y)),
            (Ex::Call(Op::Min, xs), _) if xs.iter().any(|x| self.le(x, b)) => return true,
            (_, Ex::Call(Op::Max, ys)) if ys.iter().any(|y| self.le(a, y)) => return true,
            _ => {}
        }
        if let (Some(x), Some(y)) = (constant(a), constant(b)) {
            return x.cmp_total(&y).is_le();
        }
        if constant(a).is_some_and(|x| x.val == f64::NEG_INFINITY && x.eps <= 0) {
            return true;
        }
        if constant(b).is_some_and(|y| y.val == f64::INFINITY && y.eps >= 0) {
            return true;
        }
        self.reach(a, b)
    }

    pub fn eq(&self, a: &Ex, b: &Ex) -> bool {
        self.le(a, b) && self.le(b, a)
    }

    fn reach(&self, a: &Ex, b: &Ex) -> bool {
        let target = constant(b);
        let mut seen: Vec<Ex> = vec![a.clone()];
        let mut queue = VecDeque::from([a.clone()]);
        while let Some(x) = queue.pop_front() {
            if x == *b {
                return true;
            }
            if let (Some(c), Some(t)) = (constant(&x), target) {
                if c.cmp_total(&t).is_le() {
                    return true;
                }
            }
            let mut next = structural(&x);
            next.extend(self.facts.iter().filter(|f| f.lhs == x).map(|f| f.rhs.clone()));
            for n in next {
                if !seen.contains(&n) {
                    if seen.len() >= SEARCH_LIMIT {
                        return false;
                    }
                    seen.push(n.clone());
                    queue.push_back(n);
                }
            }
        }
        false
    }

    fn prune(&self, list: Vec<Ex>, dominated: impl Fn(&Ex, &Ex) -> bool) -> Vec<Ex> {
        let mut keep = vec![true; list.len()];
        for i in 0..list.len() {
            for j in 0..list.len() {
                if i != j && keep[j] && dominated(&list[i], &list[j]) {
                    keep[i] = false;
                    break;
                }
            }
        }
        list.into_iter().zip(keep).filter(|(_, k)| *k).map(|(e, _)| e).collect()
    }

    fn scoped<T>(&mut self, extra: Vec<Fact>, f: impl FnOnce(&mut Self) -> T) -> T {
        let n = self.facts.len();
        self.facts.extend(extra);
        let out = f(self);
        self.facts.truncate(n);
        out
    }

    /// Removes guards and bound operands that the facts make redundant.
    pub fn optimize(&mut self, s: St) -> St {
        match s {
            St::Block(v) => St::Block(v.into_iter().map(|s| self.optimize(s)).collect()),
            St::Intersect { region, starts, stops, body } => {
                let starts = self.prune(starts, |x, y| self.le(x, y));
                let stops = self.prune(stops, |x, y| self.le(y, x));
                let mut extra: Vec<Fact> = starts.iter().map(|s| Fact::le(s.clone(), Ex::RStart(region))).collect();
                extra.extend(stops.iter().map(|t| Fact::le(Ex::RStop(region), t.clone())));
                self.regions.insert(region, (starts.clone(), stops.clone()));
                let body = self.scoped(extra, |p| p.optimize(*body));
                St::Intersect { region, starts, stops, body: Box::new(body) }
            }
            St::Guard { region, body } => {
                let proven = match self.regions.get(&region) {
                    Some((starts, stops)) => starts.iter().all(|s| stops.iter().all(|t| self.le(s, t))),
                    None => false,
                };
                let fact = Fact::le(Ex::RStart(region), Ex::RStop(region));
                let body = self.scoped(vec![fact], |p| p.optimize(*body));
                if proven {
                    body
                } else {
                    St::Guard { region, body: Box::new(body) }
                }
            }
            St::Coiter { range, segment, steppers, stops, body } => {
                let mut extra = vec![
                    Fact::le(Ex::RStart(range), Ex::RStart(segment)),
                    Fact::le(Ex::RStop(segment), Ex::RStop(range)),
                    Fact::le(Ex::RStart(segment), Ex::RStop(segment)),
                ];
                extra.extend(stops.iter().map(|t| Fact::le(Ex::RStop(segment), t.clone())));
                let body = self.scoped(extra, |p| p.optimize(*body));
                St::Coiter { range, segment, steppers, stops, body: Box::new(body) }
            }
            St::ForCont { idx, start, stop, body } => St::ForCont { idx, start, stop, body: Box::new(self.optimize(*body)) },
            St::If { cond, body } => St::If { cond, body: Box::new(self.optimize(*body)) },
            St::Let { var, ex, body } => St::Let { var, ex, body: Box::new(self.optimize(*body)) },
            St::Pin { var, region, body } => St::Pin { var, region, body: Box::new(self.optimize(*body)) },
            St::DiscLoop { var, lo, hi, body } => St::DiscLoop { var, lo, hi, body: Box::new(self.optimize(*body)) },
            St::SparseLoop { var, pos, t, lvl, fiber, lo, hi, stored, fill } => St::SparseLoop {
                var,
                pos,
                t,
                lvl,
                fiber,
                lo,
                hi,
                stored: Box::new(self.optimize(*stored)),
                fill: Box::new(self.optimize(*fill)),
            },
            s @ (St::Accumulate { .. } | St::EmitPiece { .. }) => s,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limit::Limit;

    fn start(t: usize) -> Ex {
        Ex::Start { t, lvl: 0, pos: Box::new(Ex::Num(0.0)) }
    }
    fn stop(t: usize) -> Ex {
        Ex::Stop { t, lvl: 0, pos: Box::new(Ex::Num(0.0)) }
    }

    #[test]
    fn max_with_negative_infinity_is_the_other_operand() {
        let p = Prover::new(vec![Fact::le(start(0), stop(0))]);
        let q = Ex::call(Op::Max, vec![Ex::Lim(Limit::NEG_INF), start(0)]);
        assert!(p.eq(&q, &start(0)));
    }

    #[test]
    fn underdetermined_query_is_unknown() {
        let p = Prover::new(vec![]);
        assert!(!p.le(&start(0), &stop(1)));
        assert!(p.le(&start(1), &stop(1)));
    }

    #[test]
    fn nested_region_stop_is_below_parent_stop() {
        let mut p = Prover::new(vec![]);
        p.assume(Fact::le(Ex::RStop(1), Ex::RStop(0)));
        p.assume(Fact::le(Ex::RStop(1), stop(0)));
        assert!(p.le(&Ex::RStop(1), &Ex::RStop(0)));
        assert!(p.le(&Ex::Nudge(Box::new(Ex::RStop(1)), -1), &stop(0)));
    }
}
