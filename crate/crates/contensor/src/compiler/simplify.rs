//! The rewrite system: constant folding, annihilation and identity rules,
//! deletion of no-op updates and of empty loops, branches and bindings, and
//! fusion of nested region intersections. Rules apply innermost first until
//! nothing changes.

use crate::ir::{AssignOp, Env, Ex, Op, Slot, St, V};
use crate::limit::Limit;

fn is_const(e: &Ex) -> bool {
    matches!(e, Ex::Num(_) | Ex::Bool(_) | Ex::Lim(_))
}

fn truth(e: &Ex) -> Option<bool> {
    match e {
        Ex::Bool(b) => Some(*b),
        Ex::Num(x) => Some(*x != 0.0),
        _ => None,
    }
}

fn infinite(e: &Ex) -> Option<bool> {
    match e {
        Ex::Num(x) if x.is_infinite() => Some(*x > 0.0),
        Ex::Lim(l) if l.val.is_infinite() && l.eps == 0 => Some(l.val > 0.0),
        _ => None,
    }
}

fn is_boolish(e: &Ex) -> bool {
    matches!(
        e,
        Ex::Bool(_) | Ex::Call(Op::And | Op::Or | Op::Not | Op::Lt | Op::Le | Op::Gt | Op::Ge | Op::Eq | Op::Ne, _)
    )
}

fn fold(e: &Ex) -> Option<Ex> {
    let env = Env { tensors: &[], slots: vec![] };
    match env.eval(e).ok()? {
        V::Num(x) => Some(Ex::Num(x)),
        V::Bool(b) => Some(Ex::Bool(b)),
        V::Lim(l) if l.eps == 0 => Some(Ex::Num(l.val)),
        V::Lim(l) => Some(Ex::Lim(l)),
        _ => None,
    }
}

fn flatten(op: Op, args: Vec<Ex>) -> Vec<Ex> {
    let mut out = Vec::with_capacity(args.len());
    for a in args {
        match a {
            Ex::Call(o, inner) if o == op => out.extend(inner),
            a => out.push(a),
        }
    }
    out
}

fn rule(e: Ex) -> Ex {
    let Ex::Call(op, args) = e else {
        return match e {
            Ex::Nudge(ref inner, k) if is_const(inner) => fold(&Ex::Nudge(inner.clone(), k)).unwrap_or(e),
            e => e,
        };
    };
    let assoc = matches!(op, Op::Add | Op::Mul | Op::And | Op::Or | Op::Max | Op::Min);
    let mut args = if assoc { flatten(op, args) } else { args };
    if args.iter().all(is_const) {
        let whole = Ex::Call(op, args);
        return fold(&whole).unwrap_or(whole);
    }
    match op {
        Op::Mul => {
            if args.iter().any(|a| truth(a) == Some(false)) {
                return Ex::Num(0.0);
            }
            args.retain(|a| truth(a) != Some(true) || matches!(a, Ex::Num(x) if *x != 1.0));
        }
        Op::Add => args.retain(|a| !matches!(a, Ex::Num(x) if *x == 0.0)),
        Op::Sub if matches!(args[1], Ex::Num(x) if x == 0.0) => return args.swap_remove(0),
        Op::And => {
            if args.iter().any(|a| truth(a) == Some(false)) {
                return Ex::Bool(false);
            }
            args.retain(|a| truth(a).is_none());
        }
        Op::Or => {
            if args.iter().any(|a| truth(a) == Some(true)) {
                return Ex::Bool(true);
            }
            args.retain(|a| truth(a).is_none());
        }
        Op::Max | Op::Min => {
            let is_max = op == Op::Max;
            let (consts, rest): (Vec<Ex>, Vec<Ex>) = args.into_iter().partition(is_const);
            args = rest;
            if let Some(c) = if consts.is_empty() { None } else { fold(&Ex::Call(op, consts)) } {
                let l = Env { tensors: &[], slots: vec![] }.eval(&c).map(|v| v.lim()).ok();
                match l {
                    Some(l) if l.val.is_infinite() && (l.val > 0.0) == is_max && (l.eps == 0 || (l.eps > 0) == is_max) => return c,
                    Some(l) if l.val.is_infinite() && (l.val > 0.0) != is_max && (l.eps == 0 || (l.eps < 0) == is_max) => {}
                    _ => args.insert(0, c),
                }
            }
            let mut uniq: Vec<Ex> = Vec::with_capacity(args.len());
            for a in args {
                if !uniq.contains(&a) {
                    uniq.push(a);
                }
            }
            args = uniq;
        }
        _ => {}
    }
    match (op, args.len()) {
        (Op::Add, 0) => Ex::Num(0.0),
        (Op::Mul, 0) => Ex::Num(1.0),
        (Op::And, 0) => Ex::Bool(true),
        (Op::Or, 0) => Ex::Bool(false),
        (Op::Max, 0) => Ex::Lim(Limit::NEG_INF),
        (Op::Min, 0) => Ex::Lim(Limit::POS_INF),
        (Op::Add | Op::Mul | Op::Max | Op::Min, 1) => args.pop().unwrap(),
        (Op::And | Op::Or, 1) if is_boolish(&args[0]) => args.pop().unwrap(),
        _ => Ex::Call(op, args),
    }
}

pub fn simplify_ex(e: Ex) -> Ex {
    let mut cur = e;
    loop {
        let next = cur.clone().map(&mut rule);
        if next == cur {
            return next;
        }
        cur = next;
    }
}

fn is_identity(op: AssignOp, rhs: &Ex) -> bool {
    match op {
        AssignOp::Add | AssignOp::Or => truth(rhs) == Some(false),
        AssignOp::And => truth(rhs) == Some(true),
        AssignOp::Max => infinite(rhs) == Some(false),
        AssignOp::Min => infinite(rhs) == Some(true),
        AssignOp::Overwrite => false,
    }
}

/// Whether statement `s` reads slot `v` anywhere.
pub(crate) fn st_uses(s: &St, v: Slot) -> bool {
    let uses = |e: &Ex| e.any(&|e| matches!(e, Ex::Var(x) | Ex::Diff(x) | Ex::RStart(x) | Ex::RStop(x) | Ex::Len(x) if *x == v));
    let mut hit = false;
    s.visit(&mut |s| {
        hit |= match s {
            St::ForCont { start, stop, .. } => uses(start) || uses(stop),
            St::If { cond, .. } => uses(cond),
            St::Let { ex, .. } => uses(ex),
            St::Intersect { starts, stops, .. } => starts.iter().chain(stops).any(uses),
            St::Guard { region, .. } => *region == v,
            St::Pin { region, .. } => *region == v,
            St::DiscLoop { lo, hi, .. } => uses(lo) || uses(hi),
            St::SparseLoop { fiber, lo, hi, .. } => uses(fiber) || uses(lo) || uses(hi),
            St::Coiter { range, steppers, stops, .. } => {
                *range == v || stops.iter().any(uses) || steppers.iter().any(|s| uses(&s.fiber) || uses(&s.offset))
            }
            St::Accumulate { lhs, rhs, zero_len, .. } | St::EmitPiece { lhs, rhs, zero_len, .. } => {
                uses(rhs)
                    || zero_len.contains(&v)
                    || lhs.idx.iter().any(|i| match i {
                        crate::ir::LhsIdx::At(e) => uses(e),
                        crate::ir::LhsIdx::Span(r) => *r == v,
                    })
            }
            St::Block(_) => false,
        }
    });
    hit
}

fn bounds_list(v: Vec<Ex>, is_start: bool) -> Vec<Ex> {
    let mut out: Vec<Ex> = Vec::new();
    for e in v.into_iter().map(simplify_ex) {
        if infinite(&e) == Some(!is_start) {
            continue;
        }
        if !out.contains(&e) {
            out.push(e);
        }
    }
    if out.is_empty() {
        out.push(Ex::Lim(if is_start { Limit::NEG_INF } else { Limit::POS_INF }));
    }
    out
}

fn const_region(starts: &[Ex], stops: &[Ex]) -> Option<bool> {
    if !starts.iter().chain(stops).all(is_const) {
        return None;
    }
    let env = Env { tensors: &[], slots: vec![] };
    let lim = |e: &Ex| env.eval(e).map(|v| v.lim()).ok();
    let mut a = Limit::NEG_INF;
    for s in starts {
        a = a.max(lim(s)?);
    }
    let mut b = Limit::POS_INF;
    for s in stops {
        b = b.min(lim(s)?);
    }
    Some(a.cmp_total(&b).is_le())
}

/// `Intersect r1 { Guard r1 { Intersect r2 [r1.start, ..] [r1.stop, ..] { Guard r2 | Coiter r2 } } }`
/// becomes one intersection: the inner region lies inside the outer one, so
/// the inner emptiness check subsumes the outer.
fn fuse(region: Slot, starts: Vec<Ex>, stops: Vec<Ex>, body: St) -> St {
    let St::Guard { region: g, body: inner } = body else {
        return St::Intersect { region, starts, stops, body: Box::new(body) };
    };
    let fusable = g == region
        && match inner.as_ref() {
            St::Intersect { region: r2, starts: s2, stops: t2, body: b2 } => {
                s2.contains(&Ex::RStart(region))
                    && t2.contains(&Ex::RStop(region))
                    && match b2.as_ref() {
                        St::Guard { region: g2, .. } => g2 == r2,
                        St::Coiter { range, .. } => range == r2,
                        _ => false,
                    }
                    && !st_uses(b2, region)
                    && s2.iter().chain(t2).filter(|e| e.any(&|e| matches!(e, Ex::RStart(x) | Ex::RStop(x) | Ex::Len(x) if *x == region))).count() == 2
            }
            _ => false,
        };
    if !fusable {
        return St::Intersect { region, starts, stops, body: Box::new(St::Guard { region: g, body: inner }) };
    }
    let St::Intersect { region: r2, starts: s2, stops: t2, body: b2 } = *inner else { unreachable!() };
    let mut all_starts = starts;
    all_starts.extend(s2.into_iter().filter(|e| *e != Ex::RStart(region)));
    let mut all_stops = stops;
    all_stops.extend(t2.into_iter().filter(|e| *e != Ex::RStop(region)));
    St::Intersect { region: r2, starts: bounds_list(all_starts, true), stops: bounds_list(all_stops, false), body: b2 }
}

fn boxed(s: St) -> Box<St> {
    Box::new(s)
}

fn step(s: St) -> St {
    match s {
        St::Block(v) => St::block(v.into_iter().map(step).filter(|s| !s.is_empty()).collect()),
        St::ForCont { idx, start, stop, body } => {
            let body = step(*body);
            if body.is_empty() {
                return St::empty();
            }
            St::ForCont { idx, start: simplify_ex(start), stop: simplify_ex(stop), body: boxed(body) }
        }
        St::If { cond, body } => {
            let cond = simplify_ex(cond);
            let body = step(*body);
            match truth(&cond) {
                Some(true) => body,
                Some(false) => St::empty(),
                None if body.is_empty() => St::empty(),
                None => St::If { cond, body: boxed(body) },
            }
        }
        St::Let { var, ex, body } => {
            let body = step(*body);
            if body.is_empty() {
                St::empty()
            } else if !st_uses(&body, var) {
                body
            } else {
                St::Let { var, ex: simplify_ex(ex), body: boxed(body) }
            }
        }
        St::Intersect { region, starts, stops, body } => {
            let body = step(*body);
            if body.is_empty() {
                return St::empty();
            }
            let starts = bounds_list(starts, true);
            let stops = bounds_list(stops, false);
            match const_region(&starts, &stops) {
                Some(false) => return St::empty(),
                Some(true) => {
                    if let St::Guard { region: g, body: inner } = body {
                        if g == region {
                            return step(St::Intersect { region, starts, stops, body: inner });
                        }
                        return St::Intersect { region, starts, stops, body: boxed(St::Guard { region: g, body: inner }) };
                    }
                }
                None => {}
            }
            if !st_uses(&body, region) {
                return body;
            }
            fuse(region, starts, stops, body)
        }
        St::Guard { region, body } => {
            let body = step(*body);
            if body.is_empty() {
                St::empty()
            } else {
                St::Guard { region, body: boxed(body) }
            }
        }
        St::Pin { var, region, body } => {
            let body = step(*body);
            if body.is_empty() {
                St::empty()
            } else if !st_uses(&body, var) {
                body
            } else {
                St::Pin { var, region, body: boxed(body) }
            }
        }
        St::DiscLoop { var, lo, hi, body } => {
            let body = step(*body);
            if body.is_empty() {
                return St::empty();
            }
            St::DiscLoop { var, lo: simplify_ex(lo), hi: simplify_ex(hi), body: boxed(body) }
        }
        St::SparseLoop { var, pos, t, lvl, fiber, lo, hi, stored, fill } => {
            let stored = step(*stored);
            let fill = step(*fill);
            if stored.is_empty() && fill.is_empty() {
                return St::empty();
            }
            St::SparseLoop {
                var,
                pos,
                t,
                lvl,
                fiber: simplify_ex(fiber),
                lo: simplify_ex(lo),
                hi: simplify_ex(hi),
                stored: boxed(stored),
                fill: boxed(fill),
            }
        }
        St::Coiter { range, segment, steppers, stops, body } => {
            let body = step(*body);
            if body.is_empty() {
                return St::empty();
            }
            let steppers = steppers
                .into_iter()
                .map(|mut s| {
                    s.fiber = simplify_ex(s.fiber);
                    s.offset = simplify_ex(s.offset);
                    s
                })
                .collect();
            St::Coiter { range, segment, steppers, stops: stops.into_iter().map(simplify_ex).collect(), body: boxed(body) }
        }
        St::Accumulate { lhs, op, rhs, measure, zero_len } => {
            let rhs = simplify_ex(rhs);
            if is_identity(op, &rhs) {
                return St::empty();
            }
            St::Accumulate { lhs: simplify_lhs(lhs), op, rhs, measure, zero_len }
        }
        St::EmitPiece { lhs, op, rhs, zero_len } => {
            let rhs = simplify_ex(rhs);
            let fill = op == AssignOp::Overwrite && truth(&rhs) == Some(false);
            if fill || is_identity(op, &rhs) {
                return St::empty();
            }
            St::EmitPiece { lhs: simplify_lhs(lhs), op, rhs, zero_len }
        }
    }
}

fn simplify_lhs(mut lhs: crate::ir::Lhs) -> crate::ir::Lhs {
    for i in &mut lhs.idx {
        if let crate::ir::LhsIdx::At(e) = i {
            *e = simplify_ex(std::mem::replace(e, Ex::Num(0.0)));
        }
    }
    lhs
}

/// Applies the rewrite rules until a fixpoint.
pub fn simplify(s: St) -> St {
    let mut cur = s;
    loop {
        let next = step(cur.clone());
        if next == cur {
            return next;
        }
        cur = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{Lhs, Measure};

    fn acc(rhs: Ex) -> St {
        St::Accumulate { lhs: Lhs { out: 0, idx: vec![] }, op: AssignOp::Add, rhs, measure: Measure::Counting, zero_len: vec![] }
    }

    #[test]
    fn zero_update_disappears() {
        assert!(simplify(acc(Ex::Num(0.0))).is_empty());
        let prod = Ex::call(Op::Mul, vec![Ex::Var(0), Ex::Num(0.0), Ex::Var(1)]);
        assert!(simplify(acc(prod)).is_empty());
    }

    #[test]
    fn and_true_is_dropped() {
        let e = Ex::call(Op::And, vec![Ex::call(Op::Lt, vec![Ex::Var(0), Ex::Num(1.0)]), Ex::Bool(true)]);
        assert_eq!(simplify_ex(e), Ex::call(Op::Lt, vec![Ex::Var(0), Ex::Num(1.0)]));
    }

    #[test]
    fn if_true_is_its_body() {
        let s = St::If { cond: Ex::Bool(true), body: Box::new(acc(Ex::Var(3))) };
        assert_eq!(simplify(s), acc(Ex::Var(3)));
        let s = St::If { cond: Ex::call(Op::Lt, vec![Ex::Num(2.0), Ex::Num(1.0)]), body: Box::new(acc(Ex::Var(3))) };
        assert!(simplify(s).is_empty());
    }

    #[test]
    fn max_drops_negative_infinity() {
        let e = Ex::call(Op::Max, vec![Ex::Lim(Limit::NEG_INF), Ex::Var(0), Ex::Var(1)]);
        assert_eq!(simplify_ex(e), Ex::call(Op::Max, vec![Ex::Var(0), Ex::Var(1)]));
    }
}
