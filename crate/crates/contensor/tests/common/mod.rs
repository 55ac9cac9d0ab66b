#![allow(dead_code)]

use proptest::prelude::*;
use proptest::test_runner::Config;

use contensor::interval::{Interval, Kind};
use contensor::{ContTensor, Limit, Value};

pub fn config() -> Config {
    Config { cases: 10_000, failure_persistence: None, ..Config::default() }
}

pub fn quarter() -> impl Strategy<Value = f64> {
    (-40i32..=40).prop_map(|k| k as f64 * 0.25)
}

/// Finer than [`quarter`], so queries land on, between and beside endpoints.
pub fn eighth() -> impl Strategy<Value = f64> {
    (-90i32..=90).prop_map(|k| k as f64 * 0.125)
}

pub fn limit() -> impl Strategy<Value = Limit> {
    prop_oneof![
        8 => (quarter(), -1i8..=1).prop_map(|(v, e)| Limit::new(v, e)),
        1 => Just(Limit::NEG_INF),
        1 => Just(Limit::POS_INF),
    ]
}

pub fn kind() -> impl Strategy<Value = Kind> {
    prop_oneof![Just(Kind::Closed), Just(Kind::RightOpen), Just(Kind::LeftOpen), Just(Kind::Open)]
}

pub fn interval() -> impl Strategy<Value = Interval> {
    (quarter(), quarter(), kind()).prop_map(|(a, b, k)| Interval::from_kind(a.min(b), a.max(b), k))
}

/// Sorted disjoint non-empty pieces on the quarter grid with nonzero values.
pub fn pieces(max: usize) -> impl Strategy<Value = Vec<(Interval, Value)>> {
    let start = (-40i32..=0).prop_map(|k| k as f64 * 0.25);
    let step = (1i32..=8, 0i32..=8, kind(), 1i32..=9);
    (start, prop::collection::vec(step, 0..=max)).prop_map(|(mut at, steps)| {
        let mut out = Vec::new();
        for (gap, len, kind, v) in steps {
            let a = at + gap as f64 * 0.25;
            let b = a + len as f64 * 0.25;
            let kind = if len == 0 { Kind::Closed } else { kind };
            out.push((Interval::from_kind(a, b, kind), Value::Num(v as f64)));
            at = b;
        }
        out
    })
}

/// Pieces that are all points.
pub fn point_pieces(max: usize) -> impl Strategy<Value = Vec<(Interval, Value)>> {
    prop::collection::btree_set(-80i32..=80, 0..=max)
        .prop_flat_map(|xs| {
            let n = xs.len();
            (Just(xs), prop::collection::vec(1i32..=9, n))
        })
        .prop_map(|(xs, vs)| xs.into_iter().zip(vs).map(|(x, v)| (Interval::point(x as f64 * 0.25), Value::Num(v as f64))).collect())
}

pub fn one_level(pieces: &[(Interval, Value)]) -> ContTensor {
    ContTensor::from_pieces("t", pieces, Value::Num(0.0)).expect("generated pieces are valid")
}

/// Value at `x` by scanning the piece list.
pub fn scan(pieces: &[(Interval, Value)], fill: Value, x: f64) -> Value {
    pieces.iter().find(|(iv, _)| iv.contains(x)).map(|p| p.1).unwrap_or(fill)
}
