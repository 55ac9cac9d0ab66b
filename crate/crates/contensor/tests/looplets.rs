mod common;

use proptest::prelude::*;

use common::*;
use contensor::interval::Interval;
use contensor::ir::{Env, Slots, V};
use contensor::looplet::{unfurl_interval, unfurl_pinpoint, unfurl_regular, Looplet};
use contensor::storage::Level;
use contensor::{ContTensor, Limit, Value};

fn looplet_of(t: &ContTensor, slots: &mut Slots) -> Looplet {
    match &t.levels[0] {
        Level::Pinpoint { .. } => unfurl_pinpoint(t, 0, 0, slots),
        Level::Regular { .. } => unfurl_regular(t, 0, 0, slots),
        _ => unfurl_interval(t, 0, 0, slots),
    }
}

fn segments(t: &ContTensor) -> Vec<(Interval, Option<usize>)> {
    let mut slots = Slots::default();
    let lp = looplet_of(t, &mut slots);
    let tensors = [t];
    let mut env = Env { tensors: &tensors, slots: vec![V::Pos(None); slots.len()] };
    let mut out = Vec::new();
    lp.segments(Limit::NEG_INF, Limit::POS_INF, &mut env, &mut out).unwrap();
    out
}

fn check_cover(t: &ContTensor) -> Result<(), TestCaseError> {
    let segs = segments(t);
    prop_assert!(!segs.is_empty());
    prop_assert_eq!(segs[0].0.start, Limit::NEG_INF);
    prop_assert_eq!(segs[segs.len() - 1].0.stop, Limit::POS_INF);
    for (iv, _) in &segs {
        prop_assert!(!iv.is_empty(), "empty segment {}", iv);
    }
    for w in segs.windows(2) {
        prop_assert_eq!(w[0].0.stop.nudge(1), w[1].0.start, "gap or overlap between {} and {}", w[0].0, w[1].0);
    }
    let stored: Vec<Interval> = segs.iter().filter(|s| s.1.is_some()).map(|s| s.0).collect();
    let want: Vec<Interval> = t.fiber_pieces(0, 0, false).into_iter().map(|p| p.0).collect();
    prop_assert_eq!(stored, want);
    Ok(())
}

fn check_faithful(t: &ContTensor, xs: &[f64]) -> Result<(), TestCaseError> {
    let mut slots = Slots::default();
    let lp = looplet_of(t, &mut slots);
    let tensors = [t];
    for &x in xs {
        let mut env = Env { tensors: &tensors, slots: vec![V::Pos(None); slots.len()] };
        let got = match lp.eval_at(x, &mut env).unwrap() {
            Some(p) => t.values[p],
            None => t.fill,
        };
        prop_assert!(got.same(t.eval(&[x]).unwrap()), "at {}: looplet {} tensor {}", x, got, t.eval(&[x]).unwrap());
    }
    Ok(())
}

fn regular(cells: &[i64], stride: f64, len: f64, rclose: bool) -> ContTensor {
    let values = (0..cells.len()).map(|k| Value::Num(k as f64 + 1.0)).collect();
    let lv = Level::Regular { ptr: vec![0, cells.len()], stride, len, rclose, xs: cells.to_vec() };
    ContTensor::new("r", vec![lv], values, Value::Num(0.0)).unwrap()
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn interval_phases_tile_the_line(ps in pieces(8)) {
        check_cover(&one_level(&ps))?;
    }

    #[test]
    fn pinpoint_phases_tile_the_line(ps in point_pieces(8)) {
        check_cover(&one_level(&ps))?;
    }

    #[test]
    fn regular_phases_tile_the_line(cells in prop::collection::btree_set(-20i64..=20, 0..8), half in any::<bool>()) {
        let cells: Vec<i64> = cells.into_iter().collect();
        let len = if half { 0.5 } else { 1.0 };
        check_cover(&regular(&cells, 1.0, len, half))?;
    }

    #[test]
    fn interval_looplet_is_faithful(ps in pieces(8), xs in prop::collection::vec(eighth(), 16)) {
        check_faithful(&one_level(&ps), &xs)?;
    }

    #[test]
    fn pinpoint_looplet_is_faithful(ps in point_pieces(8), xs in prop::collection::vec(eighth(), 16)) {
        check_faithful(&one_level(&ps), &xs)?;
    }

    #[test]
    fn regular_looplet_is_faithful(cells in prop::collection::btree_set(-20i64..=20, 0..8), xs in prop::collection::vec(eighth(), 16)) {
        let cells: Vec<i64> = cells.into_iter().collect();
        check_faithful(&regular(&cells, 0.5, 0.5, false), &xs)?;
    }
}

#[test]
fn f_x_splits_into_five_runs() {
    let segs = segments(&contensor::kernels::f_x());
    let shown: Vec<String> = segs.iter().map(|(iv, p)| format!("{iv}:{}", p.map_or("fill".to_string(), |p| p.to_string()))).collect();
    assert_eq!(shown, ["[-Inf,1):fill", "[1,3]:0", "(3,4.1):fill", "[4.1,5.1]:1", "(5.1,+Inf]:fill"]);
}
