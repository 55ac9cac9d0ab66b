mod common;

use proptest::prelude::*;

use common::*;
use contensor::interval::{Interval, Kind};
use contensor::io;
use contensor::storage::{BuildError, DimSpec, Flags, Level, Seg};
use contensor::{ContTensor, Value};

fn spans(t: &ContTensor) -> Vec<(Interval, Value)> {
    t.pieces(false)
        .into_iter()
        .map(|p| match p.path[..] {
            [Seg::Span(iv)] => (iv, p.value),
            _ => panic!("unexpected path {:?}", p.path),
        })
        .collect()
}

fn interval_level(t: &ContTensor) -> (Vec<usize>, Vec<f64>, Vec<f64>, Flags) {
    match &t.levels[0] {
        Level::Interval { ptr, left, right, flags } => (ptr.clone(), left.clone(), right.clone(), flags.clone()),
        other => panic!("expected an interval level, got {other:?}"),
    }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn pieces_round_trip(ps in pieces(8)) {
        let t = one_level(&ps);
        prop_assert_eq!(spans(&t), ps);
    }

    #[test]
    fn point_pieces_round_trip(ps in point_pieces(8)) {
        let t = one_level(&ps);
        prop_assert!(ps.is_empty() || t.levels[0].is_pinpoint());
        prop_assert_eq!(spans(&t), ps);
    }

    #[test]
    fn eval_matches_linear_scan(ps in pieces(8), xs in prop::collection::vec(eighth(), 16)) {
        let t = one_level(&ps);
        for x in xs {
            prop_assert!(t.eval(&[x]).unwrap().same(scan(&ps, t.fill, x)));
        }
    }

    #[test]
    fn flag_encodings_agree(ps in pieces(8), xs in prop::collection::vec(eighth(), 16)) {
        let t = one_level(&ps);
        if t.levels[0].is_pinpoint() {
            return Ok(());
        }
        let (ptr, left, right, flags) = interval_level(&t);
        let n = left.len();
        let (lc, rc): (Vec<bool>, Vec<bool>) = (0..n).map(|p| (flags.kind_at(p).lclose(), flags.kind_at(p).rclose())).unzip();
        let per = Level::Interval { ptr, left, right, flags: Flags::PerEntry { lclose: lc, rclose: rc } };
        let u = ContTensor::new("t", vec![per], t.values.clone(), t.fill).unwrap();
        prop_assert_eq!(spans(&u), spans(&t));
        for x in xs {
            prop_assert!(u.eval(&[x]).unwrap().same(t.eval(&[x]).unwrap()));
        }
    }

    #[test]
    fn regular_matches_expanded(
        cells in prop::collection::btree_set(-20i64..=20, 0..8),
        stride in prop_oneof![Just(0.5), Just(1.0), Just(2.0)],
        frac in prop_oneof![Just(0.0), Just(0.5), Just(1.0)],
        rclose in any::<bool>(),
        xs in prop::collection::vec(eighth(), 16),
    ) {
        let len = stride * frac;
        let rclose = rclose && frac < 1.0;
        let xs_cells: Vec<i64> = cells.into_iter().collect();
        let n = xs_cells.len();
        let values: Vec<Value> = (0..n).map(|k| Value::Num(k as f64 + 1.0)).collect();
        let regular = Level::Regular { ptr: vec![0, n], stride, len, rclose: rclose || len == 0.0, xs: xs_cells.clone() };
        let ivs: Vec<(Interval, Value)> = xs_cells
            .iter()
            .zip(&values)
            .map(|(x, v)| {
                let a = stride * *x as f64;
                let kind = if rclose || len == 0.0 { Kind::Closed } else { Kind::RightOpen };
                (Interval::from_kind(a, a + len, kind), *v)
            })
            .collect();
        let r = ContTensor::new("r", vec![regular], values, Value::Num(0.0)).unwrap();
        let e = one_level(&ivs);
        prop_assert_eq!(spans(&r), spans(&e));
        for x in xs {
            prop_assert!(r.eval(&[x]).unwrap().same(e.eval(&[x]).unwrap()));
        }
    }

    #[test]
    fn json_round_trip(ps in pieces(6)) {
        let t = one_level(&ps);
        let s = io::save_string(&t);
        let back = io::load_str(&s).unwrap();
        prop_assert_eq!(&back, &t);
        prop_assert_eq!(io::save_string(&back), s);
    }
}

#[test]
fn f_x_matches_its_listing() {
    let f = contensor::kernels::f_x();
    for (x, v) in [(2.0, 1.0), (4.5, 2.0), (3.5, 0.0), (0.5, 0.0), (6.0, 0.0), (1.0, 1.0), (3.0, 1.0), (5.1, 2.0)] {
        assert!(f.eval(&[x]).unwrap().same(Value::Num(v)), "f_x({x})");
    }
}

#[test]
fn overlapping_pieces_are_rejected() {
    let ps = [(Interval::closed(1.0, 3.0), Value::Num(1.0)), (Interval::closed(3.0, 4.0), Value::Num(2.0))];
    assert!(matches!(ContTensor::from_pieces("t", &ps, Value::Num(0.0)), Err(BuildError::Overlap { .. })));
    let ps = [(Interval::from_kind(1.0, 3.0, Kind::RightOpen), Value::Num(1.0)), (Interval::closed(3.0, 4.0), Value::Num(2.0))];
    assert!(ContTensor::from_pieces("t", &ps, Value::Num(0.0)).is_ok());
}

#[test]
fn unsorted_and_empty_pieces_are_rejected() {
    let ps = [(Interval::closed(5.0, 6.0), Value::Num(1.0)), (Interval::closed(1.0, 2.0), Value::Num(2.0))];
    assert!(matches!(ContTensor::from_pieces("t", &ps, Value::Num(0.0)), Err(BuildError::Unsorted { .. })));
    let ps = [(Interval::from_kind(1.0, 1.0, Kind::Open), Value::Num(1.0))];
    assert!(ContTensor::from_pieces("t", &ps, Value::Num(0.0)).is_err());
}

#[test]
fn entries_build_multi_level_tensors() {
    let entries = vec![
        (vec![Seg::Index(1), Seg::Span(Interval::closed(0.0, 2.0))], Value::Num(3.0)),
        (vec![Seg::Index(0), Seg::Span(Interval::point(1.5))], Value::Num(4.0)),
    ];
    let t = ContTensor::from_entries("t", &[DimSpec::Dense(2), DimSpec::Auto], Value::Num(0.0), entries).unwrap();
    assert!(t.eval(&[0.0, 1.5]).unwrap().same(Value::Num(4.0)));
    assert!(t.eval(&[0.0, 1.6]).unwrap().same(Value::Num(0.0)));
    assert!(t.eval(&[1.0, 1.6]).unwrap().same(Value::Num(3.0)));
    assert!(t.eval(&[2.0, 0.0]).is_err());
}

#[test]
fn json_schema_errors_name_the_field() {
    let fx = io::save_string(&contensor::kernels::f_x());
    let reversed = fx.replacen("1.0,\n        4.1", "4.0,\n        4.1", 1);
    assert_ne!(reversed, fx);
    let e = io::load_str(&reversed).unwrap_err().to_string();
    assert!(e.contains("$.levels[0]"), "{e}");

    let hetero = r#"{"name":"x","fill":0,"levels":[{"kind":"interval","ptr":[0,2],"left":[1,4],"right":[3,5],"lclose":[true],"rclose":true}],"values":[1,2]}"#;
    let e = io::load_str(hetero).unwrap_err().to_string();
    assert!(e.contains("lclose"), "{e}");
}

#[test]
fn json_accepts_infinite_endpoints() {
    let s = r#"{"name":"h","fill":0,"levels":[{"kind":"interval","left":["-Inf"],"right":[0],"lclose":false,"rclose":false}],"values":[1]}"#;
    let t = io::load_str(s).unwrap();
    assert!(t.eval(&[-1e300]).unwrap().same(Value::Num(1.0)));
    assert!(t.eval(&[0.0]).unwrap().same(Value::Num(0.0)));
    assert_eq!(io::load_str(&io::save_string(&t)).unwrap(), t);
}
