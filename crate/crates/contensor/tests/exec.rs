mod common;

use proptest::prelude::*;

use common::config;
use contensor::compiler::{lower, LowerOptions, OutDim, OutputSpec, Plan};
use contensor::exec::{run, Builder, ExecError, ExecOptions, SumMode};
use contensor::ir::AssignOp;
use contensor::kernels::{self, Instance};
use contensor::lang::parse;
use contensor::oracle::{self, OracleError};
use contensor::storage::Seg;
use contensor::{Interval, Value};

fn plan(src: &str, inst: &Instance) -> Plan {
    lower(&parse(src).unwrap(), &inst.tensors, &inst.params, &LowerOptions::default()).unwrap()
}

fn vector(op: AssignOp, n: usize) -> Builder {
    Builder::new(&OutputSpec { name: "v".into(), dims: vec![OutDim::Discrete(n)], op })
}

fn lines() -> Builder {
    Builder::new(&OutputSpec { name: "z".into(), dims: vec![OutDim::Continuous], op: AssignOp::Add })
}

fn entries(b: Builder) -> Vec<Value> {
    b.finish().unwrap().values
}

fn op() -> impl Strategy<Value = AssignOp> {
    prop_oneof![Just(AssignOp::Or), Just(AssignOp::And), Just(AssignOp::Max), Just(AssignOp::Min)]
}

fn update_value(op: AssignOp, k: i32) -> Value {
    match op {
        AssignOp::Or | AssignOp::And => Value::Bool(k % 2 == 0),
        _ => Value::Num(k as f64 * 0.5),
    }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn idempotent_reductions_ignore_duplicates(op in op(), ups in prop::collection::vec((0usize..4, -8i32..8), 1..12), dup in prop::collection::vec(any::<bool>(), 12)) {
        let mut once = vector(op, 4);
        let mut twice = vector(op, 4);
        for (k, (at, x)) in ups.iter().enumerate() {
            let v = update_value(op, *x);
            once.update(&[*at as f64], v).unwrap();
            twice.update(&[*at as f64], v).unwrap();
            if dup[k] {
                twice.update(&[*at as f64], v).unwrap();
            }
        }
        prop_assert_eq!(entries(once), entries(twice));
    }

    #[test]
    fn sums_do_not_depend_on_order(ups in prop::collection::vec((0usize..3, -1000i32..1000), 1..16), seed in any::<u64>()) {
        use rand::{seq::SliceRandom, SeedableRng};
        let mut shuffled = ups.clone();
        shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let mut a = vector(AssignOp::Add, 3);
        let mut b = vector(AssignOp::Add, 3);
        for (at, x) in &ups {
            a.update(&[*at as f64], Value::Num(*x as f64 / 7.0)).unwrap();
        }
        for (at, x) in &shuffled {
            b.update(&[*at as f64], Value::Num(*x as f64 / 7.0)).unwrap();
        }
        for (x, y) in entries(a).into_iter().zip(entries(b)) {
            let (x, y) = (x.as_f64(), y.as_f64());
            prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(y.abs()).max(1.0), "{} vs {}", x, y);
        }
    }
}

#[test]
fn runs_are_deterministic() {
    for k in kernels::CORE {
        let inst = kernels::fixture(&k);
        let p = plan(k.source, &inst);
        let (a, sa) = run(&p, &inst.tensors, ExecOptions::default()).unwrap();
        let (b, sb) = run(&p, &inst.tensors, ExecOptions::default()).unwrap();
        assert_eq!(a, b, "{}", k.name);
        assert_eq!(sa, sb, "{}", k.name);
    }
}

#[test]
fn overwrite_copies_a_function() {
    let inst = Instance::default().with(kernels::f_x());
    let p = plan("for i = -∞:∞\n  B[i] = x[i]\nend\n", &inst);
    let (out, stats) = run(&p, &inst.tensors, ExecOptions::default()).unwrap();
    for x in [0.5, 1.0, 2.0, 3.0, 3.5, 4.1, 4.5, 5.1, 6.0] {
        assert!(out.eval(&[x]).unwrap().same(inst.tensors["x"].eval(&[x]).unwrap()), "at {x}");
    }
    assert_eq!(stats.pieces_emitted, 2);
}

#[test]
fn overlapping_continuous_writes_are_rejected() {
    let mut b = lines();
    b.emit(vec![Seg::Span(Interval::closed(0.0, 2.0))], Value::Num(1.0)).unwrap();
    b.emit(vec![Seg::Span(Interval::closed(1.0, 3.0))], Value::Num(1.0)).unwrap();
    assert!(matches!(b.finish(), Err(ExecError::Overlap(..))));

    let mut b = lines();
    b.emit(vec![Seg::Span(Interval::closed(0.0, 2.0))], Value::Num(1.0)).unwrap();
    b.emit(vec![Seg::Span(Interval::closed(0.0, 2.0))], Value::Num(2.0)).unwrap();
    let t = b.finish().unwrap();
    assert!(t.eval(&[1.0]).unwrap().same(Value::Num(3.0)));
}

#[test]
fn plain_sums_over_intervals_are_refused_unless_skipped() {
    let inst = Instance::default().with(kernels::f_x()).with(kernels::points("y", &[(2.0, 5.0), (3.5, 7.0)]));
    let p = parse("for i = 0.0:9.0\n  s += x[i] + y[i]\nend\n").unwrap();
    assert!(lower(&p, &inst.tensors, &inst.params, &LowerOptions::default()).is_err());
    let e = oracle::eval(&p, &inst.tensors, &inst.params, SumMode::Strict).unwrap_err();
    assert!(matches!(e, OracleError::Exec(ExecError::SummationOverInterval(_))), "{e}");
    let out = oracle::eval(&p, &inst.tensors, &inst.params, SumMode::SkipIntervals).unwrap();
    assert!(out.values[0].same(Value::Num(1.0 + 5.0 + 7.0)), "{}", out.values[0]);
}

#[test]
fn discrete_writes_outside_the_output_fail() {
    let mut b = vector(AssignOp::Add, 3);
    assert!(matches!(b.update(&[3.0], Value::Num(1.0)), Err(ExecError::OutputRange { size: 3, .. })));
    assert!(matches!(b.update(&[0.5], Value::Num(1.0)), Err(ExecError::OutputRange { .. })));
    assert!(b.update(&[2.0], Value::Num(1.0)).is_ok());
}
