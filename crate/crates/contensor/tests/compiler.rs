mod common;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::config;
use contensor::compiler::{lower, simplify, simplify_ex, CompileError, Fact, LowerOptions, Plan, Prover};
use contensor::exec::{run, ExecOptions, SumMode};
use contensor::interval::Interval;
use contensor::ir::{Env, Ex, Op, St, V};
use contensor::kernels::{self, Instance};
use contensor::lang::parse;
use contensor::oracle;
use contensor::storage::{DimSpec, Seg};
use contensor::{ContTensor, Limit, Value};

fn pieces(rng: &mut ChaCha8Rng, name: &str, pinpoint: bool, lo: f64, hi: f64) -> ContTensor {
    let ivs = if pinpoint {
        kernels::grid_points(rng, 6, lo, hi).into_iter().map(Interval::point).collect()
    } else {
        kernels::grid_intervals(rng, 6, lo, hi)
    };
    let dim = if pinpoint { DimSpec::Pinpoint } else { DimSpec::Interval };
    let entries = ivs.into_iter().map(|iv| (vec![Seg::Span(iv)], Value::Num(rng.gen_range(1..=8) as f64 * 0.5))).collect();
    kernels::tensor(name, &[dim], Value::Num(0.0), entries)
}

fn matrix(rng: &mut ChaCha8Rng, name: &str, first: DimSpec) -> ContTensor {
    let rows: Vec<Seg> = match first {
        DimSpec::Dense(n) => (0..n).map(Seg::Index).collect(),
        _ => kernels::grid_intervals(rng, 3, 0.0, 4.0).into_iter().map(Seg::Span).collect(),
    };
    let mut entries = Vec::new();
    for r in rows {
        for iv in kernels::grid_intervals(rng, 3, 0.0, 4.0) {
            entries.push((vec![r, Seg::Span(iv)], Value::Num(rng.gen_range(1..=4) as f64)));
        }
    }
    kernels::tensor(name, &[first, DimSpec::Interval], Value::Num(0.0), entries)
}

fn offset(rng: &mut ChaCha8Rng) -> String {
    let k: i32 = rng.gen_range(-8..=8);
    match k {
        0 => String::new(),
        k if k > 0 => format!(" + {}", k as f64 * 0.25),
        k => format!(" - {}", -k as f64 * 0.25),
    }
}

/// A small random program and a matching instance.
fn random_program(rng: &mut ChaCha8Rng) -> (String, Instance) {
    let lo = kernels::grid_point(rng, -1.0, 2.0);
    let hi = lo + kernels::grid_point(rng, 0.0, 6.0);
    match rng.gen_range(0..9) {
        0 => {
            let src = format!("for i = {lo:?}:{hi:?}\n  s += x[i{}] * y[i] * d(i)\nend\n", offset(rng));
            (src, Instance::default().with(pieces(rng, "x", false, -1.0, 8.0)).with(pieces(rng, "y", false, -1.0, 8.0)))
        }
        1 => {
            let src = "for i = -∞:∞\n  s += x[i] * y[i]\nend\n".to_string();
            let ypin = rng.gen_bool(0.5);
            (src, Instance::default().with(pieces(rng, "x", true, -1.0, 8.0)).with(pieces(rng, "y", ypin, -1.0, 8.0)))
        }
        2 => {
            let op = *["+", "*"].choose(rng).unwrap();
            let src = format!("for i = -∞:∞\n  Z[i] = x[i] {op} y[i{}]\nend\n", offset(rng));
            (src, Instance::default().with(pieces(rng, "x", false, -1.0, 8.0)).with(pieces(rng, "y", false, -1.0, 8.0)))
        }
        3 => {
            let mask = kernels::grid_points(rng, 5, -1.0, 6.0).into_iter().map(|x| (vec![Seg::Span(Interval::point(x))], Value::Bool(true))).collect();
            let src = "for i = -∞:∞\n  if M[i]\n    for j = -∞:∞\n      Z[i] += x[i+j] * y[j] * d(j)\n    end\n  end\nend\n";
            let inst = Instance::default()
                .with(kernels::tensor("M", &[DimSpec::Pinpoint], Value::Bool(false), mask))
                .with(pieces(rng, "x", false, -3.0, 8.0))
                .with(pieces(rng, "y", false, -2.0, 2.0));
            (src.to_string(), inst)
        }
        4 => {
            let op = *["max=", "min="].choose(rng).unwrap();
            let src = format!("for i = {lo:?}:{hi:?}\n  s {op} x[i] + y[i{}]\nend\n", offset(rng));
            (src, Instance::default().with(pieces(rng, "x", false, -1.0, 8.0)).with(pieces(rng, "y", false, -1.0, 8.0)))
        }
        5 => {
            let src = "for i = -∞:∞\n  for j = -∞:∞\n    s += A[i, j] * x[j] * d(i) * d(j)\n  end\nend\n".to_string();
            (src, Instance::default().with(matrix(rng, "A", DimSpec::Interval)).with(pieces(rng, "x", false, -1.0, 5.0)))
        }
        6 => {
            let n = rng.gen_range(1..=3);
            let src = "for k = 0:N-1\n  for i = -∞:∞\n    Out[k] += A[k, i] * x[i] * d(i)\n  end\nend\n".to_string();
            (src, Instance::default().with(matrix(rng, "A", DimSpec::Dense(n))).with(pieces(rng, "x", false, -1.0, 5.0)).param("N", n as f64))
        }
        7 => {
            let src = format!("for i = -∞:∞\n  Z[i] |= x[i] > 1.5 && y[i{}] > 0\nend\n", offset(rng));
            (src, Instance::default().with(pieces(rng, "x", false, -1.0, 8.0)).with(pieces(rng, "y", false, -1.0, 8.0)))
        }
        _ => {
            let src = format!("for i = {lo:?}:{hi:?}\n  for j = -∞:∞\n    s += x[i] * y[j{}] * d(i) * d(j)\n  end\nend\n", offset(rng));
            let inst = Instance::default().with(pieces(rng, "x", false, -1.0, 5.0)).with(pieces(rng, "y", false, -2.0, 6.0));
            (src, inst)
        }
    }
}

fn exec_plan(plan: &Plan, inst: &Instance) -> ContTensor {
    run(plan, &inst.tensors, ExecOptions::default()).unwrap_or_else(|e| panic!("{e}\n{plan}")).0
}

fn integral(src: &str) -> bool {
    src.contains("d(")
}

#[test]
fn random_programs_lower_completely_and_match_the_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in 0..500 {
        let (src, inst) = random_program(&mut rng);
        let p = parse(&src).unwrap();
        let plan = lower(&p, &inst.tensors, &inst.params, &LowerOptions::default()).unwrap_or_else(|e| panic!("program {n}: {e}\n{src}"));
        assert_eq!(plan.body.count(|s| matches!(s, St::ForCont { .. })), 0, "program {n}:\n{src}\n{plan}");
        let got = exec_plan(&plan, &inst);
        let want = oracle::eval(&p, &inst.tensors, &inst.params, SumMode::Strict).unwrap_or_else(|e| panic!("program {n}: {e}\n{src}"));
        let rel = if integral(&src) { 1e-9 } else { 0.0 };
        if let Err(d) = kernels::compare(&got, &want, rel) {
            panic!("program {n}: {d}\n{src}\n{plan}");
        }
    }
}

#[test]
fn corpus_plans_have_no_continuous_loops() {
    for k in kernels::ALL {
        let inst = kernels::fixture(&k);
        let plan = lower(&k.program(), &inst.tensors, &inst.params, &LowerOptions::default()).unwrap();
        assert_eq!(plan.body.count(|s| matches!(s, St::ForCont { .. })), 0, "{}", k.name);
    }
}

#[test]
fn simplifying_plans_keeps_their_results() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for n in 0..300 {
        let (src, inst) = random_program(&mut rng);
        let p = parse(&src).unwrap();
        let raw = lower(&p, &inst.tensors, &inst.params, &LowerOptions { no_simplify: true, ..Default::default() }).unwrap();
        let mut simplified = raw.clone();
        simplified.body = simplify(raw.body.clone());
        let bounded = lower(&p, &inst.tensors, &inst.params, &LowerOptions { opt_bounds: true, ..Default::default() }).unwrap();
        let base = exec_plan(&raw, &inst);
        let rel = if integral(&src) { 1e-12 } else { 0.0 };
        for other in [&simplified, &bounded] {
            if let Err(d) = kernels::compare(&exec_plan(other, &inst), &base, rel) {
                panic!("program {n}: {d}\n{src}\n{raw}\n---\n{other}");
            }
        }
    }
}

#[test]
fn missing_inputs_are_reported_by_name() {
    let p = kernels::DOT_INTEGRAL.program();
    let inst = Instance::default().with(kernels::f_x());
    let e = lower(&p, &inst.tensors, &inst.params, &LowerOptions::default()).unwrap_err();
    assert_eq!(e, CompileError::MissingTensor("y".into()));
    let p = kernels::RADIUS_SEARCH.program();
    let inst = kernels::fixture(&kernels::RADIUS_SEARCH);
    let mut params = inst.params.clone();
    params.remove("R");
    let e = lower(&p, &inst.tensors, &params, &LowerOptions::default()).unwrap_err();
    assert_eq!(e, CompileError::MissingParam("R".into()));
}

#[test]
fn invalid_programs_do_not_lower() {
    let p = parse("for i = -∞:∞\n  s += A[i]\nend").unwrap();
    let mut a = kernels::f_x();
    a.name = "A".into();
    let inst = Instance::default().with(a);
    let e = lower(&p, &inst.tensors, &inst.params, &LowerOptions::default()).unwrap_err();
    assert!(matches!(e, CompileError::Invalid(_)), "{e}");
    assert!(e.to_string().contains("R-SUM"), "{e}");
}

#[test]
fn dot_integral_lowers_to_one_coiteration() {
    let inst = kernels::dot_integral_fixture();
    let plan = lower(&kernels::DOT_INTEGRAL.program(), &inst.tensors, &inst.params, &LowerOptions::default()).unwrap();
    assert_eq!(plan.body.count(|s| matches!(s, St::Coiter { .. })), 1);
    assert_eq!(plan.body.count(|s| matches!(s, St::Accumulate { .. })), 1);
    let text = plan.to_string();
    assert!(text.contains("drop_eps(") && text.contains("x.val") && text.contains("y.val"), "{text}");
}

// Expression-level rewrites: slots 0..4 hold numbers, 4..8 limits, 8..10 booleans.

fn num_ex() -> impl Strategy<Value = Ex> {
    let leaf = prop_oneof![(-8i32..=8).prop_map(|k| Ex::Num(k as f64 * 0.5)), (0usize..4).prop_map(Ex::Var)];
    leaf.prop_recursive(3, 16, 3, |inner| {
        prop_oneof![
            (prop::sample::select(vec![Op::Add, Op::Mul, Op::Max, Op::Min]), prop::collection::vec(inner.clone(), 1..=3))
                .prop_map(|(op, args)| Ex::call(op, args)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Ex::bin(Op::Sub, a, b)),
            inner.prop_map(|a| Ex::call(Op::Neg, vec![a])),
        ]
    })
}

fn lim_ex() -> impl Strategy<Value = Ex> {
    let leaf = prop_oneof![
        (-8i32..=8, -1i8..=1).prop_map(|(k, e)| Ex::Lim(Limit::new(k as f64 * 0.5, e))),
        Just(Ex::Lim(Limit::NEG_INF)),
        Just(Ex::Lim(Limit::POS_INF)),
        (4usize..8).prop_map(Ex::Var),
    ];
    leaf.prop_recursive(3, 16, 3, |inner| {
        prop_oneof![
            (prop::sample::select(vec![Op::Max, Op::Min]), prop::collection::vec(inner.clone(), 1..=3)).prop_map(|(op, args)| Ex::call(op, args)),
            (inner.clone(), -1i8..=1).prop_map(|(a, k)| Ex::Nudge(Box::new(a), k)),
            (inner, (-4i32..=4)).prop_map(|(a, k)| Ex::bin(Op::Add, a, Ex::Num(k as f64 * 0.5))),
        ]
    })
}

fn bool_ex() -> impl Strategy<Value = Ex> {
    let cmp = prop::sample::select(vec![Op::Lt, Op::Le, Op::Eq, Op::Ne, Op::Gt, Op::Ge]);
    let leaf = prop_oneof![
        any::<bool>().prop_map(Ex::Bool),
        (8usize..10).prop_map(Ex::Var),
        (cmp.clone(), num_ex(), num_ex()).prop_map(|(op, a, b)| Ex::bin(op, a, b)),
        (cmp, lim_ex(), lim_ex()).prop_map(|(op, a, b)| Ex::bin(op, a, b)),
    ];
    leaf.prop_recursive(3, 16, 3, |inner| {
        prop_oneof![
            (prop::sample::select(vec![Op::And, Op::Or]), prop::collection::vec(inner.clone(), 1..=3)).prop_map(|(op, args)| Ex::call(op, args)),
            inner.prop_map(|a| Ex::call(Op::Not, vec![a])),
        ]
    })
}

fn slots() -> impl Strategy<Value = Vec<V>> {
    (
        prop::collection::vec((-8i32..=8).prop_map(|k| V::Num(k as f64 * 0.5)), 4),
        prop::collection::vec(((-8i32..=8), -1i8..=1).prop_map(|(k, e)| V::Lim(Limit::new(k as f64 * 0.5, e))), 4),
        prop::collection::vec(any::<bool>().prop_map(V::Bool), 2),
    )
        .prop_map(|(a, b, c)| a.into_iter().chain(b).chain(c).collect())
}

fn same(a: V, b: V) -> bool {
    match (a, b) {
        (V::Bool(x), V::Bool(y)) => x == y,
        (V::Bool(_), _) | (_, V::Bool(_)) => false,
        (x, y) => x.lim() == y.lim(),
    }
}

fn check_rewrite(e: Ex, slots: Vec<V>) -> Result<(), TestCaseError> {
    let env = Env { tensors: &[], slots };
    let Ok(before) = env.eval(&e) else { return Ok(()) };
    let s = simplify_ex(e.clone());
    let after = env.eval(&s);
    prop_assert!(after.is_ok(), "{:?} -> {:?} failed to evaluate", e, s);
    let after = after.unwrap();
    prop_assert!(same(before, after), "{:?} = {:?} but {:?} = {:?}", e, before, s, after);
    Ok(())
}

// Prover queries: slots 0..6 hold limits, slot 6 a position in `t`.

fn atom() -> impl Strategy<Value = Ex> {
    let base = prop_oneof![
        4 => (0usize..6).prop_map(Ex::Var),
        1 => (-8i32..=8).prop_map(|k| Ex::Lim(Limit::exact(k as f64 * 0.5))),
        1 => Just(Ex::Start { t: 0, lvl: 0, pos: Box::new(Ex::Var(6)) }),
        1 => Just(Ex::Stop { t: 0, lvl: 0, pos: Box::new(Ex::Var(6)) }),
    ];
    (base, -1i8..=1).prop_map(|(b, k)| if k == 0 { b } else { Ex::Nudge(Box::new(b), k) })
}

fn query() -> impl Strategy<Value = Ex> {
    prop_oneof![
        3 => atom(),
        1 => (prop::sample::select(vec![Op::Max, Op::Min]), prop::collection::vec(atom(), 2..=3)).prop_map(|(op, xs)| Ex::call(op, xs)),
    ]
}

type ProverCase = (Vec<V>, usize, Vec<(Ex, Ex)>, Vec<(Ex, Ex)>);

fn prover_case() -> impl Strategy<Value = ProverCase> {
    (
        prop::collection::vec(((-8i32..=8), -1i8..=1).prop_map(|(k, e)| V::Lim(Limit::new(k as f64 * 0.5, e))), 6),
        0usize..3,
        prop::collection::vec((atom(), atom()), 0..12),
        prop::collection::vec((query(), query()), 1..8),
    )
}

fn holds(env: &Env, a: &Ex, b: &Ex) -> bool {
    env.eval(a).unwrap().lim().cmp_total(&env.eval(b).unwrap().lim()).is_le()
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn numeric_rewrites_are_sound(e in num_ex(), s in slots()) {
        check_rewrite(e, s)?;
    }

    #[test]
    fn limit_rewrites_are_sound(e in lim_ex(), s in slots()) {
        check_rewrite(e, s)?;
    }

    #[test]
    fn boolean_rewrites_are_sound(e in bool_ex(), s in slots()) {
        check_rewrite(e, s)?;
    }

    #[test]
    fn proven_bounds_hold((mut vals, pos, candidates, queries) in prover_case()) {
        let t = kernels::intervals("t", &[(0.0, 1.0, 1.0), (1.5, 1.5, 2.0), (2.0, 3.5, 3.0)]);
        vals.push(V::Pos(Some(pos)));
        let tensors = [&t];
        let env = Env { tensors: &tensors, slots: vals };
        let facts: Vec<Fact> = candidates.into_iter().filter(|(a, b)| holds(&env, a, b)).map(|(a, b)| Fact::le(a, b)).collect();
        let prover = Prover::new(facts);
        for (a, b) in queries {
            if prover.le(&a, &b) {
                prop_assert!(holds(&env, &a, &b), "proved {:?} <= {:?} but it is false", a, b);
            }
        }
    }
}
