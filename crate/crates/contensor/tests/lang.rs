use std::collections::HashMap;

use proptest::prelude::*;
use proptest::test_runner::Config;

use contensor::kernels::{self, f_x};
use contensor::lang::{parse, validate, Rule, Signature};
use contensor::ContTensor;

fn sigs(tensors: &[&ContTensor]) -> HashMap<String, Signature> {
    tensors.iter().map(|t| (t.name.clone(), Signature::of(t))).collect()
}

fn rules_of(src: &str, tensors: &[&ContTensor]) -> Vec<Rule> {
    validate(&parse(src).unwrap(), &sigs(tensors)).into_iter().map(|d| d.rule).collect()
}

fn named(mut t: ContTensor, name: &str) -> ContTensor {
    t.name = name.into();
    t
}

#[test]
fn corpus_round_trips_through_the_printer() {
    for k in kernels::ALL {
        let p = k.program();
        let printed = p.to_string();
        let again = parse(&printed).unwrap_or_else(|e| panic!("{}: {e}\n{printed}", k.name));
        assert_eq!(again, p, "{}", k.name);
        assert_eq!(again.to_string(), printed, "{}", k.name);
    }
}

#[test]
fn corpus_is_valid() {
    for k in kernels::ALL {
        let inst = kernels::fixture(&k);
        let tensors: Vec<&ContTensor> = inst.tensors.values().collect();
        let diags = validate(&k.program(), &sigs(&tensors));
        assert!(diags.is_empty(), "{}: {diags:?}", k.name);
    }
}

#[test]
fn squared_index_is_not_invertible() {
    let a = named(f_x(), "A");
    assert!(rules_of("for i = -∞:∞\n  s += A[i*i] * d(i)\nend", &[&a]).contains(&Rule::Inv));
    assert!(rules_of("for i = -∞:∞\n  s += A[2*i] * d(i)\nend", &[&a]).contains(&Rule::Inv));
    assert!(rules_of("for i = -∞:∞\n  s += A[i+1.5] * d(i)\nend", &[&a]).is_empty());
}

#[test]
fn continuous_index_as_value_needs_a_pinpoint() {
    let a = named(f_x(), "A");
    assert!(rules_of("for i = 0.0:10.0\n  A[i] += i\nend", &[&a]).contains(&Rule::Pin));
    let mask = kernels::points("M", &[(2.0, 1.0), (3.0, 1.0)]);
    assert!(rules_of("for i = 0.0:10.0\n  if M[i]\n    s += i\n  end\nend", &[&mask]).is_empty());
}

#[test]
fn summation_over_intervals_needs_d() {
    let a = named(f_x(), "A");
    assert!(rules_of("for i = -∞:∞\n  s += A[i]\nend", &[&a]).contains(&Rule::Sum));
    assert!(rules_of("for i = -∞:∞\n  s += A[i] * d(i)\nend", &[&a]).is_empty());
    let p = kernels::points("A", &[(1.0, 2.0)]);
    assert!(rules_of("for i = -∞:∞\n  s += A[i]\nend", &[&p]).is_empty());
}

#[test]
fn unknown_tensors_and_rank_mismatches_are_reported() {
    let a = named(f_x(), "A");
    assert!(rules_of("for i = -∞:∞\n  s += B[i] * d(i)\nend", &[&a]).contains(&Rule::Arity));
    assert!(rules_of("for i = -∞:∞\n  s += A[i, i] * d(i)\nend", &[&a]).contains(&Rule::Arity));
}

#[test]
fn syntax_errors_point_at_the_problem() {
    let e = parse("for i = 0.0:1.0\n  s += x[i] *\nend").unwrap_err();
    assert_eq!(e.line, 2);
    let e = parse("s += x[i").unwrap_err();
    assert_eq!((e.line, e.col), (1, 9));
}

fn expr() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        (0u8..20).prop_map(|k| format!("{}", k)),
        (0u8..20).prop_map(|k| format!("{}.5", k)),
        prop::sample::select(vec!["i", "j", "R"]).prop_map(str::to_string),
        prop::sample::select(vec!["A[i]", "A[i+j]", "B[i, j]", "A[-i]", "d(i)"]).prop_map(str::to_string),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), prop::sample::select(vec!["+", "-", "*", "/", "<", "<=", "==", "&&", "||"]), inner.clone())
                .prop_map(|(a, op, b)| format!("({a} {op} {b})")),
            inner.clone().prop_map(|a| format!("-({a})")),
            inner.clone().prop_map(|a| format!("!({a})")),
            (inner.clone(), inner).prop_map(|(a, b)| format!("max({a}, {b})")),
        ]
    })
}

proptest! {
    #![proptest_config(Config { cases: 10_000, failure_persistence: None, ..Config::default() })]

    #[test]
    fn printing_preserves_structure(e in expr()) {
        let src = format!("for i = -∞:∞\n  for j = -∞:∞\n    s += {e}\n  end\nend\n");
        let p = parse(&src).unwrap();
        let printed = p.to_string();
        let again = parse(&printed).unwrap();
        prop_assert_eq!(&again, &p, "{}", printed);
    }
}
