use contensor::compiler::{lower, LowerOptions};
use contensor::exec::{run, ExecOptions};
use contensor::kernels::{self, Kernel};
use contensor::{ContTensor, Value};

fn result(k: &Kernel) -> ContTensor {
    let inst = kernels::fixture(k);
    let plan = lower(&k.program(), &inst.tensors, &inst.params, &LowerOptions::default()).unwrap();
    run(&plan, &inst.tensors, ExecOptions::default()).unwrap().0
}

fn flags(t: &ContTensor) -> Vec<bool> {
    t.values.iter().map(|v| v.truthy()).collect()
}

#[test]
fn dot_sum_meets_at_two_points() {
    assert!(result(&kernels::DOT_SUM).values[0].same(Value::Num(44.0)));
}

#[test]
fn dot_integral_of_f_x() {
    assert!(result(&kernels::DOT_INTEGRAL).values[0].same(Value::Num(3.0)));
}

#[test]
fn masked_conv_averages_over_the_window() {
    let z = result(&kernels::MASKED_CONV);
    for (x, want) in [(2.2, 1.0), (3.0, 0.5), (4.6, 2.0), (1.0, 0.0)] {
        let got = z.eval(&[x]).unwrap().as_f64();
        assert!((got - want).abs() < 1e-12, "Z[{x}] = {got}");
    }
}

#[test]
fn box_search_finds_the_enclosed_points() {
    assert_eq!(flags(&result(&kernels::BOX_SEARCH)), [false, true, true, true, false]);
}

#[test]
fn radius_search_matches_brute_force() {
    let pts = [(1.0, 3.0), (2.2, 3.9), (2.5, 5.0), (4.0, 4.0), (3.5, 5.5)];
    assert_eq!(flags(&result(&kernels::RADIUS_SEARCH)), kernels::within(&pts, 2.2, 3.9, 1.7));
}

#[test]
fn radius_count_is_three() {
    assert!(result(&kernels::RADIUS_COUNT).values[0].same(Value::Num(3.0)));
}

#[test]
fn trilinear_of_a_constant_grid_is_constant() {
    let out = result(&kernels::TRILINEAR);
    assert_eq!(out.values.len(), 6);
    for v in &out.values {
        assert!((v.as_f64() - 1.0).abs() < 1e-12, "{v}");
    }
}

#[test]
fn genomic_kernels_agree_on_the_fixture() {
    let overlap = result(&kernels::GENOMIC_OVERLAP);
    let grid = result(&kernels::GENOMIC_OVERLAP_GRID);
    assert_eq!(overlap.values, grid.values);
    assert!(overlap.eval(&[1.0, 0.0]).unwrap().truthy());
    let join = result(&kernels::GENOMIC_JOIN);
    let ids: Vec<usize> = (0..6).filter(|jd| join.eval(&[1.0, 0.0, *jd as f64]).unwrap().truthy()).collect();
    assert_eq!(ids, [3, 4]);
    let inter = result(&kernels::GENOMIC_INTERSECT);
    assert!(inter.eval(&[1.0, 0.0, 3.0, 4.25]).unwrap().truthy());
    assert!(!inter.eval(&[1.0, 0.0, 3.0, 4.75]).unwrap().truthy());
    assert!(inter.eval(&[1.0, 0.0, 4.0, 7.0]).unwrap().truthy());
    assert!(!inter.eval(&[1.0, 0.0, 4.0, 7.25]).unwrap().truthy());
}

#[test]
fn names_accept_dashes() {
    assert_eq!(Kernel::by_name("genomic-overlap").unwrap().name, "genomic_overlap");
    assert!(Kernel::by_name("nope").is_none());
}
