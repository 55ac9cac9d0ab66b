//! How assumed facts and bound analysis strip the emptiness guard from a
//! single-interval dot product.

use contensor::compiler::{lower, Fact, LowerOptions};
use contensor::exec::{run, ExecOptions};
use contensor::kernels::{self, Instance};
use contensor::lang::parse;

fn main() {
    let src = "for i = -∞:∞\n  s += a[i] * b[i] * d(i)\nend\n";
    let program = parse(src).unwrap();
    let inst = Instance::default().with(kernels::intervals("a", &[(1.0, 3.0, 2.0)])).with(kernels::intervals("b", &[(2.0, 5.0, 3.0)]));
    let facts = ["a.start <= b.stop", "b.start <= a.stop"];
    let assume: Vec<Fact> = facts.iter().map(|f| Fact::parse(f, &program.inputs()).unwrap()).collect();

    for (label, opts) in [
        ("default", LowerOptions::default()),
        ("bounds only", LowerOptions { opt_bounds: true, ..Default::default() }),
        ("bounds with facts", LowerOptions { opt_bounds: true, assume: assume.clone(), ..Default::default() }),
    ] {
        let plan = lower(&program, &inst.tensors, &inst.params, &opts).unwrap();
        let (out, _) = run(&plan, &inst.tensors, ExecOptions::default()).unwrap();
        println!("== {label}: {} guards, result {}\n{plan}", plan.count_guards(), out.values[0]);
    }
}
