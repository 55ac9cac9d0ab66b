//! Writing a kernel by hand: parsing, validation messages, lowering, and a
//! comparison with the reference evaluator.

use contensor::compiler::{lower, CompileError, LowerOptions};
use contensor::exec::{run, ExecOptions, SumMode};
use contensor::kernels::{self, Instance};
use contensor::lang::parse;
use contensor::oracle;

fn main() {
    let inst = Instance::default()
        .with(kernels::intervals("price", &[(0.0, 2.0, 10.0), (3.0, 5.0, 12.0)]))
        .with(kernels::intervals("load", &[(1.0, 4.0, 3.0)]));

    let wrong = parse("for t = 0.0:6.0\n  cost += price[t] * load[t]\nend\n").unwrap();
    match lower(&wrong, &inst.tensors, &inst.params, &LowerOptions::default()) {
        Err(CompileError::Invalid(diags)) => diags.iter().for_each(|d| println!("rejected: {d}")),
        other => panic!("expected a validation error, got {other:?}"),
    }

    let program = parse("for t = 0.0:6.0\n  cost += price[t] * load[t] * d(t)\nend\n").unwrap();
    let plan = lower(&program, &inst.tensors, &inst.params, &LowerOptions::default()).unwrap();
    let (out, stats) = run(&plan, &inst.tensors, ExecOptions::default()).unwrap();
    let want = oracle::eval(&program, &inst.tensors, &inst.params, SumMode::Strict).unwrap();
    println!("{plan}");
    println!("cost = {} (reference {}), {} multiplies", out.values[0], want.values[0], stats.multiplies);
    kernels::compare(&out, &want, 1e-12).unwrap();
}
