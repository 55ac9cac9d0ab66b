//! Comparing exact integrals with midpoint sums as the step shrinks.

use contensor::compiler::{lower, LowerOptions};
use contensor::exec::{run, ExecOptions};
use contensor::kernels;
use contensor::oracle::{riemann, Riemann};

fn main() {
    let k = kernels::DOT_INTEGRAL;
    let inst = kernels::fixture(&k);
    let program = k.program();
    let plan = lower(&program, &inst.tensors, &inst.params, &LowerOptions::default()).unwrap();
    let exact = run(&plan, &inst.tensors, ExecOptions::default()).unwrap().0.values[0].as_f64();
    println!("exact {exact}");
    for step in [0.3, 0.03, 0.003, 0.0003] {
        let approx = riemann(&program, &inst.tensors, &inst.params, Riemann { step, window: None }).unwrap().values[0].as_f64();
        println!("h = {step:<6} sum = {approx:.6}  error {:.2e}", (approx - exact).abs());
    }
}
