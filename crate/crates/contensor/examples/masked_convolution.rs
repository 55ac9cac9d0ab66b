//! Convolving a step function with a box kernel, only at masked points.

use contensor::compiler::{lower, LowerOptions};
use contensor::exec::{run, ExecOptions};
use contensor::kernels;
use contensor::storage::Seg;

fn show(path: &[Seg]) -> String {
    path.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(", ")
}

fn main() {
    let k = kernels::MASKED_CONV;
    let inst = kernels::fixture(&k);
    let plan = lower(&k.program(), &inst.tensors, &inst.params, &LowerOptions::default()).unwrap();
    let (z, stats) = run(&plan, &inst.tensors, ExecOptions::default()).unwrap();
    for p in z.pieces(false) {
        println!("Z at {} = {}", show(&p.path), p.value);
    }
    println!("{} multiplies", stats.multiplies);
}
