//! Sum over shared points and integral over shared intervals, with the
//! executor's work counters.

use contensor::compiler::{lower, LowerOptions};
use contensor::exec::{run, ExecOptions};
use contensor::kernels;
use contensor::storage::Seg;
use contensor::ContTensor;

fn show(path: &[Seg]) -> String {
    path.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(", ")
}

fn listing(t: &ContTensor) -> String {
    t.pieces(false).iter().map(|p| format!("{}={}", show(&p.path), p.value)).collect::<Vec<_>>().join(" ")
}

fn main() {
    for k in [kernels::DOT_SUM, kernels::DOT_INTEGRAL] {
        let inst = kernels::fixture(&k);
        let plan = lower(&k.program(), &inst.tensors, &inst.params, &LowerOptions::default()).unwrap();
        let (out, stats) = run(&plan, &inst.tensors, ExecOptions::default()).unwrap();
        println!("{}:\n{}", k.name, k.source.trim_end());
        println!("  x = {}", listing(&inst.tensors["x"]));
        println!("  y = {}", listing(&inst.tensors["y"]));
        println!("  result {}  ({} multiplies, {} segments)\n", out.values[0], stats.multiplies, stats.segments_visited);
    }
}
