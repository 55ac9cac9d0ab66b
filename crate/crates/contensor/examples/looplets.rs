//! The looplet structure each tensor access unfurls into, and the plan the
//! compiler builds from them.

use contensor::compiler::{lower, LowerOptions};
use contensor::kernels;

fn main() {
    let k = kernels::DOT_INTEGRAL;
    let inst = kernels::fixture(&k);
    let plan = lower(&k.program(), &inst.tensors, &inst.params, &LowerOptions::default()).unwrap();
    println!("{}", plan.looplets);
    println!("{plan}");
}
