//! Box search, radius search and radius counting over a small point cloud.

use contensor::compiler::{lower, LowerOptions};
use contensor::exec::{run, ExecOptions};
use contensor::kernels::{self, Instance, Kernel};
use contensor::ContTensor;

fn go(k: &Kernel, inst: &Instance) -> ContTensor {
    let plan = lower(&k.program(), &inst.tensors, &inst.params, &LowerOptions::default()).unwrap();
    run(&plan, &inst.tensors, ExecOptions::default()).unwrap().0
}

fn main() {
    let pts = [(1.0, 3.0), (2.2, 3.9), (2.5, 5.0), (4.0, 4.0), (3.5, 5.5)];
    let cloud = kernels::point_cloud(&pts);

    let boxed = Instance::default().with(cloud.clone()).with(kernels::boxes(&[(2.0, 4.0, 3.5, 5.0)])).param("N", 5.0);
    let hits = go(&kernels::BOX_SEARCH, &boxed);
    println!("inside [2,4]x[3.5,5]: {:?}", hits.values.iter().map(|v| v.truthy()).collect::<Vec<_>>());

    for r in [0.5, 1.0, 1.7, 3.0] {
        let inst = Instance::default().with(cloud.clone()).param("N", 5.0).param("Ox", 2.2).param("Oy", 3.9).param("R", r);
        let near = go(&kernels::RADIUS_SEARCH, &inst);
        let ids: Vec<usize> = near.values.iter().enumerate().filter(|(_, v)| v.truthy()).map(|(i, _)| i).collect();
        println!("within {r} of (2.2, 3.9): {ids:?}");
    }

    let count = go(&kernels::RADIUS_COUNT, &kernels::radius_count_fixture());
    println!("count within 1.7: {}", count.values[0]);
}
