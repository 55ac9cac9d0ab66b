//! Interpolating a sparse voxel grid at sample points by integrating the grid
//! over a unit cube anchored at each sample.

use std::collections::BTreeMap;

use contensor::compiler::{lower, LowerOptions};
use contensor::exec::{run, ExecOptions};
use contensor::kernels::{self, Instance};

fn main() {
    let mut cells = BTreeMap::new();
    for x in 0..3 {
        for y in 0..3 {
            for z in 0..3 {
                cells.insert((x, y, z), vec![(x + 2 * y + 4 * z) as f64]);
            }
        }
    }
    let pts = [(0.5, 0.5, 0.5), (1.0, 1.0, 1.0), (1.25, 0.5, 0.75)];
    let inst = Instance::default()
        .with(kernels::samples(&pts))
        .with(kernels::voxel_grid(&cells, 1))
        .param("T", pts.len() as f64)
        .param("C", 1.0);
    let k = kernels::TRILINEAR;
    let plan = lower(&k.program(), &inst.tensors, &inst.params, &LowerOptions::default()).unwrap();
    let (out, _) = run(&plan, &inst.tensors, ExecOptions::default()).unwrap();
    for (t, (x, y, z)) in pts.iter().enumerate() {
        let exact = x + 2.0 * y + 4.0 * z;
        println!("sample ({x}, {y}, {z}): {}  (linear interpolation of cell centers gives {exact})", out.values[t]);
    }
}
