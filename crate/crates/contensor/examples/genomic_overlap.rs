//! Interval overlap queries on a random genome, directly and through a grid
//! index, plus the pairwise join and intersection kernels on a small fixture.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use contensor::compiler::{lower, LowerOptions};
use contensor::exec::{run, ExecOptions};
use contensor::kernels::{self, Genome, Instance, Kernel};
use contensor::storage::Seg;
use contensor::ContTensor;

fn go(k: &Kernel, inst: &Instance) -> ContTensor {
    let plan = lower(&k.program(), &inst.tensors, &inst.params, &LowerOptions::default()).unwrap();
    run(&plan, &inst.tensors, ExecOptions::default()).unwrap().0
}

fn show(path: &[Seg]) -> String {
    path.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(", ")
}

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let data = kernels::random_genome(&mut rng, 20_000, 1e6, 500.0, kernels::CHROMOSOMES);
    let query = kernels::random_genome(&mut rng, 500, 1e6, 500.0, kernels::CHROMOSOMES);
    let inst = kernels::genomic_instance(&query, &data);

    let t = Instant::now();
    let naive = go(&kernels::GENOMIC_OVERLAP, &inst);
    let naive_ms = t.elapsed().as_secs_f64() * 1e3;

    let indexed = inst.clone().with(data.grid(None));
    let t = Instant::now();
    let grid = go(&kernels::GENOMIC_OVERLAP_GRID, &indexed);
    let grid_ms = t.elapsed().as_secs_f64() * 1e3;

    assert_eq!(naive.values, grid.values);
    let hits = naive.values.iter().filter(|v| v.truthy()).count();
    println!("{} of {} queries overlap; naive {naive_ms:.1} ms, grid {grid_ms:.1} ms", hits, query.len());

    let (q, d): (Genome, Genome) = kernels::genomic_fixture();
    let small = kernels::genomic_instance(&q, &d);
    let join = go(&kernels::GENOMIC_JOIN, &small);
    let pairs: Vec<usize> = (0..d.chroms[1].len()).filter(|jd| join.eval(&[1.0, 0.0, *jd as f64]).unwrap().truthy()).collect();
    println!("query {} overlaps data ids {pairs:?}", q.chroms[1][0]);
    let inter = go(&kernels::GENOMIC_INTERSECT, &small);
    for p in inter.pieces(false) {
        println!("  chr, query, data, x = {}", show(&p.path));
    }
}
