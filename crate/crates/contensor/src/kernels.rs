//! The shipped kernels, the fixtures they are demonstrated on, and random
//! instances for differential testing.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::compiler::{Params, Tensors};
use crate::interval::{Interval, Kind};
use crate::lang::{parse, Program};
use crate::storage::{ContTensor, DimSpec, Level, Seg};
use crate::value::Value;

#[derive(Debug, Clone, Copy)]
pub struct Kernel {
    pub name: &'static str,
    pub source: &'static str,
    /// Whether the reduction is an integral, compared with a relative tolerance.
    pub integral: bool,
}

pub const DOT_SUM: Kernel = Kernel { name: "dot_sum", source: include_str!("../kernels/dot_sum.ct"), integral: false };
pub const DOT_INTEGRAL: Kernel =
    Kernel { name: "dot_integral", source: include_str!("../kernels/dot_integral.ct"), integral: true };
pub const MASKED_CONV: Kernel =
    Kernel { name: "masked_conv", source: include_str!("../kernels/masked_conv.ct"), integral: true };
pub const BOX_SEARCH: Kernel = Kernel { name: "box_search", source: include_str!("../kernels/box_search.ct"), integral: false };
pub const RADIUS_SEARCH: Kernel =
    Kernel { name: "radius_search", source: include_str!("../kernels/radius_search.ct"), integral: false };
pub const RADIUS_COUNT: Kernel =
    Kernel { name: "radius_count", source: include_str!("../kernels/radius_count.ct"), integral: false };
pub const TRILINEAR: Kernel = Kernel { name: "trilinear", source: include_str!("../kernels/trilinear.ct"), integral: true };
pub const GENOMIC_OVERLAP: Kernel =
    Kernel { name: "genomic_overlap", source: include_str!("../kernels/genomic_overlap.ct"), integral: false };
pub const GENOMIC_OVERLAP_GRID: Kernel =
    Kernel { name: "genomic_overlap_grid", source: include_str!("../kernels/genomic_overlap_grid.ct"), integral: false };
pub const GENOMIC_INTERSECT: Kernel =
    Kernel { name: "genomic_intersect", source: include_str!("../kernels/genomic_intersect.ct"), integral: false };
pub const GENOMIC_JOIN: Kernel = Kernel { name: "genomic_join", source: include_str!("../kernels/genomic_join.ct"), integral: false };

/// The core corpus.
pub const CORE: [Kernel; 8] =
    [DOT_SUM, DOT_INTEGRAL, MASKED_CONV, BOX_SEARCH, RADIUS_SEARCH, RADIUS_COUNT, TRILINEAR, GENOMIC_OVERLAP];

/// Every shipped kernel.
pub const ALL: [Kernel; 11] = [
    DOT_SUM,
    DOT_INTEGRAL,
    MASKED_CONV,
    BOX_SEARCH,
    RADIUS_SEARCH,
    RADIUS_COUNT,
    TRILINEAR,
    GENOMIC_OVERLAP,
    GENOMIC_OVERLAP_GRID,
    GENOMIC_INTERSECT,
    GENOMIC_JOIN,
];

pub const CHROMOSOMES: usize = 23;

impl Kernel {
    pub fn program(&self) -> Program {
        parse(self.source).unwrap_or_else(|e| panic!("{}: {e}", self.name))
    }

    pub fn by_name(name: &str) -> Option<Kernel> {
        let key = name.replace('-', "_");
        ALL.iter().find(|k| k.name == key).copied()
    }
}

/// Tensors and parameters for one run of a kernel.
#[derive(Debug, Clone, Default)]
pub struct Instance {
    pub tensors: Tensors,
    pub params: Params,
}

impl Instance {
    pub fn with(mut self, t: ContTensor) -> Self {
        self.tensors.insert(t.name.clone(), t);
        self
    }

    pub fn param(mut self, k: &str, v: f64) -> Self {
        self.params.insert(k.to_string(), v);
        self
    }
}

fn num(x: f64) -> Value {
    Value::Num(x)
}

/// A one-dimensional tensor of points.
pub fn points(name: &str, pts: &[(f64, f64)]) -> ContTensor {
    let pieces: Vec<(Interval, Value)> = pts.iter().map(|(x, v)| (Interval::point(*x), num(*v))).collect();
    ContTensor::from_pieces(name, &pieces, num(0.0)).expect("sorted disjoint points")
}

/// A one-dimensional tensor of closed intervals.
pub fn intervals(name: &str, pieces: &[(f64, f64, f64)]) -> ContTensor {
    let pieces: Vec<(Interval, Value)> = pieces.iter().map(|(a, b, v)| (Interval::closed(*a, *b), num(*v))).collect();
    ContTensor::from_pieces(name, &pieces, num(0.0)).expect("sorted disjoint intervals")
}

/// The function that is 1 on [1, 3], 2 on [4.1, 5.1] and 0 elsewhere.
pub fn f_x() -> ContTensor {
    intervals("x", &[(1.0, 3.0, 1.0), (4.1, 5.1, 2.0)])
}

/// Pinpoint vectors whose products meet at 3.0 and 5.1; the sum is 44.
pub fn dot_sum_fixture() -> Instance {
    Instance::default()
        .with(points("x", &[(1.0, 1.0), (3.0, 2.0), (4.1, 4.0), (5.1, 8.0)]))
        .with(points("y", &[(2.0, 3.0), (3.0, 2.0), (5.1, 5.0), (7.5, 1.0)]))
}

/// `f_x` against 1 on [2, 6]; the integral is 3.
pub fn dot_integral_fixture() -> Instance {
    Instance::default().with(f_x()).with(intervals("y", &[(2.0, 6.0, 1.0)]))
}

/// Builds a tensor from full-rank entries.
pub fn tensor(name: &str, dims: &[DimSpec], fill: Value, entries: Vec<(Vec<Seg>, Value)>) -> ContTensor {
    ContTensor::from_entries(name, dims, fill, entries).expect("valid entries")
}

fn point_seg(x: f64) -> Seg {
    Seg::Span(Interval::point(x))
}

/// `Points[x, y, id]`: true at each point, one id per point.
pub fn point_cloud(pts: &[(f64, f64)]) -> ContTensor {
    let entries = pts.iter().enumerate().map(|(id, (x, y))| (vec![point_seg(*x), point_seg(*y), point_seg(id as f64)], Value::Bool(true))).collect();
    tensor("Points", &[DimSpec::Pinpoint, DimSpec::Pinpoint, DimSpec::Pinpoint], Value::Bool(false), entries)
}

/// `Box[x, y]`: true on the union of axis-aligned boxes `(x0, x1, y0, y1)`
/// whose x ranges are disjoint or equal.
pub fn boxes(bs: &[(f64, f64, f64, f64)]) -> ContTensor {
    let entries = bs
        .iter()
        .map(|(x0, x1, y0, y1)| (vec![Seg::Span(Interval::closed(*x0, *x1)), Seg::Span(Interval::closed(*y0, *y1))], Value::Bool(true)))
        .collect();
    tensor("Box", &[DimSpec::Interval, DimSpec::Interval], Value::Bool(false), entries)
}

/// Three points within 1.7 of (2.2, 3.9) and two outside.
pub fn radius_count_fixture() -> Instance {
    let pts = [(1.0, 3.0), (2.2, 3.9), (2.5, 5.0), (4.0, 4.0), (3.5, 5.5)];
    Instance::default().with(count_grid(&pts))
}

/// `A[x, y]`: 1 at each point.
pub fn count_grid(pts: &[(f64, f64)]) -> ContTensor {
    let entries = pts.iter().map(|(x, y)| (vec![point_seg(*x), point_seg(*y)], num(1.0))).collect();
    tensor("A", &[DimSpec::Pinpoint, DimSpec::Pinpoint], num(0.0), entries)
}

/// Brute-force count of the points within `r` of `(ox, oy)`.
pub fn within(pts: &[(f64, f64)], ox: f64, oy: f64, r: f64) -> Vec<bool> {
    pts.iter()
        .map(|(x, y)| {
            let (dx, dy) = (x - ox, y - oy);
            dx >= -r && dx <= r && dy >= -r && dy <= r && dx * dx + dy * dy <= r * r
        })
        .collect()
}

/// A regular level of unit cells `[x, x+1)` with one fiber per entry of `fibers`.
pub fn unit_cells(fibers: &[Vec<i64>]) -> Level {
    let mut ptr = vec![0];
    let mut xs = Vec::new();
    for f in fibers {
        xs.extend_from_slice(f);
        ptr.push(xs.len());
    }
    Level::Regular { ptr, stride: 1.0, len: 1.0, rclose: false, xs }
}

/// `Grid[x, y, z, c]` over unit voxels; `cells` maps a voxel to its `channels` features.
pub fn voxel_grid(cells: &BTreeMap<(i64, i64, i64), Vec<f64>>, channels: usize) -> ContTensor {
    let mut xs: BTreeMap<i64, BTreeMap<i64, Vec<i64>>> = BTreeMap::new();
    for (x, y, z) in cells.keys() {
        xs.entry(*x).or_default().entry(*y).or_default().push(*z);
    }
    let lx = unit_cells(&[xs.keys().copied().collect()]);
    let ly = unit_cells(&xs.values().map(|ys| ys.keys().copied().collect()).collect::<Vec<_>>());
    let lz = unit_cells(&xs.values().flat_map(|ys| ys.values().cloned()).collect::<Vec<_>>());
    let values = cells.values().flat_map(|v| v.iter().map(|x| num(*x))).collect();
    let levels = vec![lx, ly, lz, Level::Dense { size: channels }];
    ContTensor::new("Grid", levels, values, num(0.0)).expect("valid voxel grid")
}

/// `Sample[t, x, y, z]`: the sample points.
pub fn samples(pts: &[(f64, f64, f64)]) -> ContTensor {
    let entries = pts
        .iter()
        .enumerate()
        .map(|(t, (x, y, z))| (vec![Seg::Index(t), point_seg(*x), point_seg(*y), point_seg(*z)], Value::Bool(true)))
        .collect();
    let dims = [DimSpec::Dense(pts.len()), DimSpec::Pinpoint, DimSpec::Pinpoint, DimSpec::Pinpoint];
    tensor("Sample", &dims, Value::Bool(false), entries)
}

/// Trilinear instance over a `side`³ block of voxels all holding `value`.
pub fn trilinear_constant(pts: &[(f64, f64, f64)], side: i64, channels: usize, value: f64) -> Instance {
    let mut cells = BTreeMap::new();
    for x in 0..side {
        for y in 0..side {
            for z in 0..side {
                cells.insert((x, y, z), vec![value; channels]);
            }
        }
    }
    Instance::default()
        .with(samples(pts))
        .with(voxel_grid(&cells, channels))
        .param("T", pts.len() as f64)
        .param("C", channels as f64)
}

/// Interval sets keyed by chromosome, one list per chromosome.
#[derive(Debug, Clone, Default)]
pub struct Genome {
    pub chroms: Vec<Vec<Interval>>,
}

impl Genome {
    pub fn empty() -> Genome {
        Genome { chroms: vec![Vec::new(); CHROMOSOMES] }
    }

    pub fn len(&self) -> usize {
        self.chroms.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Size of the padded id rank.
    pub fn width(&self) -> usize {
        self.chroms.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// `name[chr, id, x]`, ids counted within each chromosome and padded to
    /// the largest chromosome.
    pub fn tensor(&self, name: &str, width: usize) -> ContTensor {
        let mut entries = Vec::with_capacity(self.len());
        for (c, ivs) in self.chroms.iter().enumerate() {
            for (id, iv) in ivs.iter().enumerate() {
                entries.push((vec![Seg::Index(c), Seg::Index(id), Seg::Span(*iv)], Value::Bool(true)));
            }
        }
        let dims = [DimSpec::Dense(CHROMOSOMES), DimSpec::Dense(width.max(1)), DimSpec::Interval];
        tensor(name, &dims, Value::Bool(false), entries)
    }

    /// `Grid[chr, x, jd]`: for each of `cells` (default ⌈√M⌉) uniform cells
    /// spanning a chromosome's data, the ids of the data intervals that touch it.
    pub fn grid(&self, cells: Option<usize>) -> ContTensor {
        let mut entries = Vec::new();
        for (c, ivs) in self.chroms.iter().enumerate() {
            if ivs.is_empty() {
                continue;
            }
            let lo = ivs.iter().map(|iv| iv.start.val).fold(f64::INFINITY, f64::min);
            let hi = ivs.iter().map(|iv| iv.stop.val).fold(f64::NEG_INFINITY, f64::max);
            let cells = cells.unwrap_or_else(|| (ivs.len() as f64).sqrt().ceil() as usize).max(1);
            let width = (hi - lo) / cells as f64;
            let edge = |k: usize| if k == cells { hi } else { lo + width * k as f64 };
            for k in 0..cells {
                let kind = if k + 1 == cells { Kind::Closed } else { Kind::RightOpen };
                let cell = Interval::from_kind(edge(k), edge(k + 1), kind);
                if cell.is_empty() {
                    continue;
                }
                for (jd, iv) in ivs.iter().enumerate() {
                    if iv.overlaps(&cell) {
                        entries.push((vec![Seg::Index(c), Seg::Span(cell), point_seg(jd as f64)], Value::Bool(true)));
                    }
                }
            }
        }
        let dims = [DimSpec::Dense(CHROMOSOMES), DimSpec::Interval, DimSpec::Pinpoint];
        tensor("Grid", &dims, Value::Bool(false), entries)
    }

    /// Brute-force overlap flags per chromosome and query.
    pub fn overlaps(query: &Genome, data: &Genome) -> Vec<Vec<bool>> {
        query
            .chroms
            .iter()
            .zip(&data.chroms)
            .map(|(q, d)| q.iter().map(|a| d.iter().any(|b| a.overlaps(b))).collect())
            .collect()
    }
}

/// Tensors for the genomic kernels over `query` and `data`.
pub fn genomic_instance(query: &Genome, data: &Genome) -> Instance {
    let (n, m) = (query.width().max(1), data.width().max(1));
    Instance::default()
        .with(query.tensor("Query", n))
        .with(data.tensor("Data", m))
        .param("N", n as f64)
        .param("M", m as f64)
}

/// One query [4, 7] on chromosome 1 against six data intervals split by the
/// cells [0, 4) and [4, 8]; exactly data ids 3 and 4 overlap it.
pub fn genomic_fixture() -> (Genome, Genome) {
    let mut query = Genome::empty();
    query.chroms[1].push(Interval::closed(4.0, 7.0));
    let mut data = Genome::empty();
    data.chroms[1] = [(0.0, 1.0), (1.5, 2.5), (2.6, 3.5), (3.6, 4.5), (6.0, 7.5), (7.6, 8.0)]
        .iter()
        .map(|(a, b)| Interval::closed(*a, *b))
        .collect();
    (query, data)
}

/// Random genome of `n` intervals with lengths in `[1, max_len]` over `[0, span]`.
pub fn random_genome(rng: &mut impl Rng, n: usize, span: f64, max_len: f64, chroms: usize) -> Genome {
    let mut g = Genome::empty();
    for _ in 0..n {
        let c = rng.gen_range(0..chroms.min(CHROMOSOMES));
        let a = rng.gen_range(0.0..span);
        let len = rng.gen_range(1.0..=max_len.max(1.0));
        g.chroms[c].push(Interval::closed(a, a + len));
    }
    for ivs in &mut g.chroms {
        ivs.sort_by(|x, y| x.start.cmp_total(&y.start));
    }
    g
}

const GRID: f64 = 0.05;

/// A point on the 0.05 grid within `[lo, hi]`.
pub fn grid_point(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    let k = rng.gen_range((lo / GRID).round() as i64..=(hi / GRID).round() as i64);
    k as f64 * GRID
}

/// Up to `max` distinct sorted grid points in `[lo, hi]`.
pub fn grid_points(rng: &mut impl Rng, max: usize, lo: f64, hi: f64) -> Vec<f64> {
    let n = rng.gen_range(0..=max);
    let mut xs: Vec<i64> = (0..n).map(|_| (grid_point(rng, lo, hi) / GRID).round() as i64).collect();
    xs.sort_unstable();
    xs.dedup();
    xs.into_iter().map(|k| k as f64 * GRID).collect()
}

/// Up to `max` disjoint sorted intervals with grid endpoints in `[lo, hi]`
/// and random inclusiveness; some may be single points.
pub fn grid_intervals(rng: &mut impl Rng, max: usize, lo: f64, hi: f64) -> Vec<Interval> {
    let mut ends = grid_points(rng, 2 * max, lo, hi);
    if ends.len() % 2 == 1 {
        ends.pop();
    }
    let mut out: Vec<Interval> = Vec::new();
    for pair in ends.chunks(2) {
        let (a, b) = (pair[0], pair[1]);
        let iv = if rng.gen_bool(0.1) {
            Interval::point(a)
        } else {
            let kind = *[Kind::Closed, Kind::RightOpen, Kind::LeftOpen, Kind::Open].choose(rng).unwrap();
            Interval::from_kind(a, b, kind)
        };
        if let Some(prev) = out.last() {
            if prev.overlaps(&iv) {
                continue;
            }
        }
        out.push(iv);
    }
    out
}

fn small_value(rng: &mut impl Rng) -> f64 {
    rng.gen_range(1..=9) as f64 * 0.25
}

fn random_pieces(rng: &mut impl Rng, name: &str, lo: f64, hi: f64, pinpoint: bool) -> ContTensor {
    let pieces: Vec<(Interval, Value)> = if pinpoint {
        grid_points(rng, 8, lo, hi).into_iter().map(|x| (Interval::point(x), num(small_value(rng)))).collect()
    } else {
        grid_intervals(rng, 8, lo, hi).into_iter().map(|iv| (iv, num(small_value(rng)))).collect()
    };
    let dim = if pinpoint { DimSpec::Pinpoint } else { DimSpec::Interval };
    let entries = pieces.into_iter().map(|(iv, v)| (vec![Seg::Span(iv)], v)).collect();
    tensor(name, &[dim], num(0.0), entries)
}

fn random_cloud(rng: &mut impl Rng, lo: f64, hi: f64) -> Vec<(f64, f64)> {
    let xs = grid_points(rng, 6, lo, hi);
    let mut pts = Vec::new();
    for x in xs {
        for y in grid_points(rng, 3, lo, hi) {
            pts.push((x, y));
        }
    }
    pts.truncate(8);
    pts
}

/// A small random instance of `kernel` (at most 8 pieces per level, grid endpoints).
pub fn random_instance(kernel: &Kernel, rng: &mut impl Rng) -> Instance {
    match kernel.name {
        "dot_sum" => Instance::default().with(random_pieces(rng, "x", -1.0, 10.0, true)).with(random_pieces(rng, "y", -1.0, 10.0, true)),
        "dot_integral" => {
            Instance::default().with(random_pieces(rng, "x", -1.0, 10.0, false)).with(random_pieces(rng, "y", -1.0, 10.0, false))
        }
        "masked_conv" => {
            let mask: Vec<(Interval, Value)> = grid_points(rng, 8, -3.0, 3.0).into_iter().map(|x| (Interval::point(x), Value::Bool(true))).collect();
            Instance::default()
                .with(tensor("Mask", &[DimSpec::Pinpoint], Value::Bool(false), mask.into_iter().map(|(iv, v)| (vec![Seg::Span(iv)], v)).collect()))
                .with(random_pieces(rng, "A", -5.0, 5.0, false))
                .with(random_pieces(rng, "B", -2.0, 2.0, false))
        }
        "box_search" => {
            let pts = random_cloud(rng, 0.0, 5.0);
            let mut bs = Vec::new();
            let xs = grid_intervals(rng, 3, 0.0, 5.0);
            for x in xs {
                for y in grid_intervals(rng, 3, 0.0, 5.0) {
                    bs.push((x, y));
                }
            }
            let entries = bs.into_iter().map(|(x, y)| (vec![Seg::Span(x), Seg::Span(y)], Value::Bool(true))).collect();
            Instance::default()
                .with(tensor("Box", &[DimSpec::Interval, DimSpec::Interval], Value::Bool(false), entries))
                .with(point_cloud(&pts))
                .param("N", pts.len() as f64)
        }
        "radius_search" => {
            let pts = random_cloud(rng, 0.0, 5.0);
            Instance::default()
                .with(point_cloud(&pts))
                .param("N", pts.len() as f64)
                .param("Ox", grid_point(rng, 0.0, 5.0))
                .param("Oy", grid_point(rng, 0.0, 5.0))
                .param("R", grid_point(rng, 0.5, 2.5))
        }
        "radius_count" => Instance::default().with(count_grid(&random_cloud(rng, 0.0, 5.0))),
        "trilinear" => {
            let t = rng.gen_range(1..=3);
            let channels = rng.gen_range(1..=2);
            let pts: Vec<(f64, f64, f64)> =
                (0..t).map(|_| (grid_point(rng, -0.5, 3.0), grid_point(rng, -0.5, 3.0), grid_point(rng, -0.5, 3.0))).collect();
            let mut cells = BTreeMap::new();
            for _ in 0..rng.gen_range(0..=8) {
                let key = (rng.gen_range(-1..4), rng.gen_range(-1..4), rng.gen_range(-1..4));
                cells.insert(key, (0..channels).map(|_| small_value(rng)).collect());
            }
            Instance::default()
                .with(samples(&pts))
                .with(voxel_grid(&cells, channels))
                .param("T", t as f64)
                .param("C", channels as f64)
        }
        "genomic_overlap" | "genomic_overlap_grid" | "genomic_intersect" | "genomic_join" => {
            let chroms = rng.gen_range(1..=3);
            let mut gen = |n: usize| {
                let mut g = Genome::empty();
                for _ in 0..rng.gen_range(0..=n) {
                    let c = rng.gen_range(0..chroms);
                    let ivs = grid_intervals(rng, 1, 0.0, 10.0);
                    g.chroms[c].extend(ivs);
                }
                g
            };
            let query = gen(8);
            let data = gen(8);
            let inst = genomic_instance(&query, &data);
            if kernel.name == "genomic_overlap_grid" {
                inst.with(data.grid(None))
            } else {
                inst
            }
        }
        other => panic!("no generator for {other}"),
    }
}

/// Interleaves `flags` with padding to the `[chr, id]` layout of a genomic output.
pub fn flags_by_chromosome(flags: &[Vec<bool>], width: usize) -> Vec<Value> {
    let mut out = vec![Value::Bool(false); CHROMOSOMES * width];
    for (c, f) in flags.iter().enumerate() {
        for (id, b) in f.iter().enumerate() {
            out[c * width + id] = Value::Bool(*b);
        }
    }
    out
}

/// Checks that two tensors hold the same pieces, values within `rel`
/// relative error (exact when `rel` is zero). Returns the first difference.
pub fn compare(a: &ContTensor, b: &ContTensor, rel: f64) -> Result<(), String> {
    let (pa, pb) = (a.pieces(false), b.pieces(false));
    let close = |x: Value, y: Value| {
        if rel == 0.0 {
            return x.same(y);
        }
        let (x, y) = (x.as_f64(), y.as_f64());
        x == y || (x - y).abs() <= rel * x.abs().max(y.abs())
    };
    let show = |p: &[Seg]| p.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",");
    let significant = |p: &crate::storage::PieceEntry, fill: Value| !close(p.value, fill);
    let pa: Vec<_> = pa.into_iter().filter(|p| significant(p, a.fill)).collect();
    let pb: Vec<_> = pb.into_iter().filter(|p| significant(p, b.fill)).collect();
    for (x, y) in pa.iter().zip(&pb) {
        if x.path != y.path || !close(x.value, y.value) {
            return Err(format!("[{}] = {} vs [{}] = {}", show(&x.path), x.value, show(&y.path), y.value));
        }
    }
    if pa.len() != pb.len() {
        let extra = if pa.len() > pb.len() { &pa[pb.len()] } else { &pb[pa.len()] };
        return Err(format!("{} vs {} pieces; first unmatched [{}] = {}", pa.len(), pb.len(), show(&extra.path), extra.value));
    }
    Ok(())
}

/// The demonstration instance of a shipped kernel.
pub fn fixture(kernel: &Kernel) -> Instance {
    match kernel.name {
        "dot_sum" => dot_sum_fixture(),
        "dot_integral" => dot_integral_fixture(),
        "masked_conv" => {
            let mask = [2.2, 3.0, 4.6].iter().map(|x| (vec![point_seg(*x)], Value::Bool(true))).collect();
            let mut a = f_x();
            a.name = "A".into();
            Instance::default()
                .with(tensor("Mask", &[DimSpec::Pinpoint], Value::Bool(false), mask))
                .with(a)
                .with(intervals("B", &[(-0.5, 0.5, 1.0)]))
        }
        "box_search" | "radius_search" => {
            let pts = [(1.0, 3.0), (2.2, 3.9), (2.5, 5.0), (4.0, 4.0), (3.5, 5.5)];
            let inst = Instance::default().with(point_cloud(&pts)).param("N", pts.len() as f64);
            if kernel.name == "box_search" {
                inst.with(boxes(&[(2.0, 4.0, 3.5, 5.0)]))
            } else {
                inst.param("Ox", 2.2).param("Oy", 3.9).param("R", 1.7)
            }
        }
        "radius_count" => radius_count_fixture(),
        "trilinear" => trilinear_constant(&[(0.5, 0.5, 0.5), (1.25, 0.75, 2.0), (2.9, 1.1, 0.3)], 4, 2, 1.0),
        "genomic_overlap" | "genomic_overlap_grid" | "genomic_intersect" | "genomic_join" => {
            let (query, data) = genomic_fixture();
            let inst = genomic_instance(&query, &data);
            if kernel.name == "genomic_overlap_grid" {
                inst.with(data.grid(Some(2)))
            } else {
                inst
            }
        }
        other => panic!("no fixture for {other}"),
    }
}
