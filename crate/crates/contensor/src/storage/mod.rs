//! Fibertree storage for continuous tensors.

mod level;

pub use level::{build_level, Flags, Level, LevelKind, SparseKind};

use std::cmp::Ordering;

use thiserror::Error;

use crate::interval::Interval;
use crate::limit::Limit;
use crate::value::Value;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BuildError {
    #[error("fiber {fiber}: pieces at positions {} and {} overlap", positions.0, positions.1)]
    Overlap { fiber: usize, positions: (usize, usize) },
    #[error("fiber {fiber}: pieces at positions {} and {} are out of order", positions.0, positions.1)]
    Unsorted { fiber: usize, positions: (usize, usize) },
    #[error("fiber {fiber}: piece at position {position} is empty")]
    EmptyPiece { fiber: usize, position: usize },
    #[error("fiber {fiber}: piece at position {position} has a NaN endpoint")]
    NanEndpoint { fiber: usize, position: usize },
    #[error("fiber {fiber}: piece at position {position} is not a pinpoint")]
    NotPinpoint { fiber: usize, position: usize },
    #[error("duplicate coordinate {0}")]
    Duplicate(String),
    #[error("{0}")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("tensor {tensor} has rank {expected} but {got} coordinates were given")]
    Arity { tensor: String, expected: usize, got: usize },
    #[error("coordinate {coord} is outside dense level {level} of size {size}")]
    DenseOutOfRange { level: usize, coord: f64, size: usize },
}

/// One coordinate step along a path through the fibertree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Seg {
    Index(usize),
    Span(Interval),
}

impl std::fmt::Display for Seg {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Seg::Index(i) => write!(f, "{i}"),
            Seg::Span(iv) => write!(f, "{iv}"),
        }
    }
}

/// A piece of a tensor: the coordinate path and the constant value on it.
/// A path shorter than the rank denotes a fill region covering every deeper
/// coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct PieceEntry {
    pub path: Vec<Seg>,
    pub value: Value,
}

/// Requested layout of one rank when assembling a tensor from entries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DimSpec {
    Dense(usize),
    Pinpoint,
    Interval,
    /// Pinpoint when every entry is a point, interval otherwise.
    Auto,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContTensor {
    pub name: String,
    pub levels: Vec<Level>,
    pub values: Vec<Value>,
    pub fill: Value,
}

impl ContTensor {
    pub fn new(name: impl Into<String>, levels: Vec<Level>, values: Vec<Value>, fill: Value) -> Result<Self, BuildError> {
        let t = ContTensor { name: name.into(), levels, values, fill };
        t.check()?;
        Ok(t)
    }

    fn check(&self) -> Result<(), BuildError> {
        let mut parents = 1usize;
        for (k, lv) in self.levels.iter().enumerate() {
            if let Some(n) = lv.fiber_count() {
                if n != parents {
                    return Err(BuildError::Malformed(format!(
                        "level {k} has {n} fibers but its parent level has {parents} positions"
                    )));
                }
            }
            lv.validate()?;
            parents = lv.positions(parents);
        }
        if self.values.len() != parents {
            return Err(BuildError::Malformed(format!(
                "{} values given for {parents} leaf positions",
                self.values.len()
            )));
        }
        Ok(())
    }

    /// One-level tensor from sorted `(interval, value)` pieces.
    pub fn from_pieces(name: &str, pieces: &[(Interval, Value)], fill: Value) -> Result<Self, BuildError> {
        let ivs: Vec<Interval> = pieces.iter().map(|p| p.0).collect();
        let kind = if !ivs.is_empty() && ivs.iter().all(|iv| iv.is_pinpoint().unwrap_or(false)) {
            SparseKind::Pinpoint
        } else {
            SparseKind::Interval
        };
        let level = build_level(kind, &[ivs])?;
        ContTensor::new(name, vec![level], pieces.iter().map(|p| p.1).collect(), fill)
    }

    /// A scalar (rank zero) tensor.
    pub fn scalar(name: &str, v: Value) -> Self {
        ContTensor { name: name.into(), levels: vec![], values: vec![v], fill: v.zero_like() }
    }

    pub fn rank(&self) -> usize {
        self.levels.len()
    }

    /// True when every continuous level stores only points.
    pub fn is_pinpoint_tensor(&self) -> bool {
        self.levels.iter().filter(|l| !l.is_dense()).all(|l| l.is_pinpoint())
    }

    /// Value at a coordinate. Dense levels take integral coordinates.
    pub fn eval(&self, coords: &[f64]) -> Result<Value, EvalError> {
        if coords.len() != self.rank() {
            return Err(EvalError::Arity { tensor: self.name.clone(), expected: self.rank(), got: coords.len() });
        }
        let mut pos = 0usize;
        for (k, (lv, &x)) in self.levels.iter().zip(coords).enumerate() {
            match lv {
                Level::Dense { size } => {
                    if x.fract() != 0.0 || x < 0.0 || x >= *size as f64 {
                        return Err(EvalError::DenseOutOfRange { level: k, coord: x, size: *size });
                    }
                    pos = pos * size + x as usize;
                }
                _ => match lv.locate(pos, x) {
                    Some(p) => pos = p,
                    None => return Ok(self.fill),
                },
            }
        }
        Ok(self.values[pos])
    }

    /// Pieces of one fiber of continuous level `k`, in order. `None` marks a
    /// fill gap; gaps are only produced with `include_fill`.
    pub fn fiber_pieces(&self, k: usize, fiber: usize, include_fill: bool) -> Vec<(Interval, Option<usize>)> {
        let lv = &self.levels[k];
        let mut out = Vec::new();
        let mut cursor = Limit::NEG_INF;
        for p in lv.fiber(fiber) {
            let piece = lv.piece(p);
            if include_fill {
                let gap = Interval::new(cursor, piece.start.nudge(-1));
                if !gap.is_empty() {
                    out.push((gap, None));
                }
            }
            out.push((piece, Some(p)));
            cursor = piece.stop.nudge(1);
        }
        if include_fill {
            let tail = Interval::new(cursor, Limit::POS_INF);
            if !tail.is_empty() {
                out.push((tail, None));
            }
        }
        out
    }

    /// Every piece, fiber by fiber in sorted order.
    pub fn pieces(&self, include_fill: bool) -> Vec<PieceEntry> {
        let mut out = Vec::new();
        let mut path = Vec::new();
        self.walk(0, 0, include_fill, &mut path, &mut out);
        out
    }

    fn walk(&self, k: usize, pos: usize, fill: bool, path: &mut Vec<Seg>, out: &mut Vec<PieceEntry>) {
        if k == self.levels.len() {
            out.push(PieceEntry { path: path.clone(), value: self.values[pos] });
            return;
        }
        match &self.levels[k] {
            Level::Dense { size } => {
                for j in 0..*size {
                    path.push(Seg::Index(j));
                    self.walk(k + 1, pos * size + j, fill, path, out);
                    path.pop();
                }
            }
            _ => {
                for (iv, p) in self.fiber_pieces(k, pos, fill) {
                    path.push(Seg::Span(iv));
                    match p {
                        Some(p) => self.walk(k + 1, p, fill, path, out),
                        None => out.push(PieceEntry { path: path.clone(), value: self.fill }),
                    }
                    path.pop();
                }
            }
        }
    }

    /// Layout description usable with [`ContTensor::from_entries`].
    pub fn dims(&self) -> Vec<DimSpec> {
        self.levels
            .iter()
            .map(|l| match l {
                Level::Dense { size } => DimSpec::Dense(*size),
                l if l.is_pinpoint() => DimSpec::Pinpoint,
                _ => DimSpec::Interval,
            })
            .collect()
    }

    /// Assembles a tensor from full-rank entries. Entries may come in any
    /// order; sparse levels are validated for overlap.
    pub fn from_entries(name: &str, dims: &[DimSpec], fill: Value, entries: Vec<(Vec<Seg>, Value)>) -> Result<Self, BuildError> {
        for (path, _) in &entries {
            if path.len() != dims.len() {
                return Err(BuildError::Malformed(format!("entry of rank {} for a rank {} tensor", path.len(), dims.len())));
            }
        }
        let mut fibers: Vec<Vec<(Vec<Seg>, Value)>> = vec![entries];
        let mut levels = Vec::with_capacity(dims.len());
        for (k, dim) in dims.iter().enumerate() {
            let mut next: Vec<Vec<(Vec<Seg>, Value)>> = Vec::new();
            match dim {
                DimSpec::Dense(size) => {
                    for fib in fibers {
                        let mut buckets: Vec<Vec<(Vec<Seg>, Value)>> = vec![Vec::new(); *size];
                        for e in fib {
                            match e.0[k] {
                                Seg::Index(j) if j < *size => buckets[j].push(e),
                                s => return Err(BuildError::Malformed(format!("bad coordinate {s} for dense level {k}"))),
                            }
                        }
                        next.extend(buckets);
                    }
                    levels.push(Level::Dense { size: *size });
                }
                _ => {
                    let mut ivs_per_fiber = Vec::with_capacity(fibers.len());
                    let mut all_points = true;
                    for mut fib in fibers {
                        let mut spans = Vec::with_capacity(fib.len());
                        for e in &fib {
                            match e.0[k] {
                                Seg::Span(iv) => spans.push(iv),
                                s => return Err(BuildError::Malformed(format!("bad coordinate {s} for sparse level {k}"))),
                            }
                        }
                        fib.sort_by(|a, b| span_order(&a.0[k], &b.0[k]));
                        let mut ivs: Vec<Interval> = Vec::new();
                        for e in fib {
                            let Seg::Span(iv) = e.0[k] else { unreachable!() };
                            all_points &= iv.is_pinpoint().unwrap_or(false);
                            if ivs.last() == Some(&iv) {
                                next.last_mut().unwrap().push(e);
                            } else {
                                ivs.push(iv);
                                next.push(vec![e]);
                            }
                        }
                        ivs_per_fiber.push(ivs);
                    }
                    let kind = match dim {
                        DimSpec::Pinpoint => SparseKind::Pinpoint,
                        DimSpec::Interval => SparseKind::Interval,
                        _ if all_points && ivs_per_fiber.iter().any(|f| !f.is_empty()) => SparseKind::Pinpoint,
                        _ => SparseKind::Interval,
                    };
                    levels.push(build_level(kind, &ivs_per_fiber)?);
                }
            }
            fibers = next;
        }
        let mut values = Vec::with_capacity(fibers.len());
        for fib in fibers {
            match fib.len() {
                0 => values.push(fill),
                1 => values.push(fib[0].1),
                _ => {
                    let p: Vec<String> = fib[0].0.iter().map(|s| s.to_string()).collect();
                    return Err(BuildError::Duplicate(p.join(",")));
                }
            }
        }
        ContTensor::new(name, levels, values, fill)
    }
}

fn span_order(a: &Seg, b: &Seg) -> Ordering {
    match (a, b) {
        (Seg::Span(x), Seg::Span(y)) => x.start.cmp_total(&y.start).then(x.stop.cmp_total(&y.stop)),
        _ => Ordering::Equal,
    }
}

/// Sorts entries and merges neighbours along a trailing continuous rank when
/// they touch and carry equal values.
pub fn merge_adjacent(mut entries: Vec<(Vec<Seg>, Value)>) -> Vec<(Vec<Seg>, Value)> {
    entries.sort_by(|a, b| path_order(&a.0, &b.0));
    let mut out: Vec<(Vec<Seg>, Value)> = Vec::with_capacity(entries.len());
    for (path, v) in entries {
        if let Some((ppath, pv)) = out.last_mut() {
            let n = path.len();
            if n > 0 && ppath[..n - 1] == path[..n - 1] && pv.same(v) {
                if let (Seg::Span(a), Seg::Span(b)) = (ppath[n - 1], path[n - 1]) {
                    if a.stop.nudge(1) == b.start {
                        ppath[n - 1] = Seg::Span(Interval::new(a.start, b.stop));
                        continue;
                    }
                }
            }
        }
        out.push((path, v));
    }
    out
}

fn path_order(a: &[Seg], b: &[Seg]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        let o = match (x, y) {
            (Seg::Index(i), Seg::Index(j)) => i.cmp(j),
            (Seg::Span(_), Seg::Span(_)) => span_order(x, y),
            (Seg::Index(_), Seg::Span(_)) => Ordering::Less,
            (Seg::Span(_), Seg::Index(_)) => Ordering::Greater,
        };
        if o != Ordering::Equal {
            return o;
        }
    }
    a.len().cmp(&b.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::Kind;

    fn f_x() -> ContTensor {
        ContTensor::from_pieces(
            "f_x",
            &[(Interval::closed(1.0, 3.0), Value::Num(1.0)), (Interval::closed(4.1, 5.1), Value::Num(2.0))],
            Value::Num(0.0),
        )
        .unwrap()
    }

    #[test]
    fn fx_layout_is_homogeneous_closed() {
        let t = f_x();
        match &t.levels[0] {
            Level::Interval { flags, .. } => assert_eq!(*flags, Flags::Homogeneous { lclose: true, rclose: true }),
            l => panic!("unexpected level {l:?}"),
        }
    }

    #[test]
    fn fx_eval() {
        let t = f_x();
        for (x, v) in [(2.0, 1.0), (4.5, 2.0), (3.5, 0.0), (0.5, 0.0), (6.0, 0.0)] {
            assert_eq!(t.eval(&[x]).unwrap(), Value::Num(v));
        }
        assert!(matches!(t.eval(&[]), Err(EvalError::Arity { .. })));
    }

    #[test]
    fn fx_pieces() {
        let t = f_x();
        assert_eq!(t.pieces(false).len(), 2);
        let all = t.pieces(true);
        assert_eq!(all.len(), 5);
        assert_eq!(all[1].path, vec![Seg::Span(Interval::closed(1.0, 3.0))]);
        assert_eq!(all[2].path, vec![Seg::Span(Interval::from_kind(3.0, 4.1, Kind::Open))]);
    }

    #[test]
    fn overlap_and_order_rejected() {
        let c = Interval::closed;
        let e = build_level(SparseKind::Interval, &[vec![c(1.0, 3.0), c(2.0, 4.0)]]).unwrap_err();
        assert_eq!(e, BuildError::Overlap { fiber: 0, positions: (0, 1) });
        let e = build_level(SparseKind::Interval, &[vec![c(4.0, 5.0), c(1.0, 2.0)]]).unwrap_err();
        assert_eq!(e, BuildError::Unsorted { fiber: 0, positions: (0, 1) });
        let empty = build_level(SparseKind::Interval, &[vec![]]).unwrap();
        let t = ContTensor::new("e", vec![empty], vec![], Value::Num(0.0)).unwrap();
        let all = t.pieces(true);
        assert_eq!(all.len(), 1);
        assert_eq!(all[0].path, vec![Seg::Span(Interval::everything())]);
    }

    #[test]
    fn merges_touching_equal_pieces() {
        let ro = |a, b| Seg::Span(Interval::from_kind(a, b, Kind::RightOpen));
        let merged = merge_adjacent(vec![(vec![ro(2.0, 3.0)], Value::Num(1.0)), (vec![ro(1.0, 2.0)], Value::Num(1.0))]);
        assert_eq!(merged, vec![(vec![ro(1.0, 3.0)], Value::Num(1.0))]);
    }
}
