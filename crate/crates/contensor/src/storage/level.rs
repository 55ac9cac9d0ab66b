use std::ops::Range;

use crate::interval::{Interval, Kind};
use crate::limit::Limit;

use super::BuildError;

/// Inclusiveness flags of an interval level.
#[derive(Debug, Clone, PartialEq)]
pub enum Flags {
    /// One `(lclose, rclose)` pair shared by every entry.
    Homogeneous { lclose: bool, rclose: bool },
    /// Per-entry flags.
    PerEntry { lclose: Vec<bool>, rclose: Vec<bool> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Level {
    /// Discrete rank with coordinates `0..size`.
    Dense { size: usize },
    /// Zero-width pieces at sorted coordinates.
    Pinpoint { ptr: Vec<usize>, crd: Vec<f64> },
    Interval { ptr: Vec<usize>, left: Vec<f64>, right: Vec<f64>, flags: Flags },
    /// Pieces `[stride·x, stride·x + len)` for each `x` in `xs`.
    Regular { ptr: Vec<usize>, stride: f64, len: f64, rclose: bool, xs: Vec<i64> },
}

/// Coarse classification of a level, as seen by the validator and compiler.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LevelKind {
    Dense,
    Pinpoint,
    Interval,
    Regular,
}

impl Level {
    pub fn kind(&self) -> LevelKind {
        match self {
            Level::Dense { .. } => LevelKind::Dense,
            Level::Pinpoint { .. } => LevelKind::Pinpoint,
            Level::Interval { .. } => LevelKind::Interval,
            Level::Regular { .. } => LevelKind::Regular,
        }
    }

    pub fn is_dense(&self) -> bool {
        matches!(self, Level::Dense { .. })
    }

    /// True when every stored piece is a single point.
    pub fn is_pinpoint(&self) -> bool {
        match self {
            Level::Pinpoint { .. } => true,
            Level::Regular { len, .. } => *len == 0.0,
            _ => false,
        }
    }

    pub fn ptr(&self) -> Option<&[usize]> {
        match self {
            Level::Dense { .. } => None,
            Level::Pinpoint { ptr, .. } | Level::Interval { ptr, .. } | Level::Regular { ptr, .. } => Some(ptr),
        }
    }

    /// Number of fibers this level holds, or `None` for dense levels, which
    /// adapt to whatever their parent provides.
    pub fn fiber_count(&self) -> Option<usize> {
        self.ptr().map(|p| p.len().saturating_sub(1))
    }

    /// Number of child positions produced from `parents` parent positions.
    pub fn positions(&self, parents: usize) -> usize {
        match self {
            Level::Dense { size } => parents * size,
            _ => self.ptr().and_then(|p| p.last().copied()).unwrap_or(0),
        }
    }

    pub fn fiber(&self, f: usize) -> Range<usize> {
        match self.ptr() {
            Some(ptr) => ptr[f]..ptr[f + 1],
            None => panic!("dense levels have no stored fibers"),
        }
    }

    /// Lower endpoint of stored position `p`.
    pub fn start(&self, p: usize) -> Limit {
        match self {
            Level::Dense { .. } => panic!("dense level has no endpoints"),
            Level::Pinpoint { crd, .. } => Limit::exact(crd[p]),
            Level::Interval { left, flags, .. } => {
                let closed = match flags {
                    Flags::Homogeneous { lclose, .. } => *lclose,
                    Flags::PerEntry { lclose, .. } => lclose[p],
                };
                if closed {
                    Limit::exact(left[p])
                } else {
                    Limit::above(left[p])
                }
            }
            Level::Regular { stride, xs, .. } => Limit::exact(stride * xs[p] as f64),
        }
    }

    /// Upper endpoint of stored position `p`.
    pub fn stop(&self, p: usize) -> Limit {
        match self {
            Level::Dense { .. } => panic!("dense level has no endpoints"),
            Level::Pinpoint { crd, .. } => Limit::exact(crd[p]),
            Level::Interval { right, flags, .. } => {
                let closed = match flags {
                    Flags::Homogeneous { rclose, .. } => *rclose,
                    Flags::PerEntry { rclose, .. } => rclose[p],
                };
                if closed {
                    Limit::exact(right[p])
                } else {
                    Limit::below(right[p])
                }
            }
            Level::Regular { stride, len, rclose, xs, .. } => {
                let hi = stride * xs[p] as f64 + len;
                if *rclose || *len == 0.0 {
                    Limit::exact(hi)
                } else {
                    Limit::below(hi)
                }
            }
        }
    }

    pub fn piece(&self, p: usize) -> Interval {
        Interval::new(self.start(p), self.stop(p))
    }

    /// First position in fiber `f` whose upper endpoint is at least `target`;
    /// the fiber end when there is none.
    pub fn seek(&self, f: usize, target: Limit) -> usize {
        let r = self.fiber(f);
        let (mut lo, mut hi) = (r.start, r.end);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.stop(mid).cmp_total(&target).is_lt() {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// Stored position in fiber `f` whose piece contains `x`.
    pub fn locate(&self, f: usize, x: f64) -> Option<usize> {
        let p = self.seek(f, Limit::exact(x));
        if p < self.fiber(f).end && self.piece(p).contains(x) {
            Some(p)
        } else {
            None
        }
    }

    /// Upper endpoint of the last piece in fiber `f`, or `-Inf-eps` when the
    /// fiber is empty.
    pub fn last_stop(&self, f: usize) -> Limit {
        let r = self.fiber(f);
        if r.is_empty() {
            Limit::below(f64::NEG_INFINITY)
        } else {
            self.stop(r.end - 1)
        }
    }

    pub fn entry_count(&self) -> usize {
        self.ptr().and_then(|p| p.last().copied()).unwrap_or(0)
    }

    /// Structural and ordering checks.
    pub fn validate(&self) -> Result<(), BuildError> {
        let ptr = match self.ptr() {
            None => return Ok(()),
            Some(p) => p,
        };
        if ptr.first() != Some(&0) {
            return Err(BuildError::Malformed("ptr must start at 0".into()));
        }
        if ptr.windows(2).any(|w| w[0] > w[1]) {
            return Err(BuildError::Malformed("ptr must be non-decreasing".into()));
        }
        let n = *ptr.last().unwrap();
        let stored = match self {
            Level::Pinpoint { crd, .. } => crd.len(),
            Level::Interval { left, right, flags, .. } => {
                if left.len() != right.len() {
                    return Err(BuildError::Malformed("left and right differ in length".into()));
                }
                if let Flags::PerEntry { lclose, rclose } = flags {
                    if lclose.len() != left.len() || rclose.len() != left.len() {
                        return Err(BuildError::Malformed("inclusiveness arrays differ in length".into()));
                    }
                }
                left.len()
            }
            Level::Regular { xs, len, stride, .. } => {
                if *len < 0.0 || len.is_nan() || stride.is_nan() {
                    return Err(BuildError::Malformed("regular level needs len >= 0".into()));
                }
                xs.len()
            }
            Level::Dense { .. } => unreachable!(),
        };
        if stored != n {
            return Err(BuildError::Malformed(format!("ptr ends at {n} but {stored} entries are stored")));
        }
        for f in 0..ptr.len() - 1 {
            let r = self.fiber(f);
            for p in r.clone() {
                let piece = self.piece(p);
                if piece.start.is_nan() || piece.stop.is_nan() {
                    return Err(BuildError::NanEndpoint { fiber: f, position: p });
                }
                if piece.is_empty() {
                    return Err(BuildError::EmptyPiece { fiber: f, position: p });
                }
                if p > r.start {
                    let prev = self.piece(p - 1);
                    if piece.start.cmp_total(&prev.start).is_lt() {
                        return Err(BuildError::Unsorted { fiber: f, positions: (p - 1, p) });
                    }
                    if prev.overlaps(&piece) {
                        return Err(BuildError::Overlap { fiber: f, positions: (p - 1, p) });
                    }
                }
            }
        }
        Ok(())
    }
}

/// Which sparse format [`build_level`] should produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SparseKind {
    Pinpoint,
    Interval,
}

/// Builds a validated sparse level from per-fiber piece lists, choosing the
/// homogeneous flag encoding whenever every entry shares one inclusiveness.
pub fn build_level(kind: SparseKind, fibers: &[Vec<Interval>]) -> Result<Level, BuildError> {
    let mut ptr = vec![0];
    let mut all: Vec<Interval> = Vec::new();
    for fib in fibers {
        all.extend_from_slice(fib);
        ptr.push(all.len());
    }
    let level = match kind {
        SparseKind::Pinpoint => {
            let mut crd = Vec::with_capacity(all.len());
            for (f, fib) in fibers.iter().enumerate() {
                for (k, iv) in fib.iter().enumerate() {
                    if iv.is_empty() || !iv.is_pinpoint().unwrap_or(false) {
                        return Err(BuildError::NotPinpoint { fiber: f, position: ptr[f] + k });
                    }
                    crd.push(iv.start.val);
                }
            }
            Level::Pinpoint { ptr, crd }
        }
        SparseKind::Interval => {
            let mut left = Vec::with_capacity(all.len());
            let mut right = Vec::with_capacity(all.len());
            let mut lc = Vec::with_capacity(all.len());
            let mut rc = Vec::with_capacity(all.len());
            for (f, fib) in fibers.iter().enumerate() {
                for (k, iv) in fib.iter().enumerate() {
                    let kind = iv.kind().ok_or(BuildError::Malformed(format!(
                        "interval {iv} at fiber {f}, position {} is not one of the four inclusiveness kinds",
                        ptr[f] + k
                    )))?;
                    left.push(iv.start.val);
                    right.push(iv.stop.val);
                    lc.push(kind.lclose());
                    rc.push(kind.rclose());
                }
            }
            let flags = homogeneous(&lc, &rc);
            Level::Interval { ptr, left, right, flags }
        }
    };
    level.validate()?;
    Ok(level)
}

pub(crate) fn homogeneous(lc: &[bool], rc: &[bool]) -> Flags {
    let l0 = lc.first().copied().unwrap_or(true);
    let r0 = rc.first().copied().unwrap_or(true);
    if lc.iter().all(|&b| b == l0) && rc.iter().all(|&b| b == r0) {
        Flags::Homogeneous { lclose: l0, rclose: r0 }
    } else {
        Flags::PerEntry { lclose: lc.to_vec(), rclose: rc.to_vec() }
    }
}

impl Flags {
    pub fn kind_at(&self, p: usize) -> Kind {
        match self {
            Flags::Homogeneous { lclose, rclose } => Kind::from_flags(*lclose, *rclose),
            Flags::PerEntry { lclose, rclose } => Kind::from_flags(lclose[p], rclose[p]),
        }
    }
}
