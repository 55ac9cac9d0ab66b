//! Closed intervals over [`Limit`]s and the affine index maps used by accesses.

use std::fmt;

use thiserror::Error;

use crate::limit::{fmt_num, Limit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("operation undefined on an empty interval")]
pub struct EmptyInterval;

/// Inclusiveness of a plain `(a, b)` pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    Closed,
    RightOpen,
    LeftOpen,
    Open,
}

impl Kind {
    pub fn from_flags(lclose: bool, rclose: bool) -> Kind {
        match (lclose, rclose) {
            (true, true) => Kind::Closed,
            (true, false) => Kind::RightOpen,
            (false, true) => Kind::LeftOpen,
            (false, false) => Kind::Open,
        }
    }

    pub fn lclose(self) -> bool {
        matches!(self, Kind::Closed | Kind::RightOpen)
    }

    pub fn rclose(self) -> bool {
        matches!(self, Kind::Closed | Kind::LeftOpen)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub start: Limit,
    pub stop: Limit,
}

impl Interval {
    pub fn new(start: Limit, stop: Limit) -> Self {
        Interval { start, stop }
    }

    pub fn from_kind(a: f64, b: f64, kind: Kind) -> Self {
        let start = if kind.lclose() { Limit::exact(a) } else { Limit::above(a) };
        let stop = if kind.rclose() { Limit::exact(b) } else { Limit::below(b) };
        Interval { start, stop }
    }

    pub fn closed(a: f64, b: f64) -> Self {
        Self::from_kind(a, b, Kind::Closed)
    }

    pub fn point(x: f64) -> Self {
        Self::closed(x, x)
    }

    /// `(-Inf, +Inf)`.
    pub fn everything() -> Self {
        Interval { start: Limit::NEG_INF, stop: Limit::POS_INF }
    }

    pub fn is_empty(&self) -> bool {
        self.start.cmp_total(&self.stop).is_gt()
    }

    pub fn intersect(&self, other: &Interval) -> Interval {
        Interval { start: self.start.max(other.start), stop: self.stop.min(other.stop) }
    }

    pub fn length(&self) -> Result<f64, EmptyInterval> {
        if self.is_empty() {
            return Err(EmptyInterval);
        }
        if self.start.val == self.stop.val {
            return Ok(0.0);
        }
        Ok((self.stop - self.start).drop_eps().max(0.0))
    }

    pub fn is_pinpoint(&self) -> Result<bool, EmptyInterval> {
        if self.is_empty() {
            return Err(EmptyInterval);
        }
        Ok(self.start == self.stop && self.start.eps == 0)
    }

    pub fn contains(&self, x: f64) -> bool {
        let p = Limit::exact(x);
        self.start.cmp_total(&p).is_le() && p.cmp_total(&self.stop).is_le()
    }

    /// True when the two intervals share at least one point.
    pub fn overlaps(&self, other: &Interval) -> bool {
        !self.intersect(other).is_empty()
    }

    pub fn kind(&self) -> Option<Kind> {
        let l = match self.start.eps {
            0 => true,
            1 => false,
            _ => return None,
        };
        let r = match self.stop.eps {
            0 => true,
            -1 => false,
            _ => return None,
        };
        Some(Kind::from_flags(l, r))
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind() {
            Some(k) => {
                write!(f, "{}", if k.lclose() { '[' } else { '(' })?;
                fmt_num(self.start.val, f)?;
                write!(f, ",")?;
                fmt_num(self.stop.val, f)?;
                write!(f, "{}", if k.rclose() { ']' } else { ')' })
            }
            None => write!(f, "[{},{}]", self.start, self.stop),
        }
    }
}

/// `g(i) = scale·i + offset` with `scale` of `+1` or `-1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    pub offset: f64,
    pub scale: i8,
}

impl AffineMap {
    pub fn shift(offset: f64) -> Self {
        AffineMap { offset, scale: 1 }
    }

    pub fn reflect(offset: f64) -> Self {
        AffineMap { offset, scale: -1 }
    }

    pub fn apply(&self, i: f64) -> f64 {
        if self.scale < 0 {
            self.offset - i
        } else {
            i + self.offset
        }
    }

    /// Preimage of `a`, i.e. `{ i : g(i) ∈ a }`.
    pub fn apply_inverse(&self, a: &Interval) -> Interval {
        if self.scale < 0 {
            let off = Limit::exact(self.offset);
            Interval { start: off - a.stop, stop: off - a.start }
        } else {
            Interval { start: a.start - self.offset, stop: a.stop - self.offset }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kinds_encode_endpoints() {
        let iv = Interval::from_kind(1.0, 3.0, Kind::RightOpen);
        assert_eq!(iv.start, Limit::new(1.0, 0));
        assert_eq!(iv.stop, Limit::new(3.0, -1));
        assert!(Interval::from_kind(2.0, 2.0, Kind::Closed).is_pinpoint().unwrap());
        assert!(Interval::from_kind(5.0, 5.0, Kind::Open).is_empty());
    }

    #[test]
    fn intersections() {
        let c = Interval::closed;
        assert_eq!(c(1.0, 3.0).intersect(&c(2.0, 4.0)), c(2.0, 3.0));
        let ro = Interval::from_kind(1.0, 3.0, Kind::RightOpen);
        assert!(ro.intersect(&c(3.0, 5.0)).is_empty());
        assert_eq!(c(1.0, 3.0).intersect(&c(3.0, 5.0)), Interval::point(3.0));
    }

    #[test]
    fn lengths_and_pinpoints() {
        assert_eq!(Interval::closed(2.0, 3.0).length(), Ok(1.0));
        assert_eq!(Interval::from_kind(1.0, 3.0, Kind::RightOpen).length(), Ok(2.0));
        assert_eq!(Interval::point(4.1).length(), Ok(0.0));
        assert_eq!(Interval::from_kind(5.0, 5.0, Kind::Open).length(), Err(EmptyInterval));
        let half = Interval::new(Limit::exact(3.0), Limit::above(3.0));
        assert!(!half.is_pinpoint().unwrap());
        assert!(!Interval::from_kind(1.0, 3.0, Kind::RightOpen).is_pinpoint().unwrap());
    }

    #[test]
    fn inverse_maps() {
        let pre = AffineMap::shift(2.2).apply_inverse(&Interval::closed(3.0, 5.0));
        assert!((pre.start.val - 0.8).abs() < 1e-12 && (pre.stop.val - 2.8).abs() < 1e-12);
        let ro = Interval::from_kind(1.0, 3.0, Kind::RightOpen);
        assert_eq!(AffineMap::shift(1.0).apply_inverse(&ro), Interval::from_kind(0.0, 2.0, Kind::RightOpen));
        let r = AffineMap::reflect(0.0).apply_inverse(&Interval::closed(1.0, 3.0));
        assert_eq!(r, Interval::closed(-3.0, -1.0));
        let lo = AffineMap::reflect(0.0).apply_inverse(&ro);
        assert_eq!(lo, Interval::from_kind(-3.0, -1.0, Kind::LeftOpen));
    }

    #[test]
    fn renders() {
        assert_eq!(Interval::closed(1.0, 3.0).to_string(), "[1,3]");
        assert_eq!(Interval::from_kind(1.0, 3.0, Kind::RightOpen).to_string(), "[1,3)");
        assert_eq!(Interval::from_kind(1.0, 3.0, Kind::LeftOpen).to_string(), "(1,3]");
        assert_eq!(Interval::from_kind(1.0, 3.0, Kind::Open).to_string(), "(1,3)");
    }
}
