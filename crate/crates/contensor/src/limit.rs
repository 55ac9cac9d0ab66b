//! Real endpoints tagged with an infinitesimal.
//!
//! A [`Limit`] stands for `val + eps·ε` with `eps` in `{-1, 0, +1}`. Every
//! open or half-open interval can then be written as a closed interval over
//! limits, so boundary crossings compare exactly.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Sub};

use thiserror::Error;

/// Numeric types usable as the value part of a [`Limit`].
pub trait Endpoint: Copy + PartialOrd + Add<Output = Self> + Sub<Output = Self> {}

impl<T: Copy + PartialOrd + Add<Output = T> + Sub<Output = T>> Endpoint for T {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("comparison against a NaN endpoint")]
pub struct NanComparison;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Limit<T = f64> {
    pub val: T,
    pub eps: i8,
}

fn clamp_eps(e: i16) -> i8 {
    e.clamp(-1, 1) as i8
}

impl<T: Endpoint> Limit<T> {
    /// Builds a limit, saturating `eps` into `{-1, 0, +1}`.
    pub fn new(val: T, eps: i8) -> Self {
        Limit { val, eps: eps.clamp(-1, 1) }
    }

    pub fn exact(val: T) -> Self {
        Limit { val, eps: 0 }
    }

    /// `val - ε`.
    pub fn below(val: T) -> Self {
        Limit { val, eps: -1 }
    }

    /// `val + ε`.
    pub fn above(val: T) -> Self {
        Limit { val, eps: 1 }
    }

    pub fn drop_eps(self) -> T {
        self.val
    }

    /// Shifts the infinitesimal part by `k` steps, saturating.
    pub fn nudge(self, k: i8) -> Self {
        Limit { val: self.val, eps: clamp_eps(self.eps as i16 + k as i16) }
    }

    pub fn try_cmp(&self, other: &Self) -> Result<Ordering, NanComparison> {
        match self.val.partial_cmp(&other.val) {
            None => Err(NanComparison),
            Some(Ordering::Equal) => Ok(self.eps.cmp(&other.eps)),
            Some(o) => Ok(o),
        }
    }

    /// Total comparison; panics on NaN. Use [`Limit::try_cmp`] on untrusted data.
    pub fn cmp_total(&self, other: &Self) -> Ordering {
        self.try_cmp(other).expect("limit comparison against NaN")
    }

    pub fn max(self, other: Self) -> Self {
        if self.cmp_total(&other) == Ordering::Less {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Self) -> Self {
        if other.cmp_total(&self) == Ordering::Less {
            other
        } else {
            self
        }
    }
}

impl Limit<f64> {
    pub const NEG_INF: Limit<f64> = Limit { val: f64::NEG_INFINITY, eps: 0 };
    pub const POS_INF: Limit<f64> = Limit { val: f64::INFINITY, eps: 0 };

    pub fn is_nan(&self) -> bool {
        self.val.is_nan()
    }
}

impl<T: Endpoint> Add for Limit<T> {
    type Output = Limit<T>;
    fn add(self, rhs: Self) -> Self {
        Limit { val: self.val + rhs.val, eps: clamp_eps(self.eps as i16 + rhs.eps as i16) }
    }
}

impl<T: Endpoint> Sub for Limit<T> {
    type Output = Limit<T>;
    fn sub(self, rhs: Self) -> Self {
        Limit { val: self.val - rhs.val, eps: clamp_eps(self.eps as i16 - rhs.eps as i16) }
    }
}

impl<T: Endpoint> Add<T> for Limit<T> {
    type Output = Limit<T>;
    fn add(self, rhs: T) -> Self {
        self + Limit::exact(rhs)
    }
}

impl<T: Endpoint> Sub<T> for Limit<T> {
    type Output = Limit<T>;
    fn sub(self, rhs: T) -> Self {
        self - Limit::exact(rhs)
    }
}

impl<T: Endpoint> PartialOrd for Limit<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.try_cmp(other).ok()
    }
}

impl PartialEq<f64> for Limit<f64> {
    fn eq(&self, other: &f64) -> bool {
        *self == Limit::exact(*other)
    }
}

impl PartialOrd<f64> for Limit<f64> {
    fn partial_cmp(&self, other: &f64) -> Option<Ordering> {
        self.try_cmp(&Limit::exact(*other)).ok()
    }
}

impl From<f64> for Limit<f64> {
    fn from(v: f64) -> Self {
        Limit::exact(v)
    }
}

pub(crate) fn fmt_num(v: f64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if v == f64::INFINITY {
        write!(f, "+Inf")
    } else if v == f64::NEG_INFINITY {
        write!(f, "-Inf")
    } else {
        write!(f, "{v}")
    }
}

impl fmt::Display for Limit<f64> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_num(self.val, f)?;
        match self.eps {
            1 => write!(f, "+eps"),
            -1 => write!(f, "-eps"),
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l(v: f64, e: i8) -> Limit {
        Limit::new(v, e)
    }

    #[test]
    fn add_sub_saturate() {
        assert_eq!(l(3.0, 1) + l(2.0, -1), l(5.0, 0));
        assert_eq!(l(3.0, 0) + l(4.0, 0), l(7.0, 0));
        assert_eq!(l(1.0, 1) + l(2.0, 1), l(3.0, 1));
        assert_eq!(l(3.0, 0) - l(3.0, -1), l(0.0, 1));
        assert_eq!(l(5.0, 1) - l(2.0, 1), l(3.0, 0));
        assert_eq!(l(0.0, -1) - l(0.0, 1), l(0.0, -1));
    }

    #[test]
    fn ordering_and_drop() {
        assert!(l(3.0, -1) < l(3.0, 0));
        assert!(l(3.0, 0) >= l(3.0, 0));
        assert!(l(2.5, 1) < l(3.0, -1));
        assert_eq!(l(3.0, -1).drop_eps(), 3.0);
        assert_eq!(l(4.1, 1).drop_eps(), 4.1);
        assert!(l(2.0, 0) < 2.5);
        assert_eq!(l(f64::NAN, 0).try_cmp(&l(1.0, 0)), Err(NanComparison));
    }

    #[test]
    fn renders() {
        assert_eq!(l(3.0, 0).to_string(), "3");
        assert_eq!(l(3.0, 1).to_string(), "3+eps");
        assert_eq!(l(2.5, -1).to_string(), "2.5-eps");
        assert_eq!(Limit::POS_INF.to_string(), "+Inf");
    }
}
