mod common;

use std::cmp::Ordering;

use proptest::prelude::*;

use common::*;
use contensor::interval::{AffineMap, Interval, Kind};
use contensor::Limit;

proptest! {
    #![proptest_config(config())]

    #[test]
    fn limit_order_is_total(a in limit(), b in limit(), c in limit()) {
        let ab = a.cmp_total(&b);
        prop_assert_eq!(ab, b.cmp_total(&a).reverse());
        prop_assert_eq!(ab == Ordering::Equal, a == b);
        if ab.is_le() && b.cmp_total(&c).is_le() {
            prop_assert!(a.cmp_total(&c).is_le());
        }
        if a.val != b.val {
            prop_assert_eq!(ab, a.val.partial_cmp(&b.val).unwrap());
        }
    }

    #[test]
    fn exact_arithmetic_matches_reals(x in quarter(), y in quarter()) {
        let (a, b) = (Limit::exact(x), Limit::exact(y));
        prop_assert_eq!(a + b, Limit::exact(x + y));
        prop_assert_eq!(a - b, Limit::exact(x - y));
    }

    #[test]
    fn arithmetic_saturates(a in limit(), b in limit(), k in -3i8..=3) {
        for l in [a + b, a - b, a.nudge(k), Limit::new(a.val, k)] {
            prop_assert!((-1..=1).contains(&l.eps));
        }
        if a.val.is_finite() && b.val.is_finite() {
            prop_assert_eq!((a - b).drop_eps(), a.val - b.val);
        }
    }

    #[test]
    fn epsilon_is_the_successor(x in quarter(), m in limit()) {
        let (lo, hi) = (Limit::exact(x), Limit::above(x));
        prop_assert!(!(lo.cmp_total(&m).is_lt() && m.cmp_total(&hi).is_lt()));
        let (lo, hi) = (Limit::below(x), Limit::exact(x));
        prop_assert!(!(lo.cmp_total(&m).is_lt() && m.cmp_total(&hi).is_lt()));
    }

    #[test]
    fn intersection_laws(a in interval(), b in interval(), c in interval()) {
        prop_assert_eq!(a.intersect(&b), b.intersect(&a));
        prop_assert_eq!(a.intersect(&b).intersect(&c), a.intersect(&b.intersect(&c)));
        prop_assert_eq!(a.intersect(&a), a);
        prop_assert_eq!(a.intersect(&Interval::everything()), a);
    }

    #[test]
    fn intersection_membership(a in interval(), b in interval(), x in eighth()) {
        prop_assert_eq!(a.intersect(&b).contains(x), a.contains(x) && b.contains(x));
    }

    #[test]
    fn membership_honors_inclusiveness(lo in quarter(), len in 1i32..=8, kind in kind(), x in eighth()) {
        let hi = lo + len as f64 * 0.25;
        let iv = Interval::from_kind(lo, hi, kind);
        let left = if kind.lclose() { lo <= x } else { lo < x };
        let right = if kind.rclose() { x <= hi } else { x < hi };
        prop_assert_eq!(iv.contains(x), left && right);
    }

    #[test]
    fn intersection_is_no_longer(a in interval(), b in interval()) {
        let i = a.intersect(&b);
        if let (Ok(l), Ok(la), Ok(lb)) = (i.length(), a.length(), b.length()) {
            prop_assert!(l <= la.min(lb));
        }
    }

    #[test]
    fn preimage_preserves_membership(off in quarter(), flip in any::<bool>(), a in interval(), x in eighth()) {
        let g = if flip { AffineMap::reflect(off) } else { AffineMap::shift(off) };
        prop_assert_eq!(g.apply_inverse(&a).contains(x), a.contains(g.apply(x)));
    }

    #[test]
    fn preimage_keeps_partitions(off in quarter(), flip in any::<bool>(), cuts in prop::collection::btree_set(-40i32..=40, 0..6), closed in prop::collection::vec(any::<bool>(), 6)) {
        let g = if flip { AffineMap::reflect(off) } else { AffineMap::shift(off) };
        let mut family = Vec::new();
        let mut start = Limit::NEG_INF;
        for (k, c) in cuts.iter().enumerate() {
            let x = *c as f64 * 0.25;
            let stop = if closed[k] { Limit::exact(x) } else { Limit::below(x) };
            family.push(Interval::new(start, stop));
            start = stop.nudge(1);
        }
        family.push(Interval::new(start, Limit::POS_INF));
        let mut pre: Vec<Interval> = family.iter().map(|iv| g.apply_inverse(iv)).collect();
        pre.sort_by(|a, b| a.start.cmp_total(&b.start));
        prop_assert_eq!(pre[0].start, Limit::NEG_INF);
        prop_assert_eq!(pre[pre.len() - 1].stop, Limit::POS_INF);
        for w in pre.windows(2) {
            prop_assert!(!w[0].is_empty());
            prop_assert_eq!(w[0].stop.nudge(1), w[1].start);
        }
    }
}

#[test]
fn kinds_render_with_brackets() {
    assert_eq!(Interval::from_kind(1.0, 3.0, Kind::RightOpen).to_string(), "[1,3)");
    assert_eq!(Interval::from_kind(1.0, 3.0, Kind::LeftOpen).to_string(), "(1,3]");
    assert_eq!(Interval::from_kind(1.0, 3.0, Kind::Open).to_string(), "(1,3)");
    assert_eq!(Interval::closed(2.0, 2.0).to_string(), "[2,2]");
}

#[test]
fn reflected_open_end_becomes_open_start() {
    let iv = Interval::from_kind(1.0, 3.0, Kind::RightOpen);
    let pre = AffineMap::reflect(5.0).apply_inverse(&iv);
    assert_eq!(pre, Interval::from_kind(2.0, 4.0, Kind::LeftOpen));
}
