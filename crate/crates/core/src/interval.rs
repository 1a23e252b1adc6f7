//! Finite unions of half-open subintervals of `[0,1)` with exact endpoints.
//!
//! A planner's cars are identified with the points of `[0,1)`; an
//! [`IntervalSet`] is a set of cars and its [`measure`](IntervalSet::measure)
//! is the fraction of the planner's traffic it contains.

use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::num::{format_q, Q};

/// Sorted, pairwise disjoint, non-adjacent, non-empty `[a,b)` pieces.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct IntervalSet {
    pieces: Vec<(Q, Q)>,
}

impl IntervalSet {
    pub fn empty() -> Self {
        IntervalSet { pieces: Vec::new() }
    }

    /// The whole share `[0,1)`.
    pub fn full() -> Self {
        IntervalSet {
            pieces: vec![(Q::zero(), Q::one())],
        }
    }

    /// Single interval `[a,b)`; empty when `a >= b`.
    pub fn interval(a: Q, b: Q) -> Result<Self> {
        Self::from_pairs(vec![(a, b)])
    }

    /// Normalizes arbitrary pairs: drops empty pieces, sorts, merges
    /// overlapping or touching pieces. Endpoints must lie in `[0,1]`.
    pub fn from_pairs(pairs: Vec<(Q, Q)>) -> Result<Self> {
        for (a, b) in &pairs {
            if *a < Q::zero() || *b > Q::one() || *a > Q::one() || *b < Q::zero() {
                return Err(Error::InvalidDefection(format!(
                    "interval [{}, {}) is not inside [0,1)",
                    format_q(a),
                    format_q(b)
                )));
            }
        }
        Ok(Self::normalize(pairs))
    }

    fn normalize(mut pairs: Vec<(Q, Q)>) -> Self {
        pairs.retain(|(a, b)| a < b);
        pairs.sort();
        let mut pieces: Vec<(Q, Q)> = Vec::with_capacity(pairs.len());
        for (a, b) in pairs {
            match pieces.last_mut() {
                Some(last) if a <= last.1 => {
                    if b > last.1 {
                        last.1 = b;
                    }
                }
                _ => pieces.push((a, b)),
            }
        }
        IntervalSet { pieces }
    }

    pub fn pieces(&self) -> &[(Q, Q)] {
        &self.pieces
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn measure(&self) -> Q {
        self.pieces.iter().map(|(a, b)| b - a).sum()
    }

    pub fn contains(&self, x: &Q) -> bool {
        self.pieces.iter().any(|(a, b)| a <= x && x < b)
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut pairs = self.pieces.clone();
        pairs.extend(other.pieces.iter().cloned());
        Self::normalize(pairs)
    }

    pub fn intersection(&self, other: &Self) -> Self {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.pieces.len() && j < other.pieces.len() {
            let (a1, b1) = &self.pieces[i];
            let (a2, b2) = &other.pieces[j];
            let lo = if a1 > a2 { a1 } else { a2 };
            let hi = if b1 < b2 { b1 } else { b2 };
            if lo < hi {
                out.push((lo.clone(), hi.clone()));
            }
            if b1 < b2 {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self::normalize(out)
    }

    /// `[0,1) \ self`.
    pub fn complement(&self) -> Self {
        let mut out = Vec::new();
        let mut cursor = Q::zero();
        for (a, b) in &self.pieces {
            if cursor < *a {
                out.push((cursor.clone(), a.clone()));
            }
            cursor = b.clone();
        }
        if cursor < Q::one() {
            out.push((cursor, Q::one()));
        }
        IntervalSet { pieces: out }
    }

    pub fn difference(&self, other: &Self) -> Self {
        self.intersection(&other.complement())
    }

    pub fn overlaps(&self, other: &Self) -> bool {
        !self.intersection(other).is_empty()
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.difference(other).is_empty()
    }

    /// The points whose position, measured along this set from its left
    /// end, falls in `[offset, offset + len)` taken cyclically modulo the
    /// set's measure. `len` is clamped to the measure.
    pub fn slice_by_measure(&self, offset: &Q, len: &Q) -> Self {
        let total = self.measure();
        if total.is_zero() || *len <= Q::zero() {
            return Self::empty();
        }
        if *len >= total {
            return self.clone();
        }
        let start = modulo(offset, &total);
        let end = &start + len;
        let ranges = if end <= total {
            vec![(start, end)]
        } else {
            vec![(start, total.clone()), (Q::zero(), end - &total)]
        };
        let mut out = Vec::new();
        let mut cum = Q::zero();
        for (a, b) in &self.pieces {
            let width = b - a;
            let next = &cum + &width;
            for (u, v) in &ranges {
                let lo = if *u > cum { u.clone() } else { cum.clone() };
                let hi = if *v < next { v.clone() } else { next.clone() };
                if lo < hi {
                    out.push((a + (&lo - &cum), a + (&hi - &cum)));
                }
            }
            cum = next;
        }
        Self::normalize(out)
    }

    /// Cyclic arc `[start, start + len)` of `[0,1)`.
    pub fn arc(start: &Q, len: &Q) -> Self {
        Self::full().slice_by_measure(start, len)
    }
}

/// `x mod m` in `[0, m)` for positive `m`.
pub fn modulo(x: &Q, m: &Q) -> Q {
    let k = (x / m).floor();
    x - k * m
}

impl fmt::Display for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pieces.is_empty() {
            return f.write_str("{}");
        }
        let parts: Vec<String> = self
            .pieces
            .iter()
            .map(|(a, b)| format!("[{}, {})", format_q(a), format_q(b)))
            .collect();
        f.write_str(&parts.join(" u "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::q;
    use proptest::prelude::*;

    fn set(pairs: &[(i64, i64, i64)]) -> IntervalSet {
        // (a_num, b_num, den)
        IntervalSet::from_pairs(pairs.iter().map(|&(a, b, d)| (q(a, d), q(b, d))).collect())
            .unwrap()
    }

    #[test]
    fn normalizes_and_merges() {
        let s = set(&[(5, 10, 10), (0, 5, 10)]);
        assert_eq!(s, IntervalSet::full());
        let s = set(&[(1, 3, 10), (2, 5, 10), (7, 7, 10)]);
        assert_eq!(s.pieces(), &[(q(1, 10), q(1, 2))]);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(IntervalSet::from_pairs(vec![(q(-1, 2), q(1, 2))]).is_err());
        assert!(IntervalSet::from_pairs(vec![(q(1, 2), q(3, 2))]).is_err());
    }

    #[test]
    fn complement_and_difference() {
        let s = set(&[(1, 2, 5), (3, 4, 5)]);
        let c = s.complement();
        assert_eq!(c, set(&[(0, 1, 5), (2, 3, 5), (4, 5, 5)]));
        assert_eq!(c.measure() + s.measure(), q(1, 1));
        assert!(s.difference(&s).is_empty());
    }

    #[test]
    fn arc_wraps() {
        let a = IntervalSet::arc(&q(4, 5), &q(1, 2));
        assert_eq!(a, set(&[(0, 3, 10), (8, 10, 10)]));
        assert_eq!(a.measure(), q(1, 2));
        assert!(IntervalSet::arc(&q(3, 10), &q(0, 1)).is_empty());
        assert_eq!(IntervalSet::arc(&q(3, 10), &q(1, 1)), IntervalSet::full());
    }

    #[test]
    fn slice_of_fragmented_set() {
        // Complement of [2/5, 3/5): length 4/5 in two pieces.
        let hole = set(&[(2, 3, 5)]).complement();
        let s = hole.slice_by_measure(&q(3, 10), &q(1, 5));
        // Positions 3/10..1/2 along the set map to [3/10,2/5) u [3/5,7/10).
        assert_eq!(s, set(&[(3, 4, 10), (6, 7, 10)]));
        assert_eq!(s.measure(), q(1, 5));
        assert!(!s.overlaps(&set(&[(2, 3, 5)])));
    }

    fn arb_set() -> impl Strategy<Value = IntervalSet> {
        prop::collection::vec((0i64..=40, 0i64..=40), 0..6).prop_map(|v| {
            IntervalSet::from_pairs(
                v.into_iter()
                    .map(|(a, b)| {
                        let (a, b) = if a <= b { (a, b) } else { (b, a) };
                        (q(a, 40), q(b, 40))
                    })
                    .collect(),
            )
            .unwrap()
        })
    }

    proptest! {
        #[test]
        fn measure_is_additive(a in arb_set(), b in arb_set()) {
            let lhs = a.union(&b).measure() + a.intersection(&b).measure();
            prop_assert_eq!(lhs, a.measure() + b.measure());
            prop_assert_eq!(a.measure() + a.complement().measure(), q(1, 1));
            prop_assert_eq!(a.complement().complement(), a.clone());
        }

        #[test]
        fn slices_have_requested_measure(a in arb_set(), off in 0i64..80, len in 0i64..40) {
            let total = a.measure();
            let len = q(len, 40);
            let s = a.slice_by_measure(&q(off, 40), &len);
            prop_assert!(s.is_subset_of(&a));
            let expected = if len < total { len } else { total };
            prop_assert_eq!(s.measure(), expected);
        }
    }
}
