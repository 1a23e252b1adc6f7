use crate::error::{Error, Result};
use crate::num::Scalar;

/// How the infinite tail beyond the simulated horizon is handled.
#[derive(Clone, Debug, PartialEq)]
pub enum TailMode<S> {
    /// Finite sum only.
    Truncated,
    /// The last two costs must agree; the last cost is assumed forever.
    ClosedForm,
    /// Smallest period `p <= max_period` such that the last `3p` costs are
    /// `p`-periodic; that cycle is assumed forever.
    Periodic { max_period: usize },
    /// Interval `[sum, sum + c_max * tail weight]`.
    Bound { c_max: S },
}

/// A discounted cost; `lower == upper` unless a bound tail was requested.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscountedCost<S> {
    pub lower: S,
    pub upper: S,
}

impl<S: Scalar> DiscountedCost<S> {
    pub fn exact(&self) -> Option<&S> {
        (self.lower == self.upper).then_some(&self.lower)
    }

    pub fn strictly_below(&self, other: &Self) -> bool {
        self.upper < other.lower
    }
}

/// `sum_{k>=1} discount^k c^k` with the requested tail treatment.
pub fn discounted_cost<S: Scalar>(costs: &[S], discount: &S, tail: &TailMode<S>) -> Result<DiscountedCost<S>> {
    if *discount <= S::zero() || *discount >= S::one() {
        return Err(Error::InvalidDiscount(format!("{discount:?}")));
    }
    let k = costs.len();
    let head = S::discounted_sum(costs, discount);
    let tail_weight = |p: usize| -> S { discount.pow(k as u32 + 1) / (S::one() - discount.pow(p as u32)) };
    let extra = match tail {
        TailMode::Truncated => S::zero(),
        TailMode::ClosedForm => {
            if k < 2 || costs[k - 1] != costs[k - 2] {
                return Err(Error::NonStationaryTail("constant"));
            }
            costs[k - 1].clone() * tail_weight(1)
        }
        TailMode::Periodic { max_period } => {
            let p = detect_period(costs, *max_period).ok_or(Error::NonStationaryTail("periodic"))?;
            // Stage K+r repeats stage K+r-p.
            let mut acc = S::zero();
            let mut w = S::one();
            for r in 0..p {
                acc = acc + w.clone() * costs[k - p + r].clone();
                w = w * discount.clone();
            }
            acc * tail_weight(p)
        }
        TailMode::Bound { c_max } => {
            let hi = head.clone() + c_max.clone() * tail_weight(1);
            return Ok(DiscountedCost { lower: head, upper: hi });
        }
    };
    let total = head + extra;
    Ok(DiscountedCost { lower: total.clone(), upper: total })
}

/// Smallest `p` whose last `3p` entries repeat with period `p`.
pub fn detect_period<S: PartialEq>(costs: &[S], max_period: usize) -> Option<usize> {
    let k = costs.len();
    (1..=max_period)
        .take_while(|p| 3 * p <= k)
        .find(|&p| (k - 2 * p..k).all(|j| costs[j] == costs[j - p]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{q, qi, Q};

    #[test]
    fn geometric_series() {
        let c = q(3, 7);
        let costs = vec![c.clone(); 5];
        let d = discounted_cost(&costs, &q(9, 10), &TailMode::ClosedForm).unwrap();
        assert_eq!(d.exact(), Some(&(qi(9) * c)));
    }

    #[test]
    fn split_geometric_sum() {
        let costs = vec![qi(1), q(3, 4), q(3, 4)];
        let d = discounted_cost(&costs, &q(1, 2), &TailMode::ClosedForm).unwrap();
        assert_eq!(d.exact(), Some(&q(7, 8)));
    }

    #[test]
    fn truncated_single_term() {
        let d = discounted_cost(&[q(2, 3)], &q(1, 2), &TailMode::Truncated).unwrap();
        assert_eq!(d.exact(), Some(&q(1, 3)));
    }

    #[test]
    fn periodic_tail_matches_long_sum() {
        let pattern = [q(1, 2), qi(1)];
        let costs: Vec<Q> = (0..9).map(|k| pattern[k % 2].clone()).collect();
        let lam = q(9, 10);
        let d = discounted_cost(&costs, &lam, &TailMode::Periodic { max_period: 4 }).unwrap();
        // Exact infinite sum: (l/2 + l^2) / (1 - l^2).
        let expected = (&lam / qi(2) + &lam * &lam) / (qi(1) - &lam * &lam);
        assert_eq!(d.exact(), Some(&expected));
    }

    #[test]
    fn bound_and_errors() {
        let costs = vec![q(1, 2), qi(1)];
        let d = discounted_cost(&costs, &q(1, 2), &TailMode::Bound { c_max: qi(1) }).unwrap();
        assert_eq!(d.lower, q(1, 4) + q(1, 4));
        assert_eq!(d.upper, q(1, 2) + q(1, 4));
        assert!(discounted_cost(&costs, &qi(1), &TailMode::Truncated).is_err());
        assert!(discounted_cost(&costs, &qi(0), &TailMode::Truncated).is_err());
        assert!(matches!(
            discounted_cost(&costs, &q(1, 2), &TailMode::ClosedForm),
            Err(Error::NonStationaryTail(_))
        ));
    }
}
