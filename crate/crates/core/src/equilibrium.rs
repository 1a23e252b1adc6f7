//! One-shot planner equilibrium on Pigou's network.
//!
//! Planner `i` routes a fraction `lambda_i` of its share `alpha_i` on the
//! bottom (congestion-priced) path. With `F_i` the bottom flow of the other
//! planners, its per-unit cost is the parabola
//! `alpha_i lambda_i^2 + (F_i - 1) lambda_i + 1`, so the best response is the
//! vertex `(1 - F_i) / (2 alpha_i)` clamped to `[0,1]`. At the unique
//! equilibrium `alpha_i lambda_i = min(alpha_i, 1 - F)`.

use num_traits::{One, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::num::{format_q, q, Scalar, Q};

/// Traffic shares `alpha_1..alpha_n`: positive, summing to exactly one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    shares: Vec<Q>,
}

impl Partition {
    pub fn new(shares: Vec<Q>) -> Result<Self> {
        if shares.is_empty() {
            return Err(Error::InvalidPartition("no planners".into()));
        }
        if let Some(bad) = shares.iter().find(|a| **a <= Q::zero()) {
            return Err(Error::InvalidPartition(format!(
                "share {} is not positive",
                format_q(bad)
            )));
        }
        let total: Q = shares.iter().sum();
        if total != Q::one() {
            return Err(Error::InvalidPartition(format!(
                "shares sum to {}, expected 1",
                format_q(&total)
            )));
        }
        Ok(Partition { shares })
    }

    /// `n` planners with share `1/n` each.
    pub fn equal(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidPartition("no planners".into()));
        }
        Partition::new(vec![q(1, n as i64); n])
    }

    /// Shares proportional to positive integer weights.
    pub fn from_weights(weights: &[u64]) -> Result<Self> {
        let total: u64 = weights.iter().sum();
        Partition::new(
            weights
                .iter()
                .map(|&w| q(w as i64, total as i64))
                .collect(),
        )
    }

    pub fn shares(&self) -> &[Q] {
        &self.shares
    }

    pub fn len(&self) -> usize {
        self.shares.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shares.is_empty()
    }

    pub fn share<S: Scalar>(&self, i: usize) -> S {
        S::from_q(&self.shares[i])
    }

    pub fn max_share(&self) -> &Q {
        self.shares.iter().max().expect("non-empty")
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.len() {
            return Err(Error::PlannerOutOfRange {
                index: i,
                planners: self.len(),
            });
        }
        Ok(())
    }

    fn check_lambdas<S: Scalar>(&self, lambdas: &[S]) -> Result<()> {
        if lambdas.len() != self.len() {
            return Err(Error::InvalidFraction(format!(
                "{} fractions for {} planners",
                lambdas.len(),
                self.len()
            )));
        }
        if lambdas.iter().any(|l| *l < S::zero() || *l > S::one()) {
            return Err(Error::InvalidFraction("fraction outside [0,1]".into()));
        }
        Ok(())
    }

    /// Random partition with `n` planners and integer weights in `1..=max_weight`.
    pub fn random<R: Rng>(rng: &mut R, n: usize, max_weight: u64) -> Self {
        let weights: Vec<u64> = (0..n).map(|_| rng.random_range(1..=max_weight)).collect();
        Partition::from_weights(&weights).expect("positive weights")
    }
}

/// Per-planner bottom fractions and the total bottom flow `F`.
#[derive(Clone, Debug, PartialEq)]
pub struct EquilibriumSolution<S> {
    pub lambdas: Vec<S>,
    pub total_bottom_flow: S,
}

impl<S: Scalar> EquilibriumSolution<S> {
    /// `F_i = F - alpha_i lambda_i`.
    pub fn others_flow(&self, partition: &Partition, i: usize) -> S {
        self.total_bottom_flow.clone() - partition.share::<S>(i) * self.lambdas[i].clone()
    }

    pub fn max_lambda(&self) -> S {
        self.lambdas
            .iter()
            .cloned()
            .fold(S::zero(), S::max_of)
    }
}

/// `sum_j alpha_j lambda_j`.
pub fn bottom_flow<S: Scalar>(partition: &Partition, lambdas: &[S]) -> S {
    partition
        .shares()
        .iter()
        .zip(lambdas)
        .map(|(a, l)| S::from_q(a) * l.clone())
        .sum()
}

fn others_flow<S: Scalar>(partition: &Partition, lambdas: &[S], i: usize) -> S {
    partition
        .shares()
        .iter()
        .zip(lambdas)
        .enumerate()
        .filter(|(j, _)| *j != i)
        .map(|(_, (a, l))| S::from_q(a) * l.clone())
        .sum()
}

/// Social cost `(1 - F) + F^2` of a Pigou stage with bottom flow `F`.
pub fn pigou_social_cost<S: Scalar>(bottom: &S) -> S {
    S::one() - bottom.clone() + bottom.clone() * bottom.clone()
}

/// Planner `i`'s per-unit cost in the quadratic form
/// `alpha_i lambda_i^2 + (F_i - 1) lambda_i + 1`.
pub fn one_shot_planner_cost<S: Scalar>(
    partition: &Partition,
    lambdas: &[S],
    i: usize,
) -> Result<S> {
    partition.check_index(i)?;
    partition.check_lambdas(lambdas)?;
    let a: S = partition.share(i);
    let l = lambdas[i].clone();
    let fi = others_flow(partition, lambdas, i);
    Ok(a * l.clone() * l.clone() + (fi - S::one()) * l + S::one())
}

/// Same cost written as top share plus bottom share times bottom latency:
/// `(1 - lambda_i) + lambda_i (alpha_i lambda_i + F_i)`.
pub fn planner_cost_direct<S: Scalar>(
    partition: &Partition,
    lambdas: &[S],
    i: usize,
) -> Result<S> {
    partition.check_index(i)?;
    partition.check_lambdas(lambdas)?;
    let a: S = partition.share(i);
    let l = lambdas[i].clone();
    let bottom_latency = a * l.clone() + others_flow(partition, lambdas, i);
    Ok((S::one() - l.clone()) + l * bottom_latency)
}

/// Unique minimizer of planner `i`'s cost with the others fixed.
pub fn best_response<S: Scalar>(partition: &Partition, lambdas: &[S], i: usize) -> Result<S> {
    partition.check_index(i)?;
    partition.check_lambdas(lambdas)?;
    Ok(vertex_clamped(
        &partition.share(i),
        &others_flow(partition, lambdas, i),
    ))
}

fn vertex_clamped<S: Scalar>(alpha: &S, others: &S) -> S {
    let v = (S::one() - others.clone()) / (S::from_int(2) * alpha.clone());
    S::max_of(S::zero(), S::min_of(S::one(), v))
}

/// Equilibrium fractions for a given total bottom flow `F`:
/// `lambda_i = min(1, (1 - F) / alpha_i)`.
pub fn lambdas_for_flow<S: Scalar>(partition: &Partition, total: &S) -> Vec<S> {
    partition
        .shares()
        .iter()
        .map(|a| S::min_of(S::one(), (S::one() - total.clone()) / S::from_q(a)))
        .collect()
}

/// Solves the equilibrium by sorting shares ascending and scanning for the
/// number `k` of planners that route all of their traffic on the bottom path.
///
/// With `S_k` the sum of the `k` smallest shares the candidate flow is
/// `(S_k + n - k) / (n - k + 1)`; the scan stops at the first `k` whose next
/// share is at least `1 - F`. O(n log n) for the sort, O(n) for the scan.
pub fn solve_planner_equilibrium<S: Scalar>(partition: &Partition) -> EquilibriumSolution<S> {
    let n = partition.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| partition.shares()[a].cmp(&partition.shares()[b]));

    let mut prefix = S::zero();
    let mut total = None;
    for (k, &i) in order.iter().enumerate() {
        let rest = S::from_int((n - k) as i64);
        let candidate = (prefix.clone() + rest.clone()) / (rest + S::one());
        let next: S = partition.share(i);
        if next >= S::one() - candidate.clone() {
            total = Some(candidate);
            break;
        }
        prefix = prefix + next;
    }
    // k = n - 1 always satisfies the stopping rule: 1 - F = alpha_n / 2.
    let total = total.expect("scan terminates by k = n - 1");
    EquilibriumSolution {
        lambdas: lambdas_for_flow(partition, &total),
        total_bottom_flow: total,
    }
}

/// Outcome of checking a profile for the equilibrium property.
#[derive(Clone, Debug, PartialEq)]
pub enum EquilibriumCheck<S> {
    Pass,
    Fail {
        planner: usize,
        improving: S,
        current_cost: S,
        improved_cost: S,
    },
}

impl<S> EquilibriumCheck<S> {
    pub fn is_pass(&self) -> bool {
        matches!(self, EquilibriumCheck::Pass)
    }
}

/// Checks that every `lambda_i` equals its best response (exactly in
/// rational mode, within `1e-9` in float mode). Reports the first planner
/// that can improve.
pub fn verify_planner_equilibrium<S: Scalar>(
    partition: &Partition,
    lambdas: &[S],
) -> Result<EquilibriumCheck<S>> {
    partition.check_lambdas(lambdas)?;
    for i in 0..partition.len() {
        let br = best_response(partition, lambdas, i)?;
        if !br.near(&lambdas[i]) {
            let current_cost = one_shot_planner_cost(partition, lambdas, i)?;
            let mut alt = lambdas.to_vec();
            alt[i] = br.clone();
            let improved_cost = one_shot_planner_cost(partition, &alt, i)?;
            return Ok(EquilibriumCheck::Fail {
                planner: i,
                improving: br,
                current_cost,
                improved_cost,
            });
        }
    }
    Ok(EquilibriumCheck::Pass)
}

/// Result of the best-response iteration oracle.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleRun<S> {
    pub solution: EquilibriumSolution<S>,
    pub sweeps: usize,
}

/// Independent route to the equilibrium: round-robin best responses in
/// ascending planner order.
///
/// The dynamics run in floating point. Once a sweep leaves the profile
/// (nearly) unchanged, the set of planners pinned at 1 is read off the
/// iterate and the first-order conditions of the others,
/// `2 alpha_i lambda_i + sum_{j != i} alpha_j lambda_j = 1`, are solved by
/// Gaussian elimination in `S`. The candidate is accepted only if it passes
/// [`verify_planner_equilibrium`]; otherwise iteration continues.
pub fn best_response_iteration_oracle<S: Scalar>(
    partition: &Partition,
    start: &[S],
    max_sweeps: usize,
) -> Result<OracleRun<S>> {
    partition.check_lambdas(start)?;
    let n = partition.len();
    let alphas: Vec<f64> = partition.shares().iter().map(f64::from_q).collect();
    let mut x: Vec<f64> = start.iter().map(S::to_f64).collect();
    let mut flow: f64 = alphas.iter().zip(&x).map(|(a, l)| a * l).sum();
    let mut last_snap: Option<Vec<bool>> = None;

    for sweep in 1..=max_sweeps {
        let mut change = 0f64;
        for i in 0..n {
            let others = flow - alphas[i] * x[i];
            let v = ((1.0 - others) / (2.0 * alphas[i])).clamp(0.0, 1.0);
            change = change.max((v - x[i]).abs());
            x[i] = v;
            flow = others + alphas[i] * v;
        }
        if change < 1e-10 || sweep == 1 || sweep % 64 == 0 {
            let pinned: Vec<bool> = x.iter().map(|&l| l >= 1.0).collect();
            if last_snap.as_ref() == Some(&pinned) && change >= 1e-10 {
                continue;
            }
            if let Some(candidate) = solve_first_order_conditions::<S>(partition, &pinned) {
                if verify_planner_equilibrium(partition, &candidate)?.is_pass() {
                    let total = bottom_flow(partition, &candidate);
                    return Ok(OracleRun {
                        solution: EquilibriumSolution {
                            lambdas: candidate,
                            total_bottom_flow: total,
                        },
                        sweeps: sweep,
                    });
                }
            }
            last_snap = Some(pinned);
        }
    }
    Err(Error::OracleDiverged {
        iterations: max_sweeps,
        last: format!("{x:?}"),
    })
}

/// Fixes `lambda_i = 1` where `pinned[i]` and solves the vertex conditions
/// of the remaining planners. `None` if the result leaves `[0,1]`.
fn solve_first_order_conditions<S: Scalar>(partition: &Partition, pinned: &[bool]) -> Option<Vec<S>> {
    let n = partition.len();
    let free: Vec<usize> = (0..n).filter(|&i| !pinned[i]).collect();
    let alpha = |i: usize| -> S { partition.share(i) };
    let pinned_flow: S = (0..n).filter(|&i| pinned[i]).map(alpha).sum();
    let m = free.len();
    let mut rows: Vec<Vec<S>> = Vec::with_capacity(m);
    for &i in &free {
        let mut row: Vec<S> = free
            .iter()
            .map(|&j| if i == j { S::from_int(2) * alpha(j) } else { alpha(j) })
            .collect();
        row.push(S::one() - pinned_flow.clone());
        rows.push(row);
    }
    let solution = gaussian_elimination(rows)?;
    let mut lambdas = vec![S::one(); n];
    for (k, &i) in free.iter().enumerate() {
        let v = solution[k].clone();
        if v < S::zero() || v > S::one() {
            return None;
        }
        lambdas[i] = v;
    }
    Some(lambdas)
}

/// Solves an augmented `m x (m+1)` system with partial pivoting on the
/// largest magnitude (exact in rational mode).
fn gaussian_elimination<S: Scalar>(mut rows: Vec<Vec<S>>) -> Option<Vec<S>> {
    let m = rows.len();
    for col in 0..m {
        let pivot = (col..m).max_by(|&a, &b| {
            let va = rows[a][col].abs_diff(&S::zero());
            let vb = rows[b][col].abs_diff(&S::zero());
            va.partial_cmp(&vb).unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if rows[pivot][col].is_zero() {
            return None;
        }
        rows.swap(col, pivot);
        let p = rows[col][col].clone();
        for x in &mut rows[col][col..] {
            *x = x.clone() / p.clone();
        }
        let pivot_row = rows[col].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != col && !row[col].is_zero() {
                let factor = row[col].clone();
                for (x, y) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                    *x = x.clone() - factor.clone() * y.clone();
                }
            }
        }
    }
    Some(rows.into_iter().map(|mut r| r.pop().expect("augmented")).collect())
}

/// Bound on the equilibrium flow with `n` planners.
pub fn flow_upper_bound(n: usize) -> Q {
    q(n as i64, n as i64 + 1)
}

/// `3/4`, the optimal Pigou cost and the regime boundary for `F`.
pub fn three_quarters() -> Q {
    q(3, 4)
}

/// `1/2`, the optimal bottom fraction.
pub fn one_half() -> Q {
    q(1, 2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::qi;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn part(v: &[(i64, i64)]) -> Partition {
        Partition::new(v.iter().map(|&(n, d)| q(n, d)).collect()).unwrap()
    }

    #[test]
    fn rejects_bad_partitions() {
        assert!(Partition::new(vec![]).is_err());
        assert!(Partition::new(vec![q(1, 2), q(1, 3)]).is_err());
        assert!(Partition::new(vec![q(3, 2), q(-1, 2)]).is_err());
        assert!(Partition::equal(0).is_err());
    }

    #[test]
    fn planner_cost_examples() {
        let single = Partition::equal(1).unwrap();
        assert_eq!(one_shot_planner_cost(&single, &[q(1, 2)], 0).unwrap(), q(3, 4));
        let four = Partition::equal(4).unwrap();
        let l = vec![q(4, 5); 4];
        assert_eq!(one_shot_planner_cost(&four, &l, 0).unwrap(), q(21, 25));
        let mixed = part(&[(1, 10), (2, 10), (7, 10)]);
        let l = vec![qi(0), q(1, 3), q(5, 7)];
        assert_eq!(one_shot_planner_cost(&mixed, &l, 0).unwrap(), qi(1));
        for i in 0..3 {
            assert_eq!(
                one_shot_planner_cost(&mixed, &l, i).unwrap(),
                planner_cost_direct(&mixed, &l, i).unwrap()
            );
        }
        assert!(matches!(
            one_shot_planner_cost(&mixed, &l, 3),
            Err(Error::PlannerOutOfRange { .. })
        ));
        assert!(one_shot_planner_cost(&mixed, &[qi(2), qi(0), qi(0)], 0).is_err());
    }

    #[test]
    fn best_response_examples() {
        let single = Partition::equal(1).unwrap();
        assert_eq!(best_response(&single, &[qi(0)], 0).unwrap(), q(1, 2));
        let two = Partition::equal(2).unwrap();
        assert_eq!(best_response(&two, &[qi(0), qi(1)], 0).unwrap(), q(1, 2));
        let skew = part(&[(1, 10), (9, 10)]);
        assert_eq!(best_response(&skew, &[qi(0), qi(0)], 0).unwrap(), qi(1));
    }

    #[test]
    fn solver_examples() {
        let s = solve_planner_equilibrium::<Q>(&Partition::equal(4).unwrap());
        assert_eq!(s.lambdas, vec![q(4, 5); 4]);
        assert_eq!(s.total_bottom_flow, q(4, 5));

        let s = solve_planner_equilibrium::<Q>(&part(&[(1, 10), (2, 10), (7, 10)]));
        assert_eq!(s.lambdas, vec![qi(1), qi(1), q(1, 2)]);
        assert_eq!(s.total_bottom_flow, q(13, 20));

        let s = solve_planner_equilibrium::<Q>(&Partition::equal(1).unwrap());
        assert_eq!(s.lambdas, vec![q(1, 2)]);

        let s = solve_planner_equilibrium::<Q>(&Partition::equal(2).unwrap());
        assert_eq!(s.lambdas, vec![q(2, 3); 2]);
        assert_eq!(s.total_bottom_flow, q(2, 3));
    }

    #[test]
    fn solver_reports_original_order() {
        let s = solve_planner_equilibrium::<Q>(&part(&[(7, 10), (1, 10), (2, 10)]));
        assert_eq!(s.lambdas, vec![q(1, 2), qi(1), qi(1)]);
    }

    #[test]
    fn float_solver_matches() {
        let s = solve_planner_equilibrium::<f64>(&part(&[(1, 10), (2, 10), (7, 10)]));
        assert!((s.total_bottom_flow - 0.65).abs() < 1e-12);
        assert!(verify_planner_equilibrium(&part(&[(1, 10), (2, 10), (7, 10)]), &s.lambdas)
            .unwrap()
            .is_pass());
    }

    #[test]
    fn verify_examples() {
        let four = Partition::equal(4).unwrap();
        assert!(verify_planner_equilibrium(&four, &vec![q(4, 5); 4]).unwrap().is_pass());
        match verify_planner_equilibrium(&four, &vec![q(1, 2); 4]).unwrap() {
            EquilibriumCheck::Fail {
                planner,
                improving,
                current_cost,
                improved_cost,
            } => {
                assert_eq!(planner, 0);
                assert_eq!(improving, qi(1));
                assert!(improved_cost < current_cost);
            }
            EquilibriumCheck::Pass => panic!("profile is not an equilibrium"),
        }
        let single = Partition::equal(1).unwrap();
        assert!(verify_planner_equilibrium(&single, &[q(1, 2)]).unwrap().is_pass());
    }

    #[test]
    fn oracle_examples() {
        let four = Partition::equal(4).unwrap();
        let run = best_response_iteration_oracle(&four, &vec![qi(0); 4], 1000).unwrap();
        assert_eq!(run.solution.lambdas, vec![q(4, 5); 4]);

        let single = Partition::equal(1).unwrap();
        let run = best_response_iteration_oracle(&single, &[qi(1)], 1000).unwrap();
        assert_eq!(run.solution.lambdas, vec![q(1, 2)]);
        assert_eq!(run.sweeps, 1);

        let mixed = part(&[(1, 10), (2, 10), (7, 10)]);
        let run = best_response_iteration_oracle(&mixed, &vec![qi(1); 3], 1000).unwrap();
        assert_eq!(run.solution.lambdas, vec![qi(1), qi(1), q(1, 2)]);
        assert_eq!(run.solution, solve_planner_equilibrium::<Q>(&mixed));
    }

    #[test]
    fn oracle_reports_non_convergence() {
        let four = Partition::equal(4).unwrap();
        let err = best_response_iteration_oracle(&four, &vec![qi(0); 4], 0).unwrap_err();
        assert!(matches!(err, Error::OracleDiverged { .. }));
    }

    #[test]
    fn boundary_share_takes_lambda_one() {
        // Sorted (1/5, 1/5, 1/5, 2/5): F = 4/5 and 1 - F equals the small shares.
        let p = part(&[(2, 5), (1, 5), (1, 5), (1, 5)]);
        let s = solve_planner_equilibrium::<Q>(&p);
        assert_eq!(s.total_bottom_flow, q(4, 5));
        assert_eq!(s.lambdas, vec![q(1, 2), qi(1), qi(1), qi(1)]);
        assert!(verify_planner_equilibrium(&p, &s.lambdas).unwrap().is_pass());
    }

    #[test]
    fn start_independence() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let p = Partition::random(&mut rng, 7, 50);
        let reference = solve_planner_equilibrium::<Q>(&p).total_bottom_flow;
        for _ in 0..100 {
            let start: Vec<Q> = (0..7).map(|_| q(rng.random_range(0..=100), 100)).collect();
            let run = best_response_iteration_oracle(&p, &start, 10_000).unwrap();
            assert_eq!(run.solution.total_bottom_flow, reference);
        }
    }

    fn arb_partition(max_n: usize) -> impl Strategy<Value = Partition> {
        prop::collection::vec(1u64..=1000, 1..=max_n)
            .prop_map(|w| Partition::from_weights(&w).unwrap())
    }

    proptest! {
        #[test]
        fn fixed_point_identity(p in arb_partition(20)) {
            let s = solve_planner_equilibrium::<Q>(&p);
            let one_minus_f = Q::one() - &s.total_bottom_flow;
            for (a, l) in p.shares().iter().zip(&s.lambdas) {
                let expected = if *a < one_minus_f { a.clone() } else { one_minus_f.clone() };
                prop_assert_eq!(a * l, expected);
            }
            prop_assert_eq!(bottom_flow(&p, &s.lambdas), s.total_bottom_flow.clone());
            prop_assert!(s.total_bottom_flow <= flow_upper_bound(p.len()));
            prop_assert!(verify_planner_equilibrium(&p, &s.lambdas).unwrap().is_pass());
        }

        #[test]
        fn pinned_planners_form_a_prefix(p in arb_partition(20)) {
            let s = solve_planner_equilibrium::<Q>(&p);
            let mut order: Vec<usize> = (0..p.len()).collect();
            order.sort_by(|&a, &b| p.shares()[a].cmp(&p.shares()[b]));
            let pinned: Vec<bool> = order.iter().map(|&i| s.lambdas[i] == Q::one()).collect();
            let first_free = pinned.iter().position(|x| !x).unwrap_or(pinned.len());
            prop_assert!(pinned[first_free..].iter().all(|x| !x));
            let one_minus_f = Q::one() - &s.total_bottom_flow;
            for (a, l) in p.shares().iter().zip(&s.lambdas) {
                if *a < one_minus_f {
                    prop_assert_eq!(l, &Q::one());
                }
            }
        }

        #[test]
        fn solver_agrees_with_oracle(p in arb_partition(20)) {
            let s = solve_planner_equilibrium::<Q>(&p);
            let run = best_response_iteration_oracle(&p, &vec![Q::zero(); p.len()], 100_000).unwrap();
            prop_assert_eq!(run.solution, s);
        }

        #[test]
        fn float_matches_rational(p in arb_partition(20)) {
            let exact = solve_planner_equilibrium::<Q>(&p);
            let float = solve_planner_equilibrium::<f64>(&p);
            prop_assert!((float.total_bottom_flow - exact.total_bottom_flow.to_f64()).abs() < 1e-9);
            let run = best_response_iteration_oracle(&p, &vec![0.0; p.len()], 100_000).unwrap();
            prop_assert!((run.solution.total_bottom_flow - float.total_bottom_flow).abs() < 1e-9);
        }
    }
}
