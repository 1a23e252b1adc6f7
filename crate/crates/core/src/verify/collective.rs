use num_traits::{One, Zero};

use crate::equilibrium::{
    best_response, bottom_flow, one_shot_planner_cost, solve_planner_equilibrium, EquilibriumSolution, Partition,
};
use crate::error::Result;
use crate::game::{History, StageRecord};
use crate::num::{q, Scalar, Q};

/// Grid resolution of the alternative-action search.
pub const GRID_POINTS: i64 = 1000;

/// A stage-local alternative of one planner that lowers every planner's cost.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CollectiveWitness {
    pub stage: usize,
    pub planner: usize,
    pub fraction: Q,
    pub fractions: Vec<Q>,
    pub before: Vec<Q>,
    pub after: Vec<Q>,
}

impl CollectiveWitness {
    /// Recomputes both cost vectors from scratch; true iff every planner
    /// is strictly better off.
    pub fn replay(&self, partition: &Partition) -> Result<bool> {
        let mut alt = self.fractions.clone();
        alt[self.planner] = self.fraction.clone();
        let n = partition.len();
        for j in 0..n {
            let before: Q = one_shot_planner_cost(partition, &self.fractions, j)?;
            let after: Q = one_shot_planner_cost(partition, &alt, j)?;
            if before != self.before[j] || after != self.after[j] || after >= before {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageCollectiveCheck {
    pub stage: usize,
    pub bottom_flow: Q,
    pub equilibrium_flow: Q,
    /// Analytic screen: more bottom flow than the planner equilibrium.
    pub flagged: bool,
    pub witness: Option<CollectiveWitness>,
}

impl StageCollectiveCheck {
    pub fn passed(&self) -> bool {
        self.witness.is_none()
    }
}

/// Searches each planner's alternatives on a 1,001-point grid plus its
/// best response for one that strictly lowers every planner's cost.
pub fn check_profile(partition: &Partition, fractions: &[Q], stage: usize) -> Result<StageCollectiveCheck> {
    let eq: EquilibriumSolution<Q> = solve_planner_equilibrium(partition);
    let total: Q = bottom_flow(partition, fractions);
    let n = partition.len();
    let costs: Vec<Q> = (0..n)
        .map(|j| one_shot_planner_cost(partition, fractions, j))
        .collect::<Result<_>>()?;
    let mut best: Option<(Q, usize, Q)> = None;
    for i in 0..n {
        // Moving i changes j's cost by lambda_j alpha_i (lambda'_i - lambda_i),
        // so a planner with nothing on the bottom can never gain.
        if (0..n).any(|j| j != i && fractions[j].is_zero()) {
            continue;
        }
        let alpha = &partition.shares()[i];
        let others = &total - alpha * &fractions[i];
        let own = |l: &Q| alpha * l * l + (&others - Q::one()) * l + Q::one();
        let others_rate = (0..n)
            .filter(|&j| j != i)
            .map(|j| &fractions[j] * alpha)
            .min();
        let mut candidates: Vec<Q> = (0..=GRID_POINTS).map(|k| q(k, GRID_POINTS)).collect();
        candidates.push(best_response(partition, fractions, i)?);
        for l in candidates {
            if l >= fractions[i] {
                continue;
            }
            let own_gain = &costs[i] - own(&l);
            if own_gain <= Q::zero() {
                continue;
            }
            let drop = &fractions[i] - &l;
            let score = match &others_rate {
                Some(r) => own_gain.min(r * &drop),
                None => own_gain,
            };
            if best.as_ref().is_none_or(|(s, _, _)| score > *s) {
                best = Some((score, i, l));
            }
        }
    }
    let witness = match best {
        Some((_, planner, fraction)) => {
            let mut alt = fractions.to_vec();
            alt[planner] = fraction.clone();
            let after = (0..n)
                .map(|j| one_shot_planner_cost(partition, &alt, j))
                .collect::<Result<_>>()?;
            Some(CollectiveWitness {
                stage,
                planner,
                fraction,
                fractions: fractions.to_vec(),
                before: costs,
                after,
            })
        }
        None => None,
    };
    Ok(StageCollectiveCheck {
        stage,
        flagged: total > eq.total_bottom_flow,
        bottom_flow: total,
        equilibrium_flow: eq.total_bottom_flow,
        witness,
    })
}

/// Checks the recommended fractions of one stage on the bottom path.
pub fn check_no_collective_punishment<S: Scalar>(
    record: &StageRecord<S>,
    partition: &Partition,
    bottom_path: usize,
) -> Result<StageCollectiveCheck> {
    let fractions: Vec<Q> = (0..partition.len())
        .map(|i| record.recommended_fraction(i, bottom_path))
        .collect();
    check_profile(partition, &fractions, record.stage)
}

pub fn check_history_collective<S: Scalar>(
    history: &History<S>,
    partition: &Partition,
    bottom_path: usize,
) -> Result<Vec<StageCollectiveCheck>> {
    history
        .records
        .iter()
        .map(|r| check_no_collective_punishment(r, partition, bottom_path))
        .collect()
}
