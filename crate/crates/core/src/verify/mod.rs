//! Finite-family checks of individual rationality, resilience, optimality
//! and the absence of collective punishments, plus the constructive
//! converse that finds a profitable defection when `F < 3/4`.
//!
//! Passing verdicts are evidence over the configured family and horizon,
//! not proofs. Violations always carry a replayable witness.

mod collective;
mod family;
mod report;

pub use collective::{
    check_history_collective, check_no_collective_punishment, check_profile, CollectiveWitness, StageCollectiveCheck,
};
pub use family::{DeviationFamily, PlannerTemplate};
pub use report::{evaluation_to_json, report_to_json, Desideratum, Verdict, VerificationReport};

use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::equilibrium::{solve_planner_equilibrium, three_quarters, EquilibriumSolution};
use crate::error::{Error, Result};
use crate::game::{detect_period, discounted_cost, CarPolicy, DiscountedCost, History, TailMode};
use crate::interval::IntervalSet;
use crate::network::optimal_flow;
use crate::num::{format_q, q, Scalar, Q};
use crate::scenario::{DefectionSpec, Scenario};
use crate::strategies::StrategySpec;

/// A single deviation from the scenario's profile.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Deviation {
    /// Planner `planner`'s cars in `subset` follow `policy` from `start`.
    Car {
        planner: usize,
        segment: usize,
        subset: IntervalSet,
        policy: CarPolicy,
        start: usize,
    },
    /// Planner `planner` replaces its strategy from `start`.
    Planner {
        planner: usize,
        template: PlannerTemplate,
        start: usize,
    },
}

impl Deviation {
    pub fn planner(&self) -> usize {
        match self {
            Deviation::Car { planner, .. } | Deviation::Planner { planner, .. } => *planner,
        }
    }

    pub fn start(&self) -> usize {
        match self {
            Deviation::Car { start, .. } | Deviation::Planner { start, .. } => *start,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Deviation::Car { planner, subset, policy, start, .. } => {
                format!("planner {planner} cars {subset} {} from stage {start}", policy.name())
            }
            Deviation::Planner { planner, template, start } => {
                format!("planner {planner} {} from stage {start}", template.name())
            }
        }
    }

    /// The scenario with this deviation applied.
    pub fn apply(&self, scenario: &Scenario) -> Scenario {
        match self {
            Deviation::Car { planner, subset, policy, start, .. } => scenario.clone().with_defection(DefectionSpec {
                planner: *planner,
                subset: subset.clone(),
                policy: *policy,
                start: *start,
                stages: None,
            }),
            Deviation::Planner { planner, template, start } => {
                let base = scenario.strategies[*planner].clone();
                let spec = template.spec(base, *start);
                scenario.clone().with_strategy(*planner, spec)
            }
        }
    }

    /// Costs borne by the deviating party from `start` on.
    fn costs<S: Scalar>(&self, history: &History<S>) -> Result<Vec<S>> {
        let from = self.start() - 1;
        let all = match self {
            Deviation::Car { planner, subset, .. } => history.subset_costs(*planner, subset)?,
            Deviation::Planner { planner, .. } => history.planner_costs(*planner),
        };
        Ok(all[from..].to_vec())
    }
}

/// Comparison outcome for one deviation at one discount.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Outcome {
    Profitable,
    Unprofitable,
    /// Bound tails overlap; no verdict.
    Undecided,
}

/// One deviation evaluated at one discount; doubles as a witness.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation<S> {
    pub deviation: Deviation,
    pub discount: Q,
    /// Stages simulated after the deviation starts.
    pub horizon: usize,
    pub baseline: DiscountedCost<S>,
    pub deviated: DiscountedCost<S>,
    pub outcome: Outcome,
}

impl<S: Scalar> Evaluation<S> {
    /// Deviated minus baseline cost (lower ends).
    pub fn gap(&self) -> S {
        self.deviated.lower.clone() - self.baseline.lower.clone()
    }
}

/// Largest possible per-unit stage cost: every edge at full flow.
fn cost_ceiling<S: Scalar>(scenario: &Scenario) -> S {
    let ones = vec![S::one(); scenario.network.edges().len()];
    scenario
        .network
        .path_costs(&ones)
        .into_iter()
        .fold(S::zero(), S::max_of)
}

/// Discounts both sequences with periodic tails when both stabilize,
/// otherwise with bound tails.
fn compare<S: Scalar>(base: &[S], dev: &[S], discount: &Q, ceiling: &S) -> Result<(DiscountedCost<S>, DiscountedCost<S>, Outcome)> {
    let d = S::from_q(discount);
    let max_period = base.len() / 3;
    let periodic = detect_period(base, max_period).is_some() && detect_period(dev, max_period).is_some();
    let tail = if periodic {
        TailMode::Periodic { max_period }
    } else {
        TailMode::Bound { c_max: ceiling.clone() }
    };
    let b = discounted_cost(base, &d, &tail)?;
    let v = discounted_cost(dev, &d, &tail)?;
    let outcome = if v.strictly_below(&b) {
        Outcome::Profitable
    } else if v.lower >= b.upper {
        Outcome::Unprofitable
    } else {
        Outcome::Undecided
    };
    Ok((b, v, outcome))
}

/// Stage indices at which deviations start: the empty history plus the
/// stage after each scripted defection ends.
pub fn history_points(scenario: &Scenario) -> Vec<usize> {
    let mut pts = vec![1];
    for d in &scenario.defections {
        if let Some(e) = d.last_deviating_stage() {
            pts.push(e + 1);
        }
    }
    pts.sort_unstable();
    pts.dedup();
    pts
}

fn required_horizon(scenario: &Scenario) -> usize {
    scenario
        .strategies
        .iter()
        .filter_map(|s| s.punishment_horizon(&scenario.partition))
        .max()
        .unwrap_or(0)
        + 1
}

fn check_horizon(scenario: &Scenario, horizon: usize) -> Result<()> {
    let need = required_horizon(scenario);
    if horizon < need {
        return Err(Error::HorizonTooShort(format!(
            "{horizon} stages cannot cover a punishment phase of {} stages",
            need - 1
        )));
    }
    Ok(())
}

fn check_discounts(discounts: &[Q]) -> Result<Vec<Q>> {
    if discounts.is_empty() {
        return Err(Error::InvalidDiscount("empty discount grid".into()));
    }
    let mut grid = discounts.to_vec();
    for d in &grid {
        if *d <= Q::zero() || *d >= Q::one() {
            return Err(Error::InvalidDiscount(format_q(d)));
        }
    }
    grid.sort();
    grid.dedup();
    Ok(grid)
}

/// Runs every deviation, compares it with the shared baseline of its
/// history point, and evaluates it at every grid discount.
fn evaluate_all<S: Scalar>(
    scenario: &Scenario,
    deviations: Vec<Deviation>,
    grid: &[Q],
    horizon: usize,
) -> Result<Vec<Evaluation<S>>> {
    let ceiling: S = cost_ceiling(scenario);
    let mut starts: Vec<usize> = deviations.iter().map(Deviation::start).collect();
    starts.sort_unstable();
    starts.dedup();
    let baselines: Vec<(usize, History<S>)> = starts
        .par_iter()
        .map(|&s| scenario.run::<S>(s - 1 + horizon).map(|h| (s, h)))
        .collect::<Result<_>>()?;
    let per_deviation: Vec<Vec<Evaluation<S>>> = deviations
        .into_par_iter()
        .map(|dev| {
            let start = dev.start();
            let base_hist = &baselines.iter().find(|(s, _)| *s == start).expect("baseline per start").1;
            let base = dev.costs(base_hist)?;
            let hist = dev.apply(scenario).run::<S>(start - 1 + horizon)?;
            let costs = dev.costs(&hist)?;
            grid.iter()
                .map(|d| {
                    let (baseline, deviated, outcome) = compare(&base, &costs, d, &ceiling)?;
                    Ok(Evaluation {
                        deviation: dev.clone(),
                        discount: d.clone(),
                        horizon,
                        baseline,
                        deviated,
                        outcome,
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(per_deviation.into_iter().flatten().collect())
}

/// Shared verdict: violation iff something profits at the largest grid
/// discount; otherwise the threshold is the smallest grid discount from
/// which nothing profits.
fn verdict<S: Scalar>(desideratum: Desideratum, grid: &[Q], evaluations: Vec<Evaluation<S>>) -> VerificationReport<S> {
    let profitable_at = |d: &Q| {
        evaluations
            .iter()
            .any(|e| e.discount == *d && e.outcome == Outcome::Profitable)
    };
    let largest = grid.last().expect("non-empty grid");
    let mut threshold = None;
    for d in grid.iter().rev() {
        if profitable_at(d) {
            break;
        }
        threshold = Some(d.clone());
    }
    let violating = profitable_at(largest);
    let witness = violating.then(|| {
        evaluations
            .iter()
            .find(|e| e.discount == *largest && e.outcome == Outcome::Profitable)
            .cloned()
            .expect("profitable evaluation")
    });
    let sub_threshold = match &threshold {
        Some(t) => evaluations
            .iter()
            .filter(|e| e.discount < *t && e.outcome == Outcome::Profitable)
            .cloned()
            .collect(),
        None => Vec::new(),
    };
    let undecided = evaluations.iter().filter(|e| e.outcome == Outcome::Undecided).count();
    let mut notes = Vec::new();
    if undecided > 0 {
        notes.push(format!("{undecided} comparisons undecided by bound tails"));
    }
    VerificationReport {
        desideratum,
        verdict: if violating { Verdict::Violation } else { Verdict::PassOnFamily },
        witness,
        threshold,
        sub_threshold,
        evaluations,
        notes,
    }
}

/// Car defections of the family at every history point.
pub fn check_individual_rationality<S: Scalar>(
    scenario: &Scenario,
    family: &DeviationFamily,
    discounts: &[Q],
    horizon: usize,
) -> Result<VerificationReport<S>> {
    let grid = check_discounts(discounts)?;
    check_horizon(scenario, horizon)?;
    let mut deviations = Vec::new();
    for start in history_points(scenario) {
        for planner in 0..scenario.partition.len() {
            for (segment, subset) in family.segments()?.into_iter().enumerate() {
                if conflicts(scenario, planner, &subset, start) {
                    continue;
                }
                for policy in &family.car_policies {
                    deviations.push(Deviation::Car {
                        planner,
                        segment: segment + 1,
                        subset: subset.clone(),
                        policy: *policy,
                        start,
                    });
                }
            }
        }
    }
    let evaluations = evaluate_all(scenario, deviations, &grid, horizon)?;
    Ok(verdict(Desideratum::IndividualRationality, &grid, evaluations))
}

/// A scripted defection of the same cars is still running at `start`.
fn conflicts(scenario: &Scenario, planner: usize, subset: &IntervalSet, start: usize) -> bool {
    scenario
        .defections
        .iter()
        .any(|d| d.planner == planner && d.subset.overlaps(subset) && d.end().is_none_or(|e| e >= start))
}

/// Planner templates of the family at every history point.
pub fn check_resilience<S: Scalar>(
    scenario: &Scenario,
    family: &DeviationFamily,
    discounts: &[Q],
    horizon: usize,
) -> Result<VerificationReport<S>> {
    let grid = check_discounts(discounts)?;
    check_horizon(scenario, horizon)?;
    let eq: EquilibriumSolution<Q> = solve_planner_equilibrium(&scenario.partition);
    let mut deviations = Vec::new();
    for start in history_points(scenario) {
        for planner in 0..scenario.partition.len() {
            for template in family.planner_templates(&eq.lambdas[planner]) {
                deviations.push(Deviation::Planner { planner, template, start });
            }
        }
    }
    let evaluations = evaluate_all(scenario, deviations, &grid, horizon)?;
    Ok(verdict(Desideratum::Resilience, &grid, evaluations))
}

/// Outcome of the optimality check.
#[derive(Clone, Debug, PartialEq)]
pub struct OptimalityReport<S> {
    pub passed: bool,
    pub optimum: S,
    /// Stages after this one must be optimal.
    pub settle_after: usize,
    /// First later stage whose cost is not optimal.
    pub first_failure: Option<(usize, S)>,
}

/// `c^k = c_OPT` for every `k` beyond the last punishment stage the
/// scripts can cause.
pub fn check_optimality<S: Scalar>(scenario: &Scenario, horizon: usize) -> Result<OptimalityReport<S>> {
    let mut deviating_stages = 0;
    let mut last = 0;
    for d in &scenario.defections {
        let end = d.last_deviating_stage().ok_or_else(|| {
            Error::HorizonTooShort("a scripted defection never ends; optimality needs finite scripts".into())
        })?;
        deviating_stages += end + 1 - d.start;
        last = last.max(end);
    }
    let response = scenario
        .strategies
        .iter()
        .filter_map(|s| s.punishment_horizon(&scenario.partition))
        .max()
        .unwrap_or(0);
    let settle_after = last + deviating_stages * response;
    if settle_after >= horizon {
        return Err(Error::HorizonTooShort(format!(
            "costs can stay non-optimal through stage {settle_after}, horizon is {horizon}"
        )));
    }
    let (_, optimum) = optimal_flow::<S>(&scenario.network, 1000)?;
    let history = scenario.run::<S>(horizon)?;
    let first_failure = history
        .records
        .iter()
        .skip(settle_after)
        .find(|r| !r.total_cost.near(&optimum))
        .map(|r| (r.stage, r.total_cost.clone()));
    Ok(OptimalityReport {
        passed: first_failure.is_none(),
        optimum,
        settle_after,
        first_failure,
    })
}

/// Re-runs a witness and returns fresh `(baseline, deviated)` costs.
pub fn replay<S: Scalar>(scenario: &Scenario, witness: &Evaluation<S>) -> Result<(DiscountedCost<S>, DiscountedCost<S>)> {
    let dev = &witness.deviation;
    let k = dev.start() - 1 + witness.horizon;
    let base = dev.costs(&scenario.run::<S>(k)?)?;
    let costs = dev.costs(&dev.apply(scenario).run::<S>(k)?)?;
    let (b, v, _) = compare(&base, &costs, &witness.discount, &cost_ceiling(scenario))?;
    Ok((b, v))
}

/// The converse construction: always-bottom defections of every segment
/// `[(j-1)/M, j/M)` of every planner, from the first stage on.
pub fn find_profitable_defection<S: Scalar>(
    scenario: &Scenario,
    segments: usize,
    discount: &Q,
    horizon: usize,
) -> Result<Option<Evaluation<S>>> {
    check_discounts(std::slice::from_ref(discount))?;
    let eq: EquilibriumSolution<Q> = solve_planner_equilibrium(&scenario.partition);
    if segments == 0 {
        return Err(Error::SegmentCountTooSmall("M = 0".into()));
    }
    let reach = &eq.total_bottom_flow + q(1, segments as i64);
    if reach >= three_quarters() {
        return Err(Error::SegmentCountTooSmall(format_q(&reach)));
    }
    let family = DeviationFamily { segments, ..DeviationFamily::default() };
    let mut deviations = Vec::new();
    for planner in 0..scenario.partition.len() {
        for (j, subset) in family.segments()?.into_iter().enumerate() {
            deviations.push(Deviation::Car {
                planner,
                segment: j + 1,
                subset,
                policy: CarPolicy::AlwaysBottom,
                start: 1,
            });
        }
    }
    let evaluations = evaluate_all::<S>(scenario, deviations, std::slice::from_ref(discount), horizon)?;
    Ok(evaluations.into_iter().find(|e| e.outcome == Outcome::Profitable))
}

/// Convenience: the strategy spec a profile plays for `planner`.
pub fn strategy_label(scenario: &Scenario, planner: usize) -> String {
    scenario.strategies.get(planner).map_or_else(String::new, StrategySpec::label)
}
