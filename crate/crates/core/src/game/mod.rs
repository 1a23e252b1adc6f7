//! Repeated routing game: stage execution, defections and history.

mod assignment;
mod discount;
mod trace;

pub use assignment::{PathMap, StageAssignment};
pub use discount::{detect_period, discounted_cost, DiscountedCost, TailMode};
pub use trace::{write_csv_summary, write_jsonl_trace, TraceMeta};

use num_traits::{One, Zero};
use rand_chacha::ChaCha8Rng;

use crate::equilibrium::Partition;
use crate::error::{Error, Result};
use crate::interval::IntervalSet;
use crate::network::{Network, PigouPaths};
use crate::num::{Scalar, Q};

/// Cars of `planner` in `subset` followed `taken` instead of their
/// recommendations during one stage.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AppliedDefection {
    pub planner: usize,
    pub subset: IntervalSet,
    pub taken: PathMap,
}

/// A defection seen through the identification oracle.
#[derive(Clone, Debug, PartialEq)]
pub struct IdentifiedDefection<S> {
    pub planner: usize,
    pub subset: IntervalSet,
    /// Per-car cost of the recommendation minus per-car cost paid.
    pub gain: S,
    /// Global flow moved onto (positive) or off each path.
    pub path_shift: Vec<S>,
}

/// Everything that happened in one stage.
#[derive(Clone, Debug, PartialEq)]
pub struct StageRecord<S> {
    pub stage: usize,
    pub assignments: Vec<StageAssignment>,
    pub defections: Vec<AppliedDefection>,
    pub edge_flows: Vec<S>,
    pub path_costs: Vec<S>,
    pub total_cost: S,
    pub planner_costs: Vec<S>,
}

impl<S: Scalar> StageRecord<S> {
    /// What planner `i`'s cars actually did.
    pub fn effective_map(&self, planner: usize) -> PathMap {
        self.defections
            .iter()
            .filter(|d| d.planner == planner)
            .fold(self.assignments[planner].clone(), |m, d| m.overlay(&d.taken))
    }

    /// Recommended (not realized) fraction of planner `i` on `path`.
    pub fn recommended_fraction(&self, planner: usize, path: usize) -> Q {
        self.assignments[planner].measure_on(path)
    }

    /// Flow on a path whose edges are not shared with other paths.
    pub fn path_flow(&self, network: &Network, path: usize) -> S {
        network.paths()[path]
            .first()
            .map_or_else(S::zero, |&e| self.edge_flows[e].clone())
    }

    /// Defections whose cars did something other than recommended, with
    /// their per-car gain.
    pub fn identify(&self, partition: &Partition) -> Vec<IdentifiedDefection<S>> {
        let n_paths = self.path_costs.len();
        self.defections
            .iter()
            .filter(|d| d.taken != self.assignments[d.planner].restrict(&d.subset))
            .map(|d| {
                let rec = self.assignments[d.planner].restrict(&d.subset);
                let alpha: S = partition.share(d.planner);
                let path_shift = (0..n_paths)
                    .map(|p| alpha.clone() * S::from_q(&(d.taken.measure_on(p) - rec.measure_on(p))))
                    .collect();
                IdentifiedDefection {
                    planner: d.planner,
                    subset: d.subset.clone(),
                    gain: self.map_cost(&rec) - self.map_cost(&d.taken),
                    path_shift,
                }
            })
            .collect()
    }

    /// Average cost of the cars in a map's domain.
    fn map_cost(&self, map: &PathMap) -> S {
        // Maps are disjoint, so the domain measure is the sum of the pieces.
        let measures: Vec<(usize, Q)> = map.pieces().map(|(p, s)| (p, s.measure())).collect();
        let size: Q = measures.iter().map(|(_, m)| m).sum();
        if size.is_zero() {
            return S::zero();
        }
        let sum: S = measures
            .iter()
            .map(|(p, m)| S::from_q(m) * self.path_costs[*p].clone())
            .sum();
        if size.is_one() {
            sum
        } else {
            sum / S::from_q(&size)
        }
    }
}

/// Average stage cost of planner `i`'s cars in `subset`.
pub fn subset_cost<S: Scalar>(record: &StageRecord<S>, planner: usize, subset: &IntervalSet) -> Result<S> {
    if planner >= record.assignments.len() {
        return Err(Error::PlannerOutOfRange {
            index: planner,
            planners: record.assignments.len(),
        });
    }
    if subset.measure().is_zero() {
        return Err(Error::ZeroMeasure);
    }
    Ok(record.map_cost(&record.effective_map(planner).restrict(subset)))
}

/// Executes one stage. `defections` pairs a planner with the path map its
/// defecting cars follow; the map's domain is the defecting subset.
pub fn run_stage<S: Scalar>(
    network: &Network,
    partition: &Partition,
    stage: usize,
    assignments: Vec<StageAssignment>,
    defections: Vec<(usize, PathMap)>,
) -> Result<StageRecord<S>> {
    let n = partition.len();
    if assignments.len() != n {
        return Err(Error::InvalidPartition(format!(
            "{} assignments for {n} planners",
            assignments.len()
        )));
    }
    let n_paths = network.paths().len();
    for (i, a) in assignments.iter().enumerate() {
        check_map(a, n_paths).map_err(|reason| Error::InvalidAssignment {
            planner: i,
            stage,
            reason,
        })?;
        if !a.covers_unit() {
            return Err(Error::InvalidAssignment {
                planner: i,
                stage,
                reason: "pieces do not partition [0,1)".into(),
            });
        }
    }
    let mut applied: Vec<AppliedDefection> = Vec::with_capacity(defections.len());
    for (planner, taken) in defections {
        if planner >= n {
            return Err(Error::PlannerOutOfRange { index: planner, planners: n });
        }
        check_map(&taken, n_paths).map_err(Error::InvalidDefection)?;
        if !taken.is_disjoint() {
            return Err(Error::InvalidDefection("defection map pieces overlap".into()));
        }
        let subset = taken.domain();
        if applied
            .iter()
            .any(|d| d.planner == planner && d.subset.overlaps(&subset))
        {
            return Err(Error::ConflictingDefections { planner, stage });
        }
        applied.push(AppliedDefection { planner, subset, taken });
    }

    let mut record = StageRecord {
        stage,
        assignments,
        defections: applied,
        edge_flows: Vec::new(),
        path_costs: Vec::new(),
        total_cost: S::zero(),
        planner_costs: Vec::new(),
    };
    let effective: Vec<PathMap> = (0..n).map(|i| record.effective_map(i)).collect();
    let mut weights = vec![S::zero(); n_paths];
    for (i, m) in effective.iter().enumerate() {
        let alpha: S = partition.share(i);
        for (p, set) in m.pieces() {
            weights[p] = weights[p].clone() + alpha.clone() * S::from_q(&set.measure());
        }
    }
    let flows = network.edge_flows(&weights);
    let edge_costs = network.edge_costs(&flows);
    record.total_cost = flows
        .iter()
        .zip(&edge_costs)
        .map(|(f, c)| f.clone() * c.clone())
        .sum();
    record.path_costs = network.path_costs(&flows);
    record.planner_costs = effective.iter().map(|m| record.map_cost(m)).collect();
    record.edge_flows = flows;
    Ok(record)
}

fn check_map(map: &PathMap, n_paths: usize) -> std::result::Result<(), String> {
    match map.max_path() {
        Some(p) if p >= n_paths => Err(format!("unknown path id {p}")),
        _ => Ok(()),
    }
}

/// What a planner knows about one past stage.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalObservation<S> {
    pub stage: usize,
    pub recommendation: StageAssignment,
    pub edge_flows: Vec<S>,
    /// Present only when the scenario identifies defectors.
    pub identified: Option<Vec<IdentifiedDefection<S>>>,
}

/// What a group of defecting cars knows about one past stage.
#[derive(Clone, Debug, PartialEq)]
pub struct DefectorObservation<S> {
    pub stage: usize,
    /// Their planner's recommendation restricted to the group.
    pub recommended: PathMap,
    pub edge_flows: Vec<S>,
}

/// Inputs to a planner decision at `stage`.
pub struct DecisionContext<'a, S> {
    pub planner: usize,
    pub stage: usize,
    pub history: &'a [LocalObservation<S>],
}

pub trait PlannerStrategy<S: Scalar>: Send {
    fn decide(&mut self, ctx: &DecisionContext<'_, S>, rng: &mut ChaCha8Rng) -> Result<StageAssignment>;
}

/// Inputs to a defection policy at `stage`.
pub struct DefectorContext<'a, S> {
    pub stage: usize,
    /// First stage of the script.
    pub start: usize,
    pub subset: &'a IntervalSet,
    /// This stage's recommendation for the group.
    pub recommended: &'a PathMap,
    pub history: &'a [DefectorObservation<S>],
}

pub trait DefectionPolicy<S: Scalar>: Send {
    /// Paths for the group, or `None` to follow recommendations.
    fn act(&mut self, ctx: &DefectorContext<'_, S>) -> Option<PathMap>;
}

/// Shipped car policies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CarPolicy {
    AlwaysBottom,
    AlwaysTop,
    /// Bottom for the first `m` active stages, then comply.
    BottomThenComply(usize),
    /// Fixed path id, for networks other than Pigou's.
    AlwaysPath(usize),
}

impl CarPolicy {
    pub fn name(&self) -> String {
        match self {
            CarPolicy::AlwaysBottom => "always-bottom".into(),
            CarPolicy::AlwaysTop => "always-top".into(),
            CarPolicy::BottomThenComply(m) => format!("bottom-for-{m}"),
            CarPolicy::AlwaysPath(p) => format!("always-path-{p}"),
        }
    }

    pub fn build<S: Scalar>(&self, paths: Option<PigouPaths>) -> Result<Box<dyn DefectionPolicy<S>>> {
        let pigou = || paths.ok_or_else(|| Error::NotPigou("car policy names the bottom path".into()));
        Ok(match *self {
            CarPolicy::AlwaysBottom => Box::new(FixedPath { path: pigou()?.bottom, stages: None }),
            CarPolicy::AlwaysTop => Box::new(FixedPath { path: pigou()?.top, stages: None }),
            CarPolicy::BottomThenComply(m) => Box::new(FixedPath { path: pigou()?.bottom, stages: Some(m) }),
            CarPolicy::AlwaysPath(p) => Box::new(FixedPath { path: p, stages: None }),
        })
    }
}

struct FixedPath {
    path: usize,
    stages: Option<usize>,
}

impl<S: Scalar> DefectionPolicy<S> for FixedPath {
    fn act(&mut self, ctx: &DefectorContext<'_, S>) -> Option<PathMap> {
        match self.stages {
            Some(m) if ctx.stage >= ctx.start + m => None,
            _ => Some(PathMap::uniform(ctx.subset.clone(), self.path)),
        }
    }
}

/// A defection script ready to run.
pub struct DefectionScript<S: Scalar> {
    pub planner: usize,
    pub subset: IntervalSet,
    pub policy: Box<dyn DefectionPolicy<S>>,
    pub start: usize,
    /// Last active stage; `None` runs to the horizon.
    pub end: Option<usize>,
}

impl<S: Scalar> DefectionScript<S> {
    pub fn is_active(&self, stage: usize) -> bool {
        stage >= self.start && self.end.is_none_or(|e| stage <= e)
    }
}

/// Ordered stage records `1..=K`.
#[derive(Clone, Debug, PartialEq)]
pub struct History<S> {
    pub records: Vec<StageRecord<S>>,
}

impl<S: Scalar> History<S> {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn total_costs(&self) -> Vec<S> {
        self.records.iter().map(|r| r.total_cost.clone()).collect()
    }

    pub fn planner_costs(&self, planner: usize) -> Vec<S> {
        self.records
            .iter()
            .map(|r| r.planner_costs[planner].clone())
            .collect()
    }

    pub fn subset_costs(&self, planner: usize, subset: &IntervalSet) -> Result<Vec<S>> {
        self.records
            .iter()
            .map(|r| subset_cost(r, planner, subset))
            .collect()
    }
}

/// Plays `horizon` stages. Each strategy sees its own local history; each
/// defection policy sees what its group observed.
pub fn run_game<S: Scalar>(
    network: &Network,
    partition: &Partition,
    strategies: &mut [Box<dyn PlannerStrategy<S>>],
    defections: &mut [DefectionScript<S>],
    horizon: usize,
    identify: bool,
    rng: &mut ChaCha8Rng,
) -> Result<History<S>> {
    let n = partition.len();
    if strategies.len() != n {
        return Err(Error::InvalidPartition(format!(
            "{} strategies for {n} planners",
            strategies.len()
        )));
    }
    for d in defections.iter() {
        if d.planner >= n {
            return Err(Error::PlannerOutOfRange { index: d.planner, planners: n });
        }
        if d.subset.measure().is_zero() {
            return Err(Error::InvalidDefection("subset has zero measure".into()));
        }
    }
    let mut local: Vec<Vec<LocalObservation<S>>> = vec![Vec::new(); n];
    let mut seen: Vec<Vec<DefectorObservation<S>>> = vec![Vec::new(); defections.len()];
    let mut records = Vec::with_capacity(horizon);
    for stage in 1..=horizon {
        let mut assignments = Vec::with_capacity(n);
        for (i, s) in strategies.iter_mut().enumerate() {
            let ctx = DecisionContext { planner: i, stage, history: &local[i] };
            assignments.push(s.decide(&ctx, rng)?);
        }
        let mut active = Vec::new();
        for (d, obs) in defections.iter_mut().zip(&seen) {
            if !d.is_active(stage) {
                continue;
            }
            let Some(rec) = assignments.get(d.planner) else { continue };
            let recommended = rec.restrict(&d.subset);
            let ctx = DefectorContext {
                stage,
                start: d.start,
                subset: &d.subset,
                recommended: &recommended,
                history: obs,
            };
            if let Some(taken) = d.policy.act(&ctx) {
                if taken.domain() != d.subset {
                    return Err(Error::InvalidDefection(format!(
                        "policy for planner {} at stage {stage} does not cover its subset",
                        d.planner
                    )));
                }
                active.push((d.planner, taken));
            }
        }
        let record: StageRecord<S> = run_stage(network, partition, stage, assignments, active)?;
        let identified = identify.then(|| record.identify(partition));
        for (i, hist) in local.iter_mut().enumerate() {
            hist.push(LocalObservation {
                stage,
                recommendation: record.assignments[i].clone(),
                edge_flows: record.edge_flows.clone(),
                identified: identified.clone(),
            });
        }
        for (d, obs) in defections.iter().zip(seen.iter_mut()) {
            obs.push(DefectorObservation {
                stage,
                recommended: record.assignments[d.planner].restrict(&d.subset),
                edge_flows: record.edge_flows.clone(),
            });
        }
        records.push(record);
    }
    Ok(History { records })
}
