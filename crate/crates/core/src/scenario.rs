//! A complete, data-only description of a repeated routing game.

use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::equilibrium::Partition;
use crate::error::{Error, Result};
use crate::game::{run_game, CarPolicy, DefectionScript, History, PlannerStrategy};
use crate::interval::IntervalSet;
use crate::network::Network;
use crate::num::{q, NumberMode, Scalar, Q};
use crate::strategies::{BuildContext, StrategySpec};

/// Scripted car defection.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DefectionSpec {
    pub planner: usize,
    pub subset: IntervalSet,
    pub policy: CarPolicy,
    pub start: usize,
    /// Active stages; `None` keeps the script running to the horizon.
    pub stages: Option<usize>,
}

impl DefectionSpec {
    pub fn end(&self) -> Option<usize> {
        self.stages.map(|m| self.start + m - 1)
    }

    /// Last stage in which the cars can leave their recommendation.
    pub fn last_deviating_stage(&self) -> Option<usize> {
        let policy_end = match self.policy {
            CarPolicy::BottomThenComply(m) => Some(self.start + m.max(1) - 1),
            _ => None,
        };
        match (self.end(), policy_end) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }

    fn build<S: Scalar>(&self, network: &Network) -> Result<DefectionScript<S>> {
        Ok(DefectionScript {
            planner: self.planner,
            subset: self.subset.clone(),
            policy: self.policy.build(network.pigou_paths().ok())?,
            start: self.start,
            end: self.end(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scenario {
    pub network: Network,
    pub partition: Partition,
    /// One spec per planner.
    pub strategies: Vec<StrategySpec>,
    pub defections: Vec<DefectionSpec>,
    pub horizon: usize,
    pub discounts: Vec<Q>,
    pub segments: usize,
    pub mode: NumberMode,
    pub seed: u64,
    pub identify_defections: bool,
}

pub const DEFAULT_HORIZON: usize = 120;
pub const DEFAULT_SEGMENTS: usize = 20;

pub fn default_discounts() -> Vec<Q> {
    vec![q(1, 2), q(9, 10), q(99, 100), q(999, 1000)]
}

impl Scenario {
    /// Pigou's network with every planner running `strategy`.
    pub fn pigou(partition: Partition, strategy: StrategySpec) -> Self {
        let n = partition.len();
        Scenario {
            network: Network::pigou(),
            partition,
            strategies: vec![strategy; n],
            defections: Vec::new(),
            horizon: DEFAULT_HORIZON,
            discounts: default_discounts(),
            segments: DEFAULT_SEGMENTS,
            mode: NumberMode::Rational,
            seed: 0,
            identify_defections: false,
        }
    }

    pub fn with_strategy(mut self, planner: usize, spec: StrategySpec) -> Self {
        self.strategies[planner] = spec;
        self
    }

    pub fn with_defection(mut self, defection: DefectionSpec) -> Self {
        self.defections.push(defection);
        self
    }

    pub fn with_horizon(mut self, horizon: usize) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn with_identification(mut self, on: bool) -> Self {
        self.identify_defections = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.partition.len();
        if self.strategies.len() != n {
            return Err(Error::InvalidPartition(format!(
                "{} strategies for {n} planners",
                self.strategies.len()
            )));
        }
        if self.horizon == 0 {
            return Err(Error::HorizonTooShort("horizon must be at least 1".into()));
        }
        for d in &self.discounts {
            if *d <= Q::zero() || *d >= Q::from_integer(1.into()) {
                return Err(Error::InvalidDiscount(crate::num::format_q(d)));
            }
        }
        for (k, d) in self.defections.iter().enumerate() {
            if d.planner >= n {
                return Err(Error::PlannerOutOfRange { index: d.planner, planners: n });
            }
            if d.subset.measure().is_zero() {
                return Err(Error::InvalidDefection(format!("defection {k} has an empty subset")));
            }
            if d.start == 0 || d.stages == Some(0) {
                return Err(Error::InvalidDefection(format!("defection {k} has no active stage")));
            }
            if let CarPolicy::AlwaysPath(p) = d.policy {
                if p >= self.network.paths().len() {
                    return Err(Error::InvalidDefection(format!("defection {k} names unknown path {p}")));
                }
            }
        }
        for (a, da) in self.defections.iter().enumerate() {
            for db in &self.defections[a + 1..] {
                if da.planner == db.planner && da.subset.overlaps(&db.subset) && windows_meet(da, db) {
                    return Err(Error::ConflictingDefections {
                        planner: da.planner,
                        stage: da.start.max(db.start),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn build_strategies<S: Scalar>(&self) -> Result<Vec<Box<dyn PlannerStrategy<S>>>> {
        self.strategies
            .iter()
            .enumerate()
            .map(|(i, spec)| {
                spec.build(&BuildContext {
                    network: &self.network,
                    partition: &self.partition,
                    planner: i,
                    identify: self.identify_defections,
                })
            })
            .collect()
    }

    /// Plays the scenario for `horizon` stages from fresh state.
    pub fn run<S: Scalar>(&self, horizon: usize) -> Result<History<S>> {
        self.validate()?;
        let mut strategies = self.build_strategies::<S>()?;
        let mut scripts = self
            .defections
            .iter()
            .map(|d| d.build::<S>(&self.network))
            .collect::<Result<Vec<_>>>()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        run_game(
            &self.network,
            &self.partition,
            &mut strategies,
            &mut scripts,
            horizon,
            self.identify_defections,
            &mut rng,
        )
    }

    /// Last stage any scripted defection can deviate in.
    pub fn last_scripted_stage(&self) -> Option<Option<usize>> {
        self.defections.iter().map(DefectionSpec::last_deviating_stage).reduce(|a, b| match (a, b) {
            (Some(x), Some(y)) => Some(x.max(y)),
            _ => None,
        })
    }
}

fn windows_meet(a: &DefectionSpec, b: &DefectionSpec) -> bool {
    let before = |x: &DefectionSpec, y: &DefectionSpec| x.end().is_some_and(|e| e < y.start);
    !(before(a, b) || before(b, a))
}
