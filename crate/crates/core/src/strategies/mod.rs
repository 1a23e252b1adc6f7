//! Planner strategies for Pigou's network.

mod baseline;
mod punishment;
mod redemption;

pub use baseline::{MyopicStrategy, OneShotStrategy, StaticStrategy, SwitchStrategy};
pub use punishment::{PunishmentLength, PunishmentState, PunishmentStrategy};
pub use redemption::{LedgerEntry, RedemptionLedger, RedemptionStrategy};

use num_traits::{One, ToPrimitive, Zero};

use crate::equilibrium::{solve_planner_equilibrium, three_quarters, EquilibriumSolution, Partition};
use crate::error::{Error, Result};
use crate::game::{LocalObservation, PathMap, PlannerStrategy};
use crate::interval::{modulo, IntervalSet};
use crate::network::{Network, PigouPaths};
use crate::num::{floor_plus_one, format_q, q, Scalar, Q};

/// Minimal `N` with `N (F - 3/4) > 1/2`.
pub fn compute_punishment_length(flow: &Q) -> Result<usize> {
    let margin = flow - three_quarters();
    if margin <= Q::zero() {
        return Err(Error::EdgeCaseRegime(format_q(flow)));
    }
    strict_multiple(&margin)
}

/// Minimal `N` with `N (F' - F) > 1/2` and `N (1 - lambda_max) / 4 > 1/2`.
pub fn edge_case_punishment_length(observed: &Q, flow: &Q, lambda_max: &Q) -> Result<usize> {
    if *lambda_max >= Q::one() {
        return Err(Error::EdgeCaseUnachievable);
    }
    let excess = observed - flow;
    if excess <= Q::zero() {
        return Err(Error::InvalidFlow(format!(
            "observed flow {} does not exceed {}",
            format_q(observed),
            format_q(flow)
        )));
    }
    let n1 = strict_multiple(&excess)?;
    let n2 = strict_multiple(&((Q::one() - lambda_max) / Q::from_integer(4.into())))?;
    Ok(n1.max(n2))
}

/// Minimal `N` with `N x > 1/2` for positive `x`.
fn strict_multiple(x: &Q) -> Result<usize> {
    floor_plus_one(&(q(1, 2) / x))
        .to_usize()
        .ok_or_else(|| Error::InvalidFlow("punishment length overflows".into()))
}

/// Bottom set `[b, b + lambda) mod 1` and the advanced pointer.
pub fn rotate_assignment(pointer: &Q, fraction: &Q) -> (IntervalSet, Q) {
    let bottom = IntervalSet::arc(pointer, fraction);
    (bottom, modulo(&(pointer + fraction), &Q::one()))
}

/// A planner's rotating pointer over its own cars.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rotor {
    pub pointer: Q,
    pub paths: PigouPaths,
}

impl Rotor {
    pub fn new(paths: PigouPaths) -> Self {
        Rotor { pointer: Q::zero(), paths }
    }

    pub fn emit(&mut self, fraction: &Q) -> PathMap {
        let (bottom, next) = rotate_assignment(&self.pointer, fraction);
        self.pointer = next;
        PathMap::split(bottom, self.paths)
    }
}

/// What a strategy needs to know about the game at construction.
#[derive(Clone, Copy, Debug)]
pub struct BuildContext<'a> {
    pub network: &'a Network,
    pub partition: &'a Partition,
    pub planner: usize,
    pub identify: bool,
}

impl BuildContext<'_> {
    pub fn paths(&self) -> Result<PigouPaths> {
        self.network.pigou_paths()
    }

    /// Edge whose flow equals the bottom path's flow.
    pub fn bottom_edge(&self) -> Result<usize> {
        let paths = self.paths()?;
        Ok(self.network.paths()[paths.bottom][0])
    }

    pub fn equilibrium(&self) -> EquilibriumSolution<Q> {
        solve_planner_equilibrium(self.partition)
    }
}

/// Detection slack: zero when comparisons are exact.
pub(crate) fn detection_epsilon<S: Scalar>() -> S {
    if S::EXACT {
        S::zero()
    } else {
        S::tolerance()
    }
}

pub(crate) fn observed_bottom<S: Scalar>(obs: &LocalObservation<S>, bottom_edge: usize) -> S {
    obs.edge_flows[bottom_edge].clone()
}

/// Data description of a planner strategy; builds fresh state on demand so
/// reruns are reproducible.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum StrategySpec {
    /// 50/50 rotation with equilibrium punishment phases.
    Punishment { length: Option<usize> },
    /// Punishment with lengths scaled by the observed excess (`F = 3/4`).
    EdgeCase,
    /// Gradual load increases that identified defectors can redeem.
    Redemption { delta: Q },
    Static { fraction: Q },
    /// Static at the planner's own one-shot equilibrium fraction.
    Equilibrium,
    Myopic { inertia: Q },
    /// `base` up to `stage - 1`, then a fresh `then`.
    SwitchAt {
        base: Box<StrategySpec>,
        stage: usize,
        then: Box<StrategySpec>,
    },
    /// `base` everywhere except `fraction` at `stage`.
    OneShot {
        base: Box<StrategySpec>,
        stage: usize,
        fraction: Q,
    },
}

pub fn default_delta() -> Q {
    q(1, 100)
}

impl StrategySpec {
    pub fn kind(&self) -> &'static str {
        match self {
            StrategySpec::Punishment { .. } => "punishment",
            StrategySpec::EdgeCase => "edge_case",
            StrategySpec::Redemption { .. } => "redemption",
            StrategySpec::Static { .. } => "static",
            StrategySpec::Equilibrium => "equilibrium",
            StrategySpec::Myopic { .. } => "myopic",
            StrategySpec::SwitchAt { .. } => "switch",
            StrategySpec::OneShot { .. } => "one_shot",
        }
    }

    /// Short human label.
    pub fn label(&self) -> String {
        match self {
            StrategySpec::Punishment { length: Some(n) } => format!("punishment(N={n})"),
            StrategySpec::Static { fraction } => format!("static({})", format_q(fraction)),
            StrategySpec::Myopic { inertia } if !inertia.is_zero() => {
                format!("myopic(inertia={})", format_q(inertia))
            }
            StrategySpec::Redemption { delta } => format!("redemption(delta={})", format_q(delta)),
            StrategySpec::SwitchAt { stage, then, .. } => format!("{} from stage {stage}", then.label()),
            StrategySpec::OneShot { stage, fraction, .. } => {
                format!("one-shot {} at stage {stage}", format_q(fraction))
            }
            other => other.kind().to_string(),
        }
    }

    /// Longest punishment phase a single detection can trigger, if bounded
    /// in advance.
    pub fn punishment_horizon(&self, partition: &Partition) -> Option<usize> {
        let eq: EquilibriumSolution<Q> = solve_planner_equilibrium(partition);
        match self {
            StrategySpec::Punishment { length: Some(n) } => Some(n + 1),
            StrategySpec::Punishment { length: None } | StrategySpec::Redemption { .. } => {
                compute_punishment_length(&eq.total_bottom_flow).ok().map(|n| n + 1)
            }
            StrategySpec::SwitchAt { base, then, .. } => {
                match (base.punishment_horizon(partition), then.punishment_horizon(partition)) {
                    (Some(a), Some(b)) => Some(a.max(b)),
                    (a, b) => a.or(b),
                }
            }
            StrategySpec::OneShot { base, .. } => base.punishment_horizon(partition),
            _ => None,
        }
    }

    pub fn build<S: Scalar>(&self, ctx: &BuildContext<'_>) -> Result<Box<dyn PlannerStrategy<S>>> {
        let check_fraction = |f: &Q| {
            if *f < Q::zero() || *f > Q::one() {
                Err(Error::InvalidFraction(format_q(f)))
            } else {
                Ok(())
            }
        };
        Ok(match self {
            StrategySpec::Punishment { length } => {
                let len = match length {
                    Some(n) => PunishmentLength::Fixed(*n),
                    None => PunishmentLength::Standard,
                };
                Box::new(PunishmentStrategy::new(ctx, len)?)
            }
            StrategySpec::EdgeCase => Box::new(PunishmentStrategy::new(ctx, PunishmentLength::EdgeCase)?),
            StrategySpec::Redemption { delta } => Box::new(RedemptionStrategy::new(ctx, delta.clone())?),
            StrategySpec::Static { fraction } => {
                check_fraction(fraction)?;
                Box::new(StaticStrategy::new(ctx.paths()?, fraction.clone()))
            }
            StrategySpec::Equilibrium => {
                let lambda = ctx.equilibrium().lambdas[ctx.planner].clone();
                Box::new(StaticStrategy::new(ctx.paths()?, lambda))
            }
            StrategySpec::Myopic { inertia } => {
                check_fraction(inertia)?;
                if inertia.is_one() {
                    return Err(Error::InvalidFraction("myopic inertia must be below 1".into()));
                }
                Box::new(MyopicStrategy::new(ctx, inertia.clone())?)
            }
            StrategySpec::SwitchAt { base, stage, then } => Box::new(SwitchStrategy::new(
                base.build(ctx)?,
                *stage,
                then.build(ctx)?,
            )),
            StrategySpec::OneShot { base, stage, fraction } => {
                check_fraction(fraction)?;
                Box::new(OneShotStrategy::new(base.build(ctx)?, *stage, fraction.clone(), ctx.paths()?))
            }
        })
    }
}
