use num_traits::{One, Zero};
use rand_chacha::ChaCha8Rng;

use super::{
    compute_punishment_length, detection_epsilon, edge_case_punishment_length, observed_bottom, BuildContext, Rotor,
};
use crate::equilibrium::{one_half, three_quarters};
use crate::error::{Error, Result};
use crate::game::{DecisionContext, PlannerStrategy, StageAssignment};
use crate::num::{format_q, Scalar, Q};

/// How many equilibrium stages a detection adds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PunishmentLength {
    /// `N + 1` with `N` from the equilibrium flow; requires `F > 3/4`.
    Standard,
    /// `N + 1` from the observed excess; requires `F = 3/4` and no planner
    /// fully on the bottom path.
    EdgeCase,
    /// `N + 1` for a caller-chosen `N`, in any regime.
    Fixed(usize),
}

/// Per-planner bookkeeping of the optimal-with-punishment profile.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PunishmentState {
    pub rotor: Rotor,
    pub counter: usize,
    pub lambdas: Vec<Q>,
    pub flow: Q,
    /// Total bottom flow the profile prescribed in the last stage.
    pub prescribed: Q,
    pub detections: usize,
}

pub struct PunishmentStrategy {
    pub state: PunishmentState,
    planner: usize,
    bottom_edge: usize,
    length: PunishmentLength,
    lambda_max: Q,
}

impl PunishmentStrategy {
    pub fn new(ctx: &BuildContext<'_>, length: PunishmentLength) -> Result<Self> {
        let eq = ctx.equilibrium();
        let flow = eq.total_bottom_flow.clone();
        let lambda_max = eq.lambdas.iter().max().cloned().unwrap_or_else(Q::zero);
        match length {
            PunishmentLength::Standard => {
                compute_punishment_length(&flow)?;
            }
            PunishmentLength::EdgeCase => {
                if flow != three_quarters() {
                    return Err(Error::InvalidFlow(format!(
                        "edge-case strategy needs F = 3/4, got {}",
                        format_q(&flow)
                    )));
                }
                if lambda_max.is_one() {
                    return Err(Error::EdgeCaseUnachievable);
                }
            }
            PunishmentLength::Fixed(_) => {}
        }
        Ok(PunishmentStrategy {
            state: PunishmentState {
                rotor: Rotor::new(ctx.paths()?),
                counter: 0,
                lambdas: eq.lambdas,
                flow,
                prescribed: one_half(),
                detections: 0,
            },
            planner: ctx.planner,
            bottom_edge: ctx.bottom_edge()?,
            length,
            lambda_max,
        })
    }

    fn stages_for(&self, observed: &Q) -> Result<usize> {
        Ok(1 + match self.length {
            PunishmentLength::Standard => compute_punishment_length(&self.state.flow)?,
            PunishmentLength::Fixed(n) => n,
            PunishmentLength::EdgeCase => {
                edge_case_punishment_length(observed, &self.state.prescribed, &self.lambda_max)?
            }
        })
    }

    /// Registers any excess in the last stage, then picks this stage's
    /// fraction and the total it prescribes.
    pub(crate) fn step<S: Scalar>(&mut self, ctx: &DecisionContext<'_, S>) -> Result<Q> {
        if let Some(last) = ctx.history.last() {
            let realized = observed_bottom(last, self.bottom_edge);
            if realized > S::from_q(&self.state.prescribed) + detection_epsilon::<S>() {
                self.state.counter += self.stages_for(&realized.to_q())?;
                self.state.detections += 1;
            }
        }
        let fraction = if self.state.counter > 0 {
            self.state.counter -= 1;
            self.state.prescribed = self.state.flow.clone();
            self.state.lambdas[self.planner].clone()
        } else {
            self.state.prescribed = one_half();
            one_half()
        };
        Ok(fraction)
    }
}

impl<S: Scalar> PlannerStrategy<S> for PunishmentStrategy {
    fn decide(&mut self, ctx: &DecisionContext<'_, S>, _rng: &mut ChaCha8Rng) -> Result<StageAssignment> {
        let fraction = self.step(ctx)?;
        Ok(self.state.rotor.emit(&fraction))
    }
}
