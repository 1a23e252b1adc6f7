use num_traits::{One, Zero};
use rand_chacha::ChaCha8Rng;

use super::{observed_bottom, BuildContext, Rotor};
use crate::equilibrium::one_half;
use crate::error::Result;
use crate::game::{DecisionContext, PlannerStrategy, StageAssignment};
use crate::network::PigouPaths;
use crate::num::{Scalar, Q};

/// Rotates a fixed fraction onto the bottom path every stage.
pub struct StaticStrategy {
    rotor: Rotor,
    fraction: Q,
}

impl StaticStrategy {
    pub fn new(paths: PigouPaths, fraction: Q) -> Self {
        StaticStrategy { rotor: Rotor::new(paths), fraction }
    }
}

impl<S: Scalar> PlannerStrategy<S> for StaticStrategy {
    fn decide(&mut self, _ctx: &DecisionContext<'_, S>, _rng: &mut ChaCha8Rng) -> Result<StageAssignment> {
        Ok(self.rotor.emit(&self.fraction))
    }
}

/// Best response to the others' flow seen in the last stage, blended with
/// the previous fraction by `inertia`.
pub struct MyopicStrategy {
    rotor: Rotor,
    share: Q,
    bottom_edge: usize,
    inertia: Q,
}

impl MyopicStrategy {
    pub fn new(ctx: &BuildContext<'_>, inertia: Q) -> Result<Self> {
        Ok(MyopicStrategy {
            rotor: Rotor::new(ctx.paths()?),
            share: ctx.partition.shares()[ctx.planner].clone(),
            bottom_edge: ctx.bottom_edge()?,
            inertia,
        })
    }
}

impl<S: Scalar> PlannerStrategy<S> for MyopicStrategy {
    fn decide(&mut self, ctx: &DecisionContext<'_, S>, _rng: &mut ChaCha8Rng) -> Result<StageAssignment> {
        let Some(last) = ctx.history.last() else {
            return Ok(self.rotor.emit(&one_half()));
        };
        let alpha = S::from_q(&self.share);
        let own = S::from_q(&last.recommendation.measure_on(self.rotor.paths.bottom));
        let others = observed_bottom(last, self.bottom_edge) - alpha.clone() * own.clone();
        let vertex = (S::one() - others) / (S::from_int(2) * alpha);
        let br = S::max_of(S::zero(), S::min_of(S::one(), vertex));
        let w = S::from_q(&self.inertia);
        let next = w.clone() * own + (S::one() - w) * br;
        let fraction = next.to_q().max(Q::zero()).min(Q::one());
        Ok(self.rotor.emit(&fraction))
    }
}

/// Plays `base` before `stage`, then `then` (which starts fresh).
pub struct SwitchStrategy<S: Scalar> {
    base: Box<dyn PlannerStrategy<S>>,
    stage: usize,
    then: Box<dyn PlannerStrategy<S>>,
}

impl<S: Scalar> SwitchStrategy<S> {
    pub fn new(base: Box<dyn PlannerStrategy<S>>, stage: usize, then: Box<dyn PlannerStrategy<S>>) -> Self {
        SwitchStrategy { base, stage, then }
    }
}

impl<S: Scalar> PlannerStrategy<S> for SwitchStrategy<S> {
    fn decide(&mut self, ctx: &DecisionContext<'_, S>, rng: &mut ChaCha8Rng) -> Result<StageAssignment> {
        if ctx.stage < self.stage {
            self.base.decide(ctx, rng)
        } else {
            self.then.decide(ctx, rng)
        }
    }
}

/// Follows `base` but sends `[0, fraction)` to the bottom at one stage.
/// The base keeps its own state as if it had played its prescription.
pub struct OneShotStrategy<S: Scalar> {
    base: Box<dyn PlannerStrategy<S>>,
    stage: usize,
    fraction: Q,
    paths: PigouPaths,
}

impl<S: Scalar> OneShotStrategy<S> {
    pub fn new(base: Box<dyn PlannerStrategy<S>>, stage: usize, fraction: Q, paths: PigouPaths) -> Self {
        OneShotStrategy { base, stage, fraction, paths }
    }
}

impl<S: Scalar> PlannerStrategy<S> for OneShotStrategy<S> {
    fn decide(&mut self, ctx: &DecisionContext<'_, S>, rng: &mut ChaCha8Rng) -> Result<StageAssignment> {
        let prescribed = self.base.decide(ctx, rng)?;
        if ctx.stage == self.stage {
            Ok(Rotor::new(self.paths).emit(&self.fraction))
        } else {
            Ok(prescribed)
        }
    }
}
