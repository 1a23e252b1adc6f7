use num_traits::{One, ToPrimitive, Zero};
use rand_chacha::ChaCha8Rng;

use super::{compute_punishment_length, detection_epsilon, observed_bottom, BuildContext, Rotor};
use crate::equilibrium::{one_half, Partition};
use crate::error::{Error, Result};
use crate::game::{DecisionContext, PathMap, PlannerStrategy, StageAssignment};
use crate::interval::{modulo, IntervalSet};
use crate::num::{format_q, Scalar, Q};

/// Debt of one identified group of cars.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LedgerEntry {
    pub planner: usize,
    pub subset: IntervalSet,
    /// Accumulated per-car gain from defecting.
    pub owed: Q,
    /// Per-car gain forgone while riding the top path.
    pub credit: Q,
    /// Remaining load-increase stages.
    pub stages_left: usize,
    /// Stage whose decision first saw the entry.
    pub opened: usize,
}

/// Shared bookkeeping of the redemption profile. Every planner keeps an
/// identical copy since all of them see the same identified defections.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RedemptionLedger {
    pub delta: Q,
    pub entries: Vec<LedgerEntry>,
    /// `(planner, subset, stage)` of each redeemed entry.
    pub cleared: Vec<(usize, IntervalSet, usize)>,
    /// Load level applied in the last stage.
    pub level: Q,
}

impl RedemptionLedger {
    pub fn new(delta: Q) -> Self {
        RedemptionLedger {
            delta,
            entries: Vec::new(),
            cleared: Vec::new(),
            level: Q::zero(),
        }
    }

    /// Per-stage social overhead of one load increment.
    pub fn overhead(&self) -> Q {
        &self.delta * &self.delta
    }

    /// Load stages that repay a per-car gain `g`: `ceil(g / delta^2)`.
    pub fn stages_for(&self, gain: &Q) -> usize {
        (gain / self.overhead()).ceil().to_integer().to_usize().unwrap_or(usize::MAX)
    }

    /// Adds gain to an existing entry or opens a new one.
    pub fn record(&mut self, planner: usize, subset: &IntervalSet, gain: Q, stage: usize) {
        let extra = self.stages_for(&gain);
        match self
            .entries
            .iter_mut()
            .find(|e| e.planner == planner && e.subset == *subset)
        {
            Some(e) => {
                e.owed += gain;
                e.stages_left = e.stages_left.saturating_add(extra);
            }
            None => self.entries.push(LedgerEntry {
                planner,
                subset: subset.clone(),
                owed: gain,
                credit: Q::zero(),
                stages_left: extra,
                opened: stage,
            }),
        }
    }

    /// Removes entries whose credit covers their debt.
    pub fn clear_redeemed(&mut self, stage: usize) {
        let mut kept = Vec::with_capacity(self.entries.len());
        for e in self.entries.drain(..) {
            if e.credit >= e.owed {
                self.cleared.push((e.planner, e.subset, stage));
            } else {
                kept.push(e);
            }
        }
        self.entries = kept;
    }

    /// Picks this stage's load level and spends one stage of the oldest
    /// entries that fit under `cap`; the rest wait, which extends them.
    pub fn advance(&mut self, cap: &Q) -> Q {
        let slots = (cap / &self.delta).floor().to_integer().to_usize().unwrap_or(0);
        let mut used = 0;
        for e in self.entries.iter_mut().filter(|e| e.stages_left > 0) {
            if used == slots {
                break;
            }
            e.stages_left -= 1;
            used += 1;
        }
        self.level = &self.delta * Q::from_integer(used.into());
        self.level.clone()
    }

    /// Subsets of `planner` that are still redeeming.
    pub fn redeeming(&self, planner: usize) -> IntervalSet {
        self.entries
            .iter()
            .filter(|e| e.planner == planner)
            .fold(IntervalSet::empty(), |acc, e| acc.union(&e.subset))
    }
}

/// Optimal routing with gradual, redeemable retaliation against
/// identified defectors; unexplained excess falls back to equilibrium
/// punishment phases.
pub struct RedemptionStrategy {
    pub ledger: RedemptionLedger,
    pub counter: usize,
    rotor: Rotor,
    planner: usize,
    partition: Partition,
    bottom_edge: usize,
    lambdas: Vec<Q>,
    flow: Q,
    punishment: usize,
    fractions: Vec<Q>,
    prescribed: Q,
}

impl RedemptionStrategy {
    pub fn new(ctx: &BuildContext<'_>, delta: Q) -> Result<Self> {
        if !ctx.identify {
            return Err(Error::RedemptionRequiresIdentification);
        }
        if delta <= Q::zero() || delta > one_half() {
            return Err(Error::InvalidFraction(format!("load increment {}", format_q(&delta))));
        }
        let eq = ctx.equilibrium();
        let punishment = compute_punishment_length(&eq.total_bottom_flow)? + 1;
        let n = ctx.partition.len();
        Ok(RedemptionStrategy {
            ledger: RedemptionLedger::new(delta),
            counter: 0,
            rotor: Rotor::new(ctx.paths()?),
            planner: ctx.planner,
            partition: ctx.partition.clone(),
            bottom_edge: ctx.bottom_edge()?,
            lambdas: eq.lambdas,
            flow: eq.total_bottom_flow,
            punishment,
            fractions: vec![one_half(); n],
            prescribed: one_half(),
        })
    }

    fn settle<S: Scalar>(&mut self, ctx: &DecisionContext<'_, S>) -> Result<()> {
        let Some(last) = ctx.history.last() else {
            return Ok(());
        };
        let identified = last
            .identified
            .as_ref()
            .ok_or(Error::RedemptionRequiresIdentification)?;
        let bottom = observed_bottom(last, self.bottom_edge);
        let bottom_q = bottom.to_q();
        let bottom_path = self.rotor.paths.bottom;

        // Compliant redeemers were on top while others of their planner
        // rode the bottom path a `fractions[j]` share of the time.
        for e in &mut self.ledger.entries {
            let defected = identified
                .iter()
                .any(|d| d.planner == e.planner && d.subset.overlaps(&e.subset));
            if !defected {
                e.credit += &self.fractions[e.planner] * (Q::one() - &bottom_q);
            }
        }
        let mut explained = S::zero();
        for d in identified {
            explained = explained + d.path_shift[bottom_path].clone();
            if d.gain > S::zero() {
                self.ledger.record(d.planner, &d.subset, d.gain.to_q(), ctx.stage);
            }
        }
        self.ledger.clear_redeemed(ctx.stage);
        if bottom > S::from_q(&self.prescribed) + explained + detection_epsilon::<S>() {
            self.counter += self.punishment;
        }
        Ok(())
    }
}

impl<S: Scalar> PlannerStrategy<S> for RedemptionStrategy {
    fn decide(&mut self, ctx: &DecisionContext<'_, S>, _rng: &mut ChaCha8Rng) -> Result<StageAssignment> {
        self.settle(ctx)?;
        if self.counter > 0 {
            self.counter -= 1;
            self.fractions.clone_from(&self.lambdas);
        } else {
            let cap = &self.flow - one_half();
            let level = self.ledger.advance(&cap);
            self.fractions = self
                .lambdas
                .iter()
                .map(|l| {
                    let ceiling = l.clone().max(one_half());
                    (one_half() + &level).min(ceiling)
                })
                .collect();
        }
        self.prescribed = self
            .partition
            .shares()
            .iter()
            .zip(&self.fractions)
            .map(|(a, f)| a * f)
            .sum();

        let fraction = self.fractions[self.planner].clone();
        let redeeming = self.ledger.redeeming(self.planner);
        if redeeming.is_empty() {
            return Ok(self.rotor.emit(&fraction));
        }
        let base = redeeming.complement();
        let room = base.measure();
        let bottom = if fraction <= room {
            let b = base.slice_by_measure(&self.rotor.pointer, &fraction);
            self.rotor.pointer = if room.is_zero() {
                Q::zero()
            } else {
                modulo(&(&self.rotor.pointer + &fraction), &room)
            };
            b
        } else {
            base.union(&redeeming.slice_by_measure(&Q::zero(), &(&fraction - &room)))
        };
        Ok(PathMap::split(bottom, self.rotor.paths))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::q;

    #[test]
    fn ledger_arithmetic() {
        let mut l = RedemptionLedger::new(q(1, 10));
        assert_eq!(l.overhead(), q(1, 100));
        assert_eq!(l.stages_for(&q(1, 4)), 25);
        let s = IntervalSet::interval(q(0, 1), q(1, 5)).unwrap();
        l.record(0, &s, q(1, 4), 4);
        let mut stages = 0;
        let mut overhead = Q::zero();
        while l.entries[0].stages_left > 0 {
            let level = l.advance(&q(3, 10));
            overhead += &level * &level;
            stages += 1;
        }
        assert_eq!(stages, 25);
        assert!(overhead >= q(1, 4) && overhead <= q(1, 4) + l.overhead());
        l.entries[0].credit = q(1, 4);
        l.clear_redeemed(30);
        assert!(l.entries.is_empty());
        assert_eq!(l.cleared, vec![(0, s, 30)]);
    }

    #[test]
    fn cap_extends_instead_of_stacking() {
        let mut l = RedemptionLedger::new(q(1, 10));
        let a = IntervalSet::interval(q(0, 1), q(1, 5)).unwrap();
        let b = IntervalSet::interval(q(1, 5), q(2, 5)).unwrap();
        l.record(0, &a, q(2, 100), 2);
        l.record(1, &b, q(2, 100), 2);
        // Room for one increment: entries are served one after the other.
        assert_eq!(l.advance(&q(15, 100)), q(1, 10));
        assert_eq!(l.advance(&q(15, 100)), q(1, 10));
        assert_eq!(l.advance(&q(15, 100)), q(1, 10));
        assert_eq!(l.advance(&q(15, 100)), q(1, 10));
        assert_eq!(l.advance(&q(15, 100)), q(0, 1));
    }
}
