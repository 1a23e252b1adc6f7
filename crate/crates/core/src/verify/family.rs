use num_traits::Zero;

use crate::error::{Error, Result};
use crate::game::CarPolicy;
use crate::interval::IntervalSet;
use crate::num::{format_q, q, qi, Q};
use crate::scenario::DEFAULT_SEGMENTS;
use crate::strategies::StrategySpec;

/// A planner-level deviation template.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum PlannerTemplate {
    /// Fixed bottom fraction from the start stage on.
    Constant(Q),
    /// A different fraction at the start stage only.
    OneShot(Q),
    /// Myopic best response from the start stage on.
    Myopic,
}

impl PlannerTemplate {
    pub fn name(&self) -> String {
        match self {
            PlannerTemplate::Constant(f) => format!("constant {}", format_q(f)),
            PlannerTemplate::OneShot(f) => format!("one-shot {}", format_q(f)),
            PlannerTemplate::Myopic => "myopic".into(),
        }
    }

    pub fn spec(&self, base: StrategySpec, start: usize) -> StrategySpec {
        let then = match self {
            PlannerTemplate::Constant(f) => StrategySpec::Static { fraction: f.clone() },
            PlannerTemplate::Myopic => StrategySpec::Myopic { inertia: Q::zero() },
            PlannerTemplate::OneShot(f) => {
                return StrategySpec::OneShot {
                    base: Box::new(base),
                    stage: start,
                    fraction: f.clone(),
                }
            }
        };
        if start <= 1 {
            then
        } else {
            StrategySpec::SwitchAt {
                base: Box::new(base),
                stage: start,
                then: Box::new(then),
            }
        }
    }
}

/// Finite family of deviations searched by the checks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeviationFamily {
    /// `M`: car subsets are the segments `[(j-1)/M, j/M)`.
    pub segments: usize,
    pub car_policies: Vec<CarPolicy>,
    /// Fractions used by the constant and one-shot templates; the
    /// deviator's equilibrium fraction is always added.
    pub fractions: Vec<Q>,
    pub include_myopic: bool,
}

impl Default for DeviationFamily {
    fn default() -> Self {
        DeviationFamily {
            segments: DEFAULT_SEGMENTS,
            car_policies: vec![
                CarPolicy::AlwaysBottom,
                CarPolicy::AlwaysTop,
                CarPolicy::BottomThenComply(1),
                CarPolicy::BottomThenComply(2),
                CarPolicy::BottomThenComply(5),
            ],
            fractions: vec![qi(0), q(1, 4), q(1, 2), q(3, 4), qi(1)],
            include_myopic: true,
        }
    }
}

impl DeviationFamily {
    pub fn with_segments(segments: usize) -> Self {
        DeviationFamily { segments, ..Self::default() }
    }

    pub fn segments(&self) -> Result<Vec<IntervalSet>> {
        if self.segments == 0 {
            return Err(Error::SegmentCountTooSmall("M = 0".into()));
        }
        let m = self.segments as i64;
        (1..=m)
            .map(|j| IntervalSet::interval(q(j - 1, m), q(j, m)))
            .collect()
    }

    pub fn planner_templates(&self, equilibrium_fraction: &Q) -> Vec<PlannerTemplate> {
        let mut fractions = self.fractions.clone();
        if !fractions.contains(equilibrium_fraction) {
            fractions.push(equilibrium_fraction.clone());
        }
        let mut out: Vec<PlannerTemplate> = fractions.iter().cloned().map(PlannerTemplate::Constant).collect();
        out.extend(fractions.into_iter().map(PlannerTemplate::OneShot));
        if self.include_myopic {
            out.push(PlannerTemplate::Myopic);
        }
        out
    }
}
