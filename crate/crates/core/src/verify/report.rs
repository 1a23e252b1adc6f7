use std::fmt;

use serde_json::{json, Value};

use super::{Evaluation, Outcome};
use crate::num::{format_q, Scalar, Q};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Desideratum {
    IndividualRationality,
    Resilience,
    Optimality,
    NoCollectivePunishment,
    Impossibility,
}

impl fmt::Display for Desideratum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Desideratum::IndividualRationality => "individual-rationality",
            Desideratum::Resilience => "resilience",
            Desideratum::Optimality => "optimality",
            Desideratum::NoCollectivePunishment => "no-collective-punishment",
            Desideratum::Impossibility => "impossibility",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    /// Nothing in the finite family breaks the property.
    PassOnFamily,
    Violation,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::PassOnFamily => "pass-on-family",
            Verdict::Violation => "violation",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerificationReport<S> {
    pub desideratum: Desideratum,
    pub verdict: Verdict,
    pub witness: Option<Evaluation<S>>,
    /// Grid estimate of the discount from which nothing profits.
    pub threshold: Option<Q>,
    /// Profitable deviations below the threshold.
    pub sub_threshold: Vec<Evaluation<S>>,
    pub evaluations: Vec<Evaluation<S>>,
    pub notes: Vec<String>,
}

fn outcome_name(o: Outcome) -> &'static str {
    match o {
        Outcome::Profitable => "profitable",
        Outcome::Unprofitable => "unprofitable",
        Outcome::Undecided => "undecided",
    }
}

pub fn evaluation_to_json<S: Scalar>(e: &Evaluation<S>) -> Value {
    let cost = |c: &crate::game::DiscountedCost<S>| match c.exact() {
        Some(v) => v.to_json(),
        None => json!([c.lower.to_json(), c.upper.to_json()]),
    };
    json!({
        "deviation": e.deviation.describe(),
        "planner": e.deviation.planner(),
        "start": e.deviation.start(),
        "discount": format_q(&e.discount),
        "horizon": e.horizon,
        "baseline": cost(&e.baseline),
        "deviated": cost(&e.deviated),
        "outcome": outcome_name(e.outcome),
    })
}

/// Machine-readable report: summary plus one record per template.
pub fn report_to_json<S: Scalar>(report: &VerificationReport<S>) -> Value {
    json!({
        "desideratum": report.desideratum.to_string(),
        "verdict": report.verdict.to_string(),
        "threshold": report.threshold.as_ref().map(format_q),
        "witness": report.witness.as_ref().map(evaluation_to_json),
        "sub_threshold": report.sub_threshold.iter().map(evaluation_to_json).collect::<Vec<_>>(),
        "notes": report.notes,
        "templates": report.evaluations.iter().map(evaluation_to_json).collect::<Vec<_>>(),
    })
}
