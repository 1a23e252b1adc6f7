use planner_routing::equilibrium::Partition;
use planner_routing::game::CarPolicy;
use planner_routing::interval::IntervalSet;
use planner_routing::num::{q, qi, Q};
use planner_routing::scenario::{DefectionSpec, Scenario};
use planner_routing::strategies::{default_delta, StrategySpec};

fn four() -> Partition {
    Partition::equal(4).unwrap()
}

fn punishment() -> StrategySpec {
    StrategySpec::Punishment { length: None }
}

fn one_stage_defection(start: usize) -> DefectionSpec {
    DefectionSpec {
        planner: 0,
        subset: IntervalSet::interval(q(2, 5), q(3, 5)).unwrap(),
        policy: CarPolicy::AlwaysBottom,
        start,
        stages: Some(1),
    }
}

fn bottom_fraction(s: &Scenario, k: usize) -> Vec<Q> {
    let h = s.run::<Q>(k).unwrap();
    h.records.iter().map(|r| r.recommended_fraction(0, 1)).collect()
}

#[test]
fn punishment_without_defections_stays_optimal() {
    let s = Scenario::pigou(four(), punishment());
    let h = s.run::<Q>(10).unwrap();
    assert!(h.total_costs().iter().all(|c| *c == q(3, 4)));
}

#[test]
fn single_defection_triggers_twelve_equilibrium_stages() {
    let s = Scenario::pigou(four(), punishment()).with_defection(one_stage_defection(3));
    let h = s.run::<Q>(20).unwrap();
    let fr = bottom_fraction(&s, 20);
    for (k, f) in fr.iter().enumerate() {
        let stage = k + 1;
        let expected = if (4..=15).contains(&stage) { q(4, 5) } else { q(1, 2) };
        assert_eq!(*f, expected, "stage {stage}");
    }
    assert_eq!(h.records[15].total_cost, q(3, 4));
    assert_eq!(h.records[4].total_cost, q(21, 25));
}

#[test]
fn consecutive_detections_stack() {
    let mut d = one_stage_defection(3);
    d.stages = Some(2);
    let s = Scenario::pigou(four(), punishment()).with_defection(d);
    let fr = bottom_fraction(&s, 35);
    let punished: Vec<usize> = fr
        .iter()
        .enumerate()
        .filter(|(_, f)| **f == q(4, 5))
        .map(|(k, _)| k + 1)
        .collect();
    // Detected after stages 3 and 4: 24 stages, starting at stage 4.
    assert_eq!(punished, (4..=27).collect::<Vec<_>>());
}

#[test]
fn static_equilibrium_costs() {
    let s = Scenario::pigou(four(), StrategySpec::Equilibrium);
    let h = s.run::<Q>(5).unwrap();
    assert!(h.total_costs().iter().all(|c| *c == q(21, 25)));
    let s = Scenario::pigou(four(), StrategySpec::Static { fraction: qi(1) });
    let h = s.run::<Q>(3).unwrap();
    assert!(h.records.iter().all(|r| r.recommended_fraction(2, 1) == qi(1)));
}

#[test]
fn myopic_single_planner_plays_half() {
    let s = Scenario::pigou(Partition::equal(1).unwrap(), StrategySpec::Myopic { inertia: qi(0) });
    let fr = bottom_fraction(&s, 4);
    assert!(fr.iter().all(|f| *f == q(1, 2)));
}

#[test]
fn myopic_with_inertia_approaches_equilibrium() {
    let s = Scenario::pigou(four(), StrategySpec::Myopic { inertia: q(1, 2) });
    let h = s.run::<f64>(60).unwrap();
    let last = h.records.last().unwrap().recommended_fraction(0, 1);
    let diff: f64 = planner_routing::Scalar::to_f64(&(last - q(4, 5)));
    assert!(diff.abs() < 1e-9);
}

#[test]
fn plain_myopic_cycles_for_four_planners() {
    let s = Scenario::pigou(four(), StrategySpec::Myopic { inertia: qi(0) });
    let fr = bottom_fraction(&s, 6);
    assert_eq!(fr, vec![q(1, 2), qi(1), q(1, 2), qi(1), q(1, 2), qi(1)]);
}

fn redemption() -> StrategySpec {
    StrategySpec::Redemption { delta: default_delta() }
}

#[test]
fn redemption_requires_identification() {
    let s = Scenario::pigou(four(), redemption());
    assert!(s.run::<Q>(3).is_err());
}

#[test]
fn redemption_matches_punishment_without_defections() {
    let r = Scenario::pigou(four(), redemption()).with_identification(true);
    let p = Scenario::pigou(four(), punishment());
    assert_eq!(r.run::<Q>(30).unwrap(), p.run::<Q>(30).unwrap());
}

#[test]
fn compliant_redemption_returns_to_optimum_and_beats_punishment() {
    let d = DefectionSpec {
        policy: CarPolicy::BottomThenComply(1),
        stages: None,
        ..one_stage_defection(3)
    };
    let r = Scenario::pigou(four(), redemption())
        .with_identification(true)
        .with_defection(d.clone());
    let h = r.run::<Q>(30).unwrap();
    let costs = h.total_costs();
    assert_eq!(costs[3], q(3, 4) + q(1, 10000));
    assert!(costs[4..].iter().all(|c| *c == q(3, 4)), "{costs:?}");
    let p = Scenario::pigou(four(), punishment()).with_defection(d);
    let pc: Q = p.run::<Q>(30).unwrap().total_costs().into_iter().sum();
    let rc: Q = costs.into_iter().sum();
    assert!(rc < pc);
}
