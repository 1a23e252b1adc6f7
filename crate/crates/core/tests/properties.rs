use num_traits::{One, Zero};
use proptest::prelude::*;

use planner_routing::config::{canonical_toml, parse_scenario};
use planner_routing::equilibrium::{best_response, bottom_flow, solve_planner_equilibrium, Partition};
use planner_routing::game::{run_stage, CarPolicy, PathMap};
use planner_routing::interval::IntervalSet;
use planner_routing::network::Network;
use planner_routing::num::{q, Q};
use planner_routing::scenario::{DefectionSpec, Scenario};
use planner_routing::strategies::{rotate_assignment, StrategySpec};
use planner_routing::verify::{
    check_individual_rationality, check_profile, find_profitable_defection, replay, DeviationFamily, Outcome,
};

fn arb_partition(max_n: usize) -> impl Strategy<Value = Partition> {
    prop::collection::vec(1u64..=60, 1..=max_n).prop_map(|w| Partition::from_weights(&w).unwrap())
}

fn arb_subset() -> impl Strategy<Value = IntervalSet> {
    (1i64..=16, prop::collection::btree_set(0i64..=16, 0..=6)).prop_map(|(den, cuts)| {
        let cuts: Vec<i64> = cuts.into_iter().map(|c| c.min(den)).collect::<std::collections::BTreeSet<_>>().into_iter().collect();
        IntervalSet::from_pairs(cuts.chunks_exact(2).map(|c| (q(c[0], den), q(c[1], den))).collect()).unwrap()
    })
}

fn tenths(n: usize) -> impl Strategy<Value = Vec<Q>> {
    prop::collection::vec((0i64..=10).prop_map(|k| q(k, 10)), n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn stage_cost_is_share_weighted_planner_cost(
        p in arb_partition(8),
        subsets in prop::collection::vec(arb_subset(), 8),
    ) {
        let net = Network::pigou();
        let paths = net.pigou_paths().unwrap();
        let assignments = subsets[..p.len()].iter().map(|s| PathMap::split(s.clone(), paths)).collect();
        let r = run_stage::<Q>(&net, &p, 1, assignments, Vec::new()).unwrap();
        let weighted: Q = p.shares().iter().zip(&r.planner_costs).map(|(a, c)| a * c).sum();
        prop_assert_eq!(weighted, r.total_cost);
    }

    #[test]
    fn rotation_serves_every_car_equally(num in 0i64..=12, den in 1i64..=12) {
        prop_assume!(num <= den);
        let lambda = q(num, den);
        let mut pointer = Q::zero();
        let mut counts = vec![0i64; den as usize];
        for _ in 0..den {
            let (bottom, next) = rotate_assignment(&pointer, &lambda);
            prop_assert_eq!(bottom.measure(), lambda.clone());
            for (k, c) in counts.iter_mut().enumerate() {
                if bottom.contains(&q(2 * k as i64 + 1, 2 * den)) {
                    *c += 1;
                }
            }
            pointer = next;
        }
        prop_assert!(pointer.is_zero());
        prop_assert!(counts.iter().all(|&c| c == num), "{:?}", counts);
    }

    /// Grid search against the analytic picture: a Pareto-improving move
    /// always takes an over-committed planner (above its best response)
    /// down toward it, and a profile of best responses at or below the
    /// equilibrium flow is never flagged. Profiles below the equilibrium
    /// flow can still be flagged when someone is over-committed.
    #[test]
    fn collective_screen_agrees_with_grid(p in arb_partition(3), fractions in tenths(3)) {
        let fractions = &fractions[..p.len()];
        let eq = solve_planner_equilibrium::<Q>(&p).total_bottom_flow;
        let flow = bottom_flow(&p, fractions);
        let c = check_profile(&p, fractions, 1).unwrap();
        prop_assert_eq!(c.flagged, flow > eq);
        if let Some(w) = &c.witness {
            let current = &fractions[w.planner];
            prop_assert!(*current > best_response(&p, fractions, w.planner).unwrap());
            prop_assert!(w.fraction < *current);
            prop_assert!(w.replay(&p).unwrap());
        }
        let all_best = (0..p.len()).all(|i| best_response(&p, fractions, i).unwrap() == fractions[i]);
        if flow <= eq && all_best {
            prop_assert!(c.passed());
        }
    }

    #[test]
    fn canonical_form_round_trips(
        p in arb_partition(5),
        seed in any::<u64>(),
        horizon in 1usize..500,
        kind in 0usize..4,
        subset in arb_subset(),
        start in 1usize..20,
        stages in prop::option::of(1usize..5),
    ) {
        let spec = match kind {
            0 => StrategySpec::Punishment { length: Some(3) },
            1 => StrategySpec::Equilibrium,
            2 => StrategySpec::Static { fraction: q(1, 3) },
            _ => StrategySpec::Myopic { inertia: q(1, 2) },
        };
        let mut s = Scenario::pigou(p, spec).with_horizon(horizon);
        s.seed = seed;
        if !subset.is_empty() {
            s = s.with_defection(DefectionSpec { planner: 0, subset, policy: CarPolicy::BottomThenComply(2), start, stages });
        }
        let text = canonical_toml(&s).unwrap();
        let again = parse_scenario(&text).unwrap();
        prop_assert_eq!(canonical_toml(&again).unwrap(), text);
        prop_assert_eq!(again, s);
    }

    #[test]
    fn games_are_deterministic(p in arb_partition(4), seed in any::<u64>(), start in 1usize..6) {
        let mut s = Scenario::pigou(p, StrategySpec::Myopic { inertia: q(1, 2) }).with_defection(DefectionSpec {
            planner: 0,
            subset: IntervalSet::interval(q(1, 4), q(3, 4)).unwrap(),
            policy: CarPolicy::AlwaysBottom,
            start,
            stages: Some(2),
        });
        s.seed = seed;
        prop_assert_eq!(s.run::<Q>(15).unwrap(), s.run::<Q>(15).unwrap());
        prop_assert_eq!(s.run::<f64>(15).unwrap(), s.run::<f64>(15).unwrap());
    }
}

#[test]
fn unprofitable_defections_stay_unprofitable_at_larger_discounts() {
    let s = Scenario::pigou(Partition::equal(4).unwrap(), StrategySpec::Punishment { length: None });
    let family = DeviationFamily {
        segments: 5,
        car_policies: vec![CarPolicy::AlwaysBottom, CarPolicy::BottomThenComply(1), CarPolicy::BottomThenComply(3)],
        ..DeviationFamily::default()
    };
    let grid = [q(1, 10), q(1, 2), q(9, 10), q(99, 100), q(999, 1000)];
    let r = check_individual_rationality::<Q>(&s, &family, &grid, 120).unwrap();
    let mut by_deviation: std::collections::BTreeMap<String, Vec<(Q, Outcome)>> = Default::default();
    for e in &r.evaluations {
        by_deviation.entry(e.deviation.describe()).or_default().push((e.discount.clone(), e.outcome));
    }
    for (name, mut outcomes) in by_deviation {
        outcomes.sort_by(|a, b| a.0.cmp(&b.0));
        let first = outcomes.iter().position(|(_, o)| *o == Outcome::Unprofitable);
        if let Some(k) = first {
            assert!(
                outcomes[k..].iter().all(|(_, o)| *o == Outcome::Unprofitable),
                "{name}: {outcomes:?}"
            );
        }
    }
}

/// Smallest segment count with `F + 1/M < 3/4`.
fn segments_for(p: &Partition) -> usize {
    let f = solve_planner_equilibrium::<Q>(p).total_bottom_flow;
    let room = q(3, 4) - f;
    (Q::one() / room).floor().to_integer().try_into().map(|m: usize| m + 1).unwrap()
}

#[test]
fn converse_succeeds_whenever_deterrence_is_impossible() {
    let partitions = [
        Partition::equal(1).unwrap(),
        Partition::equal(2).unwrap(),
        Partition::from_weights(&[1, 3]).unwrap(),
        Partition::from_weights(&[1, 9]).unwrap(),
        Partition::from_weights(&[7, 1, 1, 1]).unwrap(),
        Partition::from_weights(&[6, 1, 1, 1, 1]).unwrap(),
        Partition::from_weights(&[13, 3, 4]).unwrap(),
    ];
    for p in partitions {
        let m = segments_for(&p);
        let s = Scenario::pigou(p.clone(), StrategySpec::Punishment { length: Some(11) });
        let w = find_profitable_defection::<Q>(&s, m, &q(99, 100), 60)
            .unwrap()
            .unwrap_or_else(|| panic!("no witness for {:?} with M = {m}", p.shares()));
        let (base, dev) = replay(&s, &w).unwrap();
        assert!(dev.strictly_below(&base));
    }
}
