use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::interval::IntervalSet;
use crate::network::PigouPaths;
use crate::num::Q;

/// Piecewise-constant map from cars (points of a planner's `[0,1)` share)
/// to path ids. Pieces assigned to the same path are merged.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct PathMap {
    pieces: BTreeMap<usize, IntervalSet>,
}

/// A planner's recommendations for one stage; covers `[0,1)`.
pub type StageAssignment = PathMap;

impl PathMap {
    pub fn new(pieces: impl IntoIterator<Item = (usize, IntervalSet)>) -> Self {
        let mut map: BTreeMap<usize, IntervalSet> = BTreeMap::new();
        for (path, set) in pieces {
            if set.is_empty() {
                continue;
            }
            let merged = match map.get(&path) {
                Some(prev) => prev.union(&set),
                None => set,
            };
            map.insert(path, merged);
        }
        PathMap { pieces: map }
    }

    /// Every car of `domain` takes `path`.
    pub fn uniform(domain: IntervalSet, path: usize) -> Self {
        PathMap::new([(path, domain)])
    }

    /// `bottom_cars` ride the bottom path, the rest of `[0,1)` the top path.
    pub fn split(bottom_cars: IntervalSet, paths: PigouPaths) -> Self {
        let top_cars = bottom_cars.complement();
        PathMap::new([(paths.bottom, bottom_cars), (paths.top, top_cars)])
    }

    pub fn pieces(&self) -> impl Iterator<Item = (usize, &IntervalSet)> {
        self.pieces.iter().map(|(p, s)| (*p, s))
    }

    pub fn cars_on(&self, path: usize) -> IntervalSet {
        self.pieces.get(&path).cloned().unwrap_or_default()
    }

    pub fn measure_on(&self, path: usize) -> Q {
        self.pieces.get(&path).map_or_else(Q::zero, IntervalSet::measure)
    }

    pub fn domain(&self) -> IntervalSet {
        self.pieces
            .values()
            .fold(IntervalSet::empty(), |acc, s| acc.union(s))
    }

    /// All intervals of all paths, sorted by left end.
    fn sorted_intervals(&self) -> Vec<&(Q, Q)> {
        let mut all: Vec<&(Q, Q)> = self.pieces.values().flat_map(IntervalSet::pieces).collect();
        all.sort_by(|x, y| x.0.cmp(&y.0));
        all
    }

    /// Pieces are pairwise disjoint.
    pub fn is_disjoint(&self) -> bool {
        self.sorted_intervals().windows(2).all(|w| w[0].1 <= w[1].0)
    }

    /// Disjoint pieces covering all of `[0,1)`.
    pub fn covers_unit(&self) -> bool {
        let all = self.sorted_intervals();
        match (all.first(), all.last()) {
            (Some(first), Some(last)) => {
                first.0.is_zero() && last.1.is_one() && all.windows(2).all(|w| w[0].1 == w[1].0)
            }
            _ => false,
        }
    }

    pub fn restrict(&self, set: &IntervalSet) -> Self {
        PathMap::new(
            self.pieces
                .iter()
                .map(|(p, s)| (*p, s.intersection(set))),
        )
    }

    /// `self` with `other` taking precedence on `other`'s domain.
    pub fn overlay(&self, other: &PathMap) -> Self {
        let hole = other.domain().complement();
        let kept = self.pieces.iter().map(|(p, s)| (*p, s.intersection(&hole)));
        PathMap::new(kept.chain(other.pieces.iter().map(|(p, s)| (*p, s.clone()))))
    }

    /// Measure per path id, for ids `0..n_paths`.
    pub fn path_measures(&self, n_paths: usize) -> Vec<Q> {
        (0..n_paths).map(|p| self.measure_on(p)).collect()
    }

    pub fn max_path(&self) -> Option<usize> {
        self.pieces.keys().next_back().copied()
    }
}

impl std::fmt::Display for PathMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self
            .pieces
            .iter()
            .map(|(p, s)| format!("{p}: {s}"))
            .collect();
        f.write_str(&parts.join("; "))
    }
}
