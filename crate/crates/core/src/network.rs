//! Single-commodity congestion networks.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::num::{format_q, q, qi, Scalar, Q};

pub const DEFAULT_PATH_CAP: usize = 10_000;
const MAX_GRID_POINTS: usize = 2_000_000;

/// Edge latency as a function of the flow on the edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CostFunction {
    Constant { c: Q },
    Affine { a: Q, b: Q },
    /// `a * x^p + b`.
    Monomial { a: Q, p: u32, b: Q },
}

impl CostFunction {
    pub fn constant(c: Q) -> Self {
        CostFunction::Constant { c }
    }

    pub fn affine(a: Q, b: Q) -> Self {
        CostFunction::Affine { a, b }
    }

    pub fn monomial(a: Q, p: u32, b: Q) -> Self {
        CostFunction::Monomial { a, p, b }
    }

    pub fn validate(&self) -> Result<()> {
        let neg = |v: &Q| *v < Q::zero();
        let bad = match self {
            CostFunction::Constant { c } => neg(c),
            CostFunction::Affine { a, b } => neg(a) || neg(b),
            CostFunction::Monomial { a, p, b } => neg(a) || neg(b) || *p < 1,
        };
        if bad {
            return Err(Error::InvalidNetwork(format!(
                "cost function {self:?} needs non-negative coefficients and exponent >= 1"
            )));
        }
        Ok(())
    }

    pub fn eval<S: Scalar>(&self, x: &S) -> S {
        match self {
            CostFunction::Constant { c } => S::from_q(c),
            CostFunction::Affine { a, b } => S::from_q(a) * x.clone() + S::from_q(b),
            CostFunction::Monomial { a, p, b } => S::from_q(a) * x.pow(*p) + S::from_q(b),
        }
    }

    /// `(slope, intercept)` when the function is affine in `x`.
    pub fn as_affine(&self) -> Option<(Q, Q)> {
        match self {
            CostFunction::Constant { c } => Some((Q::zero(), c.clone())),
            CostFunction::Affine { a, b } => Some((a.clone(), b.clone())),
            CostFunction::Monomial { a, p: 1, b } => Some((a.clone(), b.clone())),
            CostFunction::Monomial { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub name: String,
    pub tail: usize,
    pub head: usize,
    pub cost: CostFunction,
}

/// A source-sink path as a list of edge ids.
pub type Path = Vec<usize>;

/// Identifies the constant-cost and congestion-priced paths of a Pigou network.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PigouPaths {
    pub top: usize,
    pub bottom: usize,
}

/// Validated acyclic network with its canonically ordered path list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Network {
    nodes: Vec<String>,
    edges: Vec<Edge>,
    source: usize,
    sink: usize,
    paths: Vec<Path>,
}

impl Network {
    pub fn new(nodes: Vec<String>, edges: Vec<Edge>, source: usize, sink: usize) -> Result<Self> {
        Self::with_path_cap(nodes, edges, source, sink, DEFAULT_PATH_CAP)
    }

    pub fn with_path_cap(
        nodes: Vec<String>,
        edges: Vec<Edge>,
        source: usize,
        sink: usize,
        cap: usize,
    ) -> Result<Self> {
        let n = nodes.len();
        if source >= n || sink >= n {
            return Err(Error::InvalidNetwork("source or sink is not a node".into()));
        }
        if source == sink {
            return Err(Error::InvalidNetwork("source equals sink".into()));
        }
        for (id, e) in edges.iter().enumerate() {
            if e.tail >= n || e.head >= n {
                return Err(Error::InvalidNetwork(format!(
                    "edge {id} references an unknown node"
                )));
            }
            e.cost.validate()?;
            check_monotone(&e.cost).map_err(|_| {
                Error::InvalidNetwork(format!("edge {id} cost is decreasing on [0,1]"))
            })?;
        }
        let mut net = Network {
            nodes,
            edges,
            source,
            sink,
            paths: Vec::new(),
        };
        net.paths = enumerate_paths(&net, cap)?;
        Ok(net)
    }

    /// Two parallel `s -> t` edges: `top` costs 1, `bottom` costs its flow.
    pub fn pigou() -> Self {
        Self::two_link(CostFunction::affine(qi(1), qi(0)))
    }

    /// Pigou layout with a custom bottom-edge cost.
    pub fn two_link(bottom: CostFunction) -> Self {
        Network::new(
            vec!["s".into(), "t".into()],
            vec![
                Edge {
                    name: "top".into(),
                    tail: 0,
                    head: 1,
                    cost: CostFunction::constant(qi(1)),
                },
                Edge {
                    name: "bottom".into(),
                    tail: 0,
                    head: 1,
                    cost: bottom,
                },
            ],
            0,
            1,
        )
        .expect("two-link network is valid")
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn sink(&self) -> usize {
        self.sink
    }

    pub fn paths(&self) -> &[Path] {
        &self.paths
    }

    pub fn is_affine(&self) -> bool {
        self.edges.iter().all(|e| e.cost.as_affine().is_some())
    }

    /// Recognizes Pigou's network: two edge-disjoint paths, one with total
    /// cost identically 1 and one with total cost identically `x`.
    pub fn pigou_paths(&self) -> Result<PigouPaths> {
        if self.paths.len() != 2 {
            return Err(Error::NotPigou(format!("{} paths", self.paths.len())));
        }
        if self.paths[0].iter().any(|e| self.paths[1].contains(e)) {
            return Err(Error::NotPigou("paths share an edge".into()));
        }
        let profile = |p: &Path| -> Option<(Q, Q)> {
            p.iter().try_fold((Q::zero(), Q::zero()), |(sa, sb), &e| {
                let (a, b) = self.edges[e].cost.as_affine()?;
                Some((sa + a, sb + b))
            })
        };
        let top_like = |v: &Option<(Q, Q)>| *v == Some((Q::zero(), Q::one()));
        let bottom_like = |v: &Option<(Q, Q)>| *v == Some((Q::one(), Q::zero()));
        let p0 = profile(&self.paths[0]);
        let p1 = profile(&self.paths[1]);
        if top_like(&p0) && bottom_like(&p1) {
            Ok(PigouPaths { top: 0, bottom: 1 })
        } else if top_like(&p1) && bottom_like(&p0) {
            Ok(PigouPaths { top: 1, bottom: 0 })
        } else {
            Err(Error::NotPigou("path costs are not 1 and x".into()))
        }
    }

    /// Paths through each edge (`P_e`), indexed by edge id.
    pub fn paths_through(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.edges.len()];
        for (pid, path) in self.paths.iter().enumerate() {
            for &e in path {
                out[e].push(pid);
            }
        }
        out
    }

    /// Per-edge costs at the given edge flows.
    pub fn edge_costs<S: Scalar>(&self, edge_flows: &[S]) -> Vec<S> {
        self.edges
            .iter()
            .zip(edge_flows)
            .map(|(e, f)| e.cost.eval(f))
            .collect()
    }

    /// Per-path costs `c_P = sum_{e in P} c_e(f_e)`.
    pub fn path_costs<S: Scalar>(&self, edge_flows: &[S]) -> Vec<S> {
        let ec = self.edge_costs(edge_flows);
        self.paths
            .iter()
            .map(|p| p.iter().map(|&e| ec[e].clone()).sum())
            .collect()
    }

    /// Aggregates path weights into edge flows.
    pub fn edge_flows<S: Scalar>(&self, path_weights: &[S]) -> Vec<S> {
        let mut flows = vec![S::zero(); self.edges.len()];
        for (path, w) in self.paths.iter().zip(path_weights) {
            for &e in path {
                flows[e] = flows[e].clone() + w.clone();
            }
        }
        flows
    }
}

fn check_monotone(cost: &CostFunction) -> Result<()> {
    let mut prev: Option<Q> = None;
    for k in 0..=100 {
        let v: Q = cost.eval(&q(k, 100));
        if let Some(p) = &prev {
            if v < *p {
                return Err(Error::InvalidNetwork("decreasing cost".into()));
            }
        }
        prev = Some(v);
    }
    Ok(())
}

/// All simple source-sink paths, lexicographic by edge ids.
pub fn enumerate_paths(network: &Network, cap: usize) -> Result<Vec<Path>> {
    let n = network.nodes.len();
    let mut out_edges: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (id, e) in network.edges.iter().enumerate() {
        out_edges[e.tail].push(id);
    }
    if has_cycle(n, &network.edges, &out_edges) {
        return Err(Error::CyclicNetwork);
    }
    let mut paths = Vec::new();
    let mut stack = Vec::new();
    dfs(
        network,
        &out_edges,
        network.source,
        &mut stack,
        &mut paths,
        cap,
    )?;
    if paths.is_empty() {
        return Err(Error::DisconnectedNetwork);
    }
    Ok(paths)
}

fn dfs(
    net: &Network,
    out_edges: &[Vec<usize>],
    node: usize,
    stack: &mut Vec<usize>,
    paths: &mut Vec<Path>,
    cap: usize,
) -> Result<()> {
    if node == net.sink {
        if paths.len() == cap {
            return Err(Error::PathExplosion { cap });
        }
        paths.push(stack.clone());
        return Ok(());
    }
    for &e in &out_edges[node] {
        stack.push(e);
        dfs(net, out_edges, net.edges[e].head, stack, paths, cap)?;
        stack.pop();
    }
    Ok(())
}

fn has_cycle(n: usize, edges: &[Edge], out_edges: &[Vec<usize>]) -> bool {
    let mut indeg = vec![0usize; n];
    for e in edges {
        indeg[e.head] += 1;
    }
    let mut ready: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
    let mut seen = 0;
    while let Some(v) = ready.pop() {
        seen += 1;
        for &e in &out_edges[v] {
            let h = edges[e].head;
            indeg[h] -= 1;
            if indeg[h] == 0 {
                ready.push(h);
            }
        }
    }
    seen != n
}

/// Path weights summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct Flow<S> {
    weights: Vec<S>,
}

impl<S: Scalar> Flow<S> {
    pub fn new(network: &Network, weights: Vec<S>) -> Result<Self> {
        if weights.len() != network.paths.len() {
            return Err(Error::InvalidFlow(format!(
                "{} weights for {} paths",
                weights.len(),
                network.paths.len()
            )));
        }
        if weights.iter().any(|w| *w < S::zero() || *w > S::one()) {
            return Err(Error::InvalidFlow("weight outside [0,1]".into()));
        }
        let total: S = weights.iter().cloned().sum();
        if !total.near(&S::one()) {
            return Err(Error::InvalidFlow(format!(
                "weights sum to {:?}, expected 1",
                total
            )));
        }
        Ok(Flow { weights })
    }

    pub fn weights(&self) -> &[S] {
        &self.weights
    }
}

/// `f_e`: total weight of the paths containing `edge`. The edge must lie
/// on at least one of `paths`.
pub fn edge_flow<S: Scalar>(flow: &Flow<S>, edge: usize, paths: &[Path]) -> Result<S> {
    if !paths.iter().flatten().any(|&e| e == edge) {
        return Err(Error::UnknownEdge(edge));
    }
    Ok(paths
        .iter()
        .zip(flow.weights())
        .filter(|(p, _)| p.contains(&edge))
        .map(|(_, w)| w.clone())
        .sum())
}

/// Edge flow with an edge-id check against the network.
pub fn network_edge_flow<S: Scalar>(network: &Network, flow: &Flow<S>, edge: usize) -> Result<S> {
    if edge >= network.edges.len() {
        return Err(Error::UnknownEdge(edge));
    }
    Ok(network.edge_flows(flow.weights()).swap_remove(edge))
}

/// `c(f) = sum_P f(P) c_P(f)`.
pub fn total_cost<S: Scalar>(network: &Network, flow: &Flow<S>) -> S {
    let flows = network.edge_flows(flow.weights());
    let pc = network.path_costs(&flows);
    flow.weights()
        .iter()
        .zip(pc)
        .map(|(w, c)| w.clone() * c)
        .sum()
}

/// `sum_e f_e c_e(f_e)`; equals [`total_cost`].
pub fn total_cost_by_edges<S: Scalar>(network: &Network, flow: &Flow<S>) -> S {
    let flows = network.edge_flows(flow.weights());
    network
        .edges
        .iter()
        .zip(&flows)
        .map(|(e, f)| f.clone() * e.cost.eval(f))
        .sum()
}

/// Per-path costs under `flow`.
pub fn path_costs<S: Scalar>(network: &Network, flow: &Flow<S>) -> Vec<S> {
    network.path_costs(&network.edge_flows(flow.weights()))
}

/// Minimum-cost unit flow.
///
/// Exact for one path and for two paths with affine costs (closed-form
/// quadratic minimization). Otherwise a grid search over the path-weight
/// simplex with spacing `1/resolution`; the result is then an
/// approximation of the optimum.
pub fn optimal_flow<S: Scalar>(network: &Network, resolution: u32) -> Result<(Flow<S>, S)> {
    let n_paths = network.paths.len();
    if n_paths == 1 {
        let flow = Flow::new(network, vec![S::one()])?;
        let cost = total_cost(network, &flow);
        return Ok((flow, cost));
    }
    if n_paths == 2 && network.is_affine() {
        let w = two_path_affine_minimizer(network);
        let weights = vec![S::from_q(&(Q::one() - &w)), S::from_q(&w)];
        let flow = Flow::new(network, weights)?;
        let cost = total_cost(network, &flow);
        return Ok((flow, cost));
    }
    grid_optimum(network, resolution.max(1))
}

/// Weight on path 1 minimizing the (convex quadratic) total cost.
fn two_path_affine_minimizer(network: &Network) -> Q {
    let (mut qa, mut qb) = (Q::zero(), Q::zero());
    for (id, e) in network.edges.iter().enumerate() {
        let (a, b) = e.cost.as_affine().expect("affine network");
        let on0 = network.paths[0].contains(&id);
        let on1 = network.paths[1].contains(&id);
        // f_e = u + v w
        let u = if on0 { Q::one() } else { Q::zero() };
        let v = if on1 { Q::one() } else { Q::zero() } - &u;
        qa += &a * &v * &v;
        qb += qi(2) * &a * &u * &v + &b * &v;
    }
    if qa > Q::zero() {
        let w = -qb / (qi(2) * qa);
        w.clamp(Q::zero(), Q::one())
    } else if qb < Q::zero() {
        Q::one()
    } else {
        Q::zero()
    }
}

fn grid_optimum<S: Scalar>(network: &Network, resolution: u32) -> Result<(Flow<S>, S)> {
    let parts = network.paths.len();
    let points = binomial(resolution as usize + parts - 1, parts - 1);
    if points.is_none_or(|p| p > MAX_GRID_POINTS) {
        return Err(Error::InvalidNetwork(format!(
            "simplex grid with {parts} paths at resolution {resolution} is too large"
        )));
    }
    let step = q(1, resolution as i64);
    let mut best: Option<(Vec<S>, S)> = None;
    let mut counts = vec![0u32; parts];
    compositions(resolution, 0, &mut counts, &mut |c| {
        let weights: Vec<S> = c
            .iter()
            .map(|&k| S::from_q(&(&step * qi(k as i64))))
            .collect();
        let flows = network.edge_flows(&weights);
        let cost: S = network
            .edges
            .iter()
            .zip(&flows)
            .map(|(e, f)| f.clone() * e.cost.eval(f))
            .sum();
        if best.as_ref().is_none_or(|(_, b)| cost < *b) {
            best = Some((weights, cost));
        }
    });
    let (weights, cost) = best.expect("grid is non-empty");
    let exact_weights: Vec<S> = if S::EXACT {
        weights
    } else {
        // Renormalize float weights so they sum to one within tolerance.
        let total: S = weights.iter().cloned().sum();
        weights.into_iter().map(|w| w / total.clone()).collect()
    };
    Ok((Flow::new(network, exact_weights)?, cost))
}

fn compositions(remaining: u32, idx: usize, counts: &mut Vec<u32>, visit: &mut impl FnMut(&[u32])) {
    if idx == counts.len() - 1 {
        counts[idx] = remaining;
        visit(counts);
        return;
    }
    for k in (0..=remaining).rev() {
        counts[idx] = k;
        compositions(remaining - k, idx + 1, counts, visit);
    }
}

fn binomial(n: usize, k: usize) -> Option<usize> {
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

/// Edge-name lookup used by config loading.
pub fn node_index(nodes: &[String]) -> BTreeMap<&str, usize> {
    nodes.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect()
}

impl std::fmt::Display for CostFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CostFunction::Constant { c } => write!(f, "{}", format_q(c)),
            CostFunction::Affine { a, b } => write!(f, "{}*x + {}", format_q(a), format_q(b)),
            CostFunction::Monomial { a, p, b } => {
                write!(f, "{}*x^{} + {}", format_q(a), p, format_q(b))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::q;

    fn edge(name: &str, tail: usize, head: usize, cost: CostFunction) -> Edge {
        Edge {
            name: name.into(),
            tail,
            head,
            cost,
        }
    }

    fn lin() -> CostFunction {
        CostFunction::affine(qi(1), qi(0))
    }

    /// s=0, a=1, b=2, t=3; edges s->a, s->b, a->t, b->t, a->b.
    pub(crate) fn braess() -> Network {
        let names = ["s", "a", "b", "t"].iter().map(|s| s.to_string()).collect();
        Network::new(
            names,
            vec![
                edge("sa", 0, 1, lin()),
                edge("sb", 0, 2, CostFunction::constant(qi(1))),
                edge("at", 1, 3, CostFunction::constant(qi(1))),
                edge("bt", 2, 3, lin()),
                edge("ab", 1, 2, CostFunction::constant(qi(0))),
            ],
            0,
            3,
        )
        .unwrap()
    }

    /// Exhaustive oracle: every subset of edges, in every order, checked
    /// for being a contiguous s-t walk without repeated nodes.
    fn brute_force_paths(net: &Network) -> Vec<Path> {
        let m = net.edges().len();
        let mut found = Vec::new();
        fn extend(net: &Network, cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Path>) {
            let at = cur
                .last()
                .map_or(net.source(), |&e| net.edges()[e].head);
            if at == net.sink() {
                out.push(cur.clone());
                return;
            }
            for e in 0..net.edges().len() {
                if !used[e] && net.edges()[e].tail == at {
                    used[e] = true;
                    cur.push(e);
                    extend(net, cur, used, out);
                    cur.pop();
                    used[e] = false;
                }
            }
        }
        extend(net, &mut Vec::new(), &mut vec![false; m], &mut found);
        found.sort();
        found
    }

    #[test]
    fn pigou_has_two_paths() {
        let net = Network::pigou();
        assert_eq!(net.paths(), &[vec![0], vec![1]]);
        assert_eq!(net.pigou_paths().unwrap(), PigouPaths { top: 0, bottom: 1 });
    }

    #[test]
    fn chain_has_one_path() {
        let net = Network::new(
            vec!["s".into(), "v".into(), "t".into()],
            vec![edge("sv", 0, 1, lin()), edge("vt", 1, 2, CostFunction::constant(qi(2)))],
            0,
            2,
        )
        .unwrap();
        assert_eq!(net.paths(), &[vec![0, 1]]);
        assert!(net.pigou_paths().is_err());
    }

    #[test]
    fn braess_paths_match_exhaustive_oracle() {
        let net = braess();
        let oracle = brute_force_paths(&net);
        assert_eq!(oracle.len(), 3);
        assert_eq!(net.paths(), oracle.as_slice());
        assert_eq!(net.paths(), &[vec![0, 2], vec![0, 4, 3], vec![1, 3]]);
    }

    #[test]
    fn rejects_cycles_disconnection_and_caps() {
        let cyc = Network::new(
            vec!["s".into(), "a".into(), "t".into()],
            vec![
                edge("sa", 0, 1, lin()),
                edge("as", 1, 0, lin()),
                edge("at", 1, 2, lin()),
            ],
            0,
            2,
        );
        assert!(matches!(cyc, Err(Error::CyclicNetwork)));
        let disc = Network::new(
            vec!["s".into(), "a".into(), "t".into()],
            vec![edge("sa", 0, 1, lin())],
            0,
            2,
        );
        assert!(matches!(disc, Err(Error::DisconnectedNetwork)));
        let capped = Network::with_path_cap(
            vec!["s".into(), "a".into(), "b".into(), "t".into()],
            braess().edges().to_vec(),
            0,
            3,
            2,
        );
        assert!(matches!(capped, Err(Error::PathExplosion { cap: 2 })));
        let same = Network::new(vec!["s".into()], vec![], 0, 0);
        assert!(matches!(same, Err(Error::InvalidNetwork(_))));
        let neg = Network::new(
            vec!["s".into(), "t".into()],
            vec![edge("e", 0, 1, CostFunction::affine(qi(-1), qi(1)))],
            0,
            1,
        );
        assert!(matches!(neg, Err(Error::InvalidNetwork(_))));
    }

    #[test]
    fn edge_flows_on_pigou_and_braess() {
        let net = Network::pigou();
        let half = Flow::new(&net, vec![q(1, 2), q(1, 2)]).unwrap();
        assert_eq!(edge_flow(&half, 1, net.paths()).unwrap(), q(1, 2));
        let top = Flow::new(&net, vec![qi(1), qi(0)]).unwrap();
        assert_eq!(edge_flow(&top, 1, net.paths()).unwrap(), qi(0));
        assert!(edge_flow(&top, 7, net.paths()).is_err());
        assert!(network_edge_flow(&net, &top, 2).is_err());

        let b = braess();
        let third = Flow::new(&b, vec![q(1, 3); 3]).unwrap();
        // Oracle: sum over the exhaustively enumerated paths through s->a.
        let oracle: Q = brute_force_paths(&b)
            .iter()
            .filter(|p| p.contains(&0))
            .map(|_| q(1, 3))
            .sum();
        assert_eq!(oracle, q(2, 3));
        assert_eq!(edge_flow(&third, 0, b.paths()).unwrap(), oracle);
    }

    #[test]
    fn flow_validation() {
        let net = Network::pigou();
        assert!(Flow::new(&net, vec![q(1, 2), q(1, 3)]).is_err());
        assert!(Flow::new(&net, vec![qi(2), qi(-1)]).is_err());
        assert!(Flow::new(&net, vec![qi(1)]).is_err());
    }

    #[test]
    fn pigou_costs() {
        let net = Network::pigou();
        let f = Flow::new(&net, vec![q(1, 2), q(1, 2)]).unwrap();
        assert_eq!(total_cost(&net, &f), q(3, 4));
        let f = Flow::new(&net, vec![qi(0), qi(1)]).unwrap();
        assert_eq!(total_cost(&net, &f), qi(1));
        // (1 - l) + l^2 at l = 0.525
        let l = q(21, 40);
        let f = Flow::new(&net, vec![qi(1) - &l, l.clone()]).unwrap();
        let direct = (qi(1) - &l) + &l * &l;
        assert_eq!(direct, q(750_625, 1_000_000));
        assert_eq!(total_cost(&net, &f), direct);
        assert_eq!(path_costs(&net, &f), vec![qi(1), l]);
    }

    #[test]
    fn optimum_pigou_and_chain() {
        let (flow, cost) = optimal_flow::<Q>(&Network::pigou(), 100).unwrap();
        assert_eq!(flow.weights(), &[q(1, 2), q(1, 2)]);
        assert_eq!(cost, q(3, 4));
        let chain = Network::new(
            vec!["s".into(), "v".into(), "t".into()],
            vec![edge("sv", 0, 1, lin()), edge("vt", 1, 2, CostFunction::constant(qi(2)))],
            0,
            2,
        )
        .unwrap();
        let (flow, cost) = optimal_flow::<Q>(&chain, 100).unwrap();
        assert_eq!(flow.weights(), &[qi(1)]);
        assert_eq!(cost, qi(3));
    }

    #[test]
    fn optimum_quadratic_bottom_by_grid() {
        let net = Network::two_link(CostFunction::monomial(qi(1), 2, qi(0)));
        // Oracle: (1 - l) + l^3 is minimized where 3 l^2 = 1.
        let star = 1.0 / 3f64.sqrt();
        let (flow, cost) = optimal_flow::<f64>(&net, 100).unwrap();
        assert!((flow.weights()[1] - star).abs() <= 0.01);
        let exact_min = (1.0 - star) + star.powi(3);
        assert!(cost >= exact_min - 1e-12 && cost - exact_min < 1e-3);
        let (flow_q, _) = optimal_flow::<Q>(&net, 100).unwrap();
        assert_eq!(flow_q.weights()[1], q(58, 100));
    }

    #[test]
    fn grid_on_braess_beats_uniform() {
        let net = braess();
        let (_, cost) = optimal_flow::<Q>(&net, 30).unwrap();
        let uniform = Flow::new(&net, vec![q(1, 3); 3]).unwrap();
        assert!(cost <= total_cost(&net, &uniform));
    }

    #[test]
    fn monotonicity_samples() {
        for c in [
            CostFunction::constant(q(3, 2)),
            CostFunction::affine(q(2, 3), q(1, 5)),
            CostFunction::monomial(qi(4), 3, qi(0)),
        ] {
            for k in 0..50 {
                let x1 = q(k, 50);
                let x2 = q(k + 1, 50);
                assert!(c.eval::<Q>(&x1) <= c.eval::<Q>(&x2));
            }
        }
    }
}
