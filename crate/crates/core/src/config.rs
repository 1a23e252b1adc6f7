//! TOML scenario files.
//!
//! Rationals are written as `"p/q"` strings (integers and finite decimals
//! are accepted on input). Every parsed scenario has a canonical text form;
//! its SHA-256 identifies the run in output headers.
//!
//! ```toml
//! seed = 7
//! horizon = 40
//!
//! [network]
//! preset = "pigou"
//!
//! [partition]
//! equal = 4
//!
//! [strategy]
//! kind = "punishment"
//!
//! [[defections]]
//! planner = 0
//! subset = [["2/5", "3/5"]]
//! policy = "always-bottom"
//! start = 3
//! stages = 1
//! ```

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use toml::Spanned;

use crate::equilibrium::Partition;
use crate::error::{Error, Result};
use crate::game::CarPolicy;
use crate::interval::IntervalSet;
use crate::network::{node_index, CostFunction, Edge, Network};
use crate::num::{NumberMode, Ratio, Q};
use crate::scenario::{default_discounts, DefectionSpec, Scenario, DEFAULT_HORIZON, DEFAULT_SEGMENTS};
use crate::strategies::{default_delta, StrategySpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    #[serde(default)]
    pub mode: NumberMode,
    #[serde(default = "default_segments")]
    pub segments: usize,
    #[serde(default)]
    pub identify_defections: bool,
    #[serde(default = "default_discount_ratios")]
    pub discounts: Vec<Ratio>,
    pub network: Spanned<NetworkConfig>,
    pub partition: Spanned<PartitionConfig>,
    pub strategy: Spanned<StrategyConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub defections: Vec<Spanned<DefectionConfig>>,
}

fn default_horizon() -> usize {
    DEFAULT_HORIZON
}

fn default_segments() -> usize {
    DEFAULT_SEGMENTS
}

fn default_discount_ratios() -> Vec<Ratio> {
    default_discounts().into_iter().map(Ratio).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sink: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub edges: Vec<EdgeConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeConfig {
    pub name: String,
    pub tail: String,
    pub head: String,
    pub cost: CostConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum CostConfig {
    Constant { c: Ratio },
    Affine { a: Ratio, b: Ratio },
    Monomial { a: Ratio, p: u32, b: Ratio },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equal: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shares: Option<Vec<Ratio>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyConfig {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub punishment_length: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Ratio>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<Ratio>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inertia: Option<Ratio>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub overrides: Vec<Spanned<OverrideConfig>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OverrideConfig {
    pub planner: usize,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub punishment_length: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Ratio>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<Ratio>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inertia: Option<Ratio>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DefectionConfig {
    pub planner: usize,
    /// `[[a, b], ...]` half-open pieces of the planner's `[0,1)` share.
    pub subset: Vec<[Ratio; 2]>,
    pub policy: String,
    #[serde(default = "one")]
    pub start: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stages: Option<usize>,
}

fn one() -> usize {
    1
}

/// Byte offset to 1-based line number.
fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

struct Located<'a> {
    text: &'a str,
}

impl Located<'_> {
    fn at<T>(&self, spanned: &Spanned<T>) -> Option<usize> {
        Some(line_of(self.text, spanned.span().start))
    }
}

fn strategy_from_parts(
    kind: &str,
    punishment_length: Option<usize>,
    lambda: &Option<Ratio>,
    delta: &Option<Ratio>,
    inertia: &Option<Ratio>,
) -> std::result::Result<StrategySpec, String> {
    let stray = |name: &str, present: bool| {
        if present {
            Err(format!("`{name}` does not apply to strategy kind `{kind}`"))
        } else {
            Ok(())
        }
    };
    let spec = match kind {
        "punishment" => StrategySpec::Punishment { length: punishment_length },
        "edge_case" => StrategySpec::EdgeCase,
        "redemption" => StrategySpec::Redemption {
            delta: delta.as_ref().map_or_else(default_delta, |r| r.0.clone()),
        },
        "static" => StrategySpec::Static {
            fraction: lambda
                .as_ref()
                .map(|r| r.0.clone())
                .ok_or_else(|| "strategy kind `static` needs `lambda`".to_string())?,
        },
        "equilibrium" => StrategySpec::Equilibrium,
        "myopic" => StrategySpec::Myopic {
            inertia: inertia.as_ref().map_or_else(|| Q::from_integer(0.into()), |r| r.0.clone()),
        },
        other => {
            return Err(format!(
                "unknown strategy kind `{other}` (expected punishment, edge_case, redemption, static, equilibrium or myopic)"
            ))
        }
    };
    stray("punishment_length", punishment_length.is_some() && kind != "punishment")?;
    stray("lambda", lambda.is_some() && kind != "static")?;
    stray("delta", delta.is_some() && kind != "redemption")?;
    stray("inertia", inertia.is_some() && kind != "myopic")?;
    Ok(spec)
}

type Params = (String, Option<usize>, Option<Ratio>, Option<Ratio>, Option<Ratio>);

fn strategy_to_parts(spec: &StrategySpec) -> Result<Params> {
    let r = |q: &Q| Some(Ratio(q.clone()));
    Ok(match spec {
        StrategySpec::Punishment { length } => ("punishment".into(), *length, None, None, None),
        StrategySpec::EdgeCase => ("edge_case".into(), None, None, None, None),
        StrategySpec::Redemption { delta } => ("redemption".into(), None, None, r(delta), None),
        StrategySpec::Static { fraction } => ("static".into(), None, r(fraction), None, None),
        StrategySpec::Equilibrium => ("equilibrium".into(), None, None, None, None),
        StrategySpec::Myopic { inertia } => ("myopic".into(), None, None, None, r(inertia)),
        other => {
            return Err(Error::config(
                None,
                format!("strategy `{}` has no config representation", other.label()),
            ))
        }
    })
}

pub fn parse_policy(text: &str) -> std::result::Result<CarPolicy, String> {
    let bad = || format!("unknown policy `{text}` (expected always-bottom, always-top, bottom-for-<m> or path-<p>)");
    match text {
        "always-bottom" => Ok(CarPolicy::AlwaysBottom),
        "always-top" => Ok(CarPolicy::AlwaysTop),
        _ => {
            if let Some(m) = text.strip_prefix("bottom-for-") {
                m.parse().map(CarPolicy::BottomThenComply).map_err(|_| bad())
            } else if let Some(p) = text.strip_prefix("path-") {
                p.parse().map(CarPolicy::AlwaysPath).map_err(|_| bad())
            } else {
                Err(bad())
            }
        }
    }
}

pub fn policy_name(policy: &CarPolicy) -> String {
    match policy {
        CarPolicy::AlwaysPath(p) => format!("path-{p}"),
        other => other.name(),
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let line = e.span().map(|s| line_of(text, s.start));
            Error::config(line, e.message().trim().to_string())
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config(None, e.to_string()))
    }

    /// Validates and builds the scenario. `text` is the source the config
    /// was parsed from and is used only for line numbers.
    pub fn to_scenario(&self, text: &str) -> Result<Scenario> {
        let loc = Located { text };
        let network = self
            .build_network()
            .map_err(|e| Error::config(loc.at(&self.network), e.to_string()))?;
        let partition = self
            .build_partition()
            .map_err(|e| Error::config(loc.at(&self.partition), e.to_string()))?;
        let n = partition.len();
        let s = self.strategy.get_ref();
        let base = strategy_from_parts(&s.kind, s.punishment_length, &s.lambda, &s.delta, &s.inertia)
            .map_err(|m| Error::config(loc.at(&self.strategy), m))?;
        let mut strategies = vec![base; n];
        for o in &s.overrides {
            let line = loc.at(o);
            let o = o.get_ref();
            if o.planner >= n {
                return Err(Error::config(line, format!("override planner {} out of range for {n} planners", o.planner)));
            }
            strategies[o.planner] = strategy_from_parts(&o.kind, o.punishment_length, &o.lambda, &o.delta, &o.inertia)
                .map_err(|m| Error::config(line, m))?;
        }
        let mut defections = Vec::new();
        for d in &self.defections {
            let line = loc.at(d);
            let d = d.get_ref();
            let subset = IntervalSet::from_pairs(d.subset.iter().map(|[a, b]| (a.0.clone(), b.0.clone())).collect())
                .map_err(|e| Error::config(line, e.to_string()))?;
            let policy = parse_policy(&d.policy).map_err(|m| Error::config(line, m))?;
            defections.push(DefectionSpec {
                planner: d.planner,
                subset,
                policy,
                start: d.start,
                stages: d.stages,
            });
        }
        let scenario = Scenario {
            network,
            partition,
            strategies,
            defections,
            horizon: self.horizon,
            discounts: self.discounts.iter().map(|r| r.0.clone()).collect(),
            segments: self.segments,
            mode: self.mode,
            seed: self.seed,
            identify_defections: self.identify_defections,
        };
        scenario.validate().map_err(|e| {
            let line = match &e {
                Error::PlannerOutOfRange { index, .. } | Error::ConflictingDefections { planner: index, .. } => self
                    .defections
                    .iter()
                    .find(|d| d.get_ref().planner == *index)
                    .and_then(|d| loc.at(d)),
                Error::InvalidDefection(_) => self.defections.first().and_then(|d| loc.at(d)),
                _ => None,
            };
            Error::config(line, e.to_string())
        })?;
        // Surface strategy construction errors (regime checks) at load time.
        scenario.build_strategies::<Q>().map_err(|e| Error::config(loc.at(&self.strategy), e.to_string()))?;
        Ok(scenario)
    }

    fn build_network(&self) -> Result<Network> {
        let n = self.network.get_ref();
        match (&n.preset, &n.nodes) {
            (Some(p), None) if n.edges.is_empty() && n.source.is_none() && n.sink.is_none() => match p.as_str() {
                "pigou" => Ok(Network::pigou()),
                other => Err(Error::InvalidNetwork(format!("unknown preset `{other}` (expected pigou)"))),
            },
            (None, Some(nodes)) => {
                let idx = node_index(nodes);
                let find = |name: &Option<String>, what: &str| -> Result<usize> {
                    let name = name
                        .as_ref()
                        .ok_or_else(|| Error::InvalidNetwork(format!("missing `{what}`")))?;
                    idx.get(name.as_str())
                        .copied()
                        .ok_or_else(|| Error::InvalidNetwork(format!("unknown node `{name}`")))
                };
                let source = find(&n.source, "source")?;
                let sink = find(&n.sink, "sink")?;
                let edges = n
                    .edges
                    .iter()
                    .map(|e| {
                        Ok(Edge {
                            name: e.name.clone(),
                            tail: find(&Some(e.tail.clone()), "tail")?,
                            head: find(&Some(e.head.clone()), "head")?,
                            cost: match &e.cost {
                                CostConfig::Constant { c } => CostFunction::constant(c.0.clone()),
                                CostConfig::Affine { a, b } => CostFunction::affine(a.0.clone(), b.0.clone()),
                                CostConfig::Monomial { a, p, b } => CostFunction::monomial(a.0.clone(), *p, b.0.clone()),
                            },
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Network::new(nodes.clone(), edges, source, sink)
            }
            _ => Err(Error::InvalidNetwork(
                "give either `preset` alone or `nodes`, `source`, `sink` and `edges`".into(),
            )),
        }
    }

    fn build_partition(&self) -> Result<Partition> {
        match (&self.partition.get_ref().equal, &self.partition.get_ref().shares) {
            (Some(n), None) => Partition::equal(*n),
            (None, Some(shares)) => Partition::new(shares.iter().map(|r| r.0.clone()).collect()),
            _ => Err(Error::InvalidPartition("give exactly one of `equal` or `shares`".into())),
        }
    }

    /// Canonical config describing `scenario`.
    pub fn from_scenario(scenario: &Scenario) -> Result<Self> {
        let network = if scenario.network == Network::pigou() {
            NetworkConfig {
                preset: Some("pigou".into()),
                nodes: None,
                source: None,
                sink: None,
                edges: Vec::new(),
            }
        } else {
            let nodes = scenario.network.nodes().to_vec();
            let name = |i: usize| nodes[i].clone();
            NetworkConfig {
                preset: None,
                source: Some(name(scenario.network.source())),
                sink: Some(name(scenario.network.sink())),
                edges: scenario
                    .network
                    .edges()
                    .iter()
                    .map(|e| EdgeConfig {
                        name: e.name.clone(),
                        tail: name(e.tail),
                        head: name(e.head),
                        cost: match &e.cost {
                            CostFunction::Constant { c } => CostConfig::Constant { c: Ratio(c.clone()) },
                            CostFunction::Affine { a, b } => CostConfig::Affine {
                                a: Ratio(a.clone()),
                                b: Ratio(b.clone()),
                            },
                            CostFunction::Monomial { a, p, b } => CostConfig::Monomial {
                                a: Ratio(a.clone()),
                                p: *p,
                                b: Ratio(b.clone()),
                            },
                        },
                    })
                    .collect(),
                nodes: Some(nodes.clone()),
            }
        };
        let shares = scenario.partition.shares();
        let partition = if shares.windows(2).all(|w| w[0] == w[1]) {
            PartitionConfig { equal: Some(shares.len()), shares: None }
        } else {
            PartitionConfig {
                equal: None,
                shares: Some(shares.iter().cloned().map(Ratio).collect()),
            }
        };
        // The most common spec becomes the default; ties go to the lowest planner.
        let base_spec = scenario
            .strategies
            .iter()
            .max_by_key(|s| {
                let count = scenario.strategies.iter().filter(|t| t == s).count();
                let first = scenario.strategies.iter().position(|t| t == *s).unwrap_or(0);
                (count, std::cmp::Reverse(first))
            })
            .ok_or_else(|| Error::config(None, "scenario has no planners"))?;
        let (kind, punishment_length, lambda, delta, inertia) = strategy_to_parts(base_spec)?;
        let mut overrides = Vec::new();
        for (planner, s) in scenario.strategies.iter().enumerate() {
            if s != base_spec {
                let (kind, punishment_length, lambda, delta, inertia) = strategy_to_parts(s)?;
                overrides.push(Spanned::new(
                    0..0,
                    OverrideConfig { planner, kind, punishment_length, lambda, delta, inertia },
                ));
            }
        }
        let defections = scenario
            .defections
            .iter()
            .map(|d| {
                Spanned::new(
                    0..0,
                    DefectionConfig {
                        planner: d.planner,
                        subset: d
                            .subset
                            .pieces()
                            .iter()
                            .map(|(a, b)| [Ratio(a.clone()), Ratio(b.clone())])
                            .collect(),
                        policy: policy_name(&d.policy),
                        start: d.start,
                        stages: d.stages,
                    },
                )
            })
            .collect();
        Ok(ScenarioConfig {
            seed: scenario.seed,
            horizon: scenario.horizon,
            mode: scenario.mode,
            segments: scenario.segments,
            identify_defections: scenario.identify_defections,
            discounts: scenario.discounts.iter().cloned().map(Ratio).collect(),
            network: Spanned::new(0..0, network),
            partition: Spanned::new(0..0, partition),
            strategy: Spanned::new(
                0..0,
                StrategyConfig { kind, punishment_length, lambda, delta, inertia, overrides },
            ),
            defections,
        })
    }
}

/// Parses and validates a scenario file.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    ScenarioConfig::from_toml(text)?.to_scenario(text)
}

/// Canonical TOML text of a scenario.
pub fn canonical_toml(scenario: &Scenario) -> Result<String> {
    ScenarioConfig::from_scenario(scenario)?.to_toml()
}

/// Hex SHA-256 of the canonical text.
pub fn config_hash(scenario: &Scenario) -> Result<String> {
    Ok(text_hash(&canonical_toml(scenario)?))
}

pub fn text_hash(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Reads and parses a scenario file.
pub fn load_scenario(path: &std::path::Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config(None, format!("{}: {e}", path.display())))?;
    parse_scenario(&text)
}
