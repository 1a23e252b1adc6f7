use std::io::Write;

use serde_json::{json, Map, Value};

use super::History;
use crate::error::Result;
use crate::network::Network;
use crate::num::Scalar;

/// Reproducibility header carried by every output file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceMeta {
    pub engine: String,
    pub seed: u64,
    pub config_sha256: String,
}

impl TraceMeta {
    pub fn to_json(&self) -> Value {
        json!({
            "engine": self.engine,
            "seed": self.seed,
            "config_sha256": self.config_sha256,
        })
    }
}

fn bottom_path(network: &Network) -> Option<usize> {
    network.pigou_paths().ok().map(|p| p.bottom)
}

/// One JSON object per line: a header, then one record per stage.
pub fn write_jsonl_trace<S: Scalar, W: Write>(
    out: &mut W,
    meta: &TraceMeta,
    network: &Network,
    history: &History<S>,
) -> Result<()> {
    let mut header = meta.to_json();
    header["type"] = json!("header");
    header["mode"] = json!(S::MODE.to_string());
    header["edges"] = json!(network.edges().iter().map(|e| e.name.clone()).collect::<Vec<_>>());
    writeln!(out, "{header}")?;
    let bottom = bottom_path(network);
    for r in &history.records {
        let mut flows = Map::new();
        for (e, f) in network.edges().iter().zip(&r.edge_flows) {
            flows.insert(e.name.clone(), f.to_json());
        }
        let mut rec = json!({
            "type": "stage",
            "stage": r.stage,
            "edge_flows": flows,
            "total_cost": r.total_cost.to_json(),
            "planner_costs": r.planner_costs.iter().map(Scalar::to_json).collect::<Vec<_>>(),
        });
        match bottom {
            Some(b) => {
                rec["bottom_fraction"] = json!(r
                    .assignments
                    .iter()
                    .map(|a| S::from_q(&a.measure_on(b)).to_json())
                    .collect::<Vec<_>>());
            }
            None => {
                let n_paths = network.paths().len();
                rec["path_fractions"] = json!(r
                    .assignments
                    .iter()
                    .map(|a| a.path_measures(n_paths).iter().map(|m| S::from_q(m).to_json()).collect::<Vec<_>>())
                    .collect::<Vec<_>>());
            }
        }
        if !r.defections.is_empty() {
            rec["defections"] = json!(r
                .defections
                .iter()
                .map(|d| json!({"planner": d.planner, "subset": d.subset.to_string(), "taken": d.taken.to_string()}))
                .collect::<Vec<_>>());
        }
        writeln!(out, "{rec}")?;
    }
    Ok(())
}

fn plain(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// `stage,bottom_flow,total_cost` rows after a `#` header line.
/// `bottom_flow` is left empty on networks without a bottom path.
pub fn write_csv_summary<S: Scalar, W: Write>(
    out: &mut W,
    meta: &TraceMeta,
    network: &Network,
    history: &History<S>,
) -> Result<()> {
    writeln!(
        out,
        "# engine={} seed={} config_sha256={} mode={}",
        meta.engine,
        meta.seed,
        meta.config_sha256,
        S::MODE
    )?;
    writeln!(out, "stage,bottom_flow,total_cost")?;
    let bottom = bottom_path(network);
    for r in &history.records {
        let flow = bottom.map_or_else(String::new, |b| plain(&r.path_flow(network, b).to_json()));
        writeln!(out, "{},{},{}", r.stage, flow, plain(&r.total_cost.to_json()))?;
    }
    Ok(())
}
