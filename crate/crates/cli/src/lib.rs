//! Command-line front end: `equilibrium`, `simulate`, `verify`,
//! `impossibility` and `sweep`.
//!
//! Exit codes: 0 when everything passes, 1 when a violation or witness is
//! found, 2 for malformed input.

use std::ffi::OsString;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::{json, Value};

use planner_routing::config::{config_hash, load_scenario, text_hash};
use planner_routing::equilibrium::{
    solve_planner_equilibrium, verify_planner_equilibrium, EquilibriumCheck, EquilibriumSolution, Partition,
};
use planner_routing::game::{write_csv_summary, write_jsonl_trace, TraceMeta};
use planner_routing::num::{format_q, parse_q};
use planner_routing::scenario::Scenario;
use planner_routing::strategies::{compute_punishment_length, StrategySpec};
use planner_routing::verify::{
    check_history_collective, check_individual_rationality, check_optimality, check_resilience,
    evaluation_to_json, find_profitable_defection, replay, report_to_json, DeviationFamily, Verdict,
    VerificationReport,
};
use planner_routing::{Error, NumberMode, Result, Scalar, ENGINE, Q};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "planner-routing", version, about = "Multi-planner selfish routing: equilibria, simulation, verification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the one-shot planner equilibrium of a partition.
    Equilibrium(Common),
    /// Play the repeated game and write trace files.
    Simulate(Common),
    /// Check the desiderata over the deviation family.
    Verify(Common),
    /// Search for a profitable segment defection.
    Impossibility(Common),
    /// Equilibrium summary for a range of equal-share planner counts.
    Sweep(SweepArgs),
}

#[derive(Args, Debug, Clone, Default)]
struct Common {
    /// Scenario file (TOML).
    #[arg(long, conflicts_with_all = ["shares", "equal"])]
    config: Option<PathBuf>,
    #[arg(long)]
    horizon: Option<usize>,
    /// Discount factor; repeat to give a grid.
    #[arg(long = "discount")]
    discounts: Vec<String>,
    #[arg(long)]
    segments: Option<usize>,
    /// `rational` or `float`.
    #[arg(long)]
    mode: Option<NumberMode>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated planner shares, e.g. `1/10,1/5,7/10`.
    #[arg(long, value_delimiter = ',', conflicts_with = "equal")]
    shares: Option<Vec<String>>,
    /// Number of equal-share planners.
    #[arg(long)]
    equal: Option<usize>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Planner counts as `a..b` (inclusive).
    #[arg(long, default_value = "1..20")]
    planners: String,
    #[arg(long)]
    mode: Option<NumberMode>,
    #[arg(long)]
    out: Option<PathBuf>,
}

macro_rules! dispatch {
    ($mode:expr, $f:ident($($arg:expr),*)) => {
        match $mode {
            NumberMode::Rational => $f::<Q>($($arg),*),
            NumberMode::Float => $f::<f64>($($arg),*),
        }
    };
}

/// Parses `argv` (program name first) and runs the command.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    let config = match &cli.command {
        Command::Sweep(_) => None,
        Command::Equilibrium(c) | Command::Simulate(c) | Command::Verify(c) | Command::Impossibility(c) => {
            c.config.clone()
        }
    };
    let result = match cli.command {
        Command::Equilibrium(c) => scenario_for(&c).and_then(|(s, out)| dispatch!(s.mode, equilibrium(&s, out))),
        Command::Simulate(c) => scenario_for(&c).and_then(|(s, out)| dispatch!(s.mode, simulate(&s, out))),
        Command::Verify(c) => scenario_for(&c).and_then(|(s, out)| dispatch!(s.mode, verify(&s, out))),
        Command::Impossibility(c) => {
            let explicit = !c.discounts.is_empty();
            scenario_for(&c).and_then(|(s, out)| dispatch!(s.mode, impossibility(&s, explicit, out)))
        }
        Command::Sweep(a) => sweep(&a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            match (&e, &config) {
                (Error::Config { line: Some(l), message }, Some(path)) => {
                    eprintln!("error: {}:{l}: {message}", path.display())
                }
                _ => eprintln!("error: {e}"),
            }
            EXIT_CONFIG
        }
    }
}

/// Builds the scenario from `--config` or a bare partition, then applies
/// the command-line overrides.
fn scenario_for(c: &Common) -> Result<(Scenario, Option<PathBuf>)> {
    let mut scenario = match (&c.config, &c.shares, c.equal) {
        (Some(path), _, _) => load_scenario(path)?,
        (None, Some(shares), _) => {
            let shares = shares.iter().map(|s| parse_q(s.trim())).collect::<Result<Vec<_>>>()?;
            Scenario::pigou(Partition::new(shares)?, StrategySpec::Punishment { length: None })
        }
        (None, None, Some(n)) => Scenario::pigou(Partition::equal(n)?, StrategySpec::Punishment { length: None }),
        (None, None, None) => {
            return Err(Error::config(None, "give --config, --shares or --equal"));
        }
    };
    if let Some(h) = c.horizon {
        scenario.horizon = h;
    }
    if !c.discounts.is_empty() {
        scenario.discounts = c.discounts.iter().map(|d| parse_q(d.trim())).collect::<Result<_>>()?;
    }
    if let Some(m) = c.segments {
        scenario.segments = m;
    }
    if let Some(mode) = c.mode {
        scenario.mode = mode;
    }
    scenario.validate()?;
    Ok((scenario, c.out.clone()))
}

fn meta(scenario: &Scenario) -> Result<TraceMeta> {
    Ok(TraceMeta {
        engine: ENGINE.to_string(),
        seed: scenario.seed,
        config_sha256: config_hash(scenario)?,
    })
}

fn show<S: Scalar>(x: &S) -> String {
    match x.to_json() {
        Value::String(s) => s,
        other => other.to_string(),
    }
}

fn write_json(dir: &Path, name: &str, value: &Value) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))?;
    text.push('\n');
    fs::write(&path, text)?;
    Ok(path)
}

fn equilibrium<S: Scalar>(scenario: &Scenario, out: Option<PathBuf>) -> Result<i32> {
    let partition = &scenario.partition;
    let eq: EquilibriumSolution<S> = solve_planner_equilibrium(partition);
    let check = verify_planner_equilibrium(partition, &eq.lambdas)?;
    println!("{:>7}  {:>12}  {:>12}", "planner", "share", "lambda");
    for (i, (a, l)) in partition.shares().iter().zip(&eq.lambdas).enumerate() {
        println!("{i:>7}  {:>12}  {:>12}", format_q(a), show(l));
    }
    println!("F = {}", show(&eq.total_bottom_flow));
    let status = match &check {
        EquilibriumCheck::Pass => "pass".to_string(),
        EquilibriumCheck::Fail { planner, improving, .. } => {
            format!("fail: planner {planner} improves with {}", show(improving))
        }
    };
    println!("status = {status}");
    let record = json!({
        "type": "equilibrium",
        "meta": meta(scenario)?.to_json(),
        "mode": S::MODE.to_string(),
        "shares": partition.shares().iter().map(format_q).collect::<Vec<_>>(),
        "lambdas": eq.lambdas.iter().map(Scalar::to_json).collect::<Vec<_>>(),
        "total_bottom_flow": eq.total_bottom_flow.to_json(),
        "status": if check.is_pass() { "pass" } else { "fail" },
    });
    println!("{record}");
    if let Some(dir) = out {
        write_json(&dir, "equilibrium.json", &record)?;
    }
    Ok(if check.is_pass() { EXIT_PASS } else { EXIT_VIOLATION })
}

fn simulate<S: Scalar>(scenario: &Scenario, out: Option<PathBuf>) -> Result<i32> {
    let history = scenario.run::<S>(scenario.horizon)?;
    let meta = meta(scenario)?;
    let dir = out.unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&dir)?;
    let mut trace = BufWriter::new(fs::File::create(dir.join("trace.jsonl"))?);
    write_jsonl_trace(&mut trace, &meta, &scenario.network, &history)?;
    trace.flush()?;
    let mut csv = BufWriter::new(fs::File::create(dir.join("summary.csv"))?);
    write_csv_summary(&mut csv, &meta, &scenario.network, &history)?;
    csv.flush()?;

    println!("{:>6}  {:>14}", "stage", "total_cost");
    for r in &history.records {
        println!("{:>6}  {:>14}", r.stage, show(&r.total_cost));
    }
    println!("wrote {} and {}", dir.join("trace.jsonl").display(), dir.join("summary.csv").display());
    Ok(EXIT_PASS)
}

fn summary_row<S: Scalar>(report: &VerificationReport<S>) {
    println!(
        "{:<26} {:<15} {:>10}  {}",
        report.desideratum.to_string(),
        report.verdict.to_string(),
        report.threshold.as_ref().map_or_else(|| "-".into(), format_q),
        report.witness.as_ref().map_or_else(|| "-".into(), |w| w.deviation.describe()),
    );
}

fn verify<S: Scalar>(scenario: &Scenario, out: Option<PathBuf>) -> Result<i32> {
    let family = DeviationFamily::with_segments(scenario.segments);
    let horizon = scenario.horizon;
    let ir = check_individual_rationality::<S>(scenario, &family, &scenario.discounts, horizon)?;
    let resilience = check_resilience::<S>(scenario, &family, &scenario.discounts, horizon)?;
    let optimality = check_optimality::<S>(scenario, horizon);
    let history = scenario.run::<S>(horizon)?;
    let bottom = scenario.network.pigou_paths()?.bottom;
    let collective = check_history_collective(&history, &scenario.partition, bottom)?;
    let flagged: Vec<_> = collective.iter().filter(|c| !c.passed()).collect();

    println!("{:<26} {:<15} {:>10}  witness", "desideratum", "verdict", "threshold");
    summary_row(&ir);
    summary_row(&resilience);
    let (optimality_json, optimality_ok) = match &optimality {
        Ok(o) => {
            println!(
                "{:<26} {:<15} {:>10}  {}",
                "optimality",
                if o.passed { "pass" } else { "violation" },
                "-",
                o.first_failure
                    .as_ref()
                    .map_or_else(|| format!("optimal after stage {}", o.settle_after), |(k, c)| {
                        format!("stage {k} costs {}", show(c))
                    }),
            );
            let json = json!({
                "verdict": if o.passed { "pass" } else { "violation" },
                "optimum": o.optimum.to_json(),
                "settle_after": o.settle_after,
                "first_failure": o.first_failure.as_ref().map(|(k, c)| json!({"stage": k, "cost": c.to_json()})),
            });
            (json, o.passed)
        }
        Err(e) => {
            println!("{:<26} {:<15} {:>10}  {e}", "optimality", "not-checked", "-");
            (json!({"verdict": "not-checked", "reason": e.to_string()}), true)
        }
    };
    let first = flagged.first();
    println!(
        "{:<26} {:<15} {:>10}  {}",
        "no-collective-punishment",
        if flagged.is_empty() { "pass" } else { "violation" },
        "-",
        first.map_or_else(
            || "-".into(),
            |c| {
                let w = c.witness.as_ref().expect("flagged stages carry a witness");
                format!("stage {} planner {} to {}", w.stage, w.planner, format_q(&w.fraction))
            }
        ),
    );
    let collective_json = json!({
        "verdict": if flagged.is_empty() { "pass" } else { "violation" },
        "stages_checked": collective.len(),
        "witnesses": flagged.iter().filter_map(|c| c.witness.as_ref()).map(|w| json!({
            "stage": w.stage,
            "planner": w.planner,
            "fraction": format_q(&w.fraction),
            "fractions": w.fractions.iter().map(format_q).collect::<Vec<_>>(),
            "before": w.before.iter().map(format_q).collect::<Vec<_>>(),
            "after": w.after.iter().map(format_q).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    });

    let violation = ir.verdict == Verdict::Violation
        || resilience.verdict == Verdict::Violation
        || !optimality_ok
        || !flagged.is_empty();
    if let Some(dir) = out {
        let report = json!({
            "type": "verification",
            "meta": meta(scenario)?.to_json(),
            "mode": S::MODE.to_string(),
            "horizon": horizon,
            "segments": scenario.segments,
            "discounts": scenario.discounts.iter().map(format_q).collect::<Vec<_>>(),
            "individual_rationality": report_to_json(&ir),
            "resilience": report_to_json(&resilience),
            "optimality": optimality_json,
            "no_collective_punishment": collective_json,
        });
        let path = write_json(&dir, "report.json", &report)?;
        println!("wrote {}", path.display());
    }
    println!("verdicts are evidence over the finite deviation family, not proofs");
    Ok(if violation { EXIT_VIOLATION } else { EXIT_PASS })
}

/// Default discount when none is given on the command line.
fn impossibility_discount() -> Q {
    planner_routing::num::q(99, 100)
}

fn impossibility<S: Scalar>(scenario: &Scenario, explicit: bool, out: Option<PathBuf>) -> Result<i32> {
    let discount = if explicit {
        scenario.discounts.last().cloned().unwrap_or_else(impossibility_discount)
    } else {
        impossibility_discount()
    };
    let found = find_profitable_defection::<S>(scenario, scenario.segments, &discount, scenario.horizon)?;
    let record = match &found {
        Some(w) => {
            let (base, dev) = replay(scenario, w)?;
            let confirmed = dev.strictly_below(&base);
            println!("witness: {}", w.deviation.describe());
            println!(
                "discount {}  baseline {}  deviated {}  replay {}",
                format_q(&discount),
                show(&base.lower),
                show(&dev.upper),
                if confirmed { "confirmed" } else { "NOT confirmed" }
            );
            json!({
                "verdict": "witness",
                "witness": evaluation_to_json(w),
                "replay_confirmed": confirmed,
            })
        }
        None => {
            println!("no profitable segment defection at discount {}", format_q(&discount));
            json!({"verdict": "none"})
        }
    };
    if let Some(dir) = out {
        let mut report = json!({
            "type": "impossibility",
            "meta": meta(scenario)?.to_json(),
            "mode": S::MODE.to_string(),
            "segments": scenario.segments,
            "discount": format_q(&discount),
            "horizon": scenario.horizon,
        });
        report["result"] = record;
        let path = write_json(&dir, "impossibility.json", &report)?;
        println!("wrote {}", path.display());
    }
    Ok(if found.is_some() { EXIT_VIOLATION } else { EXIT_PASS })
}

fn parse_range(text: &str) -> Result<(usize, usize)> {
    let bad = || Error::config(None, format!("planner range `{text}` is not of the form a..b with 1 <= a <= b"));
    let (a, b) = text.split_once("..").ok_or_else(bad)?;
    let a: usize = a.trim().parse().map_err(|_| bad())?;
    let b: usize = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
    if a == 0 || a > b {
        return Err(bad());
    }
    Ok((a, b))
}

struct SweepRow {
    n: usize,
    flow: String,
    lambda: String,
    stage_cost: String,
    punishment: String,
}

fn sweep_point<S: Scalar>(n: usize) -> Result<SweepRow> {
    let partition = Partition::equal(n)?;
    let eq: EquilibriumSolution<S> = solve_planner_equilibrium(&partition);
    let cost = eq.total_bottom_flow.clone() * eq.total_bottom_flow.clone() + S::one() - eq.total_bottom_flow.clone();
    let punishment = match compute_punishment_length(&eq.total_bottom_flow.to_q()) {
        Ok(len) => len.to_string(),
        Err(_) => "-".into(),
    };
    Ok(SweepRow {
        n,
        flow: show(&eq.total_bottom_flow),
        lambda: show(&eq.lambdas[0]),
        stage_cost: show(&cost),
        punishment,
    })
}

fn sweep(args: &SweepArgs) -> Result<i32> {
    let (a, b) = parse_range(&args.planners)?;
    let mode = args.mode.unwrap_or(NumberMode::Rational);
    // Points run concurrently; collect keeps sweep order.
    let rows = (a..=b)
        .into_par_iter()
        .map(|n| dispatch!(mode, sweep_point(n)))
        .collect::<Result<Vec<_>>>()?;
    let hash = text_hash(&format!("sweep planners={a}..{b} mode={mode}\n"));
    let mut text = format!("# engine={ENGINE} seed=0 config_sha256={hash} mode={mode}\n");
    text.push_str("planners,total_bottom_flow,lambda,stage_cost,punishment_length\n");
    for r in &rows {
        text.push_str(&format!("{},{},{},{},{}\n", r.n, r.flow, r.lambda, r.stage_cost, r.punishment));
    }
    print!("{text}");
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("sweep.csv"), &text)?;
    }
    Ok(EXIT_PASS)
}
