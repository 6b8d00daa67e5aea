//! The five subcommands and their manifest round-trip.
//!
//! Each subcommand is a plain parameter struct; `Invocation::run` executes
//! it, printing a human-readable report to stdout and, when an output
//! directory is given, writing CSV/JSON result files plus a `manifest.json`
//! sidecar. `Invocation::from_manifest` inverts `to_manifest`, which is
//! what makes `seclab rerun` reproduce a run bit-for-bit.

use std::fs;
use std::path::Path;

use serde::Serialize;

use seclab_core::analysis::{enumerate_exact, finite_ratio_k2, optimal_threshold, stochastic_factor, BoundResult};
use seclab_core::harness::{run_attack_permutations, sweep, SweepRow, SweepSpec};
use seclab_core::policy::PolicyConfig;

use crate::error::{data, usage, CliError};
use crate::klist::{parse_k_list, parse_policy, parse_policy_list};
use crate::manifest::RunManifest;
use crate::wire::{read_records, record_lines, to_stream};

// ---------------------------------------------------------------------------
// Parameter structs
// ---------------------------------------------------------------------------

/// `seclab analyze`: the guarantee curve (threshold fraction and bound)
/// for each budget in a list.
#[derive(Debug, Clone)]
pub struct AnalyzeArgs {
    /// Budget list, verbatim (e.g. "2,5..8").
    pub k: String,
}

/// `seclab simulate`: Monte Carlo ratio estimation over synthetic streams.
#[derive(Debug, Clone)]
pub struct SimulateArgs {
    /// Policy list, verbatim (e.g. "virtual,virtual+").
    pub policy: String,
    pub k: String,
    pub n: usize,
    pub sigma2: f64,
    pub trials: u64,
    pub seed: u64,
    pub t: Option<usize>,
    pub r: Option<usize>,
    pub exhaust: bool,
}

/// `seclab attack`: replay a recorded stream under random re-orderings.
#[derive(Debug, Clone)]
pub struct AttackArgs {
    /// JSONL input path.
    pub input: String,
    pub policy: String,
    pub k: usize,
    pub t: Option<usize>,
    pub r: Option<usize>,
    pub exhaust: bool,
    pub permutations: u64,
    pub seed: u64,
}

/// `seclab oracle`: exact selection probabilities by exhaustive
/// enumeration of all arrival orders.
#[derive(Debug, Clone)]
pub struct OracleArgs {
    pub policy: String,
    pub n: usize,
    pub k: usize,
    pub t: Option<usize>,
    /// Cross-check the k=2 closed-form ratio against the enumeration.
    pub check_formula: bool,
}

/// `seclab bound`: combined noisy-instance guarantee.
#[derive(Debug, Clone)]
pub struct BoundArgs {
    /// Half the smallest gap between distinct clean values.
    pub delta: f64,
    /// Noise standard deviation.
    pub sigma: f64,
    pub k: usize,
}

/// One fully-resolved command invocation.
#[derive(Debug, Clone)]
pub enum Invocation {
    Analyze(AnalyzeArgs),
    Simulate(SimulateArgs),
    Attack(AttackArgs),
    Oracle(OracleArgs),
    Bound(BoundArgs),
}

// ---------------------------------------------------------------------------
// Manifest round-trip
// ---------------------------------------------------------------------------

fn require<T>(value: Option<T>, field: &str, command: &str) -> Result<T, CliError> {
    value.ok_or_else(|| usage(format!("manifest for {command:?} is missing {field:?}")))
}

fn parse_single_k(raw: &str) -> Result<usize, CliError> {
    raw.trim()
        .parse()
        .map_err(|_| usage(format!("expected a single budget, got {raw:?}")))
}

impl Invocation {
    pub fn command(&self) -> &'static str {
        match self {
            Invocation::Analyze(_) => "analyze",
            Invocation::Simulate(_) => "simulate",
            Invocation::Attack(_) => "attack",
            Invocation::Oracle(_) => "oracle",
            Invocation::Bound(_) => "bound",
        }
    }

    /// Everything needed to reproduce this run, with parameters kept
    /// verbatim so the rerun parses them exactly as the original did.
    pub fn to_manifest(&self) -> RunManifest {
        let mut m = RunManifest::new(self.command());
        match self {
            Invocation::Analyze(a) => {
                m.k = Some(a.k.clone());
            }
            Invocation::Simulate(a) => {
                m.policy = Some(a.policy.clone());
                m.k = Some(a.k.clone());
                m.n = Some(a.n);
                m.t = a.t;
                m.r = a.r;
                m.sigma2 = Some(a.sigma2);
                m.trials = Some(a.trials);
                m.seed = Some(a.seed);
                m.exhaust = Some(a.exhaust);
            }
            Invocation::Attack(a) => {
                m.policy = Some(a.policy.clone());
                m.k = Some(a.k.to_string());
                m.t = a.t;
                m.r = a.r;
                m.exhaust = Some(a.exhaust);
                m.permutations = Some(a.permutations);
                m.seed = Some(a.seed);
                m.input = Some(a.input.clone());
            }
            Invocation::Oracle(a) => {
                m.policy = Some(a.policy.clone());
                m.n = Some(a.n);
                m.k = Some(a.k.to_string());
                m.t = a.t;
                m.check_formula = Some(a.check_formula);
            }
            Invocation::Bound(a) => {
                m.delta = Some(a.delta);
                m.sigma = Some(a.sigma);
                m.k = Some(a.k.to_string());
            }
        }
        m
    }

    /// Rebuilds the invocation recorded in a manifest. Required fields
    /// must be present; optional ones fall back to the CLI defaults.
    pub fn from_manifest(m: &RunManifest) -> Result<Self, CliError> {
        let cmd = m.command.as_str();
        match cmd {
            "analyze" => Ok(Invocation::Analyze(AnalyzeArgs {
                k: require(m.k.clone(), "k", cmd)?,
            })),
            "simulate" => Ok(Invocation::Simulate(SimulateArgs {
                policy: require(m.policy.clone(), "policy", cmd)?,
                k: require(m.k.clone(), "k", cmd)?,
                n: require(m.n, "n", cmd)?,
                sigma2: m.sigma2.unwrap_or(0.0),
                trials: m.trials.unwrap_or(1000),
                seed: m.seed.unwrap_or(0),
                t: m.t,
                r: m.r,
                exhaust: m.exhaust.unwrap_or(false),
            })),
            "attack" => Ok(Invocation::Attack(AttackArgs {
                input: require(m.input.clone(), "input", cmd)?,
                policy: require(m.policy.clone(), "policy", cmd)?,
                k: parse_single_k(&require(m.k.clone(), "k", cmd)?)?,
                t: m.t,
                r: m.r,
                exhaust: m.exhaust.unwrap_or(true),
                permutations: m.permutations.unwrap_or(100),
                seed: m.seed.unwrap_or(0),
            })),
            "oracle" => Ok(Invocation::Oracle(OracleArgs {
                policy: require(m.policy.clone(), "policy", cmd)?,
                n: require(m.n, "n", cmd)?,
                k: parse_single_k(&require(m.k.clone(), "k", cmd)?)?,
                t: m.t,
                check_formula: m.check_formula.unwrap_or(false),
            })),
            "bound" => Ok(Invocation::Bound(BoundArgs {
                delta: require(m.delta, "delta", cmd)?,
                sigma: require(m.sigma, "sigma", cmd)?,
                k: parse_single_k(&require(m.k.clone(), "k", cmd)?)?,
            })),
            other => Err(usage(format!("manifest names unknown command {other:?}"))),
        }
    }

    /// Executes the command. With an output directory, result files and a
    /// `manifest.json` are written there (the directory is created).
    pub fn run(&self, out: Option<&Path>) -> Result<(), CliError> {
        if let Some(dir) = out {
            fs::create_dir_all(dir)
                .map_err(|e| data(format!("cannot create {}: {e}", dir.display())))?;
        }
        match self {
            Invocation::Analyze(a) => run_analyze(a, out)?,
            Invocation::Simulate(a) => run_simulate(a, out)?,
            Invocation::Attack(a) => run_attack_cmd(a, out)?,
            Invocation::Oracle(a) => run_oracle(a, out)?,
            Invocation::Bound(a) => run_bound(a, out)?,
        }
        if let Some(dir) = out {
            self.to_manifest().write(dir)?;
        }
        Ok(())
    }
}

/// Replays the run recorded at `path` into `out` (required, so the
/// reproduced files have somewhere to land).
pub fn rerun(path: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let out = out.ok_or_else(|| usage("rerun needs --out DIR for the reproduced files"))?;
    let manifest = RunManifest::read(path)?;
    Invocation::from_manifest(&manifest)?.run(Some(out))
}

// ---------------------------------------------------------------------------
// Output helpers
// ---------------------------------------------------------------------------

/// Renders CSV rows into a string; in-memory writes cannot fail.
fn csv_to_string(build: impl FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    build(&mut writer).expect("in-memory csv write");
    String::from_utf8(writer.into_inner().expect("csv flush")).expect("csv output is utf8")
}

/// Shortest round-trip decimal form, or an empty cell for `None`.
fn opt_cell(value: Option<f64>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}

fn write_out(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| data(format!("cannot write {}: {e}", path.display())))
}

fn json_pretty<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    text
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct AnalyzeRow {
    k: usize,
    alpha_star: f64,
    c_k: f64,
}

fn run_analyze(args: &AnalyzeArgs, out: Option<&Path>) -> Result<(), CliError> {
    let ks = parse_k_list(&args.k)?;
    let mut results: Vec<BoundResult> = Vec::with_capacity(ks.len());
    for &k in &ks {
        if k < 2 {
            return Err(usage(format!(
                "analyze needs k >= 2, got {k}; the k = 1 curve degenerates to the classical n/e rule"
            )));
        }
        results.push(optimal_threshold(k)?);
    }

    println!("{:>6}  {:>19}  {:>19}", "k", "alpha_star", "c_k");
    for r in &results {
        println!("{:>6}  {:>19.15}  {:>19.15}", r.k, r.alpha_star, r.c_k);
    }

    if let Some(dir) = out {
        let csv = csv_to_string(|w| {
            w.write_record(["k", "alpha_star", "c_k"])?;
            for r in &results {
                w.write_record(&[r.k.to_string(), r.alpha_star.to_string(), r.c_k.to_string()])?;
            }
            Ok(())
        });
        write_out(dir, "analyze.csv", &csv)?;
        let rows: Vec<AnalyzeRow> = results
            .iter()
            .map(|r| AnalyzeRow { k: r.k, alpha_star: r.alpha_star, c_k: r.c_k })
            .collect();
        write_out(dir, "analyze.json", &json_pretty(&rows))?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

fn run_simulate(args: &SimulateArgs, out: Option<&Path>) -> Result<(), CliError> {
    let spec = SweepSpec {
        policies: parse_policy_list(&args.policy)?,
        ks: parse_k_list(&args.k)?,
        n: args.n,
        sigma2: args.sigma2,
        trials: args.trials,
        seed: args.seed,
        t: args.t,
        r: args.r,
        exhaust_budget: args.exhaust,
    };
    let rows = sweep(&spec)?;

    println!(
        "n={} sigma2={} trials={} seed={}",
        args.n, args.sigma2, args.trials, args.seed
    );
    println!(
        "{:<12} {:>5} {:>5}  {:>10} {:>10}  {:>12} {:>10}  {:>10} {:>10}",
        "policy", "k", "t", "value", "se", "intersection", "se", "obs_value", "obs_inter"
    );
    for row in &rows {
        let r = &row.report;
        println!(
            "{:<12} {:>5} {:>5}  {:>10.6} {:>10.6}  {:>12.6} {:>10.6}  {:>10.6} {:>10.6}",
            row.policy.name(),
            row.k,
            row.t,
            r.value_ratio.unwrap_or(f64::NAN),
            r.std_error,
            r.intersection_ratio.unwrap_or(f64::NAN),
            r.intersection_std_error,
            r.observed_value_ratio,
            r.observed_intersection_ratio,
        );
    }

    if let Some(dir) = out {
        write_out(dir, "results.csv", &results_csv(args, &rows))?;
        let plot = csv_to_string(|w| {
            w.write_record(["policy", "x", "y", "err"])?;
            for row in &rows {
                w.write_record(&[
                    row.policy.name().to_string(),
                    row.k.to_string(),
                    opt_cell(row.report.value_ratio),
                    row.report.std_error.to_string(),
                ])?;
            }
            Ok(())
        });
        write_out(dir, "plot.csv", &plot)?;
    }
    Ok(())
}

fn results_csv(args: &SimulateArgs, rows: &[SweepRow]) -> String {
    csv_to_string(|w| {
        w.write_record([
            "policy",
            "k",
            "n",
            "t",
            "sigma2",
            "trials",
            "value_ratio",
            "value_std_error",
            "intersection_ratio",
            "intersection_std_error",
            "knapsack_ratio",
            "observed_value_ratio",
            "observed_value_std_error",
            "observed_intersection_ratio",
            "observed_intersection_std_error",
        ])?;
        for row in rows {
            let r = &row.report;
            w.write_record(&[
                row.policy.name().to_string(),
                row.k.to_string(),
                args.n.to_string(),
                row.t.to_string(),
                args.sigma2.to_string(),
                r.trials.to_string(),
                opt_cell(r.value_ratio),
                r.std_error.to_string(),
                opt_cell(r.intersection_ratio),
                r.intersection_std_error.to_string(),
                opt_cell(r.knapsack_ratio),
                r.observed_value_ratio.to_string(),
                r.observed_std_error.to_string(),
                r.observed_intersection_ratio.to_string(),
                r.observed_intersection_std_error.to_string(),
            ])?;
        }
        Ok(())
    })
}

// ---------------------------------------------------------------------------
// attack
// ---------------------------------------------------------------------------

fn run_attack_cmd(args: &AttackArgs, out: Option<&Path>) -> Result<(), CliError> {
    let policy = parse_policy(&args.policy)?;
    let records = read_records(Path::new(&args.input))?;
    let stream = to_stream(&records)?;
    let config = PolicyConfig {
        k: args.k,
        t: args.t,
        r: args.r,
        exhaust_budget: args.exhaust,
    };
    let summary = run_attack_permutations(&stream, policy, &config, args.seed, args.permutations)?;
    let agg = &summary.aggregate;

    println!(
        "policy {} over {} records, k={}, {} permutations (seed {})",
        policy.name(),
        stream.n(),
        args.k,
        args.permutations,
        args.seed
    );
    println!(
        "fool rate: {:.6} +/- {:.6} (standard error)",
        agg.fool_rate.unwrap_or(f64::NAN),
        agg.fool_rate_std_error
    );
    if let (Some(v), Some(i)) = (agg.value_ratio, agg.intersection_ratio) {
        println!("value ratio: {:.6} +/- {:.6}", v, agg.std_error);
        println!("intersection ratio: {:.6} +/- {:.6}", i, agg.intersection_std_error);
    }

    if let Some(dir) = out {
        let csv = csv_to_string(|w| {
            w.write_record([
                "permutation",
                "fool_rate",
                "value_ratio",
                "intersection_ratio",
                "observed_value_ratio",
                "observed_intersection_ratio",
            ])?;
            for (p, report) in summary.per_permutation.iter().enumerate() {
                w.write_record(&[
                    p.to_string(),
                    opt_cell(report.fool_rate),
                    opt_cell(report.value_ratio),
                    opt_cell(report.intersection_ratio),
                    report.observed_value_ratio.to_string(),
                    report.observed_intersection_ratio.to_string(),
                ])?;
            }
            Ok(())
        });
        write_out(dir, "attack.csv", &csv)?;
        write_out(dir, "attack_summary.json", &json_pretty(agg))?;
        // Normalized copy of the parsed input, so the run directory is
        // self-contained; parse -> serialize -> parse is the identity.
        write_out(dir, "input.jsonl", &record_lines(&records))?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// oracle
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct OracleReport {
    policy: String,
    n: usize,
    k: usize,
    t: usize,
    /// Exact `P(rank-a item selected)` for ranks 1..=k, as "num/den".
    per_rank_probability: Vec<String>,
    per_rank_probability_f64: Vec<f64>,
    competitive_ratio: String,
    competitive_ratio_f64: f64,
}

fn run_oracle(args: &OracleArgs, out: Option<&Path>) -> Result<(), CliError> {
    let policy = parse_policy(&args.policy)?;
    let config = PolicyConfig {
        k: args.k,
        t: args.t,
        r: None,
        exhaust_budget: false,
    };
    let report = enumerate_exact(policy, args.n, &config)?;

    let decimal = |ratio: &num_rational::Ratio<i64>| *ratio.numer() as f64 / *ratio.denom() as f64;
    println!(
        "policy {} n={} k={} t={} (all {} orders enumerated)",
        policy.name(),
        report.n,
        report.k,
        report.t,
        (1..=report.n as u64).product::<u64>()
    );
    for (i, p) in report.per_rank_probability.iter().enumerate() {
        println!("rank {:>2}: {:>12}  = {:.12}", i + 1, p.to_string(), decimal(p));
    }
    println!(
        "competitive ratio: {} = {:.12}",
        report.competitive_ratio, report.competitive_ratio_f64
    );

    if args.check_formula {
        if report.k != 2 {
            return Err(usage(format!(
                "--check-formula covers the k=2 closed form only, got k={}",
                report.k
            )));
        }
        let formula = finite_ratio_k2(report.n, report.t)?;
        println!("closed-form ratio: {formula:.12}");
        println!(
            "discrepancy: {:e}",
            (formula - report.competitive_ratio_f64).abs()
        );
    }

    if let Some(dir) = out {
        let csv = csv_to_string(|w| {
            w.write_record(["rank", "probability", "decimal"])?;
            for (i, p) in report.per_rank_probability.iter().enumerate() {
                w.write_record(&[(i + 1).to_string(), p.to_string(), decimal(p).to_string()])?;
            }
            Ok(())
        });
        write_out(dir, "oracle.csv", &csv)?;
        let json = OracleReport {
            policy: policy.name().to_string(),
            n: report.n,
            k: report.k,
            t: report.t,
            per_rank_probability: report
                .per_rank_probability
                .iter()
                .map(|p| p.to_string())
                .collect(),
            per_rank_probability_f64: report.per_rank_probability.iter().map(decimal).collect(),
            competitive_ratio: report.competitive_ratio.to_string(),
            competitive_ratio_f64: report.competitive_ratio_f64,
        };
        write_out(dir, "oracle.json", &json_pretty(&json))?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// bound
// ---------------------------------------------------------------------------

fn run_bound(args: &BoundArgs, out: Option<&Path>) -> Result<(), CliError> {
    if args.delta == 0.0 {
        return Err(usage(
            "stochastic bound inapplicable: value gap is zero (duplicate values)",
        ));
    }
    let factor = stochastic_factor(args.delta, args.sigma)?;
    let curve = optimal_threshold(args.k)?;
    let product = factor * curve.c_k;

    println!("stochastic factor (delta={}, sigma={}): {:.15}", args.delta, args.sigma, factor);
    println!("clean guarantee c_k (k={}): {:.15}", curve.k, curve.c_k);
    println!("combined noisy guarantee: {product:.15}");

    if let Some(dir) = out {
        let csv = csv_to_string(|w| {
            w.write_record(["delta", "sigma", "k", "stochastic_factor", "c_k", "product"])?;
            w.write_record(&[
                args.delta.to_string(),
                args.sigma.to_string(),
                args.k.to_string(),
                factor.to_string(),
                curve.c_k.to_string(),
                product.to_string(),
            ])?;
            Ok(())
        });
        write_out(dir, "bound.csv", &csv)?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
