//! `seclab`: analytic guarantee curves, Monte Carlo simulation, exhaustive
//! oracles, and attack-stream replay for budgeted online selection.
//!
//! Exit codes: 0 on success, 2 for usage/configuration errors, 3 for
//! input-data errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod error;
mod klist;
mod manifest;
mod wire;

use commands::{AnalyzeArgs, AttackArgs, BoundArgs, Invocation, OracleArgs, SimulateArgs};
use error::{usage, CliError};

#[derive(Parser)]
#[command(
    name = "seclab",
    version,
    about = "Budgeted online selection lab: guarantee curves, simulation, exact oracles, attack replay"
)]
struct Cli {
    /// Worker threads for Monte Carlo estimation (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Directory for result files and the run manifest.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the guarantee curve (alpha_star, c_k) for each budget.
    Analyze {
        /// Budgets, as a comma list with inclusive spans (e.g. "2,5..8").
        #[arg(long)]
        k: String,
    },
    /// Estimate value/overlap ratios on synthetic noisy streams.
    Simulate {
        /// Policies to sweep, comma separated
        /// (naive|opt|virtual|optimistic|single-ref|virtual+).
        #[arg(long, default_value = "virtual+")]
        policy: String,
        /// Budgets, as a comma list with inclusive spans.
        #[arg(long)]
        k: String,
        /// Stream length.
        #[arg(long)]
        n: usize,
        /// Observation noise variance.
        #[arg(long, default_value_t = 0.0)]
        sigma2: f64,
        /// Monte Carlo trials per (policy, k) cell.
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        /// Base RNG seed (falls back to SECLAB_SEED, then 0).
        #[arg(long)]
        seed: Option<u64>,
        /// Sampling threshold override (default: per-policy optimum).
        #[arg(long)]
        t: Option<usize>,
        /// Reference rank (single-ref only).
        #[arg(long)]
        r: Option<usize>,
        /// Force the budget to be exhausted at the tail.
        #[arg(long, value_parser = ["on", "off"], default_value = "off")]
        exhaust: String,
    },
    /// Replay a recorded stream under uniform re-orderings and report
    /// fool rates.
    Attack {
        /// JSONL stream file (one record per line).
        #[arg(long)]
        input: PathBuf,
        /// Policy to replay.
        #[arg(long, default_value = "virtual+")]
        policy: String,
        /// Selection budget.
        #[arg(long)]
        k: usize,
        /// Sampling threshold override.
        #[arg(long)]
        t: Option<usize>,
        /// Reference rank (single-ref only).
        #[arg(long)]
        r: Option<usize>,
        /// Force the budget to be exhausted at the tail.
        #[arg(long, value_parser = ["on", "off"], default_value = "on")]
        exhaust: String,
        /// Number of random re-orderings.
        #[arg(long, default_value_t = 100)]
        permutations: u64,
        /// Base RNG seed (falls back to SECLAB_SEED, then 0).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Exact selection probabilities by enumerating all arrival orders
    /// (n <= 8).
    Oracle {
        /// Policy to enumerate.
        #[arg(long, default_value = "virtual+")]
        policy: String,
        /// Stream length.
        #[arg(long)]
        n: usize,
        /// Selection budget.
        #[arg(long)]
        k: usize,
        /// Sampling threshold override.
        #[arg(long)]
        t: Option<usize>,
        /// Cross-check the k=2 closed-form ratio against the enumeration.
        #[arg(long)]
        check_formula: bool,
    },
    /// Combine the clean guarantee with the noise attenuation factor.
    Bound {
        /// Half the smallest gap between distinct clean values.
        #[arg(long)]
        delta: f64,
        /// Noise standard deviation.
        #[arg(long)]
        sigma: f64,
        /// Selection budget.
        #[arg(long)]
        k: usize,
    },
    /// Replay a previous run from its manifest.json (needs --out).
    Rerun {
        /// Path to a manifest.json written by a previous run.
        manifest: PathBuf,
    },
}

/// Seed precedence: explicit flag, then SECLAB_SEED, then 0.
fn resolve_seed(flag: Option<u64>) -> Result<u64, CliError> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var("SECLAB_SEED") {
        Ok(text) => text
            .trim()
            .parse()
            .map_err(|_| usage(format!("SECLAB_SEED must be an unsigned integer, got {text:?}"))),
        Err(_) => Ok(0),
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| usage(format!("cannot configure {jobs} worker threads: {e}")))?;
    }
    let out = cli.out.as_deref();
    match cli.command {
        Command::Analyze { k } => Invocation::Analyze(AnalyzeArgs { k }).run(out),
        Command::Simulate { policy, k, n, sigma2, trials, seed, t, r, exhaust } => {
            let seed = resolve_seed(seed)?;
            Invocation::Simulate(SimulateArgs {
                policy,
                k,
                n,
                sigma2,
                trials,
                seed,
                t,
                r,
                exhaust: exhaust == "on",
            })
            .run(out)
        }
        Command::Attack { input, policy, k, t, r, exhaust, permutations, seed } => {
            let seed = resolve_seed(seed)?;
            Invocation::Attack(AttackArgs {
                input: input.display().to_string(),
                policy,
                k,
                t,
                r,
                exhaust: exhaust == "on",
                permutations,
                seed,
            })
            .run(out)
        }
        Command::Oracle { policy, n, k, t, check_formula } => {
            Invocation::Oracle(OracleArgs { policy, n, k, t, check_formula }).run(out)
        }
        Command::Bound { delta, sigma, k } => {
            Invocation::Bound(BoundArgs { delta, sigma, k }).run(out)
        }
        Command::Rerun { manifest } => commands::rerun(&manifest, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
