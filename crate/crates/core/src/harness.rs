//! Monte Carlo harness: synthetic stream generation, competitive-ratio
//! estimation, adversarial-stream replay, and policy/budget sweeps.
//!
//! Determinism contract: every estimate derives trial `i` from the
//! substream `(seed, i)` of [`SeededRng`], trials are collected in index
//! order, and reductions are sequential compensated sums — so results are
//! bitwise identical regardless of how many rayon workers run the trials.

use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::numeric::{compensated_sum, NeumaierSum};
use crate::policy::{
    policy_run, policy_run_offline_opt, resolved_config, PolicyConfig, PolicyError, PolicyKind,
    SelectionTrace,
};
use crate::stream::{compare, SeededRng, Stream, StreamItem};

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Errors from the harness.
#[derive(Debug, Clone, PartialEq)]
pub enum HarnessError {
    /// Attack replay requires a `fooled` flag on every record.
    MissingFooled { arrival: usize },
    /// A policy rejected the run.
    Policy(PolicyError),
    /// The estimation spec itself is malformed.
    InvalidSpec { message: String },
}

impl std::fmt::Display for HarnessError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::MissingFooled { arrival } => {
                write!(f, "record at arrival {arrival} has no fooled flag")
            }
            Self::Policy(e) => write!(f, "policy error: {e}"),
            Self::InvalidSpec { message } => write!(f, "invalid spec: {message}"),
        }
    }
}

impl std::error::Error for HarnessError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Self::Policy(e) => Some(e),
            _ => None,
        }
    }
}

impl From<PolicyError> for HarnessError {
    fn from(e: PolicyError) -> Self {
        Self::Policy(e)
    }
}

fn invalid_spec(message: impl Into<String>) -> HarnessError {
    HarnessError::InvalidSpec { message: message.into() }
}

// ---------------------------------------------------------------------------
// Synthetic streams
// ---------------------------------------------------------------------------

/// Recipe for one synthetic stream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    /// Stream length.
    pub n: usize,
    /// Variance of the additive Gaussian observation noise.
    pub sigma2: f64,
    /// Seed recorded for provenance; draws come from the rng passed to
    /// [`synth_stream`], which the caller derives from this seed.
    pub seed: u64,
}

/// Generates a stream whose true values are the integers `1..=n` and whose
/// observed values add `N(0, sigma2)` noise drawn from `rng`. With
/// `sigma2 == 0` no draws are consumed and observed equals true exactly.
///
/// Panics if `sigma2` is negative or non-finite; validated callers only.
pub fn synth_stream(spec: &SyntheticSpec, rng: &mut SeededRng) -> Stream {
    assert!(
        spec.sigma2.is_finite() && spec.sigma2 >= 0.0,
        "noise variance must be finite and nonnegative, got {}",
        spec.sigma2
    );
    let noise = if spec.sigma2 > 0.0 {
        Some(Normal::new(0.0, spec.sigma2.sqrt()).expect("finite positive std dev"))
    } else {
        None
    };
    let items = (1..=spec.n)
        .map(|i| {
            let true_value = i as f64;
            let observed = match &noise {
                Some(dist) => true_value + dist.sample(rng),
                None => true_value,
            };
            StreamItem {
                id: format!("synth-{i}"),
                arrival: i,
                observed_value: observed,
                true_value: Some(true_value),
                fooled: None,
            }
        })
        .collect();
    Stream::new(items).expect("generated items are contiguous and finite")
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

/// Aggregated scores of one estimation or attack run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    /// Mean captured fraction of the offline-best total true value;
    /// `None` when true values are unavailable.
    pub value_ratio: Option<f64>,
    /// Mean overlap `|selected ∩ offline top-k| / k`; `None` when true
    /// values are unavailable.
    pub intersection_ratio: Option<f64>,
    /// Alias of `value_ratio`: the budget is a cardinality knapsack, so
    /// the captured-value fraction is the knapsack objective ratio.
    pub knapsack_ratio: Option<f64>,
    /// Mean captured fraction of the best total *observed* value — how
    /// well the policy tracked the stream it actually saw. Always
    /// available, since observed values always exist.
    #[serde(default)]
    pub observed_value_ratio: f64,
    /// Mean overlap with the top-k of the *observed* stream, over k.
    /// With zero noise this coincides with `intersection_ratio`.
    #[serde(default)]
    pub observed_intersection_ratio: f64,
    /// Number of Monte Carlo trials (or permutations) aggregated.
    pub trials: u64,
    /// Standard error of `value_ratio` across trials; 0 when undefined.
    pub std_error: f64,
    /// Standard error of `intersection_ratio` across trials.
    pub intersection_std_error: f64,
    /// Standard error of `observed_value_ratio` across trials.
    #[serde(default)]
    pub observed_std_error: f64,
    /// Standard error of `observed_intersection_ratio` across trials.
    #[serde(default)]
    pub observed_intersection_std_error: f64,
    /// Mean fraction of selections that were adversarially fooled;
    /// `None` outside attack replay.
    pub fool_rate: Option<f64>,
    /// Standard error of `fool_rate` across permutations.
    pub fool_rate_std_error: f64,
}

/// Mean and standard error of a sample; SE is 0 for a single observation.
fn mean_and_se(samples: &[f64]) -> (f64, f64) {
    let trials = samples.len();
    let mean = compensated_sum(samples) / trials as f64;
    if trials < 2 {
        return (mean, 0.0);
    }
    let mut squares = NeumaierSum::new();
    for &x in samples {
        let d = x - mean;
        squares.add(d * d);
    }
    let variance = squares.total() / (trials - 1) as f64;
    (mean, (variance / trials as f64).sqrt())
}

// ---------------------------------------------------------------------------
// Ratio estimation
// ---------------------------------------------------------------------------

/// Spec for one Monte Carlo competitive-ratio estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateSpec {
    pub policy: PolicyKind,
    pub n: usize,
    pub k: usize,
    pub sigma2: f64,
    pub trials: u64,
    pub seed: u64,
    /// Optional explicit sampling threshold.
    pub t: Option<usize>,
    /// Optional reference rank (single-ref only).
    pub r: Option<usize>,
    /// Forward forced exhaustion to the policy.
    pub exhaust_budget: bool,
}

impl EstimateSpec {
    /// Spec with default threshold/rank and exhaustion off.
    pub fn new(
        policy: PolicyKind,
        n: usize,
        k: usize,
        sigma2: f64,
        trials: u64,
        seed: u64,
    ) -> Self {
        Self { policy, n, k, sigma2, trials, seed, t: None, r: None, exhaust_budget: false }
    }

    fn config(&self) -> PolicyConfig {
        PolicyConfig {
            k: self.k,
            t: self.t,
            r: self.r,
            exhaust_budget: self.exhaust_budget,
        }
    }
}

/// Scores a trace against the offline top-k on true values; returns the
/// captured-value fraction and the overlap fraction.
fn score_against_offline(
    stream: &Stream,
    trace: &SelectionTrace,
    k: usize,
) -> Result<(f64, f64), HarnessError> {
    let offline = policy_run_offline_opt(stream, k)?;
    let true_at = |arrival: usize| {
        stream.items()[arrival - 1]
            .true_value
            .expect("offline selection already required true values")
    };
    let mut captured = NeumaierSum::new();
    for &a in &trace.selected {
        captured.add(true_at(a));
    }
    let mut best = NeumaierSum::new();
    for &a in &offline.selected {
        best.add(true_at(a));
    }
    let overlap = trace.selected.iter().filter(|a| offline.selected.contains(a)).count();
    Ok((captured.total() / best.total(), overlap as f64 / k as f64))
}

/// The k arrivals with the largest observed values (ties prefer earlier
/// arrivals): the offline optimum of the stream as the policy saw it.
fn observed_top_k(stream: &Stream, k: usize) -> Vec<usize> {
    let mut arrivals: Vec<usize> = (1..=stream.n()).collect();
    arrivals.sort_by(|&a, &b| {
        let va = stream.items()[a - 1].observed_value;
        let vb = stream.items()[b - 1].observed_value;
        compare(vb, b, va, a)
    });
    arrivals.truncate(k);
    arrivals
}

/// Scores a trace against the observed-stream optimum. Needs no true
/// values, so it is always available.
fn score_against_observed(stream: &Stream, trace: &SelectionTrace, k: usize) -> (f64, f64) {
    let best_set = observed_top_k(stream, k);
    let observed_at = |arrival: usize| stream.items()[arrival - 1].observed_value;
    let mut captured = NeumaierSum::new();
    for &a in &trace.selected {
        captured.add(observed_at(a));
    }
    let mut best = NeumaierSum::new();
    for &a in &best_set {
        best.add(observed_at(a));
    }
    let overlap = trace.selected.iter().filter(|a| best_set.contains(a)).count();
    (captured.total() / best.total(), overlap as f64 / k as f64)
}

/// One trial's four scores: value and overlap against the true-value
/// optimum, then against the observed-stream optimum.
struct TrialScore {
    value: f64,
    overlap: f64,
    observed_value: f64,
    observed_overlap: f64,
}

/// Estimates value and intersection ratios by Monte Carlo: each trial
/// draws a fresh synthetic stream from substream `(seed, trial)`, applies
/// a fresh uniform permutation, runs the policy on observed values, and
/// scores the selection against the offline top-k on true values.
pub fn estimate_ratios(spec: &EstimateSpec) -> Result<RatioReport, HarnessError> {
    if spec.trials == 0 {
        return Err(invalid_spec("trials must be at least 1"));
    }
    if !spec.sigma2.is_finite() || spec.sigma2 < 0.0 {
        return Err(invalid_spec(format!(
            "noise variance must be finite and nonnegative, got {}",
            spec.sigma2
        )));
    }
    // Resolve once so per-trial runs skip default-threshold searches, and
    // so bad configs fail before any work happens.
    let resolved = match spec.policy {
        PolicyKind::Opt => {
            if spec.k == 0 || spec.k > spec.n {
                return Err(invalid_spec(format!(
                    "budget k={} must satisfy 1 <= k <= n={}",
                    spec.k, spec.n
                )));
            }
            None
        }
        kind => Some(resolved_config(kind, spec.n, &spec.config())?),
    };

    let synth = SyntheticSpec { n: spec.n, sigma2: spec.sigma2, seed: spec.seed };
    let per_trial: Result<Vec<TrialScore>, HarnessError> = (0..spec.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = SeededRng::with_stream(spec.seed, trial);
            let stream = synth_stream(&synth, &mut rng).permute(&mut rng);
            let trace = match &resolved {
                None => policy_run_offline_opt(&stream, spec.k)?,
                Some(config) => policy_run(spec.policy, &stream, config, &mut rng)?,
            };
            let (value, overlap) = score_against_offline(&stream, &trace, spec.k)?;
            let (observed_value, observed_overlap) =
                score_against_observed(&stream, &trace, spec.k);
            Ok(TrialScore { value, overlap, observed_value, observed_overlap })
        })
        .collect();
    let per_trial = per_trial?;

    let column = |field: fn(&TrialScore) -> f64| -> (f64, f64) {
        let samples: Vec<f64> = per_trial.iter().map(field).collect();
        mean_and_se(&samples)
    };
    let (value_mean, value_se) = column(|s| s.value);
    let (overlap_mean, overlap_se) = column(|s| s.overlap);
    let (observed_value_mean, observed_value_se) = column(|s| s.observed_value);
    let (observed_overlap_mean, observed_overlap_se) = column(|s| s.observed_overlap);
    Ok(RatioReport {
        value_ratio: Some(value_mean),
        intersection_ratio: Some(overlap_mean),
        knapsack_ratio: Some(value_mean),
        observed_value_ratio: observed_value_mean,
        observed_intersection_ratio: observed_overlap_mean,
        trials: spec.trials,
        std_error: value_se,
        intersection_std_error: overlap_se,
        observed_std_error: observed_value_se,
        observed_intersection_std_error: observed_overlap_se,
        fool_rate: None,
        fool_rate_std_error: 0.0,
    })
}

// ---------------------------------------------------------------------------
// Attack replay
// ---------------------------------------------------------------------------

/// Runs one policy over an adversarial stream in its given order and
/// reports the fool rate (fooled selections over `k`). Value and
/// intersection ratios are included only when every record carries a true
/// value; every record must carry a `fooled` flag.
pub fn run_attack(
    stream: &Stream,
    kind: PolicyKind,
    config: &PolicyConfig,
    rng: &mut SeededRng,
) -> Result<RatioReport, HarnessError> {
    for item in stream.items() {
        if item.fooled.is_none() {
            return Err(HarnessError::MissingFooled { arrival: item.arrival });
        }
    }
    let trace = match kind {
        PolicyKind::Opt => policy_run_offline_opt(stream, config.k)?,
        _ => policy_run(kind, stream, config, rng)?,
    };
    let k = trace.config.k;
    let fooled_selections = trace
        .selected
        .iter()
        .filter(|&&a| stream.items()[a - 1].fooled == Some(true))
        .count();
    let fool_rate = fooled_selections as f64 / k as f64;

    let has_true = stream.items().iter().all(|it| it.true_value.is_some());
    let (value_ratio, intersection_ratio) = if has_true {
        let (v, o) = score_against_offline(stream, &trace, k)?;
        (Some(v), Some(o))
    } else {
        (None, None)
    };
    let (observed_value_ratio, observed_intersection_ratio) =
        score_against_observed(stream, &trace, k);
    Ok(RatioReport {
        value_ratio,
        intersection_ratio,
        knapsack_ratio: value_ratio,
        observed_value_ratio,
        observed_intersection_ratio,
        trials: 1,
        std_error: 0.0,
        intersection_std_error: 0.0,
        observed_std_error: 0.0,
        observed_intersection_std_error: 0.0,
        fool_rate: Some(fool_rate),
        fool_rate_std_error: 0.0,
    })
}

/// Per-permutation reports plus their aggregate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackSummary {
    pub per_permutation: Vec<RatioReport>,
    pub aggregate: RatioReport,
}

/// Replays an attack stream under `permutations` uniform re-orderings
/// (substream `(seed, p)` drives both the shuffle and the policy's own
/// randomness) and aggregates the per-permutation reports.
pub fn run_attack_permutations(
    stream: &Stream,
    kind: PolicyKind,
    config: &PolicyConfig,
    seed: u64,
    permutations: u64,
) -> Result<AttackSummary, HarnessError> {
    if permutations == 0 {
        return Err(invalid_spec("permutations must be at least 1"));
    }
    let mut per_permutation = Vec::with_capacity(permutations as usize);
    for p in 0..permutations {
        let mut rng = SeededRng::with_stream(seed, p);
        let shuffled = stream.permute(&mut rng);
        per_permutation.push(run_attack(&shuffled, kind, config, &mut rng)?);
    }

    let collect = |field: fn(&RatioReport) -> Option<f64>| -> (Option<f64>, f64) {
        let samples: Option<Vec<f64>> = per_permutation.iter().map(field).collect();
        match samples {
            Some(s) => {
                let (mean, se) = mean_and_se(&s);
                (Some(mean), se)
            }
            None => (None, 0.0),
        }
    };
    let collect_plain = |field: fn(&RatioReport) -> f64| -> (f64, f64) {
        let samples: Vec<f64> = per_permutation.iter().map(field).collect();
        mean_and_se(&samples)
    };
    let (value_ratio, std_error) = collect(|r| r.value_ratio);
    let (intersection_ratio, intersection_std_error) = collect(|r| r.intersection_ratio);
    let (fool_rate, fool_rate_std_error) = collect(|r| r.fool_rate);
    let (observed_value_ratio, observed_std_error) = collect_plain(|r| r.observed_value_ratio);
    let (observed_intersection_ratio, observed_intersection_std_error) =
        collect_plain(|r| r.observed_intersection_ratio);
    let aggregate = RatioReport {
        value_ratio,
        intersection_ratio,
        knapsack_ratio: value_ratio,
        observed_value_ratio,
        observed_intersection_ratio,
        trials: permutations,
        std_error,
        intersection_std_error,
        observed_std_error,
        observed_intersection_std_error,
        fool_rate,
        fool_rate_std_error,
    };
    Ok(AttackSummary { per_permutation, aggregate })
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

/// Spec for a policy × budget sweep of Monte Carlo estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub policies: Vec<PolicyKind>,
    pub ks: Vec<usize>,
    pub n: usize,
    pub sigma2: f64,
    pub trials: u64,
    pub seed: u64,
    /// Explicit threshold applied to every row; `None` for defaults.
    pub t: Option<usize>,
    /// Reference rank, forwarded only to single-ref rows.
    pub r: Option<usize>,
    pub exhaust_budget: bool,
}

/// One sweep cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub policy: PolicyKind,
    pub k: usize,
    /// Resolved sampling threshold (0 for the offline selector, which has
    /// no sampling phase).
    pub t: usize,
    pub report: RatioReport,
}

/// Runs one estimate per `(policy, k)` pair, policy-major, all from the
/// same base seed so rows are comparable.
pub fn sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>, HarnessError> {
    let mut rows = Vec::with_capacity(spec.policies.len() * spec.ks.len());
    for &policy in &spec.policies {
        for &k in &spec.ks {
            let mut estimate = EstimateSpec::new(policy, spec.n, k, spec.sigma2, spec.trials, spec.seed);
            estimate.t = spec.t;
            estimate.r = if policy == PolicyKind::SingleRef { spec.r } else { None };
            estimate.exhaust_budget = spec.exhaust_budget;
            let t = match policy {
                PolicyKind::Opt => 0,
                _ => resolved_config(policy, spec.n, &estimate.config())?
                    .t
                    .expect("resolved config always carries a threshold"),
            };
            let report = estimate_ratios(&estimate)?;
            rows.push(SweepRow { policy, k, t, report });
        }
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_and_se_match_hand_computation() {
        let (mean, se) = mean_and_se(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(mean, 2.5);
        // Sample variance 5/3; SE = sqrt(5/12).
        assert!((se - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
        let (single, zero) = mean_and_se(&[7.0]);
        assert_eq!(single, 7.0);
        assert_eq!(zero, 0.0);
    }

    #[test]
    fn estimate_rejects_degenerate_specs() {
        let zero_trials = EstimateSpec::new(PolicyKind::Virtual, 20, 2, 1.0, 0, 1);
        assert!(estimate_ratios(&zero_trials).is_err());
        let negative_noise = EstimateSpec::new(PolicyKind::Virtual, 20, 2, -1.0, 10, 1);
        assert!(estimate_ratios(&negative_noise).is_err());
        let oversized_budget = EstimateSpec::new(PolicyKind::Opt, 5, 6, 0.0, 10, 1);
        assert!(estimate_ratios(&oversized_budget).is_err());
    }

    #[test]
    fn attack_permutations_reject_zero_repeats() {
        let items = vec![StreamItem {
            id: "x".into(),
            arrival: 1,
            observed_value: 1.0,
            true_value: Some(1.0),
            fooled: Some(false),
        }];
        let s = Stream::new(items).unwrap();
        let cfg = PolicyConfig::new(1).with_threshold(1);
        assert!(run_attack_permutations(&s, PolicyKind::Virtual, &cfg, 0, 0).is_err());
    }

    #[test]
    fn scoring_is_exact_on_a_noiseless_stream() {
        let spec = SyntheticSpec { n: 10, sigma2: 0.0, seed: 0 };
        let mut rng = SeededRng::new(0);
        let stream = synth_stream(&spec, &mut rng);
        let trace = policy_run_offline_opt(&stream, 3).unwrap();
        let (value, overlap) = score_against_offline(&stream, &trace, 3).unwrap();
        assert_eq!(value, 1.0);
        assert_eq!(overlap, 1.0);
    }
}
