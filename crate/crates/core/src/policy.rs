//! The selection policies as online state machines behind one interface.
//!
//! Every online policy follows the same two-phase shape: a **sampling
//! phase** (arrivals `1..=t`) that only observes and builds a reference
//! list, then a **selection phase** (arrivals `t+1..=n`) that applies the
//! policy's accept rule under a budget of `k` irrevocable selections.
//!
//! The rules differ only in how they use the reference list `R`, which is
//! kept sorted best-first under the strict total order of
//! [`crate::stream::TotalOrderKey`]:
//!
//! - **Virtual+** (eager): accept whenever the incoming item beats `R[k]`
//!   and budget remains; the accepted item replaces `R[k]`.
//! - **Virtual**: same comparison, but the replacement only counts as a
//!   selection when the evicted `R[k]` was observed during sampling;
//!   otherwise it is a bookkeeping-only update.
//! - **Optimistic**: compare against the worst remaining reference; accept
//!   consumes it and nothing is ever inserted back.
//! - **Single-Ref**: compare every post-sampling item against one static
//!   reference, the `r`-th best of the sampling phase.
//! - **Naive**: ignore values entirely and accept `k` positions pre-drawn
//!   uniformly at init.
//! - **Opt**: not an online rule; the offline best-`k` selector over true
//!   values, exposed through [`policy_run_offline_opt`] as the scoring
//!   baseline.
//!
//! With `exhaust_budget`, a policy force-selects every remaining item once
//! the remaining stream length equals the unused budget, guaranteeing
//! exactly `k` selections.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::stream::{compare, SeededRng, Stream, StreamItem};

/// Largest budget with a precomputable default sampling fraction.
const MAX_DEFAULT_K: usize = 1000;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Errors from policy configuration and stepping.
#[derive(Debug, Clone, PartialEq)]
pub enum PolicyError {
    /// The configuration is inconsistent with the policy or stream length.
    InvalidConfig { message: String },
    /// The offline selector has no online step rule.
    OfflinePolicy,
    /// Items must be fed in arrival order, each exactly once.
    OutOfOrderArrival { expected: usize, got: usize },
    /// All `n` items were already consumed.
    StreamEnded,
    /// Offline selection requires a true value on every item.
    MissingTrueValue { arrival: usize },
}

impl fmt::Display for PolicyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::InvalidConfig { message } => write!(f, "invalid policy config: {message}"),
            Self::OfflinePolicy => {
                write!(f, "offline selector has no online step rule; use the offline runner")
            }
            Self::OutOfOrderArrival { expected, got } => {
                write!(f, "out-of-order arrival: expected {expected}, got {got}")
            }
            Self::StreamEnded => write!(f, "stream already ended"),
            Self::MissingTrueValue { arrival } => {
                write!(f, "missing true value at arrival {arrival}")
            }
        }
    }
}

impl std::error::Error for PolicyError {}

fn invalid(message: impl Into<String>) -> PolicyError {
    PolicyError::InvalidConfig { message: message.into() }
}

// ---------------------------------------------------------------------------
// Policy identifiers and configuration
// ---------------------------------------------------------------------------

/// The six selection policies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PolicyKind {
    /// Uniform-random positions, drawn at init.
    #[serde(rename = "naive")]
    Naive,
    /// Offline best-k by true value (scoring baseline).
    #[serde(rename = "opt")]
    Opt,
    /// Reference-replacing rule with the bookkeeping-only update branch.
    #[serde(rename = "virtual")]
    Virtual,
    /// Shrinking-reference rule.
    #[serde(rename = "optimistic")]
    Optimistic,
    /// Single static reference at rank `r`.
    #[serde(rename = "single-ref")]
    SingleRef,
    /// Eager reference-replacing rule.
    #[serde(rename = "virtual+")]
    VirtualPlus,
}

impl PolicyKind {
    /// All kinds, in CLI listing order.
    pub const ALL: [PolicyKind; 6] = [
        PolicyKind::Naive,
        PolicyKind::Opt,
        PolicyKind::Virtual,
        PolicyKind::Optimistic,
        PolicyKind::SingleRef,
        PolicyKind::VirtualPlus,
    ];

    /// Stable lowercase name, matching the CLI `--policy` values.
    pub fn name(self) -> &'static str {
        match self {
            Self::Naive => "naive",
            Self::Opt => "opt",
            Self::Virtual => "virtual",
            Self::Optimistic => "optimistic",
            Self::SingleRef => "single-ref",
            Self::VirtualPlus => "virtual+",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = PolicyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|kind| kind.name() == s)
            .ok_or_else(|| invalid(format!("unknown policy {s:?}")))
    }
}

/// Budget, threshold, and rule parameters; fully determines a policy
/// instance once resolved against a stream length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyConfig {
    /// Selection budget (k ≥ 1).
    pub k: usize,
    /// Sampling threshold; `None` requests the policy's default, and any
    /// explicit value is clamped into `[k, max(k, n − k)]` at init.
    pub t: Option<usize>,
    /// Reference rank for the single-reference rule (1 ≤ r ≤ k).
    pub r: Option<usize>,
    /// Force-select the tail once remaining items equal unused budget.
    pub exhaust_budget: bool,
}

impl PolicyConfig {
    /// Config with budget `k`, defaults everywhere else.
    pub fn new(k: usize) -> Self {
        Self { k, t: None, r: None, exhaust_budget: false }
    }

    /// Sets an explicit sampling threshold.
    pub fn with_threshold(mut self, t: usize) -> Self {
        self.t = Some(t);
        self
    }

    /// Sets the single-reference rank.
    pub fn with_reference_rank(mut self, r: usize) -> Self {
        self.r = Some(r);
        self
    }

    /// Sets the forced-exhaustion flag.
    pub fn with_exhaust(mut self, exhaust: bool) -> Self {
        self.exhaust_budget = exhaust;
        self
    }
}

// ---------------------------------------------------------------------------
// Decisions and traces
// ---------------------------------------------------------------------------

/// Why a step decided what it decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecisionReason {
    /// Sampling-phase observation; never a selection.
    Sampling,
    /// The policy's accept rule fired.
    RuleSelect,
    /// The accept rule did not fire (includes bookkeeping-only updates).
    RuleSkip,
    /// The rule fired or might have, but the budget was already spent.
    BudgetFull,
    /// Forced tail selection under `exhaust_budget`.
    ForcedExhaust,
    /// The arrival was one of the uniform baseline's pre-drawn positions.
    NaiveDraw,
}

/// One per-arrival decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decision {
    pub arrival: usize,
    pub select: bool,
    pub reason: DecisionReason,
}

/// The outcome of one full policy run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionTrace {
    /// Which policy ran.
    pub policy: PolicyKind,
    /// The fully resolved configuration (threshold and rank filled in).
    pub config: PolicyConfig,
    /// Selected arrival positions, strictly increasing.
    pub selected: Vec<usize>,
    /// Per-arrival decisions; `None` for the offline selector.
    pub per_step: Option<Vec<Decision>>,
}

/// One reference-list entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceEntry {
    pub arrival: usize,
    pub value: f64,
}

// ---------------------------------------------------------------------------
// Configuration resolution
// ---------------------------------------------------------------------------

fn floor_n_over_e(n: usize) -> usize {
    (n as f64 / std::f64::consts::E).floor() as usize
}

fn clamp_threshold(raw: usize, n: usize, k: usize) -> usize {
    raw.clamp(k, k.max(n - k))
}

/// Validates `config` against `(kind, n)` and fills in defaults: the
/// returned config always carries a concrete threshold (clamped into
/// `[k, max(k, n − k)]`) and, for the single-reference rule, a concrete
/// rank.
///
/// Default thresholds: the eager rule uses `round(α_k · n)` with `α_k` the
/// maximizer of its asymptotic guarantee curve (falling back to `⌊n/e⌋` at
/// `k = 1`, where the curve is undefined); every other rule uses `⌊n/e⌋`.
/// The single-reference rule has no universal default — `(t, r)` must be
/// supplied — with two documented presets: `k = 1 → (⌊n/e⌋, 1)` and
/// `k = 1000 → (⌊0.13·n⌋, 40)`.
pub fn resolved_config(
    kind: PolicyKind,
    n: usize,
    config: &PolicyConfig,
) -> Result<PolicyConfig, PolicyError> {
    if kind == PolicyKind::Opt {
        return Err(PolicyError::OfflinePolicy);
    }
    if n == 0 {
        return Err(invalid("stream length must be positive"));
    }
    let k = config.k;
    if k == 0 {
        return Err(invalid("budget k must be positive"));
    }
    if k > n {
        return Err(invalid(format!("budget k={k} exceeds stream length n={n}")));
    }
    if kind != PolicyKind::SingleRef && config.r.is_some() {
        return Err(invalid(format!("reference rank r applies only to single-ref, not {kind}")));
    }

    let (t, r) = match kind {
        PolicyKind::SingleRef => {
            let (raw_t, raw_r) = match (config.t, config.r) {
                (Some(t), Some(r)) => (t, r),
                _ if k == 1 => (config.t.unwrap_or_else(|| floor_n_over_e(n)), config.r.unwrap_or(1)),
                _ if k == 1000 => {
                    (config.t.unwrap_or((0.13 * n as f64).floor() as usize), config.r.unwrap_or(40))
                }
                _ => {
                    return Err(invalid(format!(
                        "single-ref has no default (t, r) for k={k}; pass both --t and --r"
                    )))
                }
            };
            if raw_r == 0 || raw_r > k {
                return Err(invalid(format!("reference rank r={raw_r} must satisfy 1 <= r <= k={k}")));
            }
            (raw_t, Some(raw_r))
        }
        PolicyKind::VirtualPlus => {
            let raw_t = match config.t {
                Some(t) => t,
                None if k == 1 => floor_n_over_e(n),
                None => {
                    if k > MAX_DEFAULT_K {
                        return Err(invalid(format!(
                            "no default threshold for k={k} > {MAX_DEFAULT_K}; pass --t"
                        )));
                    }
                    let alpha = crate::analysis::optimal_threshold(k)
                        .map_err(|e| invalid(format!("default threshold unavailable: {e}")))?
                        .alpha_star;
                    (alpha * n as f64).round() as usize
                }
            };
            (raw_t, None)
        }
        _ => (config.t.unwrap_or_else(|| floor_n_over_e(n)), None),
    };

    Ok(PolicyConfig {
        k,
        t: Some(clamp_threshold(t, n, k)),
        r,
        exhaust_budget: config.exhaust_budget,
    })
}

// ---------------------------------------------------------------------------
// Policy state
// ---------------------------------------------------------------------------

/// Mutable state of one online policy run.
#[derive(Debug, Clone)]
pub struct PolicyState {
    kind: PolicyKind,
    n: usize,
    config: PolicyConfig,
    next_arrival: usize,
    selected: Vec<usize>,
    /// Sorted best-first under the total order; semantics per policy.
    reference: Vec<ReferenceEntry>,
    /// The static reference of the single-reference rule, fixed lazily at
    /// the first post-sampling rule evaluation.
    single_reference: Option<ReferenceEntry>,
    /// Pre-drawn positions of the uniform baseline, sorted.
    naive_draws: Vec<usize>,
}

impl PolicyState {
    /// The resolved sampling threshold.
    pub fn threshold(&self) -> usize {
        self.config.t.expect("resolved config always carries a threshold")
    }

    /// Selected arrivals so far, strictly increasing.
    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    /// Current reference list, best-first.
    pub fn reference(&self) -> &[ReferenceEntry] {
        &self.reference
    }

    /// The fully resolved configuration this run uses.
    pub fn config(&self) -> &PolicyConfig {
        &self.config
    }

    /// Inserts into the reference list, keeping it sorted best-first.
    fn insert_reference(&mut self, value: f64, arrival: usize) {
        let pos = self.reference.partition_point(|e| {
            compare(e.value, e.arrival, value, arrival) == std::cmp::Ordering::Greater
        });
        self.reference.insert(pos, ReferenceEntry { arrival, value });
    }

    /// Sampling-phase observation: track the top-k seen so far.
    fn observe_sample(&mut self, value: f64, arrival: usize) {
        self.insert_reference(value, arrival);
        self.reference.truncate(self.config.k);
    }

    fn beats(&self, value: f64, arrival: usize, incumbent: ReferenceEntry) -> bool {
        compare(value, arrival, incumbent.value, incumbent.arrival)
            == std::cmp::Ordering::Greater
    }

    /// Applies the post-sampling accept rule.
    fn apply_rule(&mut self, value: f64, arrival: usize) -> (bool, DecisionReason) {
        let k = self.config.k;
        let t = self.threshold();
        match self.kind {
            PolicyKind::VirtualPlus => {
                if self.selected.len() == k {
                    return (false, DecisionReason::BudgetFull);
                }
                let worst = *self.reference.last().expect("reference filled during sampling");
                if self.beats(value, arrival, worst) {
                    self.reference.pop();
                    self.insert_reference(value, arrival);
                    (true, DecisionReason::RuleSelect)
                } else {
                    (false, DecisionReason::RuleSkip)
                }
            }
            PolicyKind::Virtual => {
                let worst = *self.reference.last().expect("reference filled during sampling");
                if self.beats(value, arrival, worst) {
                    self.reference.pop();
                    self.insert_reference(value, arrival);
                    if worst.arrival <= t {
                        // Evicting a sampling-phase reference is a real
                        // selection; this can happen at most k times, which
                        // is what bounds the budget structurally.
                        (true, DecisionReason::RuleSelect)
                    } else {
                        (false, DecisionReason::RuleSkip)
                    }
                } else {
                    (false, DecisionReason::RuleSkip)
                }
            }
            PolicyKind::Optimistic => match self.reference.last().copied() {
                None => (false, DecisionReason::BudgetFull),
                Some(worst) => {
                    if self.beats(value, arrival, worst) {
                        self.reference.pop();
                        (true, DecisionReason::RuleSelect)
                    } else {
                        (false, DecisionReason::RuleSkip)
                    }
                }
            },
            PolicyKind::SingleRef => {
                let r = self.config.r.expect("resolved config carries r for single-ref");
                let reference = *self
                    .single_reference
                    .get_or_insert_with(|| self.reference[r - 1]);
                if self.selected.len() == k {
                    (false, DecisionReason::BudgetFull)
                } else if self.beats(value, arrival, reference) {
                    (true, DecisionReason::RuleSelect)
                } else {
                    (false, DecisionReason::RuleSkip)
                }
            }
            PolicyKind::Naive | PolicyKind::Opt => {
                unreachable!("no post-sampling rule for {}", self.kind)
            }
        }
    }
}

// ---------------------------------------------------------------------------
// The online interface
// ---------------------------------------------------------------------------

/// Validates the configuration and builds fresh per-run state; the uniform
/// baseline pre-draws its `k` distinct positions from `rng` here.
pub fn policy_init(
    kind: PolicyKind,
    n: usize,
    config: &PolicyConfig,
    rng: &mut SeededRng,
) -> Result<PolicyState, PolicyError> {
    let config = resolved_config(kind, n, config)?;
    let naive_draws = if kind == PolicyKind::Naive {
        let mut draws: Vec<usize> =
            index::sample(rng, n, config.k).into_iter().map(|i| i + 1).collect();
        draws.sort_unstable();
        draws
    } else {
        Vec::new()
    };
    Ok(PolicyState {
        kind,
        n,
        config,
        next_arrival: 1,
        selected: Vec::new(),
        reference: Vec::new(),
        single_reference: None,
        naive_draws,
    })
}

/// Feeds one item to the policy; items must arrive in order `1..=n`, each
/// exactly once.
pub fn policy_step(state: &mut PolicyState, item: &StreamItem) -> Result<Decision, PolicyError> {
    if state.next_arrival > state.n {
        return Err(PolicyError::StreamEnded);
    }
    if item.arrival != state.next_arrival {
        return Err(PolicyError::OutOfOrderArrival {
            expected: state.next_arrival,
            got: item.arrival,
        });
    }
    state.next_arrival += 1;

    let arrival = item.arrival;
    let value = item.observed_value;
    let deficit = state.config.k - state.selected.len();

    // Forced exhaustion outranks every other branch: once it fires it fires
    // for every remaining arrival, so skipping reference upkeep is safe.
    let (select, reason) = if state.config.exhaust_budget
        && deficit > 0
        && state.n - arrival + 1 <= deficit
    {
        (true, DecisionReason::ForcedExhaust)
    } else if state.kind == PolicyKind::Naive {
        // The uniform baseline has no sampling phase: its positions were
        // fixed at init, wherever they fall.
        if state.naive_draws.binary_search(&arrival).is_ok() {
            (true, DecisionReason::NaiveDraw)
        } else {
            (false, DecisionReason::RuleSkip)
        }
    } else if arrival <= state.threshold() {
        state.observe_sample(value, arrival);
        (false, DecisionReason::Sampling)
    } else {
        state.apply_rule(value, arrival)
    };

    if select {
        state.selected.push(arrival);
    }
    Ok(Decision { arrival, select, reason })
}

/// Runs an online policy over a whole stream and returns its trace.
pub fn policy_run(
    kind: PolicyKind,
    stream: &Stream,
    config: &PolicyConfig,
    rng: &mut SeededRng,
) -> Result<SelectionTrace, PolicyError> {
    let mut state = policy_init(kind, stream.n(), config, rng)?;
    let mut per_step = Vec::with_capacity(stream.n());
    for item in stream.items() {
        per_step.push(policy_step(&mut state, item)?);
    }
    Ok(SelectionTrace {
        policy: kind,
        config: state.config.clone(),
        selected: state.selected,
        per_step: Some(per_step),
    })
}

/// Offline baseline: selects the `k` items with the largest true values
/// under the total order (ties prefer earlier arrivals).
pub fn policy_run_offline_opt(stream: &Stream, k: usize) -> Result<SelectionTrace, PolicyError> {
    let n = stream.n();
    if k == 0 || k > n {
        return Err(invalid(format!("budget k={k} must satisfy 1 <= k <= n={n}")));
    }
    let mut keyed = Vec::with_capacity(n);
    for item in stream.items() {
        let true_value = item
            .true_value
            .ok_or(PolicyError::MissingTrueValue { arrival: item.arrival })?;
        keyed.push((true_value, item.arrival));
    }
    keyed.sort_by(|a, b| compare(b.0, b.1, a.0, a.1));
    let mut selected: Vec<usize> = keyed[..k].iter().map(|&(_, arrival)| arrival).collect();
    selected.sort_unstable();
    Ok(SelectionTrace {
        policy: PolicyKind::Opt,
        config: PolicyConfig { k, t: None, r: None, exhaust_budget: false },
        selected,
        per_step: None,
    })
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
