//! Exhaustive enumeration of small instances in exact rational arithmetic.
//!
//! For every one of the `n!` arrival orders of the values `1..=n`, run the
//! policy and count which ranks end up selected. Because the policies are
//! scale-invariant, these counts give the exact per-rank selection
//! probabilities for *any* `n` distinct values, and with them the exact
//! competitive ratio.

use itertools::Itertools;
use num_rational::Ratio;
use num_traits::ToPrimitive;

use super::{precondition, AnalysisError};
use crate::policy::{policy_run, resolved_config, PolicyConfig, PolicyKind};
use crate::stream::{SeededRng, Stream};

/// Largest stream length enumerated exhaustively (8! = 40320 orders).
const MAX_N: usize = 8;

// ---------------------------------------------------------------------------
// EnumerationReport
// ---------------------------------------------------------------------------

/// Exact selection statistics of one policy on one instance size.
#[derive(Debug, Clone, PartialEq)]
pub struct EnumerationReport {
    /// The enumerated policy.
    pub policy: PolicyKind,
    /// Stream length.
    pub n: usize,
    /// Budget.
    pub k: usize,
    /// Resolved sampling threshold.
    pub t: usize,
    /// `P(rank-a item selected)` for ranks `1..=k` (rank 1 is the best).
    pub per_rank_probability: Vec<Ratio<i64>>,
    /// Mean of the top-`k` per-rank probabilities: the exact fraction of
    /// the offline-best value the policy captures in expectation.
    pub competitive_ratio: Ratio<i64>,
    /// The same ratio as a double.
    pub competitive_ratio_f64: f64,
}

// ---------------------------------------------------------------------------
// Enumeration
// ---------------------------------------------------------------------------

/// How many of the `n!` orders select each rank, plus the resolved config.
fn rank_counts(
    policy: PolicyKind,
    n: usize,
    config: &PolicyConfig,
) -> Result<(Vec<i64>, PolicyConfig), AnalysisError> {
    if matches!(policy, PolicyKind::Naive | PolicyKind::Opt) {
        // Naive depends on its rng rather than the arrival order, and the
        // offline selector trivially takes the top k of every order.
        return Err(AnalysisError::UnsupportedPolicy { policy });
    }
    if n > MAX_N {
        return Err(AnalysisError::InstanceTooLarge {
            detail: format!("n={n} exceeds the exhaustive enumeration limit {MAX_N}"),
        });
    }
    let resolved =
        resolved_config(policy, n, config).map_err(|e| precondition(e.to_string()))?;
    let mut counts = vec![0i64; n];
    for perm in (1..=n).permutations(n) {
        let values: Vec<f64> = perm.iter().map(|&v| v as f64).collect();
        let stream = Stream::from_observed(&values).expect("values are finite and nonempty");
        let mut rng = SeededRng::new(0);
        let trace = policy_run(policy, &stream, &resolved, &mut rng)
            .expect("resolved config is valid for this stream");
        for &arrival in &trace.selected {
            let rank = n - perm[arrival - 1] + 1;
            counts[rank - 1] += 1;
        }
    }
    Ok((counts, resolved))
}

/// Exact per-rank selection probabilities over all `n` ranks.
pub fn selection_probabilities_exact(
    policy: PolicyKind,
    n: usize,
    config: &PolicyConfig,
) -> Result<Vec<Ratio<i64>>, AnalysisError> {
    let (counts, _) = rank_counts(policy, n, config)?;
    let n_fact: i64 = (1..=n as i64).product();
    Ok(counts.into_iter().map(|c| Ratio::new(c, n_fact)).collect())
}

/// Enumerates all `n!` orders (`n <= 8`) and reports the exact top-`k`
/// selection probabilities and competitive ratio.
pub fn enumerate_exact(
    policy: PolicyKind,
    n: usize,
    config: &PolicyConfig,
) -> Result<EnumerationReport, AnalysisError> {
    let (counts, resolved) = rank_counts(policy, n, config)?;
    let k = resolved.k;
    let n_fact: i64 = (1..=n as i64).product();
    let per_rank_probability: Vec<Ratio<i64>> =
        counts[..k].iter().map(|&c| Ratio::new(c, n_fact)).collect();
    let top_k_total: i64 = counts[..k].iter().sum();
    let competitive_ratio = Ratio::new(top_k_total, k as i64 * n_fact);
    let competitive_ratio_f64 = competitive_ratio
        .to_f64()
        .expect("small rationals always convert");
    Ok(EnumerationReport {
        policy,
        n,
        k,
        t: resolved.t.expect("resolved config always carries a threshold"),
        per_rank_probability,
        competitive_ratio,
        competitive_ratio_f64,
    })
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    #[test]
    fn offline_and_random_baselines_are_rejected() {
        let cfg = PolicyConfig::new(1);
        for policy in [PolicyKind::Naive, PolicyKind::Opt] {
            assert!(matches!(
                enumerate_exact(policy, 4, &cfg),
                Err(AnalysisError::UnsupportedPolicy { .. })
            ));
        }
    }

    #[test]
    fn report_echoes_the_resolved_threshold() {
        let cfg = PolicyConfig::new(2).with_threshold(99);
        let report = enumerate_exact(PolicyKind::VirtualPlus, 6, &cfg).unwrap();
        // Clamped to max(k, n-k) = 4.
        assert_eq!(report.t, 4);
        assert_eq!(report.per_rank_probability.len(), 2);
    }

    #[test]
    fn single_reference_rule_enumerates_like_the_others() {
        let cfg = PolicyConfig::new(2).with_threshold(2).with_reference_rank(1);
        let report = enumerate_exact(PolicyKind::SingleRef, 5, &cfg).unwrap();
        assert!(report.competitive_ratio > Ratio::zero());
    }
}
