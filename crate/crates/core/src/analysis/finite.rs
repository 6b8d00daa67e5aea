//! Exact finite-stream competitive ratio of the eager rule at budget two.
//!
//! For a uniformly random arrival order of `n` distinct values and
//! threshold `t`, the expected fraction of the best-two value captured is
//!
//! ```text
//! C(n, t) = (t(t-1)/n) * sum_{j=t}^{n-1} 1/(j(j-1)) * (1 + 2*sum_{p=t+1}^{j} 1/(p-2))
//! ```
//!
//! The inner sum runs over a shifted index (`p - 2`, not `p - 1`): the
//! pair of selections removes two candidates from the pool rather than
//! one. The test suite pins this convention by exhaustive enumeration.

use super::{precondition, AnalysisError};
use crate::numeric::NeumaierSum;

/// Evaluates the closed form for `2 <= t <= n - 2`.
pub fn finite_ratio_k2(n: usize, t: usize) -> Result<f64, AnalysisError> {
    if t < 2 || t + 2 > n {
        return Err(precondition(format!(
            "threshold t={t} must satisfy 2 <= t <= n-2 for n={n}"
        )));
    }
    let mut outer = NeumaierSum::new();
    let mut inner = NeumaierSum::new();
    for j in t..n {
        if j > t {
            inner.add(1.0 / (j as f64 - 2.0));
        }
        let weight = 1.0 / (j as f64 * (j as f64 - 1.0));
        outer.add(weight * (1.0 + 2.0 * inner.total()));
    }
    let prefix = t as f64 * (t as f64 - 1.0) / n as f64;
    Ok(prefix * outer.total())
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn late_threshold_hand_value() {
        // n=50, t=48: only j in {48, 49} contribute and the sum telescopes
        // to 2/(48*47), giving exactly (48*47/50) * 2/(48*47) = 1/25.
        let v = finite_ratio_k2(50, 48).unwrap();
        assert!((v - 0.04).abs() < 1e-15, "{v}");
    }

    #[test]
    fn smallest_feasible_instance() {
        // n=4, t=2: j=2 gives 1/2, j=3 gives (1 + 2/1)/6 = 1/2; prefix 1/2.
        let v = finite_ratio_k2(4, 2).unwrap();
        assert!((v - 0.5).abs() < 1e-15, "{v}");
    }

    #[test]
    fn rejects_thresholds_outside_the_feasible_band() {
        assert!(finite_ratio_k2(10, 1).is_err());
        assert!(finite_ratio_k2(10, 9).is_err());
        assert!(finite_ratio_k2(3, 2).is_err());
    }
}
