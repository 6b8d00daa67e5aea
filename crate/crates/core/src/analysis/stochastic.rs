//! Noise robustness: the degradation factor for perturbed values, the
//! half-gap statistic it is evaluated at, and the probability that a
//! budget-aware run is still short of `k` selections at a given step.

use itertools::Itertools;
use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedMul};

use super::{precondition, AnalysisError};
use crate::numeric::NeumaierSum;

/// Refuse exact/direct summations whose term count grows past this.
const MAX_TERMS: u128 = 10_000_000;

// ---------------------------------------------------------------------------
// stochastic_factor
// ---------------------------------------------------------------------------

/// Multiplicative guarantee retention under independent Gaussian noise of
/// standard deviation `sigma` on values separated by at least `delta`.
///
/// With `x = delta / (2 sigma^2)`, the factor is
///
/// ```text
/// (1 - e^{-x}) ^ (2 e^{-x} / (1 - e^{-2x}))
/// ```
///
/// which lies in `(0, 1)` and tends to 1 as the noise vanishes. In `f64`
/// the open interval saturates at both ends: the factor rounds to exactly
/// 1.0 once `x` exceeds roughly 18 and underflows to exactly 0.0 once
/// `x` drops below roughly 0.002.
pub fn stochastic_factor(delta: f64, sigma: f64) -> Result<f64, AnalysisError> {
    if !delta.is_finite() || delta <= 0.0 {
        return Err(precondition(format!("value gap delta={delta} must be positive")));
    }
    if !sigma.is_finite() || sigma <= 0.0 {
        return Err(precondition(format!("noise level sigma={sigma} must be positive")));
    }
    let x = delta / (2.0 * sigma * sigma);
    let base = -(-x).exp_m1(); // 1 - e^{-x}
    let exponent = 2.0 * (-x).exp() / -(-2.0 * x).exp_m1();
    Ok(base.powf(exponent))
}

// ---------------------------------------------------------------------------
// min_gap
// ---------------------------------------------------------------------------

/// Half the smallest pairwise distance among `values`; zero when any two
/// values coincide. This is the largest perturbation radius that cannot
/// reorder the values.
pub fn min_gap(values: &[f64]) -> Result<f64, AnalysisError> {
    if values.len() < 2 {
        return Err(precondition("min_gap needs at least two values".to_string()));
    }
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(precondition(format!("min_gap requires finite values, got {bad}")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let smallest = sorted.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    Ok(smallest / 2.0)
}

// ---------------------------------------------------------------------------
// not_full_probability
// ---------------------------------------------------------------------------

fn check_not_full_args(
    n: usize,
    t: usize,
    j: usize,
    k: usize,
    nu: usize,
) -> Result<(), AnalysisError> {
    if k == 0 || k > t || t > j || j + 1 > n {
        return Err(precondition(format!(
            "need 1 <= k <= t <= j <= n-1, got n={n} t={t} j={j} k={k}"
        )));
    }
    if nu + 1 > k {
        return Err(precondition(format!("need nu <= k-1, got nu={nu} k={k}")));
    }
    let terms = (j as u128).pow(nu as u32);
    if terms > MAX_TERMS {
        return Err(AnalysisError::InstanceTooLarge {
            detail: format!("direct summation over ~{terms} index tuples (j={j}, nu={nu})"),
        });
    }
    Ok(())
}

/// Probability that the eager budget-`k` rule with threshold `t` on a
/// uniformly random order of `n` items has made exactly `nu` selections
/// after step `j`:
///
/// ```text
/// p = prod_{i=0}^{k-1} (t-i)/(j-i) * sum_{t < p_1 < ... < p_nu <= j} prod_i k/(p_i - k)
/// ```
///
/// evaluated by direct summation over the `nu`-subsets of `(t, j]`.
pub fn not_full_probability(
    n: usize,
    t: usize,
    j: usize,
    k: usize,
    nu: usize,
) -> Result<f64, AnalysisError> {
    check_not_full_args(n, t, j, k, nu)?;
    let mut prefix = 1.0;
    for i in 0..k {
        prefix *= (t - i) as f64 / (j - i) as f64;
    }
    let mut sum = NeumaierSum::new();
    for subset in ((t + 1)..=j).combinations(nu) {
        let mut product = 1.0;
        for p in subset {
            product *= k as f64 / (p - k) as f64;
        }
        sum.add(product);
    }
    Ok(prefix * sum.total())
}

/// Exact-rational counterpart of [`not_full_probability`]. Fails with
/// [`AnalysisError::InstanceTooLarge`] when the `i64` rational arithmetic
/// would overflow.
pub fn not_full_probability_exact(
    n: usize,
    t: usize,
    j: usize,
    k: usize,
    nu: usize,
) -> Result<Ratio<i64>, AnalysisError> {
    check_not_full_args(n, t, j, k, nu)?;
    let overflow = || AnalysisError::InstanceTooLarge {
        detail: "exact rational arithmetic overflowed i64".to_string(),
    };
    let mut prefix = Ratio::from_integer(1i64);
    for i in 0..k {
        let step = Ratio::new((t - i) as i64, (j - i) as i64);
        prefix = prefix.checked_mul(&step).ok_or_else(overflow)?;
    }
    let mut sum = Ratio::from_integer(0i64);
    for subset in ((t + 1)..=j).combinations(nu) {
        let mut product = Ratio::from_integer(1i64);
        for p in subset {
            let step = Ratio::new(k as i64, (p - k) as i64);
            product = product.checked_mul(&step).ok_or_else(overflow)?;
        }
        sum = sum.checked_add(&product).ok_or_else(overflow)?;
    }
    prefix.checked_mul(&sum).ok_or_else(overflow)
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
