//! Coefficients of the asymptotic guarantee polynomial.
//!
//! For budget `k`, the guarantee curve is a degree-`(k-1)` polynomial in
//! `ln(alpha)` with coefficients
//!
//! ```text
//! a_m = (k^k / (k-1)^(k-m) - k^m) * (-1)^(m+1) / m!     m = 0..k-1
//! ```
//!
//! which satisfy the three-term recurrence
//!
//! ```text
//! k(k-1) a_m + (2k-1)(m+1) a_{m+1} + (m+1)(m+2) a_{m+2} = 0   0 <= m <= k-3
//! k(k-1) a_{k-2} + (2k-1)(k-1) a_{k-1} = 0
//! ```
//!
//! Magnitudes grow like `k^m / m!`, so the canonical representation is
//! sign-and-log; the plain `f64` mirror overflows to `±inf` once `k`
//! approaches the high hundreds but stays exact in sign.

use super::logspace::{ln_factorial, ln_one_minus_exp, SignedLog};
use super::{bound::MAX_K, AnalysisError};

// ---------------------------------------------------------------------------
// CoefficientSet
// ---------------------------------------------------------------------------

/// The `k` guarantee coefficients for one budget.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSet {
    /// The budget these coefficients belong to.
    pub k: usize,
    /// Plain double-precision mirror of `log_a`. Finite and accurate for
    /// small and medium budgets; overflows to `±inf` when `ln|a_m|`
    /// exceeds the `f64` exponent range (around `k ≈ 700`).
    pub a: Vec<f64>,
    /// Canonical sign-and-log representation; finite for every supported `k`.
    pub log_a: Vec<SignedLog>,
}

impl CoefficientSet {
    /// Relative residuals of the recurrence rows, computed in sign-and-log
    /// arithmetic: `|row sum| / max |term|` for each of the `k-2` generic
    /// rows followed by the boundary row (`k-1` values in total).
    pub fn recurrence_residuals(&self) -> Vec<f64> {
        let k = self.k;
        let mut residuals = Vec::with_capacity(k - 1);
        for m in 0..k.saturating_sub(2) {
            let terms = [
                self.log_a[m].mul(SignedLog::from_f64((k * (k - 1)) as f64)),
                self.log_a[m + 1].mul(SignedLog::from_f64(((2 * k - 1) * (m + 1)) as f64)),
                self.log_a[m + 2].mul(SignedLog::from_f64(((m + 1) * (m + 2)) as f64)),
            ];
            residuals.push(relative_residual(&terms));
        }
        let boundary = [
            self.log_a[k - 2].mul(SignedLog::from_f64((k * (k - 1)) as f64)),
            self.log_a[k - 1].mul(SignedLog::from_f64(((2 * k - 1) * (k - 1)) as f64)),
        ];
        residuals.push(relative_residual(&boundary));
        residuals
    }
}

fn relative_residual(terms: &[SignedLog]) -> f64 {
    let sum = terms.iter().fold(SignedLog::ZERO, |acc, &t| acc.add(t));
    if sum.sign == 0 {
        return 0.0;
    }
    let max_ln = terms.iter().map(|t| t.ln_abs).fold(f64::NEG_INFINITY, f64::max);
    (sum.ln_abs - max_ln).exp()
}

// ---------------------------------------------------------------------------
// coefficients
// ---------------------------------------------------------------------------

/// Computes the coefficient set for `2 <= k <= 1000`.
pub fn coefficients(k: usize) -> Result<CoefficientSet, AnalysisError> {
    if !(2..=MAX_K).contains(&k) {
        return Err(AnalysisError::KOutOfRange { k });
    }
    let kf = k as f64;
    let ln_k = kf.ln();
    let ln_km1 = (kf - 1.0).ln();
    // ln(k/(k-1)) without cancellation; drives the inner subtraction below.
    let ln_ratio = (1.0 / (kf - 1.0)).ln_1p();

    let mut log_a = Vec::with_capacity(k);
    for m in 0..k {
        let mf = m as f64;
        // |a_m| = (e^L1 - e^L2) / m! with L1 = k ln k - (k-m) ln(k-1) and
        // L2 = m ln k; their gap is (k-m) ln(k/(k-1)) > 0.
        let l1 = kf * ln_k - (kf - mf) * ln_km1;
        let gap = (kf - mf) * ln_ratio;
        let ln_abs = l1 + ln_one_minus_exp(-gap) - ln_factorial(m);
        let sign: i8 = if m % 2 == 0 { -1 } else { 1 };
        log_a.push(SignedLog::from_parts(sign, ln_abs));
    }
    let a = log_a.iter().map(|la| la.to_f64()).collect();
    Ok(CoefficientSet { k, a, log_a })
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range_budgets() {
        assert!(matches!(coefficients(1), Err(AnalysisError::KOutOfRange { k: 1 })));
        assert!(matches!(coefficients(1001), Err(AnalysisError::KOutOfRange { .. })));
    }

    #[test]
    fn lengths_match_the_budget() {
        for k in [2, 3, 10, 47] {
            let set = coefficients(k).unwrap();
            assert_eq!(set.a.len(), k);
            assert_eq!(set.log_a.len(), k);
            assert_eq!(set.recurrence_residuals().len(), k - 1);
        }
    }

    #[test]
    fn log_values_stay_finite_at_the_largest_budget() {
        let set = coefficients(1000).unwrap();
        for la in &set.log_a {
            assert!(la.ln_abs.is_finite());
            assert_ne!(la.sign, 0);
        }
    }
}
