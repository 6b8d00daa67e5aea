//! The asymptotic guarantee curve `f(alpha)` and its maximizer.
//!
//! Algebraically the curve is `alpha^k * sum_m a_m ln^m(alpha) - alpha*a_0`
//! over the coefficients of [`super::coefficients`]. Substituting the
//! closed form of `a_m` and regrouping turns it into two truncated
//! exponential series whose terms are all `O(1)`:
//!
//! ```text
//! u  = -ln(alpha)            rho = (k/(k-1))^k
//! S1 = alpha^k * sum_{m<k} (k*u)^m / m!
//! S2 = alpha^k * sum_{m<k} ((k-1)*u)^m / m!
//! f  = S1 - rho*S2 + alpha*(rho - 1)
//! ```
//!
//! This form never materializes the huge alternating coefficients, so it
//! stays accurate for every supported budget; each term is evaluated in
//! log space and the series are compensated sums.

use super::AnalysisError;
use crate::analysis::ln_factorial;
use crate::numeric::NeumaierSum;

/// Largest supported budget for the analytic routines.
pub const MAX_K: usize = 1000;

// ---------------------------------------------------------------------------
// BoundResult
// ---------------------------------------------------------------------------

/// The maximizer of the guarantee curve for one budget.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundResult {
    /// The budget.
    pub k: usize,
    /// Maximizing sampling fraction.
    pub alpha_star: f64,
    /// The guarantee value at the maximizer.
    pub c_k: f64,
    /// Optional sampled `(alpha, f(alpha))` curve for reporting; never
    /// filled in by [`optimal_threshold`] itself.
    pub evaluations: Option<Vec<(f64, f64)>>,
}

// ---------------------------------------------------------------------------
// bound_f
// ---------------------------------------------------------------------------

/// Evaluates the guarantee curve at `alpha` for `2 <= k <= 1000` and
/// `alpha` strictly inside `(0, 1)`.
pub fn bound_f(k: usize, alpha: f64) -> Result<f64, AnalysisError> {
    if !(2..=MAX_K).contains(&k) {
        return Err(AnalysisError::KOutOfRange { k });
    }
    if !alpha.is_finite() || alpha <= 0.0 || alpha >= 1.0 {
        return Err(AnalysisError::AlphaOutOfRange { alpha });
    }
    Ok(stable_eval(k, alpha))
}

fn stable_eval(k: usize, alpha: f64) -> f64 {
    let kf = k as f64;
    let ln_alpha = alpha.ln();
    let u = -ln_alpha;
    let rho = (kf * (1.0 / (kf - 1.0)).ln_1p()).exp();
    let ln_lambda1 = (kf * u).ln();
    let ln_lambda2 = ((kf - 1.0) * u).ln();

    let mut s1 = NeumaierSum::new();
    let mut s2 = NeumaierSum::new();
    for m in 0..k {
        let base = kf * ln_alpha - ln_factorial(m);
        if m == 0 {
            // No lambda power; writing it as 0 * ln(lambda) would poison
            // the exponent with 0 * (-inf) as u -> 0.
            let term = base.exp();
            s1.add(term);
            s2.add(term);
        } else {
            let mf = m as f64;
            s1.add((base + mf * ln_lambda1).exp());
            s2.add((base + mf * ln_lambda2).exp());
        }
    }
    s1.total() - rho * s2.total() + alpha * (rho - 1.0)
}

// ---------------------------------------------------------------------------
// optimal_threshold
// ---------------------------------------------------------------------------

/// Maximizes the guarantee curve by golden-section search over
/// `[1e-9, 1 - 1e-9]` to an interval width of `1e-10`. Deterministic:
/// repeated calls return bitwise-identical results.
pub fn optimal_threshold(k: usize) -> Result<BoundResult, AnalysisError> {
    if !(2..=MAX_K).contains(&k) {
        return Err(AnalysisError::KOutOfRange { k });
    }
    const INVPHI: f64 = 0.618_033_988_749_894_9;
    const TOL: f64 = 1e-10;

    let mut a = 1e-9;
    let mut b = 1.0 - 1e-9;
    let mut c = b - INVPHI * (b - a);
    let mut d = a + INVPHI * (b - a);
    let mut fc = stable_eval(k, c);
    let mut fd = stable_eval(k, d);
    while b - a > TOL {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INVPHI * (b - a);
            fc = stable_eval(k, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INVPHI * (b - a);
            fd = stable_eval(k, d);
        }
    }
    let alpha_star = 0.5 * (a + b);
    let c_k = stable_eval(k, alpha_star);
    Ok(BoundResult { k, alpha_star, c_k, evaluations: None })
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
