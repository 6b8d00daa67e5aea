//! Sign-and-logarithm arithmetic for quantities whose magnitudes overflow
//! `f64` long before their ratios stop being meaningful (the guarantee
//! coefficients grow roughly like `k^m / m!`).

use std::sync::OnceLock;

/// Largest argument `ln_factorial` supports; matches the largest budget the
/// coefficient machinery accepts.
const MAX_FACTORIAL: usize = 1000;

// ---------------------------------------------------------------------------
// SignedLog
// ---------------------------------------------------------------------------

/// A real number stored as `sign * exp(ln_abs)`.
///
/// `sign` is -1, 0, or +1; zero is canonically `{ sign: 0, ln_abs: -inf }`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLog {
    pub sign: i8,
    pub ln_abs: f64,
}

impl SignedLog {
    /// Canonical zero.
    pub const ZERO: SignedLog = SignedLog { sign: 0, ln_abs: f64::NEG_INFINITY };

    /// Builds from parts, normalizing the zero representation.
    pub fn from_parts(sign: i8, ln_abs: f64) -> Self {
        debug_assert!((-1..=1).contains(&sign));
        if sign == 0 || ln_abs == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            Self { sign, ln_abs }
        }
    }

    /// Exact conversion from a finite double.
    pub fn from_f64(x: f64) -> Self {
        debug_assert!(x.is_finite());
        if x == 0.0 {
            Self::ZERO
        } else {
            Self { sign: if x < 0.0 { -1 } else { 1 }, ln_abs: x.abs().ln() }
        }
    }

    /// Converts back to a double; saturates to `±inf` when `ln_abs`
    /// exceeds the representable range.
    pub fn to_f64(self) -> f64 {
        self.sign as f64 * self.ln_abs.exp()
    }

    /// Signed product.
    pub fn mul(self, other: Self) -> Self {
        Self::from_parts(self.sign * other.sign, self.ln_abs + other.ln_abs)
    }

    /// Signed sum via log-sum-exp on the dominant magnitude.
    pub fn add(self, other: Self) -> Self {
        if self.sign == 0 {
            return other;
        }
        if other.sign == 0 {
            return self;
        }
        let (big, small) =
            if self.ln_abs >= other.ln_abs { (self, other) } else { (other, self) };
        let d = small.ln_abs - big.ln_abs; // d <= 0
        if big.sign == small.sign {
            Self::from_parts(big.sign, big.ln_abs + d.exp().ln_1p())
        } else {
            // |big| - |small| = |big| * (1 - e^d); exact cancellation gives
            // ln(0) = -inf, which normalizes to ZERO.
            Self::from_parts(big.sign, big.ln_abs + ln_one_minus_exp(d))
        }
    }
}

/// `ln(1 - e^d)` for `d <= 0`, accurate at both ends of the range.
pub(crate) fn ln_one_minus_exp(d: f64) -> f64 {
    debug_assert!(d <= 0.0);
    if d < -std::f64::consts::LN_2 {
        (-d.exp()).ln_1p()
    } else {
        (-d.exp_m1()).ln()
    }
}

// ---------------------------------------------------------------------------
// ln m!
// ---------------------------------------------------------------------------

/// `ln(m!)` from a lazily built cumulative table.
pub(crate) fn ln_factorial(m: usize) -> f64 {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(MAX_FACTORIAL + 1);
        t.push(0.0);
        let mut acc = 0.0f64;
        for i in 1..=MAX_FACTORIAL {
            acc += (i as f64).ln();
            t.push(acc);
        }
        t
    });
    table[m]
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
