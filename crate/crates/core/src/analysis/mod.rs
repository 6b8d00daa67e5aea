//! Analytic machinery behind the policies: the guarantee-curve
//! coefficients and their log-space representation, the asymptotic pair
//! bound and its maximizing sampling fraction, an exact finite-n closed
//! form for budget two, exhaustive small-instance enumeration in exact
//! rationals, the partial-selection probability decomposition, and the
//! noise degradation factor.
//!
//! Everything here is deterministic: same inputs, same bits.

mod bound;
mod coefficients;
mod enumerate;
mod finite;
mod logspace;
mod stochastic;

pub use bound::{bound_f, optimal_threshold, BoundResult, MAX_K};
pub use coefficients::{coefficients, CoefficientSet};
pub use enumerate::{enumerate_exact, selection_probabilities_exact, EnumerationReport};
pub use finite::finite_ratio_k2;
pub use logspace::SignedLog;
pub use stochastic::{
    min_gap, not_full_probability, not_full_probability_exact, stochastic_factor,
};

pub(crate) use logspace::ln_factorial;

use std::fmt;

use crate::policy::PolicyKind;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Errors from the analytic routines.
#[derive(Debug, Clone, PartialEq)]
pub enum AnalysisError {
    /// The budget is outside the supported range.
    KOutOfRange { k: usize },
    /// The sampling fraction must lie strictly inside (0, 1).
    AlphaOutOfRange { alpha: f64 },
    /// An input violates a documented precondition.
    Precondition { message: String },
    /// The requested exact computation would be too expensive.
    InstanceTooLarge { detail: String },
    /// The routine is undefined for this policy.
    UnsupportedPolicy { policy: PolicyKind },
}

impl fmt::Display for AnalysisError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::KOutOfRange { k } => {
                write!(f, "budget k={k} outside the supported range 2..={MAX_K}")
            }
            Self::AlphaOutOfRange { alpha } => {
                write!(f, "sampling fraction alpha={alpha} must lie strictly inside (0, 1)")
            }
            Self::Precondition { message } => write!(f, "precondition violated: {message}"),
            Self::InstanceTooLarge { detail } => {
                write!(f, "exact computation refused: {detail}")
            }
            Self::UnsupportedPolicy { policy } => {
                write!(f, "routine is undefined for policy {policy}")
            }
        }
    }
}

impl std::error::Error for AnalysisError {}

pub(crate) fn precondition(message: impl Into<String>) -> AnalysisError {
    AnalysisError::Precondition { message: message.into() }
}
