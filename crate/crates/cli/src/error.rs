//! Process-level error classification: every failure is either a usage /
//! configuration problem (exit 2) or an input-data problem (exit 3).

use std::fmt;

use seclab_core::analysis::AnalysisError;
use seclab_core::harness::HarnessError;
use seclab_core::policy::PolicyError;

/// A command failure with its exit classification.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Bad flags, bad configuration, or an unsatisfiable request. Exit 2.
    Usage(String),
    /// Unreadable, unparseable, or incomplete input data. Exit 3.
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) => 2,
            Self::Data(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Usage(m) | Self::Data(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

pub fn usage(message: impl Into<String>) -> CliError {
    CliError::Usage(message.into())
}

pub fn data(message: impl Into<String>) -> CliError {
    CliError::Data(message.into())
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<PolicyError> for CliError {
    fn from(e: PolicyError) -> Self {
        match e {
            // The configuration was fine; the stream lacks required values.
            PolicyError::MissingTrueValue { .. } => CliError::Data(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::MissingFooled { .. } => CliError::Data(e.to_string()),
            HarnessError::Policy(inner) => inner.into(),
            HarnessError::InvalidSpec { .. } => CliError::Usage(e.to_string()),
        }
    }
}
