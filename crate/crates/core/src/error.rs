use thiserror::Error;

/// Errors raised by the simulation, scoring and translation layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrpError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_diagonal:.3e})")]
    EigenNonConvergence { sweeps: usize, off_diagonal: f64 },

    #[error("ambiguous level matching at tau = {tau}: overlap scores {best:.6} vs {second:.6}")]
    AmbiguousMatching { tau: f64, best: f64, second: f64 },

    #[error("near-degenerate levels {k} and {l} at tau = {tau} (gap {gap:.3e})")]
    NearDegeneracy { tau: f64, k: usize, l: usize, gap: f64 },

    #[error("integration failed at tau = {tau}: {reason}")]
    IntegrationFailure { tau: f64, reason: String },

    #[error("norm drift {drift:.3e} exceeds tolerance at tau = {tau}")]
    NormDrift { tau: f64, drift: f64 },

    #[error("column {column}: {source}")]
    Column {
        column: usize,
        #[source]
        source: Box<TrpError>,
    },

    #[error("row {row}: {source}")]
    Row {
        row: usize,
        #[source]
        source: Box<TrpError>,
    },

    #[error("no double well: beta_L^0 = {beta:.6} must exceed 1")]
    NoDoubleWell { beta: f64 },

    #[error("singular control map: G = {g:.3e}")]
    SingularControl { g: f64 },

    #[error("unknown gate name `{0}`")]
    UnknownGate(String),
}

impl TrpError {
    /// True for failures of the numerical pipeline as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            TrpError::Column { source, .. } | TrpError::Row { source, .. } => source.is_numerical(),
            TrpError::EigenNonConvergence { .. }
            | TrpError::AmbiguousMatching { .. }
            | TrpError::NearDegeneracy { .. }
            | TrpError::IntegrationFailure { .. }
            | TrpError::NormDrift { .. } => true,
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, TrpError>;
