//! Crate-wide error type.
//!
//! Variants split into two families the CLI cares about: *input* errors
//! (bad configuration, malformed files; the run never started) and *runtime
//! alarms* (a numerical invariant broke mid-run; the run started and must
//! not be trusted). [`Error::is_runtime_alarm`] encodes the split.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// State norm left the allowed band during a run. Unitary steps conserve
    /// norm to machine precision, so any drift beyond the alarm level means
    /// the evolution (not the physics) went wrong.
    #[error("state norm {norm:.17e} drifted more than {tolerance:.1e} from 1")]
    NormDrift { norm: f64, tolerance: f64 },

    /// The extremal eigenvalue asked for is (numerically) degenerate, so "the"
    /// optimal state is not unique. Callers must pick a subspace deliberately
    /// rather than have one eigenvector chosen by rounding noise.
    #[error("extremal eigenvalue is degenerate: gap {gap:.3e} below {tolerance:.1e}; optimal state not unique")]
    DegenerateExtremum { gap: f64, tolerance: f64 },

    /// Probability reached the edge of a truncated basis, so further evolution
    /// would see artificial reflections.
    #[error("dynamics reached the truncation edge (site {site} of {size})")]
    TruncationBreach { site: usize, size: usize },

    #[error("eigensolver failed to converge on index {index} after {iterations} sweeps")]
    EigenNoConverge { index: usize, iterations: usize },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Format { path: String, message: String },
}

impl Error {
    /// True for errors raised *during* a computation whose inputs were valid:
    /// the run produced no trustworthy result. False for errors that reject
    /// the inputs up front.
    pub fn is_runtime_alarm(&self) -> bool {
        matches!(
            self,
            Error::NormDrift { .. }
                | Error::DegenerateExtremum { .. }
                | Error::TruncationBreach { .. }
                | Error::EigenNoConverge { .. }
        )
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub(crate) fn format(path: &std::path::Path, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.display().to_string(),
            message: message.into(),
        }
    }
}
