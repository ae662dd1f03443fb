use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("argument outside domain: {0}")]
    Domain(String),
    #[error("singular principal submatrix for index subset {subset:?} (|det| = {det:e})")]
    Singular { subset: Vec<usize>, det: f64 },
    #[error("quadrature did not converge: {0}")]
    Integration(String),
    #[error("limit estimation failed: {message}; sequence = {sequence:?}")]
    Estimation { message: String, sequence: Vec<f64> },
    #[error("Keller-Osserman condition violated: {0}")]
    KellerOsserman(String),
    #[error("argument {t:e} outside the invertible range; try a bracket near {suggestion:e}")]
    Range { t: f64, suggestion: f64 },
    #[error("bracketing failed: {0}")]
    Bracketing(String),
    #[error("hypothesis violated: {0}")]
    Assumption(String),
    #[error("fixed-point iteration did not converge: {message}; damping trace = {damping:?}")]
    NonConvergence { message: String, damping: Vec<f64> },
    #[error("monotone scheme failure: {0}")]
    SchemeFailure(String),
    #[error("rate extraction failed: {message}; ratios = {sequence:?}")]
    Extraction { message: String, sequence: Vec<f64> },
}

impl Error {
    /// True for errors that report a violated mathematical hypothesis rather
    /// than a numerical breakdown or a malformed request.
    pub fn is_hypothesis(&self) -> bool {
        matches!(self, Error::Assumption(_) | Error::KellerOsserman(_))
    }

    /// True for errors raised by an algorithm that failed to deliver its
    /// accuracy contract.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Singular { .. }
                | Error::Integration(_)
                | Error::Estimation { .. }
                | Error::Range { .. }
                | Error::Bracketing(_)
                | Error::NonConvergence { .. }
                | Error::SchemeFailure(_)
                | Error::Extraction { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
