use thiserror::Error;

/// Errors raised by the design, inference and simulation routines.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    /// Calibration inputs imply a law that cannot exist.
    #[error("infeasible input for {subgroup}: {reason}")]
    InfeasibleInput { subgroup: String, reason: String },

    /// The design has nothing to detect, or otherwise cannot be sized.
    #[error("infeasible design: {0}")]
    InfeasibleDesign(String),

    /// A quadrature or root-finding routine did not converge.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// The data cannot support the requested statistic.
    #[error("degenerate data: {0}")]
    Degenerate(String),

    /// A trial data file could not be parsed.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn infeasible(subgroup: impl Into<String>, reason: impl Into<String>) -> Error {
    Error::InfeasibleInput {
        subgroup: subgroup.into(),
        reason: reason.into(),
    }
}
