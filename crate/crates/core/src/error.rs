use thiserror::Error;

/// Errors raised by the library.
///
/// Solver outcomes such as non-convergence are not errors; they are reported
/// through [`crate::recovery::Status`] so that benchmark harnesses can count
/// them.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error in {op}: {detail}")]
    Domain { op: &'static str, detail: String },

    /// The Lorentz factor is not real at the requested point.
    #[error("Lorentz factor is not real at xi = {xi:e}")]
    NonReal { xi: f64 },

    /// Sign-change bracketing failed to enclose a root.
    #[error("bracketing failed for {what}: f({lo:e}) and f({hi:e}) have the same sign")]
    Bracketing { what: &'static str, lo: f64, hi: f64 },

    /// The analytic cubic root failed its residual check.
    #[error("cubic root post-check failed: f_c({xi:e}) = {residual:e} exceeds {bound:e}")]
    CubicPostCheck { xi: f64, residual: f64, bound: f64 },

    /// Extracted primitive variables violate the physical constraints.
    #[error("non-physical primitive state: {0}")]
    NonPhysical(String),
}

impl Error {
    pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain { op, detail: detail.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
