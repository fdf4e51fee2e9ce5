use thiserror::Error;

use crate::ode::Trajectory;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} = {value} is outside the model domain")]
    Domain { what: &'static str, value: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("{what} did not converge (last residual {residual:e})")]
    RootFind { what: &'static str, residual: f64 },

    #[error("fast equation is not solvable for the slow variable (f_y = {fy:e})")]
    Solvability { fy: f64 },

    #[error("derivative {field} disagrees between methods: {primary} vs {reference}")]
    DerivativeConsistency {
        field: &'static str,
        primary: f64,
        reference: f64,
    },

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error(
        "antisymmetric block has det = {det_a:e} <= 0 at the trace root (steady-state bifurcation)"
    )]
    WrongBranch { mu: f64, det_a: f64 },

    #[error("inconsistent result: {0}")]
    Inconsistency(String),

    #[error("integration failed at t = {t}: {reason}")]
    Integration {
        t: f64,
        reason: String,
        /// Accepted steps up to the failure (full-system runs only).
        partial: Option<Box<Trajectory>>,
    },

    #[error("trajectory left the model domain at t = {t}")]
    DomainExit {
        t: f64,
        state: [f64; 4],
        partial: Box<Trajectory>,
    },

    #[error("analysis error: {0}")]
    Analysis(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("unknown parameter '{0}'")]
    UnknownParameter(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    /// True for errors caused by bad inputs rather than numerical trouble.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::UnknownParameter(_) | Error::InvalidParameter(_)
        )
    }
}
