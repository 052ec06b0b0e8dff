use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BesqError {
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),
    #[error("unsupported Bessel order {0} (I requires order >= -1)")]
    UnsupportedOrder(f64),
    #[error("parameter regime violation: {0}")]
    RegimeViolation(String),
    #[error("barrier orientation error: {0}")]
    Orientation(String),
    #[error("degenerate conditioning: event probability {0:e} underflows")]
    DegenerateConditioning(f64),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("value overflows the scalar type (log magnitude {0})")]
    Overflow(f64),
    #[error("quadrature failed: {reason} (estimate {estimate:e}, error {error:e}, {evaluations} evaluations)")]
    Quadrature {
        reason: &'static str,
        estimate: f64,
        error: f64,
        evaluations: usize,
    },
    #[error("ODE integration failed: {0}")]
    Ode(String),
    #[error("unstable inversion: {0}")]
    Unstable(String),
    #[error("{censored} of {total} paths censored")]
    CensoredMajority { censored: usize, total: usize },
}

impl BesqError {
    /// Caller errors as opposed to numerical breakdowns.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            BesqError::NonFinite(_)
                | BesqError::UnsupportedOrder(_)
                | BesqError::RegimeViolation(_)
                | BesqError::Orientation(_)
                | BesqError::InvalidConfig(_)
        )
    }
}

pub type Result<T> = core::result::Result<T, BesqError>;
