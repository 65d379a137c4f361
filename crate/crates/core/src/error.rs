use thiserror::Error;

/// Errors raised by the engine model, the Gaussian backend and the Fock oracle.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum OttoError {
    #[error("invalid reservoir orientation: beta_h = {beta_h} must be smaller than beta_c = {beta_c}")]
    InvalidOrientation { beta_h: f64, beta_c: f64 },

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("unstable pump: 2*chi/omega = {ratio} must stay below 1")]
    UnstablePump { ratio: f64 },

    #[error("unphysical state: symplectic eigenvalue {nu} is below 1/2")]
    UnphysicalState { nu: f64 },

    #[error("state has non-zero mean ({0}, {1}); only centred states are supported")]
    NonZeroMean(f64, f64),

    #[error("integration failure: {0}")]
    IntegrationFailure(String),

    #[error("Fock cutoff {dim} too small: tail weight {tail:e} exceeds {limit:e}")]
    CutoffTooSmall { dim: usize, tail: f64, limit: f64 },

    #[error("reference state is rank deficient (eigenvalue {0:e})")]
    RankDeficient(f64),

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
}

pub type Result<T> = std::result::Result<T, OttoError>;
