use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("hazard function must be positive; h({at}) = {value}")]
    NonPositiveHazard { at: f64, value: f64 },

    #[error("operation requires a discrete jump law, got {0}")]
    NotDiscrete(String),

    #[error("operation requires a lattice jump law, got {0}")]
    NotLattice(String),

    #[error("jump law is not symmetric (max mass mismatch {residual:.3e})")]
    NotSymmetric { residual: f64 },

    #[error(
        "insufficient series depth: remainder bound {remainder_log:.3} (log) \
         exceeds tol {tol:.3e} x partial sum at K = {k_max}"
    )]
    InsufficientDepth {
        k_max: usize,
        remainder_log: f64,
        tol: f64,
    },

    #[error("convolution support exceeded cap of {cap} points at fold {fold}")]
    SupportCapExceeded { fold: usize, cap: usize },

    #[error("no fold k <= {k_max} has P(S_k > {b}) > 0")]
    IndexNotFound { b: f64, k_max: usize },
}
