use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by the simulator.
#[derive(Debug, Error)]
pub enum Error {
    /// A 2x2 matrix handed to a mode transform is not unitary.
    #[error("matrix is not unitary: max |u^H u - I| = {residual:.3e}")]
    NonUnitary { residual: f64 },

    /// Two states with different total photon numbers were combined.
    #[error("photon number mismatch: {left} vs {right}")]
    PhotonNumberMismatch { left: u8, right: u8 },

    /// A state whose norm is numerically zero cannot be normalized.
    #[error("cannot normalize state with squared norm {norm_sq:.3e}")]
    ZeroNorm { norm_sq: f64 },

    /// Coincidence post-selection removed every term.
    #[error("post-selection on a coincidence left no amplitude (projected norm {norm_sq:.3e})")]
    EmptyPostselection { norm_sq: f64 },

    /// A state occupies modes an operation does not allow.
    #[error("state occupies unexpected mode {mode}: {context}")]
    UnexpectedMode { mode: String, context: &'static str },

    /// A scalar argument is outside its documented range.
    #[error("invalid parameter {name} = {value}: {constraint}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },

    /// A matrix violates the density-matrix contract.
    #[error("not a valid density matrix: {0}")]
    InvalidDensityMatrix(String),

    /// The tomography design matrix does not constrain all 16 degrees of
    /// freedom; the message names the unconstrained Hermitian directions.
    #[error("measurement set is rank deficient (rank {rank}/16); unconstrained directions: {directions}")]
    RankDeficient { rank: usize, directions: String },

    /// A visibility estimate needs at least two baseline points.
    #[error("visibility estimation failed: {0}")]
    VisibilityEstimate(String),

    /// Generic numerical failure (non-convergence and friends).
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Malformed serialized input.
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
