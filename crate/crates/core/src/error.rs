use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum ShadowError {
    #[error("tensor dimension {dim} exceeds the dense budget of {budget}")]
    DimensionOverflow { dim: u128, budget: usize },

    #[error("enumerating {count} permutations exceeds the budget of {budget}")]
    EnumerationBudget { count: u128, budget: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("matrix has a non-finite entry")]
    NonFinite,

    #[error("state vector is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("density matrix is not pure (||rho^2 - rho|| = {0:e})")]
    NotPure(f64),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("qudit index {index} out of range for {size} qudits")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("states coincide; no distinguishing observable exists")]
    IndistinguishableStates,

    #[error("hidden matching promise violated at edge {0}")]
    PromiseViolated(usize),

    #[error("infeasible instance: {0}")]
    Infeasible(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, ShadowError>;

pub(crate) fn invalid(msg: impl Into<String>) -> ShadowError {
    ShadowError::InvalidArgument(msg.into())
}
