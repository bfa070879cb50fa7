use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("mode spaces do not match: {0}")]
    ModeMismatch(String),

    #[error("duplicate spatial mode label `{0}`")]
    DuplicateMode(String),

    #[error("unknown spatial mode `{0}`")]
    UnknownMode(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("state has zero norm")]
    ZeroNorm,

    #[error("basis term has no photon in mode `{0}`")]
    EmptyMode(String),

    #[error("wrong photon number: {0}")]
    PhotonNumber(String),

    #[error("post-selection pattern has zero success probability")]
    EmptyPostSelection,

    #[error("M = {m} exceeds the configured cap of {cap}")]
    CapExceeded { m: usize, cap: usize },

    #[error("truncation of {truncation} photons is too small (need at least {required})")]
    Truncation { truncation: usize, required: usize },

    #[error("numerical routine did not converge: {0}")]
    NotConverged(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
