use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("R must be a power of two ≥ 4 (got {0})")]
    InvalidRelayCount(usize),

    #[error("relay count {0} exceeds the supported maximum of {1}")]
    RelayCountTooLarge(usize, usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("monomial {monomial} uses a δ generator outside δ1..δ{a}")]
    MonomialOutOfRange { monomial: String, a: u32 },

    #[error("matrix is not scaled unitary (max deviation {deviation:e})")]
    NotScaledUnitary { deviation: f64 },

    #[error("zero matrix has no positive scale")]
    ZeroMatrix,

    #[error("initial matrix X0 is not unitary")]
    InitialMatrixNotUnitary,

    #[error("invalid signal set: {0}")]
    InvalidSignalSet(String),

    #[error("codewords {0} and {1} are identical")]
    DuplicateCodeword(usize, usize),

    #[error("codeword {index} fails scaled unitarity (max deviation {deviation:e})")]
    CodewordNotScaledUnitary { index: usize, deviation: f64 },

    #[error("codebook is empty")]
    EmptyCodebook,

    #[error("minimum distance needs at least two codewords")]
    SingletonCodebook,

    #[error("scale must be positive (got {0})")]
    NonPositiveScale(f64),

    #[error("group decisions {0:?} form a combination excluded from the codebook")]
    ExcludedCombination([usize; 4]),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
