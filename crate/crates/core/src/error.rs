use thiserror::Error;

/// Errors raised by the tomography toolkit.
#[derive(Debug, Error)]
pub enum TomoError {
    #[error("invalid dimension {dim}: truncation must be at least 2")]
    InvalidDimension { dim: usize },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("not a density matrix: {0}")]
    NotDensity(String),

    #[error("index {index} out of range for truncation {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("singular slice: the kernel is undefined at nu = 0")]
    SingularSlice,

    #[error("degenerate frame: (mu, nu) = (0, 0)")]
    DegenerateFrame,

    #[error("singular denominator: {0}")]
    SingularDenominator(String),

    #[error("unsupported covariance: {0}")]
    UnsupportedCovariance(String),

    #[error("reconstruction diverges at alpha = {re_alpha}{im_alpha:+}i: photon sum still growing at n_max")]
    Divergence { re_alpha: f64, im_alpha: f64 },

    #[error("grid error: {0}")]
    Grid(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, TomoError>;
