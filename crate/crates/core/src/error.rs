use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the clustering pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid data matrix: {0}")]
    InvalidData(String),

    #[error("column {0} has near-zero norm and cannot be normalized")]
    NearZeroColumn(usize),

    #[error("maximum off-diagonal inner product {0:e} is too small to scale lambda")]
    DegenerateGram(f64),

    #[error("image geometry {height}x{width} does not match feature dimension {dim}")]
    GeometryMismatch { height: usize, width: usize, dim: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("cluster {cluster} has {available} labeled samples, {required} required")]
    InsufficientLabels { cluster: usize, available: usize, required: usize },

    #[error("k = {k} exceeds the {available} admissible dictionary columns for sample {column}")]
    KTooLarge { k: usize, available: usize, column: usize },

    #[error("linear system is not positive definite: {0}")]
    SingularSystem(String),

    #[error("ADMM did not converge: residual {residual:e} after {iterations} iterations")]
    NoConvergence { residual: f64, iterations: usize },

    #[error("singular value decomposition failed")]
    SvdFailure,

    #[error("label propagation system is singular: {0}")]
    SingularPropagation(String),

    #[error("symmetric eigendecomposition failed")]
    EigenFailure,

    #[error("label vectors have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),

    #[error("dual program is unbounded: target has a component outside the dictionary span")]
    UnboundedDual,

    #[error("points do not span the ambient dimension")]
    DegenerateHull,

    #[error("instance too large for brute-force enumeration: {0}")]
    TooLarge(String),

    #[error("{path}: parse error at {location}: {message}")]
    Parse { path: PathBuf, location: String, message: String },

    #[error("{path}: non-finite entry at {location}")]
    NonFinite { path: PathBuf, location: String },

    #[error("{path}: bad magic number {found:#010x}")]
    MagicMismatch { path: PathBuf, found: u32 },

    #[error("{path}: file is truncated")]
    Truncated { path: PathBuf },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn parse(
        path: impl Into<PathBuf>,
        location: impl Into<String>,
        message: impl Into<String>,
    ) -> Self {
        Error::Parse { path: path.into(), location: location.into(), message: message.into() }
    }

    /// True for failures that originate in numerical routines rather than in the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularSystem(_)
                | Error::NoConvergence { .. }
                | Error::SvdFailure
                | Error::SingularPropagation(_)
                | Error::EigenFailure
                | Error::UnboundedDual
                | Error::DegenerateHull
                | Error::DegenerateGram(_)
        )
    }
}
