use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("incompatible fields: {0}")]
    MeshMismatch(String),

    #[error("invalid configuration: `{field}`: {reason}")]
    InvalidConfig { field: String, reason: String },

    #[error("singular pivot in block {block}")]
    SingularPivot { block: usize },

    #[error("singular matrix: zero pivot in column {column}")]
    Singular { column: usize },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },

    #[error("requested rank {requested} exceeds the numerical rank {usable}")]
    RankExceeded { requested: usize, usable: usize },

    #[error("eigenvalue spectrum is identically zero")]
    ZeroSpectrum,

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("malformed snapshot file at byte {offset}: {reason}")]
    Format { offset: u64, reason: String },

    #[error("checksum mismatch at byte {offset}: stored {stored:#018x}, computed {computed:#018x}")]
    Checksum { offset: u64, stored: u64, computed: u64 },

    #[error("sample time grids differ at index {index}: {left} vs {right}")]
    GridMismatch { index: usize, left: f64, right: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
