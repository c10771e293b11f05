use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed PBM/PPM input. `offset` is the byte position of the first
    /// offending byte.
    #[error("pbm parse error at byte {offset}: {message}")]
    PbmParse { offset: usize, message: String },

    /// The instance cannot satisfy its constraints (e.g. fewer printable
    /// pixels than cells, or no clearance-compliant start placement).
    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("image has no printable pixels")]
    EmptyImage,

    /// Start positions violate the pairwise clearance bound.
    #[error("clearance violated: robots {i} and {j} start {dist:.6} apart (bound {bound:.6})")]
    Clearance { i: u32, j: u32, dist: f64, bound: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn infeasible(msg: impl Into<String>) -> Self {
        Error::Infeasible(msg.into())
    }
}
