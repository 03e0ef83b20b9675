use thiserror::Error;

/// Everything that can go wrong inside the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("fields live on different domain masks")]
    MaskMismatch,

    #[error("weight is singular at {point:?}")]
    SingularPoint { point: Vec<f64> },

    #[error("quadrature did not converge: {0}")]
    QuadratureFailure(String),

    #[error("radius exceeds the boundary distance at node {node}: R = {radius}, dist = {dist}")]
    RadiusExceedsBoundary { node: usize, radius: f64, dist: f64 },

    #[error("grid too coarse: {0}")]
    ResolutionInsufficient(String),

    #[error("problem too large: {0}")]
    ProblemTooLarge(String),

    #[error("linear solve failed: {0}")]
    SolverFailure(String),

    #[error("parameters outside the admissible range: {0}")]
    InadmissibleParameters(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("weight tail integral diverges")]
    TailDivergent,

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
