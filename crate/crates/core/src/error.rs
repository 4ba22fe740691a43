use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate polygon")]
    DegeneratePolygon,

    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),

    #[error("no annotations")]
    NoAnnotations,

    #[error("non-finite coordinate at index {index}")]
    NonFinitePoint { index: usize },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("centroids outside the {width}x{height} image at indices {indices:?}")]
    OutOfBounds {
        width: usize,
        height: usize,
        indices: Vec<usize>,
    },

    #[error("assignment instance too large for exhaustive search: {rows}x{cols} (smaller side must be <= {limit})")]
    TooLarge { rows: usize, cols: usize, limit: usize },

    #[error("infeasible scene: placed {placed} of {requested} points before exhausting the retry budget")]
    InfeasibleScene { placed: usize, requested: usize },

    #[error("nothing to benchmark")]
    NothingToBenchmark,

    #[error("format error at byte {offset}: {message}")]
    Format { offset: usize, message: String },

    #[error("line {line}: {message}")]
    Csv { line: u64, message: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
