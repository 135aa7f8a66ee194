use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty reference set")]
    EmptyReferenceSet,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("duplicate points at indices {0} and {1}")]
    DuplicatePoint(usize, usize),
    #[error("family truncation produced no cubes")]
    EmptyFamily,
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("requires r1 > 1 (apply the subdivision reduction first)")]
    SplittingNeedsLargeR1,
    #[error("dual weight undefined: weight vanishes on a cell met by {0}")]
    DualWeightUndefined(String),
    #[error("weight singularity on the center of cell {0:?}")]
    SingularSample(Vec<usize>),
    #[error("expected {expected} lattices, got {got}")]
    LatticeCount { expected: usize, got: usize },
    #[error("corpus has no function with nonzero norm")]
    EmptyCorpus,
    #[error("resolution too coarse: construction needs cells of side {needed}, grid resolution is {resolution}")]
    Resolution { needed: f64, resolution: f64 },
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
