use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("raster data length {actual} does not match {width}x{height}x3 = {expected}")]
    DataLength {
        width: usize,
        height: usize,
        expected: usize,
        actual: usize,
    },
    #[error("image {width}x{height} is smaller than one 16x16 block")]
    DimensionTooSmall { width: usize, height: usize },
    #[error("image {width}x{height} is not a multiple of 16 in both dimensions")]
    NotBlockMultiple { width: usize, height: usize },
    #[error("block grid is empty")]
    EmptyGrid,
    #[error("training set produced no patches")]
    EmptyTrainingSet,
    #[error("k-means needs at least {clusters} points, got {points}")]
    TooFewPoints { points: usize, clusters: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("vector dimension {actual} does not match expected {expected}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("duplicate image id {0:?}")]
    DuplicateId(String),
    #[error("codebook mismatch: index uses {expected}, vector built with {actual}")]
    CodebookMismatch { expected: u64, actual: u64 },
    #[error("field {field} contains a tab or newline")]
    InvalidField { field: &'static str },
    #[error("ground-truth set is empty")]
    EmptyTruthSet,
    #[error("ground-truth id {0:?} is missing from the ranking")]
    TruthNotRanked(String),
    #[error("no queries to average")]
    NoQueries,
}
