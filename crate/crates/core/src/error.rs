use thiserror::Error;

use crate::time::Timestamp;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TimeError {
    #[error("invalid date literal `{0}`")]
    InvalidDate(String),
    #[error("span start {start} is after end {end}")]
    InvertedSpan { start: Timestamp, end: Timestamp },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KbError {
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
    #[error("CVTs entered through `{0}` have no entity-valued outgoing predicate")]
    NoIdentityPredicate(String),
}

/// A recoverable problem with one line of an input file.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct LineError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NpmiError {
    #[error("joint probability is 1, normalizer -log p(a,b) is zero")]
    DegenerateJoint,
    #[error("probabilities violate 0 < p(a,b) <= min(p(a), p(b)) and 0 < p(a), p(b) < 1: joint={joint}, a={a}, b={b}")]
    InvalidProbabilities { joint: f64, a: f64, b: f64 },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LayoutError {
    #[error("empty span")]
    EmptySpan,
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("oracle refuses {size} elements (limit {limit})")]
    TooLarge { size: usize, limit: usize },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SelectError {
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error("no candidate events")]
    NoEvents,
    #[error("unknown model variant `{0}`")]
    UnknownVariant(String),
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io { path: std::path::PathBuf, source: std::io::Error },
    #[error("{path}: line {line}: {message}")]
    Format { path: std::path::PathBuf, line: usize, message: String },
}
