use std::path::PathBuf;

/// Result alias used throughout the crate.
pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Everything that can go wrong while loading, scoring or correlating.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// The file does not follow the declared layout.
    #[error("malformed input: {0}")]
    Format(String),

    /// The file parsed but its contents violate a data invariant.
    #[error("invalid data: {0}")]
    Data(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("threshold {threshold} is below the largest pairwise distance {required}")]
    Threshold { threshold: f64, required: f64 },

    #[error("{n} points exceed the reference reduction limit of {max}")]
    Size { n: usize, max: usize },

    /// No finite birth-death pair survived, so the persistence score is undefined.
    #[error("no finite persistence pairs; score is undefined")]
    EmptyDiagram,

    #[error("point {index}: {reason}")]
    DegenerateNeighborhood { index: usize, reason: &'static str },

    #[error("degenerate class: {0}")]
    DegenerateClass(&'static str),

    #[error("covariance is numerically singular (pivot {pivot:e} at row {row})")]
    SingularCovariance { row: usize, pivot: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dim { expected: usize, got: usize },

    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("score undefined: {0}")]
    UndefinedScore(&'static str),

    #[error("classes {a} and {b} share a centroid")]
    DegenerateCentroid { a: u32, b: u32 },

    #[error("kernel density bandwidth is zero (all points identical)")]
    DegenerateKde,

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(&'static str),

    #[error("metric table has no entry for: {0}")]
    Join(String),

    /// One or more classes failed inside a dataset-level computation.
    #[error("{}", format_class_failures(.0))]
    ClassFailures(Vec<ClassFailure>),
}

/// A per-class error, tagged with the offending class id.
#[derive(Debug)]
pub struct ClassFailure {
    pub class: u32,
    pub error: Error,
}

fn format_class_failures(failures: &[ClassFailure]) -> String {
    let parts: Vec<String> = failures
        .iter()
        .map(|f| format!("class {}: {}", f.class, f.error))
        .collect();
    parts.join("; ")
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by unreadable or malformed inputs and bad configuration,
    /// as opposed to failures of the analysis itself.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Io { .. } | Error::Format(_) | Error::Data(_) | Error::Config(_)
        )
    }
}
