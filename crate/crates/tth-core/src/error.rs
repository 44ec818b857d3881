//! Error type shared across the crate.

/// Errors produced by corpus ingestion, histogram construction, the operator
/// algebra, plan evaluation, and the analytics layer.
#[derive(Debug, thiserror::Error)]
pub enum TthError {
    /// A field, category, or attribute is missing or unknown.
    #[error("schema error: {0}")]
    Schema(String),

    /// Input data could not be parsed (timestamps, numbers, file formats).
    #[error("parse error: {0}")]
    Parse(String),

    /// A uniqueness constraint was violated (e.g. duplicate document id).
    #[error("conflict: {0}")]
    Conflict(String),

    /// Time grids or date ranges are incompatible for the requested operation.
    #[error("alignment error: {0}")]
    Alignment(String),

    /// A term or other key is not present in the vocabulary or registry domain.
    #[error("lookup error: {0}")]
    Lookup(String),

    /// getRecords was asked for rows that are not stored.
    #[error("absent rows: {0}")]
    AbsentRows(String),

    /// A named function, metric, or rule is not registered.
    #[error("registry error: {0}")]
    Registry(String),

    /// A caller violated an input contract (e.g. unsorted doc id list).
    #[error("contract violation: {0}")]
    Contract(String),

    /// An interval or window is inverted or out of range.
    #[error("range error: {0}")]
    Range(String),

    /// An argument value is invalid (empty sample, k = 0, bad spec).
    #[error("argument error: {0}")]
    Argument(String),

    /// A required companion structure is missing (e.g. forward index for
    /// deduplicating overlapping merges).
    #[error("dependency error: {0}")]
    Dependency(String),

    /// Not enough qualifying data to run a statistical comparison.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// A plan expression is ill-typed.
    #[error("plan type error: {0}")]
    PlanType(String),

    /// Cost estimation is missing required statistics.
    #[error("estimation error: {0}")]
    Estimation(String),

    /// A distance over an empty histogram has no defined distribution.
    #[error("undefined distribution: {0}")]
    UndefinedDistribution(String),

    /// Failure during plan evaluation, tagged with the failing node's path.
    #[error("evaluation failed at {path}: {source}")]
    Eval {
        path: String,
        #[source]
        source: Box<TthError>,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, TthError>;
