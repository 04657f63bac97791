use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("zero vector where a nonzero vector is required")]
    ZeroVector,

    #[error("operator is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("operator is not unitary (max deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("operator is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPsd(f64),

    #[error("invalid layout: {0}")]
    InvalidLayout(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid permutation: {0:?}")]
    InvalidPermutation(Vec<usize>),

    #[error("rows {0} and {1} are not orthogonal (overlap {2:.3e})")]
    NotOrthogonal(usize, usize, f64),

    #[error("angle {name} = {value} outside the open interval (0, pi/2)")]
    AngleOutOfRange { name: &'static str, value: f64 },

    #[error("invalid symbol {symbol:?} at row {row}, column {column}")]
    InvalidSymbol {
        symbol: String,
        row: usize,
        column: usize,
    },

    #[error("unknown builtin {0:?}")]
    UnknownBuiltin(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("table entry {index}: {source}")]
    TableEntry {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
