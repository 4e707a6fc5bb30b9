//! Crate-wide error type.

use crate::equalize::FeasibilityReport;
use thiserror::Error;

/// Everything that can go wrong across the crate.
#[derive(Debug, Error)]
pub enum Error {
    // -- construction --
    #[error("probabilities sum to {sum:.12}, expected 1 within {tol:e}")]
    NotNormalized { sum: f64, tol: f64 },
    #[error("negative mass {value} at cell {cell}")]
    NegativeMass { cell: String, value: f64 },
    #[error("duplicate entry for cell {cell}")]
    DuplicateCell { cell: String },
    #[error("bad assignment: {detail}")]
    BadAssignment { detail: String },
    #[error("invalid schema: {0}")]
    InvalidSchema(String),
    #[error("expected {expected} cell probabilities, got {found}")]
    WrongCellCount { expected: usize, found: usize },

    // -- table algebra --
    #[error("the set of axes to keep is empty")]
    EmptyKeepSet,
    #[error("target and given axes overlap")]
    OverlappingAxes,
    #[error("the two distributions have different schemas")]
    SchemaMismatch,
    #[error("divergence is infinite: mass {p_mass} at cell {cell} where the reference is zero")]
    InfiniteDivergence { cell: String, p_mass: f64 },
    #[error("mutual information requires two distinct axes")]
    SameAxis,

    // -- equalization --
    #[error("equalization is infeasible:\n{0}")]
    Infeasible(FeasibilityReport),
    #[error("scope covers every protected variable; nothing is left to equalize")]
    EmptyScopeCellSchema,
    #[error("scope variable {name:?} is not a protected variable of the schema")]
    UnknownScopeVariable { name: String },
    #[error("instance has {cells} cells; the brute-force oracle accepts at most {max}")]
    InstanceTooLarge { cells: usize, max: usize },

    // -- estimation --
    #[error("dataset has no records")]
    EmptyDataset,
    #[error("column {column:?} required by the schema is missing from the header")]
    MissingColumn { column: String },
    #[error("column {column:?} does not name a schema variable")]
    UnexpectedColumn { column: String },
    #[error("column {column:?} appears more than once in the header")]
    DuplicateColumn { column: String },
    #[error("line {line}: {value:?} is not a declared level of variable {column:?}")]
    UnknownLevel {
        line: usize,
        column: String,
        value: String,
    },
    #[error("file has no content")]
    EmptyFile,
    #[error("line {line}: expected {expected} fields, found {found}")]
    RaggedRow {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("smoothing pseudo-count must be nonnegative, got {alpha}")]
    NegativeAlpha { alpha: f64 },

    // -- synthesis --
    #[error("invalid stochastic table: {0}")]
    InvalidTable(String),

    // -- audit --
    #[error("threshold must lie in [0, 1], got {tau}")]
    InvalidThreshold { tau: f64 },
    #[error("{value:?} is not a level of the outcome variable")]
    UnknownOutcomeLevel { value: String },

    // -- text formats --
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
