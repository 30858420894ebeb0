use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("lower unitriangular matrix needs rows >= cols, got {rows}x{cols}")]
    NotTall { rows: usize, cols: usize },

    #[error("row {row} has {found} columns, expected {expected}")]
    RaggedRows {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("invalid matrix character {found:?} in row {row}")]
    InvalidMatrixText { row: usize, found: char },

    #[error("precision {precision} must satisfy m = {m} <= precision <= 64")]
    InvalidPrecision { precision: usize, m: usize },

    #[error("need direction numbers for dimension {needed}, only {available} dimensions available")]
    MissingDirectionNumbers { needed: usize, available: usize },

    #[error("invalid direction-number record for dimension {dimension}: {reason}")]
    InvalidDirectionRecord {
        dimension: usize,
        reason: &'static str,
    },

    #[error("generator matrix {dimension} is singular on its first {m} rows")]
    SingularGenerator { dimension: usize, m: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),

    #[error("enumeration budget exceeded: {required} items, limit {limit}")]
    BudgetExceeded { required: u128, limit: u128 },

    #[error("bound violated for s = {s}, N = {n}: {which}")]
    BoundViolated {
        s: usize,
        n: usize,
        which: &'static str,
    },
}

pub type Result<T> = core::result::Result<T, Error>;
