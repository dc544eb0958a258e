use thiserror::Error;

/// Errors produced by the numerical kernels and the selection loop.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix must have at least one row and one column (got {rows}x{cols})")]
    EmptyMatrix { rows: usize, cols: usize },

    #[error("expected {expected} entries for a {rows}x{cols} matrix, got {got}")]
    EntryCount {
        rows: usize,
        cols: usize,
        expected: usize,
        got: usize,
    },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("column {0} has (near) zero norm")]
    ZeroColumn(usize),

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("matrix dimension {dim} exceeds the eigensolver cap {cap}")]
    TooLarge { dim: usize, cap: usize },

    #[error("Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal {off:e})")]
    NoConvergence { sweeps: usize, off: f64 },

    #[error("secular function evaluated at pole {pole}")]
    PoleEvaluation { pole: f64 },

    #[error("could not bracket secular root {index} after {steps} expansion steps")]
    BracketFailure { index: usize, steps: usize },

    #[error("root {root} collides with pole {pole}")]
    DegenerateRoot { root: f64, pole: f64 },

    #[error("envelope index k = {k} exceeds step r = {r}")]
    IndexOrder { k: usize, r: usize },

    #[error("epsilon must be in (0,1), got {0}")]
    InvalidEpsilon(f64),

    #[error("selection budget is empty: need at least 2 columns, got {p}")]
    BudgetTooSmall { p: usize },

    #[error("no candidate columns remain")]
    Exhausted,

    #[error("column {index} has norm {norm}, expected 1 (enable auto-normalization to rescale)")]
    ColumnNormViolation { index: usize, norm: f64 },

    #[error("bad generator spec: {0}")]
    BadSpec(String),

    #[error("bad arguments: {0}")]
    BadArguments(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
