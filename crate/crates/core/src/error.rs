use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// The averaging window `m+1 ..= floor(lambda*m)` is empty.
    #[error(
        "degenerate window: floor(lambda*n) = {lambda_n} <= n = {n} for lambda = {lambda}; \
         the window n+1..=floor(lambda*n) is empty (lambda must exceed 1 and n must be \
         large enough that floor(lambda*n) > n)"
    )]
    DegenerateWindow { lambda: f64, n: u32, lambda_n: i64 },

    /// A coefficient grid does not cover the requested frequency window.
    #[error(
        "coefficient grid bounds ({bound_j}, {bound_k}) do not cover the requested \
         window bounds ({need_j}, {need_k})"
    )]
    GridTooSmall {
        bound_j: u32,
        bound_k: u32,
        need_j: u32,
        need_k: u32,
    },

    /// Two sample grids with different shapes were combined.
    #[error("sample grid shapes differ: {ax}x{ay} vs {bx}x{by}")]
    ShapeMismatch {
        ax: usize,
        ay: usize,
        bx: usize,
        by: usize,
    },

    /// A text input failed to parse; `line` is 1-based.
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// The same (j, k) index appeared twice in a coefficient file.
    #[error("line {line}: duplicate coefficient index ({j}, {k})")]
    DuplicateIndex { j: i64, k: i64, line: usize },

    /// A coefficient file contained no data lines.
    #[error("empty coefficient input")]
    EmptyInput,

    /// A caller-supplied parameter is out of range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Quadrature refinement hit its resolution cap before stabilizing.
    #[error(
        "quadrature did not stabilize: value {value:e} at resolution {resolution}, \
         last doubling moved it by {delta:e} (tolerance {tol:e})"
    )]
    NoConvergence {
        value: f64,
        resolution: u32,
        delta: f64,
        tol: f64,
    },

    /// The family admits no certified reference evaluation.
    #[error("no certified reference available: {0}")]
    ReferenceUnavailable(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
