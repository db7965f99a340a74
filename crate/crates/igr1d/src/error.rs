use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("invalid measure: {0}")]
    Measure(String),

    #[error("invalid linear data: {0}")]
    Data(String),

    #[error("invalid parameters: {0}")]
    Params(String),

    #[error("invalid map: {0}")]
    Map(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("nonpositive pivot {pivot} at row {row}: system is not SPD")]
    NonSpdPivot { row: usize, pivot: f64 },

    #[error("nonpositive weight {value} at index {index}")]
    NonPositiveWeight { index: usize, value: f64 },

    #[error("Newton solve did not converge within {max_iter} iterations (grad norm {grad_norm:.3e}, t = {t})")]
    MaxIterations {
        max_iter: usize,
        grad_norm: f64,
        t: f64,
    },

    #[error("line search failed at iteration {iteration} (grad norm {grad_norm:.3e})")]
    LineSearchFailure { iteration: usize, grad_norm: f64 },

    #[error(
        "shooting bracket failure: gap({c_lo}) = {gap_lo:.3e}, gap({c_hi}) = {gap_hi:.3e} have the same sign"
    )]
    BracketFailure {
        c_lo: f64,
        gap_lo: f64,
        c_hi: f64,
        gap_hi: f64,
    },

    #[error("shooting did not reach |phi(b) - b| <= {tol:.3e}: best gap {gap:.3e} at c = {c}")]
    ShootingTolerance { tol: f64, gap: f64, c: f64 },

    #[error(
        "derivative bound violated in cell {cell}: d phi = {derivative:.6e} < bound {bound:.6e}"
    )]
    BoundViolation {
        cell: usize,
        derivative: f64,
        bound: f64,
    },

    #[error("solve failed at t = {t}: {source}")]
    AtTime {
        t: f64,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
