use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("profile `{profile}` produced a non-finite {quantity} at rho = {rho}")]
    Evaluation {
        profile: String,
        quantity: &'static str,
        rho: f64,
    },

    /// The normal-offset chart degenerates: F(q) is outside the safe region.
    #[error("coordinate chart degenerates at rho = {rho}, q = {q} (F = {f})")]
    ChartDegenerate { rho: f64, q: f64, f: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("singular tridiagonal system (zero pivot at row {row})")]
    Singular { row: usize },

    #[error("propagation blew up at step {step} (norm {norm})")]
    Unstable { step: usize, norm: f64 },

    #[error("eigensolver did not converge after {iterations} iterations (worst residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
