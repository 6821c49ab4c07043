use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("parameters outside the admissible regime: {0}")]
    Regime(String),
    #[error("grid check failed: {0}")]
    Grid(String),
    #[error("vectors live on different grids")]
    GridMismatch,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("fit window too short: {0}")]
    Window(String),
    #[error("force field residual {residual:.3e} exceeds tolerance {tol:.1e}")]
    ForceField { residual: f64, tol: f64 },
    #[error("linear algebra failure: {0}")]
    Linalg(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
