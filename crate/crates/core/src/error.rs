use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("field contains non-finite value at cell ({i}, {j})")]
    NonFinite { i: usize, j: usize },
    #[error("grid mismatch between fields")]
    GridMismatch,
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error("unknown case `{0}`")]
    UnknownCase(String),
    #[error("solver residual {residual:.3e} exceeds tolerance {tol:.3e} in {solver}")]
    Residual {
        solver: &'static str,
        residual: f64,
        tol: f64,
    },
    #[error("step {step}: {source}")]
    Step {
        step: u64,
        #[source]
        source: Box<Error>,
    },
    #[error("test direction is not Neumann-compatible (normal derivative ratio {0:.3e})")]
    NotNeumann(f64),
    #[error("interface crossing not found: {0}")]
    NoCrossing(&'static str),
    #[error("density is not normalized (integral {0})")]
    NotNormalized(f64),
    #[error("snapshot format: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
