use dnnsplit_linprog::LpError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
    #[error("malformed layered path: {0}")]
    MalformedPath(String),
    #[error("no connected geometric graph after {attempts} attempts")]
    GenerationFailed { attempts: usize },
    #[error("node {node} has zero compute rate")]
    ZeroRate { node: usize },
    #[error("unknown model {0:?}")]
    UnknownModel(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("job {job} cannot reach its destination through any compute node")]
    InfeasibleTopology { job: usize },
    #[error("solution is fractional at variable {var} (value {value})")]
    FractionalSolution { var: usize, value: f64 },
    #[error("instance exceeds brute-force limits: {0}")]
    SizeLimit(String),
    #[error("solver did not finish: {0}")]
    SolverStatus(String),
    #[error("unknown policy {0:?}")]
    UnknownPolicy(String),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
