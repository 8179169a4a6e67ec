use thiserror::Error;

/// Errors raised anywhere in the extraction, mapping, search and optimization pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("point cloud is empty after preprocessing ({0} points left)")]
    EmptyCloud(usize),
    #[error("no traversable plane was extracted")]
    NoTraversablePlane,
    #[error("grid for plane {0} has no safe cell")]
    EmptyGrid(usize),
    #[error("singular spline system: {0}")]
    SingularSystem(String),
    #[error("no traversable plane near the start point")]
    NoPlaneNearStart,
    #[error("no traversable plane near the goal point")]
    NoPlaneNearGoal,
    #[error("goal is unreachable from start")]
    Unreachable,
    #[error("non-finite value encountered in {0}")]
    NonFiniteValue(&'static str),
    #[error("optimizer hit the iteration cap after {0} outer iterations")]
    MaxIterations(usize),
    #[error("initial trajectory is infeasible: {0}")]
    InfeasibleInit(String),
    #[error("time {t} outside trajectory domain [0, {total}]")]
    OutOfDomain { t: f64, total: f64 },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{path}: {source}")]
    File {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit status for the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) | Error::File { .. } | Error::Json(_) | Error::Parse { .. } => 2,
            Error::Unreachable | Error::NoPlaneNearStart | Error::NoPlaneNearGoal | Error::InfeasibleInit(_) => 3,
            Error::MaxIterations(_) => 4,
            Error::Config(_) => 5,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
