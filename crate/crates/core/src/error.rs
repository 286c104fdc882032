use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("operation needs at least {needed} vertices, graph has {got}")]
    TooFewVertices { needed: usize, got: usize },

    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),

    #[error("vertex {vertex} out of range for graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("unachievable target mean degree {target} (achievable range is (0, {max}])")]
    UnachievableTarget { target: f64, max: f64 },

    #[error("dense-graph infeasible: beta*|E| = {required} exceeds |E^c| = {available}")]
    DenseInfeasible { required: f64, available: f64 },

    #[error("edge-unbiasedness (alpha*|E^c| = beta*|E|) does not hold")]
    NotEdgeUnbiased,

    #[error("need at least {needed} replicates, got {got}")]
    TooFewReplicates { needed: usize, got: usize },

    #[error("replicates disagree on vertex count ({expected} vs {got})")]
    VertexCountMismatch { expected: usize, got: usize },

    #[error("fixed-point iteration did not converge after {iterations} iterations")]
    Divergence { iterations: usize },

    #[error("singular iterate: {0}")]
    SingularIterate(String),

    #[error("estimates left the parameter space: alpha={alpha}, beta={beta}, delta={delta}")]
    InvalidRegion { alpha: f64, beta: f64, delta: f64 },

    #[error("estimated k3 = 1 - alpha - beta = {0} is not positive")]
    NonPositiveK3(f64),

    #[error("degenerate density: estimated edge density {0} is not positive")]
    DegenerateDensity(f64),

    #[error("negative variance {0}")]
    NegativeVariance(f64),

    #[error("{path}:{line}: parse error: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("replicates share no vertex labels")]
    EmptyIntersection,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}

pub(crate) fn check_probability(name: &str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} = {value} is not in [0, 1]")))
    }
}
