use thiserror::Error;

/// One step of a failed nonlinear solve, kept for diagnostics.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct TraceEntry {
    pub iteration: usize,
    pub c_o: f64,
    pub z_o: f64,
    pub mismatch: f64,
}

#[derive(Error, Debug)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("degenerate axis: 1/z_o + c_o = 0 (c_o = {c_o}, z_o = {z_o})")]
    DegenerateAxis { c_o: f64, z_o: f64 },
    #[error("axis offset {tau0} outside [0, {limit}]")]
    InvalidOffset { tau0: f64, limit: f64 },
    #[error("singularity hit at tau = {tau}: {what}")]
    SingularityHit { tau: f64, what: &'static str },
    #[error("arc length limit {limit} reached before the stop event")]
    ArcLimit { limit: f64 },
    #[error("closest approach to target is {distance}, tolerance {tolerance}")]
    TargetMissed { distance: f64, tolerance: f64 },
    #[error("tau = {tau} outside [0, {ell}]")]
    OutOfRange { tau: f64, ell: f64 },
    #[error("parameters not admissible for a tangential disc: c_o * z_o = {0} >= -1")]
    NotAdmissible(f64),
    #[error("too few samples: {got} < {need}")]
    TooFewSamples { got: usize, need: usize },
    #[error("no convergence: {reason}")]
    NoConvergence {
        reason: String,
        trace: Vec<TraceEntry>,
    },
    #[error("right-hand side singular on the axis (r = 0)")]
    AxisSingularity,
    #[error("boundary value of the axisymmetric kernel vanishes ({0:e})")]
    BoundaryValueVanishes(f64),
    #[error("grid too coarse: n = {got} < {need}")]
    GridTooCoarse { got: usize, need: usize },
    #[error("eigen solver failure: {0}")]
    SolverFailure(String),
    #[error("incomplete evidence, missing: {}", .0.join(", "))]
    IncompleteEvidence(Vec<String>),
    #[error("perturbation amplitude {0} degenerates the mesh")]
    AmplitudeTooLarge(f64),
    #[error("integrator: {0}")]
    Integrator(String),
    #[error("parse error at {context}: {message}")]
    Parse { context: String, message: String },
    #[error("usage: {0}")]
    Usage(String),
    #[error("i/o failure on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// True for failures of the numerics, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularityHit { .. }
                | Error::ArcLimit { .. }
                | Error::TargetMissed { .. }
                | Error::NoConvergence { .. }
                | Error::BoundaryValueVanishes(_)
                | Error::SolverFailure(_)
                | Error::Integrator(_)
                | Error::IncompleteEvidence(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
