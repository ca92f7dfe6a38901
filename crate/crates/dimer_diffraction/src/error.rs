use thiserror::Error;

#[derive(Debug, Error)]
pub enum PotentialError {
    #[error("tabulated potential needs at least two points, got {0}")]
    TooFewPoints(usize),
    #[error("tabulated radii must be strictly increasing (row {row})")]
    NonMonotonicRadii { row: usize },
    #[error("tabulated potential does not vanish at the grid end: |V({r})| = {v} exceeds 1e-6 of max |V|")]
    NonVanishingTail { r: f64, v: f64 },
    #[error("malformed potential table at line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("Lennard-Jones parameters must be positive: epsilon = {epsilon}, sigma = {sigma}")]
    BadLennardJones { epsilon: f64, sigma: f64 },
    #[error("tabulated value is not finite at row {row}")]
    NonFinite { row: usize },
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("eigenvalue bisection for l = {l} did not converge after {iterations} iterations (bracket [{e_low}, {e_high}] meV)")]
    NonConvergence {
        l: u32,
        iterations: usize,
        e_low: f64,
        e_high: f64,
    },
    #[error("reduced mass must be positive, got {0} amu")]
    NonPositiveMass(f64),
    #[error(transparent)]
    Potential(#[from] PotentialError),
}

#[derive(Debug, Error)]
pub enum StateError {
    #[error("no bound state with l = {l}")]
    UnknownState { l: u32 },
    #[error("|m| = {m} exceeds l = {l}")]
    BadOrientation { l: u32, m: i32 },
}

#[derive(Debug, Error)]
pub enum GratingError {
    #[error("invalid grating geometry: {0}")]
    BadGeometry(String),
    #[error("coordinate y = {y} nm lies outside the open interval [{lo}, {hi}] nm")]
    OutsideOpenInterval { y: f64, lo: f64, hi: f64 },
    #[error("slit fully shadowed at this incidence angle")]
    FullyShadowed,
}

#[derive(Debug, Error)]
pub enum KinematicsError {
    #[error("channel closed: transition energy {delta_e} meV exceeds kinetic energy {kinetic} meV")]
    ClosedChannel { delta_e: f64, kinetic: f64 },
    #[error("order n = {n} is evanescent: |sin theta| = {sin_theta} > 1")]
    EvanescentOrder { n: i32, sin_theta: f64 },
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
    #[error("quadrature spec invalid: {0}")]
    BadQuadrature(String),
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot parse config: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Potential(#[from] PotentialError),
}
