use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("norm exponent must lie in [1, inf], got {0}")]
    InvalidExponent(f64),

    #[error("invalid noise specification: {0}")]
    InvalidNoise(String),

    #[error("invalid velocity specification: {0}")]
    InvalidVelocity(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(
        "time step dt = {dt} exceeds the stability limit {limit} (= {c_stab} * h^2 with h = {h}); \
         reduce dt, refine less, or set cfl_override = true"
    )]
    StabilityGate { dt: f64, h: f64, c_stab: f64, limit: f64 },

    #[error("step {step}: projection at node {node} with |m| = {norm:e} (numerical instability)")]
    DegenerateProjection { step: usize, node: usize, norm: f64 },

    #[error("step {step}: non-finite value in state")]
    NonFinite { step: usize },

    #[error("input is not on the unit sphere: |m| = {norm} at node {node}")]
    NotOnSphere { node: usize, norm: f64 },

    #[error("i/o error: {0}")]
    Io(String),

    #[error("study levels are not nested: {0}")]
    NotNested(String),
}

pub type Result<T> = std::result::Result<T, Error>;
