use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid size {0}: need an even number of points, at least 4")]
    InvalidGrid(usize),

    #[error("fields live on different grids (n = {0} vs n = {1})")]
    GridMismatch(usize, usize),

    #[error("field is not divergence free: max |k.u(k)| / |u(k)| = {0:e}")]
    NotDivergenceFree(f64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("time step {dt} violates the advective bound {limit} (max |u| = {max_u})")]
    Cfl { dt: f64, limit: f64, max_u: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("empty attractor cloud")]
    EmptyCloud,

    #[error("sample outside the absorbing ball: |u|_H^2 = {norm2} > {bound} at t = {time}")]
    OutsideAbsorbingBall { norm2: f64, bound: f64, time: f64 },

    #[error("iteration did not converge after {0} sweeps")]
    NoConvergence(usize),

    #[error("snapshot format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
