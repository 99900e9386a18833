//! Singular Grönwall envelopes and early-time power-law rate fits.

mod gronwall;
mod rates;

pub use gronwall::{
    default_ab_grid, graded_mesh, gronwall_bound_check, gronwall_envelope, interpolate, Envelope, GronwallProblem,
    GronwallReport, PairCheck, K_INDEPENDENCE_TOL, MESH_CAP_DIVISOR, MESH_RATIO, MESH_START, PICARD_MAX_SWEEPS,
    PICARD_TOL,
};
pub use rates::{
    derivative_norms, derivative_rate_fit, embedding_constant_estimate, log_log_fit, smoothing_rate_fit,
    DerivativeFit, RateFit, FIT_TARGETS, LP_EXPONENT, MIN_FIT_POINTS, RATE_WINDOW, SMOOTHING_SLOPE_FLOOR,
};
