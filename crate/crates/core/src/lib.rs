//! Globally modified Navier-Stokes equations on the periodic 3-torus:
//! pseudo-spectral simulation plus the numerical checks that go with it
//! (taper inequalities, energy accounting, absorbing ball, attractor
//! sampling under a weak metric, singular Grönwall envelopes and smoothing
//! rates).

pub mod error;
pub mod spectral;

pub use error::{Error, Result};
pub use spectral::{Grid, SpectralField};
pub mod integrator;
pub mod rhs;
pub mod attractor;
pub mod analysis;
