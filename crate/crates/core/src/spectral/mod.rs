//! Truncated Fourier representation of solenoidal fields on the 2π-periodic
//! 3-torus.

mod field;
mod grid;
mod ops;
pub mod random;
pub mod snapshot;
mod transform;

pub use field::{Mode, SpectralField};
pub use grid::{Grid, Wavevector};
pub use ops::{
    advective_pairing, fractional_norm, inner_product, l4_norm, leray_project, norm_h, norm_v,
    tensor_divergence, tensor_pairing, velocity_gradient, DIVERGENCE_TOL,
};
pub(crate) use ops::{scaled_tensor_difference_l2, tensor_divergence_physical};
pub use transform::{scalar_to_physical, scalar_to_spectral, to_physical, PhysicalField};
