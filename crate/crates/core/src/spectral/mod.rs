//! Torus discretization, transforms, Sobolev geometry and the localization mask.

mod field;
mod grid;
mod mask;
mod norms;
mod projection;
pub mod snapshot;

pub use field::SpectralField;
pub use grid::TorusGrid;
pub use mask::{LocalizationMask, MaskProfile};
pub use norms::{gradient_norm_sq, l2_norm, l2_norm_sq, real_inner_product, sobolev_norm};
pub use projection::project_subspace;
