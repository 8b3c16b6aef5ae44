//! Numerical laboratory for the complex Ginzburg–Landau equation
//! `∂_t u − (ν+i)Δu + γu + ic|u|^{2p}u = h + χη` on the torus, with forces
//! localized in physical space by a bump χ and in Fourier space by a finite
//! trigonometric subspace.
//!
//! Fields, solvers and noise are generic over the scalar type ([`Real`], i.e.
//! `f32` or `f64`); the aliases at the crate root fix `f64`, which every
//! experiment in the crate uses.

// `!(x > 0)` also rejects NaN, which is the point of every such check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod linearized;
pub mod mixing;
pub mod noise;
pub mod saturation;
pub mod scalar;
pub mod spectral;
pub mod synthesis;

pub use error::{CglError, Result};
pub use scalar::Real;

pub type Grid = spectral::TorusGrid<f64>;
pub type Field = spectral::SpectralField<f64>;
pub type Mask = spectral::LocalizationMask<f64>;
pub type Grid32 = spectral::TorusGrid<f32>;
pub type Field32 = spectral::SpectralField<f32>;
pub type Params = dynamics::CglParams<f64>;
pub type Config = dynamics::SolverConfig<f64>;
