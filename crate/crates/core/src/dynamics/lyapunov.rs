use crate::dynamics::params::CglParams;
use crate::scalar::Real;
use crate::spectral::{gradient_norm_sq, SpectralField};

/// `ℋ(u) = ∫ (½|∇u|² + c/(2p+2) |u|^{2p+2}) dx`.
///
/// The potential integral is evaluated on the padded grid, where the
/// degree-`2p+2` integrand is resolved exactly.
pub fn lyapunov<T: Real>(u: &SpectralField<T>, params: &CglParams<T>) -> T {
    let grad = gradient_norm_sq(u) * T::of(0.5);
    let factor = params.p as usize + 2;
    let samples = u.padded_physical(factor);
    let e = params.p as i32 + 1;
    let mean = samples.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr().powi(e)) / T::of_usize(samples.len());
    let potential = mean * u.grid().volume() * params.c / T::of((2 * params.p + 2) as f64);
    grad + potential
}
