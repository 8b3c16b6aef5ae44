use num_traits::Zero;

use crate::error::Result;
use crate::scalar::Real;
use crate::spectral::field::SpectralField;

/// `(u, v)_{L²} = Re ∫ u v̄ dx`, by grid quadrature.
///
/// The uniform-grid rule is exact for the band-limited fields stored here.
pub fn real_inner_product<T: Real>(u: &SpectralField<T>, v: &SpectralField<T>) -> Result<T> {
    u.check_grid(v)?;
    let a = u.physical();
    let b = v.physical();
    let sum = a.iter().zip(&b).fold(T::zero(), |acc, (x, y)| acc + (x * y.conj()).re);
    Ok(sum * u.grid().cell_volume())
}

/// `‖u‖_{H^s} = (2π)^{d/2} (Σ_k (1+|k|²)^s |û(k)|²)^{1/2}`.
pub fn sobolev_norm<T: Real>(u: &SpectralField<T>, s: T) -> T {
    weighted_sum(u, |ksq| (T::one() + ksq).powf(s)).sqrt() * u.grid().volume().sqrt()
}

/// `‖∇u‖²_{L²}`.
pub fn gradient_norm_sq<T: Real>(u: &SpectralField<T>) -> T {
    weighted_sum(u, |ksq| ksq) * u.grid().volume()
}

/// `‖u‖²_{L²}` computed from the coefficients.
pub fn l2_norm_sq<T: Real>(u: &SpectralField<T>) -> T {
    weighted_sum(u, |_| T::one()) * u.grid().volume()
}

pub fn l2_norm<T: Real>(u: &SpectralField<T>) -> T {
    l2_norm_sq(u).sqrt()
}

fn weighted_sum<T: Real>(u: &SpectralField<T>, w: impl Fn(T) -> T) -> T {
    let ksq = u.grid().ksq();
    u.coeffs()
        .iter()
        .zip(ksq)
        .filter(|(c, _)| !c.is_zero())
        .fold(T::zero(), |acc, (c, &k2)| acc + w(k2) * c.norm_sqr())
}
