use crate::error::{CglError, Result};
use crate::scalar::Real;
use crate::spectral::SpectralField;

/// Minimal real vector-space interface for [`series_h4`].
pub trait VectorSpace: Clone {
    fn zero_like(&self) -> Self;
    /// `self += a · x`.
    fn add_scaled(&mut self, a: f64, x: &Self);
}

impl VectorSpace for Vec<f64> {
    fn zero_like(&self) -> Self {
        vec![0.0; self.len()]
    }

    fn add_scaled(&mut self, a: f64, x: &Self) {
        for (s, v) in self.iter_mut().zip(x) {
            *s += a * v;
        }
    }
}

impl<T: Real> VectorSpace for SpectralField<T> {
    fn zero_like(&self) -> Self {
        SpectralField::zeros(self.grid())
    }

    fn add_scaled(&mut self, a: f64, x: &Self) {
        self.axpy(T::of(a), x);
    }
}

/// `Σ_j b_j ξ_j e_j` for positive `b_j`, `|ξ_j| <= 1` and a nonempty basis list.
pub fn series_h4<E: VectorSpace>(b: &[f64], basis: &[E], xi: &[f64]) -> Result<E> {
    if basis.is_empty() || b.len() != basis.len() || xi.len() != basis.len() {
        return Err(CglError::InvalidParams("series needs equally many amplitudes, basis elements and scalars".into()));
    }
    if let Some(&bad) = b.iter().find(|&&x| !(x > 0.0)) {
        return Err(CglError::AmplitudeNonPositive(bad));
    }
    if let Some(&bad) = xi.iter().find(|x| !(x.abs() <= 1.0)) {
        return Err(CglError::InvalidParams(format!("scalar {bad} outside [-1, 1]")));
    }
    let mut out = basis[0].zero_like();
    for ((bj, e), x) in b.iter().zip(basis).zip(xi) {
        out.add_scaled(bj * x, e);
    }
    Ok(out)
}
