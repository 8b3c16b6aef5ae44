use num_complex::Complex;
use num_traits::Zero;

use crate::error::{CglError, Result};
use crate::saturation::FrequencySet;
use crate::scalar::Real;
use crate::spectral::field::SpectralField;

/// Orthogonal projection `P_H` onto `H(I)`: keeps the coefficients at `±I`.
pub fn project_subspace<T: Real>(u: &SpectralField<T>, set: &FrequencySet) -> Result<SpectralField<T>> {
    let grid = u.grid();
    if set.dim() != grid.dim() {
        return Err(CglError::InvalidFrequencySet("dimension differs from grid".into()));
    }
    if let Some(bad) = set.iter().find(|k| !grid.contains_mode(k)) {
        return Err(CglError::FrequencyOutOfBox(bad.clone()));
    }
    let keep = set.signed();
    Ok(u.map_coeffs(|flat, c| if keep.contains(&grid.mode_of(flat)) { c } else { Complex::zero() }))
}
