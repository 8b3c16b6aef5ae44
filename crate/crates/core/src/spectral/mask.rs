use std::f64::consts::PI;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{CglError, Result};
use crate::scalar::Real;
use crate::spectral::field::SpectralField;
use crate::spectral::grid::TorusGrid;

/// Shape of the spatial localization function χ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MaskProfile {
    /// χ ≡ max on the whole torus.
    Constant { max: f64 },
    /// Product of one-dimensional smoothed plateau indicators. The plateau in
    /// dimension `i` is `[lower[i], upper[i]]` (taken modulo 2π) and χ decays
    /// to zero over `width` on either side.
    Box { lower: Vec<f64>, upper: Vec<f64>, width: f64, max: f64 },
}

impl MaskProfile {
    pub fn constant() -> Self {
        MaskProfile::Constant { max: 1.0 }
    }

    /// One interval repeated in every dimension.
    pub fn interval(d: usize, lower: f64, upper: f64, width: f64) -> Self {
        MaskProfile::Box { lower: vec![lower; d], upper: vec![upper; d], width, max: 1.0 }
    }
}

/// Smooth nonnegative χ together with its discrete plateau Λ and interior 𝒪.
#[derive(Clone, Debug)]
pub struct LocalizationMask<T: Real> {
    chi: SpectralField<T>,
    samples: Vec<T>,
    max: T,
    plateau: Vec<bool>,
    interior: Vec<bool>,
    constant: bool,
}

impl<T: Real> LocalizationMask<T> {
    pub fn new(grid: &TorusGrid<T>, profile: &MaskProfile) -> Result<Self> {
        match profile {
            MaskProfile::Constant { max } => {
                if !(*max > 0.0) {
                    return Err(CglError::InvalidParams("mask max must be positive".into()));
                }
                let samples = vec![T::of(*max); grid.len()];
                Self::from_samples(grid, samples, T::of(*max), true)
            }
            MaskProfile::Box { lower, upper, width, max } => {
                let d = grid.dim();
                if lower.len() != d || upper.len() != d {
                    return Err(CglError::InvalidParams(format!("mask box needs {d} bounds per side")));
                }
                if !(*width > 0.0) || !(*max > 0.0) {
                    return Err(CglError::InvalidParams("mask width and max must be positive".into()));
                }
                let samples = (0..grid.len())
                    .map(|flat| {
                        let x = grid.point(flat);
                        let v = (0..d).fold(1.0, |acc, i| {
                            acc * plateau_profile(x[i].as_f64(), lower[i], upper[i], *width)
                        });
                        T::of(max * v)
                    })
                    .collect();
                Self::from_samples(grid, samples, T::of(*max), false)
            }
        }
    }

    fn from_samples(grid: &TorusGrid<T>, samples: Vec<T>, max: T, constant: bool) -> Result<Self> {
        let plateau: Vec<bool> = samples.iter().map(|&v| v >= max).collect();
        if !plateau.iter().any(|&p| p) {
            return Err(CglError::EmptyPlateau);
        }
        let d = grid.dim();
        let interior = (0..grid.len())
            .map(|flat| {
                if !plateau[flat] {
                    return false;
                }
                let idx: Vec<i64> = grid.point_index(flat).into_iter().map(|i| i as i64).collect();
                (0..d).all(|axis| {
                    [-1i64, 1].iter().all(|&step| {
                        let mut nb = idx.clone();
                        nb[axis] += step;
                        plateau[grid.point_flat(&nb)]
                    })
                })
            })
            .collect();
        let chi = SpectralField::from_real_samples(grid, &samples)?;
        Ok(Self { chi, samples, max, plateau, interior, constant })
    }

    pub fn chi(&self) -> &SpectralField<T> {
        &self.chi
    }

    pub fn grid(&self) -> &TorusGrid<T> {
        self.chi.grid()
    }

    /// Raw grid samples of χ.
    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn max(&self) -> T {
        self.max
    }

    pub fn is_constant(&self) -> bool {
        self.constant
    }

    pub fn plateau(&self) -> &[bool] {
        &self.plateau
    }

    pub fn interior(&self) -> &[bool] {
        &self.interior
    }

    pub fn interior_count(&self) -> usize {
        self.interior.iter().filter(|&&b| b).count()
    }

    /// Rescaled copy with maximum 1.
    pub fn normalized(&self) -> Self {
        let inv = T::one() / self.max;
        let samples: Vec<T> = self.samples.iter().map(|&v| v * inv).collect();
        Self {
            chi: self.chi.scale(inv),
            samples,
            max: T::one(),
            plateau: self.plateau.clone(),
            interior: self.interior.clone(),
            constant: self.constant,
        }
    }

    /// `χ · u`; the identity when χ ≡ 1.
    pub fn apply(&self, u: &SpectralField<T>) -> Result<SpectralField<T>> {
        if self.constant {
            return Ok(u.scale(self.max));
        }
        self.chi.product(u)
    }

    /// `χ^power · u`, with the power formed from the grid samples.
    pub fn apply_power(&self, u: &SpectralField<T>, power: u32) -> Result<SpectralField<T>> {
        if self.constant {
            return Ok(u.scale(self.max.powi(power as i32)));
        }
        let pw: Vec<T> = self.samples.iter().map(|&v| v.powi(power as i32)).collect();
        let chi_p = SpectralField::from_real_samples(self.grid(), &pw)?;
        chi_p.product(u)
    }

    /// L² norm of `u` restricted to the discrete interior 𝒪 (`inside = true`) or its complement.
    pub fn restricted_l2(&self, u: &SpectralField<T>, inside: bool) -> T {
        let phys = u.physical();
        let s = phys
            .iter()
            .zip(&self.interior)
            .filter(|(_, &o)| o == inside)
            .fold(T::zero(), |acc, (c, _)| acc + c.norm_sqr());
        (s * self.grid().cell_volume()).sqrt()
    }

    /// `𝟙_𝒪 · u` sampled on the grid (not band-limited, so only the samples are meaningful).
    pub fn restrict_samples(&self, u: &SpectralField<T>) -> Vec<Complex<T>> {
        u.physical()
            .into_iter()
            .zip(&self.interior)
            .map(|(c, &o)| if o { c } else { Complex::new(T::zero(), T::zero()) })
            .collect()
    }

    /// Relative L² weight of χ's spectrum on modes with some `|k_i|` above half the box.
    pub fn spectral_tail(&self) -> T {
        let grid = self.grid();
        let half = grid.max_mode() / 2;
        let mut tail = T::zero();
        let mut total = T::zero();
        for (flat, k) in grid.modes() {
            let w = self.chi.coeffs()[flat].norm_sqr();
            total = total + w;
            if k.iter().any(|ki| ki.abs() > half) {
                tail = tail + w;
            }
        }
        if total == T::zero() {
            T::zero()
        } else {
            (tail / total).sqrt()
        }
    }
}

/// `C^∞` transition from 0 (t <= 0) to 1 (t >= 1).
pub(crate) fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let f = |s: f64| if s > 0.0 { (-1.0 / s).exp() } else { 0.0 };
    let a = f(t);
    a / (a + f(1.0 - t))
}

/// Indicator of `[lower, upper]` (mod 2π) mollified over `width`.
///
/// Equals the convolution of the indicator of `[lower - width/2, upper + width/2]`
/// with the compactly supported kernel whose distribution function is `smooth_step`.
fn plateau_profile(x: f64, lower: f64, upper: f64, width: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut dist = f64::INFINITY;
    for shift in [-two_pi, 0.0, two_pi] {
        let y = x + shift;
        let dd = if y < lower {
            lower - y
        } else if y > upper {
            y - upper
        } else {
            0.0
        };
        dist = dist.min(dd);
    }
    if dist == 0.0 {
        1.0
    } else {
        smooth_step(1.0 - dist / width)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_mask_covers_torus() {
        let g = TorusGrid::<f64>::new(2, 8).unwrap();
        let m = LocalizationMask::new(&g, &MaskProfile::constant()).unwrap();
        assert!(m.plateau().iter().all(|&b| b));
        assert!(m.interior().iter().all(|&b| b));
        assert_eq!(m.max(), 1.0);
    }

    #[test]
    fn interval_interior_by_neighbor_test() {
        let g = TorusGrid::<f64>::new(1, 64).unwrap();
        let m = LocalizationMask::new(&g, &MaskProfile::interval(1, PI / 2.0, 1.5 * PI, 0.3)).unwrap();
        let h = 2.0 * PI / 64.0;
        // Oracle: plateau = grid points inside [π/2, 3π/2]; interior = those whose
        // left and right neighbours are plateau points too.
        let inside = |i: i64| {
            let x = (i.rem_euclid(64)) as f64 * h;
            x >= PI / 2.0 - 1e-12 && x <= 1.5 * PI + 1e-12
        };
        for i in 0..64i64 {
            assert_eq!(m.plateau()[i as usize], inside(i), "plateau at {i}");
            let interior = inside(i) && inside(i - 1) && inside(i + 1);
            assert_eq!(m.interior()[i as usize], interior, "interior at {i}");
            if m.interior()[i as usize] {
                assert!(m.plateau()[i as usize]);
            }
        }
        assert!(m.interior_count() > 0 && m.interior_count() < m.plateau().iter().filter(|&&b| b).count());
        for &v in m.samples() {
            assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn narrow_plateau_rejected() {
        let g = TorusGrid::<f64>::new(1, 16).unwrap();
        let h = 2.0 * PI / 16.0;
        let p = MaskProfile::interval(1, 0.3 * h, 0.7 * h, 0.5);
        assert!(matches!(LocalizationMask::new(&g, &p), Err(CglError::EmptyPlateau)));
    }

    #[test]
    fn smooth_step_is_monotone_and_bounded() {
        let mut prev = 0.0;
        for i in 0..=100 {
            let v = smooth_step(i as f64 / 100.0);
            assert!(v >= prev && v <= 1.0);
            prev = v;
        }
        assert_eq!(smooth_step(1.0), 1.0);
        assert_eq!(smooth_step(0.0), 0.0);
    }
}
