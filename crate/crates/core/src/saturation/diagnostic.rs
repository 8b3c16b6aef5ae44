use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use serde::Serialize;

use crate::error::{CglError, Result};
use crate::linalg::lstsq;
use crate::saturation::chain::{chain_linear_clipped, chain_nonlinear_clipped, trig_basis, ChainKind};
use crate::saturation::freq::FrequencySet;
use crate::scalar::Real;
use crate::spectral::{LocalizationMask, SpectralField};

/// Residual level below which a chain counts as saturating for the probes.
pub const SATURATION_THRESHOLD: f64 = 0.05;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelResidual {
    pub level: usize,
    pub frequencies: usize,
    pub basis_size: usize,
    pub max_residual: f64,
    pub mean_residual: f64,
    /// Relative L²(𝒪) residual per probe, in probe order.
    pub residuals: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SaturationReport {
    pub kind: ChainKind,
    pub interior_points: usize,
    pub probes: Vec<String>,
    pub levels: Vec<LevelResidual>,
    /// Maximal residuals never increase from one level to the next.
    pub monotone: bool,
    /// Monotone and the last maximal residual is below [`SATURATION_THRESHOLD`].
    pub decaying: bool,
}

impl SaturationReport {
    /// First level whose maximal residual is below `tol`.
    pub fn first_level_below(&self, tol: f64) -> Option<usize> {
        self.levels.iter().find(|l| l.max_residual < tol).map(|l| l.level)
    }
}

/// Single modes of low order and smooth bumps centred inside 𝒪.
pub fn default_probes<T: Real>(mask: &LocalizationMask<T>) -> Vec<(String, SpectralField<T>)> {
    let grid = mask.grid();
    let d = grid.dim();
    let mut freqs: Vec<Vec<i64>> = (0..d)
        .map(|i| {
            let mut e = vec![0; d];
            e[i] = 1;
            e
        })
        .collect();
    let mut two = vec![0; d];
    two[0] = 2;
    freqs.push(two);
    if d >= 2 {
        let mut e = vec![0; d];
        e[0] = 1;
        e[1] = 1;
        freqs.push(e);
    }
    let mut probes = Vec::new();
    for l in freqs.iter().filter(|l| grid.contains_mode(l)) {
        probes.push((format!("cos{l:?}"), SpectralField::cos_mode(grid, l).expect("in box")));
        probes.push((format!("sin{l:?}"), SpectralField::sin_mode(grid, l).expect("in box")));
    }
    let inside: Vec<usize> = (0..grid.len()).filter(|&i| mask.interior()[i]).collect();
    if !inside.is_empty() {
        let sigma = (2.0 * grid.spacing().as_f64()).max(0.5);
        let mut centres = vec![inside[0], inside[inside.len() / 2], inside[inside.len() - 1]];
        centres.dedup();
        for c in centres {
            let x0: Vec<f64> = grid.point(c).iter().map(|v| v.as_f64()).collect();
            let bump = SpectralField::from_fn(grid, |x| {
                let r2: f64 = x
                    .iter()
                    .zip(&x0)
                    .map(|(a, b)| {
                        let t = (a.as_f64() - b).rem_euclid(2.0 * std::f64::consts::PI);
                        let t = t.min(2.0 * std::f64::consts::PI - t);
                        t * t
                    })
                    .sum();
                Complex::new(T::of((-r2 / (2.0 * sigma * sigma)).exp()), T::zero())
            });
            probes.push((format!("bump@{x0:.3?}"), bump));
        }
    }
    probes
}

/// Per-level least-squares residuals of the default probes on 𝒪.
pub fn saturation_diagnostic<T: Real>(
    base: &FrequencySet,
    mask: &LocalizationMask<T>,
    j_max: usize,
    kind: ChainKind,
) -> Result<SaturationReport> {
    let probes = default_probes(mask);
    saturation_diagnostic_with_probes(base, mask, j_max, kind, &probes)
}

/// Projects each probe, restricted to the interior 𝒪, onto the span of each
/// chain level restricted to 𝒪. Levels are clipped to the grid's mode box.
pub fn saturation_diagnostic_with_probes<T: Real>(
    base: &FrequencySet,
    mask: &LocalizationMask<T>,
    j_max: usize,
    kind: ChainKind,
    probes: &[(String, SpectralField<T>)],
) -> Result<SaturationReport> {
    let grid = mask.grid();
    let inside: Vec<usize> = (0..grid.len()).filter(|&i| mask.interior()[i]).collect();
    if inside.is_empty() {
        return Err(CglError::EmptyInterior);
    }
    let bound = Some(grid.max_mode());
    let chain = match kind {
        ChainKind::Linear => chain_linear_clipped(base, j_max, bound)?,
        ChainKind::Nonlinear { p } => chain_nonlinear_clipped(base, j_max, p, bound)?,
    };
    // probe samples on 𝒪, real and imaginary parts as separate right-hand sides
    let rhs: Vec<(DVector<f64>, DVector<f64>)> = probes
        .iter()
        .map(|(_, f)| {
            let phys = f.physical();
            let re = DVector::from_iterator(inside.len(), inside.iter().map(|&i| phys[i].re.as_f64()));
            let im = DVector::from_iterator(inside.len(), inside.iter().map(|&i| phys[i].im.as_f64()));
            (re, im)
        })
        .collect();
    let mut levels = Vec::with_capacity(chain.levels.len());
    for (j, level) in chain.levels.iter().enumerate() {
        let basis = trig_basis(grid, level, true)?;
        let mut a = DMatrix::zeros(inside.len(), basis.len());
        for (col, f) in basis.iter().enumerate() {
            let phys = f.physical();
            for (row, &i) in inside.iter().enumerate() {
                a[(row, col)] = phys[i].re.as_f64();
            }
        }
        let residuals: Vec<f64> = rhs
            .iter()
            .map(|(re, im)| {
                let total = (re.norm_squared() + im.norm_squared()).sqrt();
                if total == 0.0 {
                    return 0.0;
                }
                let (_, r1) = lstsq(&a, re, 0.0);
                let (_, r2) = lstsq(&a, im, 0.0);
                ((r1 * re.norm()).powi(2) + (r2 * im.norm()).powi(2)).sqrt() / total
            })
            .collect();
        let max_residual = residuals.iter().copied().fold(0.0, f64::max);
        let mean_residual = if residuals.is_empty() { 0.0 } else { residuals.iter().sum::<f64>() / residuals.len() as f64 };
        levels.push(LevelResidual {
            level: j,
            frequencies: level.len(),
            basis_size: basis.len(),
            max_residual,
            mean_residual,
            residuals,
        });
    }
    let monotone = levels.windows(2).all(|w| w[1].max_residual <= w[0].max_residual + 1e-9);
    let last = levels.last().map_or(1.0, |l| l.max_residual);
    Ok(SaturationReport {
        kind,
        interior_points: inside.len(),
        probes: probes.iter().map(|(n, _)| n.clone()).collect(),
        levels,
        monotone,
        decaying: monotone && last < SATURATION_THRESHOLD,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{MaskProfile, TorusGrid};

    #[test]
    fn probe_in_base_span_has_zero_residual() {
        let g = TorusGrid::<f64>::new(1, 32).unwrap();
        let mask = LocalizationMask::new(&g, &MaskProfile::interval(1, 1.0, 5.0, 0.5)).unwrap();
        let base = FrequencySet::new(1, [[0], [1]]).unwrap();
        let probe = SpectralField::cos_mode(&g, &[1]).unwrap();
        let r = saturation_diagnostic_with_probes(&base, &mask, 0, ChainKind::Linear, &[("cos".into(), probe)]).unwrap();
        assert!(r.levels[0].max_residual < 1e-12);
    }

    #[test]
    fn non_generator_misses_odd_modes_on_whole_torus() {
        let g = TorusGrid::<f64>::new(1, 32).unwrap();
        let mask = LocalizationMask::new(&g, &MaskProfile::constant()).unwrap();
        let base = FrequencySet::new(1, [[0], [2]]).unwrap();
        let probe = SpectralField::cos_mode(&g, &[1]).unwrap();
        let r = saturation_diagnostic_with_probes(&base, &mask, 4, ChainKind::Linear, &[("cos1".into(), probe)]).unwrap();
        assert!(r.levels.iter().all(|l| (l.max_residual - 1.0).abs() < 1e-10));
        assert!(!r.decaying);
    }
}
