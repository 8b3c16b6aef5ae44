#![allow(dead_code)]

use cgl_core::spectral::{SpectralField, TorusGrid};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random smooth field: coefficients on `|k_i| <= kmax` with `1/(1+|k|²)` decay.
pub fn random_field(grid: &TorusGrid<f64>, kmax: i64, rng: &mut ChaCha8Rng) -> SpectralField<f64> {
    let mut u = SpectralField::zeros(grid);
    for (flat, k) in grid.modes() {
        let _ = flat;
        if k.iter().all(|x| x.abs() <= kmax) {
            let k2: i64 = k.iter().map(|x| x * x).sum();
            let a = Complex::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5) / (1.0 + k2 as f64);
            u.set_coeff(&k, a).unwrap();
        }
    }
    u
}

/// Random real-valued field.
pub fn random_real_field(grid: &TorusGrid<f64>, kmax: i64, rng: &mut ChaCha8Rng) -> SpectralField<f64> {
    random_field(grid, kmax, rng).real_part()
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

pub fn field_diff(a: &SpectralField<f64>, b: &SpectralField<f64>) -> f64 {
    cgl_core::spectral::l2_norm(&(a - b))
}
