use num_complex::Complex;

use crate::error::{CglError, Result};
use crate::scalar::Real;
use crate::spectral::SpectralField;

/// Signed combinations realizing a product of `q` factors through `q`-th powers:
/// `ζ_1···ζ_q = Σ_ε w_ε (Σ_l ε_l ζ_l)^q` with `w_ε = Π ε_l / (q! 2^q)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Polarization {
    pub q: usize,
    /// Sign pattern `ε ∈ {±1}^q` and its weight.
    pub terms: Vec<(Vec<i8>, f64)>,
}

impl Polarization {
    pub fn new(q: usize) -> Self {
        let norm = (1..=q).map(|k| k as f64).product::<f64>() * 2f64.powi(q as i32);
        let terms = (0..1usize << q)
            .map(|mask| {
                let eps: Vec<i8> = (0..q).map(|l| if mask >> l & 1 == 1 { -1 } else { 1 }).collect();
                let sign: f64 = eps.iter().map(|&e| e as f64).product();
                (eps, sign / norm)
            })
            .collect();
        Self { q, terms }
    }

    /// Evaluates the signed sum of powers on the grid (powers formed alias-free).
    pub fn reconstruct<T: Real>(&self, factors: &[SpectralField<T>]) -> Result<SpectralField<T>> {
        if factors.len() != self.q {
            return Err(CglError::InvalidParams(format!("expected {} factors, got {}", self.q, factors.len())));
        }
        let grid = factors[0].grid().clone();
        for f in factors {
            f.check_grid(&factors[0])?;
        }
        let factor = (self.q + 2) / 2;
        let samples: Vec<Vec<Complex<T>>> = factors.iter().map(|f| f.padded_physical(factor)).collect();
        let len = samples[0].len();
        let mut acc = vec![Complex::new(T::zero(), T::zero()); len];
        for (eps, w) in &self.terms {
            let w = T::of(*w);
            for (i, a) in acc.iter_mut().enumerate() {
                let s = eps
                    .iter()
                    .zip(&samples)
                    .fold(Complex::new(T::zero(), T::zero()), |acc, (&e, f)| if e > 0 { acc + f[i] } else { acc - f[i] });
                *a += s.powu(self.q as u32).scale(w);
            }
        }
        Ok(SpectralField::from_padded_physical(&grid, factor, acc))
    }
}

/// Weights for the product of `2p + 1` real fields.
pub fn polarize_product(p: u32) -> Polarization {
    Polarization::new(2 * p as usize + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::TorusGrid;

    #[test]
    fn weights_of_cubic() {
        let pol = polarize_product(1);
        assert_eq!(pol.terms.len(), 8);
        assert!((pol.terms[0].1 - 1.0 / 48.0).abs() < 1e-16);
        let ones = vec![1.0; 3];
        let sum: f64 = pol
            .terms
            .iter()
            .map(|(e, w)| w * e.iter().zip(&ones).map(|(&a, b)| a as f64 * b).sum::<f64>().powi(3))
            .sum();
        assert!((sum - 1.0).abs() < 1e-14);
    }

    #[test]
    fn reconstructs_pointwise_product() {
        let g = TorusGrid::<f64>::new(1, 32).unwrap();
        let z1 = SpectralField::from_fn(&g, |x| Complex::new(1.0 + x[0].cos(), 0.0));
        let z2 = SpectralField::from_fn(&g, |x| Complex::new((2.0 * x[0]).sin() - 0.3, 0.0));
        let z3 = SpectralField::from_fn(&g, |x| Complex::new(0.5 * (3.0 * x[0]).cos(), 0.0));
        let rec = polarize_product(1).reconstruct(&[z1.clone(), z2.clone(), z3.clone()]).unwrap();
        let prod = z1.product(&z2).unwrap().product(&z3).unwrap();
        for (a, b) in rec.physical().iter().zip(prod.physical()) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
