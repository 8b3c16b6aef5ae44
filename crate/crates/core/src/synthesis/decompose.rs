use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::dynamics::{nonlinearity, CglParams};
use crate::error::{CglError, Result};
use crate::linalg::lstsq;
use crate::saturation::{trig_basis, SaturationChain};
use crate::spectral::{l2_norm, project_subspace, SpectralField};

/// Relative residual accepted for `η ≈ Σ B(ζ_i)`.
pub const DECOMPOSITION_TOLERANCE: f64 = 1e-8;

/// `η = Σ B(ζ_i)` with every `ζ_i` in the complex span of the previous chain level.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub zetas: Vec<SpectralField<f64>>,
    /// `‖Σ B(ζ_i) − η‖ / ‖η‖`.
    pub residual: f64,
    pub dictionary_size: usize,
}

/// Sign combinations `Σ ε_j e_j` over subsets of at most `q` basis elements,
/// with the first sign fixed (B is odd, so the opposite pattern adds nothing).
fn dictionary(basis: &[SpectralField<f64>], q: usize) -> Vec<SpectralField<f64>> {
    let m = basis.len();
    let mut out = Vec::new();
    let mut subset = Vec::new();
    fn walk(
        start: usize,
        m: usize,
        q: usize,
        subset: &mut Vec<usize>,
        basis: &[SpectralField<f64>],
        out: &mut Vec<SpectralField<f64>>,
    ) {
        if !subset.is_empty() {
            for signs in 0..1usize << (subset.len() - 1) {
                let mut combo = basis[subset[0]].clone();
                for (j, &idx) in subset.iter().enumerate().skip(1) {
                    let sign = if signs >> (j - 1) & 1 == 1 { -1.0 } else { 1.0 };
                    combo.axpy(sign, &basis[idx]);
                }
                out.push(combo);
            }
        }
        if subset.len() == q {
            return;
        }
        for next in start..m {
            subset.push(next);
            walk(next + 1, m, q, subset, basis, out);
            subset.pop();
        }
    }
    walk(0, m, q, &mut subset, basis, &mut out);
    out
}

fn as_vector(u: &SpectralField<f64>) -> DVector<f64> {
    let c = u.coeffs();
    DVector::from_iterator(2 * c.len(), c.iter().flat_map(|z| [z.re, z.im]))
}

/// Writes `η` (in the span of chain level `level ≥ 1`) as a sum of nonlinearity images.
///
/// Dictionary columns are `B(combo)` and `i·B(combo)`; coefficients are picked by
/// orthogonal matching pursuit so that few terms survive, and a complex
/// coefficient `α` is absorbed as `ζ = |α|^{1/q} e^{i arg α} · combo`, which is
/// exact because `B(λζ) = |λ|^{q-1} λ B(ζ)`.
pub fn decompose_target(
    eta: &SpectralField<f64>,
    chain: &SaturationChain,
    level: usize,
    params: &CglParams<f64>,
) -> Result<Decomposition> {
    if level == 0 || level >= chain.levels.len() {
        return Err(CglError::InvalidParams(format!("decomposition level {level} outside 1..{}", chain.levels.len())));
    }
    let norm = l2_norm(eta);
    if norm == 0.0 {
        return Ok(Decomposition { zetas: Vec::new(), residual: 0.0, dictionary_size: 0 });
    }
    let grid = eta.grid();
    let in_level = project_subspace(eta, &chain.levels[level])?;
    let outside = l2_norm(&(eta - &in_level)) / norm;
    if outside > DECOMPOSITION_TOLERANCE {
        return Err(CglError::NotInSpan { residual: outside });
    }
    let q = params.q() as usize;
    let basis = trig_basis(grid, &chain.levels[level - 1], true)?;
    let combos = dictionary(&basis, q);
    let images: Vec<DVector<f64>> = combos.iter().map(|c| as_vector(&nonlinearity(c, params))).collect();
    let b = as_vector(eta);
    let i = Complex::new(0.0, 1.0);
    let rotated: Vec<DVector<f64>> =
        combos.iter().map(|c| as_vector(&nonlinearity(c, params).scale_complex(i))).collect();

    let mut selected: Vec<usize> = Vec::new();
    let mut coef = DVector::zeros(0);
    let mut residual = b.clone();
    while selected.len() < combos.len() && residual.norm() > 1e-12 * b.norm() {
        let best = (0..combos.len())
            .filter(|k| !selected.contains(k))
            .map(|k| {
                let n2 = images[k].norm_squared();
                let score = if n2 > 0.0 { (residual.dot(&images[k]).powi(2) + residual.dot(&rotated[k]).powi(2)) / n2 } else { 0.0 };
                (k, score)
            })
            .max_by(|a, b| a.1.partial_cmp(&b.1).expect("finite scores"));
        let Some((k, score)) = best else { break };
        if score <= 1e-30 * b.norm_squared() {
            break;
        }
        selected.push(k);
        let mut a = DMatrix::zeros(b.len(), 2 * selected.len());
        for (j, &s) in selected.iter().enumerate() {
            a.set_column(2 * j, &images[s]);
            a.set_column(2 * j + 1, &rotated[s]);
        }
        let (x, _) = lstsq(&a, &b, 0.0);
        residual = &b - &a * &x;
        coef = x;
    }

    let qf = q as f64;
    let mut zetas = Vec::new();
    let mut sum = SpectralField::zeros(grid);
    for (j, &s) in selected.iter().enumerate() {
        let alpha = Complex::new(coef[2 * j], coef[2 * j + 1]);
        if alpha.norm() == 0.0 {
            continue;
        }
        let lambda = Complex::from_polar(alpha.norm().powf(1.0 / qf), alpha.arg());
        let zeta = combos[s].scale_complex(lambda);
        sum = &sum + &nonlinearity(&zeta, params);
        zetas.push(zeta);
    }
    let residual = l2_norm(&(&sum - eta)) / norm;
    if residual > DECOMPOSITION_TOLERANCE {
        return Err(CglError::IllConditioned { residual });
    }
    Ok(Decomposition { zetas, residual, dictionary_size: combos.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::saturation::{chain_nonlinear_clipped, FrequencySet};
    use crate::spectral::TorusGrid;

    #[test]
    fn dictionary_size_counts_signed_subsets() {
        let g = TorusGrid::<f64>::new(1, 16).unwrap();
        let basis: Vec<_> = (0..4).map(|k| SpectralField::cos_mode(&g, &[k]).unwrap()).collect();
        // subsets of size 1, 2, 3 with 1, 2, 4 sign patterns
        assert_eq!(dictionary(&basis, 3).len(), 4 + 6 * 2 + 4 * 4);
    }

    #[test]
    fn single_image_is_recovered_with_one_term() {
        let g = TorusGrid::<f64>::new(1, 32).unwrap();
        let params = CglParams::new(0.1, 0.0, 1.0, 1, 1, 1).unwrap();
        let base = FrequencySet::new(1, [[0], [1]]).unwrap();
        let chain = chain_nonlinear_clipped(&base, 1, 1, Some(g.max_mode())).unwrap();
        let zeta = SpectralField::cos_mode(&g, &[1]).unwrap().scale(0.7);
        for sign in [1.0, -1.0] {
            let eta = nonlinearity(&zeta.scale(sign), &params);
            let dec = decompose_target(&eta, &chain, 1, &params).unwrap();
            assert_eq!(dec.zetas.len(), 1);
            assert!(l2_norm(&(&dec.zetas[0] - &zeta.scale(sign))) < 1e-10);
        }
    }

    #[test]
    fn outside_level_is_rejected() {
        let g = TorusGrid::<f64>::new(1, 32).unwrap();
        let params = CglParams::new(0.1, 0.0, 1.0, 1, 1, 1).unwrap();
        let base = FrequencySet::new(1, [[0], [1]]).unwrap();
        let chain = chain_nonlinear_clipped(&base, 1, 1, Some(g.max_mode())).unwrap();
        let eta = SpectralField::cos_mode(&g, &[5]).unwrap();
        assert!(matches!(decompose_target(&eta, &chain, 1, &params), Err(CglError::NotInSpan { .. })));
    }
}
