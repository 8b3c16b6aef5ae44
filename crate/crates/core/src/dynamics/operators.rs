use num_complex::Complex;

use crate::dynamics::params::CglParams;
use crate::error::{CglError, Result};
use crate::scalar::Real;
use crate::spectral::SpectralField;

/// `(ν+i)|k|² + γ`, the Fourier symbol of `L`.
#[inline]
pub(crate) fn linear_symbol<T: Real>(params: &CglParams<T>, ksq: T) -> Complex<T> {
    Complex::new(params.nu * ksq + params.gamma, ksq)
}

/// `L u = −(ν+i)Δu + γu`.
pub fn apply_l<T: Real>(u: &SpectralField<T>, params: &CglParams<T>) -> SpectralField<T> {
    let ksq = u.grid().ksq();
    u.map_coeffs(|flat, c| c * linear_symbol(params, ksq[flat]))
}

#[inline]
fn powu<T: Real>(z: Complex<T>, n: u32) -> Complex<T> {
    let mut acc = Complex::new(T::one(), T::zero());
    for _ in 0..n {
        acc = acc * z;
    }
    acc
}

/// Evaluates a pointwise map of `m` input fields on the alias-free padded grid.
pub(crate) fn pointwise<T: Real>(
    inputs: &[&SpectralField<T>],
    factor: usize,
    f: impl Fn(&[Complex<T>]) -> Complex<T>,
) -> Result<SpectralField<T>> {
    let first = inputs[0];
    for u in inputs {
        u.check_grid(first)?;
    }
    let samples: Vec<Vec<Complex<T>>> = inputs.iter().map(|u| u.padded_physical(factor)).collect();
    let len = samples[0].len();
    let mut buf = vec![Complex::new(T::zero(), T::zero()); inputs.len()];
    let out: Vec<Complex<T>> = (0..len)
        .map(|i| {
            for (b, s) in buf.iter_mut().zip(&samples) {
                *b = s[i];
            }
            f(&buf)
        })
        .collect();
    Ok(SpectralField::from_padded_physical(first.grid(), factor, out))
}

/// `B(u) = ic|u|^{2p}u`, dealiased.
pub fn nonlinearity<T: Real>(u: &SpectralField<T>, params: &CglParams<T>) -> SpectralField<T> {
    let ic = Complex::new(T::zero(), params.c);
    let p = params.p as i32;
    pointwise(&[u], params.dealias_factor(), |z| {
        let w = z[0];
        ic * w * w.norm_sqr().powi(p)
    })
    .expect("single input")
}

/// `Q(u; v) = ic((p+1)|u|^{2p} v + p|u|^{2p−2} u² v̄)`, the derivative of `B` at `u` along `v`.
pub fn apply_q<T: Real>(u: &SpectralField<T>, v: &SpectralField<T>, params: &CglParams<T>) -> Result<SpectralField<T>> {
    let ic = Complex::new(T::zero(), params.c);
    let p = params.p as i32;
    let (a, b) = (T::of((p + 1) as f64), T::of(p as f64));
    pointwise(&[u, v], params.dealias_factor(), |z| {
        let (u, v) = (z[0], z[1]);
        let r = u.norm_sqr();
        ic * (v * (a * r.powi(p)) + u * u * v.conj() * (b * r.powi(p - 1)))
    })
}

/// `Q*(u; w) = ic(−(p+1)|u|^{2p} w + p|u|^{2p−2} u² w̄)`, the adjoint of `v ↦ Q(u; v)`
/// with respect to the real L² product.
pub fn apply_q_adjoint<T: Real>(
    u: &SpectralField<T>,
    w: &SpectralField<T>,
    params: &CglParams<T>,
) -> Result<SpectralField<T>> {
    let ic = Complex::new(T::zero(), params.c);
    let p = params.p as i32;
    let (a, b) = (T::of((p + 1) as f64), T::of(p as f64));
    pointwise(&[u, w], params.dealias_factor(), |z| {
        let (u, w) = (z[0], z[1]);
        let r = u.norm_sqr();
        ic * (u * u * w.conj() * (b * r.powi(p - 1)) - w * (a * r.powi(p)))
    })
}

/// Symmetric `k`-linear derivative `B_k(u; v_1, ..., v_k)` of `B(u) = ic u^{p+1} ū^p`.
///
/// Expanding the product over which factors receive a direction: a subset `S`
/// of the directions goes to the `u` factors and the rest to the `ū` factors.
pub fn derivative_bk<T: Real>(
    u: &SpectralField<T>,
    vs: &[&SpectralField<T>],
    params: &CglParams<T>,
) -> Result<SpectralField<T>> {
    let q = params.q() as usize;
    let k = vs.len();
    if k == 0 || k > q {
        return Err(CglError::DegreeOutOfRange { k, q });
    }
    let a = params.p as usize + 1;
    let b = params.p as usize;
    let falling = |n: usize, r: usize| -> f64 { (0..r).map(|i| (n - i) as f64).product() };
    let mut terms = Vec::new();
    for subset in 0u32..(1 << k) {
        let r = subset.count_ones() as usize;
        if r <= a && k - r <= b {
            let coef = T::of(falling(a, r) * falling(b, k - r));
            terms.push((subset, coef, (a - r) as u32, (b - (k - r)) as u32));
        }
    }
    let ic = Complex::new(T::zero(), params.c);
    let mut inputs = vec![u];
    inputs.extend_from_slice(vs);
    pointwise(&inputs, params.dealias_factor(), |z| {
        let (u, v) = (z[0], &z[1..]);
        let mut sum = Complex::new(T::zero(), T::zero());
        for &(subset, coef, eu, ebar) in &terms {
            let mut t = powu(u, eu) * powu(u.conj(), ebar);
            for (i, vi) in v.iter().enumerate() {
                t = t * if subset >> i & 1 == 1 { *vi } else { vi.conj() };
            }
            sum += t.scale(coef);
        }
        ic * sum
    })
}
