use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{CglError, Result};
use crate::scalar::Real;
use crate::spectral::grid::TorusGrid;

/// Complex-valued band-limited function on the torus.
///
/// Stored as Fourier coefficients `û(k)` in FFT order with the convention
/// `u(x) = Σ_k û(k) e^{i<k,x>}`; slots outside the mode box are kept at zero.
#[derive(Clone, Debug)]
pub struct SpectralField<T: Real> {
    grid: TorusGrid<T>,
    coeffs: Vec<Complex<T>>,
}

impl<T: Real> PartialEq for SpectralField<T> {
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid && self.coeffs == other.coeffs
    }
}

impl<T: Real> SpectralField<T> {
    pub fn zeros(grid: &TorusGrid<T>) -> Self {
        Self { grid: grid.clone(), coeffs: vec![Complex::zero(); grid.len()] }
    }

    /// Wraps raw coefficients (FFT order), discarding anything outside the mode box.
    pub fn from_coeffs(grid: &TorusGrid<T>, mut coeffs: Vec<Complex<T>>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(CglError::GridMismatch);
        }
        for (c, &inside) in coeffs.iter_mut().zip(grid.in_box_mask()) {
            if !inside {
                *c = Complex::zero();
            }
        }
        Ok(Self { grid: grid.clone(), coeffs })
    }

    /// Transforms physical samples; content at the Nyquist frequency is dropped.
    pub fn from_physical(grid: &TorusGrid<T>, samples: &[Complex<T>]) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(CglError::GridMismatch);
        }
        let mut data = samples.to_vec();
        grid.transform(&mut data, grid.points_per_dim(), false);
        let inv = T::one() / T::of_usize(grid.len());
        for c in data.iter_mut() {
            *c = c.scale(inv);
        }
        Self::from_coeffs(grid, data)
    }

    pub fn from_real_samples(grid: &TorusGrid<T>, samples: &[T]) -> Result<Self> {
        let c: Vec<Complex<T>> = samples.iter().map(|&x| Complex::new(x, T::zero())).collect();
        Self::from_physical(grid, &c)
    }

    /// Samples `f` at every grid point.
    pub fn from_fn(grid: &TorusGrid<T>, f: impl Fn(&[T]) -> Complex<T>) -> Self {
        let samples: Vec<Complex<T>> = (0..grid.len()).map(|i| f(&grid.point(i))).collect();
        Self::from_physical(grid, &samples).expect("sample count matches grid")
    }

    pub fn constant(grid: &TorusGrid<T>, value: Complex<T>) -> Self {
        let mut u = Self::zeros(grid);
        u.coeffs[0] = value;
        u
    }

    /// `amp · e^{i<k,x>}`.
    pub fn mode(grid: &TorusGrid<T>, k: &[i64], amp: Complex<T>) -> Result<Self> {
        let slot = grid.slot_of(k).ok_or_else(|| CglError::FrequencyOutOfBox(k.to_vec()))?;
        let mut u = Self::zeros(grid);
        u.coeffs[slot] = amp;
        Ok(u)
    }

    /// `cos<l,x>`.
    pub fn cos_mode(grid: &TorusGrid<T>, l: &[i64]) -> Result<Self> {
        Self::trig(grid, l, Complex::one(), Complex::zero())
    }

    /// `sin<l,x>`.
    pub fn sin_mode(grid: &TorusGrid<T>, l: &[i64]) -> Result<Self> {
        Self::trig(grid, l, Complex::zero(), Complex::one())
    }

    /// `a cos<l,x> + b sin<l,x>` with complex `a`, `b`.
    pub fn trig(grid: &TorusGrid<T>, l: &[i64], a: Complex<T>, b: Complex<T>) -> Result<Self> {
        let mut u = Self::zeros(grid);
        u.add_trig(l, a, b)?;
        Ok(u)
    }

    /// Adds `a cos<l,x> + b sin<l,x>` in place.
    pub fn add_trig(&mut self, l: &[i64], a: Complex<T>, b: Complex<T>) -> Result<()> {
        let slot = self.grid.slot_of(l).ok_or_else(|| CglError::FrequencyOutOfBox(l.to_vec()))?;
        if l.iter().all(|&x| x == 0) {
            self.coeffs[slot] += a;
            return Ok(());
        }
        let neg: Vec<i64> = l.iter().map(|x| -x).collect();
        let nslot = self.grid.slot_of(&neg).expect("mode box symmetric");
        let half = T::of(0.5);
        let i = Complex::<T>::i();
        // cos = (e^{+} + e^{-})/2, sin = (e^{+} - e^{-})/(2i)
        self.coeffs[slot] += (a - i * b).scale(half);
        self.coeffs[nslot] += (a + i * b).scale(half);
        Ok(())
    }

    pub fn grid(&self) -> &TorusGrid<T> {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    /// Fourier coefficient `û(k)`; zero outside the mode box.
    pub fn coeff(&self, k: &[i64]) -> Complex<T> {
        self.grid.slot_of(k).map_or(Complex::zero(), |s| self.coeffs[s])
    }

    pub fn set_coeff(&mut self, k: &[i64], value: Complex<T>) -> Result<()> {
        let slot = self.grid.slot_of(k).ok_or_else(|| CglError::FrequencyOutOfBox(k.to_vec()))?;
        self.coeffs[slot] = value;
        Ok(())
    }

    /// Applies a Fourier multiplier `m(k)` given per flat slot.
    pub fn map_coeffs(&self, f: impl Fn(usize, Complex<T>) -> Complex<T>) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| if self.grid.slot_in_box(i) { f(i, c) } else { Complex::zero() })
            .collect();
        Self { grid: self.grid.clone(), coeffs }
    }

    /// Physical samples on the uniform grid.
    pub fn physical(&self) -> Vec<Complex<T>> {
        let mut data = self.coeffs.clone();
        self.grid.transform(&mut data, self.grid.points_per_dim(), true);
        data
    }

    /// Samples on the `factor`-times refined grid (exact trigonometric interpolation).
    pub fn padded_physical(&self, factor: usize) -> Vec<Complex<T>> {
        if factor == 1 {
            return self.physical();
        }
        let mut data = self.grid.pad(&self.coeffs, factor);
        self.grid.transform(&mut data, factor * self.grid.points_per_dim(), true);
        data
    }

    /// Inverse of [`Self::padded_physical`] followed by truncation to the mode box.
    pub fn from_padded_physical(grid: &TorusGrid<T>, factor: usize, mut samples: Vec<Complex<T>>) -> Self {
        if factor == 1 {
            return Self::from_physical(grid, &samples).expect("sample count matches grid");
        }
        let m = factor * grid.points_per_dim();
        grid.transform(&mut samples, m, false);
        let inv = T::one() / T::of_usize(samples.len());
        let mut coeffs = grid.truncate(&samples, factor);
        for c in coeffs.iter_mut() {
            *c = c.scale(inv);
        }
        Self { grid: grid.clone(), coeffs }
    }

    /// Pointwise product evaluated on a refined grid, so it is exact before truncation.
    pub fn product(&self, other: &Self) -> Result<Self> {
        self.check_grid(other)?;
        let a = self.padded_physical(2);
        let b = other.padded_physical(2);
        let prod = a.iter().zip(&b).map(|(x, y)| x * y).collect();
        Ok(Self::from_padded_physical(&self.grid, 2, prod))
    }

    pub fn check_grid(&self, other: &Self) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(CglError::GridMismatch)
        }
    }

    pub fn scale(&self, a: T) -> Self {
        self.map_coeffs(|_, c| c.scale(a))
    }

    pub fn scale_complex(&self, a: Complex<T>) -> Self {
        self.map_coeffs(|_, c| c * a)
    }

    /// `self += a · other`.
    pub fn axpy(&mut self, a: T, other: &Self) {
        debug_assert!(self.grid == other.grid);
        for (x, y) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *x += y.scale(a);
        }
    }

    /// Complex conjugate field: `conj(u)^(k) = conj(û(-k))`.
    pub fn conj(&self) -> Self {
        let mut out = Self::zeros(&self.grid);
        for (flat, k) in self.grid.modes() {
            let neg: Vec<i64> = k.iter().map(|x| -x).collect();
            let nslot = self.grid.slot_of(&neg).expect("mode box symmetric");
            out.coeffs[nslot] = self.coeffs[flat].conj();
        }
        out
    }

    /// Real part `(u + ū)/2`.
    pub fn real_part(&self) -> Self {
        (self + &self.conj()).scale(T::of(0.5))
    }

    /// Whether `û(-k) = conj(û(k))` holds to the given absolute tolerance.
    pub fn is_real_valued(&self, tol: T) -> bool {
        let diff = self - &self.conj();
        diff.coeffs.iter().all(|c| c.norm() <= tol)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Largest modulus over the grid samples.
    pub fn sup_norm(&self) -> T {
        self.physical().iter().fold(T::zero(), |m, c| m.max(c.norm()))
    }

    /// Largest coefficient modulus over modes for which `inside` is false.
    pub fn max_coeff_outside(&self, inside: impl Fn(&[i64]) -> bool) -> T {
        self.grid
            .modes()
            .into_iter()
            .filter(|(_, k)| !inside(k))
            .fold(T::zero(), |m, (f, _)| m.max(self.coeffs[f].norm()))
    }
}

impl<T: Real> Add for &SpectralField<T> {
    type Output = SpectralField<T>;
    fn add(self, rhs: Self) -> SpectralField<T> {
        assert!(self.grid == rhs.grid, "grid mismatch");
        let coeffs = self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect();
        SpectralField { grid: self.grid.clone(), coeffs }
    }
}

impl<T: Real> Sub for &SpectralField<T> {
    type Output = SpectralField<T>;
    fn sub(self, rhs: Self) -> SpectralField<T> {
        assert!(self.grid == rhs.grid, "grid mismatch");
        let coeffs = self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect();
        SpectralField { grid: self.grid.clone(), coeffs }
    }
}

impl<T: Real> Neg for &SpectralField<T> {
    type Output = SpectralField<T>;
    fn neg(self) -> SpectralField<T> {
        self.scale(-T::one())
    }
}

impl<T: Real> Mul<T> for &SpectralField<T> {
    type Output = SpectralField<T>;
    fn mul(self, a: T) -> SpectralField<T> {
        self.scale(a)
    }
}

impl<T: Real> Mul<Complex<T>> for &SpectralField<T> {
    type Output = SpectralField<T>;
    fn mul(self, a: Complex<T>) -> SpectralField<T> {
        self.scale_complex(a)
    }
}

impl<T: Real> AddAssign<&SpectralField<T>> for SpectralField<T> {
    fn add_assign(&mut self, rhs: &SpectralField<T>) {
        self.axpy(T::one(), rhs);
    }
}

impl<T: Real> SubAssign<&SpectralField<T>> for SpectralField<T> {
    fn sub_assign(&mut self, rhs: &SpectralField<T>) {
        self.axpy(-T::one(), rhs);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(d: usize, n: usize) -> TorusGrid<f64> {
        TorusGrid::new(d, n).unwrap()
    }

    #[test]
    fn trig_helpers_match_samples() {
        let g = grid(2, 16);
        let l = [2, -1];
        let c = SpectralField::cos_mode(&g, &l).unwrap();
        let s = SpectralField::sin_mode(&g, &l).unwrap();
        let pc = c.physical();
        let ps = s.physical();
        for i in 0..g.len() {
            let x = g.point(i);
            let phase = 2.0 * x[0] - x[1];
            assert!((pc[i] - Complex::new(phase.cos(), 0.0)).norm() < 1e-13);
            assert!((ps[i] - Complex::new(phase.sin(), 0.0)).norm() < 1e-13);
        }
    }

    #[test]
    fn conj_and_real_flag() {
        let g = grid(1, 16);
        let u = SpectralField::cos_mode(&g, &[3]).unwrap();
        assert!(u.is_real_valued(1e-14));
        let v = SpectralField::mode(&g, &[3], Complex::new(1.0, 0.0)).unwrap();
        assert!(!v.is_real_valued(1e-14));
        let vc = v.conj();
        assert!((vc.coeff(&[-3]) - Complex::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn product_is_exact_for_band_limited_inputs() {
        let g = grid(1, 16);
        let a = SpectralField::cos_mode(&g, &[3]).unwrap();
        let b = SpectralField::cos_mode(&g, &[4]).unwrap();
        let p = a.product(&b).unwrap();
        // cos3 cos4 = (cos1 + cos7)/2
        assert!((p.coeff(&[1]).re - 0.25).abs() < 1e-14);
        assert!((p.coeff(&[7]).re - 0.25).abs() < 1e-14);
        // cos7 cos4 would alias onto 11 -> -5 on a 16-point grid without padding
        let c = SpectralField::cos_mode(&g, &[7]).unwrap();
        let q = c.product(&b).unwrap();
        assert!(q.coeff(&[5]).norm() < 1e-14);
        assert!((q.coeff(&[3]).re - 0.25).abs() < 1e-14);
    }

    #[test]
    fn out_of_box_modes_rejected() {
        let g = grid(1, 8);
        assert!(matches!(SpectralField::cos_mode(&g, &[4]), Err(CglError::FrequencyOutOfBox(_))));
        let u = SpectralField::from_fn(&g, |x| Complex::new((4.0 * x[0]).cos(), 0.0));
        assert!(u.coeffs().iter().all(|c| c.norm() < 1e-14));
    }
}
