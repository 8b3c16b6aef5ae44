use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use num_complex::Complex;
use num_traits::Zero;
use rustfft::{Fft, FftPlanner};

use crate::error::{CglError, Result};
use crate::scalar::Real;

type PlanPair<T> = (Arc<dyn Fft<T>>, Arc<dyn Fft<T>>);

struct FftCache<T: Real> {
    planner: Mutex<FftPlanner<T>>,
    plans: Mutex<BTreeMap<usize, PlanPair<T>>>,
}

impl<T: Real> FftCache<T> {
    fn get(&self, m: usize) -> PlanPair<T> {
        if let Some(p) = self.plans.lock().expect("fft cache poisoned").get(&m) {
            return p.clone();
        }
        let pair = {
            let mut planner = self.planner.lock().expect("fft planner poisoned");
            (planner.plan_fft_forward(m), planner.plan_fft_inverse(m))
        };
        self.plans
            .lock()
            .expect("fft cache poisoned")
            .entry(m)
            .or_insert(pair)
            .clone()
    }
}

/// Uniform grid on the d-torus `[0, 2π)^d` with `n` points per dimension.
///
/// Retained Fourier modes form the symmetric box `|k_i| <= n/2 - 1`; the
/// Nyquist frequency is always discarded so the box is closed under negation.
#[derive(Clone)]
pub struct TorusGrid<T: Real> {
    d: usize,
    n: usize,
    ksq: Arc<Vec<T>>,
    in_box: Arc<Vec<bool>>,
    fft: Arc<FftCache<T>>,
}

impl<T: Real> fmt::Debug for TorusGrid<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TorusGrid").field("d", &self.d).field("n", &self.n).finish()
    }
}

impl<T: Real> PartialEq for TorusGrid<T> {
    fn eq(&self, other: &Self) -> bool {
        self.d == other.d && self.n == other.n
    }
}

impl<T: Real> TorusGrid<T> {
    /// Builds the grid; `d` must be 1, 2 or 3 and `n` a power of two no smaller than 8.
    pub fn new(d: usize, n: usize) -> Result<Self> {
        if !(1..=3).contains(&d) {
            return Err(CglError::InvalidGrid(format!("dimension {d} not in 1..=3")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(CglError::InvalidGrid(format!(
                "{n} points per dimension is not a power of two >= 8"
            )));
        }
        let len = n.pow(d as u32);
        let half = (n / 2) as i64;
        let mut ksq = Vec::with_capacity(len);
        let mut in_box = Vec::with_capacity(len);
        let mut k = vec![0i64; d];
        for flat in 0..len {
            unflatten(flat, n, &mut k);
            let mut s = 0i64;
            let mut inside = true;
            for ki in k.iter_mut() {
                let w = wrap(*ki, n);
                inside &= w.abs() < half;
                s += w * w;
            }
            ksq.push(T::of(s as f64));
            in_box.push(inside);
        }
        Ok(Self {
            d,
            n,
            ksq: Arc::new(ksq),
            in_box: Arc::new(in_box),
            fft: Arc::new(FftCache { planner: Mutex::new(FftPlanner::new()), plans: Mutex::new(BTreeMap::new()) }),
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn points_per_dim(&self) -> usize {
        self.n
    }

    /// Total number of grid points (and of coefficient slots).
    pub fn len(&self) -> usize {
        self.ksq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ksq.is_empty()
    }

    /// Largest retained |k_i|.
    pub fn max_mode(&self) -> i64 {
        (self.n / 2) as i64 - 1
    }

    pub fn spacing(&self) -> T {
        T::of(2.0 * std::f64::consts::PI / self.n as f64)
    }

    /// Volume `(2π)^d` of the torus.
    pub fn volume(&self) -> T {
        T::of((2.0 * std::f64::consts::PI).powi(self.d as i32))
    }

    /// Quadrature weight `(2π/n)^d` of one grid cell.
    pub fn cell_volume(&self) -> T {
        self.spacing().powi(self.d as i32)
    }

    pub(crate) fn ksq(&self) -> &[T] {
        &self.ksq
    }

    pub(crate) fn in_box_mask(&self) -> &[bool] {
        &self.in_box
    }

    /// Whether the flat coefficient slot is a retained mode.
    pub fn slot_in_box(&self, flat: usize) -> bool {
        self.in_box[flat]
    }

    pub fn contains_mode(&self, k: &[i64]) -> bool {
        k.len() == self.d && k.iter().all(|ki| ki.abs() <= self.max_mode())
    }

    /// Flat coefficient slot of mode `k`, or `None` outside the mode box.
    pub fn slot_of(&self, k: &[i64]) -> Option<usize> {
        if !self.contains_mode(k) {
            return None;
        }
        Some(flat_of_mode(k, self.n))
    }

    /// Integer wavevector of a flat coefficient slot.
    pub fn mode_of(&self, flat: usize) -> Vec<i64> {
        let mut k = vec![0i64; self.d];
        unflatten(flat, self.n, &mut k);
        for ki in k.iter_mut() {
            *ki = wrap(*ki, self.n);
        }
        k
    }

    /// All retained modes with their flat slots.
    pub fn modes(&self) -> Vec<(usize, Vec<i64>)> {
        (0..self.len()).filter(|&f| self.in_box[f]).map(|f| (f, self.mode_of(f))).collect()
    }

    /// Physical coordinates of a grid point.
    pub fn point(&self, flat: usize) -> Vec<T> {
        let mut idx = vec![0i64; self.d];
        unflatten(flat, self.n, &mut idx);
        idx.iter().map(|&i| self.spacing() * T::of(i as f64)).collect()
    }

    /// Multi-index of a grid point.
    pub fn point_index(&self, flat: usize) -> Vec<usize> {
        let mut idx = vec![0i64; self.d];
        unflatten(flat, self.n, &mut idx);
        idx.into_iter().map(|i| i as usize).collect()
    }

    /// Flat index of the grid point with the given (periodically wrapped) multi-index.
    pub fn point_flat(&self, idx: &[i64]) -> usize {
        let n = self.n as i64;
        idx.iter().fold(0usize, |acc, &i| acc * self.n + i.rem_euclid(n) as usize)
    }

    /// Padded transform size `factor * n` used for dealiased products.
    pub fn padded_len(&self, factor: usize) -> usize {
        (factor * self.n).pow(self.d as u32)
    }

    /// In-place d-dimensional FFT of an `m^d` row-major array (unnormalized).
    pub(crate) fn transform(&self, data: &mut [Complex<T>], m: usize, inverse: bool) {
        debug_assert_eq!(data.len(), m.pow(self.d as u32));
        let (fwd, inv) = self.fft.get(m);
        let plan = if inverse { inv } else { fwd };
        let mut scratch = vec![Complex::<T>::zero(); plan.get_inplace_scratch_len()];
        let mut line = vec![Complex::<T>::zero(); m];
        for axis in 0..self.d {
            let stride = m.pow((self.d - 1 - axis) as u32);
            if stride == 1 {
                plan.process_with_scratch(data, &mut scratch);
                continue;
            }
            let block = stride * m;
            for outer in (0..data.len()).step_by(block) {
                for inner in 0..stride {
                    for (j, slot) in line.iter_mut().enumerate() {
                        *slot = data[outer + j * stride + inner];
                    }
                    plan.process_with_scratch(&mut line, &mut scratch);
                    for (j, v) in line.iter().enumerate() {
                        data[outer + j * stride + inner] = *v;
                    }
                }
            }
        }
    }

    /// Scatters box coefficients into a zero `(factor n)^d` spectrum.
    pub(crate) fn pad(&self, coeffs: &[Complex<T>], factor: usize) -> Vec<Complex<T>> {
        let m = factor * self.n;
        let mut out = vec![Complex::<T>::zero(); m.pow(self.d as u32)];
        let mut k = vec![0i64; self.d];
        for (flat, c) in coeffs.iter().enumerate() {
            if !self.in_box[flat] || c.is_zero() {
                continue;
            }
            unflatten(flat, self.n, &mut k);
            for ki in k.iter_mut() {
                *ki = wrap(*ki, self.n);
            }
            out[flat_of_mode(&k, m)] = *c;
        }
        out
    }

    /// Gathers box coefficients back out of a padded spectrum.
    pub(crate) fn truncate(&self, padded: &[Complex<T>], factor: usize) -> Vec<Complex<T>> {
        let m = factor * self.n;
        let mut out = vec![Complex::<T>::zero(); self.len()];
        let mut k = vec![0i64; self.d];
        for (flat, slot) in out.iter_mut().enumerate() {
            if !self.in_box[flat] {
                continue;
            }
            unflatten(flat, self.n, &mut k);
            for ki in k.iter_mut() {
                *ki = wrap(*ki, self.n);
            }
            *slot = padded[flat_of_mode(&k, m)];
        }
        out
    }
}

fn unflatten(mut flat: usize, n: usize, out: &mut [i64]) {
    for slot in out.iter_mut().rev() {
        *slot = (flat % n) as i64;
        flat /= n;
    }
}

fn wrap(i: i64, n: usize) -> i64 {
    let n = n as i64;
    if i >= n / 2 {
        i - n
    } else {
        i
    }
}

fn flat_of_mode(k: &[i64], m: usize) -> usize {
    let mi = m as i64;
    k.iter().fold(0usize, |acc, &ki| acc * m + ki.rem_euclid(mi) as usize)
}
