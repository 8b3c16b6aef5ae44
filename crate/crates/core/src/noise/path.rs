use std::io::Write;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::TimeForcing;
use crate::error::{CglError, Result};
use crate::noise::haar::haar_value;
use crate::noise::law::ScalarLaw;
use crate::saturation::FrequencySet;
use crate::scalar::Real;
use crate::spectral::{SpectralField, TorusGrid};

/// Haar-type noise `η(t,x) = Σ_l (b_c^l η_c^l(t) cos<l,x> + b_s^l η_s^l(t) sin<l,x>)` on `[0, 1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HaarNoiseSpec {
    /// Spatial frequencies; one entry per `±` pair is used.
    pub set: FrequencySet,
    /// `b_c^l`, in the order of `set.representatives()`.
    pub amps_cos: Vec<f64>,
    /// `b_s^l`, same order (ignored for `l = 0`).
    pub amps_sin: Vec<f64>,
    /// Weight exponent of level `j` (`j^{-decay}`); must exceed 1.
    pub decay: f64,
    pub law: ScalarLaw,
    /// Finest Haar level.
    pub j_max: u32,
    /// Optional cap on the number of shifts per level.
    pub m_max: Option<u64>,
    pub seed: u64,
}

impl HaarNoiseSpec {
    /// Equal amplitudes on every mode of `set`, triangular law of radius 1.
    pub fn uniform(set: FrequencySet, amp: f64, j_max: u32, seed: u64) -> Self {
        let n = set.representatives().len();
        Self { set, amps_cos: vec![amp; n], amps_sin: vec![amp; n], decay: 2.0, law: ScalarLaw::default(), j_max, m_max: None, seed }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.set.representatives().len();
        if self.amps_cos.len() != n || self.amps_sin.len() != n {
            return Err(CglError::InvalidParams(format!("need {n} cosine and sine amplitudes")));
        }
        if let Some(a) = self.amps_cos.iter().chain(&self.amps_sin).find(|a| !(**a > 0.0 && a.is_finite())) {
            return Err(CglError::AmplitudeNonPositive(*a));
        }
        if !(self.decay > 1.0) {
            return Err(CglError::InvalidParams("decay must be > 1".into()));
        }
        if self.j_max > 20 {
            return Err(CglError::InvalidParams("j_max must be <= 20".into()));
        }
        self.law.validate().map_err(CglError::InvalidParams)
    }

    /// Number of Haar cells on the finest level.
    pub fn cells(&self) -> usize {
        1 << self.j_max
    }

    fn shifts(&self, j: u32) -> u64 {
        let full = 1u64 << (j - 1);
        self.m_max.map_or(full, |m| m.min(full))
    }

    /// `R (1 + Σ_{j ≤ j_max} j^{-decay} 2^{(j-1)/2})`, a bound on every scalar path.
    pub fn scalar_bound(&self) -> f64 {
        let tail: f64 = (1..=self.j_max).map(|j| (j as f64).powf(-self.decay) * 2f64.powf((j as f64 - 1.0) / 2.0)).sum();
        self.law.radius() * (1.0 + tail)
    }

    /// Deterministic generator for stream `(trajectory, step)`.
    pub fn rng(&self, trajectory: u64, step: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream((trajectory << 32) | (step & 0xffff_ffff));
        rng
    }
}

/// One realization of the scalar process on `[0, 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarPath {
    pub xi0: f64,
    /// `xi[j-1][m]` multiplies `j^{-decay} h_{jm}`.
    pub xi: Vec<Vec<f64>>,
    /// Value on each finest-level cell.
    pub cells: Vec<f64>,
}

impl ScalarPath {
    pub fn value(&self, t: f64) -> f64 {
        self.cells[cell_index(t, self.cells.len())]
    }
}

fn cell_index(t: f64, cells: usize) -> usize {
    ((t.max(0.0) * cells as f64).floor() as usize).min(cells - 1)
}

/// `ξ_0 h_0 + Σ_{j=1}^{j_max} Σ_m j^{-decay} ξ_{jm} h_{jm}` with i.i.d. `ξ` from the law.
pub fn sample_scalar_process<R: Rng + ?Sized>(spec: &HaarNoiseSpec, rng: &mut R) -> ScalarPath {
    let xi0 = spec.law.sample(rng);
    let xi: Vec<Vec<f64>> = (1..=spec.j_max).map(|j| (0..spec.shifts(j)).map(|_| spec.law.sample(rng)).collect()).collect();
    let n = spec.cells();
    let cells = (0..n)
        .map(|c| {
            let t = (c as f64 + 0.5) / n as f64;
            let mut v = xi0;
            for (jm1, row) in xi.iter().enumerate() {
                let j = jm1 as u32 + 1;
                let m = (t * (1u64 << (j - 1)) as f64).floor() as u64;
                if let Some(x) = row.get(m as usize) {
                    v += (j as f64).powf(-spec.decay) * x * haar_value(j, m, t);
                }
            }
            v
        })
        .collect();
    ScalarPath { xi0, xi, cells }
}

/// The four scalar processes attached to one frequency: real and imaginary
/// parts of the cosine and sine coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct ModePaths {
    pub l: Vec<i64>,
    pub amp_cos: f64,
    pub amp_sin: f64,
    pub cos_re: ScalarPath,
    pub cos_im: ScalarPath,
    pub sin_re: ScalarPath,
    pub sin_im: ScalarPath,
}

/// Sampled `H(I)`-valued noise on `[0, 1)`, constant on the finest Haar cells.
#[derive(Clone, Debug)]
pub struct NoisePath<T: Real> {
    grid: TorusGrid<T>,
    modes: Vec<ModePaths>,
    fields: Vec<SpectralField<T>>,
}

/// Draws one noise path from stream `(trajectory, step)`.
pub fn sample_noise<T: Real>(spec: &HaarNoiseSpec, grid: &TorusGrid<T>, trajectory: u64, step: u64) -> Result<NoisePath<T>> {
    spec.validate()?;
    let mut rng = spec.rng(trajectory, step);
    sample_noise_with(spec, grid, &mut rng)
}

/// Draws one noise path from a caller-supplied generator.
pub fn sample_noise_with<T: Real, R: Rng + ?Sized>(spec: &HaarNoiseSpec, grid: &TorusGrid<T>, rng: &mut R) -> Result<NoisePath<T>> {
    if spec.set.dim() != grid.dim() {
        return Err(CglError::InvalidFrequencySet("noise set dimension differs from grid".into()));
    }
    let reps = spec.set.representatives();
    let mut modes = Vec::with_capacity(reps.len());
    for (i, l) in reps.iter().enumerate() {
        if !grid.contains_mode(l) {
            return Err(CglError::FrequencyOutOfBox(l.clone()));
        }
        modes.push(ModePaths {
            l: l.clone(),
            amp_cos: spec.amps_cos[i],
            amp_sin: spec.amps_sin[i],
            cos_re: sample_scalar_process(spec, rng),
            cos_im: sample_scalar_process(spec, rng),
            sin_re: sample_scalar_process(spec, rng),
            sin_im: sample_scalar_process(spec, rng),
        });
    }
    NoisePath::from_modes(grid, modes, spec.cells())
}

impl<T: Real> NoisePath<T> {
    /// Assembles the per-cell fields from explicit coefficient paths.
    pub fn from_modes(grid: &TorusGrid<T>, modes: Vec<ModePaths>, cells: usize) -> Result<Self> {
        let mut fields = Vec::with_capacity(cells);
        for c in 0..cells {
            let mut f = SpectralField::zeros(grid);
            for m in &modes {
                let a = Complex::new(T::of(m.amp_cos * m.cos_re.cells[c]), T::of(m.amp_cos * m.cos_im.cells[c]));
                let b = Complex::new(T::of(m.amp_sin * m.sin_re.cells[c]), T::of(m.amp_sin * m.sin_im.cells[c]));
                let b = if m.l.iter().all(|&x| x == 0) { Complex::new(T::zero(), T::zero()) } else { b };
                f.add_trig(&m.l, a, b)?;
            }
            fields.push(f);
        }
        Ok(Self { grid: grid.clone(), modes, fields })
    }

    pub fn grid(&self) -> &TorusGrid<T> {
        &self.grid
    }

    pub fn modes(&self) -> &[ModePaths] {
        &self.modes
    }

    pub fn cells(&self) -> usize {
        self.fields.len()
    }

    /// Field on cell `c`.
    pub fn cell_field(&self, c: usize) -> &SpectralField<T> {
        &self.fields[c]
    }

    /// Uniform mesh with `8 ×` the number of cells.
    pub fn mesh(&self) -> Vec<f64> {
        let n = 8 * self.cells();
        (0..n).map(|i| i as f64 / n as f64).collect()
    }

    /// Real coordinates of `η(t)`: for each mode, `b_c Re η_c`, `b_c Im η_c`
    /// and, when `l ≠ 0`, `b_s Re η_s`, `b_s Im η_s`.
    pub fn coordinates(&self, t: f64) -> Vec<f64> {
        let c = cell_index(t, self.cells());
        let mut out = Vec::with_capacity(4 * self.modes.len());
        for m in &self.modes {
            out.push(m.amp_cos * m.cos_re.cells[c]);
            out.push(m.amp_cos * m.cos_im.cells[c]);
            if m.l.iter().any(|&x| x != 0) {
                out.push(m.amp_sin * m.sin_re.cells[c]);
                out.push(m.amp_sin * m.sin_im.cells[c]);
            }
        }
        out
    }

    /// Largest sample modulus over all cells.
    pub fn sup_norm(&self) -> T {
        self.fields.iter().fold(T::zero(), |m, f| m.max(f.sup_norm()))
    }

    /// CSV with one row per mesh instant: `t` and the real coordinates.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        let mut header = vec!["t".to_string()];
        for m in &self.modes {
            let l = m.l.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("_");
            header.push(format!("cos_re[{l}]"));
            header.push(format!("cos_im[{l}]"));
            if m.l.iter().any(|&x| x != 0) {
                header.push(format!("sin_re[{l}]"));
                header.push(format!("sin_im[{l}]"));
            }
        }
        writeln!(w, "{}", header.join(","))?;
        for t in self.mesh() {
            let row: Vec<String> = std::iter::once(t).chain(self.coordinates(t)).map(|v| format!("{v:.16e}")).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

impl<T: Real> TimeForcing<T> for NoisePath<T> {
    fn value_at(&self, t: T) -> SpectralField<T> {
        self.fields[cell_index(t.as_f64(), self.cells())].clone()
    }

    fn breakpoints(&self, t0: T, t1: T) -> Vec<T> {
        let n = self.cells();
        (1..n).map(|c| T::of(c as f64 / n as f64)).filter(|&t| t > t0 && t < t1).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(j_max: u32) -> HaarNoiseSpec {
        HaarNoiseSpec::uniform(FrequencySet::new(1, [[0], [1]]).unwrap(), 0.7, j_max, 42)
    }

    #[test]
    fn degenerate_law_gives_zero_path() {
        let mut s = spec(3);
        s.law = ScalarLaw::Degenerate;
        let g = TorusGrid::<f64>::new(1, 16).unwrap();
        let p = sample_noise(&s, &g, 0, 0).unwrap();
        assert!((0..p.cells()).all(|c| p.cell_field(c).is_zero()));
    }

    #[test]
    fn level_zero_path_is_constant() {
        let s = spec(0);
        let mut rng = s.rng(0, 0);
        let p = sample_scalar_process(&s, &mut rng);
        assert_eq!(p.cells, vec![p.xi0]);
        assert_eq!(p.value(0.9), p.xi0);
    }

    #[test]
    fn sup_bound_holds() {
        let s = spec(5);
        let bound = s.scalar_bound();
        let mut rng = s.rng(3, 0);
        for _ in 0..1000 {
            let p = sample_scalar_process(&s, &mut rng);
            assert!(p.cells.iter().all(|v| v.abs() <= bound + 1e-12));
        }
    }

    #[test]
    fn spatial_support_and_breakpoints() {
        let s = spec(3);
        let g = TorusGrid::<f64>::new(1, 16).unwrap();
        let p = sample_noise(&s, &g, 1, 2).unwrap();
        for c in 0..p.cells() {
            assert!(p.cell_field(c).max_coeff_outside(|k| k[0].abs() <= 1) == 0.0);
        }
        assert_eq!(p.breakpoints(0.0, 1.0).len(), 7);
        assert_eq!(p.value_at(0.99), *p.cell_field(7));
        assert_eq!(p.mesh().len(), 64);
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let s = spec(2);
        let g = TorusGrid::<f64>::new(1, 16).unwrap();
        let a = sample_noise(&s, &g, 0, 1).unwrap();
        let b = sample_noise(&s, &g, 0, 1).unwrap();
        let c = sample_noise(&s, &g, 0, 2).unwrap();
        assert_eq!(a.cell_field(0), b.cell_field(0));
        assert_ne!(a.cell_field(0), c.cell_field(0));
    }

    #[test]
    fn validation() {
        let mut s = spec(2);
        s.decay = 1.0;
        assert!(s.validate().is_err());
        let mut s = spec(2);
        s.amps_cos[0] = 0.0;
        assert!(matches!(s.validate(), Err(CglError::AmplitudeNonPositive(_))));
    }
}
