use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{CglError, Result};
use crate::mixing::ensemble::Ensemble;
use crate::saturation::FrequencySet;
use crate::spectral::SpectralField;

/// `Re` or `Im` of the coefficient at one frequency.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coordinate {
    pub k: Vec<i64>,
    pub imaginary: bool,
}

impl Coordinate {
    fn eval(&self, u: &SpectralField<f64>) -> f64 {
        let c = u.coeff(&self.k);
        if self.imaginary {
            c.im
        } else {
            c.re
        }
    }

    /// Lipschitz constant of the coordinate with respect to the `H¹` distance.
    fn lipschitz(&self, d: usize) -> f64 {
        let ksq: i64 = self.k.iter().map(|x| x * x).sum();
        1.0 / ((2.0 * PI).powf(d as f64 / 2.0) * (1.0 + ksq as f64).sqrt())
    }
}

fn clamp1(x: f64) -> f64 {
    x.clamp(-1.0, 1.0)
}

/// Shapes of bounded-Lipschitz test functions; each is later scaled by `weight`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestShape {
    /// `clamp((x − offset) · slope)`.
    ClampedAffine { coord: Coordinate, offset: f64, slope: f64 },
    /// `min(1, slope · |(x_re, x_im) − center|)` at one frequency.
    Radial { re: Coordinate, im: Coordinate, center: [f64; 2], slope: f64 },
    /// Product of two clamped affine factors.
    Product { a: Coordinate, b: Coordinate, offsets: [f64; 2], slopes: [f64; 2] },
}

/// A test function `weight · shape` with `‖f‖_∞ + Lip(f) ≤ bound`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub shape: TestShape,
    pub weight: f64,
    /// Certified `‖f‖_∞ + Lip(f)`.
    pub bound: f64,
}

impl TestFunction {
    /// Scales `shape` so that its sup norm plus Lipschitz constant is one.
    pub fn new(shape: TestShape, d: usize) -> Self {
        // sup and Lipschitz constant of the unweighted shape
        let (sup, lip) = match &shape {
            TestShape::ClampedAffine { coord, slope, .. } => (1.0, slope * coord.lipschitz(d)),
            TestShape::Radial { re, im, slope, .. } => (1.0, slope * re.lipschitz(d).max(im.lipschitz(d))),
            TestShape::Product { a, b, slopes, .. } => (1.0, slopes[0] * a.lipschitz(d) + slopes[1] * b.lipschitz(d)),
        };
        let weight = 1.0 / (sup + lip);
        Self { shape, weight, bound: weight * (sup + lip) }
    }

    pub fn eval(&self, u: &SpectralField<f64>) -> f64 {
        let v = match &self.shape {
            TestShape::ClampedAffine { coord, offset, slope } => clamp1((coord.eval(u) - offset) * slope),
            TestShape::Radial { re, im, center, slope } => {
                let dx = re.eval(u) - center[0];
                let dy = im.eval(u) - center[1];
                (slope * dx.hypot(dy)).min(1.0)
            }
            TestShape::Product { a, b, offsets, slopes } => {
                clamp1((a.eval(u) - offsets[0]) * slopes[0]) * clamp1((b.eval(u) - offsets[1]) * slopes[1])
            }
        };
        self.weight * v
    }
}

/// Finite family of test functions of norm at most one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestFunctionDictionary {
    pub entries: Vec<TestFunction>,
}

impl TestFunctionDictionary {
    pub fn new(entries: Vec<TestFunction>) -> Result<Self> {
        if entries.is_empty() {
            return Err(CglError::InvalidParams("test function dictionary is empty".into()));
        }
        if let Some(f) = entries.iter().find(|f| f.bound > 1.0 + 1e-12) {
            return Err(CglError::InvalidParams(format!("test function with norm bound {} > 1", f.bound)));
        }
        Ok(Self { entries })
    }

    /// 64 entries built on the lowest `modes` frequencies and scaled to the
    /// bounding box of the coordinates visited by `ensembles`: 40 clamped affine
    /// functions (four offsets per coordinate), 10 radial functions (two radii
    /// per frequency) and 14 products of neighbouring coordinates.
    pub fn standard(ensembles: &[&Ensemble], modes: usize) -> Result<Self> {
        let first = ensembles.first().ok_or_else(|| CglError::InvalidParams("no ensembles".into()))?;
        let grid = first.members()[0].grid();
        let d = grid.dim();
        let mut freqs: Vec<Vec<i64>> = grid
            .modes()
            .into_iter()
            .map(|(_, k)| k)
            .filter(|k| *k == FrequencySet::canonical(k))
            .collect();
        freqs.sort_by_key(|k| (k.iter().map(|x| x * x).sum::<i64>(), k.clone()));
        freqs.dedup();
        freqs.truncate(modes);
        if freqs.is_empty() {
            return Err(CglError::InvalidParams("need at least one probe mode".into()));
        }
        let coords: Vec<Coordinate> = freqs
            .iter()
            .flat_map(|k| [Coordinate { k: k.clone(), imaginary: false }, Coordinate { k: k.clone(), imaginary: true }])
            .collect();
        // bounding box of every visited coordinate
        let boxes: Vec<(f64, f64)> = coords
            .iter()
            .map(|c| {
                let (lo, hi) = ensembles
                    .iter()
                    .flat_map(|e| e.members())
                    .map(|u| c.eval(u))
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
                let center = 0.5 * (lo + hi);
                let half = (0.5 * (hi - lo)).max(1e-6);
                (center, half)
            })
            .collect();
        let mut entries = Vec::with_capacity(64);
        for (c, &(center, half)) in coords.iter().zip(&boxes) {
            for shift in [-0.5, 0.0, 0.5, 1.0] {
                let shape = TestShape::ClampedAffine { coord: c.clone(), offset: center + shift * half, slope: 1.0 / half };
                entries.push(TestFunction::new(shape, d));
            }
        }
        for (j, pair) in coords.chunks(2).enumerate() {
            let (re, im) = (&pair[0], &pair[1]);
            let center = [boxes[2 * j].0, boxes[2 * j + 1].0];
            let half = boxes[2 * j].1.max(boxes[2 * j + 1].1);
            for radius in [0.5, 1.0] {
                let shape = TestShape::Radial { re: re.clone(), im: im.clone(), center, slope: 1.0 / (radius * half) };
                entries.push(TestFunction::new(shape, d));
            }
        }
        let n = coords.len();
        let pairs = (0..n.saturating_sub(1)).map(|i| (i, i + 1)).chain((0..n.saturating_sub(2)).map(|i| (i, i + 2)));
        for (i, j) in pairs.take(14) {
            let shape = TestShape::Product {
                a: coords[i].clone(),
                b: coords[j].clone(),
                offsets: [boxes[i].0, boxes[j].0],
                slopes: [1.0 / boxes[i].1, 1.0 / boxes[j].1],
            };
            entries.push(TestFunction::new(shape, d));
        }
        Self::new(entries)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Largest certified `‖f‖_∞ + Lip(f)` over the entries.
    pub fn certified_norm(&self) -> f64 {
        self.entries.iter().map(|f| f.bound).fold(0.0, f64::max)
    }
}

fn mean(f: &TestFunction, members: &[SpectralField<f64>]) -> f64 {
    // fixed-order summation keeps the estimate reproducible
    members.iter().map(|u| f.eval(u)).sum::<f64>() / members.len() as f64
}

/// `max_f |E_a f − E_b f|` over the dictionary, a lower bound for the
/// dual-Lipschitz distance between the empirical laws of `a` and `b`.
pub fn dual_lipschitz_estimate(a: &Ensemble, b: &Ensemble, dict: &TestFunctionDictionary) -> Result<f64> {
    Ok(entry_differences(a, b, dict)?.into_iter().fold(0.0, f64::max))
}

/// `|E_a f − E_b f|` for every entry, in dictionary order.
pub fn entry_differences(a: &Ensemble, b: &Ensemble, dict: &TestFunctionDictionary) -> Result<Vec<f64>> {
    if a.members()[0].grid() != b.members()[0].grid() {
        return Err(CglError::GridMismatch);
    }
    Ok(dict.entries.iter().map(|f| (mean(f, a.members()) - mean(f, b.members())).abs()).collect())
}
