use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{CglError, Result};
use crate::linalg::singular_values;
use crate::noise::path::NoisePath;
use crate::scalar::Real;

/// Outcome of the finite-ansatz observability test. A positive `sigma_min`
/// is evidence, not proof, that the sampled path admits no annihilator.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ObservabilityReport {
    pub label: &'static str,
    pub horizon: f64,
    pub nodes: usize,
    pub coordinates: usize,
    pub unknowns: usize,
    pub constraints: usize,
    pub sigma_min: f64,
    pub sigma_max: f64,
    /// `sigma_min / sigma_max` above `1e-8`.
    pub observable_evidence: bool,
}

/// Hat function `k` of a uniform mesh with `nodes` nodes on `[0, horizon]`.
fn hat(k: usize, nodes: usize, horizon: f64, t: f64) -> f64 {
    let h = horizon / (nodes - 1) as f64;
    (1.0 - ((t - k as f64 * h) / h).abs()).max(0.0)
}

/// Smallest singular value of `(α, β) ↦ Σ_l a_l(t) ζ^l(t) − b(t)` sampled on
/// the path's mesh in `[0, horizon]`, with `a_l`, `b` continuous piecewise
/// linear on `nodes` uniform nodes and `ζ^l` the real coordinates of the path.
pub fn observability_diagnostic<T: Real>(path: &NoisePath<T>, horizon: f64, nodes: usize) -> Result<ObservabilityReport> {
    if !(horizon > 0.0 && horizon <= 1.0) {
        return Err(CglError::InvalidParams("horizon must lie in (0, 1]".into()));
    }
    if nodes < 2 {
        return Err(CglError::InvalidParams("ansatz needs at least two nodes".into()));
    }
    let samples: Vec<f64> = path.mesh().into_iter().map(|t| t + 0.5 / (8 * path.cells()) as f64).filter(|&t| t < horizon).collect();
    let coords: Vec<Vec<f64>> = samples.iter().map(|&t| path.coordinates(t)).collect();
    let nc = coords.first().map_or(0, |c| c.len());
    let unknowns = (nc + 1) * nodes;
    let weight = (horizon / samples.len().max(1) as f64).sqrt();
    let mut a = DMatrix::zeros(samples.len(), unknowns);
    for (row, (&t, z)) in samples.iter().zip(&coords).enumerate() {
        for k in 0..nodes {
            let phi = hat(k, nodes, horizon, t) * weight;
            if phi == 0.0 {
                continue;
            }
            for (l, &zl) in z.iter().enumerate() {
                a[(row, l * nodes + k)] = phi * zl;
            }
            a[(row, nc * nodes + k)] = -phi;
        }
    }
    let s = singular_values(&a);
    let sigma_max = s.first().copied().unwrap_or(0.0);
    // a wide matrix has a nontrivial kernel
    let sigma_min = if samples.len() < unknowns { 0.0 } else { s.last().copied().unwrap_or(0.0) };
    Ok(ObservabilityReport {
        label: "evidence",
        horizon,
        nodes,
        coordinates: nc,
        unknowns,
        constraints: samples.len(),
        sigma_min,
        sigma_max,
        observable_evidence: sigma_max > 0.0 && sigma_min > 1e-8 * sigma_max,
    })
}
