use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CglError, Result};
use crate::linalg::singular_values;
use crate::linearized::context::LinearizationContext;
use crate::linearized::duhamel::solve_linearized_from;
use crate::saturation::{complex_trig_basis, FrequencySet};
use crate::scalar::Real;
use crate::spectral::{real_inner_product, SpectralField};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModeResponse {
    pub mode: Vec<i64>,
    /// Frobenius norm of the rows probing this frequency.
    pub norm: f64,
}

/// Probe-restricted image of the Duhamel operator.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GramianReport {
    pub rows: usize,
    pub columns: usize,
    pub slots: usize,
    /// Decreasing singular values of the response matrix.
    pub singular_values: Vec<f64>,
    /// Smallest singular value; zero when there are fewer controls than probe directions.
    pub sigma_min: f64,
    pub mode_responses: Vec<ModeResponse>,
    #[serde(skip)]
    pub matrix: Vec<Vec<f64>>,
}

impl GramianReport {
    /// `R Rᵀ` for the response matrix `R`.
    pub fn gram(&self) -> DMatrix<f64> {
        let r = self.response();
        &r * r.transpose()
    }

    pub fn response(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.columns, |i, j| self.matrix[i][j])
    }
}

/// Responses `A_T g` for controls `g` = (slot indicator / √τ) × (unit real basis element of `H(control)`).
pub(crate) fn control_responses<T: Real>(
    ctx: &LinearizationContext<T>,
    control: &FrequencySet,
    slots: usize,
) -> Result<Vec<SpectralField<T>>> {
    let steps = ctx.steps();
    if slots == 0 || !steps.is_multiple_of(slots) {
        return Err(CglError::InvalidParams(format!("{slots} slots do not divide {steps} steps")));
    }
    let per = steps / slots;
    let tau = ctx.dt() * T::of_usize(per);
    let scale = T::one() / tau.sqrt();
    let basis = complex_trig_basis(ctx.grid(), control, true)?;
    let jobs: Vec<(usize, usize)> = (0..slots).flat_map(|s| (0..basis.len()).map(move |b| (s, b))).collect();
    jobs.par_iter()
        .map(|&(s, b)| {
            let g: Vec<Option<SpectralField<T>>> =
                (0..steps).map(|n| if n / per == s { Some(basis[b].scale(scale)) } else { None }).collect();
            solve_linearized_from(ctx, &g, s * per)
        })
        .collect()
}

/// Projections of `A_T g` onto the unit real basis of `H(probe)` for the
/// control family of [`control_responses`]; singular values and per-mode norms.
pub fn gramian<T: Real>(
    ctx: &LinearizationContext<T>,
    control: &FrequencySet,
    slots: usize,
    probe: &FrequencySet,
) -> Result<GramianReport> {
    let grid = ctx.grid();
    if let Some(bad) = probe.iter().find(|k| !grid.contains_mode(k)) {
        return Err(CglError::FrequencyOutOfBox(bad.clone()));
    }
    let responses = control_responses(ctx, control, slots)?;
    let reps = probe.representatives();
    let mut rows = Vec::new();
    let mut owners = Vec::new();
    for l in reps.iter() {
        let single = FrequencySet::new(grid.dim(), [l.clone()])?;
        for e in complex_trig_basis(grid, &single, true)? {
            rows.push(e);
            owners.push(l.clone());
        }
    }
    let matrix: Vec<Vec<f64>> = rows
        .iter()
        .map(|e| responses.iter().map(|v| real_inner_product(v, e).map(|x| x.as_f64())).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let r = DMatrix::from_fn(rows.len(), responses.len(), |i, j| matrix[i][j]);
    let sv = singular_values(&r);
    let sigma_min = if responses.len() < rows.len() { 0.0 } else { sv.last().copied().unwrap_or(0.0) };
    let mode_responses = reps
        .iter()
        .map(|l| {
            let norm = owners
                .iter()
                .zip(&matrix)
                .filter(|(o, _)| *o == l)
                .flat_map(|(_, row)| row.iter().map(|x| x * x))
                .sum::<f64>()
                .sqrt();
            ModeResponse { mode: l.clone(), norm }
        })
        .collect();
    Ok(GramianReport { rows: rows.len(), columns: responses.len(), slots, singular_values: sv, sigma_min, mode_responses, matrix })
}

/// Largest response at frequency `l` relative to the largest response overall,
/// over the control family of [`gramian`]. Zero when every response vanishes.
pub fn obstruction_check<T: Real>(
    ctx: &LinearizationContext<T>,
    control: &FrequencySet,
    slots: usize,
    l: &[i64],
) -> Result<f64> {
    let grid = ctx.grid();
    if !grid.contains_mode(l) {
        return Err(CglError::FrequencyOutOfBox(l.to_vec()));
    }
    let responses = control_responses(ctx, control, slots)?;
    let single = FrequencySet::new(grid.dim(), [l.to_vec()])?;
    let probes = complex_trig_basis(grid, &single, true)?;
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for v in &responses {
        scale = scale.max(crate::spectral::l2_norm(v).as_f64());
        let mut s = 0.0;
        for e in &probes {
            s += real_inner_product(v, e)?.as_f64().abs();
        }
        worst = worst.max(s);
    }
    Ok(if scale == 0.0 { 0.0 } else { worst / scale })
}
