use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{CglError, Result};
use crate::linalg::lstsq;
use crate::saturation::{complex_trig_basis, lattice_closure, FrequencySet};
use crate::spectral::{l2_norm, project_subspace, SpectralField};
use crate::synthesis::plan::{ControlSegment, SynthesisPlan, TraceEntry};
use crate::synthesis::planner::{Stage, Synthesizer};

/// Errors of a replayed steering plan relative to the interior 𝒪 of the plateau.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SteeringReport {
    pub level: usize,
    /// `‖u_T − u1‖_{L²(𝒪)}`.
    pub interior_error: f64,
    /// `‖u_T − u0‖_{L²(𝒪^c)}`.
    pub exterior_change: f64,
    pub target_norm: f64,
    pub total_time: f64,
}

impl Synthesizer<'_> {
    /// Element of chain level `level` closest to `target` on 𝒪, with its discrete `L²(𝒪)` misfit.
    pub fn fit_on_interior(&self, target: &SpectralField<f64>, level: usize) -> Result<(SpectralField<f64>, f64)> {
        let grid = self.mask.grid();
        let inside: Vec<usize> = (0..grid.len()).filter(|&i| self.mask.interior()[i]).collect();
        if inside.is_empty() {
            return Err(CglError::EmptyInterior);
        }
        let level_set = self.chain.level(level).ok_or_else(|| CglError::InvalidParams(format!("no chain level {level}")))?;
        let basis = complex_trig_basis(grid, level_set, true)?;
        let rows = 2 * inside.len();
        let mut a = DMatrix::zeros(rows, basis.len());
        for (col, f) in basis.iter().enumerate() {
            let phys = f.physical();
            for (r, &i) in inside.iter().enumerate() {
                a[(2 * r, col)] = phys[i].re;
                a[(2 * r + 1, col)] = phys[i].im;
            }
        }
        let phys = target.physical();
        let b = DVector::from_iterator(rows, inside.iter().flat_map(|&i| [phys[i].re, phys[i].im]));
        let (x, rel) = lstsq(&a, &b, 1e-12);
        let mut eta = SpectralField::zeros(grid);
        for (c, f) in x.iter().zip(&basis) {
            eta.axpy(*c, f);
        }
        let misfit = rel * b.norm() * grid.cell_volume().sqrt();
        Ok((eta, misfit))
    }

    /// Steers `u0` towards `u1` on the plateau interior 𝒪 within time `budget`.
    ///
    /// The lowest chain level whose span matches `u1 − u0` on 𝒪 to within `eps/2`
    /// is chosen, and the attained state is `u0 + χ̂^{q^N} η`, which agrees with
    /// `u1` on 𝒪 because `χ̂ = 1` there.
    pub fn steer_indicator(
        &self,
        u0: &SpectralField<f64>,
        u1: &SpectralField<f64>,
        eps: f64,
        budget: f64,
    ) -> Result<SynthesisPlan> {
        let diff = u1 - u0;
        let mut best = (0, f64::INFINITY);
        let mut chosen = None;
        for level in 0..self.chain.levels.len() {
            let (eta, misfit) = self.fit_on_interior(&diff, level)?;
            if misfit < best.1 {
                best = (level, misfit);
            }
            if misfit < eps / 2.0 {
                chosen = Some((level, eta));
                break;
            }
        }
        let Some((level, eta)) = chosen else {
            return Err(CglError::SaturationInsufficient { level: best.0, residual: best.1 });
        };
        if eta.is_zero() {
            return self.finish(Stage::empty(u0), u0, eps / 2.0, budget, level);
        }
        self.attain_recursive(u0, level, &eta, eps / 2.0, budget)
    }

    /// Interior error and exterior change of a final state.
    pub fn steering_report(
        &self,
        plan: &SynthesisPlan,
        u0: &SpectralField<f64>,
        u1: &SpectralField<f64>,
        final_state: &SpectralField<f64>,
    ) -> SteeringReport {
        let m = self.mask;
        SteeringReport {
            level: plan.level,
            interior_error: m.restricted_l2(&(final_state - u1), true),
            exterior_change: m.restricted_l2(&(final_state - u0), false),
            target_norm: l2_norm(u1),
            total_time: plan.total_time(),
        }
    }

    /// Lowest level whose projection of `target` is within `tol` in `H^s`.
    fn project_to_level(&self, target: &SpectralField<f64>, tol: f64) -> Result<(usize, SpectralField<f64>)> {
        let mut best = (0, f64::INFINITY);
        for (level, set) in self.chain.levels.iter().enumerate() {
            let eta = project_subspace(target, set)?;
            let miss = self.norm(&(target - &eta));
            if miss < tol {
                return Ok((level, eta));
            }
            if miss < best.1 {
                best = (level, miss);
            }
        }
        Err(CglError::SaturationInsufficient { level: best.0, residual: best.1 })
    }

    fn resteer(&self, u: &SpectralField<f64>, u1: &SpectralField<f64>, eps: f64, budget: f64) -> Result<Stage> {
        let (level, eta) = self.project_to_level(&(u1 - u), eps / 2.0)?;
        self.attain_stage(u, level, &eta, eps / 2.0, budget)
    }

    /// Steers `u0` to within `eps` of `u1` in `H^s` at exactly time `horizon`
    /// (χ ≡ 1): small-time steering, then free runs that stay in the ball of
    /// radius `eps/2` around `u1`, each followed by re-steering.
    pub fn steer_full(&self, u0: &SpectralField<f64>, u1: &SpectralField<f64>, eps: f64, horizon: f64) -> Result<SynthesisPlan> {
        if !self.mask.is_constant() {
            return Err(CglError::InvalidParams("full-space steering needs a constant mask".into()));
        }
        let radius = eps / 2.0;
        let tight = eps / 4.0;
        let mut stage = Stage::empty(u0);
        if self.norm(&(u0 - u1)) >= tight {
            stage = self.resteer(u0, u1, tight, horizon / 10.0)?;
            stage.trace.push(TraceEntry {
                stage: "initial steering".into(),
                time: stage.duration(),
                l2_norm: l2_norm(&stage.state),
            });
        }
        let mut tau = self.options.hold_step;
        loop {
            let elapsed = stage.duration();
            let remaining = horizon - elapsed;
            if remaining <= 0.0 {
                return Err(CglError::BudgetExceeded { budget: horizon, needed: elapsed });
            }
            // a free run to the end is enough once it stays inside the ball
            let to_end = ControlSegment::free_run(remaining);
            let end = self.run(&stage.state, std::slice::from_ref(&to_end))?;
            if self.norm(&(&end - u1)) < radius {
                stage.append(Stage { segments: vec![to_end], state: end, trace: Vec::new() });
                break;
            }
            let (run, state) = loop {
                let len = tau.min(remaining / 2.0);
                let seg = ControlSegment::free_run(len);
                let state = self.run(&stage.state, std::slice::from_ref(&seg))?;
                if self.norm(&(&state - u1)) < radius {
                    break (seg, state);
                }
                tau /= 2.0;
                if tau < self.options.hold_min {
                    return Err(CglError::HoldFailure(format!("free runs shorter than {} leave the ball", self.options.hold_min)));
                }
            };
            stage.append(Stage { segments: vec![run], state, trace: Vec::new() });
            let left = horizon - stage.duration();
            let back = self.resteer(&stage.state, u1, tight, left / 10.0)?;
            stage.append(back);
            stage.trace.push(TraceEntry {
                stage: "re-steer".into(),
                time: stage.duration(),
                l2_norm: l2_norm(&stage.state),
            });
        }
        let mut plan = self.finish(stage, u1, eps, horizon, 0)?;
        plan.level = self.project_to_level(&(u1 - u0), tight).map(|(l, _)| l).unwrap_or(0);
        Ok(plan)
    }
}

/// `L²` norm of the part of `u` at frequencies outside the lattice generated by `base`.
pub fn spectral_leak(u: &SpectralField<f64>, base: &FrequencySet) -> f64 {
    max_leak([u], base)
}

/// Largest [`spectral_leak`] over a sequence of states.
pub fn max_leak<'a>(states: impl IntoIterator<Item = &'a SpectralField<f64>>, base: &FrequencySet) -> f64 {
    let mut states = states.into_iter().peekable();
    let Some(grid) = states.peek().map(|u| u.grid().clone()) else { return 0.0 };
    let inside = lattice_closure(base, grid.max_mode()).signed();
    states
        .map(|u| l2_norm(&u.map_coeffs(|flat, c| if inside.contains(&grid.mode_of(flat)) { Complex::new(0.0, 0.0) } else { c })))
        .fold(0.0, f64::max)
}
