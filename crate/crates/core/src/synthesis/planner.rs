use serde::{Deserialize, Serialize};

use crate::dynamics::{nonlinearity, solve, CglParams, ConstantForcing, ControlSchedule, Recording, SegmentControl, SolverConfig};
use crate::error::{CglError, Result};
use crate::saturation::{chain_nonlinear_clipped, FrequencySet, SaturationChain};
use crate::spectral::{l2_norm, sobolev_norm, LocalizationMask, SpectralField};
use crate::synthesis::decompose::decompose_target;
use crate::synthesis::plan::{ControlSegment, FieldCoefficients, SegmentKind, SynthesisPlan, TraceEntry};

/// Step-size search and recursion limits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthesisOptions {
    /// Largest window tried for any impulse or free run.
    pub delta_max: f64,
    /// Windows below this are not tried.
    pub delta_min: f64,
    /// Highest chain level used for targets.
    pub max_level: usize,
    /// First free-run length tried while holding.
    pub hold_step: f64,
    /// Shortest free run before holding is declared a failure.
    pub hold_min: f64,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        Self { delta_max: 1e-1, delta_min: 1e-12, max_level: 3, hold_step: 0.1, hold_min: 1e-4 }
    }
}

/// Segments realized from some state, with the state they lead to.
#[derive(Clone, Debug)]
pub(crate) struct Stage {
    pub segments: Vec<ControlSegment>,
    pub state: SpectralField<f64>,
    pub trace: Vec<TraceEntry>,
}

impl Stage {
    pub fn empty(state: &SpectralField<f64>) -> Self {
        Self { segments: Vec::new(), state: state.clone(), trace: Vec::new() }
    }

    pub fn duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    pub fn append(&mut self, other: Stage) {
        let offset = self.duration();
        self.segments.extend(other.segments);
        self.trace.extend(other.trace.into_iter().map(|mut e| {
            e.time += offset;
            e
        }));
        self.state = other.state;
    }

    fn mark(&mut self, label: String) {
        let time = self.duration();
        self.trace.push(TraceEntry { stage: label, time, l2_norm: l2_norm(&self.state) });
    }
}

/// Row of [`impulse_limit_probe`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub delta: f64,
    /// `H^s` distance to the limit, `None` when the run blew up.
    pub error: Option<f64>,
    pub target_norm: f64,
}

/// Runs the shifted equation for time δ with shift `δ^{-1/q} ζ` and control
/// `δ^{-1} η`, and measures the `H^s` distance to `u0 + χη − B(ζ)`.
#[allow(clippy::too_many_arguments)]
pub fn impulse_limit_probe(
    u0: &SpectralField<f64>,
    eta: &SpectralField<f64>,
    zeta: &SpectralField<f64>,
    deltas: &[f64],
    h: Option<&SpectralField<f64>>,
    params: &CglParams<f64>,
    mask: &LocalizationMask<f64>,
    config: &SolverConfig<f64>,
) -> Result<Vec<ProbeRow>> {
    if deltas.windows(2).any(|w| !(w[1] < w[0])) || deltas.iter().any(|&d| !(d > 0.0)) {
        return Err(CglError::InvalidParams("deltas must be positive and decreasing".into()));
    }
    let s = params.s as f64;
    let jump = &mask.apply(eta)? - &nonlinearity(zeta, params);
    let target = u0 + &jump;
    let target_norm = sobolev_norm(&jump, s);
    let h = h.map(|f| ConstantForcing(f.clone()));
    let q = params.q() as f64;
    deltas
        .iter()
        .map(|&delta| {
            let mut sched = ControlSchedule::new();
            sched.push(delta, SegmentControl::Constant(eta.scale(1.0 / delta)), Some(zeta.scale(delta.powf(-1.0 / q))));
            match solve(u0, &sched, h.as_ref().map(|f| f as _), params, mask, config, Recording::Final) {
                Ok(traj) => {
                    Ok(ProbeRow { delta, error: Some(sobolev_norm(&(traj.final_state() - &target), s)), target_norm })
                }
                Err(e) if e.is_numerical() => Ok(ProbeRow { delta, error: None, target_norm }),
                Err(e) => Err(e),
            }
        })
        .collect()
}

/// Builds plans by simulating each candidate stage before committing to it.
pub struct Synthesizer<'a> {
    pub(crate) params: &'a CglParams<f64>,
    pub(crate) mask: &'a LocalizationMask<f64>,
    pub(crate) unit: LocalizationMask<f64>,
    pub(crate) config: SolverConfig<f64>,
    pub(crate) h: Option<SpectralField<f64>>,
    pub(crate) chain: SaturationChain,
    pub(crate) options: SynthesisOptions,
}

impl<'a> Synthesizer<'a> {
    /// `base` spans the control space `H(I)`; it must contain the zero frequency.
    pub fn new(
        params: &'a CglParams<f64>,
        mask: &'a LocalizationMask<f64>,
        base: &FrequencySet,
        config: SolverConfig<f64>,
        options: SynthesisOptions,
    ) -> Result<Self> {
        let grid = mask.grid();
        if base.dim() != grid.dim() {
            return Err(CglError::InvalidFrequencySet("base dimension differs from grid".into()));
        }
        if let Some(k) = base.iter().find(|k| !grid.contains_mode(k)) {
            return Err(CglError::FrequencyOutOfBox(k.clone()));
        }
        if !(options.delta_min > 0.0 && options.delta_max > options.delta_min) {
            return Err(CglError::InvalidParams("need 0 < delta_min < delta_max".into()));
        }
        let chain = chain_nonlinear_clipped(base, options.max_level, params.p, Some(grid.max_mode()))?;
        Ok(Self { params, mask, unit: mask.normalized(), config, h: None, chain, options })
    }

    /// Time-independent background force `h`.
    pub fn with_background(mut self, h: SpectralField<f64>) -> Self {
        self.h = Some(h);
        self
    }

    pub fn chain(&self) -> &SaturationChain {
        &self.chain
    }

    pub(crate) fn norm(&self, u: &SpectralField<f64>) -> f64 {
        sobolev_norm(u, self.params.s as f64)
    }

    /// `χ̂^{q^level} η` with the bump normalized to maximum one.
    pub fn localized(&self, eta: &SpectralField<f64>, level: usize) -> Result<SpectralField<f64>> {
        let power = (self.params.q() as u64).pow(level as u32);
        if self.unit.is_constant() {
            return Ok(eta.clone());
        }
        self.unit.apply_power(eta, power as u32)
    }

    pub(crate) fn run(&self, u: &SpectralField<f64>, segments: &[ControlSegment]) -> Result<SpectralField<f64>> {
        let plan = SynthesisPlan {
            segments: segments.to_vec(),
            target: FieldCoefficients::default(),
            predicted_final: FieldCoefficients::default(),
            predicted_error: 0.0,
            epsilon: 0.0,
            budget: 0.0,
            level: 0,
            trace: Vec::new(),
        };
        let traj = plan.replay(u, self.h.as_ref(), self.params, self.mask, &self.config, Recording::Final)?;
        Ok(traj.final_state().clone())
    }

    fn candidates(&self, cap: f64) -> Vec<f64> {
        let mut out = Vec::new();
        let mut delta = self.options.delta_max.min(cap);
        while delta >= self.options.delta_min {
            out.push(delta);
            delta /= 10.0;
        }
        out
    }

    /// One impulse taking `u` to about `u + χ̂η`; δ shrinks by factors of ten
    /// from `min(delta_max, budget)` until the `H^s` error is below `eps`.
    pub(crate) fn impulse_stage(&self, u: &SpectralField<f64>, eta: &SpectralField<f64>, eps: f64, budget: f64) -> Result<Stage> {
        if eta.is_zero() {
            return Ok(Stage::empty(u));
        }
        let target = u + &self.localized(eta, 0)?;
        let mut best = f64::INFINITY;
        let mut last_err = None;
        for delta in self.candidates(budget) {
            let seg = ControlSegment::impulse(eta, delta);
            match self.run(u, std::slice::from_ref(&seg)) {
                Ok(state) => {
                    let err = self.norm(&(&state - &target));
                    best = best.min(err);
                    if err < eps {
                        let mut stage = Stage { segments: vec![seg], state, trace: Vec::new() };
                        stage.mark(format!("impulse delta={delta:e}"));
                        return Ok(stage);
                    }
                }
                Err(e) if e.is_numerical() => last_err = Some(e),
                Err(e) => return Err(e),
            }
        }
        match last_err {
            Some(e) if best.is_infinite() => Err(e),
            _ => Err(CglError::ToleranceUnreachable { tolerance: eps, best }),
        }
    }

    /// Single impulse from `u0` towards `u0 + χ̂η`.
    pub fn attain_step0(&self, u0: &SpectralField<f64>, eta: &SpectralField<f64>, eps: f64) -> Result<SynthesisPlan> {
        let stage = self.impulse_stage(u0, eta, eps, self.options.delta_max)?;
        let target = u0 + &self.localized(eta, 0)?;
        self.finish(stage, &target, eps, self.options.delta_max, 0)
    }

    /// Realizes `u + χ̂^{q^level} η` for `η` in the span of chain level `level`.
    pub(crate) fn attain_stage(
        &self,
        u: &SpectralField<f64>,
        level: usize,
        eta: &SpectralField<f64>,
        eps: f64,
        budget: f64,
    ) -> Result<Stage> {
        if eta.is_zero() {
            return Ok(Stage::empty(u));
        }
        if level == 0 {
            return self.impulse_stage(u, eta, eps, budget);
        }
        // moving by −χ̂^{q^N} B(ζ) per maneuver, so decompose −η
        let dec = decompose_target(&(-eta), &self.chain, level, self.params)?;
        let n = dec.zetas.len();
        let target = u + &self.localized(eta, level)?;
        let mut stage = Stage::empty(u);
        let mut remaining = budget;
        for (i, zeta) in dec.zetas.iter().enumerate() {
            let share = remaining / 2.0;
            let m = self.maneuver(&stage.state, level, zeta, eps / n as f64, share)?;
            remaining -= m.duration();
            stage.append(m);
            stage.mark(format!("level {level} term {}/{n}", i + 1));
        }
        let err = self.norm(&(&stage.state - &target));
        if err >= eps {
            return Err(CglError::ToleranceUnreachable { tolerance: eps, best: err });
        }
        Ok(stage)
    }

    /// Add the shift `δ^{-1/q} χ̂^{q^{N-1}} ζ`, run freely for δ, remove the shift:
    /// the net effect is about `−χ̂^{q^N} B(ζ)`.
    fn maneuver(&self, u: &SpectralField<f64>, level: usize, zeta: &SpectralField<f64>, eps: f64, budget: f64) -> Result<Stage> {
        let q = self.params.q() as f64;
        let predicted = u - &self.localized(&nonlinearity(zeta, self.params), level)?;
        let mut best = f64::INFINITY;
        let mut last_err = None;
        for delta in self.candidates(budget / 3.0) {
            let shift = zeta.scale(delta.powf(-1.0 / q));
            let attempt = (|| -> Result<Stage> {
                let mut stage = self.attain_stage(u, level - 1, &shift, eps / 4.0, delta)?;
                let free = ControlSegment::free_run(delta);
                let state = self.run(&stage.state, std::slice::from_ref(&free))?;
                stage.append(Stage { segments: vec![free], state, trace: Vec::new() });
                let back = self.attain_stage(&stage.state, level - 1, &(-&shift), eps / 4.0, delta)?;
                stage.append(back);
                Ok(stage)
            })();
            match attempt {
                Ok(stage) => {
                    let err = self.norm(&(&stage.state - &predicted));
                    best = best.min(err);
                    if err < eps {
                        return Ok(stage);
                    }
                }
                Err(CglError::ToleranceUnreachable { best: b, .. }) => best = best.min(b),
                Err(e) if e.is_numerical() => last_err = Some(e),
                Err(e) => return Err(e),
            }
        }
        match last_err {
            Some(e) if best.is_infinite() => Err(e),
            _ => Err(CglError::ToleranceUnreachable { tolerance: eps, best }),
        }
    }

    /// Plan from `u0` to about `u0 + χ̂^{q^N} η`, `η` in the span of chain level `N`.
    pub fn attain_recursive(
        &self,
        u0: &SpectralField<f64>,
        level: usize,
        eta: &SpectralField<f64>,
        eps: f64,
        budget: f64,
    ) -> Result<SynthesisPlan> {
        if level >= self.chain.levels.len() {
            return Err(CglError::InvalidParams(format!("level {level} above max_level {}", self.options.max_level)));
        }
        let stage = self.attain_stage(u0, level, eta, eps, budget)?;
        let target = u0 + &self.localized(eta, level)?;
        self.finish(stage, &target, eps, budget, level)
    }

    pub(crate) fn finish(
        &self,
        stage: Stage,
        target: &SpectralField<f64>,
        eps: f64,
        budget: f64,
        level: usize,
    ) -> Result<SynthesisPlan> {
        let duration = stage.duration();
        if duration > budget {
            return Err(CglError::BudgetExceeded { budget, needed: duration });
        }
        let err = self.norm(&(&stage.state - target));
        if err >= eps {
            return Err(CglError::ToleranceUnreachable { tolerance: eps, best: err });
        }
        debug_assert!(stage.segments.iter().all(|s| !matches!(s.kind, SegmentKind::ShiftedRun { .. })));
        Ok(SynthesisPlan {
            segments: stage.segments,
            target: FieldCoefficients::from_field(target),
            predicted_final: FieldCoefficients::from_field(&stage.state),
            predicted_error: err,
            epsilon: eps,
            budget,
            level,
            trace: stage.trace,
        })
    }
}
