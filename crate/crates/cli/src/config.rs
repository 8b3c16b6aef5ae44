use std::fmt;
use std::path::PathBuf;

use cgl_core::dynamics::{CglParams, SolverConfig};
use cgl_core::mixing::Coupling;
use cgl_core::noise::{HaarNoiseSpec, ScalarLaw};
use cgl_core::saturation::{ChainKind, FrequencySet};
use cgl_core::spectral::{LocalizationMask, MaskProfile, SpectralField, TorusGrid};
use cgl_core::synthesis::SynthesisOptions;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

/// One experiment: model, discretization, noise and the per-command blocks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub out: PathBuf,
    pub params: ParamsSection,
    pub grid: GridSection,
    pub mask: MaskProfile,
    pub solver: SolverSection,
    pub noise: NoiseSection,
    pub saturate: SaturateSection,
    pub solve: SolveSection,
    pub probe_limit: ProbeLimitSection,
    pub steer: SteerSection,
    pub gramian: GramianSection,
    pub mix: MixSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            out: PathBuf::from("cgl-out"),
            params: ParamsSection::default(),
            grid: GridSection::default(),
            mask: MaskProfile::constant(),
            solver: SolverSection::default(),
            noise: NoiseSection::default(),
            saturate: SaturateSection::default(),
            solve: SolveSection::default(),
            probe_limit: ProbeLimitSection::default(),
            steer: SteerSection::default(),
            gramian: GramianSection::default(),
            mix: MixSection::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsSection {
    pub nu: f64,
    pub gamma: f64,
    pub c: f64,
    pub p: u32,
    pub d: usize,
    pub s: u32,
}

impl Default for ParamsSection {
    fn default() -> Self {
        Self { nu: 0.1, gamma: 0.1, c: 1.0, p: 1, d: 1, s: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    /// Points per dimension.
    pub n: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { n: 64 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub dt_max: f64,
    pub blowup_threshold: f64,
    pub forcing_cap: f64,
    pub nonlinear_cap: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        let c = SolverConfig::<f64>::default();
        Self { dt_max: c.dt_max, blowup_threshold: c.blowup_threshold, forcing_cap: c.forcing_cap, nonlinear_cap: c.nonlinear_cap }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSection {
    /// Forced frequencies; `{0, e_1, ..., e_d}` when absent.
    pub modes: Option<Vec<Vec<i64>>>,
    /// Amplitude used for every mode unless the lists below are given.
    pub amplitude: f64,
    pub amps_cos: Option<Vec<f64>>,
    pub amps_sin: Option<Vec<f64>>,
    pub decay: f64,
    pub law: ScalarLaw,
    pub j_max: u32,
    pub m_max: Option<u64>,
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self { modes: None, amplitude: 1.0, amps_cos: None, amps_sin: None, decay: 2.0, law: ScalarLaw::default(), j_max: 3, m_max: None }
    }
}

/// Term `a · b_k(x)` of a field, with `a = re + i im`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub mode: Vec<i64>,
    #[serde(default)]
    pub kind: TermKind,
    #[serde(default = "one")]
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermKind {
    /// `cos<k,x>`.
    #[default]
    Cos,
    /// `sin<k,x>`.
    Sin,
    /// `e^{i<k,x>}`.
    Exp,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainChoice {
    #[default]
    Linear,
    Nonlinear,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SaturateSection {
    /// `{0, e_1, ..., e_d}` when absent.
    pub base: Option<Vec<Vec<i64>>>,
    pub levels: usize,
    pub chain: ChainChoice,
    /// Run the least-squares density diagnostic on the plateau interior.
    pub diagnostic: bool,
    /// Box radius of the lattice-closure cross-check.
    pub oracle_radius: i64,
}

impl Default for SaturateSection {
    fn default() -> Self {
        Self { base: None, levels: 4, chain: ChainChoice::Linear, diagnostic: true, oracle_radius: 5 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordChoice {
    #[default]
    Steps,
    Final,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveSection {
    pub time: f64,
    /// `cos x_1` when absent.
    pub initial: Option<Vec<Term>>,
    /// Time-independent forcing.
    pub forcing: Vec<Term>,
    pub record: RecordChoice,
    /// Instants at which binary field snapshots are written.
    pub snapshots: Vec<f64>,
}

impl Default for SolveSection {
    fn default() -> Self {
        Self {
            time: 1.0,
            initial: None,
            forcing: Vec::new(),
            record: RecordChoice::Steps,
            snapshots: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeLimitSection {
    pub initial: Vec<Term>,
    /// `cos x_1` when absent.
    pub eta: Option<Vec<Term>>,
    pub zeta: Vec<Term>,
    pub forcing: Vec<Term>,
    pub deltas: Vec<f64>,
}

impl Default for ProbeLimitSection {
    fn default() -> Self {
        Self {
            initial: Vec::new(),
            eta: None,
            zeta: Vec::new(),
            forcing: Vec::new(),
            deltas: vec![1e-1, 1e-2, 1e-3],
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SteerMode {
    /// Match the target on the plateau interior, leave the rest unchanged.
    #[default]
    Indicator,
    /// Reach the target in the whole space at exactly `time` (constant mask).
    Full,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SteerSection {
    pub mode: SteerMode,
    pub base: Option<Vec<Vec<i64>>>,
    pub initial: Vec<Term>,
    /// Required.
    pub target: Option<Vec<Term>>,
    pub eps: f64,
    /// Time budget (indicator) or exact horizon (full).
    pub time: f64,
    /// Time-independent background forcing.
    pub background: Vec<Term>,
    pub delta_max: f64,
    pub delta_min: f64,
    pub max_level: usize,
    pub hold_step: f64,
    pub hold_min: f64,
}

impl Default for SteerSection {
    fn default() -> Self {
        let o = SynthesisOptions::default();
        Self {
            mode: SteerMode::Indicator,
            base: None,
            initial: Vec::new(),
            target: None,
            eps: 0.05,
            time: 1.0,
            background: Vec::new(),
            delta_max: o.delta_max,
            delta_min: o.delta_min,
            max_level: o.max_level,
            hold_step: o.hold_step,
            hold_min: o.hold_min,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GramianSection {
    pub base: Option<Vec<Vec<i64>>>,
    /// Probed frequencies; every `k` with `0 ≤ k_i ≤ min(4, n/2 − 1)` when absent.
    pub probe: Option<Vec<Vec<i64>>>,
    /// `1 + cos x_1 + 0.5i sin x_1` when absent.
    pub initial: Option<Vec<Term>>,
    pub background: Vec<Term>,
    pub time: f64,
    pub steps: usize,
    /// Piecewise-constant control slots per control mode.
    pub slots: usize,
    /// Frequencies whose response norm is reported separately.
    pub obstruction_modes: Vec<Vec<i64>>,
}

impl Default for GramianSection {
    fn default() -> Self {
        Self {
            base: None,
            probe: None,
            initial: None,
            background: Vec::new(),
            time: 1.0,
            steps: 80,
            slots: 8,
            obstruction_modes: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MixSection {
    pub initial_a: Vec<Term>,
    /// `0.5 (1 + cos x_1)` when absent.
    pub initial_b: Option<Vec<Term>>,
    pub members: usize,
    pub steps: usize,
    pub coupling: Coupling,
}

impl Default for MixSection {
    fn default() -> Self {
        Self {
            initial_a: Vec::new(),
            initial_b: None,
            members: 64,
            steps: 20,
            coupling: Coupling::Common,
        }
    }
}

/// A rejected setting, anchored to its line in the source when it appears there.
#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub key: String,
    pub message: String,
    pub line: Option<usize>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}: {}", self.key, self.message),
            None => write!(f, "{}: {}", self.key, self.message),
        }
    }
}

/// Parse failure or list of violations.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigInvalid(pub Vec<String>);

impl fmt::Display for ConfigInvalid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid configuration:")?;
        for m in &self.0 {
            write!(f, "\n  {m}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigInvalid {}

pub fn parse(source: &str) -> Result<ExperimentConfig, ConfigInvalid> {
    toml::from_str(source).map_err(|e| ConfigInvalid(vec![e.to_string().trim_end().to_string()]))
}

/// Line of `key` (dotted, last component is the key) in a TOML source.
fn locate(source: &str, key: &str) -> Option<usize> {
    let (section, name) = match key.rsplit_once('.') {
        Some((s, n)) => (s, n),
        None => ("", key),
    };
    let name = name.split('[').next().unwrap_or(name);
    let mut current = String::new();
    for (i, line) in source.lines().enumerate() {
        let t = line.trim();
        if let Some(h) = t.strip_prefix('[') {
            current = h.trim_start_matches('[').trim_end_matches(']').trim().to_string();
            continue;
        }
        let Some((k, _)) = t.split_once('=') else { continue };
        let k = k.trim();
        let full = if current.is_empty() { k.to_string() } else { format!("{current}.{k}") };
        if (current == section && k == name) || full == format!("{section}.{name}") {
            return Some(i + 1);
        }
    }
    None
}

struct Checker<'a> {
    source: &'a str,
    out: Vec<Violation>,
}

impl Checker<'_> {
    fn require(&mut self, ok: bool, key: &str, message: impl Into<String>) {
        if !ok {
            self.out.push(Violation { key: key.into(), message: message.into(), line: locate(self.source, key) });
        }
    }

    fn modes(&mut self, key: &str, modes: &[Vec<i64>], d: usize) {
        let ok = modes.iter().all(|m| m.len() == d);
        self.require(ok, key, format!("every frequency needs {d} components"));
    }

    fn terms(&mut self, key: &str, terms: &[Term], d: usize, half: i64) {
        for t in terms {
            if t.mode.len() != d {
                self.require(false, key, format!("mode {:?} needs {d} components", t.mode));
            } else if t.mode.iter().any(|&k| k.abs() >= half) {
                self.require(false, key, format!("mode {:?} outside the retained modes |k_i| < {half}", t.mode));
            }
            self.require(t.re.is_finite() && t.im.is_finite(), key, "coefficients must be finite");
        }
    }

    fn positive(&mut self, key: &str, x: f64) {
        self.require(x > 0.0 && x.is_finite(), key, format!("must be > 0, got {x}"));
    }
}

/// Checks every setting, fills the defaults that depend on the dimension and
/// returns the normalized config.
pub fn validate(mut cfg: ExperimentConfig, source: &str) -> Result<ExperimentConfig, Vec<Violation>> {
    let mut c = Checker { source, out: Vec::new() };
    let p = &cfg.params;
    c.require(p.nu > 0.0, "params.nu", "nu must be > 0");
    c.require(p.gamma >= 0.0, "params.gamma", "gamma must be ≥ 0");
    c.require(p.c > 0.0, "params.c", "c must be > 0");
    c.require(p.p >= 1, "params.p", "p must be ≥ 1");
    c.require((1..=3).contains(&p.d), "params.d", "d must be 1, 2 or 3");
    c.require(2 * p.s as usize > p.d, "params.s", "s must exceed d/2");
    let d = p.d.clamp(1, 3);
    let n = cfg.grid.n;
    c.require(n >= 8 && n.is_power_of_two(), "grid.n", "n must be a power of two ≥ 8");
    let half = (n / 2) as i64;

    match &cfg.mask {
        MaskProfile::Constant { max } => c.positive("mask.max", *max),
        MaskProfile::Box { lower, upper, width, max } => {
            c.require(lower.len() == d && upper.len() == d, "mask.lower", format!("need {d} bounds per side"));
            c.positive("mask.width", *width);
            c.positive("mask.max", *max);
        }
    }

    let s = &cfg.solver;
    c.positive("solver.dt_max", s.dt_max);
    c.positive("solver.blowup_threshold", s.blowup_threshold);
    c.positive("solver.forcing_cap", s.forcing_cap);
    c.positive("solver.nonlinear_cap", s.nonlinear_cap);

    let kappa = || FrequencySet::kappa(d).representatives().as_vecs();
    let noise = &mut cfg.noise;
    let modes = noise.modes.get_or_insert_with(kappa).clone();
    c.modes("noise.modes", &modes, d);
    c.require(!modes.is_empty(), "noise.modes", "need at least one frequency");
    let count = FrequencySet::new(d, modes.iter().filter(|m| m.len() == d).cloned()).map(|f| f.representatives().len()).unwrap_or(0);
    let amp = noise.amplitude;
    for (key, list) in [("noise.amps_cos", &mut noise.amps_cos), ("noise.amps_sin", &mut noise.amps_sin)] {
        let list = list.get_or_insert_with(|| vec![amp; count]);
        c.require(list.len() == count, key, format!("need {count} amplitudes, one per ± pair"));
        c.require(list.iter().all(|a| *a > 0.0 && a.is_finite()), key, "amplitudes must be > 0");
    }
    c.positive("noise.amplitude", amp);
    c.require(noise.decay > 1.0, "noise.decay", "decay must be > 1");
    c.require(noise.j_max <= 20, "noise.j_max", "j_max must be ≤ 20");
    if let Err(e) = noise.law.validate() {
        c.require(false, "noise.law", e);
    }

    let sat = &mut cfg.saturate;
    let base = sat.base.get_or_insert_with(kappa).clone();
    c.modes("saturate.base", &base, d);
    c.require(sat.oracle_radius >= 1, "saturate.oracle_radius", "must be ≥ 1");

    let e1 = |kind: TermKind, re: f64, im: f64| {
        let mut mode = vec![0; d];
        mode[0] = 1;
        Term { mode, kind, re, im }
    };
    let constant = |re: f64| Term { mode: vec![0; d], kind: TermKind::Cos, re, im: 0.0 };
    cfg.solve.initial.get_or_insert_with(|| vec![e1(TermKind::Cos, 1.0, 0.0)]);
    cfg.probe_limit.eta.get_or_insert_with(|| vec![e1(TermKind::Cos, 1.0, 0.0)]);
    cfg.gramian.initial.get_or_insert_with(|| vec![constant(1.0), e1(TermKind::Cos, 1.0, 0.0), e1(TermKind::Sin, 0.0, 0.5)]);
    cfg.mix.initial_b.get_or_insert_with(|| vec![constant(0.5), e1(TermKind::Cos, 0.5, 0.0)]);

    let sol = &cfg.solve;
    c.positive("solve.time", sol.time);
    c.terms("solve.initial", sol.initial.as_deref().unwrap_or_default(), d, half);
    c.terms("solve.forcing", &sol.forcing, d, half);
    let in_range = sol.snapshots.iter().all(|t| (0.0..=sol.time).contains(t));
    c.require(in_range, "solve.snapshots", "snapshot times must lie in [0, time]");

    let pl = &cfg.probe_limit;
    c.terms("probe_limit.initial", &pl.initial, d, half);
    c.terms("probe_limit.eta", pl.eta.as_deref().unwrap_or_default(), d, half);
    c.terms("probe_limit.zeta", &pl.zeta, d, half);
    c.terms("probe_limit.forcing", &pl.forcing, d, half);
    let decreasing = !pl.deltas.is_empty() && pl.deltas.iter().all(|x| *x > 0.0) && pl.deltas.windows(2).all(|w| w[1] < w[0]);
    c.require(decreasing, "probe_limit.deltas", "deltas must be positive and strictly decreasing");

    let st = &mut cfg.steer;
    let base = st.base.get_or_insert_with(kappa).clone();
    c.modes("steer.base", &base, d);
    c.terms("steer.initial", &st.initial, d, half);
    c.terms("steer.background", &st.background, d, half);
    if let Some(t) = &st.target {
        c.terms("steer.target", t, d, half);
    }
    c.positive("steer.eps", st.eps);
    c.positive("steer.time", st.time);
    c.positive("steer.delta_max", st.delta_max);
    c.require(st.delta_min > 0.0 && st.delta_min <= st.delta_max, "steer.delta_min", "must lie in (0, delta_max]");
    c.positive("steer.hold_step", st.hold_step);
    c.require(st.hold_min > 0.0 && st.hold_min <= st.hold_step, "steer.hold_min", "must lie in (0, hold_step]");

    let g = &mut cfg.gramian;
    let base = g.base.get_or_insert_with(kappa).clone();
    c.modes("gramian.base", &base, d);
    let probe = g.probe.get_or_insert_with(|| probe_box(d, 4.min(half - 1))).clone();
    c.modes("gramian.probe", &probe, d);
    c.require(probe.iter().all(|k| k.iter().all(|x| x.abs() < half)), "gramian.probe", format!("probe modes must satisfy |k_i| < {half}"));
    c.modes("gramian.obstruction_modes", &g.obstruction_modes, d);
    c.terms("gramian.initial", g.initial.as_deref().unwrap_or_default(), d, half);
    c.terms("gramian.background", &g.background, d, half);
    c.positive("gramian.time", g.time);
    c.require(g.steps >= 1, "gramian.steps", "must be ≥ 1");
    c.require(g.slots >= 1 && g.slots <= g.steps, "gramian.slots", "must lie in 1..=steps");

    let m = &cfg.mix;
    c.terms("mix.initial_a", &m.initial_a, d, half);
    c.terms("mix.initial_b", m.initial_b.as_deref().unwrap_or_default(), d, half);
    c.require(m.members >= 2, "mix.members", "an ensemble needs at least two members");

    if c.out.is_empty() {
        Ok(cfg)
    } else {
        Err(c.out)
    }
}

/// Every `k` with `0 ≤ k_i ≤ r`.
fn probe_box(d: usize, r: i64) -> Vec<Vec<i64>> {
    let side = r + 1;
    (0..side.pow(d as u32))
        .map(|mut flat| {
            (0..d)
                .map(|_| {
                    let v = flat % side;
                    flat /= side;
                    v
                })
                .collect()
        })
        .collect()
}

/// Core objects built from a normalized config.
pub struct Setup {
    pub params: CglParams<f64>,
    pub grid: TorusGrid<f64>,
    pub mask: LocalizationMask<f64>,
    pub solver: SolverConfig<f64>,
}

impl ExperimentConfig {
    pub fn setup(&self) -> cgl_core::Result<Setup> {
        let p = &self.params;
        let params = CglParams::new(p.nu, p.gamma, p.c, p.p, p.d, p.s)?;
        let grid = TorusGrid::new(p.d, self.grid.n)?;
        let mask = LocalizationMask::new(&grid, &self.mask)?;
        let s = &self.solver;
        let solver = SolverConfig {
            dt_max: s.dt_max,
            blowup_threshold: s.blowup_threshold,
            forcing_cap: s.forcing_cap,
            nonlinear_cap: s.nonlinear_cap,
        };
        Ok(Setup { params, grid, mask, solver })
    }

    pub fn noise_spec(&self) -> cgl_core::Result<HaarNoiseSpec> {
        let n = &self.noise;
        let set = FrequencySet::new(self.params.d, n.modes.clone().unwrap_or_default())?;
        let spec = HaarNoiseSpec {
            set,
            amps_cos: n.amps_cos.clone().unwrap_or_default(),
            amps_sin: n.amps_sin.clone().unwrap_or_default(),
            decay: n.decay,
            law: n.law.clone(),
            j_max: n.j_max,
            m_max: n.m_max,
            seed: self.seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn chain_kind(&self) -> ChainKind {
        match self.saturate.chain {
            ChainChoice::Linear => ChainKind::Linear,
            ChainChoice::Nonlinear => ChainKind::Nonlinear { p: self.params.p },
        }
    }

    pub fn synthesis_options(&self) -> SynthesisOptions {
        let s = &self.steer;
        SynthesisOptions {
            delta_max: s.delta_max,
            delta_min: s.delta_min,
            max_level: s.max_level,
            hold_step: s.hold_step,
            hold_min: s.hold_min,
        }
    }
}

pub fn frequency_set(d: usize, modes: &Option<Vec<Vec<i64>>>) -> cgl_core::Result<FrequencySet> {
    FrequencySet::new(d, modes.clone().unwrap_or_default())
}

/// Sum of the terms on `grid`.
pub fn build_field(grid: &TorusGrid<f64>, terms: &[Term]) -> cgl_core::Result<SpectralField<f64>> {
    let mut u = SpectralField::zeros(grid);
    for t in terms {
        let a = Complex::new(t.re, t.im);
        let f = match t.kind {
            TermKind::Cos => SpectralField::cos_mode(grid, &t.mode)?.scale_complex(a),
            TermKind::Sin => SpectralField::sin_mode(grid, &t.mode)?.scale_complex(a),
            TermKind::Exp => SpectralField::mode(grid, &t.mode, a)?,
        };
        u = &u + &f;
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn locate_finds_keys_in_sections() {
        let src = "seed = 3\n[params]\nnu = 0.1\ngamma = -1\n[steer]\neps = 0\n";
        assert_eq!(locate(src, "seed"), Some(1));
        assert_eq!(locate(src, "params.gamma"), Some(4));
        assert_eq!(locate(src, "steer.eps"), Some(6));
        assert_eq!(locate(src, "steer.time"), None);
    }

    #[test]
    fn probe_box_counts() {
        assert_eq!(probe_box(1, 4).len(), 5);
        assert_eq!(probe_box(2, 2).len(), 9);
    }
}
