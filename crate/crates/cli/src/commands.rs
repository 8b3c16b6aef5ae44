use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use cgl_core::dynamics::{lyapunov, ConstantForcing, ControlSchedule, Recording, SegmentControl, Solver, TimeForcing};
use cgl_core::linearized::{gramian, obstruction_check, LinearizationContext};
use cgl_core::mixing::mixing_experiment;
use cgl_core::saturation::{
    chain_linear, chain_nonlinear, invariant_factors, is_generator, lattice_closure, saturation_diagnostic, ChainKind,
    FrequencySet, SaturationReport,
};
use cgl_core::spectral::snapshot::write_snapshot;
use cgl_core::spectral::{l2_norm, sobolev_norm};
use cgl_core::synthesis::{impulse_limit_probe, max_leak, ProbeRow, Synthesizer};
use cgl_core::CglError;
use serde::Serialize;

use crate::config::{build_field, frequency_set, ExperimentConfig, RecordChoice, SteerMode};

/// Failure of a subcommand after validation.
#[derive(Debug)]
pub enum RunError {
    Core(CglError),
    Io(std::io::Error),
    /// A well-formed run whose numerics failed; the partial outputs are on disk.
    Numerical(String),
}

impl From<CglError> for RunError {
    fn from(e: CglError) -> Self {
        RunError::Core(e)
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e)
    }
}

impl From<serde_json::Error> for RunError {
    fn from(e: serde_json::Error) -> Self {
        RunError::Io(e.into())
    }
}

pub type RunResult = Result<Vec<String>, RunError>;

/// Output directory plus the files written so far.
pub struct Outputs {
    dir: PathBuf,
}

impl Outputs {
    pub fn new(dir: &Path) -> std::io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf() })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<(), RunError> {
        let mut w = BufWriter::new(File::create(self.path(name))?);
        serde_json::to_writer_pretty(&mut w, value)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }

    fn with_file(&self, name: &str, f: impl FnOnce(&mut BufWriter<File>) -> cgl_core::Result<()>) -> Result<(), RunError> {
        let mut w = BufWriter::new(File::create(self.path(name))?);
        f(&mut w)?;
        w.flush()?;
        Ok(())
    }
}

/// Every JSON report: the command, the normalized config and the results.
#[derive(Serialize)]
struct Report<'a, R: Serialize> {
    command: &'a str,
    config: &'a ExperimentConfig,
    result: R,
}

fn report<R: Serialize>(out: &Outputs, name: &str, command: &str, cfg: &ExperimentConfig, result: R) -> Result<(), RunError> {
    out.json(name, &Report { command, config: cfg, result })
}

fn e16(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Serialize)]
struct ChainLevel {
    level: usize,
    /// Frequencies counted up to sign.
    frequencies: usize,
    members: Vec<Vec<i64>>,
}

#[derive(Serialize)]
struct SaturateResult {
    base: Vec<Vec<i64>>,
    generator: bool,
    invariant_factors: Vec<i128>,
    /// The lattice generated by the base contains the whole oracle box.
    closure_covers_box: bool,
    chain: Vec<ChainLevel>,
    diagnostic: Option<SaturationReport>,
}

pub fn saturate(cfg: &ExperimentConfig, out: &Outputs) -> RunResult {
    let setup = cfg.setup()?;
    let d = cfg.params.d;
    let base = frequency_set(d, &cfg.saturate.base)?;
    let levels = cfg.saturate.levels;
    let chain = match cfg.chain_kind() {
        ChainKind::Linear => chain_linear(&base, levels)?,
        ChainKind::Nonlinear { p } => chain_nonlinear(&base, levels, p)?,
    };
    let radius = cfg.saturate.oracle_radius;
    let whole = FrequencySet::new(d, cube(d, radius))?;
    let closure_covers_box = whole.is_subset(&lattice_closure(&base, radius));
    let diagnostic = if cfg.saturate.diagnostic { Some(saturation_diagnostic(&base, &setup.mask, levels, cfg.chain_kind())?) } else { None };
    let generator = is_generator(&base);
    let result = SaturateResult {
        base: base.as_vecs(),
        generator,
        invariant_factors: invariant_factors(&base.as_vecs(), d),
        closure_covers_box,
        chain: chain
            .levels
            .iter()
            .enumerate()
            .map(|(level, set)| {
                let reps = set.representatives();
                ChainLevel { level, frequencies: reps.len(), members: reps.as_vecs() }
            })
            .collect(),
        diagnostic,
    };
    out.with_file("saturate.csv", |w| {
        writeln!(w, "level,frequencies,max_residual,mean_residual")?;
        for lvl in &result.chain {
            let res = result.diagnostic.as_ref().and_then(|r| r.levels.iter().find(|l| l.level == lvl.level));
            let (mx, mean) = res.map_or((f64::NAN, f64::NAN), |r| (r.max_residual, r.mean_residual));
            writeln!(w, "{},{},{},{}", lvl.level, lvl.frequencies, e16(mx), e16(mean))?;
        }
        Ok(())
    })?;
    let top = result.chain.last().map_or(0, |l| l.frequencies);
    report(out, "saturate.json", "saturate", cfg, &result)?;
    Ok(vec![format!("generator: {generator}, level {levels} carries {top} frequencies up to sign")])
}

fn cube(d: usize, r: i64) -> Vec<Vec<i64>> {
    let side = 2 * r + 1;
    (0..side.pow(d as u32))
        .map(|mut flat| {
            (0..d)
                .map(|_| {
                    let v = flat % side - r;
                    flat /= side;
                    v
                })
                .collect()
        })
        .collect()
}

#[derive(Serialize)]
struct SolveResult {
    final_time: f64,
    blowup_time: Option<f64>,
    final_l2_norm: f64,
    final_hs_norm: f64,
    final_lyapunov: f64,
    snapshots: Vec<SnapshotEntry>,
}

#[derive(Serialize)]
struct SnapshotEntry {
    time: f64,
    file: String,
}

pub fn solve(cfg: &ExperimentConfig, out: &Outputs) -> RunResult {
    let setup = cfg.setup()?;
    let sol = &cfg.solve;
    let u0 = build_field(&setup.grid, sol.initial.as_deref().unwrap_or_default())?;
    let forcing = if sol.forcing.is_empty() { None } else { Some(ConstantForcing(build_field(&setup.grid, &sol.forcing)?)) };
    // segment boundaries at the snapshot instants so each is hit exactly
    let mut cuts: Vec<f64> = sol.snapshots.iter().copied().filter(|t| *t > 0.0 && *t < sol.time).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts.push(sol.time);
    let mut schedule = ControlSchedule::new();
    let mut start = 0.0;
    for t in &cuts {
        schedule.push(t - start, SegmentControl::None, None);
        start = *t;
    }
    let recording = match sol.record {
        RecordChoice::Steps => Recording::Steps,
        RecordChoice::Final => Recording::Segments,
    };
    let solver = Solver::new(&setup.params, &setup.mask, setup.solver.clone());
    let h = forcing.as_ref().map(|f| f as &dyn TimeForcing<f64>);
    let traj = solver.solve_lenient(&u0, &schedule, h, recording)?;
    out.with_file("trajectory.csv", |w| traj.write_csv(w, &setup.params))?;
    let s = cfg.params.s as f64;
    let mut snapshots = Vec::new();
    for (i, &ts) in sol.snapshots.iter().enumerate() {
        let tol = 1e-9 * ts.max(1.0);
        let Some(k) = traj.times.iter().position(|t| (t - ts).abs() <= tol) else { continue };
        let file = format!("snapshot_{i:03}.bin");
        out.with_file(&file, |w| write_snapshot(w, &traj.states[k], s))?;
        snapshots.push(SnapshotEntry { time: traj.times[k], file });
    }
    let last = traj.final_state();
    let result = SolveResult {
        final_time: traj.final_time(),
        blowup_time: traj.blowup_time,
        final_l2_norm: l2_norm(last),
        final_hs_norm: sobolev_norm(last, s),
        final_lyapunov: lyapunov(last, &setup.params),
        snapshots,
    };
    report(out, "solve.json", "solve", cfg, &result)?;
    if let Some(t) = traj.blowup_time {
        return Err(RunError::Numerical(format!("solution blew up at t = {t}")));
    }
    Ok(vec![format!("t = {}: ‖u‖_L² = {:.6e}, ‖u‖_H^s = {:.6e}", result.final_time, result.final_l2_norm, result.final_hs_norm)])
}

#[derive(Serialize)]
struct ProbeResult {
    rows: Vec<ProbeRow>,
    relative_errors: Vec<Option<f64>>,
    decreasing: bool,
}

pub fn probe_limit(cfg: &ExperimentConfig, out: &Outputs) -> RunResult {
    let setup = cfg.setup()?;
    let pl = &cfg.probe_limit;
    let g = &setup.grid;
    let u0 = build_field(g, &pl.initial)?;
    let eta = build_field(g, pl.eta.as_deref().unwrap_or_default())?;
    let zeta = build_field(g, &pl.zeta)?;
    let h = if pl.forcing.is_empty() { None } else { Some(build_field(g, &pl.forcing)?) };
    let rows = impulse_limit_probe(&u0, &eta, &zeta, &pl.deltas, h.as_ref(), &setup.params, &setup.mask, &setup.solver)?;
    let relative_errors: Vec<Option<f64>> = rows.iter().map(|r| r.error.map(|e| e / r.target_norm)).collect();
    let decreasing = relative_errors.windows(2).all(|w| matches!(w, [Some(a), Some(b)] if b < a));
    out.with_file("probe_limit.csv", |w| {
        writeln!(w, "delta,error,target_norm,relative_error")?;
        for (r, rel) in rows.iter().zip(&relative_errors) {
            let err = r.error.unwrap_or(f64::NAN);
            writeln!(w, "{},{},{},{}", e16(r.delta), e16(err), e16(r.target_norm), e16(rel.unwrap_or(f64::NAN)))?;
        }
        Ok(())
    })?;
    let last = relative_errors.last().copied().flatten();
    report(out, "probe_limit.json", "probe-limit", cfg, &ProbeResult { rows, relative_errors, decreasing })?;
    Ok(vec![format!(
        "errors decreasing: {decreasing}, relative error at smallest delta: {}",
        last.map_or("blow-up".to_string(), |x| format!("{x:.3e}"))
    )])
}

#[derive(Serialize)]
struct SteerResult {
    mode: SteerMode,
    level: usize,
    segments: usize,
    total_time: f64,
    predicted_error: f64,
    /// `H^s` distance of the replayed end state to the target.
    final_error: f64,
    /// `‖u_T − u1‖_{L²(𝒪)}` (indicator mode).
    interior_error: Option<f64>,
    /// `‖u_T − u0‖_{L²(𝒪^c)}` (indicator mode).
    exterior_change: Option<f64>,
    target_l2_norm: f64,
    /// Largest `L²` mass outside the lattice of the base along the replay.
    max_leak: f64,
    success: bool,
}

pub fn steer(cfg: &ExperimentConfig, out: &Outputs) -> RunResult {
    let setup = cfg.setup()?;
    let st = &cfg.steer;
    let g = &setup.grid;
    let base = frequency_set(cfg.params.d, &st.base)?;
    let u0 = build_field(g, &st.initial)?;
    let target = st.target.as_deref().ok_or_else(|| CglError::InvalidParams("steer.target is required".into()))?;
    let u1 = build_field(g, target)?;
    let h = if st.background.is_empty() { None } else { Some(build_field(g, &st.background)?) };
    let mut syn = Synthesizer::new(&setup.params, &setup.mask, &base, setup.solver.clone(), cfg.synthesis_options())?;
    if let Some(h) = &h {
        syn = syn.with_background(h.clone());
    }
    let plan = match st.mode {
        SteerMode::Indicator => syn.steer_indicator(&u0, &u1, st.eps, st.time),
        SteerMode::Full => syn.steer_full(&u0, &u1, st.eps, st.time),
    };
    let plan = plan.map_err(|e| if e.is_numerical() { RunError::Numerical(e.to_string()) } else { RunError::Core(e) })?;
    out.json("plan.json", &plan)?;
    out.with_file("segments.csv", |w| plan.write_segments_csv(w, g))?;
    let traj = plan.replay(&u0, h.as_ref(), &setup.params, &setup.mask, &setup.solver, Recording::Steps)?;
    out.with_file("trace.csv", |w| traj.write_csv(w, &setup.params))?;
    let last = traj.final_state();
    let final_error = sobolev_norm(&(last - &u1), cfg.params.s as f64);
    let target_l2_norm = l2_norm(&u1);
    let (interior_error, exterior_change, success) = match st.mode {
        SteerMode::Indicator => {
            let rep = syn.steering_report(&plan, &u0, &u1, last);
            let ok = rep.interior_error < st.eps && rep.total_time <= st.time;
            (Some(rep.interior_error), Some(rep.exterior_change), ok)
        }
        SteerMode::Full => (None, None, final_error < st.eps),
    };
    let result = SteerResult {
        mode: st.mode,
        level: plan.level,
        segments: plan.segments.len(),
        total_time: plan.total_time(),
        predicted_error: plan.predicted_error,
        final_error,
        interior_error,
        exterior_change,
        target_l2_norm,
        max_leak: max_leak(traj.states.iter(), &base),
        success,
    };
    report(out, "steer.json", "steer", cfg, &result)?;
    let msg = match (interior_error, exterior_change) {
        (Some(i), Some(x)) => format!("interior error {i:.3e}, exterior change {x:.3e}"),
        _ => format!("H^s error {final_error:.3e}"),
    };
    Ok(vec![format!("{} segments, total time {:.6}, {msg}", result.segments, result.total_time)])
}

#[derive(Serialize)]
struct GramianResult {
    gramian: cgl_core::linearized::GramianReport,
    obstruction: Vec<ObstructionEntry>,
}

#[derive(Serialize)]
struct ObstructionEntry {
    mode: Vec<i64>,
    response: f64,
}

pub fn gramian_cmd(cfg: &ExperimentConfig, out: &Outputs) -> RunResult {
    let setup = cfg.setup()?;
    let gc = &cfg.gramian;
    let g = &setup.grid;
    let d = cfg.params.d;
    let base = frequency_set(d, &gc.base)?;
    let probe = frequency_set(d, &gc.probe)?;
    let u0 = build_field(g, gc.initial.as_deref().unwrap_or_default())?;
    let h = if gc.background.is_empty() { None } else { Some(ConstantForcing(build_field(g, &gc.background)?)) };
    let ctx = LinearizationContext::from_solution(
        &u0,
        h.as_ref().map(|f| f as &dyn TimeForcing<f64>),
        gc.time,
        gc.steps,
        &setup.params,
        &setup.mask,
        &setup.solver,
    )?;
    let rep = gramian(&ctx, &base, gc.slots, &probe)?;
    let obstruction = gc
        .obstruction_modes
        .iter()
        .map(|l| Ok(ObstructionEntry { mode: l.clone(), response: obstruction_check(&ctx, &base, gc.slots, l)? }))
        .collect::<cgl_core::Result<Vec<_>>>()?;
    out.with_file("gramian.csv", |w| {
        writeln!(w, "index,singular_value")?;
        for (i, s) in rep.singular_values.iter().enumerate() {
            writeln!(w, "{i},{}", e16(*s))?;
        }
        Ok(())
    })?;
    let sigma = rep.sigma_min;
    let rows = rep.rows;
    report(out, "gramian.json", "gramian", cfg, &GramianResult { gramian: rep, obstruction })?;
    Ok(vec![format!("sigma_min {sigma:.3e} over {rows} probe directions")])
}

pub fn mix(cfg: &ExperimentConfig, out: &Outputs) -> RunResult {
    let setup = cfg.setup()?;
    let m = &cfg.mix;
    let spec = cfg.noise_spec()?;
    let a = build_field(&setup.grid, &m.initial_a)?;
    let b = build_field(&setup.grid, m.initial_b.as_deref().unwrap_or_default())?;
    let run = mixing_experiment(&a, &b, m.members, m.steps, m.coupling, &spec, &setup.params, &setup.mask, &setup.solver)?;
    out.with_file("mix.csv", |w| {
        writeln!(w, "k,distance,resolved,resolved_distance,coupling_bound,mean_h_a,max_h_a,mean_h_b,max_h_b")?;
        for r in &run.records {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{}",
                r.k,
                e16(r.distance),
                u8::from(r.resolved),
                e16(r.resolved_distance),
                e16(r.coupling_bound),
                e16(r.lyapunov_a.mean),
                e16(r.lyapunov_a.max),
                e16(r.lyapunov_b.mean),
                e16(r.lyapunov_b.max)
            )?;
        }
        Ok(())
    })?;
    report(out, "mix.json", "mix", cfg, &run)?;
    let msg = match &run.fit {
        Ok(f) => format!("sigma {:.4}, r^2 {:.4} over {} steps", f.sigma, f.r_squared, f.window.len()),
        Err(e) => format!("no rate fit: {e}"),
    };
    Ok(vec![msg])
}
