use serde::{Deserialize, Serialize};

use crate::dynamics::{CglParams, SolverConfig};
use crate::error::Result;
use crate::mixing::dictionary::{entry_differences, TestFunctionDictionary};
use crate::mixing::ensemble::{markov_step, Coupling, Ensemble};
use crate::mixing::fit::{standard_errors, lyapunov_monitor, mixing_rate_fit, LyapunovSummary, MixingFit};
use crate::noise::HaarNoiseSpec;
use crate::spectral::{sobolev_norm, LocalizationMask, SpectralField};

/// Row of a mixing run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixingRecord {
    pub k: u64,
    pub distance: f64,
    /// Some entry differs by more than twice its standard error.
    pub resolved: bool,
    /// Largest entry difference among the resolved entries (zero if none).
    pub resolved_distance: f64,
    /// `mean_i min(2, ‖a_i − b_i‖_{H¹})` over index-matched members, an upper
    /// bound for the distance between the laws (any coupling gives one).
    pub coupling_bound: f64,
    pub lyapunov_a: LyapunovSummary,
    pub lyapunov_b: LyapunovSummary,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MixingRun {
    pub records: Vec<MixingRecord>,
    pub dictionary: TestFunctionDictionary,
    /// Fit of the distances above the noise floor, or why there is none.
    pub fit: std::result::Result<MixingFit, String>,
    pub excluded: usize,
}

/// Evolves two ensembles started from `u0a` and `u0b` for `steps` steps, builds
/// the standard dictionary on every visited state, and fits the decay of the
/// distance between them while some entry is resolved above twice its
/// standard error.
#[allow(clippy::too_many_arguments)]
pub fn mixing_experiment(
    u0a: &SpectralField<f64>,
    u0b: &SpectralField<f64>,
    members: usize,
    steps: usize,
    coupling: Coupling,
    spec: &HaarNoiseSpec,
    params: &CglParams<f64>,
    mask: &LocalizationMask<f64>,
    config: &SolverConfig<f64>,
) -> Result<MixingRun> {
    let mut a = vec![Ensemble::replicate(u0a, members, "a", 0)?];
    let mut b = vec![Ensemble::replicate(u0b, members, "b", members as u64)?];
    for _ in 0..steps {
        let na = markov_step(a.last().expect("nonempty"), spec, coupling, params, mask, config)?;
        let nb = markov_step(b.last().expect("nonempty"), spec, coupling, params, mask, config)?;
        a.push(na);
        b.push(nb);
    }
    let all: Vec<&Ensemble> = a.iter().chain(&b).collect();
    let dictionary = TestFunctionDictionary::standard(&all, 5)?;
    let mut records = Vec::with_capacity(steps + 1);
    for (ea, eb) in a.iter().zip(&b) {
        let diffs = entry_differences(ea, eb, &dictionary)?;
        let errors = standard_errors(ea, eb, &dictionary, coupling == Coupling::Common)?;
        let resolved_distance =
            diffs.iter().zip(&errors).filter(|(d, e)| **d > 2.0 * **e).map(|(d, _)| *d).fold(0.0, f64::max);
        records.push(MixingRecord {
            k: ea.step(),
            distance: diffs.iter().copied().fold(0.0, f64::max),
            resolved: resolved_distance > 0.0,
            resolved_distance,
            coupling_bound: coupling_bound(ea, eb),
            lyapunov_a: lyapunov_monitor(ea, params),
            lyapunov_b: lyapunov_monitor(eb, params),
        });
    }
    // the window ends at the first distance that is not resolved above its own noise level
    let series: Vec<(f64, f64)> =
        records.iter().take_while(|r| r.resolved).map(|r| (r.k as f64, r.distance)).collect();
    let fit = mixing_rate_fit(&series, 0.0).map_err(|e| e.to_string());
    let excluded = a.last().map_or(0, |e| e.excluded.len()) + b.last().map_or(0, |e| e.excluded.len());
    Ok(MixingRun { records, dictionary, fit, excluded })
}

fn coupling_bound(a: &Ensemble, b: &Ensemble) -> f64 {
    if a.len() != b.len() {
        return f64::NAN;
    }
    let sum: f64 = a.members().iter().zip(b.members()).map(|(x, y)| sobolev_norm(&(x - y), 1.0).min(2.0)).sum();
    sum / a.len() as f64
}
