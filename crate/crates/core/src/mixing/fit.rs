use serde::{Deserialize, Serialize};

use crate::dynamics::{lyapunov, CglParams};
use crate::error::{CglError, Result};
use crate::mixing::dictionary::TestFunctionDictionary;
use crate::mixing::ensemble::Ensemble;

/// Fewest points a rate fit accepts.
pub const MIN_FIT_POINTS: usize = 5;

/// `log d_k ≈ log C − σ k` on the fitted window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixingFit {
    pub sigma: f64,
    pub c: f64,
    pub r_squared: f64,
    /// Steps `k` used in the fit.
    pub window: Vec<f64>,
    /// `σ > 0` with a good log-linear fit.
    pub mixing: bool,
}

/// Least-squares line through `(k, log d)` for the points above `floor`.
///
/// The window starts at the first point and stops at the first distance at or
/// below the floor; beyond it the series is Monte Carlo noise.
pub fn mixing_rate_fit(series: &[(f64, f64)], floor: f64) -> Result<MixingFit> {
    let window: Vec<(f64, f64)> = series.iter().copied().take_while(|&(_, d)| d > floor && d > 0.0).collect();
    if window.len() < MIN_FIT_POINTS {
        return Err(CglError::InsufficientData(format!(
            "{} points above the noise floor, need {MIN_FIT_POINTS}",
            window.len()
        )));
    }
    let n = window.len() as f64;
    let mx = window.iter().map(|p| p.0).sum::<f64>() / n;
    let my = window.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let sxx: f64 = window.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = window.iter().map(|p| (p.0 - mx) * (p.1.ln() - my)).sum();
    let syy: f64 = window.iter().map(|p| (p.1.ln() - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(CglError::InsufficientData("all points at the same step".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    // a flat series explains nothing
    let r_squared = if syy == 0.0 { 0.0 } else { (sxy * sxy) / (sxx * syy) };
    let sigma = -slope;
    Ok(MixingFit {
        sigma,
        c: intercept.exp(),
        r_squared,
        window: window.iter().map(|p| p.0).collect(),
        mixing: sigma > 1e-12 && r_squared > 0.9,
    })
}

/// Statistics of the Lyapunov functional over an ensemble.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovSummary {
    pub step: u64,
    pub mean: f64,
    pub max: f64,
    /// 10%, 50% and 90% quantiles.
    pub quantiles: [f64; 3],
}

pub fn lyapunov_monitor(ens: &Ensemble, params: &CglParams<f64>) -> LyapunovSummary {
    let mut values: Vec<f64> = ens.members().iter().map(|u| lyapunov(u, params)).collect();
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite functional"));
    let n = values.len();
    let quantile = |p: f64| values[((p * (n - 1) as f64).round() as usize).min(n - 1)];
    LyapunovSummary {
        step: ens.step(),
        mean: values.iter().sum::<f64>() / n as f64,
        max: values[n - 1],
        quantiles: [quantile(0.1), quantile(0.5), quantile(0.9)],
    }
}

/// Fit of `m_{k+1} ≈ a m_k + b` to a series of ensemble means; the drift bound
/// `m_k ≤ a^k (1 + m_0) + b/(1 − a)` follows when `0 ≤ a < 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftFit {
    pub a: f64,
    pub b: f64,
}

pub fn drift_fit(means: &[f64]) -> Result<DriftFit> {
    if means.len() < 3 {
        return Err(CglError::InsufficientData("need at least three means".into()));
    }
    let xs = &means[..means.len() - 1];
    let ys = &means[1..];
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let a = if sxx == 0.0 { 0.0 } else { sxy / sxx };
    Ok(DriftFit { a, b: my - a * mx })
}

/// Per-entry standard errors of `E_a f − E_b f`, in dictionary order.
///
/// With `paired` the members are matched by index (common noise), and the
/// error is that of the mean of the differences `f(a_i) − f(b_i)`.
pub fn standard_errors(a: &Ensemble, b: &Ensemble, dict: &TestFunctionDictionary, paired: bool) -> Result<Vec<f64>> {
    let var = |xs: &[f64]| {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)
    };
    if paired && a.len() != b.len() {
        return Err(CglError::InvalidParams("paired errors need ensembles of equal size".into()));
    }
    Ok(dict
        .entries
        .iter()
        .map(|f| {
            let fa: Vec<f64> = a.members().iter().map(|u| f.eval(u)).collect();
            let fb: Vec<f64> = b.members().iter().map(|u| f.eval(u)).collect();
            if paired {
                let diff: Vec<f64> = fa.iter().zip(&fb).map(|(x, y)| x - y).collect();
                (var(&diff) / diff.len() as f64).sqrt()
            } else {
                (var(&fa) / fa.len() as f64 + var(&fb) / fb.len() as f64).sqrt()
            }
        })
        .collect())
}
