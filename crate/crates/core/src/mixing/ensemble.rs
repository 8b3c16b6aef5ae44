use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{time_one_map, CglParams, SolverConfig};
use crate::error::{CglError, Result};
use crate::noise::{sample_noise, HaarNoiseSpec};
use crate::spectral::{LocalizationMask, SpectralField};

/// How noise streams are assigned to members.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    /// Member `i` uses stream `stream_base + i`.
    Independent,
    /// Member `i` uses stream `i`, shared with every other ensemble using this coupling.
    Common,
}

/// Members of a Markov chain ensemble at step `k`.
#[derive(Clone, Debug)]
pub struct Ensemble {
    members: Vec<SpectralField<f64>>,
    step: u64,
    label: String,
    stream_base: u64,
    /// `(member index, reason)` of members dropped after a numerical failure.
    pub excluded: Vec<(usize, String)>,
}

impl Ensemble {
    pub fn new(members: Vec<SpectralField<f64>>, label: impl Into<String>, stream_base: u64) -> Result<Self> {
        if members.len() < 2 {
            return Err(CglError::InvalidParams("an ensemble needs at least two members".into()));
        }
        let grid = members[0].grid();
        if members.iter().any(|m| m.grid() != grid) {
            return Err(CglError::GridMismatch);
        }
        Ok(Self { members, step: 0, label: label.into(), stream_base, excluded: Vec::new() })
    }

    /// `count` copies of `u0`.
    pub fn replicate(u0: &SpectralField<f64>, count: usize, label: impl Into<String>, stream_base: u64) -> Result<Self> {
        Self::new(vec![u0.clone(); count], label, stream_base)
    }

    pub fn members(&self) -> &[SpectralField<f64>] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn stream_base(&self) -> u64 {
        self.stream_base
    }

    /// Members `range` as a new ensemble (same step and streams).
    pub fn slice(&self, range: std::ops::Range<usize>) -> Result<Self> {
        let mut out = Self::new(self.members[range.clone()].to_vec(), format!("{}[{range:?}]", self.label), self.stream_base + range.start as u64)?;
        out.step = self.step;
        Ok(out)
    }
}

/// `u_k = S(u_{k-1}, η_k)` for every member, each with its own noise path.
///
/// Members that blow up are dropped and listed in [`Ensemble::excluded`].
pub fn markov_step(
    ens: &Ensemble,
    spec: &HaarNoiseSpec,
    coupling: Coupling,
    params: &CglParams<f64>,
    mask: &LocalizationMask<f64>,
    config: &SolverConfig<f64>,
) -> Result<Ensemble> {
    spec.validate()?;
    let grid = mask.grid();
    let results: Vec<Result<SpectralField<f64>>> = ens
        .members
        .par_iter()
        .enumerate()
        .map(|(i, u)| {
            let stream = match coupling {
                Coupling::Independent => ens.stream_base + i as u64,
                Coupling::Common => i as u64,
            };
            let path = sample_noise(spec, grid, stream, ens.step)?;
            time_one_map(u, Arc::new(path), params, mask, config)
        })
        .collect();
    let mut members = Vec::with_capacity(results.len());
    let mut excluded = ens.excluded.clone();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(u) => members.push(u),
            Err(e) if e.is_numerical() => excluded.push((i, e.to_string())),
            Err(e) => return Err(e),
        }
    }
    if members.len() < 2 {
        return Err(CglError::InsufficientData(format!("only {} members survived step {}", members.len(), ens.step + 1)));
    }
    Ok(Ensemble { members, step: ens.step + 1, label: ens.label.clone(), stream_base: ens.stream_base, excluded })
}
