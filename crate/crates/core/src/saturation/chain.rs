use std::collections::BTreeSet;

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{CglError, Result};
use crate::saturation::freq::FrequencySet;
use crate::scalar::Real;
use crate::spectral::{l2_norm, SpectralField, TorusGrid};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChainKind {
    /// `H_j = span{η, ζξ : η, ζ ∈ H_{j-1}, ξ ∈ H}`.
    Linear,
    /// `H'_j = span{B(ζ) : ζ ∈ H'_{j-1}}` for the nonlinearity of degree `2p + 1`.
    Nonlinear { p: u32 },
}

/// Frequency supports of a non-decreasing chain of trigonometric subspaces.
///
/// Each level keeps one representative per `±` pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaturationChain {
    pub base: FrequencySet,
    pub levels: Vec<FrequencySet>,
    pub kind: ChainKind,
}

impl SaturationChain {
    pub fn level(&self, j: usize) -> Option<&FrequencySet> {
        self.levels.get(j)
    }

    pub fn top(&self) -> &FrequencySet {
        self.levels.last().expect("chain has level 0")
    }

    /// First level containing every representative of `target`.
    pub fn first_level_containing(&self, target: &FrequencySet) -> Option<usize> {
        let reps = target.representatives();
        self.levels.iter().position(|lvl| reps.is_subset(lvl))
    }
}

fn check_base(base: &FrequencySet) -> Result<()> {
    if !base.contains_zero() {
        return Err(CglError::InvalidFrequencySet("base set must contain the zero vector".into()));
    }
    Ok(())
}

/// Linear chain, levels `0..=j_max`.
pub fn chain_linear(base: &FrequencySet, j_max: usize) -> Result<SaturationChain> {
    chain_linear_clipped(base, j_max, None)
}

/// Linear chain with every level intersected with `[-bound, bound]^d`.
pub fn chain_linear_clipped(base: &FrequencySet, j_max: usize, bound: Option<i64>) -> Result<SaturationChain> {
    check_base(base)?;
    let clip = |s: FrequencySet| match bound {
        Some(b) => s.clipped(b),
        None => s,
    };
    let steps = base.signed();
    let mut levels = vec![clip(base.representatives())];
    for _ in 0..j_max {
        let prev = levels.last().expect("nonempty");
        let mut next = prev.clone();
        for a in prev.iter() {
            for b in steps.iter() {
                next.insert(FrequencySet::canonical(&add(a, b)));
            }
        }
        levels.push(clip(next));
    }
    Ok(SaturationChain { base: base.clone(), levels, kind: ChainKind::Linear })
}

/// Nonlinear chain, levels `0..=j_max`: level `j` holds all signed sums of `q`
/// frequencies of level `j - 1`.
pub fn chain_nonlinear(base: &FrequencySet, j_max: usize, p: u32) -> Result<SaturationChain> {
    chain_nonlinear_clipped(base, j_max, p, None)
}

/// Nonlinear chain restricted to `[-bound, bound]^d`. Partial sums are kept
/// while they can still return into the box, so the clipped levels are exact.
pub fn chain_nonlinear_clipped(
    base: &FrequencySet,
    j_max: usize,
    p: u32,
    bound: Option<i64>,
) -> Result<SaturationChain> {
    check_base(base)?;
    if p == 0 {
        return Err(CglError::InvalidParams("p must be >= 1".into()));
    }
    let q = 2 * p as usize + 1;
    let clip = |s: FrequencySet| match bound {
        Some(b) => s.clipped(b),
        None => s,
    };
    let d = base.dim();
    let mut levels = vec![clip(base.representatives())];
    for _ in 0..j_max {
        let prev = levels.last().expect("nonempty").signed();
        let r = prev.max_abs();
        let mut partial: BTreeSet<Vec<i64>> = prev.iter().cloned().collect();
        for step in 1..q {
            let remaining = (q - 1 - step) as i64;
            let mut next = BTreeSet::new();
            for a in &partial {
                for b in prev.iter() {
                    let s = add(a, b);
                    let keep = match bound {
                        Some(bd) => s.iter().all(|x| x.abs() <= bd + remaining * r),
                        None => true,
                    };
                    if keep {
                        next.insert(s);
                    }
                }
            }
            partial = next;
        }
        let level = FrequencySet::new(d, partial.iter().map(|k| FrequencySet::canonical(k))).expect("same dimension");
        levels.push(clip(level));
    }
    Ok(SaturationChain { base: base.clone(), levels, kind: ChainKind::Nonlinear { p } })
}

fn add(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Real basis of `H(I)` as real-valued fields: `1` for `l = 0`, otherwise
/// `cos<l,x>` and `sin<l,x>` for each representative `l`. With `normalize`
/// every element has unit L² norm.
pub fn trig_basis<T: Real>(grid: &TorusGrid<T>, set: &FrequencySet, normalize: bool) -> Result<Vec<SpectralField<T>>> {
    let mut out = Vec::new();
    for l in set.representatives().iter() {
        let mut fields = vec![SpectralField::trig(grid, l, Complex::one(), Complex::zero())?];
        if l.iter().any(|&x| x != 0) {
            fields.push(SpectralField::trig(grid, l, Complex::zero(), Complex::one())?);
        }
        for f in fields {
            if normalize {
                let n = l2_norm(&f);
                out.push(f.scale(T::one() / n));
            } else {
                out.push(f);
            }
        }
    }
    Ok(out)
}

/// Complex span of `H(I)` as a real vector space: the real basis together with its `i`-multiples.
pub fn complex_trig_basis<T: Real>(grid: &TorusGrid<T>, set: &FrequencySet, normalize: bool) -> Result<Vec<SpectralField<T>>> {
    let real = trig_basis(grid, set, normalize)?;
    let i = Complex::new(T::zero(), T::one());
    let mut out = Vec::with_capacity(2 * real.len());
    for f in real {
        let g = f.scale_complex(i);
        out.push(f);
        out.push(g);
    }
    Ok(out)
}
