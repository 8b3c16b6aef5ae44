use std::io::Write;

use crate::dynamics::lyapunov::lyapunov;
use crate::dynamics::params::CglParams;
use crate::error::Result;
use crate::scalar::Real;
use crate::spectral::{l2_norm, sobolev_norm, SpectralField};

/// Which instants a solve keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Recording {
    /// Initial and final state only.
    #[default]
    Final,
    /// Every segment boundary.
    Segments,
    /// Every internal time step.
    Steps,
}

/// Sampled solution on `[0, T]`.
#[derive(Clone, Debug)]
pub struct Trajectory<T: Real> {
    pub times: Vec<T>,
    pub states: Vec<SpectralField<T>>,
    /// Instant at which the H^s norm first exceeded the threshold.
    pub blowup_time: Option<T>,
}

impl<T: Real> Trajectory<T> {
    pub(crate) fn start(u0: &SpectralField<T>) -> Self {
        Self { times: vec![T::zero()], states: vec![u0.clone()], blowup_time: None }
    }

    pub(crate) fn record(&mut self, t: T, u: &SpectralField<T>) {
        if self.times.last() == Some(&t) {
            *self.states.last_mut().expect("nonempty") = u.clone();
        } else {
            self.times.push(t);
            self.states.push(u.clone());
        }
    }

    pub fn final_state(&self) -> &SpectralField<T> {
        self.states.last().expect("trajectory has an initial state")
    }

    pub fn final_time(&self) -> T {
        *self.times.last().expect("trajectory has an initial state")
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Rows `(t, ‖u‖_{L²}, ‖u‖_{H^s}, ℋ(u))`.
    pub fn summary(&self, params: &CglParams<T>) -> Vec<[f64; 4]> {
        self.times
            .iter()
            .zip(&self.states)
            .map(|(&t, u)| {
                [t.as_f64(), l2_norm(u).as_f64(), sobolev_norm(u, params.s_real()).as_f64(), lyapunov(u, params).as_f64()]
            })
            .collect()
    }

    /// Writes [`Self::summary`] as CSV with a header line.
    pub fn write_csv<W: Write>(&self, w: &mut W, params: &CglParams<T>) -> Result<()> {
        writeln!(w, "t,l2_norm,hs_norm,lyapunov")?;
        for row in self.summary(params) {
            writeln!(w, "{:.16e},{:.16e},{:.16e},{:.16e}", row[0], row[1], row[2], row[3])?;
        }
        Ok(())
    }
}
