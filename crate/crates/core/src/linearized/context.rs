use num_complex::Complex;

use crate::dynamics::{
    linear_symbol, CglParams, ControlSchedule, Recording, SegmentControl, Solver, SolverConfig, TimeForcing, Trajectory,
};
use crate::error::{CglError, Result};
use crate::scalar::Real;
use crate::spectral::{LocalizationMask, SpectralField, TorusGrid};

/// Reference trajectory `ũ` sampled on a uniform mesh of `[0, T]`, together
/// with the equation and mask the linearization refers to.
#[derive(Clone, Debug)]
pub struct LinearizationContext<T: Real> {
    pub params: CglParams<T>,
    pub mask: LocalizationMask<T>,
    horizon: T,
    reference: Vec<SpectralField<T>>,
    midpoints: Vec<SpectralField<T>>,
    decay: Vec<Complex<T>>,
    phi: Vec<Complex<T>>,
}

impl<T: Real> LinearizationContext<T> {
    /// Linearization about `ũ ≡ 0`.
    pub fn zero_reference(params: &CglParams<T>, mask: &LocalizationMask<T>, horizon: T, steps: usize) -> Result<Self> {
        let zero = SpectralField::zeros(mask.grid());
        Self::from_states(params, mask, horizon, vec![zero; steps + 1])
    }

    /// Linearization about the solution from `u0` forced by `h` (no control).
    pub fn from_solution(
        u0: &SpectralField<T>,
        h: Option<&dyn TimeForcing<T>>,
        horizon: T,
        steps: usize,
        params: &CglParams<T>,
        mask: &LocalizationMask<T>,
        config: &SolverConfig<T>,
    ) -> Result<Self> {
        if steps == 0 {
            return Err(CglError::InvalidParams("need at least one time step".into()));
        }
        let dt = horizon / T::of_usize(steps);
        let mut schedule = ControlSchedule::new();
        for _ in 0..steps {
            schedule.push(dt, SegmentControl::None, None);
        }
        let traj = Solver::new(params, mask, config.clone()).solve(u0, &schedule, h, Recording::Segments)?;
        Self::from_states(params, mask, horizon, traj.states)
    }

    /// Uses the given states as `ũ(t_n)` on the uniform mesh with `states.len() - 1` steps.
    pub fn from_states(
        params: &CglParams<T>,
        mask: &LocalizationMask<T>,
        horizon: T,
        states: Vec<SpectralField<T>>,
    ) -> Result<Self> {
        if states.len() < 2 {
            return Err(CglError::InvalidParams("need at least one time step".into()));
        }
        if !(horizon > T::zero()) {
            return Err(CglError::InvalidParams("horizon must be positive".into()));
        }
        if states.iter().any(|s| s.grid() != mask.grid()) {
            return Err(CglError::GridMismatch);
        }
        let midpoints = states.windows(2).map(|w| (&w[0] + &w[1]).scale(T::of(0.5))).collect();
        let steps = states.len() - 1;
        let h = horizon / T::of_usize(2 * steps);
        let mut decay = Vec::new();
        let mut phi = Vec::new();
        for &k2 in mask.grid().ksq() {
            let lam = linear_symbol(params, k2);
            let e = (-(lam * h)).exp();
            decay.push(e);
            phi.push(if (lam * h).norm() < T::of(1e-4) {
                let z = lam * h;
                (Complex::new(T::one(), T::zero()) - z.scale(T::of(0.5)) + z * z / T::of(6.0)).scale(h)
            } else {
                (Complex::new(T::one(), T::zero()) - e) / lam
            });
        }
        Ok(Self { params: params.clone(), mask: mask.clone(), horizon, reference: states, midpoints, decay, phi })
    }

    pub fn grid(&self) -> &TorusGrid<T> {
        self.mask.grid()
    }

    pub fn horizon(&self) -> T {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.midpoints.len()
    }

    pub fn dt(&self) -> T {
        self.horizon / T::of_usize(self.steps())
    }

    pub fn mesh(&self) -> Vec<T> {
        (0..=self.steps()).map(|n| self.dt() * T::of_usize(n)).collect()
    }

    pub fn reference(&self) -> Trajectory<T> {
        Trajectory { times: self.mesh(), states: self.reference.clone(), blowup_time: None }
    }

    pub(crate) fn midpoint(&self, n: usize) -> &SpectralField<T> {
        &self.midpoints[n]
    }

    /// `E = e^{−L dt/2}` (or its adjoint), optionally followed by `+ Φ f`.
    pub(crate) fn half_linear(&self, v: &SpectralField<T>, f: Option<&SpectralField<T>>, adjoint: bool) -> SpectralField<T> {
        let (e, ph) = (&self.decay, &self.phi);
        match (f, adjoint) {
            (None, false) => v.map_coeffs(|i, c| c * e[i]),
            (None, true) => v.map_coeffs(|i, c| c * e[i].conj()),
            (Some(f), false) => {
                let fc = f.coeffs();
                v.map_coeffs(|i, c| c * e[i] + fc[i] * ph[i])
            }
            (Some(f), true) => {
                let fc = f.coeffs();
                v.map_coeffs(|i, c| c * e[i].conj() + fc[i] * ph[i].conj())
            }
        }
    }

    /// `Φ* v`.
    pub(crate) fn phi_adjoint(&self, v: &SpectralField<T>) -> SpectralField<T> {
        let ph = &self.phi;
        v.map_coeffs(|i, c| c * ph[i].conj())
    }
}
