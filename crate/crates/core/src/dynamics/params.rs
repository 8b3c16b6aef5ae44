use crate::error::{CglError, Result};
use crate::scalar::Real;

/// Coefficients of `∂_t u − (ν+i)Δu + γu + ic|u|^{2p}u = f` on the d-torus.
#[derive(Clone, Debug, PartialEq)]
pub struct CglParams<T: Real> {
    pub nu: T,
    pub gamma: T,
    pub c: T,
    /// Nonlinearity degree; the nonlinearity has real degree `q = 2p + 1`.
    pub p: u32,
    pub d: usize,
    /// Integer Sobolev index, `s > d/2`.
    pub s: u32,
}

impl<T: Real> CglParams<T> {
    pub fn new(nu: T, gamma: T, c: T, p: u32, d: usize, s: u32) -> Result<Self> {
        let params = Self { nu, gamma, c, p, d, s };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu > T::zero()) {
            return Err(CglError::InvalidParams("nu must be > 0".into()));
        }
        if !(self.gamma >= T::zero()) {
            return Err(CglError::InvalidParams("gamma must be >= 0".into()));
        }
        if !(self.c > T::zero()) {
            return Err(CglError::InvalidParams("c must be > 0".into()));
        }
        if self.p < 1 {
            return Err(CglError::InvalidParams("p must be >= 1".into()));
        }
        if !(1..=3).contains(&self.d) {
            return Err(CglError::InvalidParams("d must be 1, 2 or 3".into()));
        }
        if 2 * self.s as usize <= self.d {
            return Err(CglError::InvalidParams("s must exceed d/2".into()));
        }
        Ok(())
    }

    /// `q = 2p + 1`.
    pub fn q(&self) -> u32 {
        2 * self.p + 1
    }

    /// Zero-padding factor `⌈(q+1)/2⌉` that makes degree-`q` products alias-free.
    pub fn dealias_factor(&self) -> usize {
        (self.q() as usize + 2) / 2
    }

    pub fn s_real(&self) -> T {
        T::of(self.s as f64)
    }
}

/// Step-size control and blow-up detection for the time integrator.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig<T: Real> {
    pub dt_max: T,
    /// `‖u‖_{H^s}` above which a run is declared blown up.
    pub blowup_threshold: T,
    /// Cap on `dt · ‖f‖_{H^{s-1}}`.
    pub forcing_cap: T,
    /// Cap on `dt · c ‖u‖_∞^{2p}`.
    pub nonlinear_cap: T,
}

impl<T: Real> Default for SolverConfig<T> {
    fn default() -> Self {
        Self { dt_max: T::of(1e-2), blowup_threshold: T::of(1e6), forcing_cap: T::of(0.1), nonlinear_cap: T::of(0.1) }
    }
}

impl<T: Real> SolverConfig<T> {
    pub fn with_dt_max(mut self, dt: T) -> Self {
        self.dt_max = dt;
        self
    }

    pub fn with_threshold(mut self, threshold: T) -> Self {
        self.blowup_threshold = threshold;
        self
    }
}
