use num_complex::Complex;

use crate::dynamics::operators::{linear_symbol, nonlinearity};
use crate::dynamics::params::{CglParams, SolverConfig};
use crate::dynamics::schedule::{ControlSchedule, SegmentControl, TimeForcing};
use crate::dynamics::trajectory::{Recording, Trajectory};
use crate::error::{CglError, Result};
use crate::scalar::Real;
use crate::spectral::{sobolev_norm, LocalizationMask, SpectralField};

/// Exact propagator of `U' + LU = f` over a half step, with `f` constant.
struct HalfStep<T: Real> {
    h: T,
    decay: Vec<Complex<T>>,
    phi: Vec<Complex<T>>,
}

impl<T: Real> HalfStep<T> {
    fn new(grid_ksq: &[T], params: &CglParams<T>, h: T) -> Self {
        let mut decay = Vec::with_capacity(grid_ksq.len());
        let mut phi = Vec::with_capacity(grid_ksq.len());
        for &k2 in grid_ksq {
            let lam = linear_symbol(params, k2);
            let z = lam * h;
            let e = (-z).exp();
            decay.push(e);
            phi.push(phi_fn(lam, z, h, e));
        }
        Self { h, decay, phi }
    }

    fn apply(&self, u: &SpectralField<T>, f: Option<&SpectralField<T>>) -> SpectralField<T> {
        match f {
            None => u.map_coeffs(|i, c| c * self.decay[i]),
            Some(f) => {
                let fc = f.coeffs();
                u.map_coeffs(|i, c| c * self.decay[i] + fc[i] * self.phi[i])
            }
        }
    }
}

/// `(1 − e^{−λh})/λ`, with a series near `λh = 0`.
fn phi_fn<T: Real>(lam: Complex<T>, z: Complex<T>, h: T, e: Complex<T>) -> Complex<T> {
    if z.norm() < T::of(1e-4) {
        let one = Complex::new(T::one(), T::zero());
        (one - z.scale(T::of(0.5)) + z * z / T::of(6.0) - z * z * z / T::of(24.0)).scale(h)
    } else {
        (Complex::new(T::one(), T::zero()) - e) / lam
    }
}

/// `U ← U + dt · RK4` for `U' = −B(U)`.
fn nonlinear_substep<T: Real>(u: &SpectralField<T>, dt: T, params: &CglParams<T>) -> SpectralField<T> {
    let half = dt * T::of(0.5);
    let k1 = nonlinearity(u, params);
    let mut tmp = u.clone();
    tmp.axpy(-half, &k1);
    let k2 = nonlinearity(&tmp, params);
    let mut tmp = u.clone();
    tmp.axpy(-half, &k2);
    let k3 = nonlinearity(&tmp, params);
    let mut tmp = u.clone();
    tmp.axpy(-dt, &k3);
    let k4 = nonlinearity(&tmp, params);
    let mut out = u.clone();
    let sixth = dt / T::of(6.0);
    out.axpy(-sixth, &k1);
    out.axpy(-(sixth + sixth), &k2);
    out.axpy(-(sixth + sixth), &k3);
    out.axpy(-sixth, &k4);
    out
}

/// One Strang step of `U' + LU + B(U) = f` for the shifted unknown `U = u + ζ`.
fn strang<T: Real>(
    big_u: &SpectralField<T>,
    dt: T,
    f: Option<&SpectralField<T>>,
    half: &HalfStep<T>,
    params: &CglParams<T>,
) -> SpectralField<T> {
    let a = half.apply(big_u, f);
    let b = nonlinear_substep(&a, dt, params);
    half.apply(&b, f)
}

fn check_state<T: Real>(u: &SpectralField<T>, t: T, params: &CglParams<T>, config: &SolverConfig<T>) -> Result<()> {
    if !u.is_finite() {
        return Err(CglError::NonFinite { time: t.as_f64() });
    }
    let norm = sobolev_norm(u, params.s_real());
    if !norm.is_finite() {
        return Err(CglError::NonFinite { time: t.as_f64() });
    }
    if norm > config.blowup_threshold {
        return Err(CglError::BlowUp { time: t.as_f64(), norm: norm.as_f64() });
    }
    Ok(())
}

/// One time step of `∂_t u + L(u+ζ) + B(u+ζ) = f` with `f` and `ζ` frozen.
///
/// The linear part is integrated exactly and the nonlinearity by Strang
/// splitting, so the step is second order in `dt`.
pub fn step<T: Real>(
    u: &SpectralField<T>,
    dt: T,
    forcing: Option<&SpectralField<T>>,
    shift: Option<&SpectralField<T>>,
    params: &CglParams<T>,
    config: &SolverConfig<T>,
) -> Result<SpectralField<T>> {
    if !(dt > T::zero()) {
        return Err(CglError::InvalidParams("dt must be positive".into()));
    }
    let half = HalfStep::new(u.grid().ksq(), params, dt * T::of(0.5));
    let big_u = match shift {
        Some(z) => u + z,
        None => u.clone(),
    };
    let next = strang(&big_u, dt, forcing, &half, params);
    let next = match shift {
        Some(z) => &next - z,
        None => next,
    };
    check_state(&next, dt, params, config)?;
    Ok(next)
}

/// Time integrator bound to one equation, mask and step-size policy.
#[derive(Clone, Debug)]
pub struct Solver<'a, T: Real> {
    pub params: &'a CglParams<T>,
    pub mask: &'a LocalizationMask<T>,
    pub config: SolverConfig<T>,
}

struct Piece<T: Real> {
    start: T,
    end: T,
    forcing: Option<SpectralField<T>>,
}

impl<'a, T: Real> Solver<'a, T> {
    pub fn new(params: &'a CglParams<T>, mask: &'a LocalizationMask<T>, config: SolverConfig<T>) -> Self {
        Self { params, mask, config }
    }

    /// Solves over the schedule; a blow-up is an error.
    pub fn solve(
        &self,
        u0: &SpectralField<T>,
        schedule: &ControlSchedule<T>,
        h: Option<&dyn TimeForcing<T>>,
        recording: Recording,
    ) -> Result<Trajectory<T>> {
        let (traj, err) = self.run(u0, schedule, h, recording)?;
        match err {
            Some(e) => Err(e),
            None => Ok(traj),
        }
    }

    /// Like [`Self::solve`] but a blow-up ends the trajectory early and is
    /// reported through [`Trajectory::blowup_time`].
    pub fn solve_lenient(
        &self,
        u0: &SpectralField<T>,
        schedule: &ControlSchedule<T>,
        h: Option<&dyn TimeForcing<T>>,
        recording: Recording,
    ) -> Result<Trajectory<T>> {
        Ok(self.run(u0, schedule, h, recording)?.0)
    }

    fn pieces(&self, seg_start: T, seg_end: T, control: &SegmentControl<T>, h: Option<&dyn TimeForcing<T>>) -> Result<Vec<Piece<T>>> {
        let mut cuts = vec![seg_start, seg_end];
        if let Some(h) = h {
            cuts.extend(h.breakpoints(seg_start, seg_end));
        }
        if let SegmentControl::Path(p) = control {
            cuts.extend(p.breakpoints(T::zero(), seg_end - seg_start).into_iter().map(|t| t + seg_start));
        }
        cuts.sort_by(|a, b| a.partial_cmp(b).expect("finite times"));
        cuts.dedup();
        let constant = match control {
            SegmentControl::Constant(eta) => Some(self.mask.apply(eta)?),
            _ => None,
        };
        let mut pieces = Vec::with_capacity(cuts.len() - 1);
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            if !(b > a) {
                continue;
            }
            let mid = (a + b) * T::of(0.5);
            let mut f: Option<SpectralField<T>> = h.map(|h| h.value_at(mid));
            let ctrl = match control {
                SegmentControl::None => None,
                SegmentControl::Constant(_) => constant.clone(),
                SegmentControl::Path(p) => Some(self.mask.apply(&p.value_at(mid - seg_start))?),
            };
            if let Some(c) = ctrl {
                f = Some(match f {
                    Some(f) => &f + &c,
                    None => c,
                });
            }
            let f = f.filter(|f| !f.is_zero());
            pieces.push(Piece { start: a, end: b, forcing: f });
        }
        Ok(pieces)
    }

    fn dt_cap(&self, big_u: &SpectralField<T>, fnorm: T) -> T {
        let mut cap = self.config.dt_max;
        if fnorm > T::zero() {
            cap = cap.min(self.config.forcing_cap / fnorm);
        }
        let sup = big_u.sup_norm();
        let rate = self.params.c * sup.powi(2 * self.params.p as i32);
        if rate > T::zero() {
            cap = cap.min(self.config.nonlinear_cap / rate);
        }
        cap
    }

    fn run(
        &self,
        u0: &SpectralField<T>,
        schedule: &ControlSchedule<T>,
        h: Option<&dyn TimeForcing<T>>,
        recording: Recording,
    ) -> Result<(Trajectory<T>, Option<CglError>)> {
        schedule.validate()?;
        if u0.grid() != self.mask.grid() {
            return Err(CglError::GridMismatch);
        }
        let params = self.params;
        check_state(u0, T::zero(), params, &self.config)?;
        let mut traj = Trajectory::start(u0);
        let mut u = u0.clone();
        let mut t = T::zero();
        let ksq = u0.grid().ksq();
        let mut cached: Option<HalfStep<T>> = None;
        for seg in schedule.segments() {
            let seg_end = t + seg.duration;
            let pieces = self.pieces(t, seg_end, &seg.control, h)?;
            let mut big_u = match &seg.shift {
                Some(z) => &u + z,
                None => u.clone(),
            };
            for piece in pieces {
                let fnorm = piece.forcing.as_ref().map_or(T::zero(), |f| sobolev_norm(f, params.s_real() - T::one()));
                let mut local = piece.start;
                loop {
                    let remaining = piece.end - local;
                    let cap = self.dt_cap(&big_u, fnorm);
                    // slack keeps the step count independent of round-off in absolute time
                    let n = (remaining / cap - T::of(1e-9)).ceil().max(T::one());
                    let dt = remaining / n;
                    if cached.as_ref().map_or(true, |c| c.h != dt * T::of(0.5)) {
                        cached = Some(HalfStep::new(ksq, params, dt * T::of(0.5)));
                    }
                    let half = cached.as_ref().expect("just set");
                    big_u = strang(&big_u, dt, piece.forcing.as_ref(), half, params);
                    let last = n <= T::one();
                    local = if last { piece.end } else { local + dt };
                    let current = match &seg.shift {
                        Some(z) => &big_u - z,
                        None => big_u.clone(),
                    };
                    if let Err(e) = check_state(&current, local, params, &self.config) {
                        if matches!(e, CglError::BlowUp { .. } | CglError::NonFinite { .. }) {
                            traj.record(local, &current);
                            traj.blowup_time = Some(local);
                        }
                        return Ok((traj, Some(e)));
                    }
                    if recording == Recording::Steps {
                        traj.record(local, &current);
                    }
                    if last {
                        break;
                    }
                }
            }
            u = match &seg.shift {
                Some(z) => &big_u - z,
                None => big_u,
            };
            t = seg_end;
            if recording != Recording::Final {
                traj.record(t, &u);
            }
        }
        if recording == Recording::Final {
            traj.record(t, &u);
        }
        Ok((traj, None))
    }
}

/// `ℛ` over a whole schedule: see [`Solver::solve`].
pub fn solve<T: Real>(
    u0: &SpectralField<T>,
    schedule: &ControlSchedule<T>,
    h: Option<&dyn TimeForcing<T>>,
    params: &CglParams<T>,
    mask: &LocalizationMask<T>,
    config: &SolverConfig<T>,
    recording: Recording,
) -> Result<Trajectory<T>> {
    Solver::new(params, mask, config.clone()).solve(u0, schedule, h, recording)
}

/// `S(u, η) = ℛ_1(u, 0, χη)`.
pub fn time_one_map<T: Real>(
    u: &SpectralField<T>,
    eta: std::sync::Arc<dyn TimeForcing<T>>,
    params: &CglParams<T>,
    mask: &LocalizationMask<T>,
    config: &SolverConfig<T>,
) -> Result<SpectralField<T>> {
    let mut schedule = ControlSchedule::new();
    schedule.push(T::one(), SegmentControl::Path(eta), None);
    let traj = Solver::new(params, mask, config.clone()).solve(u, &schedule, None, Recording::Final)?;
    Ok(traj.final_state().clone())
}
