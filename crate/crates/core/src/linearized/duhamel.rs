use crate::dynamics::{apply_q, apply_q_adjoint};
use crate::error::{CglError, Result};
use crate::linearized::context::LinearizationContext;
use crate::scalar::Real;
use crate::spectral::{real_inner_product, SpectralField};

/// Control for the linearized problem: one field per mesh interval
/// (piecewise constant in time). `None` entries are zero.
pub type ControlPath<T> = [Option<SpectralField<T>>];

/// `v ↦ P(dt·A) v` with `P(z) = 1 + z + z²/2 + z³/6 + z⁴/24` and
/// `A = −Q(ũ; ·)` (or `A* = −Q*(ũ; ·)`), i.e. one RK4 step of `v' = A v`.
fn rk4_polynomial<T: Real>(
    ctx: &LinearizationContext<T>,
    u: &SpectralField<T>,
    v: &SpectralField<T>,
    dt: T,
    adjoint: bool,
) -> Result<SpectralField<T>> {
    let apply = |x: &SpectralField<T>| -> Result<SpectralField<T>> {
        let q = if adjoint { apply_q_adjoint(u, x, &ctx.params)? } else { apply_q(u, x, &ctx.params)? };
        Ok(-&q)
    };
    let half = dt * T::of(0.5);
    let k1 = apply(v)?;
    let mut tmp = v.clone();
    tmp.axpy(half, &k1);
    let k2 = apply(&tmp)?;
    let mut tmp = v.clone();
    tmp.axpy(half, &k2);
    let k3 = apply(&tmp)?;
    let mut tmp = v.clone();
    tmp.axpy(dt, &k3);
    let k4 = apply(&tmp)?;
    let sixth = dt / T::of(6.0);
    let mut out = v.clone();
    out.axpy(sixth, &k1);
    out.axpy(sixth + sixth, &k2);
    out.axpy(sixth + sixth, &k3);
    out.axpy(sixth, &k4);
    Ok(out)
}

fn check_len<T: Real>(ctx: &LinearizationContext<T>, g: &ControlPath<T>) -> Result<()> {
    if g.len() != ctx.steps() {
        return Err(CglError::InvalidParams(format!("control has {} pieces, mesh has {}", g.len(), ctx.steps())));
    }
    Ok(())
}

/// `A_T g`: solves `v̇ + Lv + Q(ũ; v) = χg`, `v(0) = 0` on the context's mesh.
pub fn solve_linearized<T: Real>(ctx: &LinearizationContext<T>, g: &ControlPath<T>) -> Result<SpectralField<T>> {
    solve_linearized_from(ctx, g, 0)
}

/// Like [`solve_linearized`] but skips the (zero) steps before `first`.
pub(crate) fn solve_linearized_from<T: Real>(
    ctx: &LinearizationContext<T>,
    g: &ControlPath<T>,
    first: usize,
) -> Result<SpectralField<T>> {
    check_len(ctx, g)?;
    let dt = ctx.dt();
    let mut v = SpectralField::zeros(ctx.grid());
    for (n, gn) in g.iter().enumerate().skip(first) {
        let f = gn.as_ref().map(|g| ctx.mask.apply(g)).transpose()?;
        v = ctx.half_linear(&v, f.as_ref(), false);
        v = rk4_polynomial(ctx, ctx.midpoint(n), &v, dt, false)?;
        v = ctx.half_linear(&v, f.as_ref(), false);
        if !v.is_finite() {
            return Err(CglError::NonFinite { time: (dt * T::of_usize(n + 1)).as_f64() });
        }
    }
    Ok(v)
}

/// Solution of the backward problem `ẇ − L*w − Q*(ũ; w) = 0`, `w(T) = w_0`.
#[derive(Clone, Debug)]
pub struct AdjointPath<T: Real> {
    pub times: Vec<T>,
    /// `w(t_n)` on the mesh.
    pub states: Vec<SpectralField<T>>,
    /// Per-interval weights `w̃_n` for which `(A_T g, w_0) = Σ_n dt (χg_n, w̃_n)`
    /// holds exactly for the discrete forward scheme.
    pub step_weights: Vec<SpectralField<T>>,
}

/// Integrates the adjoint problem backward with the exact transpose of the forward scheme.
pub fn solve_adjoint<T: Real>(ctx: &LinearizationContext<T>, w0: &SpectralField<T>) -> Result<AdjointPath<T>> {
    w0.check_grid(&SpectralField::zeros(ctx.grid()))?;
    let n = ctx.steps();
    let dt = ctx.dt();
    let mut states = vec![SpectralField::zeros(ctx.grid()); n + 1];
    let mut weights = vec![SpectralField::zeros(ctx.grid()); n];
    states[n] = w0.clone();
    for k in (0..n).rev() {
        let w = &states[k + 1];
        let a = ctx.half_linear(w, None, true);
        let b = rk4_polynomial(ctx, ctx.midpoint(k), &a, dt, true)?;
        let mut wt = ctx.phi_adjoint(&b);
        wt += &ctx.phi_adjoint(w);
        weights[k] = wt.scale(T::one() / dt);
        states[k] = ctx.half_linear(&b, None, true);
        if !states[k].is_finite() {
            return Err(CglError::NonFinite { time: (dt * T::of_usize(k)).as_f64() });
        }
    }
    Ok(AdjointPath { times: ctx.mesh(), states, step_weights: weights })
}

/// `Σ_n dt (χ g_n, w̃_n)`, the control-side of the duality identity.
pub fn control_pairing<T: Real>(ctx: &LinearizationContext<T>, g: &ControlPath<T>, adj: &AdjointPath<T>) -> Result<T> {
    check_len(ctx, g)?;
    let mut acc = T::zero();
    for (gn, wn) in g.iter().zip(&adj.step_weights) {
        if let Some(gn) = gn {
            acc += real_inner_product(&ctx.mask.apply(gn)?, wn)?;
        }
    }
    Ok(acc * ctx.dt())
}

/// Trapezoidal `∫_0^T (χ g(s), w(s)) ds` over the mesh values of `w`.
pub fn control_pairing_trapezoid<T: Real>(
    ctx: &LinearizationContext<T>,
    g: &ControlPath<T>,
    adj: &AdjointPath<T>,
) -> Result<T> {
    check_len(ctx, g)?;
    let mut acc = T::zero();
    for (n, gn) in g.iter().enumerate() {
        if let Some(gn) = gn {
            let cg = ctx.mask.apply(gn)?;
            let a = real_inner_product(&cg, &adj.states[n])?;
            let b = real_inner_product(&cg, &adj.states[n + 1])?;
            acc += (a + b) * T::of(0.5);
        }
    }
    Ok(acc * ctx.dt())
}
