//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any fails.

mod common;

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use cgl_core::dynamics::{
    derivative_bk, nonlinearity, solve, CglParams, ConstantForcing, ControlSchedule, Recording, SolverConfig,
    TimeForcing,
};
use cgl_core::linearized::{
    control_pairing, gramian, obstruction_check, solve_adjoint, solve_linearized, LinearizationContext,
};
use cgl_core::mixing::{mixing_experiment, Coupling};
use cgl_core::noise::HaarNoiseSpec;
use cgl_core::saturation::{chain_linear, is_generator, lattice_closure, trig_basis, FrequencySet};
use cgl_core::spectral::{
    gradient_norm_sq, l2_norm, l2_norm_sq, real_inner_product, sobolev_norm, LocalizationMask, MaskProfile,
    SpectralField, TorusGrid,
};
use cgl_core::synthesis::{impulse_limit_probe, max_leak, SynthesisOptions, Synthesizer};
use common::{field_diff, random_field, rel_diff, rng};
use num_complex::Complex;
use rand::Rng;

type Outcome = Result<(bool, String), Box<dyn std::error::Error>>;
type Criterion = (&'static str, Duration, fn() -> Outcome);

fn grid1(n: usize) -> TorusGrid<f64> {
    TorusGrid::new(1, n).unwrap()
}

fn flat(g: &TorusGrid<f64>) -> LocalizationMask<f64> {
    LocalizationMask::new(g, &MaskProfile::constant()).unwrap()
}

fn plateau(g: &TorusGrid<f64>, width: f64) -> LocalizationMask<f64> {
    LocalizationMask::new(g, &MaskProfile::interval(1, PI / 2.0, 1.5 * PI, width)).unwrap()
}

fn cube(d: usize, radius: i64) -> impl Iterator<Item = Vec<i64>> {
    let side = 2 * radius + 1;
    (0..side.pow(d as u32)).map(move |mut flat| {
        (0..d)
            .map(|_| {
                let v = flat % side - radius;
                flat /= side;
                v
            })
            .collect()
    })
}

/// Frequencies carried by the fields, read off their coefficients.
fn support(fields: &[SpectralField<f64>]) -> FrequencySet {
    let grid = fields[0].grid();
    let mut out = Vec::new();
    for f in fields {
        for (flat, k) in grid.modes() {
            if f.coeffs()[flat].norm() > 1e-10 {
                out.push(FrequencySet::canonical(&k));
            }
        }
    }
    FrequencySet::new(grid.dim(), out).unwrap()
}

fn saturation_algebra() -> Outcome {
    let kappa = FrequencySet::kappa(3);
    let chain = chain_linear(&kappa, 4)?;
    // brute force: multiply the real basis of each level by that of 𝒦 on a 16³ grid
    let grid = TorusGrid::<f64>::new(3, 16)?;
    let factors = trig_basis(&grid, &kappa, false)?;
    let mut level = support(&factors);
    let mut grid_match = level == chain.levels[0];
    let mut ball_match = true;
    let mut literal_match = true;
    for j in 0..=4 {
        if j > 0 {
            let basis = trig_basis(&grid, &level, false)?;
            let mut products = basis.clone();
            for b in &basis {
                for f in &factors {
                    products.push(b.product(f)?);
                }
            }
            level = support(&products);
            grid_match &= level == chain.levels[j];
        }
        let ball = |r: i64| {
            FrequencySet::new(3, cube(3, r).filter(|m| m.iter().map(|x| x.abs()).sum::<i64>() <= r)).unwrap().representatives()
        };
        ball_match &= chain.levels[j] == ball(j as i64 + 1);
        literal_match &= chain.levels[j] == ball(j as i64);
    }
    let mut r = rng(2024);
    let mut agree = 0;
    for i in 0..50 {
        let d = 1 + i % 3;
        let n = r.random_range(1..=4);
        let mut v = vec![vec![0i64; d]];
        for _ in 0..n {
            v.push((0..d).map(|_| r.random_range(-3..=3)).collect());
        }
        let set = FrequencySet::new(d, v)?;
        let full = FrequencySet::new(d, cube(d, 5))?;
        agree += usize::from(is_generator(&set) == (lattice_closure(&set, 5) == full));
    }
    let generator = is_generator(&kappa);
    Ok((
        generator && grid_match && ball_match && agree == 50,
        format!(
            "generator(K)={generator}, levels 0..4 match grid products={grid_match}, level j = l1 ball of radius j+1: {ball_match} \
             (radius j: {literal_match}; level 0 is K itself), SNF vs closure {agree}/50"
        ),
    ))
}

fn operator_correctness() -> Outcome {
    let g = grid1(32);
    let mut r = rng(7);
    let mut worst_fd: f64 = 0.0;
    let mut worst_formula: f64 = 0.0;
    for p in [1u32, 2] {
        let params = CglParams::new(0.1, 0.0, 1.0, p, 1, 1)?;
        for _ in 0..5 {
            let u = random_field(&g, 3, &mut r);
            let v = random_field(&g, 3, &mut r);
            let b1 = derivative_bk(&u, &[&v], &params)?;
            let eps = 1e-5;
            let fd = (&nonlinearity(&(&u + &v.scale(eps)), &params) - &nonlinearity(&(&u - &v.scale(eps)), &params))
                .scale(0.5 / eps);
            worst_fd = worst_fd.max(field_diff(&fd, &b1) / l2_norm(&b1));
            // ic((p+1)|u|^{2p} v + p |u|^{2p-2} u² v̄)
            let (us, vs, bs) = (u.physical(), v.physical(), b1.physical());
            let pf = p as f64;
            let mut diff = 0.0;
            let mut size = 0.0;
            for i in 0..g.len() {
                let m = us[i].norm_sqr();
                let e = Complex::new(0.0, 1.0)
                    * (vs[i] * (pf + 1.0) * m.powi(p as i32) + us[i] * us[i] * vs[i].conj() * pf * m.powi(p as i32 - 1));
                diff += (bs[i] - e).norm_sqr();
                size += e.norm_sqr();
            }
            worst_formula = worst_formula.max((diff / size).sqrt());
        }
    }
    let params = CglParams::new(0.1, 0.0, 1.3, 2, 1, 1)?;
    let one = SpectralField::constant(&g, Complex::new(1.0, 0.0));
    let mut worst_b5: f64 = 0.0;
    for _ in 0..20 {
        let zeta = SpectralField::mode(&g, &[r.random_range(-4..=4)], Complex::new(r.random::<f64>() - 0.5, r.random::<f64>() - 0.5))?;
        let xi = SpectralField::mode(&g, &[r.random_range(-4..=4)], Complex::new(r.random::<f64>() - 0.5, r.random::<f64>() - 0.5))?;
        let base = random_field(&g, 2, &mut r);
        let b5 = derivative_bk(&base, &[&zeta, &xi, &one, &one, &one], &params)?.physical();
        let (z, x) = (zeta.physical(), xi.physical());
        let mut diff = 0.0;
        let mut size = 0.0;
        for i in 0..g.len() {
            let (z, x) = (z[i], x[i]);
            let e = Complex::new(0.0, 12.0 * 1.3) * (z * x * 3.0 + z.conj() * x.conj() + z.conj() * x * 3.0 + z * x.conj() * 3.0);
            diff += (b5[i] - e).norm_sqr();
            size += e.norm_sqr();
        }
        worst_b5 = worst_b5.max((diff / size).sqrt());
    }
    Ok((
        worst_fd < 1e-6 && worst_formula < 1e-6 && worst_b5 < 1e-8,
        format!("B1 vs FD {worst_fd:.1e}, B1 vs formula {worst_formula:.1e}, B5 identity {worst_b5:.1e}"),
    ))
}

fn solver_fidelity() -> Outcome {
    let g = grid1(32);
    let params = CglParams::new(0.1, 0.1, 1.0, 1, 1, 1)?;
    let mask = flat(&g);
    let unlimited = |dt: f64| SolverConfig { dt_max: dt, blowup_threshold: 1e6, forcing_cap: 1e12, nonlinear_cap: 1e12 };
    let u0 = random_field(&g, 3, &mut rng(8)).scale(2.0);
    let traj = solve(&u0, &ControlSchedule::free(0.2), None, &params, &mask, &unlimited(1e-4), Recording::Steps)?;
    let rate = |u: &SpectralField<f64>| -0.1 * gradient_norm_sq(u) - 0.1 * l2_norm_sq(u);
    let mut defect: f64 = 0.0;
    for n in 0..traj.len() - 1 {
        let dt = traj.times[n + 1] - traj.times[n];
        let lhs = 0.5 * (l2_norm_sq(&traj.states[n + 1]) - l2_norm_sq(&traj.states[n])) / dt;
        let rhs = 0.5 * (rate(&traj.states[n]) + rate(&traj.states[n + 1]));
        defect = defect.max((lhs - rhs).abs() / rhs.abs());
    }
    let run = |dt: f64| -> Result<SpectralField<f64>, Box<dyn std::error::Error>> {
        Ok(solve(&u0, &ControlSchedule::free(0.5), None, &params, &mask, &unlimited(dt), Recording::Final)?.final_state().clone())
    };
    let reference = run(0.005 / 16.0)?;
    let errs = [0.02, 0.01, 0.005].map(|dt| run(dt).map(|u| field_diff(&u, &reference)));
    let errs: Vec<f64> = errs.into_iter().collect::<Result<_, _>>()?;
    let order = errs.windows(2).map(|w| (w[0] / w[1]).log2()).fold(f64::INFINITY, f64::min);
    Ok((defect < 1e-6 && order >= 1.9, format!("energy defect {defect:.1e}, observed order {order:.3}")))
}

fn adjoint_duality() -> Outcome {
    let g = grid1(32);
    let mask = plateau(&g, 0.6);
    let mut worst: f64 = 0.0;
    for p in [1u32, 2] {
        let params = CglParams::new(0.2, 0.1, 1.0, p, 1, 1)?;
        let u0 = random_field(&g, 3, &mut rng(10 + p as u64)).scale(2.0);
        let ctx = LinearizationContext::from_solution(&u0, None, 0.5, 40, &params, &mask, &SolverConfig::default())?;
        for seed in 0..10u64 {
            let mut r = rng(1000 * p as u64 + seed);
            let ctrl: Vec<Option<SpectralField<f64>>> = (0..ctx.steps()).map(|_| Some(random_field(&g, 3, &mut r))).collect();
            let w0 = random_field(&g, 5, &mut r);
            let lhs = real_inner_product(&solve_linearized(&ctx, &ctrl)?, &w0)?;
            let rhs = control_pairing(&ctx, &ctrl, &solve_adjoint(&ctx, &w0)?)?;
            worst = worst.max(rel_diff(lhs, rhs));
        }
    }
    Ok((worst < 1e-6, format!("worst relative mismatch {worst:.1e} over 20 pairs")))
}

fn gramian_dichotomy() -> Outcome {
    let g = grid1(32);
    let params = CglParams::new(0.1, 0.1, 1.0, 1, 1, 1)?;
    let mask = flat(&g);
    let cfg = SolverConfig::default();
    let base = FrequencySet::new(1, [[0], [1]])?;
    let probe = FrequencySet::new(1, (0..=4).map(|k| vec![k]))?;
    let u0 = SpectralField::from_fn(&g, |x| Complex::new(1.0 + x[0].cos(), 0.5 * x[0].sin()));
    let ctx = LinearizationContext::from_solution(&u0, None, 1.0, 80, &params, &mask, &cfg)?;
    let sigma = gramian(&ctx, &base, 8, &probe)?.sigma_min;

    let params = CglParams::new(0.2, 0.1, 1.0, 1, 1, 1)?;
    let even = FrequencySet::new(1, [[0], [2]])?;
    let u0 = &SpectralField::cos_mode(&g, &[2])? + &SpectralField::constant(&g, Complex::new(0.5, 0.2));
    let h = ConstantForcing(SpectralField::cos_mode(&g, &[2])?.scale(0.1));
    let ctx = LinearizationContext::from_solution(&u0, Some(&h as &dyn TimeForcing<f64>), 1.0, 40, &params, &mask, &cfg)?;
    let leak = obstruction_check(&ctx, &even, 4, &[1])?;
    Ok((sigma > 1e-6 && leak < 1e-8, format!("generator sigma_min {sigma:.2e} (9 probe modes), even base response at mode 1 {leak:.1e}")))
}

fn impulse_primitive() -> Outcome {
    let g = grid1(64);
    let params = CglParams::new(0.1, 0.1, 1.0, 1, 1, 1)?;
    let mask = plateau(&g, 0.5);
    let cfg = SolverConfig::default();
    let zero = SpectralField::zeros(&g);
    let cos = SpectralField::cos_mode(&g, &[1])?;
    let eta = cos.scale(1.0 / sobolev_norm(&mask.apply(&cos)?, 1.0));
    let zeta = cos.scale(sobolev_norm(&nonlinearity(&cos, &params), 1.0).powf(-1.0 / 3.0));
    let deltas = [1e-1, 1e-2, 1e-3];
    let mut ok = true;
    let mut detail = Vec::new();
    for (name, e, z) in [("+chi eta", &eta, &zero), ("-B(zeta)", &zero, &zeta)] {
        let rows = impulse_limit_probe(&zero, e, z, &deltas, None, &params, &mask, &cfg)?;
        let rel: Vec<f64> = rows.iter().map(|r| r.error.unwrap_or(f64::INFINITY) / r.target_norm).collect();
        ok &= rel.windows(2).all(|w| w[1] < w[0]) && rel[2] < 0.05;
        detail.push(format!("{name}: {}", rel.iter().map(|x| format!("{:.1}%", 100.0 * x)).collect::<Vec<_>>().join(" > ")));
    }
    Ok((ok, detail.join("; ")))
}

fn flagship_steering() -> Outcome {
    let g = grid1(128);
    let params = CglParams::new(0.1, 0.1, 1.0, 1, 1, 1)?;
    let mask = plateau(&g, 0.5);
    let cfg = SolverConfig::default();
    let base = FrequencySet::new(1, [[0], [1]])?;
    let syn = Synthesizer::new(&params, &mask, &base, cfg.clone(), SynthesisOptions::default())?;
    let zero = SpectralField::zeros(&g);
    let u1 = SpectralField::from_fn(&g, |x| Complex::new(0.1 * (1.0 + (2.0 * x[0]).cos()), 0.0));
    let scale = l2_norm(&u1);
    let plan = syn.steer_indicator(&zero, &u1, 0.1 * scale, 1.0)?;
    let end = plan.replay(&zero, None, &params, &mask, &cfg, Recording::Final)?;
    let rep = syn.steering_report(&plan, &zero, &u1, end.final_state());
    let (inside, outside) = (rep.interior_error / scale, rep.exterior_change / scale);
    Ok((
        inside < 0.1 && outside < 0.1 && rep.total_time <= 1.0,
        format!(
            "interior error {:.2}%, exterior change {:.2}%, time {:.3}, level {}, {} segments",
            100.0 * inside,
            100.0 * outside,
            rep.total_time,
            rep.level,
            plan.segments.len()
        ),
    ))
}

fn exact_time_steering() -> Outcome {
    let g = grid1(64);
    let params = CglParams::new(0.1, 0.1, 1.0, 1, 1, 1)?;
    let mask = flat(&g);
    let cfg = SolverConfig::default();
    let base = FrequencySet::new(1, [[0], [1]])?;
    let syn = Synthesizer::new(&params, &mask, &base, cfg.clone(), SynthesisOptions::default())?;
    let zero = SpectralField::zeros(&g);
    let u1 = SpectralField::cos_mode(&g, &[1])?.scale(0.1);
    let plan = syn.steer_full(&zero, &u1, 0.05, 1.0)?;
    let traj = plan.replay(&zero, None, &params, &mask, &cfg, Recording::Final)?;
    let err = sobolev_norm(&(traj.final_state() - &u1), 1.0);
    let t = traj.final_time();
    Ok((err < 0.05 && (t - 1.0).abs() < 1e-9, format!("H^1 error {err:.4} at t = {t:.12}")))
}

fn mixing_decay() -> Outcome {
    let g = grid1(32);
    let params = CglParams::new(0.1, 0.5, 1.0, 2, 1, 1)?;
    let mask = flat(&g);
    let spec = HaarNoiseSpec::uniform(FrequencySet::new(1, [[0], [1]])?, 1.0, 3, 1);
    let u0b = SpectralField::from_fn(&g, |x| Complex::new(0.5 * (1.0 + x[0].cos()), 0.0));
    let run = mixing_experiment(&SpectralField::zeros(&g), &u0b, 256, 30, Coupling::Common, &spec, &params, &mask, &SolverConfig::default())?;
    let ratio = run.records[0].distance / run.records[30].distance;
    let (ok, fit) = match &run.fit {
        Ok(f) => (
            f.sigma > 0.0 && f.r_squared > 0.9,
            format!("sigma {:.3}, r^2 {:.3} over {} steps", f.sigma, f.r_squared, f.window.len()),
        ),
        Err(e) => (false, format!("no fit: {e}")),
    };
    Ok((ok && ratio >= 10.0, format!("d(0)/d(30) = {ratio:.1}, {fit}, {} members excluded", run.excluded)))
}

fn confinement() -> Outcome {
    let g = grid1(64);
    let params = CglParams::new(0.1, 0.1, 1.0, 1, 1, 1)?;
    let mask = flat(&g);
    let cfg = SolverConfig::default();
    let even = FrequencySet::new(1, [[0], [2]])?;
    let h = SpectralField::cos_mode(&g, &[2])?.scale(0.05);
    let syn = Synthesizer::new(&params, &mask, &even, cfg.clone(), SynthesisOptions::default())?.with_background(h.clone());
    let u0 = SpectralField::cos_mode(&g, &[4])?.scale(0.05);
    let u1 = SpectralField::cos_mode(&g, &[2])?.scale(0.1);
    let plan = syn.steer_full(&u0, &u1, 0.05, 1.0)?;
    let traj = plan.replay(&u0, Some(&h), &params, &mask, &cfg, Recording::Steps)?;
    let leak = max_leak(traj.states.iter(), &even);
    Ok((leak < 1e-8, format!("max leak {leak:.1e} over {} sampled times", traj.len())))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("saturation algebra", Duration::from_secs(10), saturation_algebra),
        ("operator correctness", Duration::from_secs(5), operator_correctness),
        ("solver fidelity", Duration::from_secs(30), solver_fidelity),
        ("adjoint duality", Duration::from_secs(60), adjoint_duality),
        ("gramian dichotomy", Duration::from_secs(120), gramian_dichotomy),
        ("impulse primitive", Duration::from_secs(60), impulse_primitive),
        ("flagship steering", Duration::from_secs(600), flagship_steering),
        ("exact-time steering", Duration::from_secs(600), exact_time_steering),
        ("mixing decay", Duration::from_secs(1800), mixing_decay),
        ("attainable-set confinement", Duration::from_secs(120), confinement),
    ];
    let mut failed = 0;
    for (i, (name, limit, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let (ok, detail) = match outcome {
            Ok((ok, detail)) => (ok && elapsed <= limit, detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!ok);
        println!(
            "{} {:>2} {name}: {detail} [{:.1}s of {}s]",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
