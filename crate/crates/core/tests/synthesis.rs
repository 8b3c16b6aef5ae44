mod common;

use std::f64::consts::PI;

use cgl_core::dynamics::{nonlinearity, CglParams, Recording, SolverConfig};
use cgl_core::saturation::{chain_nonlinear, FrequencySet};
use cgl_core::spectral::{l2_norm, sobolev_norm, LocalizationMask, MaskProfile, SpectralField, TorusGrid};
use cgl_core::synthesis::{
    decompose_target, impulse_limit_probe, max_leak, spectral_leak, SegmentKind, SynthesisOptions, SynthesisPlan,
    Synthesizer, DECOMPOSITION_TOLERANCE,
};
use cgl_core::CglError;
use common::{field_diff, random_real_field, rng};
use num_complex::Complex;
use proptest::prelude::*;

fn params() -> CglParams<f64> {
    CglParams::new(0.1, 0.1, 1.0, 1, 1, 1).unwrap()
}

fn grid() -> TorusGrid<f64> {
    TorusGrid::new(1, 64).unwrap()
}

fn bump(g: &TorusGrid<f64>) -> LocalizationMask<f64> {
    LocalizationMask::new(g, &MaskProfile::interval(1, PI / 2.0, 1.5 * PI, 0.5)).unwrap()
}

fn flat(g: &TorusGrid<f64>) -> LocalizationMask<f64> {
    LocalizationMask::new(g, &MaskProfile::constant()).unwrap()
}

fn base() -> FrequencySet {
    FrequencySet::new(1, [[0], [1]]).unwrap()
}

fn cos(g: &TorusGrid<f64>, l: i64) -> SpectralField<f64> {
    SpectralField::cos_mode(g, &[l]).unwrap()
}

fn sum_of_images(zetas: &[SpectralField<f64>], p: &CglParams<f64>) -> SpectralField<f64> {
    let mut s = SpectralField::zeros(zetas[0].grid());
    for z in zetas {
        s = &s + &nonlinearity(z, p);
    }
    s
}

#[test]
fn decomposing_a_single_image() {
    let (g, p) = (grid(), params());
    let chain = chain_nonlinear(&base(), 2, 1).unwrap();
    let eta = nonlinearity(&cos(&g, 1), &p);
    let dec = decompose_target(&eta, &chain, 1, &p).unwrap();
    assert_eq!(dec.zetas.len(), 1);
    assert!(dec.residual < 1e-10);
    // ζ is cos x up to a q-th root of unity
    let z = &dec.zetas[0];
    assert!(field_diff(&nonlinearity(z, &p), &eta) < 1e-10 * l2_norm(&eta));
    let c = z.coeff(&[1]) / Complex::new(0.5, 0.0);
    assert!((c.powu(3) - 1.0).norm() < 1e-10);

    // −B(ζ) is absorbed by the odd power into −ζ
    let dec = decompose_target(&(-&eta), &chain, 1, &p).unwrap();
    assert_eq!(dec.zetas.len(), 1);
    assert!(field_diff(&dec.zetas[0], &(-&cos(&g, 1))) < 1e-10);
}

#[test]
fn decomposing_the_frequency_three_mode() {
    let (g, p) = (grid(), params());
    let chain = chain_nonlinear(&base(), 1, 1).unwrap();
    for eta in [cos(&g, 3), SpectralField::sin_mode(&g, &[3]).unwrap(), cos(&g, 2).scale_complex(Complex::new(0.3, -1.2))] {
        let dec = decompose_target(&eta, &chain, 1, &p).unwrap();
        assert!(!dec.zetas.is_empty());
        let rel = field_diff(&sum_of_images(&dec.zetas, &p), &eta) / l2_norm(&eta);
        assert!(rel < DECOMPOSITION_TOLERANCE, "{rel:e}");
        assert!(dec.dictionary_size > 0);
    }
}

#[test]
fn decomposition_rejects_unreachable_targets() {
    let (g, p) = (grid(), params());
    let chain = chain_nonlinear(&base(), 1, 1).unwrap();
    assert!(matches!(decompose_target(&cos(&g, 4), &chain, 1, &p), Err(CglError::NotInSpan { .. })));
    assert!(decompose_target(&cos(&g, 1), &chain, 0, &p).is_err());
    assert!(decompose_target(&cos(&g, 1), &chain, 2, &p).is_err());
    assert!(decompose_target(&SpectralField::zeros(&g), &chain, 1, &p).unwrap().zetas.is_empty());
}

#[test]
fn probe_errors_decrease_towards_the_limit() {
    let (g, p) = (grid(), params());
    let mask = bump(&g);
    let cfg = SolverConfig::default();
    let deltas = [1e-1, 1e-2, 1e-3];
    let zero = SpectralField::zeros(&g);
    let u0 = cos(&g, 2).scale(0.2);

    // nothing applied: the error is the free drift, which vanishes with δ
    let rows = impulse_limit_probe(&u0, &zero, &zero, &deltas, None, &p, &mask, &cfg).unwrap();
    for w in rows.windows(2) {
        assert!(w[1].error.unwrap() < w[0].error.unwrap());
    }
    assert!(rows[2].error.unwrap() < 1e-3 * l2_norm(&u0).max(1e-3) * 10.0);

    let eta = cos(&g, 1);
    let rows = impulse_limit_probe(&zero, &eta, &zero, &deltas, None, &p, &mask, &cfg).unwrap();
    assert!(rows.windows(2).all(|w| w[1].error.unwrap() < w[0].error.unwrap()));
    assert!(rows[2].error.unwrap() < 0.05 * rows[2].target_norm);

    let zeta = cos(&g, 1).scale(0.8);
    let rows = impulse_limit_probe(&zero, &zero, &zeta, &deltas, None, &p, &mask, &cfg).unwrap();
    assert!(rows.windows(2).all(|w| w[1].error.unwrap() < w[0].error.unwrap()));

    assert!(impulse_limit_probe(&zero, &eta, &zero, &[1e-2, 1e-1], None, &p, &mask, &cfg).is_err());
}

#[test]
fn step0_examples() {
    let (g, p) = (grid(), params());
    let mask = bump(&g);
    let syn = Synthesizer::new(&p, &mask, &base(), SolverConfig::default(), SynthesisOptions::default()).unwrap();
    let zero = SpectralField::zeros(&g);
    let plan = syn.attain_step0(&zero, &zero, 1e-3).unwrap();
    assert!(plan.is_empty());
    assert_eq!(plan.predicted_error, 0.0);

    let eta = cos(&g, 1);
    let jump = sobolev_norm(&syn.localized(&eta, 0).unwrap(), 1.0);
    let plan = syn.attain_step0(&zero, &eta, 0.05 * jump).unwrap();
    assert_eq!(plan.segments.len(), 1);
    assert!(plan.total_time() <= 1e-2 + 1e-15);
    assert!(plan.predicted_error < 0.05 * jump);

    // a loose tolerance is met by the longest window
    let plan = syn.attain_step0(&zero, &eta, 2.0 * jump).unwrap();
    assert_eq!(plan.total_time(), SynthesisOptions::default().delta_max);
}

#[test]
fn recursive_level_one_attains_image() {
    let (g, p) = (grid(), params());
    let mask = bump(&g);
    let syn = Synthesizer::new(&p, &mask, &base(), SolverConfig::default(), SynthesisOptions::default()).unwrap();
    let zero = SpectralField::zeros(&g);
    let eta = nonlinearity(&cos(&g, 1), &p);
    let goal = syn.localized(&eta, 1).unwrap();
    let eps = 0.1 * sobolev_norm(&goal, 1.0);
    let plan = syn.attain_recursive(&zero, 1, &eta, eps, 0.5).unwrap();
    assert!(plan.total_time() <= 0.5);
    assert_eq!(plan.level, 1);
    let replayed = plan.replay(&zero, None, &p, &mask, &SolverConfig::default(), Recording::Final).unwrap();
    let err = sobolev_norm(&(replayed.final_state() - &goal), 1.0);
    assert!(err < eps, "{err:e} vs {eps:e}");
    // level 0 delegates to the single impulse
    let direct = syn.attain_recursive(&zero, 0, &cos(&g, 1), 0.05, 0.1).unwrap();
    assert_eq!(direct.segments.len(), 1);
    assert!(syn.attain_recursive(&zero, 1, &SpectralField::zeros(&g), 0.1, 0.5).unwrap().is_empty());
}

#[test]
fn plans_round_trip_and_replay() {
    let (g, p) = (grid(), params());
    let mask = bump(&g);
    let syn = Synthesizer::new(&p, &mask, &base(), SolverConfig::default(), SynthesisOptions::default()).unwrap();
    let u0 = cos(&g, 2).scale(0.05);
    let eta = cos(&g, 1).scale(0.5);
    let plan = syn.attain_recursive(&u0, 0, &eta, 0.02, 0.1).unwrap();
    let json = serde_json::to_string(&plan).unwrap();
    let back: SynthesisPlan = serde_json::from_str(&json).unwrap();
    assert_eq!(back, plan);
    let cfg = SolverConfig::default();
    let a = plan.replay(&u0, None, &p, &mask, &cfg, Recording::Final).unwrap();
    let b = back.replay(&u0, None, &p, &mask, &cfg, Recording::Final).unwrap();
    assert_eq!(a.final_state(), b.final_state());
    let target = plan.target.to_field(&g).unwrap();
    assert!(sobolev_norm(&(a.final_state() - &target), 1.0) < plan.epsilon);
    let predicted = plan.predicted_final.to_field(&g).unwrap();
    assert!(field_diff(a.final_state(), &predicted) < 1e-10);

    let mut csv = Vec::new();
    plan.write_segments_csv(&mut csv, &g).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("index,kind,start,duration,control_l2\n0,impulse,"));
}

#[test]
fn trivial_steering() {
    let (g, p) = (grid(), params());
    let zero = SpectralField::zeros(&g);
    let mask = bump(&g);
    let syn = Synthesizer::new(&p, &mask, &base(), SolverConfig::default(), SynthesisOptions::default()).unwrap();
    assert!(syn.steer_indicator(&zero, &zero, 0.01, 1.0).unwrap().is_empty());

    let fl = flat(&g);
    let syn = Synthesizer::new(&p, &fl, &base(), SolverConfig::default(), SynthesisOptions::default()).unwrap();
    let u = cos(&g, 1).scale(0.01);
    let plan = syn.steer_full(&u, &u, 0.5, 1.0).unwrap();
    assert!(plan.segments.iter().all(|s| matches!(s.kind, SegmentKind::FreeRun)));
    assert!((plan.total_time() - 1.0).abs() < 1e-12);
    // full steering needs χ ≡ 1
    let syn = Synthesizer::new(&p, &mask, &base(), SolverConfig::default(), SynthesisOptions::default()).unwrap();
    assert!(syn.steer_full(&u, &u, 0.5, 1.0).is_err());
}

#[test]
fn flat_mask_indicator_steering_matches_full_targeting() {
    let (g, p) = (grid(), params());
    let fl = flat(&g);
    let syn = Synthesizer::new(&p, &fl, &base(), SolverConfig::default(), SynthesisOptions::default()).unwrap();
    let zero = SpectralField::zeros(&g);
    let u1 = cos(&g, 1).scale(0.1);
    let eps = 0.05;
    let plan = syn.steer_indicator(&zero, &u1, eps, 0.5).unwrap();
    let end = plan.replay(&zero, None, &p, &fl, &SolverConfig::default(), Recording::Final).unwrap();
    // with 𝒪 the whole torus the interior error is the global L² error
    let report = syn.steering_report(&plan, &zero, &u1, end.final_state());
    assert!(report.interior_error < eps);
    assert_eq!(report.exterior_change, 0.0);
    assert!(sobolev_norm(&(end.final_state() - &u1), 1.0) < eps);
}

#[test]
fn non_generator_steering_stays_in_lattice() {
    let (g, p) = (grid(), params());
    let fl = flat(&g);
    let even = FrequencySet::new(1, [[0], [2]]).unwrap();
    let h = cos(&g, 2).scale(0.05);
    let syn = Synthesizer::new(&p, &fl, &even, SolverConfig::default(), SynthesisOptions::default()).unwrap().with_background(h.clone());
    let u0 = cos(&g, 4).scale(0.05);
    let u1 = cos(&g, 2).scale(0.1);
    let plan = syn.steer_full(&u0, &u1, 0.05, 1.0).unwrap();
    let traj = plan.replay(&u0, Some(&h), &p, &fl, &SolverConfig::default(), Recording::Steps).unwrap();
    assert!(traj.len() > 10);
    assert!(max_leak(traj.states.iter(), &even) < 1e-8);
    assert!(spectral_leak(&cos(&g, 1), &even) > 0.1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn scaling_is_absorbed(seed in 0u64..10_000, lambda in -3.0f64..3.0, phase in 0.0f64..6.3, p in 1u32..=2) {
        let g = TorusGrid::<f64>::new(1, 32).unwrap();
        let params = CglParams::new(0.1, 0.0, 1.0, p, 1, 1).unwrap();
        let z = random_real_field(&g, 3, &mut rng(seed));
        let q = params.q() as i32;
        let base = nonlinearity(&z, &params);
        let real = nonlinearity(&z.scale(lambda), &params);
        prop_assert!(field_diff(&real, &base.scale(lambda.powi(q))) <= 1e-10 * l2_norm(&base).max(1.0) * lambda.abs().powi(q).max(1.0));
        // complex scalars enter through |λ|^{q-1} λ
        let mu = Complex::from_polar(lambda.abs(), phase);
        let rotated = nonlinearity(&z.scale_complex(mu), &params);
        let expected = base.scale_complex(mu * mu.norm().powi(q - 1));
        prop_assert!(field_diff(&rotated, &expected) <= 1e-10 * l2_norm(&base).max(1.0) * lambda.abs().powi(q).max(1.0));
    }

    #[test]
    fn decompositions_round_trip(seed in 0u64..10_000) {
        let (g, p) = (grid(), params());
        let chain = chain_nonlinear(&base(), 1, 1).unwrap();
        let mut eta = SpectralField::zeros(&g);
        let mut r = rng(seed);
        for l in 0..=3 {
            use rand::Rng;
            eta.add_trig(&[l], Complex::new(r.random::<f64>() - 0.5, r.random::<f64>() - 0.5),
                Complex::new(r.random::<f64>() - 0.5, r.random::<f64>() - 0.5)).unwrap();
        }
        let dec = decompose_target(&eta, &chain, 1, &p).unwrap();
        let rel = field_diff(&sum_of_images(&dec.zetas, &p), &eta) / l2_norm(&eta);
        prop_assert!(rel < DECOMPOSITION_TOLERANCE);
        prop_assert!((rel - dec.residual).abs() < 1e-12);
    }
}
