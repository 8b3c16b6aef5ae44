mod common;

use std::f64::consts::PI;

use cgl_core::spectral::{
    l2_norm, project_subspace, real_inner_product, sobolev_norm, LocalizationMask, MaskProfile,
    SpectralField, TorusGrid,
};
use cgl_core::saturation::FrequencySet;
use cgl_core::spectral::snapshot::{read_snapshot, write_snapshot};
use cgl_core::CglError;
use common::{field_diff, random_field, random_real_field, rel_diff, rng};
use num_complex::Complex;
use proptest::prelude::*;

/// Trapezoid sum over an independent, finer uniform mesh; exact for trig polynomials of low degree.
fn quadrature(grid_d: usize, m: usize, f: impl Fn(&[f64]) -> f64) -> f64 {
    let h = 2.0 * PI / m as f64;
    let total = m.pow(grid_d as u32);
    let mut acc = 0.0;
    let mut x = vec![0.0; grid_d];
    for flat in 0..total {
        let mut r = flat;
        for xi in x.iter_mut() {
            *xi = (r % m) as f64 * h;
            r /= m;
        }
        acc += f(&x);
    }
    acc * h.powi(grid_d as i32)
}

#[test]
fn grid_mode_boxes() {
    let g = TorusGrid::<f64>::new(1, 64).unwrap();
    assert_eq!(g.max_mode(), 31);
    assert!(g.contains_mode(&[-31]) && !g.contains_mode(&[32]) && !g.contains_mode(&[-32]));
    let g3 = TorusGrid::<f64>::new(3, 8).unwrap();
    assert_eq!(g3.max_mode(), 3);
    assert_eq!(g3.modes().len(), 7 * 7 * 7);
    assert!(matches!(TorusGrid::<f64>::new(2, 100), Err(CglError::InvalidGrid(_))));
    assert!(TorusGrid::<f64>::new(1, 4).is_err());
}

#[test]
fn inner_product_closed_forms() {
    let g = TorusGrid::<f64>::new(1, 32).unwrap();
    let one = SpectralField::constant(&g, Complex::new(1.0, 0.0));
    let i = SpectralField::constant(&g, Complex::new(0.0, 1.0));
    assert!(real_inner_product(&one, &i).unwrap().abs() < 1e-15);
    for d in 1..=3 {
        let g = TorusGrid::<f64>::new(d, 8).unwrap();
        let mut l = vec![0i64; d];
        l[0] = 1;
        if d > 1 {
            l[d - 1] = -2;
        }
        let c = SpectralField::cos_mode(&g, &l).unwrap();
        let oracle = quadrature(d, 12, |x| {
            let phase: f64 = x.iter().zip(&l).map(|(a, b)| a * *b as f64).sum();
            phase.cos().powi(2)
        });
        assert!(rel_diff(real_inner_product(&c, &c).unwrap(), oracle) < 1e-12);
        assert!(rel_diff(oracle, (2.0 * PI).powi(d as i32) / 2.0) < 1e-12);
    }
}

#[test]
fn single_mode_sobolev_norm() {
    for d in 1..=3 {
        let g = TorusGrid::<f64>::new(d, 8).unwrap();
        let k: Vec<i64> = (0..d as i64).map(|i| i - 1).collect();
        let e = SpectralField::mode(&g, &k, Complex::new(1.0, 0.0)).unwrap();
        let ksq: i64 = k.iter().map(|x| x * x).sum();
        // ‖u‖² + ‖∇u‖² by quadrature, |e^{ikx}|² = 1 and |∇e^{ikx}|² = |k|²
        let oracle = quadrature(d, 8, |_| 1.0 + ksq as f64).sqrt();
        assert!(rel_diff(sobolev_norm(&e, 1.0), oracle) < 1e-12);
        assert_eq!(sobolev_norm(&SpectralField::<f64>::zeros(&g), 2.5), 0.0);
    }
}

#[test]
fn parseval_over_random_fields() {
    let mut r = rng(21);
    for i in 0..100 {
        let d = 1 + i % 3;
        let g = TorusGrid::<f64>::new(d, if d == 1 { 32 } else { 8 }).unwrap();
        let u = random_field(&g, 3, &mut r);
        let lhs = sobolev_norm(&u, 0.0).powi(2);
        let rhs = real_inner_product(&u, &u).unwrap();
        assert!(rel_diff(lhs, rhs) < 1e-10);
        // and the grid quadrature of |u|²
        let phys = u.physical();
        let quad = phys.iter().map(|z| z.norm_sqr()).sum::<f64>() * g.cell_volume();
        assert!(rel_diff(lhs, quad) < 1e-10);
    }
}

#[test]
fn projection_onto_full_box_and_zero() {
    let g = TorusGrid::<f64>::new(2, 8).unwrap();
    let u = random_field(&g, 3, &mut rng(22));
    let full = FrequencySet::new(2, g.modes().into_iter().map(|(_, k)| k)).unwrap();
    assert_eq!(project_subspace(&u, &full).unwrap(), u);
    let c = SpectralField::cos_mode(&g, &[1, 2]).unwrap();
    assert!(project_subspace(&c, &FrequencySet::new(2, [[0, 0]]).unwrap()).unwrap().is_zero());
    let outside = FrequencySet::new(2, [[5, 0]]).unwrap();
    assert!(matches!(project_subspace(&u, &outside), Err(CglError::FrequencyOutOfBox(_))));
}

#[test]
fn mask_profiles() {
    let g = TorusGrid::<f64>::new(1, 128).unwrap();
    let m = LocalizationMask::new(&g, &MaskProfile::interval(1, PI / 2.0, 1.5 * PI, 0.3)).unwrap();
    let inside = |i: usize| {
        let x = i as f64 * g.spacing();
        (PI / 2.0 - 1e-12..=1.5 * PI + 1e-12).contains(&x)
    };
    for i in 0..128 {
        assert_eq!(m.plateau()[i], inside(i));
        let o = inside(i) && inside((i + 1) % 128) && inside((i + 127) % 128);
        assert_eq!(m.interior()[i], o);
        assert!((0.0..=1.0).contains(&m.samples()[i]));
    }
    // χ is real and smooth enough to live in the lower half of the box
    assert!(m.chi().is_real_valued(1e-14));
    // wider transitions are smoother, so the high half of the spectrum empties out
    let fine = TorusGrid::<f64>::new(1, 512).unwrap();
    let tail = |w: f64| LocalizationMask::new(&fine, &MaskProfile::interval(1, 1.0, 4.0, w)).unwrap().spectral_tail();
    assert!(tail(1.5) < tail(0.5) && tail(0.5) < tail(0.1));
    assert!(tail(1.5) < 1e-8);
    let h = g.spacing();
    assert!(matches!(
        LocalizationMask::new(&g, &MaskProfile::interval(1, 0.2 * h, 0.6 * h, 0.3)),
        Err(CglError::EmptyPlateau)
    ));
}

#[test]
fn snapshot_round_trip() {
    let g = TorusGrid::<f64>::new(2, 8).unwrap();
    let u = random_field(&g, 3, &mut rng(23));
    let mut buf = Vec::new();
    write_snapshot(&mut buf, &u, 0.75).unwrap();
    let (v, t): (SpectralField<f64>, f64) = read_snapshot(&mut buf.as_slice()).unwrap();
    assert_eq!(t, 0.75);
    // samples are stored physically, so the coefficients come back up to one transform round trip
    assert!(field_diff(&u, &v) < 1e-14);
    assert!(matches!(
        read_snapshot::<f64, _>(&mut &b"XXXX0000"[..]),
        Err(CglError::Snapshot(_))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn transform_round_trip(seed in 0u64..10_000, d in 1usize..=3) {
        let g = TorusGrid::<f64>::new(d, 8).unwrap();
        let u = random_field(&g, 3, &mut rng(seed));
        let back = SpectralField::from_physical(&g, &u.physical()).unwrap();
        prop_assert!(l2_norm(&(&back - &u)) <= 1e-12 * l2_norm(&u));
    }

    #[test]
    fn real_fields_have_hermitian_coefficients(seed in 0u64..10_000, d in 1usize..=2) {
        let g = TorusGrid::<f64>::new(d, 16).unwrap();
        let u = random_real_field(&g, 4, &mut rng(seed));
        prop_assert!(u.is_real_valued(1e-14));
        for (_, k) in g.modes() {
            let neg: Vec<i64> = k.iter().map(|x| -x).collect();
            prop_assert!((u.coeff(&k) - u.coeff(&neg).conj()).norm() < 1e-14);
        }
    }

    #[test]
    fn projection_idempotent_and_self_adjoint(seed in 0u64..10_000, a in -3i64..=3, b in -3i64..=3) {
        let g = TorusGrid::<f64>::new(2, 8).unwrap();
        let set = FrequencySet::new(2, [[0, 0], [a, b], [1, -1]]).unwrap();
        let mut r = rng(seed);
        let u = random_field(&g, 3, &mut r);
        let v = random_field(&g, 3, &mut r);
        let pu = project_subspace(&u, &set).unwrap();
        prop_assert_eq!(project_subspace(&pu, &set).unwrap(), pu.clone());
        let lhs = real_inner_product(&pu, &v).unwrap();
        let rhs = real_inner_product(&u, &project_subspace(&v, &set).unwrap()).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
    }

    #[test]
    fn mask_bounds_hold(lo in 0.5f64..2.5, len in 0.8f64..3.0, width in 0.1f64..1.0) {
        let g = TorusGrid::<f64>::new(1, 64).unwrap();
        let m = LocalizationMask::new(&g, &MaskProfile::interval(1, lo, lo + len, width)).unwrap();
        for i in 0..64 {
            prop_assert!(m.samples()[i] >= 0.0 && m.samples()[i] <= 1.0);
            if m.interior()[i] {
                prop_assert!(m.plateau()[i]);
            }
        }
    }
}
