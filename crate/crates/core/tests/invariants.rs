mod common;

use num_complex::Complex64;
use proptest::prelude::*;

use nls_threshold::diagnostics::rate_fit;
use nls_threshold::experiments::{config_hash, ScenarioConfig, ScenarioTag};
use nls_threshold::ground_state::{apply_symmetry, energy, kinetic_norm, sobolev_quotient};
use nls_threshold::series::{eval_gamma, eval_ir, pz_coefficients};
use nls_threshold::{Dimension, RadialField, RadialGrid, RadialProblem, SymmetryParams};

fn bump(grid: &RadialGrid, c: f64, w: f64, phase: f64) -> RadialField {
    RadialField::from_fn(grid, |r| Complex64::from_polar((-((r - c) / w).powi(2)).exp(), phase))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn functionals_are_gauge_invariant(c in 0.0f64..8.0, w in 0.5f64..4.0, theta in -3.0f64..3.0) {
        let grid = RadialGrid::new(6, 30.0, 600).unwrap();
        let u = bump(&grid, c, w, 0.2);
        let v = u.scale(Complex64::from_polar(1.0, theta));
        let e = energy(&u, &grid).unwrap();
        prop_assert!((energy(&v, &grid).unwrap() - e).abs() <= 1e-12 * e.abs().max(1.0));
        let k = kinetic_norm(&u, &grid).unwrap();
        prop_assert!((kinetic_norm(&v, &grid).unwrap() - k).abs() <= 1e-12 * k);
    }

    #[test]
    fn sobolev_quotient_is_scale_free(c in 0.0f64..6.0, w in 0.8f64..4.0, lambda in 0.1f64..10.0) {
        let grid = RadialGrid::new(5, 30.0, 600).unwrap();
        let u = bump(&grid, c, w, 0.0);
        let q = sobolev_quotient(&u, &grid).unwrap();
        let qs = sobolev_quotient(&u.scale(lambda.into()), &grid).unwrap();
        prop_assert!((q - qs).abs() <= 1e-12 * q);
    }

    #[test]
    fn laplacian_commutes_with_phase(theta in -3.0f64..3.0, c in 0.0f64..5.0) {
        let p = RadialProblem::discrete(6, 20.0, 400).unwrap();
        let u = bump(&p.grid, c, 1.5, 0.4);
        let rot = Complex64::from_polar(1.0, theta);
        let a = p.laplacian.apply(&u.scale(rot)).unwrap();
        let b = p.laplacian.apply(&u).unwrap().scale(rot);
        prop_assert!(a.sub(&b).unwrap().max_abs() <= 1e-11 * b.max_abs());
    }

    #[test]
    fn remainder_is_quadratically_small(s in 1e-4f64..1e-2, c in 0.0f64..4.0, phase in -3.0f64..3.0) {
        let grid = RadialGrid::new(6, 20.0, 200).unwrap();
        let base: Vec<f64> = grid.nodes().iter().map(|&r| common::w_exact(6, r)).collect();
        let v = bump(&grid, c, 1.0, phase).scale(s.into());
        let ir = eval_ir(&v, &base, 2.0).unwrap();
        let lin = eval_gamma(&v, &base, 2.0).unwrap();
        // |iR(v)| <= C |v|^2 near W, while Gamma(v) is linear
        prop_assert!(ir.max_abs() <= 2.0 * s * s);
        prop_assert!(lin.max_abs() >= 0.1 * s * base.iter().zip(v.values()).map(|(w, z)| w * z.norm()).fold(0.0, f64::max));
    }

    #[test]
    fn expansion_table_has_product_structure(p in 1.1f64..3.0, j1 in 0usize..5, j2 in 0usize..5) {
        let t = pz_coefficients(p, 10).unwrap();
        prop_assert!((t.get(j1, j2) - t.get(j1, 0) * t.get(0, j2)).abs() <= 1e-14 * t.get(j1, j2).abs().max(1e-300));
    }

    #[test]
    fn rate_fit_recovers_exponentials(rate in 0.05f64..2.0, amp in 1e-3f64..1e3, noise in 0.0f64..1e-3) {
        let times: Vec<f64> = (0..40).map(|i| i as f64 * 0.25).collect();
        let values: Vec<f64> = times
            .iter()
            .enumerate()
            .map(|(i, t)| amp * (-rate * t).exp() * (1.0 + noise * ((i * 7919) % 13) as f64 / 13.0))
            .collect();
        let fit = rate_fit(&times, &values, 0.0).unwrap();
        prop_assert!((fit.rate - rate).abs() <= 0.02 * rate + 1e-3);
    }

    #[test]
    fn config_round_trip_preserves_hash(n in 100usize..5000, dt in 1e-3f64..0.1, k in 1usize..6) {
        let mut c = ScenarioConfig::new(ScenarioTag::BuildSeries);
        c.grid.n = n;
        c.evolver.dt = dt;
        c.series.k = k;
        let back = ScenarioConfig::from_json(&c.to_json().unwrap()).unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(config_hash(&back).unwrap(), config_hash(&c).unwrap());
    }

    #[test]
    fn field_csv_round_trip(values in proptest::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 17)) {
        let grid = RadialGrid::new(6, 4.0, 16).unwrap();
        let vals: Vec<Complex64> = values.iter().map(|&(a, b)| Complex64::new(a, b)).collect();
        let u = RadialField::from_values(&grid, vals).unwrap();
        let mut buf = Vec::new();
        u.write_csv_to(&mut buf).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u.csv");
        std::fs::write(&path, &buf).unwrap();
        prop_assert_eq!(RadialField::read_csv(&path).unwrap(), u);
    }
}

#[test]
fn symmetry_round_trip_in_the_interior() {
    let grid = RadialGrid::new(6, 40.0, 800).unwrap();
    // monotone, like every profile the modulation fit resamples
    let u = RadialField::from_fn(&grid, |r| Complex64::from_polar(common::w_exact(6, 0.8 * r), 0.3));
    let s = SymmetryParams { theta: 0.4, mu: 1.3 };
    let there = apply_symmetry(&u, s, &grid).unwrap();
    let back = apply_symmetry(&there, SymmetryParams { theta: -0.4, mu: 1.0 / 1.3 }, &grid).unwrap();
    let err = back.values()[..400]
        .iter()
        .zip(&u.values()[..400])
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    assert!(err < 1e-5, "{err}");
}

#[test]
fn sphere_area_matches_gamma_formula() {
    for d in 3..=12 {
        let got = Dimension::new(d).unwrap().sphere_area();
        let want = common::sphere_area(d);
        assert!((got / want - 1.0).abs() < 1e-13, "d={d}");
    }
}

#[test]
fn sharp_constant_matches_gamma_formula() {
    for d in 3..=12 {
        let got = nls_threshold::ground_state::sharp_sobolev_constant(Dimension::new(d).unwrap());
        assert!((got / common::sharp_constant(d) - 1.0).abs() < 1e-13, "d={d}");
    }
}
