mod common;

use num_complex::Complex64;

use common::*;
use nls_threshold::series::{binomial, order_forcing, p_of_z, pz_coefficients, NearSolution};
use nls_threshold::spectrum::{build_blocks, ground_mode, EigenOptions};
use nls_threshold::{RadialField, RadialProblem};

#[test]
fn coefficients_match_cauchy_integrals() {
    for p in [2.0, 5.0 / 3.0, 1.5, 7.0 / 3.0] {
        let table = pz_coefficients(p, 8).unwrap();
        for j1 in 0..=4 {
            for j2 in 0..=4 - j1 {
                let oracle = pz_coefficient_cauchy(p, j1, j2);
                let got = table.get(j1, j2);
                assert!((got - oracle).abs() < 1e-13, "p={p} ({j1},{j2}): {got} vs {oracle}");
            }
        }
    }
}

#[test]
fn d6_table_low_orders() {
    // p = 2: (1+z)^{3/2} (1+conj z)^{1/2}
    let t = pz_coefficients(2.0, 6).unwrap();
    assert_eq!(t.get(0, 0), 1.0);
    assert_eq!(t.get(1, 0), 1.5);
    assert_eq!(t.get(0, 1), 0.5);
    assert_eq!(t.get(0, 2), -0.125);
    assert!((binomial(0.5, 3) - 0.0625).abs() < 1e-16);
}

#[test]
fn truncated_series_converges_inside_unit_disc() {
    let t = pz_coefficients(2.0, 30).unwrap();
    for z in [Complex64::new(0.2, 0.1), Complex64::new(-0.3, 0.25), Complex64::new(0.0, -0.4)] {
        let err = (t.eval(z) - p_of_z(2.0, z)).norm();
        assert!(err < 1e-9, "{z}: {err}");
    }
}

#[test]
fn forcing_matches_brute_force_enumeration() {
    let p = RadialProblem::discrete(6, 30.0, 600).unwrap();
    let blocks = build_blocks(&p);
    let pair = ground_mode(&p, &blocks, &EigenOptions::default()).unwrap();
    let table = pz_coefficients(2.0, 8).unwrap();
    let near = NearSolution::build(&blocks, &pair, &p.grid, &table, 4, -1.3).unwrap();
    let profiles: Vec<RadialField> = (1..=4).map(|j| near.profile(j).unwrap().clone()).collect();
    for j in 2..=5 {
        let f = order_forcing(j, &profiles, &table, blocks.base()).unwrap();
        for i in [0usize, 7, 40, 150, 599] {
            let phi: Vec<Complex64> = profiles.iter().map(|f| f.values()[i]).collect();
            let w = blocks.base()[i];
            let oracle = forcing_brute_force(j, &phi, w, 2.0, |a, b| pz_coefficient_cauchy(2.0, a, b));
            let got = f.values()[i];
            let scale = oracle.norm().max(1e-300);
            assert!((got - oracle).norm() <= 1e-11 * scale.max(f.max_abs()), "j={j} i={i}: {got} vs {oracle}");
        }
    }
}

#[test]
fn first_forcing_order_is_quadratic_in_phi1() {
    // for p = 2 the W power drops out: F_2 = 3/8 Phi1^2 + 3/4 |Phi1|^2 - 1/8 conj(Phi1)^2
    let p = RadialProblem::discrete(6, 20.0, 200).unwrap();
    let blocks = build_blocks(&p);
    let table = pz_coefficients(2.0, 4).unwrap();
    let phi = RadialField::from_fn(&p.grid, |r| Complex64::new((-r).exp(), 0.3 * (-r * r).exp()));
    let f = order_forcing(2, &[phi.clone()], &table, blocks.base()).unwrap();
    for (i, z) in phi.values().iter().enumerate() {
        let expect = 0.375 * z * z + 0.75 * z.norm_sqr() - 0.125 * z.conj() * z.conj();
        assert!((f.values()[i] - expect).norm() < 1e-12 * expect.norm().max(1.0));
    }
}
