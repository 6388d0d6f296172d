mod common;

use std::f64::consts::PI;

use bingham::normconst::{accuracy_probe, Integrator, IntegratorConfig};
use common::*;
use nalgebra::Vector4;
use proptest::prelude::*;

fn integ() -> Integrator {
    Integrator::new(IntegratorConfig::default()).unwrap()
}

#[test]
fn matches_oracle_on_random_spectra() {
    let integ = integ();
    let mut r = rng(11);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let l = random_shifted_lambda(&mut r, 1000.0);
        let e = rel_err(integ.evaluate(&l).unwrap().c, oracle_c(&l));
        worst = worst.max(e);
    }
    assert!(worst < 1e-4, "worst relative error {worst:e}");
}

#[test]
fn small_spectrum_matches_oracle_tightly() {
    let l = Vector4::new(0.0, -1.0, -2.0, -3.0);
    assert!(rel_err(integ().evaluate(&l).unwrap().c, oracle_c(&l)) < 1e-5);
}

#[test]
fn derivatives_match_central_differences() {
    let integ = integ();
    let mut r = rng(12);
    let h = 1e-4;
    for _ in 0..50 {
        let l = random_shifted_lambda(&mut r, 1000.0);
        let nc = integ.evaluate(&l).unwrap();
        for i in 0..4 {
            let mut up = l;
            let mut down = l;
            up[i] += h;
            down[i] -= h;
            let fd = (integ.evaluate_any(&up).unwrap().c - integ.evaluate_any(&down).unwrap().c) / (2.0 * h);
            assert!(rel_err(nc.dc[i], fd) < 1e-5, "λ = {l:?}, i = {i}: {} vs {fd}", nc.dc[i]);
        }
    }
}

#[test]
fn permutation_equivariance() {
    let integ = integ();
    let mut r = rng(13);
    let perms = [[1, 0, 2, 3], [3, 2, 1, 0], [2, 3, 0, 1], [0, 3, 1, 2]];
    for _ in 0..20 {
        let l = random_shifted_lambda(&mut r, 500.0);
        let base = integ.evaluate(&l).unwrap();
        for p in perms {
            let lp = Vector4::from_fn(|i, _| l[p[i]]);
            let got = integ.evaluate(&lp).unwrap();
            assert!(rel_err(got.c, base.c) < 1e-12);
            for (i, &pi) in p.iter().enumerate() {
                assert!(rel_err(got.dc[i], base.dc[pi]) < 1e-12);
            }
        }
    }
}

#[test]
fn bounded_by_sphere_area() {
    let integ = integ();
    let mut r = rng(14);
    for _ in 0..100 {
        let l = random_shifted_lambda(&mut r, 1000.0);
        if l.amax() == 0.0 {
            continue;
        }
        assert!(integ.evaluate(&l).unwrap().c < 2.0 * PI * PI);
    }
}

#[test]
fn zero_spectrum_self_convergence() {
    let rows = accuracy_probe(&Vector4::zeros(), &IntegratorConfig::default(), &[15, 50, 200, 1000]).unwrap();
    let diffs: Vec<f64> = rows.iter().filter(|r| r.n < 1000).map(|r| r.abs_diff).collect();
    assert!(diffs.windows(2).all(|w| w[1] < w[0]), "{rows:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn shift_law(l2 in -300.0..0.0f64, l3 in -300.0..0.0f64, l4 in -300.0..0.0f64, c in -50.0..50.0f64) {
        let integ = integ();
        let l = Vector4::new(0.0, l2, l3, l4);
        let base = integ.evaluate(&l).unwrap();
        let moved = integ.evaluate_any(&l.add_scalar(c)).unwrap();
        prop_assert!(rel_err(moved.c, c.exp() * base.c) < 1e-9);
        for i in 0..4 {
            prop_assert!(rel_err(moved.dc[i], c.exp() * base.dc[i]) < 1e-9);
        }
    }

    #[test]
    fn derivatives_sum_to_constant(l2 in -300.0..0.0f64, l3 in -300.0..0.0f64, l4 in -300.0..0.0f64) {
        // Σᵢ ∂C/∂λᵢ = ∫ |q|² e^{…} = C.
        let nc = integ().evaluate(&Vector4::new(0.0, l2, l3, l4)).unwrap();
        prop_assert!(rel_err(nc.dc.sum(), nc.c) < 1e-7);
    }
}
