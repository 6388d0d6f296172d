mod common;

use bingham::normconst::{Integrator, IntegratorConfig};
use bingham::sampler::{sample, BinghamSampler};
use bingham::BinghamParam;
use common::*;
use nalgebra::{Matrix4, Vector4};

fn empirical_moments(draws: &[bingham::UnitQuaternion]) -> Matrix4<f64> {
    draws.iter().fold(Matrix4::zeros(), |m, q| {
        let v = q.to_vector();
        m + v * v.transpose()
    }) / draws.len() as f64
}

#[test]
fn uniform_moments_and_acceptance() {
    let mut s = BinghamSampler::new(&BinghamParam::uniform(), 1);
    let draws = s.sample(100_000).unwrap();
    let m = empirical_moments(&draws);
    assert!((m - Matrix4::identity() / 4.0).amax() < 5e-3);
    assert_eq!(s.stats().acceptance_rate(), 1.0);
}

#[test]
fn moments_match_analytic_for_a_concentrated_param() {
    let integ = Integrator::new(IntegratorConfig::default()).unwrap();
    let mut r = rng(31);
    let param = random_param(&mut r, &Vector4::new(0.0, -30.0, -150.0, -600.0));
    let draws = sample(&param, 100_000, 2).unwrap();
    let analytic = param.second_moments(&integ.evaluate(param.eigenvalues()).unwrap()).unwrap();
    assert!((empirical_moments(&draws) - analytic).amax() < 5e-3);
}

#[test]
fn axis_symmetric_mass_lies_on_the_leading_great_circle() {
    let param = bingham::fit::presets::axis_symmetric_truth();
    let d = param.eigenvectors();
    let draws = sample(&param, 20_000, 3).unwrap();
    let mean_plane: f64 = draws
        .iter()
        .map(|q| {
            let v = q.to_vector();
            d.column(0).dot(&v).powi(2) + d.column(1).dot(&v).powi(2)
        })
        .sum::<f64>()
        / draws.len() as f64;
    assert!(mean_plane > 0.99, "{mean_plane}");
    // Spread along the circle: both leading directions carry real mass.
    let along_second: f64 = draws.iter().map(|q| d.column(1).dot(&q.to_vector()).powi(2)).sum::<f64>()
        / draws.len() as f64;
    assert!(along_second > 0.2 && along_second < 0.8, "{along_second}");
}

#[test]
fn antipodal_balance() {
    let mut r = rng(32);
    let param = random_param(&mut r, &Vector4::new(0.0, -200.0, -300.0, -400.0));
    let mode = param.mode().quaternion.to_vector();
    let n = 100_000;
    let positive = sample(&param, n, 4).unwrap().iter().filter(|q| q.to_vector().dot(&mode) > 0.0).count();
    let sigma = (n as f64 * 0.25).sqrt();
    assert!((positive as f64 - 0.5 * n as f64).abs() < 3.0 * sigma, "{positive}");
}

#[test]
fn mean_log_density_matches_expectation() {
    let integ = Integrator::new(IntegratorConfig::default()).unwrap();
    let mut r = rng(33);
    for k in 0..3 {
        let lambda = random_shifted_lambda(&mut r, 500.0);
        let param = random_param(&mut r, &lambda);
        let draws = sample(&param, 50_000, 10 + k).unwrap();
        let vals: Vec<f64> = draws.iter().map(|q| param.log_density_unnormalized(*q)).collect();
        let n = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / n;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let m = param.second_moments(&integ.evaluate(&lambda).unwrap()).unwrap();
        let expected = param.shifted_matrix().component_mul(&m).sum();
        assert!((mean - expected).abs() < 3.0 * (var / n).sqrt() + 1e-12, "{mean} vs {expected}");
    }
}

#[test]
fn same_seed_same_draws() {
    let mut r = rng(34);
    let param = random_param(&mut r, &Vector4::new(0.0, -5.0, -50.0, -500.0));
    let a = sample(&param, 1000, 77).unwrap();
    let b = sample(&param, 1000, 77).unwrap();
    assert!(a.iter().zip(&b).all(|(x, y)| x.to_array() == y.to_array()));
    assert_ne!(a[0].to_array(), sample(&param, 1, 78).unwrap()[0].to_array());
}
