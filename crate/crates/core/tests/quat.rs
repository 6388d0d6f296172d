mod common;

use std::f64::consts::PI;

use bingham::quat::{average_quaternion, dist_geodesic};
use bingham::UnitQuaternion;
use common::*;
use nalgebra::Vector4;
use rand::Rng;

/// Brute-force argmax of `Σ (qᵢᵀq)²` over a Hopf-coordinate grid of `S³`
/// with spacing `step` radians in each angle.
fn grid_argmin(samples: &[UnitQuaternion], step: f64) -> UnitQuaternion {
    let n_eta = (0.5 * PI / step).ceil() as usize;
    let n_xi = (2.0 * PI / step).ceil() as usize;
    let vs: Vec<Vector4<f64>> = samples.iter().map(|q| q.to_vector()).collect();
    let mut best = (f64::NEG_INFINITY, Vector4::zeros());
    for i in 0..=n_eta {
        let eta = 0.5 * PI * i as f64 / n_eta as f64;
        for j in 0..n_xi {
            let x1 = 2.0 * PI * j as f64 / n_xi as f64;
            for k in 0..n_xi {
                let x2 = 2.0 * PI * k as f64 / n_xi as f64;
                let q = Vector4::new(eta.cos() * x1.cos(), eta.cos() * x1.sin(), eta.sin() * x2.cos(), eta.sin() * x2.sin());
                let score: f64 = vs.iter().map(|v| v.dot(&q).powi(2)).sum();
                if score > best.0 {
                    best = (score, q);
                }
            }
        }
    }
    UnitQuaternion::from_vector(&best.1).unwrap()
}

#[test]
fn perturbed_identity_average_matches_grid_search() {
    let mut r = rng(51);
    let samples: Vec<UnitQuaternion> = (0..100)
        .map(|_| {
            let v = Vector4::new(1.0, 0.0, 0.0, 0.0) + Vector4::from_fn(|_, _| 0.05 * (r.random::<f64>() - 0.5));
            let q = UnitQuaternion::from_vector(&v.normalize()).unwrap();
            if r.random::<bool>() { -q } else { q }
        })
        .collect();
    let avg = average_quaternion(&samples).unwrap();
    assert!(!avg.degenerate);
    assert!(dist_geodesic(avg.mean, UnitQuaternion::IDENTITY).to_degrees() < 5.0);
    let grid = grid_argmin(&samples, 2f64.to_radians());
    // Grid spacing of 2° per angle bounds the argmin error by a few degrees.
    assert!(dist_geodesic(avg.mean, grid).to_degrees() < 5.0);
}

#[test]
fn average_beats_random_candidates() {
    let mut r = rng(52);
    let center = uniform_quaternion(&mut r);
    let samples: Vec<UnitQuaternion> = (0..50)
        .map(|_| {
            let v = center.to_vector() + Vector4::from_fn(|_, _| 0.4 * (r.random::<f64>() - 0.5));
            UnitQuaternion::from_vector(&v.normalize()).unwrap()
        })
        .collect();
    let cost = |q: UnitQuaternion| samples.iter().map(|s| bingham::quat::dist_frobenius_squared(*s, q)).sum::<f64>();
    let best = cost(average_quaternion(&samples).unwrap().mean);
    for _ in 0..5000 {
        assert!(best <= cost(uniform_quaternion(&mut r)) + 1e-9);
    }
}

#[test]
fn antipodal_pair_averages_to_itself() {
    let mut r = rng(53);
    let q = uniform_quaternion(&mut r);
    let avg = average_quaternion(&[q, -q]).unwrap().mean;
    assert!(dist_geodesic(avg, q) < 1e-6);
}
