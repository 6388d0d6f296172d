//! Test oracles and helpers shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use bingham::{BinghamParam, UnitQuaternion};
use nalgebra::{Matrix4, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// `∫₀^{2π} exp(a cos²ξ + b sin²ξ) dξ` by the periodic trapezoid rule, which
/// converges geometrically for this entire integrand.
pub fn ring_integral(a: f64, b: f64) -> f64 {
    // exp(a cos² + b sin²) = exp((a+b)/2) exp((a-b)/2 · cos 2ξ), period π.
    let z = 0.5 * (a - b);
    let m = 64 + 4 * (z.abs().sqrt() * 8.0) as usize;
    let sum: f64 = (0..m).map(|k| (z * (2.0 * PI * k as f64 / m as f64).cos()).exp()).sum();
    (0.5 * (a + b)).exp() * 2.0 * PI * sum / m as f64
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration on
/// `P_n`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// Composite Gauss-Legendre on `[0, 1]` with panels graded geometrically
/// toward both ends (down to width 2⁻⁴⁰) and `interior` uniform panels.
pub fn integrate_unit(f: &dyn Fn(f64) -> f64, order: usize, interior: usize) -> f64 {
    let mut breaks: Vec<f64> = vec![0.0, 1.0];
    for k in 1..=40 {
        let x = 0.5f64.powi(k);
        breaks.push(x);
        breaks.push(1.0 - x);
    }
    for k in 1..interior {
        breaks.push(k as f64 / interior as f64);
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let rule = gauss_legendre(order);
    breaks
        .windows(2)
        .map(|w| {
            let (mid, half) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
            half * rule.iter().map(|&(x, wt)| wt * f(mid + half * x)).sum::<f64>()
        })
        .sum()
}

/// `∫_{S³} exp(qᵀ diag(λ) q) dq` in Hopf coordinates
/// `q = (√u cos ξ₁, √u sin ξ₁, √(1-u) cos ξ₂, √(1-u) sin ξ₂)`, where the
/// surface measure is `½ du dξ₁ dξ₂`. Works for any ordering of `λ`.
pub fn oracle_c(lambda: &Vector4<f64>) -> f64 {
    let top = lambda.max();
    let l = lambda.add_scalar(-top);
    let f = |u: f64| 0.5 * ring_integral(u * l[0], u * l[1]) * ring_integral((1.0 - u) * l[2], (1.0 - u) * l[3]);
    top.exp() * integrate_unit(&f, 20, 64)
}

/// Uniform direction on `S³`.
pub fn uniform_quaternion(rng: &mut ChaCha20Rng) -> UnitQuaternion {
    loop {
        let v = Vector4::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
        if v.norm() > 1e-6 {
            return UnitQuaternion::from_vector(&v.normalize()).unwrap();
        }
    }
}

/// A shifted spectrum `(0, λ₂, λ₃, λ₄)` with `‖λ‖ ≤ max_norm`, sorted.
pub fn random_shifted_lambda(rng: &mut ChaCha20Rng, max_norm: f64) -> Vector4<f64> {
    let mut tail = [rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>()];
    tail.sort_by(f64::total_cmp);
    let dir = Vector4::new(0.0, -tail[0], -tail[1], -tail[2]);
    let n = dir.norm();
    if n == 0.0 {
        return Vector4::zeros();
    }
    dir * (rng.random::<f64>() * max_norm / n)
}

/// Random orthogonal matrix from the QR of a Gaussian matrix.
pub fn random_rotation(rng: &mut ChaCha20Rng) -> Matrix4<f64> {
    let g = Matrix4::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
    g.qr().q()
}

/// Parameter with eigenvalues `λ` on a random eigenbasis.
pub fn random_param(rng: &mut ChaCha20Rng, lambda: &Vector4<f64>) -> BinghamParam {
    BinghamParam::from_eigen(&random_rotation(rng), lambda).unwrap()
}

pub fn random_symmetric(rng: &mut ChaCha20Rng, scale: f64) -> Matrix4<f64> {
    let g = Matrix4::from_fn(|_, _| scale * rng.sample::<f64, _>(StandardNormal));
    0.5 * (g + g.transpose())
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
