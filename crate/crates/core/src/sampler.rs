//! Rejection sampling from a Bingham distribution with an angular central
//! Gaussian (ACG) envelope, after Kent, Ganeiber and Mardia (2013).
//!
//! In the eigenbasis the target is `f*(x) = exp(xᵀΛx)` with `Λ = diag(λ)`,
//! `λ ≤ 0`. The envelope is `g*(x) = (xᵀΩx)^{-2}` with `Ω = I - 2Λ/b`, and
//! `f*/g* ≤ M = exp(-(4 - b)/2) (4/b)²` for the `b` solving
//! `Σᵢ 1/(b - 2λᵢ) = 1`.
//!
//! The generator is ChaCha20 seeded with `seed_from_u64`, which is stable
//! across platforms and releases of `rand_chacha`.

use nalgebra::{Matrix4, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::bingham::BinghamParam;
use crate::error::{Error, Result};
use crate::quat::{Quaternion, UnitQuaternion};

/// Proposals per acceptance-rate window.
pub const WINDOW: u64 = 100_000;
/// Minimum acceptance rate over a full window.
pub const MIN_ACCEPTANCE: f64 = 1e-4;

/// Root `b ∈ (0, 4]` of `Σᵢ 1/(b - 2λᵢ) = 1` for shifted `λ`, by bisection.
pub fn solve_envelope(lambda: &Vector4<f64>) -> f64 {
    let f = |b: f64| lambda.iter().map(|l| 1.0 / (b - 2.0 * l)).sum::<f64>() - 1.0;
    let (mut lo, mut hi) = (0.0_f64, 4.0_f64);
    if f(hi) >= 0.0 {
        return hi;
    }
    while hi - lo > 1e-15 * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Derives an independent stream seed from a base seed and an index
/// (SplitMix64 finalizer over `base + (index + 1) · φ`).
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SamplerStats {
    pub proposed: u64,
    pub accepted: u64,
}

impl SamplerStats {
    pub fn acceptance_rate(&self) -> f64 {
        if self.proposed == 0 {
            return 1.0;
        }
        self.accepted as f64 / self.proposed as f64
    }
}

/// Single-owner sampler state. Use distinct seeds (see [`derive_seed`]) for
/// parallel streams.
#[derive(Debug, Clone)]
pub struct BinghamSampler {
    seed: u64,
    eigenvectors: Matrix4<f64>,
    lambda: Vector4<f64>,
    envelope_b: f64,
    omega: Vector4<f64>,
    proposal_scale: Vector4<f64>,
    log_bound: f64,
    rng: ChaCha20Rng,
    stats: SamplerStats,
    window: SamplerStats,
}

impl BinghamSampler {
    pub fn new(param: &BinghamParam, seed: u64) -> Self {
        let lambda = *param.eigenvalues();
        let b = solve_envelope(&lambda);
        let omega = lambda.map(|l| 1.0 - 2.0 * l / b);
        Self {
            seed,
            eigenvectors: *param.eigenvectors(),
            lambda,
            envelope_b: b,
            omega,
            proposal_scale: omega.map(|o| 1.0 / o.sqrt()),
            log_bound: -(4.0 - b) / 2.0 + 2.0 * (4.0 / b).ln(),
            rng: ChaCha20Rng::seed_from_u64(seed),
            stats: SamplerStats::default(),
            window: SamplerStats::default(),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn envelope_b(&self) -> f64 {
        self.envelope_b
    }

    /// `log M`, the log of the bound on `f*/g*`.
    pub fn log_acceptance_bound(&self) -> f64 {
        self.log_bound
    }

    pub fn stats(&self) -> SamplerStats {
        self.stats
    }

    /// One draw from the distribution. Antipodal signs are left as drawn.
    pub fn draw(&mut self) -> Result<UnitQuaternion> {
        loop {
            let z = Vector4::from_fn(|i, _| {
                let n: f64 = self.rng.sample(StandardNormal);
                n * self.proposal_scale[i]
            });
            let norm = z.norm();
            if norm == 0.0 {
                continue;
            }
            let x = z / norm;
            let x2 = x.component_mul(&x);
            let log_ratio = self.lambda.dot(&x2) + 2.0 * self.omega.dot(&x2).ln() - self.log_bound;
            let u: f64 = self.rng.random();
            let accept = (1.0 - u).ln() < log_ratio;

            self.stats.proposed += 1;
            self.window.proposed += 1;
            if accept {
                self.stats.accepted += 1;
                self.window.accepted += 1;
            }
            if self.window.proposed == WINDOW {
                if self.window.acceptance_rate() < MIN_ACCEPTANCE {
                    return Err(Error::SamplerStalled {
                        accepted: self.window.accepted,
                        proposed: self.window.proposed,
                    });
                }
                self.window = SamplerStats::default();
            }
            if accept {
                let q = self.eigenvectors * x;
                let n = q.norm();
                return Ok(UnitQuaternion::new_unchecked(Quaternion::from_vector(&(q / n))));
            }
        }
    }

    pub fn sample(&mut self, n: usize) -> Result<Vec<UnitQuaternion>> {
        (0..n).map(|_| self.draw()).collect()
    }
}

/// `n` independent draws from `param`, deterministic in `seed`.
pub fn sample(param: &BinghamParam, n: usize, seed: u64) -> Result<Vec<UnitQuaternion>> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample count must be at least 1".into()));
    }
    BinghamSampler::new(param, seed).sample(n)
}
