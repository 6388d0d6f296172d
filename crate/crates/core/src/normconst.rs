//! Table-free normalizing constant of the Bingham distribution on `S³` and its
//! four partial derivatives.
//!
//! `C(λ)` is written as a Bromwich-type contour integral along
//! `Re s = c`, which a weighted trapezoidal sum evaluates:
//!
//! ```text
//! C(λ)      = Re[ π e^c h Σₙ w(|nh|) F(nh, λ) e^{i nh} ],   n = -N-1, …, N
//! ∂C/∂λᵢ(λ) = Re[ π e^c h Σₙ w(|nh|) ∂F/∂λᵢ(nh, λ) e^{i nh} ]
//! F(t, λ)   = Π_k (c - λ_k + i t)^{-1/2}
//! w(x)      = ½ erfc(x / p₁ - p₂)
//! ```
//!
//! The truncation error decays like `O(√N e^{-κ√N})` for some `κ > 0`.

use nalgebra::Vector4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Largest `|Im S| / |Re S|` tolerated before the real part is taken.
pub const MAX_IMAG_RATIO: f64 = 1e-6;

/// Numerical constants of the quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    /// `r ≥ 2`.
    pub r: f64,
    /// `1/r ≤ ω_d ≤ 1`.
    pub omega_d: f64,
    pub n_min: u32,
    /// Half-width of the sum; `n ≥ n_min`.
    pub n: u32,
    /// `d = d_fraction · c`, in `(0, 1)`.
    pub d_fraction: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            r: 2.5,
            omega_d: 0.5,
            n_min: 15,
            n: 200,
            d_fraction: 0.5,
        }
    }
}

impl IntegratorConfig {
    pub fn with_n(self, n: u32) -> Self {
        Self { n, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.r.is_finite() && self.r >= 2.0) {
            return bad(format!("r = {} must be >= 2", self.r));
        }
        if !(self.omega_d >= 1.0 / self.r && self.omega_d <= 1.0) {
            return bad(format!("omega_d = {} must lie in [1/r, 1] = [{}, 1]", self.omega_d, 1.0 / self.r));
        }
        if self.n_min == 0 {
            return bad("n_min must be positive".into());
        }
        if self.n < self.n_min {
            return bad(format!("n = {} must be >= n_min = {}", self.n, self.n_min));
        }
        if !(self.d_fraction > 0.0 && self.d_fraction < 1.0) {
            return bad(format!("d_fraction = {} must lie in (0, 1)", self.d_fraction));
        }
        Ok(())
    }
}

/// Constants derived from an [`IntegratorConfig`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants {
    /// Abscissa of the integration line.
    pub c: f64,
    pub d: f64,
    /// Step of the trapezoidal sum.
    pub h: f64,
    pub p1: f64,
    pub p2: f64,
}

pub fn derive_constants(cfg: &IntegratorConfig) -> Result<Constants> {
    cfg.validate()?;
    let IntegratorConfig {
        r, omega_d, n_min, n, d_fraction,
    } = *cfg;
    let n = f64::from(n);
    let c = f64::from(n_min) * PI / (r * r * (1.0 + r) * omega_d);
    let d = d_fraction * c;
    let h = (2.0 * PI * d * (1.0 + r) / (omega_d * n)).sqrt();
    let p1 = (n * h / omega_d).sqrt();
    let p2 = (omega_d * n * h / 4.0).sqrt();
    Ok(Constants { c, d, h, p1, p2 })
}

/// Window `w(x) = ½ erfc(x / p₁ - p₂)`; nonincreasing on `x ≥ 0`.
pub fn weight(x: f64, p1: f64, p2: f64) -> f64 {
    0.5 * erfc(x / p1 - p2)
}

/// The four factors `c - λ_k + i t`. Their real parts are positive whenever
/// `λ_k < c`, so each lies in the open right half-plane and the principal
/// square root never crosses its branch cut along the integration line.
fn factors(t: f64, lambda: &Vector4<f64>, c: f64) -> Result<[Complex64; 4]> {
    let z = lambda.map(|l| Complex64::new(c - l, t));
    if z.iter().any(|z| z.norm_sqr() == 0.0) {
        return Err(Error::ZeroFactor { t });
    }
    Ok([z[0], z[1], z[2], z[3]])
}

/// Principal square root for `Re z > 0` by the half-angle identity, which
/// avoids the polar round trip of the general routine.
#[inline]
fn sqrt_right_half(z: Complex64) -> Complex64 {
    let s = (0.5 * (z.norm() + z.re)).sqrt();
    Complex64::new(s, 0.5 * z.im / s)
}

#[inline]
fn product_inv_sqrt(z: &[Complex64; 4]) -> Complex64 {
    let s = sqrt_right_half(z[0]) * sqrt_right_half(z[1]) * sqrt_right_half(z[2]) * sqrt_right_half(z[3]);
    s.inv()
}

/// `F(t, λ) = Π_k (c - λ_k + i t)^{-1/2}` with principal branches.
pub fn integrand_f(t: f64, lambda: &Vector4<f64>, c: f64) -> Result<Complex64> {
    Ok(product_inv_sqrt(&factors(t, lambda, c)?))
}

/// `∂F/∂λᵢ (t, λ) = ½ (c - λᵢ + i t)^{-1} F(t, λ)`.
pub fn integrand_df(t: f64, lambda: &Vector4<f64>, c: f64, i: usize) -> Result<Complex64> {
    let z = factors(t, lambda, c)?;
    Ok(0.5 * product_inv_sqrt(&z) / z[i])
}

/// `C(λ)` and `∂C/∂λᵢ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormConstResult {
    pub c: f64,
    pub dc: Vector4<f64>,
    /// Largest `|Im| / |Re|` among the five sums before the imaginary parts
    /// were dropped.
    pub imag_residual: f64,
}

impl NormConstResult {
    pub fn ln_c(&self) -> f64 {
        self.c.ln()
    }

    /// The result for `λ + shift`, using `C(λ + s) = e^s C(λ)`.
    pub fn scaled_by_shift(&self, shift: f64) -> Self {
        let f = shift.exp();
        Self {
            c: self.c * f,
            dc: self.dc * f,
            imag_residual: self.imag_residual,
        }
    }
}

/// Quadrature nodes and windowed phase factors for one configuration,
/// reusable across any number of `λ`.
#[derive(Debug, Clone)]
pub struct Integrator {
    config: IntegratorConfig,
    constants: Constants,
    nodes: Vec<f64>,
    // w(|t|) e^{i t} at each node
    phases: Vec<Complex64>,
    prefactor: f64,
}

impl Integrator {
    pub fn new(config: IntegratorConfig) -> Result<Self> {
        let constants = derive_constants(&config)?;
        let Constants { c, h, p1, p2, .. } = constants;
        let n = i64::from(config.n);
        let nodes: Vec<f64> = (-n - 1..=n).map(|k| k as f64 * h).collect();
        let phases = nodes
            .iter()
            .map(|&t| Complex64::from_polar(weight(t.abs(), p1, p2), t))
            .collect();
        Ok(Self {
            config,
            constants,
            nodes,
            phases,
            prefactor: PI * c.exp() * h,
        })
    }

    pub fn config(&self) -> &IntegratorConfig {
        &self.config
    }

    pub fn constants(&self) -> &Constants {
        &self.constants
    }

    /// `C` and `∂C/∂λ` at shifted eigenvalues (`max λ = 0`, any order).
    pub fn evaluate(&self, lambda: &Vector4<f64>) -> Result<NormConstResult> {
        let max = lambda.max();
        if !lambda.iter().all(|l| l.is_finite()) || max.abs() > 1e-12 {
            return Err(Error::NotShifted { max });
        }
        self.evaluate_unchecked(lambda)
    }

    /// `C` and `∂C/∂λ` for any finite `λ`, by evaluating at `λ - max λ` and
    /// scaling with `e^{max λ}`.
    pub fn evaluate_any(&self, lambda: &Vector4<f64>) -> Result<NormConstResult> {
        if !lambda.iter().all(|l| l.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite eigenvalues {lambda:?}")));
        }
        let shift = lambda.max();
        let shifted = lambda.map(|l| l - shift);
        Ok(self.evaluate_unchecked(&shifted)?.scaled_by_shift(shift))
    }

    /// Runs the sum directly at `λ`. Valid while every `λ_k` stays below the
    /// contour abscissa `c`; accuracy is only characterized for shifted `λ`.
    pub fn evaluate_unchecked(&self, lambda: &Vector4<f64>) -> Result<NormConstResult> {
        let sums = self.raw_sums(lambda)?;
        let mut imag_residual = 0.0_f64;
        for (i, z) in sums.iter().enumerate() {
            let r = ratio(*z);
            if r > MAX_IMAG_RATIO || !z.re.is_finite() || (i == 0 && z.re <= 0.0) {
                return Err(Error::Instability { ratio: r, sum: i });
            }
            imag_residual = imag_residual.max(r);
        }
        Ok(NormConstResult {
            c: sums[0].re,
            dc: Vector4::new(sums[1].re, sums[2].re, sums[3].re, sums[4].re),
            imag_residual,
        })
    }

    /// The five complex sums `[C, ∂C/∂λ₁, …, ∂C/∂λ₄]` before the imaginary
    /// parts are dropped, from one pass over the nodes.
    fn raw_sums(&self, lambda: &Vector4<f64>) -> Result<[Complex64; 5]> {
        let c = self.constants.c;
        if lambda.iter().any(|&l| l.is_nan() || l >= c) {
            return Err(Error::InvalidArgument(format!(
                "eigenvalues {lambda:?} must stay below the contour abscissa {c}"
            )));
        }
        let mut s = Complex64::new(0.0, 0.0);
        let mut ds = [Complex64::new(0.0, 0.0); 4];
        for (&t, &phase) in self.nodes.iter().zip(&self.phases) {
            let z = factors(t, lambda, c)?;
            let term = phase * product_inv_sqrt(&z);
            s += term;
            for (acc, zi) in ds.iter_mut().zip(&z) {
                *acc += term * zi.inv();
            }
        }
        let k = self.prefactor;
        Ok([
            s * k,
            ds[0] * (0.5 * k),
            ds[1] * (0.5 * k),
            ds[2] * (0.5 * k),
            ds[3] * (0.5 * k),
        ])
    }
}

fn ratio(z: Complex64) -> f64 {
    z.im.abs() / z.re.abs()
}

/// One-shot evaluation at shifted `λ`.
pub fn normalizing_constant(lambda: &Vector4<f64>, cfg: &IntegratorConfig) -> Result<NormConstResult> {
    Integrator::new(*cfg)?.evaluate(lambda)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbeRow {
    pub n: u32,
    pub c: f64,
    /// `|C(n) - C(n_max)|`.
    pub abs_diff: f64,
    pub rel_diff: f64,
    /// `abs_diff` divided by the previous row's, when both are nonzero.
    pub ratio: Option<f64>,
    /// `|Im| / |Re|` of the `C` sum. Reported, not checked.
    pub imag_residual: f64,
}

/// Self-convergence table: `C` at each `N` in `n_values` compared with `C` at
/// the largest of them.
pub fn accuracy_probe(lambda: &Vector4<f64>, cfg: &IntegratorConfig, n_values: &[u32]) -> Result<Vec<ProbeRow>> {
    if n_values.is_empty() {
        return Err(Error::EmptyInput("accuracy_probe needs at least one N"));
    }
    if n_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("N values must be strictly increasing".into()));
    }
    if !lambda.iter().all(|l| l.is_finite()) {
        return Err(Error::InvalidArgument(format!("non-finite eigenvalues {lambda:?}")));
    }
    let shift = lambda.max();
    let shifted = lambda.map(|l| l - shift);
    let values: Vec<(f64, f64)> = n_values
        .iter()
        .map(|&n| {
            let sum = Integrator::new(cfg.with_n(n))?.raw_sums(&shifted)?[0];
            Ok((sum.re * shift.exp(), ratio(sum)))
        })
        .collect::<Result<_>>()?;
    let reference = values.last().expect("non-empty").0;
    let mut rows: Vec<ProbeRow> = Vec::with_capacity(values.len());
    for (&n, &(c, imag_residual)) in n_values.iter().zip(&values) {
        let abs_diff = (c - reference).abs();
        let ratio = rows
            .last()
            .filter(|prev| prev.abs_diff > 0.0 && abs_diff > 0.0)
            .map(|prev| abs_diff / prev.abs_diff);
        rows.push(ProbeRow {
            n,
            c,
            abs_diff,
            rel_diff: abs_diff / reference.abs(),
            ratio,
            imag_residual,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_PI_SQ: f64 = 2.0 * PI * PI;

    fn lam(v: [f64; 4]) -> Vector4<f64> {
        Vector4::from(v)
    }

    #[test]
    fn half_angle_sqrt_matches_principal_branch() {
        for &(x, y) in &[(1e-3, 0.0), (4.3, 137.6), (4.3, -137.6), (1e6, 1e-3), (0.5, -2.0)] {
            let z = Complex64::new(x, y);
            let a = sqrt_right_half(z);
            let b = z.sqrt();
            assert!((a - b).norm() <= 1e-15 * b.norm(), "{z}: {a} vs {b}");
        }
    }

    #[test]
    fn default_constants() {
        let k = derive_constants(&IntegratorConfig::default()).unwrap();
        // c = 15π / (6.25 · 3.5 · 0.5)
        assert!((k.c - 15.0 * PI / 10.9375).abs() < 1e-14);
        assert!((k.c - 4.308469924923145).abs() < 1e-12);
        assert!((k.d - k.c / 2.0).abs() < 1e-15);
        assert!((k.h - (2.0 * PI * (k.c / 2.0) * 3.5 / 100.0).sqrt()).abs() < 1e-15);
        assert!((k.h - 0.68829).abs() < 1e-5);
        assert!((k.p1 - 16.593).abs() < 1e-3);
        assert!((k.p2 - 4.1482).abs() < 1e-4);
    }

    #[test]
    fn config_validation() {
        let ok = IntegratorConfig::default();
        assert!(ok.validate().is_ok());
        for bad in [
            IntegratorConfig { r: 1.5, ..ok },
            IntegratorConfig { omega_d: 0.3, ..ok },
            IntegratorConfig { omega_d: 1.1, ..ok },
            IntegratorConfig { n_min: 0, ..ok },
            IntegratorConfig { n: 10, ..ok },
            IntegratorConfig { d_fraction: 1.0, ..ok },
            IntegratorConfig { d_fraction: 0.0, ..ok },
        ] {
            assert!(matches!(derive_constants(&bad), Err(Error::InvalidConfig(_))), "{bad:?}");
        }
    }

    #[test]
    fn weight_examples() {
        let k = derive_constants(&IntegratorConfig::default()).unwrap();
        assert!((weight(k.p1 * k.p2, k.p1, k.p2) - 0.5).abs() < 1e-15);
        // ½ erfc(-4.1482) = 1 - ½ erfc(4.1482) and erfc(4.1482) ≈ 1.9e-9
        assert!((weight(0.0, k.p1, k.p2) - 1.0).abs() < 1e-7);
        let n = IntegratorConfig::default().n as usize;
        let mut prev = f64::INFINITY;
        for i in 0..=n {
            let w = weight(i as f64 * k.h, k.p1, k.p2);
            assert!(w <= prev && (0.0..=1.0).contains(&w));
            prev = w;
        }
    }

    #[test]
    fn integrand_examples() {
        let c = 4.3;
        let f = integrand_f(0.0, &Vector4::zeros(), c).unwrap();
        assert!((f - Complex64::new(c.powi(-2), 0.0)).norm() < 1e-16);
        // (c + ic)^{-2} = 1 / (2i c²) = -i / (2c²)
        let f = integrand_f(c, &Vector4::zeros(), c).unwrap();
        assert!((f - Complex64::new(0.0, -1.0 / (2.0 * c * c))).norm() < 1e-15);
        let df = integrand_df(0.0, &Vector4::zeros(), c, 2).unwrap();
        assert!((df.re - 0.5 * c.powi(-3)).abs() < 1e-16 && df.im == 0.0);
    }

    #[test]
    fn integrand_conjugate_symmetry() {
        let l = lam([0.0, -3.5, -40.0, -700.0]);
        for t in [0.3, 2.0, 17.0, 130.0] {
            let a = integrand_f(t, &l, 4.3).unwrap();
            let b = integrand_f(-t, &l, 4.3).unwrap();
            assert!((a - b.conj()).norm() <= 1e-15 * a.norm());
            for i in 0..4 {
                let a = integrand_df(t, &l, 4.3, i).unwrap();
                let b = integrand_df(-t, &l, 4.3, i).unwrap();
                assert!((a - b.conj()).norm() <= 1e-15 * a.norm());
            }
        }
    }

    #[test]
    fn integrand_derivative_matches_finite_difference() {
        let l = lam([0.0, -1.3, -2.5, -3.1]);
        let step = 1e-6;
        for t in [0.0, 0.7, 2.0, 5.0] {
            for i in 0..4 {
                let mut up = l;
                let mut down = l;
                up[i] += step;
                down[i] -= step;
                let fd = (integrand_f(t, &up, 4.3).unwrap() - integrand_f(t, &down, 4.3).unwrap()) / (2.0 * step);
                let an = integrand_df(t, &l, 4.3, i).unwrap();
                assert!((fd - an).norm() <= 1e-8 * an.norm(), "t={t} i={i}: {fd} vs {an}");
            }
        }
    }

    #[test]
    fn integrand_derivative_far_from_origin() {
        // A fixed step of 1e-6 is rounding-limited once |λ| is large; scale it.
        let l = lam([0.0, -1.3, -25.0, -310.0]);
        for t in [0.0, 5.0, 60.0] {
            for i in 0..4 {
                let step = 1e-6 * (1.0 + l[i].abs());
                let mut up = l;
                let mut down = l;
                up[i] += step;
                down[i] -= step;
                let fd = (integrand_f(t, &up, 4.3).unwrap() - integrand_f(t, &down, 4.3).unwrap()) / (2.0 * step);
                let an = integrand_df(t, &l, 4.3, i).unwrap();
                assert!((fd - an).norm() <= 1e-7 * an.norm(), "t={t} i={i}: {fd} vs {an}");
            }
        }
    }

    #[test]
    fn zero_factor_is_an_error() {
        assert!(matches!(
            integrand_f(0.0, &lam([4.3, 0.0, 0.0, 0.0]), 4.3),
            Err(Error::ZeroFactor { .. })
        ));
    }

    #[test]
    fn uniform_constant() {
        let r = normalizing_constant(&Vector4::zeros(), &IntegratorConfig::default()).unwrap();
        assert!((r.c - TWO_PI_SQ).abs() < 1e-7);
        assert!((r.c - 19.7392088).abs() < 1e-6);
        for d in r.dc.iter() {
            assert!((d - 4.9348).abs() < 1e-4);
            // Σ dCᵢ = C holds up to the discretization error, not termwise.
            assert!((d / (r.c / 4.0) - 1.0).abs() < 1e-8);
        }
        assert!(r.imag_residual < 1e-12);
    }

    #[test]
    fn rejects_unshifted() {
        let cfg = IntegratorConfig::default();
        assert!(matches!(
            normalizing_constant(&lam([1.0, 0.0, -1.0, -2.0]), &cfg),
            Err(Error::NotShifted { .. })
        ));
        assert!(matches!(
            normalizing_constant(&lam([-1.0, -1.0, -1.0, -2.0]), &cfg),
            Err(Error::NotShifted { .. })
        ));
    }

    #[test]
    fn evaluate_any_applies_shift_law() {
        let integ = Integrator::new(IntegratorConfig::default()).unwrap();
        let base = lam([0.0, -2.0, -30.0, -400.0]);
        let r0 = integ.evaluate(&base).unwrap();
        for s in [-50.0, -1.5, 3.0, 20.0] {
            let r = integ.evaluate_any(&base.map(|l| l + s)).unwrap();
            assert!((r.c / (r0.c * f64::exp(s)) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn direct_evaluation_below_abscissa_obeys_shift_law() {
        let integ = Integrator::new(IntegratorConfig::default()).unwrap();
        let base = lam([0.0, -2.0, -30.0, -400.0]);
        let r0 = integ.evaluate(&base).unwrap();
        for s in [-1.0, -0.5, 0.5] {
            let r = integ.evaluate_unchecked(&base.map(|l| l + s)).unwrap();
            assert!((r.c / (r0.c * f64::exp(s)) - 1.0).abs() < 1e-6, "shift {s}");
        }
        assert!(integ.evaluate_unchecked(&lam([5.0, 0.0, 0.0, 0.0])).is_err());
    }

    #[test]
    fn probe_converges_for_uniform() {
        let rows = accuracy_probe(&Vector4::zeros(), &IntegratorConfig::default(), &[15, 50, 200, 1000]).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows[0].abs_diff > rows[1].abs_diff && rows[1].abs_diff > rows[2].abs_diff);
        assert_eq!(rows[3].abs_diff, 0.0);
        assert!(accuracy_probe(&Vector4::zeros(), &IntegratorConfig::default(), &[200, 50]).is_err());
    }
}
