//! Bingham negative log-likelihood (BNLL) and QCQP losses with analytic
//! gradients in `A`-space and `θ`-space.

use nalgebra::{Matrix4, Vector4};

use crate::bingham::{normalized_gradient, BinghamParam, Mode, ThetaVec};
use crate::error::{Error, Result};
use crate::normconst::Integrator;
use crate::quat::{dist_frobenius_squared, UnitQuaternion};

/// Eigen-gap below which the QCQP gradient is zeroed and flagged.
pub const QCQP_MIN_GAP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossValue {
    pub value: f64,
    /// Gradient with respect to the symmetric matrix `A`.
    pub grad_a: Matrix4<f64>,
    /// Gradient with respect to `θ`, the `triu` pullback of `grad_a`.
    pub grad_theta: ThetaVec,
    /// False when the gradient was zeroed because it is undefined (QCQP with
    /// a repeated top eigenvalue).
    pub gradient_reliable: bool,
}

impl LossValue {
    fn new(value: f64, grad_a: Matrix4<f64>, gradient_reliable: bool) -> Self {
        Self {
            value,
            grad_a,
            grad_theta: ThetaVec::pullback(&grad_a),
            gradient_reliable,
        }
    }
}

/// `Σ qᵢqᵢᵀ / n`.
pub fn scatter_matrix(samples: &[UnitQuaternion]) -> Result<Matrix4<f64>> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("loss needs at least one quaternion"));
    }
    let sum = pairwise_sum(samples, &|q: &UnitQuaternion| {
        let v = q.to_vector();
        v * v.transpose()
    });
    Ok(sum / samples.len() as f64)
}

// Pairwise summation with a fixed split, so the result does not depend on
// how a caller chunks the work.
fn pairwise_sum<T, F>(items: &[T], f: &F) -> Matrix4<f64>
where
    F: Fn(&T) -> Matrix4<f64>,
{
    match items.len() {
        0 => Matrix4::zeros(),
        1..=8 => items.iter().fold(Matrix4::zeros(), |acc, x| acc + f(x)),
        n => {
            let (l, r) = items.split_at(n / 2);
            pairwise_sum(l, f) + pairwise_sum(r, f)
        }
    }
}

/// `L(A, q) = -qᵀ A_shifted q + ln C(λ_shifted)`.
pub fn bnll_loss(param: &BinghamParam, q_gt: UnitQuaternion, integrator: &Integrator) -> Result<LossValue> {
    let v = q_gt.to_vector();
    bnll_from_scatter(param, &(v * v.transpose()), integrator)
}

/// Mean BNLL over `samples`, with the normalizing constant computed once.
pub fn bnll_batch(param: &BinghamParam, samples: &[UnitQuaternion], integrator: &Integrator) -> Result<LossValue> {
    bnll_from_scatter(param, &scatter_matrix(samples)?, integrator)
}

/// Mean BNLL given the sample scatter matrix `S = mean(qqᵀ)`; the loss only
/// depends on the samples through `S`.
///
/// `∂L/∂A = -S + D diag(∂C/∂λᵢ / C) Dᵀ`, using `∂λᵢ/∂A = dᵢdᵢᵀ`.
pub fn bnll_from_scatter(param: &BinghamParam, scatter: &Matrix4<f64>, integrator: &Integrator) -> Result<LossValue> {
    let nc = integrator.evaluate(param.eigenvalues())?;
    let d = param.eigenvectors();
    let ratios = normalized_gradient(&nc)?;
    let moments = d * Matrix4::from_diagonal(&ratios) * d.transpose();

    let quadratic = (param.shifted_matrix().component_mul(scatter)).sum();
    let value = -quadratic + nc.ln_c();
    Ok(LossValue::new(value, moments - scatter, true))
}

/// `argmax_{q ∈ S³} qᵀAq`, identical to [`BinghamParam::mode`].
pub fn qcqp_mode(param: &BinghamParam) -> Mode {
    param.mode()
}

/// `L(A, q) = d_F(q_amax(A), q)² = 8 (1 - (q_amaxᵀ q)²)`.
pub fn qcqp_loss(param: &BinghamParam, q_gt: UnitQuaternion) -> LossValue {
    qcqp_batch(param, &[q_gt]).expect("one sample")
}

/// Mean QCQP loss over `samples`.
///
/// The gradient uses first-order eigenvector perturbation,
/// `∂q₁ = Σ_{j≥2} dⱼdⱼᵀ (∂A) q₁ / (λ₁ - λⱼ)`, and is zeroed (and flagged
/// unreliable) when `λ₁ - λ₂ < QCQP_MIN_GAP`.
pub fn qcqp_batch(param: &BinghamParam, samples: &[UnitQuaternion]) -> Result<LossValue> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("loss needs at least one quaternion"));
    }
    let n = samples.len() as f64;
    let mode = param.mode().quaternion;
    let q1 = mode.to_vector();

    let value = samples.iter().map(|&q| dist_frobenius_squared(mode, q)).sum::<f64>() / n;
    // dL/dq₁ = -16 (q₁ᵀq) q, averaged
    let outer = samples.iter().fold(Vector4::zeros(), |acc, q| {
        let v = q.to_vector();
        acc - v * (16.0 * q1.dot(&v))
    }) / n;

    let lambda = param.eigenvalues();
    let gap = lambda[0] - lambda[1];
    if gap.is_nan() || gap < QCQP_MIN_GAP {
        return Ok(LossValue::new(value, Matrix4::zeros(), false));
    }
    let d = param.eigenvectors();
    let mut dq = Vector4::zeros();
    for j in 1..4 {
        let dj = d.column(j);
        dq += dj * (dj.dot(&outer) / (lambda[0] - lambda[j]));
    }
    let g = dq * q1.transpose();
    Ok(LossValue::new(value, (g + g.transpose()) * 0.5, true))
}
