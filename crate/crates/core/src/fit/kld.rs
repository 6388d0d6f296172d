//! Kullback-Leibler divergence between Bingham distributions.

use nalgebra::Matrix4;
use serde::Serialize;

use crate::bingham::BinghamParam;
use crate::error::{Error, Result};
use crate::normconst::Integrator;
use crate::sampler::BinghamSampler;

/// `KL(p‖q) = tr((A_p - A_q) M_p) - ln C_p + ln C_q` with `M_p = E_p[qqᵀ]`,
/// all in shifted form.
pub fn kld_analytic(p: &BinghamParam, q: &BinghamParam, integrator: &Integrator) -> Result<f64> {
    let nc_p = integrator.evaluate(p.eigenvalues())?;
    let nc_q = integrator.evaluate(q.eigenvalues())?;
    let moments = p.second_moments(&nc_p)?;
    let diff: Matrix4<f64> = p.shifted_matrix() - q.shifted_matrix();
    Ok(diff.component_mul(&moments).sum() - nc_p.ln_c() + nc_q.ln_c())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonteCarloEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub n: usize,
}

/// `mean(ln p(xᵢ) - ln q(xᵢ))` over `n` draws `xᵢ ~ p`.
pub fn kld_monte_carlo(
    p: &BinghamParam,
    q: &BinghamParam,
    n: usize,
    seed: u64,
    integrator: &Integrator,
) -> Result<MonteCarloEstimate> {
    if n < 100 {
        return Err(Error::InvalidArgument(format!("Monte Carlo KL needs n >= 100, got {n}")));
    }
    let ln_cp = integrator.evaluate(p.eigenvalues())?.ln_c();
    let ln_cq = integrator.evaluate(q.eigenvalues())?.ln_c();
    let offset = ln_cq - ln_cp;
    let mut sampler = BinghamSampler::new(p, seed);

    // Welford
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for k in 1..=n {
        let x = sampler.draw()?;
        let v = p.log_density_unnormalized(x) - q.log_density_unnormalized(x) + offset;
        let delta = v - mean;
        mean += delta / k as f64;
        m2 += delta * (v - mean);
    }
    let variance = m2 / (n - 1) as f64;
    Ok(MonteCarloEstimate {
        estimate: mean,
        std_error: (variance / n as f64).sqrt(),
        n,
    })
}
