//! Sweeps over the sample count and the initial-parameter scale, with fresh
//! random ground truths per trial, and the empirical `KL(A‖O)` bound check.

use nalgebra::Vector4;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{fit_distribution, kld_analytic, FitConfig};
use crate::bingham::BinghamParam;
use crate::error::{Error, Result};
use crate::normconst::Integrator;
use crate::sampler::{derive_seed, sample};

/// Upper end (exclusive) of the raw eigenvalue draw.
pub const EIGENVALUE_RANGE: f64 = 1500.0;

/// A random ground truth `A = D diag(λ) Dᵀ` with `D = Ω_L(q)` for `q`
/// uniform on `S³` and `λ ~ Uniform[0, 1500)⁴`, then shifted.
pub fn random_ground_truth(seed: u64) -> Result<BinghamParam> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let q = sample(&BinghamParam::uniform(), 1, rng.random())?[0];
    let d = q.quaternion().omega_left();
    let lambda = Vector4::from_fn(|_, _| rng.random_range(0.0..EIGENVALUE_RANGE));
    BinghamParam::from_eigen(&d, &lambda)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AblationAxis {
    /// Number of samples drawn from the ground truth.
    NSample,
    /// Multiplier `s` on the initial parameter.
    InitScale,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationConfig {
    pub axis: AblationAxis,
    pub values: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    /// Sample count used when the axis is not [`AblationAxis::NSample`].
    pub n_sample: usize,
    pub fit: FitConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationRow {
    pub value: f64,
    pub trial: usize,
    /// Seed of this trial's ground truth; the same trial index shares its
    /// ground truth and sample stream across axis values.
    pub truth_seed: u64,
    pub final_kld: Option<f64>,
    pub mode_error_deg: Option<f64>,
    pub converged: Option<bool>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationSummary {
    pub value: f64,
    pub completed: usize,
    pub failed: usize,
    pub median_kld: Option<f64>,
    pub min_kld: Option<f64>,
    pub max_kld: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationTable {
    pub axis: AblationAxis,
    pub rows: Vec<AblationRow>,
    pub summary: Vec<AblationSummary>,
}

impl AblationTable {
    pub fn rows_csv(&self) -> String {
        let mut out = String::from("value,trial,truth_seed,final_kld,mode_error_deg,converged,error\n");
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.value,
                r.trial,
                r.truth_seed,
                opt(r.final_kld),
                opt(r.mode_error_deg),
                r.converged.map(|c| c.to_string()).unwrap_or_default(),
                r.error.as_deref().map(csv_quote).unwrap_or_default(),
            ));
        }
        out
    }

    pub fn summary_csv(&self) -> String {
        let mut out = String::from("value,completed,failed,median_kld,min_kld,max_kld\n");
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for s in &self.summary {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                s.value,
                s.completed,
                s.failed,
                opt(s.median_kld),
                opt(s.min_kld),
                opt(s.max_kld)
            ));
        }
        out
    }
}

fn csv_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

pub(crate) fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    })
}

fn run_trial(cfg: &AblationConfig, value: f64, trial: usize) -> AblationRow {
    let truth_seed = derive_seed(cfg.seed, trial as u64);
    let mut row = AblationRow {
        value,
        trial,
        truth_seed,
        final_kld: None,
        mode_error_deg: None,
        converged: None,
        error: None,
    };
    let result = (|| -> Result<_> {
        let (n_sample, fit) = match cfg.axis {
            AblationAxis::NSample => {
                if !(value >= 1.0 && value.fract() == 0.0) {
                    return Err(Error::InvalidArgument(format!("n_sample must be a positive integer, got {value}")));
                }
                (value as usize, cfg.fit.clone())
            }
            AblationAxis::InitScale => (
                cfg.n_sample,
                FitConfig {
                    init_scale: value,
                    ..cfg.fit.clone()
                },
            ),
        };
        let truth = random_ground_truth(truth_seed)?;
        let samples = sample(&truth, n_sample, derive_seed(truth_seed, 0))?;
        fit_distribution(&samples, &fit, Some(&truth))
    })();
    match result {
        Ok(report) => {
            row.final_kld = report.final_kld();
            row.mode_error_deg = report.final_mode_error_deg();
            row.converged = Some(report.converged);
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// Runs `trials` fits per axis value, concurrently. Trial failures are
/// recorded in their row rather than aborting the sweep.
pub fn ablation_sweep(cfg: &AblationConfig) -> Result<AblationTable> {
    if cfg.values.is_empty() {
        return Err(Error::EmptyInput("ablation needs at least one axis value"));
    }
    if cfg.trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    cfg.fit.validate()?;
    let jobs: Vec<(f64, usize)> = cfg
        .values
        .iter()
        .flat_map(|&v| (0..cfg.trials).map(move |t| (v, t)))
        .collect();
    let rows: Vec<AblationRow> = jobs.par_iter().map(|&(v, t)| run_trial(cfg, v, t)).collect();

    let summary = cfg
        .values
        .iter()
        .map(|&value| {
            let of_value: Vec<&AblationRow> = rows.iter().filter(|r| r.value == value).collect();
            let mut klds: Vec<f64> = of_value.iter().filter_map(|r| r.final_kld).collect();
            let failed = of_value.len() - klds.len();
            let min = klds.iter().copied().reduce(f64::min);
            let max = klds.iter().copied().reduce(f64::max);
            AblationSummary {
                value,
                completed: klds.len(),
                failed,
                median_kld: median(&mut klds),
                min_kld: min,
                max_kld: max,
            }
        })
        .collect();
    Ok(AblationTable {
        axis: cfg.axis,
        rows,
        summary,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KlBoundRow {
    pub lambda_norm: f64,
    pub kl: f64,
    /// `max(0.05, 1.5 ln ‖λ_shifted‖)`.
    pub bound: f64,
    pub violated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KlBoundReport {
    pub rows: Vec<KlBoundRow>,
    pub violations: usize,
    /// Draws with `ln ‖λ_shifted‖ > 25`, outside the range the bound covers.
    pub out_of_range: usize,
}

/// The empirical bound `KL(A‖O) ≤ max(0.05, 1.5 ln ‖λ_shifted‖)`.
pub fn kl_bound(lambda_norm: f64) -> f64 {
    if lambda_norm > 0.0 {
        0.05_f64.max(1.5 * lambda_norm.ln())
    } else {
        0.05
    }
}

/// Checks the empirical `KL(A‖O)` bound on `trials` random parameters drawn
/// like [`random_ground_truth`]; violations are counted, not treated as errors.
pub fn empirical_kl_bound_check(trials: usize, seed: u64, integrator: &Integrator) -> Result<KlBoundReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let uniform = BinghamParam::uniform();
    let mut rows = Vec::with_capacity(trials);
    let mut out_of_range = 0;
    for i in 0..trials {
        let p = random_ground_truth(derive_seed(seed, i as u64))?;
        let lambda_norm = p.eigenvalues().norm();
        if lambda_norm > 0.0 && lambda_norm.ln() > 25.0 {
            out_of_range += 1;
            continue;
        }
        let kl = kld_analytic(&p, &uniform, integrator)?;
        let bound = kl_bound(lambda_norm);
        rows.push(KlBoundRow {
            lambda_norm,
            kl,
            bound,
            violated: kl > bound,
        });
    }
    Ok(KlBoundReport {
        violations: rows.iter().filter(|r| r.violated).count(),
        rows,
        out_of_range,
    })
}

/// Reports `KL(B(λ)‖B(O))` against the bound for one canonical spectrum.
pub fn kl_bound_for(param: &BinghamParam, integrator: &Integrator) -> Result<KlBoundRow> {
    let lambda_norm = param.eigenvalues().norm();
    let kl = kld_analytic(param, &BinghamParam::uniform(), integrator)?;
    let bound = kl_bound(lambda_norm);
    Ok(KlBoundRow {
        lambda_norm,
        kl,
        bound,
        violated: kl > bound,
    })
}
