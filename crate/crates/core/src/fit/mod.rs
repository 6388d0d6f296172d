//! Fitting Bingham parameters to sampled quaternions by gradient descent on
//! `θ`, with KL-divergence tracking against a known ground truth.

mod ablation;
mod kld;
pub mod presets;

use std::collections::VecDeque;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::bingham::{BinghamParam, ThetaVec};
use crate::error::{Error, Result};
use crate::loss::{bnll_from_scatter, qcqp_batch, scatter_matrix, LossValue};
use crate::normconst::{Integrator, IntegratorConfig};
use crate::quat::{dist_geodesic, UnitQuaternion};

pub use ablation::{
    ablation_sweep, empirical_kl_bound_check, kl_bound, kl_bound_for, random_ground_truth, AblationAxis, AblationConfig, AblationRow,
    AblationSummary, AblationTable, KlBoundReport, KlBoundRow,
};
pub use kld::{kld_analytic, kld_monte_carlo, MonteCarloEstimate};

/// Loss change over [`CONVERGENCE_WINDOW`] iterations that counts as converged.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-10;
pub const CONVERGENCE_WINDOW: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    Bnll,
    Qcqp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Optimizer {
    /// `θ ← θ - η g`
    Gd,
    /// `v ← β v + g`, `θ ← θ - η v`
    Momentum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub loss: LossKind,
    pub max_iters: usize,
    pub learning_rate: f64,
    pub optimizer: Optimizer,
    /// `β` for [`Optimizer::Momentum`].
    pub momentum: f64,
    pub init_theta: ThetaVec,
    /// The optimization starts from `init_scale · init_theta`.
    pub init_scale: f64,
    /// Seed for any sampling done on behalf of the fit (experiments, CLI).
    pub seed: u64,
    /// Trace rows are recorded every this many iterations (plus the last).
    pub record_every: usize,
    pub integrator: IntegratorConfig,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            loss: LossKind::Bnll,
            max_iters: 20_000,
            learning_rate: 5.0,
            optimizer: Optimizer::Momentum,
            momentum: 0.9,
            init_theta: ThetaVec::zeros(),
            init_scale: 1.0,
            seed: 0,
            record_every: 100,
            integrator: IntegratorConfig::default(),
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidArgument("max_iters must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::InvalidArgument(format!("momentum must lie in [0, 1), got {}", self.momentum)));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidArgument("record_every must be at least 1".into()));
        }
        if !(self.init_scale.is_finite() && self.init_theta.is_finite()) {
            return Err(Error::InvalidArgument("initial parameter must be finite".into()));
        }
        self.integrator.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub iter: usize,
    pub loss: f64,
    /// `KL(truth ‖ estimate)`, clipped at zero; absent without a ground truth.
    pub kld: Option<f64>,
    /// Geodesic angle between the estimated and true modes, in degrees.
    pub mode_error_deg: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub trace: Vec<TraceRow>,
    pub final_theta: ThetaVec,
    pub final_param: BinghamParam,
    pub converged: bool,
    /// Number of parameter updates performed.
    pub iterations: usize,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl FitReport {
    pub fn last(&self) -> &TraceRow {
        self.trace.last().expect("trace is never empty")
    }

    pub fn final_kld(&self) -> Option<f64> {
        self.last().kld
    }

    pub fn final_mode_error_deg(&self) -> Option<f64> {
        self.last().mode_error_deg
    }

    /// The trace as CSV with header `iter,loss,kld,mode_error_deg`; missing
    /// values are empty fields.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("iter,loss,kld,mode_error_deg\n");
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for row in &self.trace {
            out.push_str(&format!(
                "{},{},{},{}\n",
                row.iter,
                row.loss,
                opt(row.kld),
                opt(row.mode_error_deg)
            ));
        }
        out
    }
}

struct Objective<'a> {
    kind: LossKind,
    samples: &'a [UnitQuaternion],
    scatter: nalgebra::Matrix4<f64>,
    integrator: &'a Integrator,
}

impl Objective<'_> {
    fn eval(&self, param: &BinghamParam) -> Result<LossValue> {
        match self.kind {
            LossKind::Bnll => bnll_from_scatter(param, &self.scatter, self.integrator),
            LossKind::Qcqp => qcqp_batch(param, self.samples),
        }
    }
}

fn record(
    iter: usize,
    loss: f64,
    param: &BinghamParam,
    truth: Option<&BinghamParam>,
    integrator: &Integrator,
) -> Result<TraceRow> {
    let (kld, mode_error_deg) = match truth {
        Some(t) => {
            let kl = kld_analytic(t, param, integrator)?;
            let err = dist_geodesic(t.mode().quaternion, param.mode().quaternion).to_degrees();
            (Some(kl.max(0.0)), Some(err))
        }
        None => (None, None),
    };
    Ok(TraceRow {
        iter,
        loss,
        kld,
        mode_error_deg,
    })
}

/// Fits `θ` to `samples` by (momentum) gradient descent on the configured
/// loss. Stops after `max_iters` updates or once the loss moves less than
/// [`CONVERGENCE_TOLERANCE`] over [`CONVERGENCE_WINDOW`] iterations.
///
/// When `truth` is given, each trace row carries `KL(truth ‖ estimate)` and
/// the mode error.
pub fn fit_distribution(
    samples: &[UnitQuaternion],
    cfg: &FitConfig,
    truth: Option<&BinghamParam>,
) -> Result<FitReport> {
    cfg.validate()?;
    let start = Instant::now();
    let integrator = Integrator::new(cfg.integrator)?;
    let objective = Objective {
        kind: cfg.loss,
        samples,
        scatter: scatter_matrix(samples)?,
        integrator: &integrator,
    };
    let beta = match cfg.optimizer {
        Optimizer::Gd => 0.0,
        Optimizer::Momentum => cfg.momentum,
    };

    let mut theta = cfg.init_theta.scaled(cfg.init_scale);
    let mut velocity = [0.0; 10];
    let mut history: VecDeque<f64> = VecDeque::with_capacity(CONVERGENCE_WINDOW + 1);
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    let diverged = |iter: usize, what: String, theta: &ThetaVec| Error::Diverged {
        iter,
        what,
        theta: theta.0,
    };

    for iter in 0..cfg.max_iters {
        let param = BinghamParam::from_theta(&theta).map_err(|e| diverged(iter, e.to_string(), &theta))?;
        let loss = objective.eval(&param).map_err(|e| diverged(iter, e.to_string(), &theta))?;
        if !loss.value.is_finite() {
            return Err(diverged(iter, format!("loss is {}", loss.value), &theta));
        }
        if !loss.grad_theta.is_finite() {
            return Err(diverged(iter, "gradient is not finite".into(), &theta));
        }
        if iter % cfg.record_every == 0 {
            trace.push(record(iter, loss.value, &param, truth, &integrator)?);
        }

        history.push_back(loss.value);
        if history.len() > CONVERGENCE_WINDOW {
            let old = history.pop_front().expect("non-empty");
            if (loss.value - old).abs() < CONVERGENCE_TOLERANCE {
                converged = true;
                break;
            }
        }

        for ((t, v), g) in theta.0.iter_mut().zip(velocity.iter_mut()).zip(loss.grad_theta.0) {
            *v = beta * *v + g;
            *t -= cfg.learning_rate * *v;
        }
        iterations = iter + 1;
    }

    let final_param =
        BinghamParam::from_theta(&theta).map_err(|e| diverged(iterations, e.to_string(), &theta))?;
    let final_loss = objective
        .eval(&final_param)
        .map_err(|e| diverged(iterations, e.to_string(), &theta))?;
    if !final_loss.value.is_finite() {
        return Err(diverged(iterations, format!("loss is {}", final_loss.value), &theta));
    }
    if trace.last().map(|r| r.iter) != Some(iterations) {
        trace.push(record(iterations, final_loss.value, &final_param, truth, &integrator)?);
    }

    Ok(FitReport {
        trace,
        final_theta: theta,
        final_param,
        converged,
        iterations,
        wall_time: start.elapsed(),
    })
}
