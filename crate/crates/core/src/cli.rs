//! The `bingham` command-line tool.
//!
//! Exit codes: 0 success, 2 usage or unreadable input, 3 numerical or
//! sampler failure, 4 fit divergence (a diagnostic JSON object goes to
//! stderr).
//!
//! Every file-producing command writes its outputs atomically and records
//! them in a JSON manifest next to the primary output. Outputs depend only
//! on the arguments, the config file and the seed, so repeated runs are
//! byte-identical; timings are reported on stderr only.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::Vector4;
use serde::{Deserialize, Serialize};

use crate::bingham::{BinghamParam, ThetaVec};
use crate::error::Error;
use crate::fit::{
    ablation_sweep, empirical_kl_bound_check, fit_distribution, kld_analytic, kld_monte_carlo, presets,
    AblationAxis, AblationConfig, FitConfig, LossKind, Optimizer,
};
use crate::loss::{bnll_batch, qcqp_batch};
use crate::normconst::{Integrator, IntegratorConfig};
use crate::quat::UnitQuaternion;
use crate::sampler::sample;

/// Environment variable consulted for the seed when neither `--seed` nor the
/// config file sets one.
pub const SEED_ENV: &str = "BINGHAM_SEED";

#[derive(Parser, Debug)]
#[command(name = "bingham", version, about = "Bingham distribution on unit quaternions")]
pub struct Cli {
    /// TOML config file with optional `seed`, `[integrator]` and `[fit]` tables.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate the normalizing constant and its derivatives.
    Normconst(NormconstArgs),
    /// Write a named parameter as JSON.
    Preset(PresetArgs),
    /// Draw samples as JSON lines `{"q":[w,x,y,z]}`.
    Sample(SampleArgs),
    /// Evaluate a batch loss and its gradient.
    Loss(LossArgs),
    /// Fit a parameter to samples by gradient descent.
    Fit(FitArgs),
    /// KL divergence between two parameters.
    Kld(KldArgs),
    /// Sweep the sample count or the initial scale over random ground truths.
    Ablation(AblationArgs),
    /// Check `KL(A‖O) ≤ max(0.05, 1.5 ln ‖λ‖)` on random parameters.
    KlBound(KlBoundArgs),
}

#[derive(Args, Debug, Default, Clone)]
struct IntegratorArgs {
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    omega_d: Option<f64>,
    #[arg(long)]
    n_min: Option<u32>,
    /// Half-width of the quadrature sum.
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    d_fraction: Option<f64>,
}

#[derive(Args, Debug)]
struct NormconstArgs {
    /// Four eigenvalues; they need not be shifted or sorted.
    #[arg(long, num_args = 4, allow_negative_numbers = true, required = true)]
    lambda: Vec<String>,
    #[command(flatten)]
    integrator: IntegratorArgs,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
enum PresetName {
    Uniform,
    /// The initial parameter of the distribution-recovery experiment.
    AInit,
    /// The axis-symmetric ground truth.
    AxisSymmetric,
    /// The unimodal ground truth.
    Unimodal,
}

#[derive(Args, Debug)]
struct PresetArgs {
    #[arg(value_enum)]
    name: PresetName,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SampleArgs {
    /// Parameter JSON (`{"A": [16 row-major entries]}`).
    #[arg(long)]
    param: PathBuf,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct LossArgs {
    #[arg(long)]
    param: PathBuf,
    /// JSON-lines samples as written by `sample`.
    #[arg(long)]
    samples: PathBuf,
    #[arg(long, value_enum, default_value = "bnll")]
    loss: LossArg,
    /// Write the result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    integrator: IntegratorArgs,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum LossArg {
    Bnll,
    Qcqp,
}

impl From<LossArg> for LossKind {
    fn from(l: LossArg) -> Self {
        match l {
            LossArg::Bnll => LossKind::Bnll,
            LossArg::Qcqp => LossKind::Qcqp,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum OptimizerArg {
    Gd,
    Momentum,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum InitArg {
    /// `θ = 0`, the uniform distribution.
    Zero,
    /// The `a-init` preset.
    AInit,
}

#[derive(Args, Debug, Default, Clone)]
struct FitFlags {
    #[arg(long, value_enum)]
    loss: Option<LossArg>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long, value_enum)]
    optimizer: Option<OptimizerArg>,
    #[arg(long)]
    momentum: Option<f64>,
    #[arg(long, value_enum, conflicts_with = "init_theta")]
    init: Option<InitArg>,
    /// Ten `triu` entries of the initial `A`.
    #[arg(long, num_args = 10, allow_negative_numbers = true)]
    init_theta: Option<Vec<f64>>,
    #[arg(long)]
    init_scale: Option<f64>,
    #[arg(long)]
    record_every: Option<usize>,
    #[command(flatten)]
    integrator: IntegratorArgs,
}

#[derive(Args, Debug)]
struct FitArgs {
    #[arg(long)]
    samples: PathBuf,
    /// Ground-truth parameter JSON; enables the KL and mode-error columns.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Report JSON path.
    #[arg(long)]
    out: PathBuf,
    /// Trace CSV path; defaults to the report path with a `.csv` extension.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    fit: FitFlags,
}

#[derive(Args, Debug)]
struct KldArgs {
    #[arg(long)]
    p: PathBuf,
    #[arg(long)]
    q: PathBuf,
    /// Also report a Monte-Carlo estimate from this many draws.
    #[arg(long)]
    mc: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    integrator: IntegratorArgs,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum AxisArg {
    NSample,
    InitScale,
}

#[derive(Args, Debug)]
struct AblationArgs {
    #[arg(long, value_enum)]
    axis: AxisArg,
    #[arg(long, num_args = 1.., required = true)]
    values: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Sample count when sweeping the initial scale.
    #[arg(long, default_value_t = 100)]
    n_sample: usize,
    #[arg(long)]
    out_dir: PathBuf,
    /// Fit flags; `--init` defaults to `a-init` here.
    #[command(flatten)]
    fit: FitFlags,
}

#[derive(Args, Debug)]
struct KlBoundArgs {
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Per-draw CSV.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    integrator: IntegratorArgs,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FileConfig {
    seed: Option<u64>,
    integrator: IntegratorConfig,
    /// Integrator settings inside `[fit]` are ignored; `[integrator]` wins.
    fit: FitConfig,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub seed: Option<u64>,
    pub config: serde_json::Value,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Numeric(Error),
    Diverged(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Diverged { .. } => CliError::Diverged(e),
            Error::InvalidArgument(_) | Error::InvalidConfig(_) | Error::EmptyInput(_) | Error::NotSymmetric { .. } => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Numeric(e),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Parses arguments from the process environment and runs the command.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    run(cli)
}

pub fn run(cli: Cli) -> ExitCode {
    let started = Instant::now();
    let result = load_config(cli.config.as_deref()).and_then(|file| dispatch(cli.command, &file));
    eprintln!("elapsed: {:.3} s", started.elapsed().as_secs_f64());
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Numeric(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
        Err(CliError::Diverged(e)) => {
            let diag = match &e {
                Error::Diverged { iter, what, theta } => serde_json::json!({
                    "error": "diverged",
                    "iter": iter,
                    "what": what,
                    "theta": theta,
                }),
                other => serde_json::json!({ "error": other.to_string() }),
            };
            eprintln!("{diag}");
            ExitCode::from(4)
        }
    }
}

fn load_config(path: Option<&Path>) -> CliResult<FileConfig> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = read_to_string(path)?;
    toml::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn dispatch(command: Command, file: &FileConfig) -> CliResult<()> {
    match command {
        Command::Normconst(a) => cmd_normconst(a, file),
        Command::Preset(a) => cmd_preset(a),
        Command::Sample(a) => cmd_sample(a, file),
        Command::Loss(a) => cmd_loss(a, file),
        Command::Fit(a) => cmd_fit(a, file),
        Command::Kld(a) => cmd_kld(a, file),
        Command::Ablation(a) => cmd_ablation(a, file),
        Command::KlBound(a) => cmd_kl_bound(a, file),
    }
}

fn resolve_seed(flag: Option<u64>, file: &FileConfig) -> CliResult<u64> {
    if let Some(s) = flag.or(file.seed) {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| usage(format!("{SEED_ENV} must be an unsigned integer, got {v:?}"))),
        Err(_) => Ok(0),
    }
}

fn resolve_integrator(args: &IntegratorArgs, file: &FileConfig) -> CliResult<IntegratorConfig> {
    let base = file.integrator;
    let cfg = IntegratorConfig {
        r: args.r.unwrap_or(base.r),
        omega_d: args.omega_d.unwrap_or(base.omega_d),
        n_min: args.n_min.unwrap_or(base.n_min),
        n: args.n.unwrap_or(base.n),
        d_fraction: args.d_fraction.unwrap_or(base.d_fraction),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn resolve_fit(flags: &FitFlags, file: &FileConfig, seed: u64, default_init: InitArg) -> CliResult<FitConfig> {
    let mut cfg = file.fit.clone();
    cfg.integrator = resolve_integrator(&flags.integrator, file)?;
    cfg.seed = seed;
    if let Some(l) = flags.loss {
        cfg.loss = l.into();
    }
    if let Some(v) = flags.max_iters {
        cfg.max_iters = v;
    }
    if let Some(v) = flags.learning_rate {
        cfg.learning_rate = v;
    }
    if let Some(o) = flags.optimizer {
        cfg.optimizer = match o {
            OptimizerArg::Gd => Optimizer::Gd,
            OptimizerArg::Momentum => Optimizer::Momentum,
        };
    }
    if let Some(v) = flags.momentum {
        cfg.momentum = v;
    }
    if let Some(theta) = &flags.init_theta {
        cfg.init_theta = ThetaVec(theta.as_slice().try_into().map_err(|_| usage("--init-theta takes 10 values"))?);
    } else if let Some(init) = flags.init {
        cfg.init_theta = init_theta(init);
    } else if default_init != InitArg::Zero && file.fit.init_theta == ThetaVec::zeros() {
        cfg.init_theta = init_theta(default_init);
    }
    if let Some(v) = flags.init_scale {
        cfg.init_scale = v;
    }
    if let Some(v) = flags.record_every {
        cfg.record_every = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn init_theta(init: InitArg) -> ThetaVec {
    match init {
        InitArg::Zero => ThetaVec::zeros(),
        InitArg::AInit => presets::THETA_INIT,
    }
}

fn cmd_normconst(args: NormconstArgs, file: &FileConfig) -> CliResult<()> {
    let mut lambda = Vector4::zeros();
    for (i, s) in args.lambda.iter().enumerate() {
        let v: f64 = s.parse().map_err(|_| usage(format!("cannot parse eigenvalue {s:?}")))?;
        if !v.is_finite() {
            return Err(usage(format!("eigenvalue {s:?} is not finite")));
        }
        lambda[i] = v;
    }
    let cfg = resolve_integrator(&args.integrator, file)?;
    let nc = Integrator::new(cfg)?.evaluate_any(&lambda)?;
    let mut out = format!("C = {:.14e}\n", nc.c);
    for i in 0..4 {
        let _ = writeln!(out, "dC/dlambda{} = {:.14e}", i + 1, nc.dc[i]);
    }
    print_stdout(&out)
}

fn cmd_preset(args: PresetArgs) -> CliResult<()> {
    let param = match args.name {
        PresetName::Uniform => BinghamParam::uniform(),
        PresetName::AInit => presets::initial(),
        PresetName::AxisSymmetric => presets::axis_symmetric_truth(),
        PresetName::Unimodal => presets::unimodal_truth()?,
    };
    write_atomic(&args.out, &to_json(&param)?)?;
    write_manifest(
        &manifest_path(&args.out),
        "preset",
        None,
        serde_json::json!({ "name": args.name }),
        &[],
        &[&args.out],
    )
}

fn cmd_sample(args: SampleArgs, file: &FileConfig) -> CliResult<()> {
    let seed = resolve_seed(args.seed, file)?;
    let param = read_param(&args.param)?;
    let draws = sample(&param, args.n, seed)?;
    let mut out = String::with_capacity(draws.len() * 96);
    for q in &draws {
        out.push_str(&serde_json::to_string(&SampleLine { q: *q }).expect("quaternions serialize"));
        out.push('\n');
    }
    write_atomic(&args.out, out.as_bytes())?;
    write_manifest(
        &manifest_path(&args.out),
        "sample",
        Some(seed),
        serde_json::json!({ "n": args.n }),
        &[&args.param],
        &[&args.out],
    )
}

#[derive(Serialize, Deserialize)]
struct SampleLine {
    q: UnitQuaternion,
}

#[derive(Serialize)]
struct LossOutput {
    loss: LossKind,
    value: f64,
    grad_theta: ThetaVec,
    grad_a: Vec<f64>,
    gradient_reliable: bool,
}

fn cmd_loss(args: LossArgs, file: &FileConfig) -> CliResult<()> {
    let param = read_param(&args.param)?;
    let samples = read_samples(&args.samples)?;
    let kind: LossKind = args.loss.into();
    let value = match kind {
        LossKind::Bnll => {
            let integ = Integrator::new(resolve_integrator(&args.integrator, file)?)?;
            bnll_batch(&param, &samples, &integ)?
        }
        LossKind::Qcqp => qcqp_batch(&param, &samples)?,
    };
    let out = LossOutput {
        loss: kind,
        value: value.value,
        grad_theta: value.grad_theta,
        grad_a: (0..4).flat_map(|i| (0..4).map(move |j| (i, j))).map(|ij| value.grad_a[ij]).collect(),
        gradient_reliable: value.gradient_reliable,
    };
    emit_json(&out, args.out.as_deref(), "loss", None, serde_json::json!({ "loss": kind }), &[
        &args.param,
        &args.samples,
    ])
}

fn cmd_fit(args: FitArgs, file: &FileConfig) -> CliResult<()> {
    let seed = resolve_seed(args.seed, file)?;
    let cfg = resolve_fit(&args.fit, file, seed, InitArg::Zero)?;
    let samples = read_samples(&args.samples)?;
    let truth = args.truth.as_deref().map(read_param).transpose()?;
    let report = fit_distribution(&samples, &cfg, truth.as_ref())?;
    eprintln!(
        "fit: {} iterations, converged = {}, {:.3} s",
        report.iterations,
        report.converged,
        report.wall_time.as_secs_f64()
    );
    let trace = args.trace.clone().unwrap_or_else(|| args.out.with_extension("csv"));
    if trace == args.out {
        return Err(usage("--trace must differ from --out"));
    }
    write_atomic(&args.out, &to_json(&report)?)?;
    write_atomic(&trace, report.trace_csv().as_bytes())?;
    let mut inputs: Vec<&Path> = vec![&args.samples];
    if let Some(t) = &args.truth {
        inputs.push(t);
    }
    write_manifest(
        &manifest_path(&args.out),
        "fit",
        Some(seed),
        serde_json::to_value(&cfg).expect("config serializes"),
        &inputs,
        &[&args.out, &trace],
    )
}

#[derive(Serialize)]
struct KldOutput {
    analytic: f64,
    monte_carlo: Option<crate::fit::MonteCarloEstimate>,
}

fn cmd_kld(args: KldArgs, file: &FileConfig) -> CliResult<()> {
    let seed = resolve_seed(args.seed, file)?;
    let p = read_param(&args.p)?;
    let q = read_param(&args.q)?;
    let icfg = resolve_integrator(&args.integrator, file)?;
    let integ = Integrator::new(icfg)?;
    let out = KldOutput {
        analytic: kld_analytic(&p, &q, &integ)?,
        monte_carlo: args.mc.map(|n| kld_monte_carlo(&p, &q, n, seed, &integ)).transpose()?,
    };
    emit_json(
        &out,
        args.out.as_deref(),
        "kld",
        args.mc.map(|_| seed),
        serde_json::json!({ "mc": args.mc, "integrator": icfg }),
        &[&args.p, &args.q],
    )
}

fn cmd_ablation(args: AblationArgs, file: &FileConfig) -> CliResult<()> {
    let seed = resolve_seed(args.seed, file)?;
    let fit = resolve_fit(&args.fit, file, seed, InitArg::AInit)?;
    let cfg = AblationConfig {
        axis: match args.axis {
            AxisArg::NSample => AblationAxis::NSample,
            AxisArg::InitScale => AblationAxis::InitScale,
        },
        values: args.values,
        trials: args.trials,
        seed,
        n_sample: args.n_sample,
        fit,
    };
    let table = ablation_sweep(&cfg)?;
    fs::create_dir_all(&args.out_dir).map_err(|e| usage(format!("{}: {e}", args.out_dir.display())))?;
    let rows = args.out_dir.join("rows.csv");
    let summary = args.out_dir.join("summary.csv");
    let errors = args.out_dir.join("rows.csv.errors");
    let mut failures = String::new();
    for r in &table.rows {
        if let Some(e) = &r.error {
            let _ = writeln!(failures, "value={} trial={}: {e}", r.value, r.trial);
        }
    }
    write_atomic(&rows, table.rows_csv().as_bytes())?;
    write_atomic(&summary, table.summary_csv().as_bytes())?;
    write_atomic(&errors, failures.as_bytes())?;
    if !failures.is_empty() {
        eprintln!("{} trial(s) failed, see {}", failures.lines().count(), errors.display());
    }
    print_stdout(&table.summary_csv())?;
    write_manifest(
        &args.out_dir.join("manifest.json"),
        "ablation",
        Some(seed),
        serde_json::to_value(&cfg).expect("config serializes"),
        &[],
        &[&rows, &summary, &errors],
    )
}

fn cmd_kl_bound(args: KlBoundArgs, file: &FileConfig) -> CliResult<()> {
    let seed = resolve_seed(args.seed, file)?;
    let icfg = resolve_integrator(&args.integrator, file)?;
    let report = empirical_kl_bound_check(args.trials, seed, &Integrator::new(icfg)?)?;
    let mut csv = String::from("lambda_norm,kl,bound,violated\n");
    for r in &report.rows {
        let _ = writeln!(csv, "{},{},{},{}", r.lambda_norm, r.kl, r.bound, r.violated);
    }
    write_atomic(&args.out, csv.as_bytes())?;
    print_stdout(&format!(
        "draws = {}\nviolations = {}\nout_of_range = {}\n",
        report.rows.len(),
        report.violations,
        report.out_of_range
    ))?;
    write_manifest(
        &manifest_path(&args.out),
        "kl-bound",
        Some(seed),
        serde_json::json!({ "trials": args.trials, "integrator": icfg }),
        &[],
        &[&args.out],
    )
}

fn emit_json<T: Serialize>(
    value: &T,
    out: Option<&Path>,
    command: &str,
    seed: Option<u64>,
    config: serde_json::Value,
    inputs: &[&Path],
) -> CliResult<()> {
    let bytes = to_json(value)?;
    match out {
        Some(path) => {
            write_atomic(path, &bytes)?;
            write_manifest(&manifest_path(path), command, seed, config, inputs, &[path])
        }
        None => print_stdout(std::str::from_utf8(&bytes).expect("JSON is UTF-8")),
    }
}

fn to_json<T: Serialize>(value: &T) -> CliResult<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| usage(format!("serialization failed: {e}")))?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn print_stdout(s: &str) -> CliResult<()> {
    io::stdout()
        .lock()
        .write_all(s.as_bytes())
        .map_err(|e| usage(format!("stdout: {e}")))
}

fn read_to_string(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn read_param(path: &Path) -> CliResult<BinghamParam> {
    let text = read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn read_samples(path: &Path) -> CliResult<Vec<UnitQuaternion>> {
    let text = read_to_string(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parsed: SampleLine =
            serde_json::from_str(line).map_err(|e| usage(format!("{}:{}: {e}", path.display(), i + 1)))?;
        out.push(parsed.q);
    }
    if out.is_empty() {
        return Err(usage(format!("{}: no samples", path.display())));
    }
    Ok(out)
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out.with_file_name(name)
}

fn write_manifest(
    path: &Path,
    command: &str,
    seed: Option<u64>,
    config: serde_json::Value,
    inputs: &[&Path],
    outputs: &[&Path],
) -> CliResult<()> {
    let show = |p: &&Path| p.display().to_string();
    let manifest = RunManifest {
        command: command.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed,
        config,
        inputs: inputs.iter().map(show).collect(),
        outputs: outputs.iter().map(show).collect(),
    };
    write_atomic(path, &to_json(&manifest)?)
}

/// Writes to a temporary file in the target directory, then renames it over
/// `path`.
fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let fail = |e: io::Error| usage(format!("{}: {e}", path.display()));
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(path.file_name().ok_or_else(|| usage(format!("{} is not a file path", path.display())))?);
    tmp_name.push(format!(".{}.tmp", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(fail)
}
