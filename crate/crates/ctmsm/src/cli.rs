//! Command-line interface: argument parsing, config merging and the
//! commands themselves. `run` returns the process exit code.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use ctmsm_core::aalen::{fit_additive, CumCoef};
use ctmsm_core::expand::expand_to_event_grid;
use ctmsm_core::iptw::PooledLogisticFit;
use ctmsm_core::sim::{
    simulate_baseline_scenario, simulate_confounded, simulate_hypothetical, BaselineScenario, ConfoundedScenario,
};
use ctmsm_core::transform::{solve_plugin, spec_by_name, JumpIntegrator};
use ctmsm_core::weights::{ThetaPolicy, UnitWeights, WeightSource};
use ctmsm_core::{DesignSpec, EventHistory, EventKind, WeightSet};
use serde::{Deserialize, Serialize};

use crate::config::{RunConfig, ScenarioConfig, WeightMethod};
use crate::error::{CliError, CliResult};
use crate::experiments::{self, censoring, fig1, fig2, fig3, Manifest};
use crate::io;
use crate::pipeline::{
    baseline_theoretical, confounded_theoretical, ct_weights, iptw, marginal_baseline, marginal_confounded,
    time_grid, CtSettings,
};

#[derive(Debug, Parser)]
#[command(name = "ctmsm", version, about = "Continuous-time marginal structural models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate an event history from a scenario.
    Simulate(RunArgs),
    /// Estimate treatment weights.
    Weights(RunArgs),
    /// Weighted additive hazard fit of the outcome.
    Fit(RunArgs),
    /// Transform cumulative hazard coefficients into a parameter path.
    Transform(RunArgs),
    /// Discrete-time stabilized IPTW.
    Iptw(RunArgs),
    /// Simulation studies.
    #[command(subcommand)]
    Experiment(ExperimentCommand),
}

/// Flags mirror the keys of the JSON config one to one; a flag overrides the
/// same key from `--config`.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// JSON file with any of the settings below.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Long-format events CSV (`id,time,kind,value`).
    #[arg(long)]
    pub events: Option<PathBuf>,
    /// Baseline covariates CSV (`id,<columns>`); lists the full cohort.
    #[arg(long)]
    pub baseline: Option<PathBuf>,
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Scenario JSON (tagged by `"type"`: confounded or baseline).
    #[arg(long)]
    pub scenario_file: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of subjects, overriding the scenario's.
    #[arg(long)]
    pub n: Option<usize>,
    /// `factual` or `hypothetical` (treatment initiation from the marginal hazard).
    #[arg(long)]
    pub world: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub outcome_design: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',')]
    pub treatment_design: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',')]
    pub hypothetical_design: Option<Vec<String>>,
    #[arg(long, value_enum)]
    pub method: Option<WeightMethod>,
    #[arg(long)]
    pub weights_file: Option<PathBuf>,
    /// Bandwidth kappa; the window length is 1/kappa.
    #[arg(long)]
    pub bandwidth: Option<f64>,
    /// Constant ratio before the first full window (default: first window value).
    #[arg(long)]
    pub theta0: Option<f64>,
    /// Number of IPTW intervals.
    #[arg(long)]
    pub intervals: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub iptw_covariates: Option<Vec<String>>,
    #[arg(long)]
    pub truncation: Option<f64>,
    /// Also write the expanded (event-grid) table.
    #[arg(long)]
    pub expanded: Option<bool>,
    /// survival, relative-survival, cumulative-incidence or rmst.
    #[arg(long)]
    pub transform: Option<String>,
    /// Cumulative coefficient CSV written by `fit`.
    #[arg(long)]
    pub coef: Option<PathBuf>,
    /// One binding per hazard column: `+`-separated coefficient columns.
    #[arg(long, value_delimiter = ',')]
    pub bindings: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',')]
    pub knots: Option<Vec<f64>>,
    /// Output directory.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

impl RunArgs {
    fn flags(&self) -> RunConfig {
        let a = self.clone();
        RunConfig {
            events: a.events,
            baseline: a.baseline,
            horizon: a.horizon,
            scenario: None,
            scenario_file: a.scenario_file,
            seed: a.seed,
            n: a.n,
            world: a.world,
            outcome_design: a.outcome_design,
            treatment_design: a.treatment_design,
            hypothetical_design: a.hypothetical_design,
            method: a.method,
            weights_file: a.weights_file,
            bandwidth: a.bandwidth,
            theta0: a.theta0,
            intervals: a.intervals,
            iptw_covariates: a.iptw_covariates,
            truncation: a.truncation,
            expanded: a.expanded,
            transform: a.transform,
            coef: a.coef,
            bindings: a.bindings,
            knots: a.knots,
            output: a.output,
        }
    }

    /// The config file (if any) overlaid with the flags.
    pub fn resolve(&self) -> CliResult<RunConfig> {
        let file = match &self.config {
            Some(p) => io::read_json::<RunConfig>(p)?,
            None => RunConfig::default(),
        };
        Ok(file.overlay(self.flags()))
    }
}

#[derive(Debug, Subcommand)]
pub enum ExperimentCommand {
    /// Cumulative treatment effect under each weighting, and consistency
    /// against the hypothetical-world oracle.
    Fig1(ExperimentArgs),
    /// Mean weight processes, and the mean of the exact weights.
    Fig2(ExperimentArgs),
    /// Bandwidth strategies: bias and variance, and weight convergence.
    Fig3(ExperimentArgs),
    /// Censoring weights against an independent-censoring oracle.
    Censoring(ExperimentArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct ExperimentArgs {
    /// JSON config for the study.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Replications, overriding every sub-study's count.
    #[arg(long)]
    pub reps: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig1Config {
    pub seed: u64,
    pub effect: fig1::EffectConfig,
    pub consistency: fig1::ConsistencyConfig,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig2Config {
    pub seed: u64,
    pub mean_weights: fig2::MeanWeightConfig,
    pub theoretical_mean: fig2::TheoreticalMeanConfig,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig3Config {
    pub seed: u64,
    pub bias_variance: fig3::BiasVarianceConfig,
    pub convergence: fig3::ConvergenceConfig,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CensoringExperimentConfig {
    pub seed: u64,
    pub validation: censoring::CensoringValidationConfig,
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code: 0 success, 1 user error, 2 internal error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return e.exit_code();
    }
    match std::panic::catch_unwind(|| execute(&cli.command)) {
        Ok(Ok(())) => 0,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
        Err(_) => 2,
    }
}

/// Builds the global worker pool from `CTMSM_THREADS` when set.
fn configure_threads() -> CliResult<()> {
    let Ok(value) = std::env::var(crate::THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Config(format!("{} must be a positive integer, got `{value}`", crate::THREADS_ENV)))?;
    // a pool that already exists (tests running several commands) is kept
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

pub fn execute(command: &Command) -> CliResult<()> {
    match command {
        Command::Simulate(a) => cmd_simulate(&a.resolve()?),
        Command::Weights(a) => cmd_weights(&a.resolve()?),
        Command::Fit(a) => cmd_fit(&a.resolve()?),
        Command::Transform(a) => cmd_transform(&a.resolve()?),
        Command::Iptw(a) => cmd_iptw(&a.resolve()?),
        Command::Experiment(e) => match e {
            ExperimentCommand::Fig1(a) => cmd_fig1(a),
            ExperimentCommand::Fig2(a) => cmd_fig2(a),
            ExperimentCommand::Fig3(a) => cmd_fig3(a),
            ExperimentCommand::Censoring(a) => cmd_censoring(a),
        },
    }
}

fn output_dir(cfg: &RunConfig) -> CliResult<&Path> {
    let dir = RunConfig::require(&cfg.output, "output")?;
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.clone(), source })?;
    Ok(dir)
}

fn load_history(cfg: &RunConfig) -> CliResult<EventHistory> {
    let events = RunConfig::require(&cfg.events, "events")?;
    let horizon = match (cfg.horizon, cfg.resolve_scenario()?) {
        (Some(h), _) => h,
        (None, Some(s)) => s.horizon(),
        (None, None) => return Err(CliError::Config("missing required setting `horizon`".into())),
    };
    io::read_history(events, cfg.baseline.as_deref(), horizon)
}

fn design(cfg: &Option<Vec<String>>, default: &[&str]) -> CliResult<DesignSpec> {
    Ok(match cfg {
        Some(cols) => DesignSpec::parse(cols)?,
        None => DesignSpec::parse(default)?,
    })
}

pub fn cmd_simulate(cfg: &RunConfig) -> CliResult<()> {
    let scenario = cfg
        .resolve_scenario()?
        .ok_or_else(|| CliError::Config("missing required setting `scenario` or `scenario_file`".into()))?;
    let scenario = match cfg.n {
        Some(n) => scenario.with_n(n),
        None => scenario,
    };
    let seed = cfg.seed.unwrap_or(0);
    let world = cfg.world.as_deref().unwrap_or("factual");
    let history = match (scenario, world) {
        (ScenarioConfig::Confounded(c), "factual") => simulate_confounded(&c.into(), seed)?,
        (ScenarioConfig::Confounded(c), "hypothetical") => {
            let scn = ConfoundedScenario::from(c);
            simulate_hypothetical(&scn, &marginal_confounded(&scn), seed)?
        }
        (ScenarioConfig::Baseline(c), "factual") => simulate_baseline_scenario(&c.into(), seed)?,
        (_, other) => {
            return Err(CliError::Config(format!("world `{other}` is not available for this scenario")))
        }
    };
    let dir = output_dir(cfg)?;
    io::write_events(&dir.join("events.csv"), &history)?;
    io::write_baseline(&dir.join("baseline.csv"), &history)
}

#[derive(Debug, Serialize)]
struct WeightDiagnostics {
    method: WeightMethod,
    n: usize,
    bandwidth: Option<f64>,
    /// Subject ids whose ratio estimate met an empty window.
    theta_flagged: Vec<u64>,
    /// Subject ids whose weight was floored at zero.
    floored: Vec<u64>,
    truncated: usize,
    max_weight: f64,
    min_weight: f64,
}

struct ResolvedWeights {
    weights: WeightSet,
    diagnostics: WeightDiagnostics,
}

fn ct_settings(cfg: &RunConfig) -> CliResult<CtSettings> {
    Ok(CtSettings {
        factual: design(&cfg.treatment_design, &["1", "L"])?,
        hypothetical: design(&cfg.hypothetical_design, &["1"])?,
        bandwidth: cfg.bandwidth,
        policy: cfg.theta0.map_or(ThetaPolicy::FirstWindow, ThetaPolicy::Constant),
        truncation: cfg.truncation,
    })
}

/// Every time at which some subject's data changes, plus the horizon: a
/// sample-and-hold copy of the exact weights on these knots is exact at all
/// event times.
fn data_knots(history: &EventHistory) -> Vec<f64> {
    let mut knots: Vec<f64> = history.records().iter().map(|r| r.time).collect();
    knots.push(history.horizon());
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    knots
}

fn resolve_weights(cfg: &RunConfig, history: &EventHistory, method: WeightMethod) -> CliResult<ResolvedWeights> {
    let ids = history.subject_ids();
    let to_ids = |idx: &[usize]| idx.iter().map(|&i| ids[i]).collect::<Vec<u64>>();
    let mut diagnostics = WeightDiagnostics {
        method,
        n: history.n(),
        bandwidth: None,
        theta_flagged: vec![],
        floored: vec![],
        truncated: 0,
        max_weight: 1.0,
        min_weight: 1.0,
    };
    let mut weights = match method {
        WeightMethod::Ct => {
            let ct = ct_weights(history, &ct_settings(cfg)?, None)?;
            diagnostics.bandwidth = Some(ct.bandwidth);
            diagnostics.theta_flagged = to_ids(&ct.estimate.theta_flagged);
            diagnostics.floored = to_ids(&ct.estimate.floored);
            diagnostics.truncated = ct.estimate.truncated;
            ct.estimate.weights
        }
        WeightMethod::Iptw => {
            let k = cfg.intervals.unwrap_or(8);
            iptw(history, k, &design(&cfg.iptw_covariates, &["L"])?)?.weights
        }
        WeightMethod::Theoretical => {
            let scenario = cfg.resolve_scenario()?.ok_or_else(|| {
                CliError::Config("theoretical weights need `scenario` or `scenario_file`".into())
            })?;
            let knots = data_knots(history);
            match scenario {
                ScenarioConfig::Confounded(c) => {
                    let scn = ConfoundedScenario::from(c);
                    let marginal = marginal_confounded(&scn);
                    confounded_theoretical(history, &scn, &marginal)?.to_weight_set(&knots)
                }
                ScenarioConfig::Baseline(c) => {
                    let scn = BaselineScenario::from(c);
                    let marginal = marginal_baseline(&scn);
                    baseline_theoretical(history, &scn, &marginal)?.to_weight_set(&knots)
                }
            }
        }
        WeightMethod::File => io::read_weights(RunConfig::require(&cfg.weights_file, "weights_file")?, history)?,
        WeightMethod::None => WeightSet::unit(history.n()),
    };
    if method != WeightMethod::Ct {
        if let Some(bound) = cfg.truncation {
            diagnostics.truncated = weights.truncate(bound);
        }
    }
    diagnostics.max_weight = weights.paths.iter().map(|p| p.max_value()).fold(f64::NEG_INFINITY, f64::max);
    diagnostics.min_weight = weights.paths.iter().map(|p| p.min_value()).fold(f64::INFINITY, f64::min);
    Ok(ResolvedWeights { weights, diagnostics })
}

pub fn cmd_weights(cfg: &RunConfig) -> CliResult<()> {
    let history = load_history(cfg)?;
    let method = cfg.method.unwrap_or_default();
    let resolved = resolve_weights(cfg, &history, method)?;
    let dir = output_dir(cfg)?;
    io::write_weights(&dir.join("weights.csv"), &history, &resolved.weights)?;
    let grid = time_grid(history.horizon(), 200);
    let mean = resolved.weights.mean_curve(&grid);
    let rows: Vec<Vec<f64>> = grid.iter().zip(&mean).map(|(&t, &m)| vec![t, m]).collect();
    io::write_table(&dir.join("mean_weights.csv"), &["time".into(), "mean_weight".into()], &rows)?;
    io::write_json(&dir.join("diagnostics.json"), &resolved.diagnostics)
}

pub fn cmd_fit(cfg: &RunConfig) -> CliResult<()> {
    let history = load_history(cfg)?;
    let spec = design(&cfg.outcome_design, &["1", "A"])?;
    let method = cfg.method.unwrap_or(WeightMethod::None);
    let dir = output_dir(cfg)?;
    let resolved = resolve_weights(cfg, &history, method)?;
    let weights: &dyn WeightSource = if method == WeightMethod::None { &UnitWeights } else { &resolved.weights };
    let fit = fit_additive(&history, EventKind::Outcome, &spec, weights)?;
    io::write_cumcoef(&dir.join("coef.csv"), &fit)?;
    io::write_cumcoef_meta(&dir.join("coef_meta.json"), &fit, weight_label(method))?;
    if cfg.expanded.unwrap_or(false) {
        let table = expand_to_event_grid(&history, EventKind::Outcome, &spec, weights)?;
        io::write_expanded(&dir.join("expanded.csv"), &table)?;
    }
    Ok(())
}

fn weight_label(method: WeightMethod) -> &'static str {
    match method {
        WeightMethod::Ct => "ct",
        WeightMethod::Iptw => "iptw",
        WeightMethod::Theoretical => "theoretical",
        WeightMethod::File => "file",
        WeightMethod::None => "none",
    }
}

/// `"1+A"` is the integrator `B_1 + B_A`.
fn bind(fit: &CumCoef, binding: &str) -> CliResult<JumpIntegrator> {
    let mut w = vec![0.0; fit.width()];
    for name in binding.split('+').map(str::trim) {
        let j = fit.column_index(name).ok_or_else(|| {
            CliError::Config(format!("binding `{binding}`: no column `{name}` in {:?}", fit.columns))
        })?;
        w[j] += 1.0;
    }
    Ok(JumpIntegrator::from_combination(fit, &w))
}

pub fn cmd_transform(cfg: &RunConfig) -> CliResult<()> {
    let name = RunConfig::require(&cfg.transform, "transform")?;
    let spec = spec_by_name(name).ok_or_else(|| {
        CliError::Config(format!(
            "unknown transform `{name}` (expected survival, relative-survival, cumulative-incidence or rmst)"
        ))
    })?;
    let fit = io::read_cumcoef(RunConfig::require(&cfg.coef, "coef")?)?;
    let bindings = match &cfg.bindings {
        Some(b) => b.clone(),
        None if spec.hazard_columns() == 1 && fit.width() == 1 => vec![fit.columns[0].clone()],
        None => return Err(CliError::Config("missing required setting `bindings`".into())),
    };
    let hazards = bindings.iter().map(|b| bind(&fit, b)).collect::<CliResult<Vec<_>>>()?;
    let knots = cfg.knots.clone().unwrap_or_default();
    let path = solve_plugin(&spec, &hazards, cfg.horizon, &knots)?;
    let dir = output_dir(cfg)?;
    io::write_param_path(&dir.join(format!("{name}.csv")), &path)
}

#[derive(Debug, Serialize)]
struct LogisticSummary {
    coefficients: Vec<f64>,
    converged: bool,
    iterations: usize,
    log_likelihood: f64,
    gradient_norm: f64,
    dropped_columns: Vec<usize>,
    separation: bool,
    /// `(interval, probability)` for intervals with all or no rows treated.
    pinned: Vec<(usize, f64)>,
}

impl From<&PooledLogisticFit> for LogisticSummary {
    fn from(p: &PooledLogisticFit) -> Self {
        Self {
            coefficients: p.fit.coefficients.clone(),
            converged: p.fit.converged,
            iterations: p.fit.iterations,
            log_likelihood: p.fit.log_likelihood,
            gradient_norm: p.fit.gradient_norm,
            dropped_columns: p.fit.dropped_columns.clone(),
            separation: p.fit.separation,
            pinned: p.pinned.clone(),
        }
    }
}

pub fn cmd_iptw(cfg: &RunConfig) -> CliResult<()> {
    let history = load_history(cfg)?;
    let k = *RunConfig::require(&cfg.intervals, "intervals")?;
    let covariates = design(&cfg.iptw_covariates, &["L"])?;
    let mut out = iptw(&history, k, &covariates)?;
    if let Some(bound) = cfg.truncation {
        out.weights.truncate(bound);
    }
    let dir = output_dir(cfg)?;
    io::write_weights(&dir.join("weights.csv"), &history, &out.weights)?;
    let summary = serde_json::json!({
        "intervals": k,
        "covariates": covariates.names(),
        "numerator": LogisticSummary::from(&out.numerator),
        "denominator": LogisticSummary::from(&out.denominator),
    });
    io::write_json(&dir.join("iptw_fits.json"), &summary)
}

fn experiment_config<C: Default + serde::de::DeserializeOwned>(args: &ExperimentArgs) -> CliResult<C> {
    match &args.config {
        Some(p) => io::read_json(p),
        None => Ok(C::default()),
    }
}

fn experiment_dir(args: &ExperimentArgs) -> CliResult<PathBuf> {
    let dir = args.output.clone().ok_or_else(|| CliError::Config("missing required setting `output`".into()))?;
    std::fs::create_dir_all(&dir).map_err(|source| CliError::Io { path: dir.clone(), source })?;
    Ok(dir)
}

fn manifest<C: Serialize>(name: &str, cfg: &C, seed: u64, reps: usize) -> Manifest {
    Manifest::new(name, cfg, seed, experiments::replication_seeds(seed, reps))
}

pub fn cmd_fig1(args: &ExperimentArgs) -> CliResult<()> {
    let mut cfg: Fig1Config = experiment_config(args)?;
    cfg.seed = args.seed.unwrap_or(cfg.seed);
    if let Some(r) = args.reps {
        cfg.effect.reps = r;
        cfg.consistency.reps = r;
    }
    let dir = experiment_dir(args)?;
    let mut m = manifest("fig1", &cfg, cfg.seed, cfg.effect.reps.max(cfg.consistency.reps + 1));
    let curves = fig1::run_effect_comparison(&cfg.effect, cfg.seed)?;
    fig1::write_effect_comparison(&cfg.effect, &curves, &dir, &mut m)?;
    let rows = fig1::run_consistency(&cfg.consistency, cfg.seed)?;
    fig1::write_consistency(&rows, &dir, &mut m)?;
    m.write(&dir)
}

pub fn cmd_fig2(args: &ExperimentArgs) -> CliResult<()> {
    let mut cfg: Fig2Config = experiment_config(args)?;
    cfg.seed = args.seed.unwrap_or(cfg.seed);
    if let Some(r) = args.reps {
        cfg.mean_weights.reps = r;
        cfg.theoretical_mean.reps = r;
    }
    let dir = experiment_dir(args)?;
    let mut m = manifest("fig2", &cfg, cfg.seed, cfg.mean_weights.reps.max(cfg.theoretical_mean.reps));
    let curves = fig2::run_mean_weight_bias(&cfg.mean_weights, cfg.seed)?;
    fig2::write_mean_weight_bias(&cfg.mean_weights, &curves, &dir, &mut m)?;
    let exact = fig2::run_theoretical_mean(&cfg.theoretical_mean, cfg.seed)?;
    fig2::write_theoretical_mean(&exact, &dir, &mut m)?;
    m.write(&dir)
}

pub fn cmd_fig3(args: &ExperimentArgs) -> CliResult<()> {
    let mut cfg: Fig3Config = experiment_config(args)?;
    cfg.seed = args.seed.unwrap_or(cfg.seed);
    if let Some(r) = args.reps {
        cfg.bias_variance.reps = r;
        cfg.convergence.reps = r;
    }
    let dir = experiment_dir(args)?;
    let mut m = manifest("fig3", &cfg, cfg.seed, cfg.bias_variance.reps.max(cfg.convergence.reps));
    let rows = fig3::run_bias_variance(&cfg.bias_variance, cfg.seed)?;
    fig3::write_bias_variance(&rows, &dir, &mut m)?;
    let medians = fig3::run_weight_convergence(&cfg.convergence, cfg.seed)?;
    fig3::write_weight_convergence(&cfg.convergence, &medians, &dir, &mut m)?;
    m.write(&dir)
}

pub fn cmd_censoring(args: &ExperimentArgs) -> CliResult<()> {
    let mut cfg: CensoringExperimentConfig = experiment_config(args)?;
    cfg.seed = args.seed.unwrap_or(cfg.seed);
    if let Some(r) = args.reps {
        cfg.validation.reps = r;
    }
    let dir = experiment_dir(args)?;
    let mut m = manifest("censoring", &cfg, cfg.seed, cfg.validation.reps + 1);
    let res = censoring::run_censoring_validation(&cfg.validation, cfg.seed)?;
    censoring::write_censoring_validation(&res, &dir, &mut m)?;
    m.write(&dir)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_parse_into_config() {
        let cli = Cli::try_parse_from([
            "ctmsm",
            "weights",
            "--events",
            "e.csv",
            "--horizon",
            "10",
            "--treatment-design",
            "1,L",
            "--method",
            "iptw",
            "--output",
            "out",
        ])
        .unwrap();
        let Command::Weights(a) = cli.command else { panic!("wrong subcommand") };
        let cfg = a.resolve().unwrap();
        assert_eq!(cfg.treatment_design, Some(vec!["1".to_string(), "L".to_string()]));
        assert_eq!(cfg.method, Some(WeightMethod::Iptw));
        assert_eq!(cfg.horizon, Some(10.0));
    }

    #[test]
    fn bindings_combine_columns() {
        let fit = CumCoef {
            columns: vec!["1".into(), "A".into()],
            times: vec![1.0],
            increments: vec![vec![0.1, 0.2]],
            cumulative: vec![vec![0.1, 0.2]],
            skipped_times: vec![],
        };
        let b = bind(&fit, "1+A").unwrap();
        assert!((b.increments[0] - 0.3).abs() < 1e-15);
        assert!(bind(&fit, "1+Z").is_err());
    }
}
