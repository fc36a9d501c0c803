//! Bandwidth refinement strategies in the baseline scenario: bias and
//! variance of the estimated weight at a fixed time, and convergence of the
//! estimated weight paths to the exact ones.

use std::path::Path;

use ctmsm_core::aalen::{fit_additive, nelson_aalen};
use ctmsm_core::sim::{simulate_baseline_scenario, BaselineScenario};
use ctmsm_core::weights::{
    estimate_weights_for_bandwidths, BandwidthStrategy, CompensatorModel, ThetaPolicy, UnitWeights, WeightEstimate,
};
use ctmsm_core::{DesignSpec, EventHistory, EventKind, Result, WeightSource};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{replication_seeds, Manifest};
use crate::config::BaselineConfig;
use crate::error::CliResult;
use crate::io::write_table;
use crate::pipeline::{baseline_theoretical, marginal_baseline, median, time_grid, variance};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BiasVarianceConfig {
    pub scenario: BaselineConfig,
    pub ns: Vec<usize>,
    /// Time at which the weights are assessed; every strategy has
    /// `kappa = 1/t0` at the smallest sample size.
    pub t0: f64,
    /// Rates `kappa_n ~ n^exponent` of the strategies.
    pub exponents: Vec<f64>,
    pub reps: usize,
}

impl Default for BiasVarianceConfig {
    fn default() -> Self {
        Self {
            scenario: BaselineConfig::default(),
            ns: vec![250, 500, 1000, 2000, 4000],
            t0: 1.0,
            exponents: vec![1.0 / 2.0, 1.0 / 3.0, 1.0 / 5.0, 1.0 / 10.0],
            reps: 200,
        }
    }
}

impl BiasVarianceConfig {
    pub fn strategies(&self) -> Vec<BandwidthStrategy> {
        let anchor_n = self.ns.iter().copied().min().unwrap_or(1);
        self.exponents
            .iter()
            .map(|&exponent| BandwidthStrategy { anchor_n, anchor_kappa: 1.0 / self.t0, exponent })
            .collect()
    }
}

/// Treatment weights in the baseline scenario: factual model `(1, x)`,
/// hypothetical model intercept only.
pub fn baseline_scenario_weights(history: &EventHistory, kappas: &[f64]) -> Result<Vec<WeightEstimate>> {
    let factual = DesignSpec::parse(&["1", BaselineScenario::COLUMN])?;
    let hypothetical = DesignSpec::intercept_only();
    let f = fit_additive(history, EventKind::Treatment, &factual, &UnitWeights)?;
    let h = nelson_aalen(history, EventKind::Treatment, &UnitWeights)?;
    estimate_weights_for_bandwidths(
        history,
        CompensatorModel::new(&f, &factual),
        CompensatorModel::new(&h, &hypothetical),
        kappas,
        ThetaPolicy::FirstWindow,
        &vec![1.0; history.n()],
        None,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BiasVarianceRow {
    /// Index into the configured exponents.
    pub strategy: usize,
    pub exponent: f64,
    pub n: usize,
    pub kappa: f64,
    /// Mean of the individual estimates `Rhat^i_t0` over subjects and
    /// replications, minus 1 (the mean of the true likelihood ratio).
    pub bias: f64,
    /// Variance of the estimation errors `Rhat^i_t0 - R^i_t0` against the
    /// exact weights, pooled over subjects and replications.
    pub variance: f64,
    /// Variance of the individual estimates `Rhat^i_t0` themselves, which
    /// also contains the spread of the true weights.
    pub weight_variance: f64,
    /// Variance over replications of the per-sample mean weight.
    pub variance_of_mean: f64,
}

/// Count, mean and sum of squared deviations of one sample.
#[derive(Debug, Clone, Copy)]
struct Moments {
    count: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn of(values: impl Iterator<Item = f64>) -> Self {
        let v: Vec<f64> = values.collect();
        let count = v.len() as f64;
        let mean = v.iter().sum::<f64>() / count;
        let m2 = v.iter().map(|x| (x - mean) * (x - mean)).sum();
        Self { count, mean, m2 }
    }

    fn merge(self, other: Self) -> Self {
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        Self {
            count,
            mean: self.mean + delta * other.count / count,
            m2: self.m2 + other.m2 + delta * delta * self.count * other.count / count,
        }
    }
}

pub fn run_bias_variance(cfg: &BiasVarianceConfig, seed: u64) -> Result<Vec<BiasVarianceRow>> {
    let strategies = cfg.strategies();
    let seeds = replication_seeds(seed, cfg.reps);
    let mut out = Vec::new();
    for &n in &cfg.ns {
        let scn = BaselineScenario::from(BaselineConfig { n, ..cfg.scenario });
        let kappas: Vec<f64> = strategies.iter().map(|s| s.kappa(n)).collect();
        let marginal = marginal_baseline(&scn);
        // per replication and strategy: moments over subjects of Rhat^i_t0
        // and of Rhat^i_t0 - R^i_t0
        let moments = seeds
            .par_iter()
            .map(|&s| {
                // the weights at t0 only use information up to t0
                let history = simulate_baseline_scenario(&scn, s)?;
                let history = if cfg.t0 < history.horizon() { history.restrict(cfg.t0)? } else { history };
                let exact = baseline_theoretical(&history, &scn, &marginal)?;
                let truth: Vec<f64> = (0..history.n()).map(|i| exact.weight_at(i, cfg.t0)).collect();
                Ok(baseline_scenario_weights(&history, &kappas)?
                    .iter()
                    .map(|e| {
                        let est: Vec<f64> = (0..history.n()).map(|i| e.weights.weight_at(i, cfg.t0)).collect();
                        let err = est.iter().zip(&truth).map(|(a, b)| a - b);
                        (Moments::of(est.iter().copied()), Moments::of(err))
                    })
                    .collect::<Vec<(Moments, Moments)>>())
            })
            .collect::<Result<Vec<_>>>()?;
        for (k, strategy) in strategies.iter().enumerate() {
            let per_rep: Vec<Moments> = moments.iter().map(|r| r[k].0).collect();
            let pooled = per_rep.iter().copied().reduce(Moments::merge).expect("at least one replication");
            let errors = moments.iter().map(|r| r[k].1).reduce(Moments::merge).expect("at least one replication");
            let means: Vec<f64> = per_rep.iter().map(|m| m.mean).collect();
            out.push(BiasVarianceRow {
                strategy: k,
                exponent: strategy.exponent,
                n,
                kappa: kappas[k],
                bias: pooled.mean - 1.0,
                variance: errors.m2 / (errors.count - 1.0),
                weight_variance: pooled.m2 / (pooled.count - 1.0),
                variance_of_mean: variance(&means),
            });
        }
    }
    Ok(out)
}

pub fn write_bias_variance(
    rows: &[BiasVarianceRow],
    dir: &Path,
    manifest: &mut Manifest,
) -> CliResult<()> {
    let cols = ["strategy", "exponent", "n", "kappa", "bias", "variance", "weight_variance", "variance_of_mean"]
        .map(String::from);
    let table: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| {
            vec![
                r.strategy as f64 + 1.0,
                r.exponent,
                r.n as f64,
                r.kappa,
                r.bias,
                r.variance,
                r.weight_variance,
                r.variance_of_mean,
            ]
        })
        .collect();
    write_table(&dir.join("bias_variance.csv"), &cols, &table)?;
    manifest.files.push("bias_variance.csv".into());
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergenceConfig {
    pub scenario: BaselineConfig,
    pub ns: Vec<usize>,
    pub t0: f64,
    pub exponent: f64,
    pub reps: usize,
    pub grid_points: usize,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        Self {
            scenario: BaselineConfig::default(),
            ns: vec![250, 500, 1000, 2000],
            t0: 1.0,
            exponent: 1.0 / 3.0,
            reps: 20,
            grid_points: 200,
        }
    }
}

/// Median over subjects of `sup_t |Rhat_t - R_t|`, per replication and sample
/// size; `out[r][k]` belongs to `ns[k]`. Replication `r` reuses the same
/// subject streams at every sample size, so smaller samples are prefixes of
/// larger ones.
pub fn run_weight_convergence(cfg: &ConvergenceConfig, seed: u64) -> Result<Vec<Vec<f64>>> {
    let anchor_n = cfg.ns.iter().copied().min().unwrap_or(1);
    let strategy = BandwidthStrategy { anchor_n, anchor_kappa: 1.0 / cfg.t0, exponent: cfg.exponent };
    replication_seeds(seed, cfg.reps)
        .par_iter()
        .map(|&s| {
            cfg.ns
                .iter()
                .map(|&n| {
                    let scn = BaselineScenario::from(BaselineConfig { n, ..cfg.scenario });
                    let grid = time_grid(scn.horizon, cfg.grid_points);
                    let history = simulate_baseline_scenario(&scn, s)?;
                    let est = baseline_scenario_weights(&history, &[strategy.kappa(n)])?.remove(0);
                    let marginal = marginal_baseline(&scn);
                    let exact = baseline_theoretical(&history, &scn, &marginal)?;
                    let sups: Vec<f64> = (0..history.n())
                        .map(|i| {
                            grid.iter()
                                .map(|&t| (est.weights.weight_at(i, t) - exact.weight_at(i, t)).abs())
                                .fold(0.0, f64::max)
                        })
                        .collect();
                    Ok(median(&sups))
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect()
}

pub fn write_weight_convergence(
    cfg: &ConvergenceConfig,
    medians: &[Vec<f64>],
    dir: &Path,
    manifest: &mut Manifest,
) -> CliResult<()> {
    let cols = ["rep", "n", "median_sup_error"].map(String::from);
    let rows: Vec<Vec<f64>> = medians
        .iter()
        .enumerate()
        .flat_map(|(r, per_n)| cfg.ns.iter().zip(per_n).map(move |(&n, &m)| vec![r as f64, n as f64, m]))
        .collect();
    write_table(&dir.join("weight_convergence.csv"), &cols, &rows)?;
    manifest.files.push("weight_convergence.csv".into());
    Ok(())
}
