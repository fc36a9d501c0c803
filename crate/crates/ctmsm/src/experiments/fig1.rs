//! Cumulative treatment effect under competing weighting schemes, and its
//! convergence to the hypothetical-world oracle.

use std::path::Path;

use ctmsm_core::sim::{simulate_confounded, simulate_hypothetical, ConfoundedScenario};
use ctmsm_core::transform::{relative_survival_spec, solve_plugin, JumpIntegrator};
use ctmsm_core::weights::UnitWeights;
use ctmsm_core::{CumCoef, DesignSpec, EventHistory, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{replication_seeds, Manifest};
use crate::config::ConfoundedConfig;
use crate::error::CliResult;
use crate::io::write_table;
use crate::pipeline::{
    confounded_theoretical, ct_weights, curve, effect_fit, iptw, marginal_confounded, median, sup_distance,
    time_grid, CtSettings,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EffectConfig {
    pub scenario: ConfoundedConfig,
    pub ns: Vec<usize>,
    pub intervals: Vec<usize>,
    pub reps: usize,
    pub grid_points: usize,
    /// Fixed `kappa`; the data-driven default when absent.
    pub bandwidth: Option<f64>,
}

impl Default for EffectConfig {
    fn default() -> Self {
        Self {
            scenario: ConfoundedConfig::default(),
            ns: vec![500, 1000, 2000],
            intervals: vec![4, 8, 16],
            reps: 3,
            grid_points: 200,
            bandwidth: None,
        }
    }
}

/// Effect curves of one replication on the time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectCurves {
    pub n: usize,
    pub rep: usize,
    pub unweighted: Vec<f64>,
    pub iptw: Vec<Vec<f64>>,
    pub ct: Vec<f64>,
    pub theoretical: Vec<f64>,
    /// Relative survival of treated-from-start versus never treated.
    pub rs_ct: Vec<f64>,
    pub rs_theoretical: Vec<f64>,
}

impl EffectCurves {
    pub fn distance_to_theoretical(&self) -> (f64, Vec<f64>, f64) {
        (
            sup_distance(&self.unweighted, &self.theoretical),
            self.iptw.iter().map(|c| sup_distance(c, &self.theoretical)).collect(),
            sup_distance(&self.ct, &self.theoretical),
        )
    }
}

fn effect_column(fit: &CumCoef) -> usize {
    fit.column_index("A").expect("effect fit has an A column")
}

fn relative_survival(fit: &CumCoef, grid: &[f64]) -> Result<Vec<f64>> {
    let a = effect_column(fit);
    let intercept = fit.column_index("1").expect("effect fit has an intercept");
    let mut treated = vec![0.0; fit.width()];
    treated[a] = 1.0;
    treated[intercept] = 1.0;
    let path = solve_plugin(
        &relative_survival_spec(),
        &[JumpIntegrator::from_combination(fit, &treated), JumpIntegrator::from_column(fit, intercept)],
        None,
        &[],
    )?;
    Ok(grid.iter().map(|&t| path.eval(t)[0]).collect())
}

pub fn effect_curves(
    history: &EventHistory,
    scn: &ConfoundedScenario,
    intervals: &[usize],
    bandwidth: Option<f64>,
    grid: &[f64],
) -> Result<(Vec<f64>, Vec<Vec<f64>>, CumCoef, CumCoef)> {
    let unweighted = effect_fit(history, &UnitWeights)?;
    let covariates = DesignSpec::parse(&["L"])?;
    let iptw_curves = intervals
        .iter()
        .map(|&k| {
            let w = iptw(history, k, &covariates)?;
            let fit = effect_fit(history, &w.weights)?;
            Ok(curve(&fit, effect_column(&fit), grid))
        })
        .collect::<Result<Vec<_>>>()?;
    let settings = CtSettings { bandwidth, ..CtSettings::new(DesignSpec::parse(&["1", "L"])?) };
    let ct = ct_weights(history, &settings, None)?;
    let ct_fit = effect_fit(history, &ct.estimate.weights)?;
    let marginal = marginal_confounded(scn);
    let theoretical = confounded_theoretical(history, scn, &marginal)?;
    let th_fit = effect_fit(history, &theoretical)?;
    Ok((curve(&unweighted, effect_column(&unweighted), grid), iptw_curves, ct_fit, th_fit))
}

pub fn run_replication(cfg: &EffectConfig, n: usize, rep: usize, seed: u64) -> Result<EffectCurves> {
    let scn = ConfoundedScenario::from(ConfoundedConfig { n, ..cfg.scenario });
    let history = simulate_confounded(&scn, seed)?;
    let grid = time_grid(scn.horizon, cfg.grid_points);
    let (unweighted, iptw, ct_fit, th_fit) = effect_curves(&history, &scn, &cfg.intervals, cfg.bandwidth, &grid)?;
    Ok(EffectCurves {
        n,
        rep,
        unweighted,
        iptw,
        ct: curve(&ct_fit, effect_column(&ct_fit), &grid),
        theoretical: curve(&th_fit, effect_column(&th_fit), &grid),
        rs_ct: relative_survival(&ct_fit, &grid)?,
        rs_theoretical: relative_survival(&th_fit, &grid)?,
    })
}

pub fn run_effect_comparison(cfg: &EffectConfig, seed: u64) -> Result<Vec<EffectCurves>> {
    let seeds = replication_seeds(seed, cfg.reps);
    let jobs: Vec<(usize, usize)> =
        cfg.ns.iter().flat_map(|&n| (0..cfg.reps).map(move |r| (n, r))).collect();
    jobs.par_iter().map(|&(n, r)| run_replication(cfg, n, r, seeds[r])).collect()
}

pub fn write_effect_comparison(cfg: &EffectConfig, results: &[EffectCurves], dir: &Path, manifest: &mut Manifest) -> CliResult<()> {
    let scn = ConfoundedScenario::from(cfg.scenario);
    let grid = time_grid(scn.horizon, cfg.grid_points);
    let mut columns = vec!["time".to_string(), "unweighted".into()];
    columns.extend(cfg.intervals.iter().map(|k| format!("iptw_{k}")));
    columns.extend(["ct", "theoretical", "rs_ct", "rs_theoretical"].map(String::from));
    let mut summary = Vec::new();
    for res in results {
        let rows: Vec<Vec<f64>> = (0..grid.len())
            .map(|g| {
                let mut row = vec![grid[g], res.unweighted[g]];
                row.extend(res.iptw.iter().map(|c| c[g]));
                row.extend([res.ct[g], res.theoretical[g], res.rs_ct[g], res.rs_theoretical[g]]);
                row
            })
            .collect();
        let name = format!("curves_n{}_rep{}.csv", res.n, res.rep);
        write_table(&dir.join(&name), &columns, &rows)?;
        manifest.files.push(name);
        let (du, di, dc) = res.distance_to_theoretical();
        let mut row = vec![res.n as f64, res.rep as f64, du];
        row.extend(di);
        row.push(dc);
        summary.push(row);
    }
    let mut sum_cols = vec!["n".to_string(), "rep".into(), "sup_unweighted".into()];
    sum_cols.extend(cfg.intervals.iter().map(|k| format!("sup_iptw_{k}")));
    sum_cols.push("sup_ct".into());
    write_table(&dir.join("sup_distances.csv"), &sum_cols, &summary)?;
    manifest.files.push("sup_distances.csv".into());
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConsistencyConfig {
    pub scenario: ConfoundedConfig,
    pub ns: Vec<usize>,
    pub reps: usize,
    pub oracle_n: usize,
    pub grid_points: usize,
    pub bandwidth: Option<f64>,
}

impl Default for ConsistencyConfig {
    fn default() -> Self {
        Self {
            scenario: ConfoundedConfig::default(),
            ns: vec![500, 1000, 2000],
            reps: 20,
            oracle_n: 20_000,
            grid_points: 200,
            bandwidth: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyRow {
    pub n: usize,
    pub rep: usize,
    pub sup_ct: f64,
    pub sup_unweighted: f64,
}

/// Effect curve of the unweighted outcome fit in the hypothetical world.
pub fn oracle_curve(scn: &ConfoundedScenario, n: usize, seed: u64, grid: &[f64]) -> Result<Vec<f64>> {
    let scn = ConfoundedScenario { n, ..*scn };
    let world = simulate_hypothetical(&scn, &marginal_confounded(&scn), seed)?;
    let fit = effect_fit(&world, &UnitWeights)?;
    Ok(curve(&fit, effect_column(&fit), grid))
}

/// Sup-grid distances of the weighted and unweighted effect curves to the
/// oracle, per sample size and replication. The oracle uses its own seed
/// stream (replication index `reps`).
pub fn run_consistency(cfg: &ConsistencyConfig, seed: u64) -> Result<Vec<ConsistencyRow>> {
    let scn = ConfoundedScenario::from(cfg.scenario);
    let grid = time_grid(scn.horizon, cfg.grid_points);
    let seeds = replication_seeds(seed, cfg.reps + 1);
    let oracle = oracle_curve(&scn, cfg.oracle_n, seeds[cfg.reps], &grid)?;
    let jobs: Vec<(usize, usize)> =
        cfg.ns.iter().flat_map(|&n| (0..cfg.reps).map(move |r| (n, r))).collect();
    jobs.par_iter()
        .map(|&(n, rep)| {
            let scn = ConfoundedScenario { n, ..scn };
            let history = simulate_confounded(&scn, seeds[rep])?;
            let unweighted = effect_fit(&history, &UnitWeights)?;
            let settings = CtSettings { bandwidth: cfg.bandwidth, ..CtSettings::new(DesignSpec::parse(&["1", "L"])?) };
            let ct = ct_weights(&history, &settings, None)?;
            let ct_fit = effect_fit(&history, &ct.estimate.weights)?;
            Ok(ConsistencyRow {
                n,
                rep,
                sup_ct: sup_distance(&curve(&ct_fit, effect_column(&ct_fit), &grid), &oracle),
                sup_unweighted: sup_distance(&curve(&unweighted, effect_column(&unweighted), &grid), &oracle),
            })
        })
        .collect()
}

/// Median of `sup_ct` per sample size, in the order of `ns`.
pub fn median_by_n(rows: &[ConsistencyRow], ns: &[usize]) -> Vec<f64> {
    ns.iter()
        .map(|&n| median(&rows.iter().filter(|r| r.n == n).map(|r| r.sup_ct).collect::<Vec<_>>()))
        .collect()
}

pub fn write_consistency(rows: &[ConsistencyRow], dir: &Path, manifest: &mut Manifest) -> CliResult<()> {
    let table: Vec<Vec<f64>> =
        rows.iter().map(|r| vec![r.n as f64, r.rep as f64, r.sup_ct, r.sup_unweighted]).collect();
    let cols = ["n", "rep", "sup_ct", "sup_unweighted"].map(String::from);
    write_table(&dir.join("consistency.csv"), &cols, &table)?;
    manifest.files.push("consistency.csv".into());
    Ok(())
}
