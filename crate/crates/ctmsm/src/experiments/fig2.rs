//! Average weight processes: exact, continuous-time estimated and IPTW.

use std::path::Path;

use ctmsm_core::sim::{simulate_baseline_scenario, simulate_confounded, BaselineScenario, ConfoundedScenario};
use ctmsm_core::{DesignSpec, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{replication_seeds, Manifest};
use crate::config::{BaselineConfig, ConfoundedConfig};
use crate::error::CliResult;
use crate::io::write_table;
use crate::pipeline::{
    baseline_theoretical, confounded_theoretical, ct_weights, iptw, marginal_baseline, marginal_confounded,
    mean_weight_curve, time_grid, CtSettings,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeanWeightConfig {
    pub scenario: ConfoundedConfig,
    pub n: usize,
    pub reps: usize,
    pub intervals: Vec<usize>,
    pub grid_points: usize,
    pub bandwidth: Option<f64>,
}

impl Default for MeanWeightConfig {
    fn default() -> Self {
        Self {
            scenario: ConfoundedConfig::default(),
            n: 3000,
            reps: 50,
            intervals: vec![4, 8, 16],
            grid_points: 200,
            bandwidth: None,
        }
    }
}

/// Mean weight curves averaged over replications, with the standard error of
/// the exact-weight mean across replications.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanWeightCurves {
    pub grid: Vec<f64>,
    pub theoretical: Vec<f64>,
    pub theoretical_se: Vec<f64>,
    pub ct: Vec<f64>,
    pub iptw: Vec<Vec<f64>>,
}

struct RepCurves {
    theoretical: Vec<f64>,
    ct: Vec<f64>,
    iptw: Vec<Vec<f64>>,
}

fn average(curves: &[&Vec<f64>]) -> Vec<f64> {
    let m = curves.len() as f64;
    (0..curves[0].len()).map(|g| curves.iter().map(|c| c[g]).sum::<f64>() / m).collect()
}

/// Mean and standard error of the mean across replications at each grid time.
pub fn mean_and_se(curves: &[&Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let m = curves.len() as f64;
    let mean = average(curves);
    let se = (0..mean.len())
        .map(|g| {
            let v = curves.iter().map(|c| (c[g] - mean[g]).powi(2)).sum::<f64>() / (m - 1.0);
            (v / m).sqrt()
        })
        .collect();
    (mean, se)
}

pub fn run_mean_weight_bias(cfg: &MeanWeightConfig, seed: u64) -> Result<MeanWeightCurves> {
    let scn = ConfoundedScenario::from(ConfoundedConfig { n: cfg.n, ..cfg.scenario });
    let grid = time_grid(scn.horizon, cfg.grid_points);
    let marginal = marginal_confounded(&scn);
    let covariates = DesignSpec::parse(&["L"])?;
    let reps = replication_seeds(seed, cfg.reps)
        .par_iter()
        .map(|&s| {
            let history = simulate_confounded(&scn, s)?;
            let exact = confounded_theoretical(&history, &scn, &marginal)?;
            let settings = CtSettings { bandwidth: cfg.bandwidth, ..CtSettings::new(DesignSpec::parse(&["1", "L"])?) };
            let ct = ct_weights(&history, &settings, None)?;
            let iptw = cfg
                .intervals
                .iter()
                .map(|&k| Ok(iptw(&history, k, &covariates)?.weights.mean_curve(&grid)))
                .collect::<Result<Vec<_>>>()?;
            Ok(RepCurves {
                theoretical: mean_weight_curve(&exact, history.n(), &grid),
                ct: ct.estimate.weights.mean_curve(&grid),
                iptw,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (theoretical, theoretical_se) = mean_and_se(&reps.iter().map(|r| &r.theoretical).collect::<Vec<_>>());
    Ok(MeanWeightCurves {
        theoretical,
        theoretical_se,
        ct: average(&reps.iter().map(|r| &r.ct).collect::<Vec<_>>()),
        iptw: (0..cfg.intervals.len())
            .map(|k| average(&reps.iter().map(|r| &r.iptw[k]).collect::<Vec<_>>()))
            .collect(),
        grid,
    })
}

pub fn write_mean_weight_bias(
    cfg: &MeanWeightConfig,
    res: &MeanWeightCurves,
    dir: &Path,
    manifest: &mut Manifest,
) -> CliResult<()> {
    let mut cols = vec!["time".to_string(), "theoretical".into(), "theoretical_se".into(), "ct".into()];
    cols.extend(cfg.intervals.iter().map(|k| format!("iptw_{k}")));
    let rows: Vec<Vec<f64>> = (0..res.grid.len())
        .map(|g| {
            let mut row = vec![res.grid[g], res.theoretical[g], res.theoretical_se[g], res.ct[g]];
            row.extend(res.iptw.iter().map(|c| c[g]));
            row
        })
        .collect();
    write_table(&dir.join("mean_weights.csv"), &cols, &rows)?;
    manifest.files.push("mean_weights.csv".into());
    Ok(())
}

/// Mean exact weight in the baseline scenario at `points` times in `(0, T]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TheoreticalMeanConfig {
    pub scenario: BaselineConfig,
    pub n: usize,
    pub reps: usize,
    pub points: usize,
}

impl Default for TheoreticalMeanConfig {
    fn default() -> Self {
        Self { scenario: BaselineConfig::default(), n: 3000, reps: 50, points: 20 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TheoreticalMean {
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    pub se: Vec<f64>,
}

pub fn run_theoretical_mean(cfg: &TheoreticalMeanConfig, seed: u64) -> Result<TheoreticalMean> {
    let scn = BaselineScenario::from(BaselineConfig { n: cfg.n, ..cfg.scenario });
    let times: Vec<f64> = (1..=cfg.points).map(|k| scn.horizon * k as f64 / cfg.points as f64).collect();
    let marginal = marginal_baseline(&scn);
    let curves = replication_seeds(seed, cfg.reps)
        .par_iter()
        .map(|&s| {
            let history = simulate_baseline_scenario(&scn, s)?;
            let exact = baseline_theoretical(&history, &scn, &marginal)?;
            Ok(mean_weight_curve(&exact, history.n(), &times))
        })
        .collect::<Result<Vec<_>>>()?;
    let (mean, se) = mean_and_se(&curves.iter().collect::<Vec<_>>());
    Ok(TheoreticalMean { times, mean, se })
}

pub fn write_theoretical_mean(res: &TheoreticalMean, dir: &Path, manifest: &mut Manifest) -> CliResult<()> {
    let cols = ["time", "mean", "se"].map(String::from);
    let rows: Vec<Vec<f64>> = (0..res.times.len()).map(|k| vec![res.times[k], res.mean[k], res.se[k]]).collect();
    write_table(&dir.join("theoretical_mean.csv"), &cols, &rows)?;
    manifest.files.push("theoretical_mean.csv".into());
    Ok(())
}
