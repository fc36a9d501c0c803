//! Censoring weights under covariate-dependent censoring, checked against a
//! world without censoring.

use std::path::Path;

use ctmsm_core::aalen::nelson_aalen;
use ctmsm_core::sim::{simulate_confounded, ConfoundedScenario};
use ctmsm_core::weights::UnitWeights;
use ctmsm_core::{DesignSpec, EventKind, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fig2::mean_and_se;
use super::{replication_seeds, Manifest};
use crate::config::{CensoringConfig, ConfoundedConfig};
use crate::error::CliResult;
use crate::io::write_table;
use crate::pipeline::{ct_censoring_weights, curve, mean_weight_curve, sup_distance, time_grid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CensoringValidationConfig {
    /// Must carry a censoring clock; `per_l > 0` makes censoring informative.
    pub scenario: ConfoundedConfig,
    pub n: usize,
    pub reps: usize,
    pub oracle_n: usize,
    pub grid_points: usize,
    /// Censoring designs of the factual and hypothetical models.
    pub factual_design: Vec<String>,
    pub hypothetical_design: Vec<String>,
}

impl Default for CensoringValidationConfig {
    fn default() -> Self {
        Self {
            scenario: ConfoundedConfig {
                censoring: Some(CensoringConfig { base: 0.05, per_l: 0.3 }),
                ..Default::default()
            },
            n: 2000,
            reps: 50,
            oracle_n: 20_000,
            grid_points: 200,
            factual_design: vec!["1".into(), "L".into()],
            hypothetical_design: vec!["1".into()],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CensoringValidation {
    pub grid: Vec<f64>,
    /// Nelson–Aalen of the outcome without censoring (large sample).
    pub oracle: Vec<f64>,
    pub sup_weighted: Vec<f64>,
    pub sup_unweighted: Vec<f64>,
    pub mean_weight: Vec<f64>,
    pub mean_weight_se: Vec<f64>,
    /// Curves of the first replication.
    pub first_weighted: Vec<f64>,
    pub first_unweighted: Vec<f64>,
}

pub fn run_censoring_validation(cfg: &CensoringValidationConfig, seed: u64) -> Result<CensoringValidation> {
    let scn = ConfoundedScenario::from(ConfoundedConfig { n: cfg.n, ..cfg.scenario });
    if scn.censoring.is_none() {
        return Err(ctmsm_core::Error::InvalidParameter("censoring validation needs a censoring clock"));
    }
    let grid = time_grid(scn.horizon, cfg.grid_points);
    let seeds = replication_seeds(seed, cfg.reps + 1);
    let oracle_world = ConfoundedScenario { n: cfg.oracle_n, censoring: None, ..scn };
    let oracle_history = simulate_confounded(&oracle_world, seeds[cfg.reps])?;
    let oracle = curve(&nelson_aalen(&oracle_history, EventKind::Outcome, &UnitWeights)?, 0, &grid);
    let factual = DesignSpec::parse(&cfg.factual_design)?;
    let hypothetical = DesignSpec::parse(&cfg.hypothetical_design)?;

    let reps = seeds[..cfg.reps]
        .par_iter()
        .map(|&s| {
            let history = simulate_confounded(&scn, s)?;
            let w = ct_censoring_weights(&history, &factual, &hypothetical, None)?;
            let weighted = curve(&nelson_aalen(&history, EventKind::Outcome, &w.weights)?, 0, &grid);
            let unweighted = curve(&nelson_aalen(&history, EventKind::Outcome, &UnitWeights)?, 0, &grid);
            Ok((weighted, unweighted, mean_weight_curve(&w.weights, history.n(), &grid)))
        })
        .collect::<Result<Vec<_>>>()?;
    let (mean_weight, mean_weight_se) = mean_and_se(&reps.iter().map(|r| &r.2).collect::<Vec<_>>());
    Ok(CensoringValidation {
        sup_weighted: reps.iter().map(|r| sup_distance(&r.0, &oracle)).collect(),
        sup_unweighted: reps.iter().map(|r| sup_distance(&r.1, &oracle)).collect(),
        mean_weight,
        mean_weight_se,
        first_weighted: reps[0].0.clone(),
        first_unweighted: reps[0].1.clone(),
        oracle,
        grid,
    })
}

pub fn write_censoring_validation(
    res: &CensoringValidation,
    dir: &Path,
    manifest: &mut Manifest,
) -> CliResult<()> {
    let cols = ["time", "oracle", "weighted_rep0", "unweighted_rep0", "mean_weight", "mean_weight_se"]
        .map(String::from);
    let rows: Vec<Vec<f64>> = (0..res.grid.len())
        .map(|g| {
            vec![
                res.grid[g],
                res.oracle[g],
                res.first_weighted[g],
                res.first_unweighted[g],
                res.mean_weight[g],
                res.mean_weight_se[g],
            ]
        })
        .collect();
    write_table(&dir.join("curves.csv"), &cols, &rows)?;
    let sup: Vec<Vec<f64>> = res
        .sup_weighted
        .iter()
        .zip(&res.sup_unweighted)
        .enumerate()
        .map(|(r, (w, u))| vec![r as f64, *w, *u])
        .collect();
    write_table(&dir.join("sup_distances.csv"), &["rep", "sup_weighted", "sup_unweighted"].map(String::from), &sup)?;
    manifest.files.extend(["curves.csv".into(), "sup_distances.csv".into()]);
    Ok(())
}
