//! Weights that move censoring from its factual intensity to a hypothetical
//! one, `R^c_t = prod_{s<=t} (1 + dK^c_s)` with
//! `dK^c = Y^c (U^T dG - Utilde^T dGtilde)`.

use alloc::vec::Vec;

use super::estimate::{cumulative_path, product_integral, subject_jumps, CompensatorModel, KPath};
use super::{Provenance, WeightSet};
use crate::error::{Error, Result};
use crate::history::{EventHistory, EventKind};

#[derive(Debug, Clone, PartialEq)]
pub struct CensoringEstimate {
    pub weights: WeightSet,
    pub k: KPath,
    pub floored: Vec<usize>,
    pub truncated: usize,
}

pub fn censoring_weights(
    history: &EventHistory,
    factual: CompensatorModel<'_>,
    hypothetical: CompensatorModel<'_>,
    truncation: Option<f64>,
) -> Result<CensoringEstimate> {
    let fb = factual.bind(history)?;
    let hb = hypothetical.bind(history)?;
    let horizon = history.horizon();
    let mut scratch = Vec::new();
    let mut paths = Vec::with_capacity(history.n());
    let mut k_paths = Vec::with_capacity(history.n());
    let mut floored = Vec::new();

    for idx in 0..history.n() {
        let end = history.subject_times(idx).risk_end(EventKind::Censoring, horizon);
        let jumps = subject_jumps(history, idx, end, &fb, &hb, &mut scratch);
        let dk: Vec<(f64, f64)> = jumps
            .times
            .iter()
            .zip(jumps.factual.iter().zip(&jumps.hypothetical))
            .map(|(&t, (a, b))| (t, a - b))
            .collect();
        let k_path = cumulative_path(&dk);
        let (path, hit_floor) = product_integral(1.0, &dk);
        if hit_floor {
            floored.push(idx);
        }
        if path.values().iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteWeight { subject: history.subject_ids()[idx], time: end });
        }
        paths.push(path);
        k_paths.push(k_path);
    }
    let mut weights =
        WeightSet { paths, truncation_bound: None, provenance: Provenance::EstimatedCensoring };
    let truncated = truncation.map_or(0, |b| weights.truncate(b));
    Ok(CensoringEstimate { weights, k: KPath { paths: k_paths }, floored, truncated })
}
