//! Likelihood-ratio weight processes.
//!
//! Estimators in this module produce a [`WeightSet`]: one right-continuous
//! step path per subject. Anything that can report a weight just before a
//! time implements [`WeightSource`] and can be fed to the weighted additive
//! hazard fit.

mod baseline;
mod censoring;
mod estimate;
mod theoretical;
mod theta;

pub use baseline::{baseline_weight, BaselineDensity, BernoulliDensity, LogisticDensity};
pub use censoring::{censoring_weights, CensoringEstimate};
pub use estimate::{
    estimate_integrators, estimate_weights, estimate_weights_for_bandwidths, CompensatorModel, KPath, WeightEstimate,
};
pub use theoretical::{theoretical_weights, Intensity, TheoreticalWeights};
pub use theta::{
    default_bandwidth, DEFAULT_BANDWIDTH_ANCHOR_N, estimate_theta, BandwidthStrategy, ThetaPath, ThetaPolicy, DENOMINATOR_FLOOR,
};

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::step::StepPath;

/// Per-subject weight values, addressed by dense subject index.
pub trait WeightSource {
    /// `R_{t-}` for subject `idx`.
    fn weight_before(&self, idx: usize, t: f64) -> f64;
    /// `R_t` for subject `idx`.
    fn weight_at(&self, idx: usize, t: f64) -> f64;
}

/// Weights identically equal to one.
#[derive(Debug, Clone, Copy, Default)]
pub struct UnitWeights;

impl WeightSource for UnitWeights {
    fn weight_before(&self, _: usize, _: f64) -> f64 {
        1.0
    }
    fn weight_at(&self, _: usize, _: f64) -> f64 {
        1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    EstimatedTreatment,
    EstimatedCensoring,
    Baseline,
    Theoretical,
    Iptw,
    Combined,
    Unit,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::EstimatedTreatment => "estimated-treatment",
            Provenance::EstimatedCensoring => "estimated-censoring",
            Provenance::Baseline => "baseline",
            Provenance::Theoretical => "theoretical",
            Provenance::Iptw => "iptw",
            Provenance::Combined => "combined",
            Provenance::Unit => "unit",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightSet {
    pub paths: Vec<StepPath>,
    pub truncation_bound: Option<f64>,
    pub provenance: Provenance,
}

impl WeightSet {
    pub fn unit(n: usize) -> Self {
        Self {
            paths: alloc::vec![StepPath::constant(1.0); n],
            truncation_bound: None,
            provenance: Provenance::Unit,
        }
    }

    /// Constant-in-time weights, e.g. baseline propensity ratios.
    pub fn constant(values: &[f64], provenance: Provenance) -> Self {
        Self {
            paths: values.iter().map(|&v| StepPath::constant(v)).collect(),
            truncation_bound: None,
            provenance,
        }
    }

    pub fn n(&self) -> usize {
        self.paths.len()
    }

    /// Caps all values at `bound`; returns the number of capped path values.
    pub fn truncate(&mut self, bound: f64) -> usize {
        let mut count = 0;
        for p in &mut self.paths {
            let (capped, c) = p.capped(bound);
            *p = capped;
            count += c;
        }
        self.truncation_bound = Some(match self.truncation_bound {
            Some(b) => b.min(bound),
            None => bound,
        });
        count
    }

    /// Mean of `R_t` over subjects at each time.
    pub fn mean_curve(&self, grid: &[f64]) -> Vec<f64> {
        mean_curve(self, self.n(), grid)
    }
}

impl WeightSource for WeightSet {
    fn weight_before(&self, idx: usize, t: f64) -> f64 {
        *self.paths[idx].eval_left(t)
    }
    fn weight_at(&self, idx: usize, t: f64) -> f64 {
        *self.paths[idx].eval(t)
    }
}

/// Mean weight over `n` subjects at each grid time.
pub fn mean_curve<W: WeightSource + ?Sized>(weights: &W, n: usize, grid: &[f64]) -> Vec<f64> {
    grid.iter()
        .map(|&t| (0..n).map(|i| weights.weight_at(i, t)).sum::<f64>() / n as f64)
        .collect()
}

/// Pointwise product of weight sets; truncation bounds of the parts are
/// re-applied to the product.
pub fn combine_weights(parts: &[&WeightSet]) -> Result<WeightSet> {
    let first = parts.first().ok_or(Error::InvalidParameter("no weight sets to combine"))?;
    let n = first.n();
    if parts.iter().any(|p| p.n() != n) {
        return Err(Error::MismatchedSubjects);
    }
    let mut paths = first.paths.clone();
    for part in &parts[1..] {
        for (acc, p) in paths.iter_mut().zip(&part.paths) {
            *acc = acc.product(p);
        }
    }
    let bound = parts.iter().filter_map(|p| p.truncation_bound).reduce(f64::min);
    let mut out = WeightSet { paths, truncation_bound: None, provenance: Provenance::Combined };
    if let Some(b) = bound {
        out.truncate(b);
    }
    Ok(out)
}
