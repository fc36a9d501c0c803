//! Exact likelihood ratios for data with known treatment intensities.
//!
//! With factual intensity `lambda` and hypothetical intensity `lambda~`,
//! `R_t = R_0 * (lambda~_tau / lambda_tau)^{1[tau <= t]} * exp(int_0^t Y_s (lambda_s - lambda~_s) ds)`.
//! Between events the ratio varies continuously, so it is exposed as an
//! evaluator rather than a step path; [`TheoreticalWeights::to_weight_set`]
//! samples it on a grid when a step representation is needed.

use alloc::vec::Vec;

use super::{Provenance, WeightSet, WeightSource};
use crate::error::{Error, Result};
use crate::history::{EventHistory, EventKind};
use crate::step::StepPath;

/// A treatment intensity evaluated along a subject's observed history.
///
/// Both methods assume the subject is at risk of treatment on `[0, t]`.
pub trait Intensity {
    /// `lambda_t` given the history strictly before `t`.
    fn rate(&self, history: &EventHistory, idx: usize, t: f64) -> f64;
    /// `int_0^t lambda_s ds`.
    fn cumulative(&self, history: &EventHistory, idx: usize, t: f64) -> f64;
}

impl<I: Intensity + ?Sized> Intensity for &I {
    fn rate(&self, history: &EventHistory, idx: usize, t: f64) -> f64 {
        (**self).rate(history, idx, t)
    }
    fn cumulative(&self, history: &EventHistory, idx: usize, t: f64) -> f64 {
        (**self).cumulative(history, idx, t)
    }
}

pub struct TheoreticalWeights<'a, F, G> {
    history: &'a EventHistory,
    factual: F,
    hypothetical: G,
    r0: Vec<f64>,
    /// `(tau, lambda~_tau / lambda_tau)` for treated subjects.
    jumps: Vec<Option<(f64, f64)>>,
    risk_end: Vec<f64>,
}

/// Builds the exact weights; fails if the factual intensity vanishes at an
/// observed treatment time.
pub fn theoretical_weights<'a, F: Intensity, G: Intensity>(
    history: &'a EventHistory,
    factual: F,
    hypothetical: G,
    r0: &[f64],
) -> Result<TheoreticalWeights<'a, F, G>> {
    if r0.len() != history.n() {
        return Err(Error::DimensionMismatch { expected: history.n(), found: r0.len() });
    }
    let horizon = history.horizon();
    let mut jumps = Vec::with_capacity(history.n());
    let mut risk_end = Vec::with_capacity(history.n());
    for idx in 0..history.n() {
        let times = history.subject_times(idx);
        risk_end.push(times.risk_end(EventKind::Treatment, horizon));
        jumps.push(match times.treatment {
            Some(tau) => {
                let lambda = factual.rate(history, idx, tau);
                if !(lambda > 0.0) {
                    return Err(Error::Positivity { subject: history.subject_ids()[idx], time: tau });
                }
                Some((tau, hypothetical.rate(history, idx, tau) / lambda))
            }
            None => None,
        });
    }
    Ok(TheoreticalWeights { history, factual, hypothetical, r0: r0.to_vec(), jumps, risk_end })
}

impl<F: Intensity, G: Intensity> TheoreticalWeights<'_, F, G> {
    pub fn n(&self) -> usize {
        self.r0.len()
    }

    fn continuous_part(&self, idx: usize, t: f64) -> f64 {
        let u = t.min(self.risk_end[idx]).max(0.0);
        libm::exp(
            self.factual.cumulative(self.history, idx, u)
                - self.hypothetical.cumulative(self.history, idx, u),
        )
    }

    /// Sample-and-hold step representation on `grid` (plus each subject's
    /// treatment time, where the exact weight jumps).
    pub fn to_weight_set(&self, grid: &[f64]) -> WeightSet {
        let paths = (0..self.n())
            .map(|idx| {
                let mut knots: Vec<f64> = grid.iter().copied().filter(|&t| t > 0.0).collect();
                if let Some((tau, _)) = self.jumps[idx] {
                    knots.push(tau);
                }
                knots.sort_by(f64::total_cmp);
                knots.dedup();
                let mut path = StepPath::constant(self.weight_at(idx, 0.0));
                for t in knots {
                    path.push(t, self.weight_at(idx, t));
                }
                path.simplify()
            })
            .collect();
        WeightSet { paths, truncation_bound: None, provenance: Provenance::Theoretical }
    }
}

impl<F: Intensity, G: Intensity> WeightSource for TheoreticalWeights<'_, F, G> {
    fn weight_before(&self, idx: usize, t: f64) -> f64 {
        let jump = match self.jumps[idx] {
            Some((tau, ratio)) if tau < t => ratio,
            _ => 1.0,
        };
        self.r0[idx] * jump * self.continuous_part(idx, t)
    }

    fn weight_at(&self, idx: usize, t: f64) -> f64 {
        let jump = match self.jumps[idx] {
            Some((tau, ratio)) if tau <= t => ratio,
            _ => 1.0,
        };
        self.r0[idx] * jump * self.continuous_part(idx, t)
    }
}
