//! Treatment hazards with the confounder integrated out, and the intensity
//! objects used for exact weights in the simulated scenarios.

use super::scenario::{BaselineScenario, ConfoundedScenario};
use crate::history::EventHistory;
use crate::quad::CumulativeTable;
use crate::weights::Intensity;

/// A deterministic hazard function of time.
pub trait TimeHazard {
    fn rate(&self, t: f64) -> f64;
    fn cumulative(&self, t: f64) -> f64;

    /// Smallest `t` in `[0, upper]` with `cumulative(t) >= y`, if any.
    fn inverse_cumulative(&self, y: f64, upper: f64) -> Option<f64> {
        if self.cumulative(upper) < y {
            return None;
        }
        let (mut lo, mut hi) = (0.0f64, upper);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.cumulative(mid) >= y {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Some(hi)
    }
}

/// `E[lambda^A_t | untreated and event-free at t]` for a scenario.
#[derive(Debug, Clone, PartialEq)]
pub enum MarginalHazard {
    Baseline(BaselineScenario),
    Confounded { scenario: ConfoundedScenario, table: CumulativeTable },
}

/// Closed-form marginal hazard of the baseline scenario.
pub fn marginal_treatment_hazard_baseline(scn: &BaselineScenario) -> MarginalHazard {
    MarginalHazard::Baseline(*scn)
}

/// Marginal hazard of the confounded scenario from the occupation
/// probabilities of the untreated states `(A=0, L=0)` and `(A=0, L=1)`.
pub fn marginal_treatment_hazard_confounded(scn: &ConfoundedScenario) -> MarginalHazard {
    let s = *scn;
    let cells = libm::ceil(s.horizon * 20.0).max(1.0) as usize;
    let table = CumulativeTable::new(&|t| confounded_rate(&s, t), s.horizon, cells);
    MarginalHazard::Confounded { scenario: s, table }
}

/// Share of untreated, event-free subjects with `L = 1` at `t`.
pub fn confounded_covariate_share(s: &ConfoundedScenario, t: f64) -> f64 {
    let a = s.alpha_a0 + s.alpha_l0 + s.alpha_d0;
    let b = s.alpha_a0 + s.alpha_al + s.alpha_d0 + s.alpha_dl;
    let p00 = libm::exp(-a * t);
    let p01 = if (b - a).abs() < 1e-12 {
        s.alpha_l0 * t * libm::exp(-a * t)
    } else {
        s.alpha_l0 * (libm::exp(-a * t) - libm::exp(-b * t)) / (b - a)
    };
    // share in a form that stays finite when both occupations underflow
    let ratio = if (b - a).abs() < 1e-12 {
        s.alpha_l0 * t
    } else {
        s.alpha_l0 * (1.0 - libm::exp(-(b - a) * t)) / (b - a)
    };
    if p00 > 0.0 {
        p01 / (p00 + p01)
    } else {
        ratio / (1.0 + ratio)
    }
}

fn confounded_rate(s: &ConfoundedScenario, t: f64) -> f64 {
    s.alpha_a0 + s.alpha_al * confounded_covariate_share(s, t)
}

/// Share of untreated subjects with `x = 1` at `t` in the baseline scenario.
pub fn baseline_covariate_share(s: &BaselineScenario, t: f64) -> f64 {
    let e = s.p * libm::exp(-s.alpha_a * t);
    e / (e + 1.0 - s.p)
}

impl TimeHazard for MarginalHazard {
    fn rate(&self, t: f64) -> f64 {
        match self {
            MarginalHazard::Baseline(s) => s.alpha0 + s.alpha_a * baseline_covariate_share(s, t),
            MarginalHazard::Confounded { scenario, .. } => confounded_rate(scenario, t),
        }
    }

    fn cumulative(&self, t: f64) -> f64 {
        match self {
            MarginalHazard::Baseline(s) => {
                s.alpha0 * t - libm::log(s.p * libm::exp(-s.alpha_a * t) + 1.0 - s.p)
            }
            MarginalHazard::Confounded { scenario, table } => {
                table.eval(&|u| confounded_rate(scenario, u), t)
            }
        }
    }
}

impl Intensity for MarginalHazard {
    fn rate(&self, _: &EventHistory, _: usize, t: f64) -> f64 {
        TimeHazard::rate(self, t)
    }
    fn cumulative(&self, _: &EventHistory, _: usize, t: f64) -> f64 {
        TimeHazard::cumulative(self, t)
    }
}

/// Factual treatment intensity `a0 + aL * L_{t-}` of the confounded scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfoundedTreatmentIntensity(pub ConfoundedScenario);

impl Intensity for ConfoundedTreatmentIntensity {
    fn rate(&self, history: &EventHistory, idx: usize, t: f64) -> f64 {
        let l = history.subject_times(idx).covariate.is_some_and(|c| c < t);
        self.0.treatment_rate(l)
    }
    fn cumulative(&self, history: &EventHistory, idx: usize, t: f64) -> f64 {
        let after_l = history.subject_times(idx).covariate.map_or(0.0, |c| (t - c).max(0.0));
        self.0.alpha_a0 * t + self.0.alpha_al * after_l
    }
}

/// Factual treatment intensity `a0 + aA * x` of the baseline scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineTreatmentIntensity {
    pub scenario: BaselineScenario,
    /// Index of the `x` column in the history's baseline table.
    pub column: usize,
}

impl Intensity for BaselineTreatmentIntensity {
    fn rate(&self, history: &EventHistory, idx: usize, _: f64) -> f64 {
        self.scenario.treatment_rate(history.baseline_row(idx)[self.column] == 1.0)
    }
    fn cumulative(&self, history: &EventHistory, idx: usize, t: f64) -> f64 {
        Intensity::rate(self, history, idx, t) * t
    }
}
