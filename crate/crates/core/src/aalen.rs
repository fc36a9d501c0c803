//! Aalen's additive hazard regression, optionally weighted.
//!
//! At every event time `s` of the target process the increment solves the
//! weighted normal equations `(X^T W X) dB = X^T W dN`, where `X` holds left
//! limits of the design over the risk set and `W` the left-limit weights.

use alloc::string::String;
use alloc::vec::Vec;

use crate::design::DesignSpec;
use crate::error::{Error, Result};
use crate::history::{EventHistory, EventKind};
use crate::linalg::{PivotedLdl, RANK_TOL};
use crate::step::StepPath;
use crate::weights::WeightSource;

/// Cumulative regression coefficients over the event times of a process.
#[derive(Debug, Clone, PartialEq)]
pub struct CumCoef {
    pub columns: Vec<String>,
    pub times: Vec<f64>,
    pub increments: Vec<Vec<f64>>,
    pub cumulative: Vec<Vec<f64>>,
    /// Event times where the Gram matrix was singular; their increment is zero.
    pub skipped_times: Vec<f64>,
}

impl CumCoef {
    pub fn width(&self) -> usize {
        self.columns.len()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Cumulative coefficients at `t` (right-continuous).
    pub fn eval(&self, t: f64) -> Vec<f64> {
        let k = self.times.partition_point(|&s| s <= t);
        if k == 0 {
            alloc::vec![0.0; self.width()]
        } else {
            self.cumulative[k - 1].clone()
        }
    }

    /// Cumulative coefficient of column `j` as a step path.
    pub fn column_path(&self, j: usize) -> StepPath {
        let mut path = StepPath::constant(0.0);
        for (t, c) in self.times.iter().zip(&self.cumulative) {
            path.push(*t, c[j]);
        }
        path
    }

    /// `(time, increment)` pairs of the linear combination `sum_j w_j B_j`.
    pub fn combined_increments(&self, weights: &[f64]) -> Vec<(f64, f64)> {
        self.times
            .iter()
            .zip(&self.increments)
            .map(|(t, inc)| (*t, inc.iter().zip(weights).map(|(a, b)| a * b).sum()))
            .collect()
    }
}

/// Weighted additive hazard fit of the `outcome_kind` counting processes on
/// the columns of `spec`.
pub fn fit_additive<W: WeightSource + ?Sized>(
    history: &EventHistory,
    outcome_kind: EventKind,
    spec: &DesignSpec,
    weights: &W,
) -> Result<CumCoef> {
    let design = spec.bind(history)?;
    let p = design.width();
    if p == 0 {
        return Err(Error::InvalidParameter("empty design"));
    }
    let horizon = history.horizon();
    let ids = history.subject_ids();

    // Subjects ordered by the end of their risk period; the risk set at `s`
    // is the prefix with risk_end >= s.
    let mut order: Vec<(f64, usize)> = (0..history.n())
        .map(|i| (history.subject_times(i).risk_end(outcome_kind, horizon), i))
        .collect();
    order.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut active = order.len();

    let mut gram = alloc::vec![0.0; p * p];
    let mut rhs = alloc::vec![0.0; p];
    let mut x = alloc::vec![0.0; p];
    let mut out = CumCoef {
        columns: spec.names(),
        times: Vec::new(),
        increments: Vec::new(),
        cumulative: Vec::new(),
        skipped_times: Vec::new(),
    };
    let mut running = alloc::vec![0.0; p];

    for (s, events) in history.grouped_events(outcome_kind) {
        while active > 0 && order[active - 1].0 < s {
            active -= 1;
        }
        gram.iter_mut().for_each(|g| *g = 0.0);
        rhs.iter_mut().for_each(|r| *r = 0.0);
        for &(_, i) in &order[..active] {
            let w = weights.weight_before(i, s);
            if !w.is_finite() {
                return Err(Error::NonFiniteWeight { subject: ids[i], time: s });
            }
            if w == 0.0 {
                continue;
            }
            design.row_into(history, i, s, &mut x);
            for a in 0..p {
                let wa = w * x[a];
                if wa == 0.0 {
                    continue;
                }
                for b in 0..=a {
                    gram[a * p + b] += wa * x[b];
                }
            }
        }
        for a in 0..p {
            for b in a + 1..p {
                gram[a * p + b] = gram[b * p + a];
            }
        }
        for &i in &events {
            let w = weights.weight_before(i, s);
            design.row_into(history, i, s, &mut x);
            for a in 0..p {
                rhs[a] += w * x[a];
            }
        }
        let increment = match PivotedLdl::factor(&gram, p, RANK_TOL).solve(&rhs) {
            Some(inc) => inc,
            None => {
                out.skipped_times.push(s);
                alloc::vec![0.0; p]
            }
        };
        for (r, d) in running.iter_mut().zip(&increment) {
            *r += d;
        }
        out.times.push(s);
        out.increments.push(increment);
        out.cumulative.push(running.clone());
    }
    Ok(out)
}

/// Nelson–Aalen estimator: the intercept-only additive fit.
pub fn nelson_aalen<W: WeightSource + ?Sized>(
    history: &EventHistory,
    kind: EventKind,
    weights: &W,
) -> Result<CumCoef> {
    fit_additive(history, kind, &DesignSpec::intercept_only(), weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::history::{build_history, Baseline, EventRecord};
    use crate::weights::{Provenance, UnitWeights, WeightSet};
    use alloc::vec;

    #[test]
    fn two_subject_nelson_aalen() {
        let h = build_history(
            vec![
                EventRecord::new(1, 1.0, EventKind::Outcome),
                EventRecord::new(2, 2.0, EventKind::Outcome),
            ],
            Baseline::default(),
            5.0,
        )
        .unwrap();
        let fit = nelson_aalen(&h, EventKind::Outcome, &UnitWeights).unwrap();
        assert_eq!(fit.times, vec![1.0, 2.0]);
        assert_eq!(fit.increments, vec![vec![0.5], vec![1.0]]);
        assert_eq!(fit.cumulative, vec![vec![0.5], vec![1.5]]);
    }

    #[test]
    fn one_in_three_treated() {
        let h = build_history(
            vec![
                EventRecord::new(1, 1.0, EventKind::Treatment),
                EventRecord::new(2, 3.0, EventKind::Outcome),
                EventRecord::new(3, 4.0, EventKind::Outcome),
            ],
            Baseline::default(),
            5.0,
        )
        .unwrap();
        let fit = nelson_aalen(&h, EventKind::Treatment, &UnitWeights).unwrap();
        assert!((fit.increments[0][0] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn weighted_risk_set() {
        let h = build_history(
            vec![EventRecord::new(1, 1.0, EventKind::Treatment)],
            {
                let mut b = Baseline::new(vec![]);
                b.push(2, vec![]);
                b.push(3, vec![]);
                b
            },
            5.0,
        )
        .unwrap();
        let w = WeightSet::constant(&[2.0, 1.0, 1.0], Provenance::Baseline);
        let fit = nelson_aalen(&h, EventKind::Treatment, &w).unwrap();
        assert!((fit.increments[0][0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn singular_times_are_skipped() {
        // nobody treated before t=1, so the A column is identically zero
        let h = build_history(
            vec![
                EventRecord::new(1, 1.0, EventKind::Outcome),
                EventRecord::new(2, 2.0, EventKind::Outcome),
            ],
            Baseline::default(),
            5.0,
        )
        .unwrap();
        let spec = DesignSpec::parse(&["1", "A"]).unwrap();
        let fit = fit_additive(&h, EventKind::Outcome, &spec, &UnitWeights).unwrap();
        assert_eq!(fit.skipped_times, vec![1.0, 2.0]);
        assert!(fit.cumulative.iter().all(|c| c.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn non_finite_weight_is_an_error() {
        let h = build_history(
            vec![EventRecord::new(1, 1.0, EventKind::Outcome)],
            Baseline::default(),
            5.0,
        )
        .unwrap();
        let w = WeightSet::constant(&[f64::NAN], Provenance::Baseline);
        assert!(matches!(
            nelson_aalen(&h, EventKind::Outcome, &w),
            Err(Error::NonFiniteWeight { subject: 1, .. })
        ));
    }
}
