//! Discrete-time stabilized inverse probability of treatment weights from
//! pooled logistic regressions on person-period data.

use alloc::string::String;
use alloc::vec::Vec;

use crate::design::DesignSpec;
use crate::error::{Error, Result};
use crate::history::EventHistory;
use crate::logistic::{fit_logistic, LogisticFit};
use crate::step::StepPath;
use crate::weights::{Provenance, WeightSet};

#[derive(Debug, Clone, PartialEq)]
pub struct PersonPeriodRow {
    pub subject: usize,
    /// 1-based interval index; interval `k` covers `((k-1)T/K, kT/K]`.
    pub interval: usize,
    /// Covariates at the left limit of the interval start.
    pub covariates: Vec<f64>,
    pub treated: bool,
}

/// One row per subject per interval entered untreated, uncensored and alive.
#[derive(Debug, Clone, PartialEq)]
pub struct PersonPeriodTable {
    pub intervals: usize,
    pub horizon: f64,
    pub n: usize,
    pub covariate_names: Vec<String>,
    pub rows: Vec<PersonPeriodRow>,
}

impl PersonPeriodTable {
    pub fn interval_start(&self, k: usize) -> f64 {
        (k - 1) as f64 * self.horizon / self.intervals as f64
    }

    /// Interval containing `t`, with `t = 0` assigned to the first.
    pub fn interval_of(&self, t: f64) -> usize {
        let k = libm::ceil(t * self.intervals as f64 / self.horizon) as usize;
        k.clamp(1, self.intervals)
    }
}

pub fn discretize(
    history: &EventHistory,
    intervals: usize,
    horizon: f64,
    covariates: &DesignSpec,
) -> Result<PersonPeriodTable> {
    if intervals == 0 {
        return Err(Error::InvalidParameter("number of intervals must be at least 1"));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidHorizon(horizon));
    }
    let design = covariates.bind(history)?;
    let mut table = PersonPeriodTable {
        intervals,
        horizon,
        n: history.n(),
        covariate_names: covariates.names(),
        rows: Vec::new(),
    };
    for idx in 0..history.n() {
        let times = history.subject_times(idx);
        let treated_in = times.treatment.filter(|&t| t <= horizon).map(|t| table.interval_of(t));
        let exit_in = times.exit().filter(|&t| t <= horizon).map(|t| table.interval_of(t));
        let mut last = intervals;
        if let Some(k) = treated_in {
            last = last.min(k);
        }
        if let Some(k) = exit_in {
            last = last.min(k);
        }
        for k in 1..=last {
            let start = table.interval_start(k);
            table.rows.push(PersonPeriodRow {
                subject: idx,
                interval: k,
                covariates: design.row(history, idx, start),
                treated: treated_in == Some(k),
            });
        }
    }
    Ok(table)
}

/// Pooled logistic model for treatment initiation per interval.
#[derive(Debug, Clone, PartialEq)]
pub struct PooledLogisticFit {
    pub fit: LogisticFit,
    pub intervals: usize,
    pub covariate_columns: Vec<usize>,
    /// Intervals whose rows were all untreated (probability pinned at 0) or
    /// all treated (pinned at 1); their dummies and rows are left out of the fit.
    pub pinned: Vec<(usize, f64)>,
}

impl PooledLogisticFit {
    fn design_row(&self, row: &PersonPeriodRow, out: &mut Vec<f64>) {
        out.clear();
        out.push(1.0);
        for k in 2..=self.intervals {
            out.push(if row.interval == k { 1.0 } else { 0.0 });
        }
        out.extend(self.covariate_columns.iter().map(|&c| row.covariates[c]));
    }

    pub fn predict(&self, row: &PersonPeriodRow) -> f64 {
        if let Some(&(_, p)) = self.pinned.iter().find(|(k, _)| *k == row.interval) {
            return p;
        }
        let mut x = Vec::new();
        self.design_row(row, &mut x);
        self.fit.predict(&x)
    }
}

/// Regresses the treated indicator on an intercept, interval dummies
/// (interval 1 is the reference) and the selected covariate columns.
pub fn fit_pooled_logistic(
    table: &PersonPeriodTable,
    covariate_columns: &[usize],
) -> Result<PooledLogisticFit> {
    let width = table.covariate_names.len();
    if let Some(&c) = covariate_columns.iter().find(|&&c| c >= width) {
        return Err(Error::DimensionMismatch { expected: width, found: c + 1 });
    }
    let kk = table.intervals;
    let mut counts = alloc::vec![(0usize, 0usize); kk + 1];
    for r in &table.rows {
        counts[r.interval].0 += 1;
        counts[r.interval].1 += r.treated as usize;
    }
    let pinned: Vec<(usize, f64)> = (1..=kk)
        .filter(|&k| counts[k].0 > 0)
        .filter_map(|k| match counts[k].1 {
            0 => Some((k, 0.0)),
            t if t == counts[k].0 => Some((k, 1.0)),
            _ => None,
        })
        .collect();

    let mut model = PooledLogisticFit {
        fit: LogisticFit {
            coefficients: Vec::new(),
            converged: true,
            iterations: 0,
            log_likelihood: 0.0,
            gradient_norm: 0.0,
            dropped_columns: Vec::new(),
            separation: false,
        },
        intervals: kk,
        covariate_columns: covariate_columns.to_vec(),
        pinned,
    };
    let p = kk + covariate_columns.len();
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut row_buf = Vec::with_capacity(p);
    for r in &table.rows {
        if model.pinned.iter().any(|(k, _)| *k == r.interval) {
            continue;
        }
        model.design_row(r, &mut row_buf);
        x.extend_from_slice(&row_buf);
        y.push(if r.treated { 1.0 } else { 0.0 });
    }
    model.fit = fit_logistic(&x, &y, p);
    Ok(model)
}

/// Stabilized weights: the cumulative product over intervals of
/// `p_num^a (1-p_num)^(1-a) / (p_den^a (1-p_den)^(1-a))`.
///
/// The weight for interval `k` takes effect at its start `(k-1)T/K`, so its
/// left limit at any time inside `((k-1)T/K, kT/K]` includes factor `k`.
pub fn stabilized_iptw(
    numerator: &PooledLogisticFit,
    denominator: &PooledLogisticFit,
    table: &PersonPeriodTable,
    subject_ids: &[u64],
) -> Result<WeightSet> {
    if numerator.intervals != table.intervals || denominator.intervals != table.intervals {
        return Err(Error::DimensionMismatch {
            expected: table.intervals,
            found: numerator.intervals.max(denominator.intervals),
        });
    }
    let mut paths = alloc::vec![StepPath::constant(1.0); table.n];
    let mut current = alloc::vec![1.0; table.n];
    for row in &table.rows {
        let pn = numerator.predict(row);
        let pd = denominator.predict(row);
        let (num, den) = if row.treated { (pn, pd) } else { (1.0 - pn, 1.0 - pd) };
        if !(den > 0.0) {
            return Err(Error::Positivity {
                subject: subject_ids.get(row.subject).copied().unwrap_or(row.subject as u64),
                time: table.interval_start(row.interval),
            });
        }
        let w = current[row.subject] * (num / den);
        if w != current[row.subject] {
            paths[row.subject].push(table.interval_start(row.interval), w);
            current[row.subject] = w;
        }
    }
    Ok(WeightSet { paths, truncation_bound: None, provenance: Provenance::Iptw })
}

/// Numerator (time only) and denominator (time + covariates) models and the
/// resulting weights, as used for the head-to-head comparison.
pub fn iptw_weights(
    history: &EventHistory,
    intervals: usize,
    covariates: &DesignSpec,
) -> Result<(WeightSet, PooledLogisticFit, PooledLogisticFit)> {
    let table = discretize(history, intervals, history.horizon(), covariates)?;
    let numerator = fit_pooled_logistic(&table, &[])?;
    let all: Vec<usize> = (0..covariates.width()).collect();
    let denominator = fit_pooled_logistic(&table, &all)?;
    let weights = stabilized_iptw(&numerator, &denominator, &table, history.subject_ids())?;
    Ok((weights, numerator, denominator))
}

/// Treatment events per interval, mostly for diagnostics.
pub fn treatment_counts(table: &PersonPeriodTable) -> Vec<usize> {
    let mut out = alloc::vec![0; table.intervals];
    for r in table.rows.iter().filter(|r| r.treated) {
        out[r.interval - 1] += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::history::{build_history, Baseline, EventKind, EventRecord};
    use crate::weights::WeightSource;
    use alloc::vec;

    fn history(records: Vec<EventRecord>) -> EventHistory {
        build_history(records, Baseline::default(), 10.0).unwrap()
    }

    #[test]
    fn treated_subject_rows() {
        let h = history(vec![EventRecord::new(1, 2.6, EventKind::Treatment)]);
        let t = discretize(&h, 4, 10.0, &DesignSpec::parse(&["L"]).unwrap()).unwrap();
        let rows: Vec<_> = t.rows.iter().map(|r| (r.interval, r.treated)).collect();
        assert_eq!(rows, vec![(1, false), (2, true)]);
    }

    #[test]
    fn early_death_single_row() {
        let h = history(vec![EventRecord::new(1, 0.4, EventKind::Outcome)]);
        let t = discretize(&h, 4, 10.0, &DesignSpec::parse(&["L"]).unwrap()).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.rows[0].interval, 1);
    }

    #[test]
    fn exit_on_boundary_does_not_enter_next_interval() {
        let h = history(vec![EventRecord::new(1, 5.0, EventKind::Censoring)]);
        let t = discretize(&h, 4, 10.0, &DesignSpec::parse(&["L"]).unwrap()).unwrap();
        assert_eq!(t.rows.len(), 2);
    }

    #[test]
    fn covariates_use_interval_start() {
        let h = history(vec![EventRecord::new(1, 3.0, EventKind::Covariate)]);
        let t = discretize(&h, 4, 10.0, &DesignSpec::parse(&["L"]).unwrap()).unwrap();
        let l: Vec<_> = t.rows.iter().map(|r| r.covariates[0]).collect();
        assert_eq!(l, vec![0.0, 0.0, 1.0, 1.0]);
    }

    #[test]
    fn hand_product_two_intervals() {
        let table = PersonPeriodTable {
            intervals: 2,
            horizon: 2.0,
            n: 1,
            covariate_names: vec![],
            rows: vec![
                PersonPeriodRow { subject: 0, interval: 1, covariates: vec![], treated: false },
                PersonPeriodRow { subject: 0, interval: 2, covariates: vec![], treated: true },
            ],
        };
        let constant = |p1: f64, p2: f64| {
            // intercept + one dummy reproduces any two probabilities
            let l1 = libm::log(p1 / (1.0 - p1));
            let l2 = libm::log(p2 / (1.0 - p2));
            PooledLogisticFit {
                fit: LogisticFit {
                    coefficients: vec![l1, l2 - l1],
                    converged: true,
                    iterations: 0,
                    log_likelihood: 0.0,
                    gradient_norm: 0.0,
                    dropped_columns: vec![],
                    separation: false,
                },
                intervals: 2,
                covariate_columns: vec![],
                pinned: vec![],
            }
        };
        let w = stabilized_iptw(&constant(0.1, 0.1), &constant(0.2, 0.05), &table, &[1]).unwrap();
        assert!((w.weight_before(0, 0.5) - 0.9 / 0.8).abs() < 1e-12);
        assert!((w.weight_before(0, 1.5) - 2.25).abs() < 1e-12);
        assert!((w.weight_at(0, 5.0) - 2.25).abs() < 1e-12);
    }
}
