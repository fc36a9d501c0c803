//! Windowed estimator of the intensity ratio `theta = lambda_tilde / lambda`.

use alloc::vec::Vec;

use super::estimate::{subject_jumps, CompensatorModel, SubjectJumps};
use crate::error::{Error, Result};
use crate::history::{EventHistory, EventKind};
use crate::step::StepPath;

/// Window denominators at or below this value are treated as zero.
pub const DENOMINATOR_FLOOR: f64 = 1e-12;

/// How `theta` is set on `[0, 1/kappa)`, before a full window is available.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum ThetaPolicy {
    /// Extend the window ratio at `t = 1/kappa` backwards to zero.
    #[default]
    FirstWindow,
    Constant(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThetaPath {
    /// Defined up to the end of each subject's treatment risk period and
    /// held constant afterwards.
    pub paths: Vec<StepPath>,
    pub bandwidth: f64,
    pub policy: ThetaPolicy,
    /// Subjects for which some window had a zero denominator and the last
    /// finite value was carried forward.
    pub flagged: Vec<usize>,
}

/// Visits the raw window ratio at `t = width` and at every later time up to
/// `end` where the window content changes; `None` marks an empty or
/// vanishing denominator.
///
/// Jumps enter the window at their time `s` and leave it at `s + width`;
/// both streams are sorted, so they are merged rather than sorted.
fn scan_windows(jumps: &SubjectJumps, width: f64, end: f64, mut visit: impl FnMut(f64, Option<f64>)) {
    let m = jumps.times.len();
    let (mut enter, mut leave) = (0, 0);
    let (mut num, mut den) = (0.0, 0.0);
    let mut t = width;
    loop {
        while enter < m && jumps.times[enter] <= t {
            num += jumps.hypothetical[enter];
            den += jumps.factual[enter];
            enter += 1;
        }
        while leave < enter && jumps.times[leave] + width <= t {
            num -= jumps.hypothetical[leave];
            den -= jumps.factual[leave];
            leave += 1;
        }
        if leave == enter {
            num = 0.0;
            den = 0.0;
        }
        visit(t, if den > DENOMINATOR_FLOOR { Some(num / den) } else { None });
        let next_enter = jumps.times.get(enter).copied().unwrap_or(f64::INFINITY);
        let next_leave = if leave < enter { jumps.times[leave] + width } else { f64::INFINITY };
        let next = next_enter.min(next_leave);
        if next > end {
            break;
        }
        t = next;
    }
}

/// Applies the `theta_0` policy and the carry-forward rule to the raw
/// window ratios as they are visited.
struct PolicyState {
    policy: ThetaPolicy,
    theta0: Option<f64>,
    last: f64,
    degenerate: bool,
}

impl PolicyState {
    fn new(policy: ThetaPolicy) -> Self {
        let theta0 = match policy {
            ThetaPolicy::Constant(c) => Some(c),
            ThetaPolicy::FirstWindow => None,
        };
        Self { policy, theta0, last: theta0.unwrap_or(1.0), degenerate: false }
    }

    fn push(&mut self, raw: Option<f64>) -> f64 {
        if self.theta0.is_none() {
            debug_assert!(matches!(self.policy, ThetaPolicy::FirstWindow));
            let first = raw.filter(|v| v.is_finite());
            self.degenerate |= first.is_none();
            self.theta0 = Some(first.unwrap_or(1.0));
            self.last = self.theta0.unwrap();
        }
        match raw {
            Some(v) if v.is_finite() => self.last = v,
            _ => self.degenerate = true,
        }
        self.last
    }

    fn theta0(&self) -> f64 {
        self.theta0.unwrap_or(1.0)
    }
}

/// `theta_{tau-}` for one subject, and whether any window up to `end` was
/// degenerate.
pub(crate) fn theta_left_limit(
    jumps: &SubjectJumps,
    width: f64,
    end: f64,
    policy: ThetaPolicy,
    tau: Option<f64>,
) -> (Option<f64>, bool) {
    let mut state = PolicyState::new(policy);
    let mut at_tau = None;
    scan_windows(jumps, width, end, |t, raw| {
        let v = state.push(raw);
        if tau.is_some_and(|tau| t < tau) {
            at_tau = Some(v);
        }
    });
    let value = tau.map(|_| at_tau.unwrap_or_else(|| state.theta0()));
    (value, state.degenerate)
}

/// Post-policy ratio path of one subject.
pub(crate) fn theta_path(jumps: &SubjectJumps, width: f64, end: f64, policy: ThetaPolicy) -> (StepPath, bool) {
    let mut state = PolicyState::new(policy);
    let mut changes = Vec::new();
    scan_windows(jumps, width, end, |t, raw| changes.push((t, state.push(raw))));
    let theta0 = state.theta0();
    let mut path = StepPath::constant(theta0);
    let mut last = theta0;
    for (t, v) in changes {
        if v != last {
            path.push(t, v);
            last = v;
        }
    }
    (path, state.degenerate)
}

/// Estimates `theta^(i,n)_t`. For `t >= 1/kappa` it is the ratio of
/// `sum Ztilde_{s-}^T dHtilde_s` to `sum Z_{s-}^T dH_s` over jumps `s` in
/// `(t - 1/kappa, t]` while the subject is at risk of treatment.
pub fn estimate_theta(
    history: &EventHistory,
    factual: CompensatorModel<'_>,
    hypothetical: CompensatorModel<'_>,
    bandwidth: f64,
    policy: ThetaPolicy,
) -> Result<ThetaPath> {
    check_bandwidth(bandwidth)?;
    let fb = factual.bind(history)?;
    let hb = hypothetical.bind(history)?;
    let width = 1.0 / bandwidth;
    let horizon = history.horizon();
    let mut scratch = Vec::new();
    let mut paths = Vec::with_capacity(history.n());
    let mut flagged = Vec::new();
    for idx in 0..history.n() {
        let end = history.subject_times(idx).risk_end(EventKind::Treatment, horizon);
        let jumps = subject_jumps(history, idx, end, &fb, &hb, &mut scratch);
        let (path, degenerate) = theta_path(&jumps, width, end, policy);
        if degenerate {
            flagged.push(idx);
        }
        paths.push(path);
    }
    Ok(ThetaPath { paths, bandwidth, policy, flagged })
}

pub(crate) fn check_bandwidth(bandwidth: f64) -> Result<()> {
    if bandwidth > 0.0 && bandwidth.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter("bandwidth must be positive and finite"))
    }
}

/// Bandwidth refinement `kappa_n = anchor_kappa * (n / anchor_n)^exponent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandwidthStrategy {
    pub anchor_n: usize,
    pub anchor_kappa: f64,
    pub exponent: f64,
}

impl BandwidthStrategy {
    pub fn kappa(&self, n: usize) -> f64 {
        self.anchor_kappa * libm::pow(n as f64 / self.anchor_n as f64, self.exponent)
    }

    /// Whether the sequence is increasing with `sup_n kappa_n / sqrt(n) < infinity`.
    pub fn satisfies_rate_condition(&self) -> bool {
        self.exponent > 0.0 && self.exponent <= 0.5
    }
}

/// Sample size at which the default bandwidth's calibration is anchored.
pub const DEFAULT_BANDWIDTH_ANCHOR_N: usize = 1000;

/// Default bandwidth `kappa = c n^(1/3)`, with `c` chosen so that at
/// `n = DEFAULT_BANDWIDTH_ANCHOR_N` the window `1/kappa` equals the 10%
/// quantile of the observed times to treatment initiation.
pub fn default_bandwidth(history: &EventHistory) -> Result<f64> {
    let mut times: Vec<f64> = history.events(EventKind::Treatment).into_iter().map(|e| e.0).collect();
    times.retain(|&t| t > 0.0);
    if times.is_empty() {
        return Err(Error::InvalidParameter("no treatment events to calibrate a bandwidth"));
    }
    times.sort_by(f64::total_cmp);
    let pos = libm::round((times.len() - 1) as f64 * 0.1) as usize;
    let strategy = BandwidthStrategy {
        anchor_n: DEFAULT_BANDWIDTH_ANCHOR_N,
        anchor_kappa: 1.0 / times[pos],
        exponent: 1.0 / 3.0,
    };
    Ok(strategy.kappa(history.n()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aalen::{nelson_aalen, CumCoef};
    use crate::design::DesignSpec;
    use crate::history::{build_history, Baseline, EventRecord};
    use crate::weights::UnitWeights;
    use alloc::string::ToString;
    use alloc::vec;

    fn intercept_fit(times: &[f64], incs: &[f64]) -> CumCoef {
        let mut acc = 0.0;
        CumCoef {
            columns: vec!["1".to_string()],
            times: times.to_vec(),
            increments: incs.iter().map(|&d| vec![d]).collect(),
            cumulative: incs
                .iter()
                .map(|&d| {
                    acc += d;
                    vec![acc]
                })
                .collect(),
            skipped_times: vec![],
        }
    }

    fn untreated(n: u64) -> EventHistory {
        let mut b = Baseline::new(vec![]);
        for id in 1..=n {
            b.push(id, vec![]);
        }
        build_history(vec![], b, 2.0).unwrap()
    }

    #[test]
    fn identical_models_give_unit_ratio() {
        let h = build_history(
            vec![
                EventRecord::new(1, 0.3, EventKind::Treatment),
                EventRecord::new(2, 0.8, EventKind::Treatment),
                EventRecord::new(3, 1.1, EventKind::Treatment),
            ],
            {
                let mut b = Baseline::new(vec![]);
                b.push(4, vec![]);
                b
            },
            2.0,
        )
        .unwrap();
        let fit = nelson_aalen(&h, EventKind::Treatment, &UnitWeights).unwrap();
        let spec = DesignSpec::intercept_only();
        let m = CompensatorModel::new(&fit, &spec);
        let theta = estimate_theta(&h, m, m, 2.0, ThetaPolicy::Constant(3.0)).unwrap();
        let p = &theta.paths[3];
        assert_eq!(*p.eval(0.2), 3.0);
        for t in [0.5, 0.9, 1.2, 1.9] {
            assert_eq!(*p.eval(t), 1.0);
        }
    }

    #[test]
    fn constant_before_first_full_window() {
        let h = untreated(1);
        let f = intercept_fit(&[0.2, 0.3], &[0.02, 0.03]);
        let g = intercept_fit(&[0.2, 0.3], &[0.01, 0.01]);
        let spec = DesignSpec::intercept_only();
        let theta = estimate_theta(
            &h,
            CompensatorModel::new(&f, &spec),
            CompensatorModel::new(&g, &spec),
            2.0,
            ThetaPolicy::Constant(0.7),
        )
        .unwrap();
        for t in [0.0, 0.25, 0.4999] {
            assert_eq!(*theta.paths[0].eval(t), 0.7);
        }
        assert!((*theta.paths[0].eval(0.5) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn hand_summed_window() {
        let h = untreated(1);
        let f = intercept_fit(&[0.2, 0.3], &[0.02, 0.03]);
        let g = intercept_fit(&[0.2, 0.3], &[0.025, 0.025]);
        let spec = DesignSpec::intercept_only();
        let theta = estimate_theta(
            &h,
            CompensatorModel::new(&f, &spec),
            CompensatorModel::new(&g, &spec),
            2.0,
            ThetaPolicy::FirstWindow,
        )
        .unwrap();
        let p = &theta.paths[0];
        assert!((*p.eval(0.0) - 1.0).abs() < 1e-12);
        assert!((*p.eval(0.6) - 1.0).abs() < 1e-12);
        // the jump at 0.2 leaves the window at 0.7
        assert!((*p.eval(0.7) - 0.025 / 0.03).abs() < 1e-12);
        // empty window from 0.8 on: last value carried, subject flagged
        assert!((*p.eval(1.5) - 0.025 / 0.03).abs() < 1e-12);
        assert_eq!(theta.flagged, vec![0]);
    }

    #[test]
    fn bandwidth_strategy_anchor() {
        let s = BandwidthStrategy { anchor_n: 250, anchor_kappa: 1.0, exponent: 1.0 / 3.0 };
        assert_eq!(s.kappa(250), 1.0);
        assert!((s.kappa(2000) - 2.0).abs() < 1e-12);
        assert!(s.satisfies_rate_condition());
        assert!(!BandwidthStrategy { exponent: 0.7, ..s }.satisfies_rate_condition());
    }

    #[test]
    fn default_bandwidth_quantile_and_rate() {
        // 1000 subjects treated at 0.001, 0.002, ..., 1.0: 10% quantile at index 100
        let records: Vec<_> =
            (1..=1000u64).map(|i| EventRecord::new(i, i as f64 / 1000.0, EventKind::Treatment)).collect();
        let h = build_history(records.clone(), Baseline::default(), 2.0).unwrap();
        assert!((default_bandwidth(&h).unwrap() - 1.0 / 0.101).abs() < 1e-12);
        // same treatment times among 8000 subjects: kappa doubles
        let mut b = Baseline::new(vec![]);
        for id in 1001..=8000 {
            b.push(id, vec![]);
        }
        let h = build_history(records, b, 2.0).unwrap();
        assert_eq!(h.n(), 8000);
        let q = h.events(EventKind::Treatment).len();
        assert_eq!(q, 1000);
        assert!((default_bandwidth(&h).unwrap() - 2.0 / 0.101).abs() < 1e-9);
    }
}
