//! Additive-hazard likelihood-ratio weights.
//!
//! The weight is the product integral `R_t = R_0 prod_{s<=t} (1 + dK_s)` of a
//! pure-jump integrator `K` that jumps
//!
//! * by `theta_{tau-} - 1` at the subject's own treatment time `tau`,
//! * by `+Z_{s-}^T dH_s` at each jump of the factual treatment fit while the
//!   subject is at risk of treatment,
//! * by `-Ztilde_{s-}^T dHtilde_s` at each jump of the hypothetical fit while
//!   at risk.

use alloc::vec::Vec;

use super::theta::{check_bandwidth, theta_left_limit, ThetaPolicy};
#[allow(unused_imports)]
use super::theta::estimate_theta;
use super::{Provenance, WeightSet};
use crate::aalen::CumCoef;
use crate::design::{BoundDesign, DesignSpec};
use crate::error::{Error, Result};
use crate::history::{EventHistory, EventKind};
use crate::step::StepPath;

/// A fitted additive hazard model together with its design.
#[derive(Debug, Clone, Copy)]
pub struct CompensatorModel<'a> {
    pub fit: &'a CumCoef,
    pub spec: &'a DesignSpec,
}

impl<'a> CompensatorModel<'a> {
    pub fn new(fit: &'a CumCoef, spec: &'a DesignSpec) -> Self {
        Self { fit, spec }
    }

    pub(crate) fn bind(&self, history: &EventHistory) -> Result<BoundModel<'a>> {
        let design = self.spec.bind(history)?;
        if design.width() != self.fit.width() {
            return Err(Error::DimensionMismatch {
                expected: self.fit.width(),
                found: design.width(),
            });
        }
        Ok(BoundModel { fit: self.fit, design })
    }
}

pub(crate) struct BoundModel<'a> {
    fit: &'a CumCoef,
    design: BoundDesign,
}

/// Per-subject compensator increments `Z_{s-}^T dH_s` and
/// `Ztilde_{s-}^T dHtilde_s` over the union of both fits' jump times up to
/// the end of the subject's risk period.
pub(crate) struct SubjectJumps {
    pub times: Vec<f64>,
    pub factual: Vec<f64>,
    pub hypothetical: Vec<f64>,
}

pub(crate) fn subject_jumps(
    history: &EventHistory,
    idx: usize,
    end: f64,
    factual: &BoundModel<'_>,
    hypothetical: &BoundModel<'_>,
    scratch: &mut Vec<f64>,
) -> SubjectJumps {
    let (ft, ht) = (&factual.fit.times, &hypothetical.fit.times);
    let (mut i, mut j) = (0, 0);
    let mut out = SubjectJumps { times: Vec::new(), factual: Vec::new(), hypothetical: Vec::new() };
    loop {
        let t = match (ft.get(i), ht.get(j)) {
            (Some(&a), Some(&b)) => a.min(b),
            (Some(&a), None) => a,
            (None, Some(&b)) => b,
            (None, None) => break,
        };
        if t > end {
            break;
        }
        let mut a = 0.0;
        if i < ft.len() && ft[i] == t {
            a = linear_increment(history, idx, t, factual, i, scratch);
            i += 1;
        }
        let mut b = 0.0;
        if j < ht.len() && ht[j] == t {
            b = linear_increment(history, idx, t, hypothetical, j, scratch);
            j += 1;
        }
        out.times.push(t);
        out.factual.push(a);
        out.hypothetical.push(b);
    }
    out
}

fn linear_increment(
    history: &EventHistory,
    idx: usize,
    t: f64,
    model: &BoundModel<'_>,
    k: usize,
    scratch: &mut Vec<f64>,
) -> f64 {
    scratch.resize(model.design.width(), 0.0);
    model.design.row_into(history, idx, t, scratch);
    scratch.iter().zip(&model.fit.increments[k]).map(|(z, d)| z * d).sum()
}

/// Per-subject pure-jump integrators `K^(i,n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KPath {
    pub paths: Vec<StepPath>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightEstimate {
    pub weights: WeightSet,
    pub bandwidth: f64,
    pub policy: ThetaPolicy,
    /// `theta_{tau-}` for each subject treated at `tau`.
    pub theta_at_treatment: Vec<Option<f64>>,
    /// Subjects whose ratio estimate met an empty window (see [`estimate_theta`]).
    pub theta_flagged: Vec<usize>,
    /// Subjects whose multiplicative factor `1 + dK` was non-positive; their
    /// weight is floored at zero from that time on.
    pub floored: Vec<usize>,
    /// Number of path values capped by truncation.
    pub truncated: usize,
}

/// Product integral of a pure-jump integrator started at `r0`.
///
/// Returns the weight path and whether a non-positive factor was met.
pub(crate) fn product_integral(r0: f64, k_jumps: &[(f64, f64)]) -> (StepPath, bool) {
    let mut path = StepPath::constant(r0);
    let mut r = r0;
    for &(t, dk) in k_jumps {
        if dk == 0.0 {
            continue;
        }
        let factor = 1.0 + dk;
        if !(factor > 0.0) {
            if r != 0.0 {
                path.push(t, 0.0);
            }
            return (path, true);
        }
        r *= factor;
        path.push(t, r);
    }
    (path, false)
}

pub(crate) fn cumulative_path(dk: &[(f64, f64)]) -> StepPath {
    let mut path = StepPath::constant(0.0);
    let mut acc = 0.0;
    for &(t, d) in dk {
        if d != 0.0 {
            acc += d;
            path.push(t, acc);
        }
    }
    path
}

struct SubjectIntegrator {
    dk: Vec<(f64, f64)>,
    theta_at_treatment: Option<f64>,
    degenerate: bool,
}

struct Bound<'a> {
    factual: BoundModel<'a>,
    hypothetical: BoundModel<'a>,
    policy: ThetaPolicy,
}

/// `dK` for one subject and window width, from its compensator jumps.
fn integrator_from_jumps(jumps: &SubjectJumps, tau: Option<f64>, end: f64, width: f64, policy: ThetaPolicy) -> SubjectIntegrator {
    let (theta_at_treatment, degenerate) = theta_left_limit(jumps, width, end, policy, tau);
    let mut dk: Vec<(f64, f64)> = jumps
        .times
        .iter()
        .zip(jumps.factual.iter().zip(&jumps.hypothetical))
        .map(|(&t, (a, b))| (t, a - b))
        .collect();
    if let (Some(tau), Some(value)) = (tau, theta_at_treatment) {
        let own = value - 1.0;
        match dk.binary_search_by(|(t, _)| t.total_cmp(&tau)) {
            Ok(k) => dk[k].1 += own,
            Err(k) => dk.insert(k, (tau, own)),
        }
    }
    SubjectIntegrator { dk, theta_at_treatment, degenerate }
}

fn bind_models<'a>(
    history: &EventHistory,
    factual: CompensatorModel<'a>,
    hypothetical: CompensatorModel<'a>,
    bandwidths: &[f64],
    policy: ThetaPolicy,
) -> Result<Bound<'a>> {
    for &b in bandwidths {
        check_bandwidth(b)?;
    }
    Ok(Bound { factual: factual.bind(history)?, hypothetical: hypothetical.bind(history)?, policy })
}

/// The integrators `K^(i,n)` whose product integrals are the weights of
/// [`estimate_weights`].
pub fn estimate_integrators(
    history: &EventHistory,
    factual: CompensatorModel<'_>,
    hypothetical: CompensatorModel<'_>,
    bandwidth: f64,
    policy: ThetaPolicy,
) -> Result<KPath> {
    let b = bind_models(history, factual, hypothetical, &[bandwidth], policy)?;
    let mut scratch = Vec::new();
    let paths = (0..history.n())
        .map(|idx| {
            let times = history.subject_times(idx);
            let end = times.risk_end(EventKind::Treatment, history.horizon());
            let jumps = subject_jumps(history, idx, end, &b.factual, &b.hypothetical, &mut scratch);
            cumulative_path(&integrator_from_jumps(&jumps, times.treatment, end, 1.0 / bandwidth, policy).dk)
        })
        .collect();
    Ok(KPath { paths })
}

/// Continuous-time treatment weights from a factual and a hypothetical
/// additive treatment model.
///
/// `r0` holds the baseline weights `R_0^(i,n)` by subject index (use all
/// ones for no baseline intervention). `truncation` caps the resulting paths.
#[allow(clippy::too_many_arguments)]
pub fn estimate_weights(
    history: &EventHistory,
    factual: CompensatorModel<'_>,
    hypothetical: CompensatorModel<'_>,
    bandwidth: f64,
    policy: ThetaPolicy,
    r0: &[f64],
    truncation: Option<f64>,
) -> Result<WeightEstimate> {
    let mut out = estimate_weights_for_bandwidths(history, factual, hypothetical, &[bandwidth], policy, r0, truncation)?;
    Ok(out.remove(0))
}

/// [`estimate_weights`] for several bandwidths at once; the compensator
/// jumps, which do not depend on the bandwidth, are computed once per subject.
#[allow(clippy::too_many_arguments)]
pub fn estimate_weights_for_bandwidths(
    history: &EventHistory,
    factual: CompensatorModel<'_>,
    hypothetical: CompensatorModel<'_>,
    bandwidths: &[f64],
    policy: ThetaPolicy,
    r0: &[f64],
    truncation: Option<f64>,
) -> Result<Vec<WeightEstimate>> {
    if r0.len() != history.n() {
        return Err(Error::DimensionMismatch { expected: history.n(), found: r0.len() });
    }
    let b = bind_models(history, factual, hypothetical, bandwidths, policy)?;
    let horizon = history.horizon();
    let mut scratch = Vec::new();
    let mut out: Vec<WeightEstimate> = bandwidths
        .iter()
        .map(|&bandwidth| WeightEstimate {
            weights: WeightSet {
                paths: Vec::with_capacity(history.n()),
                truncation_bound: None,
                provenance: Provenance::EstimatedTreatment,
            },
            bandwidth,
            policy: b.policy,
            theta_at_treatment: Vec::with_capacity(history.n()),
            theta_flagged: Vec::new(),
            floored: Vec::new(),
            truncated: 0,
        })
        .collect();

    for idx in 0..history.n() {
        let times = history.subject_times(idx);
        let end = times.risk_end(EventKind::Treatment, horizon);
        let jumps = subject_jumps(history, idx, end, &b.factual, &b.hypothetical, &mut scratch);
        for est in out.iter_mut() {
            let sub = integrator_from_jumps(&jumps, times.treatment, end, 1.0 / est.bandwidth, b.policy);
            if sub.degenerate {
                est.theta_flagged.push(idx);
            }
            let (path, hit_floor) = product_integral(r0[idx], &sub.dk);
            if hit_floor {
                est.floored.push(idx);
            }
            if path.values().iter().any(|v| !v.is_finite()) || !r0[idx].is_finite() {
                return Err(Error::NonFiniteWeight { subject: history.subject_ids()[idx], time: end });
            }
            est.weights.paths.push(path);
            est.theta_at_treatment.push(sub.theta_at_treatment);
        }
    }
    if let Some(bound) = truncation {
        for est in out.iter_mut() {
            est.truncated = est.weights.truncate(bound);
        }
    }
    Ok(out)
}
