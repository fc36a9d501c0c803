//! Compositions of core estimators shared by the commands and experiments.

use ctmsm_core::aalen::{fit_additive, nelson_aalen, CumCoef};
use ctmsm_core::iptw::{iptw_weights, PooledLogisticFit};
use ctmsm_core::sim::{
    marginal_treatment_hazard_baseline, marginal_treatment_hazard_confounded, BaselineScenario,
    BaselineTreatmentIntensity, ConfoundedScenario, ConfoundedTreatmentIntensity, MarginalHazard,
};
use ctmsm_core::weights::{
    censoring_weights, default_bandwidth, estimate_weights, theoretical_weights, CensoringEstimate,
    CompensatorModel, ThetaPolicy, TheoreticalWeights, WeightEstimate,
};
use ctmsm_core::{DesignSpec, EventHistory, EventKind, Result, WeightSource};

/// Design and smoothing choices for continuous-time treatment weights.
#[derive(Debug, Clone, PartialEq)]
pub struct CtSettings {
    /// Design of the factual treatment model, e.g. `(1, L)`.
    pub factual: DesignSpec,
    /// Design of the hypothetical treatment model; intercept only gives the
    /// marginal (randomised-initiation) intervention.
    pub hypothetical: DesignSpec,
    /// `None` selects [`default_bandwidth`].
    pub bandwidth: Option<f64>,
    pub policy: ThetaPolicy,
    pub truncation: Option<f64>,
}

impl CtSettings {
    pub fn new(factual: DesignSpec) -> Self {
        Self {
            factual,
            hypothetical: DesignSpec::intercept_only(),
            bandwidth: None,
            policy: ThetaPolicy::FirstWindow,
            truncation: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CtWeights {
    pub estimate: WeightEstimate,
    pub factual_fit: CumCoef,
    pub hypothetical_fit: CumCoef,
    pub bandwidth: f64,
}

/// Fits both treatment models and estimates the weight processes.
pub fn ct_weights(history: &EventHistory, settings: &CtSettings, r0: Option<&[f64]>) -> Result<CtWeights> {
    let unit = ctmsm_core::weights::UnitWeights;
    let factual_fit = fit_additive(history, EventKind::Treatment, &settings.factual, &unit)?;
    let hypothetical_fit = if settings.hypothetical == DesignSpec::intercept_only() {
        nelson_aalen(history, EventKind::Treatment, &unit)?
    } else {
        fit_additive(history, EventKind::Treatment, &settings.hypothetical, &unit)?
    };
    let bandwidth = match settings.bandwidth {
        Some(k) => k,
        None => default_bandwidth(history)?,
    };
    let ones;
    let r0 = match r0 {
        Some(r) => r,
        None => {
            ones = vec![1.0; history.n()];
            &ones
        }
    };
    let estimate = estimate_weights(
        history,
        CompensatorModel::new(&factual_fit, &settings.factual),
        CompensatorModel::new(&hypothetical_fit, &settings.hypothetical),
        bandwidth,
        settings.policy,
        r0,
        settings.truncation,
    )?;
    Ok(CtWeights { estimate, factual_fit, hypothetical_fit, bandwidth })
}

/// Censoring weights moving the censoring hazard from design `factual` to
/// design `hypothetical` (intercept only randomises censoring).
pub fn ct_censoring_weights(
    history: &EventHistory,
    factual: &DesignSpec,
    hypothetical: &DesignSpec,
    truncation: Option<f64>,
) -> Result<CensoringEstimate> {
    let unit = ctmsm_core::weights::UnitWeights;
    let g = fit_additive(history, EventKind::Censoring, factual, &unit)?;
    let g_tilde = fit_additive(history, EventKind::Censoring, hypothetical, &unit)?;
    censoring_weights(
        history,
        CompensatorModel::new(&g, factual),
        CompensatorModel::new(&g_tilde, hypothetical),
        truncation,
    )
}

pub struct IptwWeights {
    pub weights: ctmsm_core::WeightSet,
    pub numerator: PooledLogisticFit,
    pub denominator: PooledLogisticFit,
}

pub fn iptw(history: &EventHistory, intervals: usize, covariates: &DesignSpec) -> Result<IptwWeights> {
    let (weights, numerator, denominator) = iptw_weights(history, intervals, covariates)?;
    Ok(IptwWeights { weights, numerator, denominator })
}

/// Exact treatment weights for data simulated from the confounded scenario.
pub fn confounded_theoretical<'a>(
    history: &'a EventHistory,
    scn: &ConfoundedScenario,
    marginal: &'a MarginalHazard,
) -> Result<TheoreticalWeights<'a, ConfoundedTreatmentIntensity, &'a MarginalHazard>> {
    theoretical_weights(history, ConfoundedTreatmentIntensity(*scn), marginal, &vec![1.0; history.n()])
}

/// Exact treatment weights for data simulated from the baseline scenario.
pub fn baseline_theoretical<'a>(
    history: &'a EventHistory,
    scn: &BaselineScenario,
    marginal: &'a MarginalHazard,
) -> Result<TheoreticalWeights<'a, BaselineTreatmentIntensity, &'a MarginalHazard>> {
    let column = history
        .baseline_column(BaselineScenario::COLUMN)
        .ok_or_else(|| ctmsm_core::Error::UnknownColumn(BaselineScenario::COLUMN.into()))?;
    theoretical_weights(
        history,
        BaselineTreatmentIntensity { scenario: *scn, column },
        marginal,
        &vec![1.0; history.n()],
    )
}

pub fn marginal_confounded(scn: &ConfoundedScenario) -> MarginalHazard {
    marginal_treatment_hazard_confounded(scn)
}

pub fn marginal_baseline(scn: &BaselineScenario) -> MarginalHazard {
    marginal_treatment_hazard_baseline(scn)
}

/// Weighted outcome fit on `(1, A)`; its `A` column is the cumulative
/// treatment effect `B^{A=1} - B^{A=0}`.
pub fn effect_fit<W: WeightSource + ?Sized>(history: &EventHistory, weights: &W) -> Result<CumCoef> {
    let spec = DesignSpec::parse(&["1", "A"])?;
    fit_additive(history, EventKind::Outcome, &spec, weights)
}

/// `points` equispaced times on `[0, horizon]`.
pub fn time_grid(horizon: f64, points: usize) -> Vec<f64> {
    match points {
        0 => vec![],
        1 => vec![0.0],
        _ => (0..points).map(|k| horizon * k as f64 / (points - 1) as f64).collect(),
    }
}

/// Column `j` of a cumulative fit evaluated on a grid.
pub fn curve(fit: &CumCoef, j: usize, grid: &[f64]) -> Vec<f64> {
    let path = fit.column_path(j);
    grid.iter().map(|&t| *path.eval(t)).collect()
}

pub fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample variance with divisor `len - 1`.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Mean weight over subjects at each grid time.
pub fn mean_weight_curve<W: WeightSource + ?Sized>(weights: &W, n: usize, grid: &[f64]) -> Vec<f64> {
    ctmsm_core::weights::mean_curve(weights, n, grid)
}
