//! Weight processes against closed forms.

use ctmsm_core::sim::{
    marginal_treatment_hazard_confounded, simulate_confounded, ConfoundedScenario, ConfoundedTreatmentIntensity,
};
use ctmsm_core::weights::{
    censoring_weights, combine_weights, estimate_weights, estimate_weights_for_bandwidths, theoretical_weights,
    CompensatorModel, Provenance, ThetaPolicy, UnitWeights,
};
use ctmsm_core::{
    build_history, fit_additive, nelson_aalen, Baseline, CumCoef, DesignSpec, EventKind, EventRecord, WeightSet,
    WeightSource,
};

/// A fit whose columns jump by `rates[j] * h` at every multiple of `h` up to `upper`.
fn constant_rate_fit(columns: &[&str], rates: &[f64], h: f64, upper: f64) -> CumCoef {
    let steps = (upper / h).round() as usize;
    let times: Vec<f64> = (1..=steps).map(|k| k as f64 * h).collect();
    let inc: Vec<f64> = rates.iter().map(|r| r * h).collect();
    let cumulative = (1..=steps).map(|k| inc.iter().map(|d| d * k as f64).collect()).collect();
    CumCoef {
        columns: columns.iter().map(|c| c.to_string()).collect(),
        times,
        increments: vec![inc; steps],
        cumulative,
        skipped_times: vec![],
    }
}

#[test]
fn constant_hazards_give_discrete_exponential_weights() {
    let (lambda, lambda_tilde, h) = (0.5, 0.2, 0.01);
    let tau = 1.005;
    let history = build_history(
        vec![EventRecord::new(2, tau, EventKind::Treatment)],
        Baseline { names: vec![], rows: vec![(1, vec![]), (2, vec![])] },
        2.0,
    )
    .unwrap();
    let factual = constant_rate_fit(&["1"], &[lambda], h, 2.0);
    let hypothetical = constant_rate_fit(&["1"], &[lambda_tilde], h, 2.0);
    let spec = DesignSpec::intercept_only();
    let est = estimate_weights(
        &history,
        CompensatorModel::new(&factual, &spec),
        CompensatorModel::new(&hypothetical, &spec),
        2.0,
        ThetaPolicy::FirstWindow,
        &[1.0, 1.0],
        None,
    )
    .unwrap();
    let step = 1.0 + (lambda - lambda_tilde) * h;
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * b.abs();

    // untreated: (1 + (lambda - lambda~) h)^k after k grid jumps
    for k in [1, 50, 137, 200] {
        assert!(close(est.weights.weight_at(0, k as f64 * h), step.powi(k)));
    }
    // treated at tau: 100 grid jumps, then the intensity ratio, then frozen
    let ratio = lambda_tilde / lambda;
    assert!(close(est.theta_at_treatment[1].unwrap(), ratio));
    assert!(close(est.weights.weight_before(1, tau), step.powi(100)));
    assert!(close(est.weights.weight_at(1, tau), step.powi(100) * ratio));
    assert!(close(est.weights.weight_at(1, 2.0), step.powi(100) * ratio));
    // and the continuum limit within O(h)
    assert!((est.weights.weight_at(0, 2.0) - ((lambda - lambda_tilde) * 2.0).exp()).abs() < 2.0 * h);
}

#[test]
fn shared_jumps_match_single_bandwidth_runs() {
    let scn = ConfoundedScenario { n: 300, ..Default::default() };
    let history = simulate_confounded(&scn, 9).unwrap();
    let fs = DesignSpec::parse(&["1", "L"]).unwrap();
    let hs = DesignSpec::intercept_only();
    let f = fit_additive(&history, EventKind::Treatment, &fs, &UnitWeights).unwrap();
    let h = nelson_aalen(&history, EventKind::Treatment, &UnitWeights).unwrap();
    let r0 = vec![1.0; history.n()];
    let kappas = [0.5, 1.0, 3.0];
    let all = estimate_weights_for_bandwidths(
        &history,
        CompensatorModel::new(&f, &fs),
        CompensatorModel::new(&h, &hs),
        &kappas,
        ThetaPolicy::FirstWindow,
        &r0,
        Some(20.0),
    )
    .unwrap();
    for (k, &kappa) in kappas.iter().enumerate() {
        let one = estimate_weights(
            &history,
            CompensatorModel::new(&f, &fs),
            CompensatorModel::new(&h, &hs),
            kappa,
            ThetaPolicy::FirstWindow,
            &r0,
            Some(20.0),
        )
        .unwrap();
        assert_eq!(all[k], one);
    }
}

#[test]
fn censoring_weights_approach_exp_of_the_removed_hazard() {
    // factual censoring 0.05 + 0.1 L, hypothetical 0.05: an L = 1 subject
    // gets exp(0.1 t), an L = 0 subject keeps weight 1
    let h = 1e-3;
    let history = build_history(
        vec![EventRecord::new(1, 0.0, EventKind::Covariate)],
        Baseline { names: vec![], rows: vec![(1, vec![]), (2, vec![])] },
        2.0,
    )
    .unwrap();
    let factual = constant_rate_fit(&["1", "L"], &[0.05, 0.1], h, 2.0);
    let hypothetical = constant_rate_fit(&["1"], &[0.05], h, 2.0);
    let fs = DesignSpec::parse(&["1", "L"]).unwrap();
    let hs = DesignSpec::intercept_only();
    let est = censoring_weights(&history, CompensatorModel::new(&factual, &fs), CompensatorModel::new(&hypothetical, &hs), None)
        .unwrap();
    for t in [0.5, 1.0, 2.0] {
        let w = est.weights.weight_at(0, t);
        let k = (t / h).round() as i32;
        assert!((w - (1.0 + 0.1 * h).powi(k)).abs() <= 1e-11 * w);
        // log(1 + 0.1h) / h = 0.1 - 0.005 h + ..., so the gap is about 0.005 h t e^{0.1 t}
        assert!((w - (0.1 * t).exp()).abs() <= 0.006 * h * t * (0.1 * t).exp());
        assert_eq!(est.weights.weight_at(1, t), 1.0);
    }
    assert!(est.floored.is_empty());
}

/// `int_0^t lambda~` by Simpson's rule on an independently integrated
/// occupation ODE (forward Euler on a fine grid is enough at 1e-6).
fn marginal_cumulative(s: &ConfoundedScenario, t: f64) -> f64 {
    let steps = 200_000;
    let dt = t / steps as f64;
    let (mut p0, mut p1, mut acc) = (1.0f64, 0.0f64, 0.0);
    let rate = |p0: f64, p1: f64| s.alpha_a0 + s.alpha_al * p1 / (p0 + p1);
    for _ in 0..steps {
        let r0 = rate(p0, p1);
        let d0 = -(s.alpha_a0 + s.alpha_l0 + s.alpha_d0) * p0;
        let d1 = s.alpha_l0 * p0 - (s.alpha_a0 + s.alpha_al + s.alpha_d0 + s.alpha_dl) * p1;
        let (q0, q1) = (p0 + dt * d0, p1 + dt * d1);
        // Heun step for both the occupations and the integral
        let e0 = -(s.alpha_a0 + s.alpha_l0 + s.alpha_d0) * q0;
        let e1 = s.alpha_l0 * q0 - (s.alpha_a0 + s.alpha_al + s.alpha_d0 + s.alpha_dl) * q1;
        let (n0, n1) = (p0 + dt * 0.5 * (d0 + e0), p1 + dt * 0.5 * (d1 + e1));
        acc += dt * 0.5 * (r0 + rate(n0, n1));
        p0 = n0;
        p1 = n1;
    }
    acc
}

#[test]
fn theoretical_weights_match_direct_quadrature() {
    let scn = ConfoundedScenario { n: 60, ..Default::default() };
    let history = simulate_confounded(&scn, 4).unwrap();
    let m = marginal_treatment_hazard_confounded(&scn);
    let w = theoretical_weights(&history, ConfoundedTreatmentIntensity(scn), &m, &vec![1.0; history.n()]).unwrap();
    for idx in 0..history.n() {
        let times = history.subject_times(idx);
        let end = times.treatment.into_iter().chain(times.exit()).fold(scn.horizon, f64::min);
        let factual = scn.alpha_a0 * end + scn.alpha_al * times.covariate.map_or(0.0, |l| (end - l).max(0.0));
        let mut expected = (factual - marginal_cumulative(&scn, end)).exp();
        if let Some(tau) = times.treatment {
            let l = times.covariate.is_some_and(|l| l < tau);
            let share = {
                // closed-form occupation share, independent of the library
                let a = scn.alpha_a0 + scn.alpha_l0 + scn.alpha_d0;
                let b = scn.alpha_a0 + scn.alpha_al + scn.alpha_d0 + scn.alpha_dl;
                let p00 = (-a * tau).exp();
                let p01 = scn.alpha_l0 * ((-a * tau).exp() - (-b * tau).exp()) / (b - a);
                p01 / (p00 + p01)
            };
            expected *= (scn.alpha_a0 + scn.alpha_al * share) / scn.treatment_rate(l);
        }
        let got = w.weight_at(idx, scn.horizon);
        assert!((got - expected).abs() <= 1e-6 * expected, "subject {idx}: {got} vs {expected}");
    }
}

#[test]
fn identical_treatment_models_give_unit_weights() {
    // no confounding of treatment by L, factual and hypothetical model alike
    let scn = ConfoundedScenario { n: 500, alpha_al: 0.0, ..Default::default() };
    let history = simulate_confounded(&scn, 12).unwrap();
    let spec = DesignSpec::intercept_only();
    let fit = nelson_aalen(&history, EventKind::Treatment, &UnitWeights).unwrap();
    let est = estimate_weights(
        &history,
        CompensatorModel::new(&fit, &spec),
        CompensatorModel::new(&fit, &spec),
        2.0,
        ThetaPolicy::FirstWindow,
        &vec![1.0; history.n()],
        None,
    )
    .unwrap();
    for path in &est.weights.paths {
        assert!((path.max_value() - 1.0).abs() <= 1e-12 && (path.min_value() - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn combined_weights_multiply_pointwise() {
    let scn = ConfoundedScenario { n: 50, ..Default::default() };
    let history = simulate_confounded(&scn, 2).unwrap();
    let fs = DesignSpec::parse(&["1", "L"]).unwrap();
    let hs = DesignSpec::intercept_only();
    let f = fit_additive(&history, EventKind::Treatment, &fs, &UnitWeights).unwrap();
    let h = nelson_aalen(&history, EventKind::Treatment, &UnitWeights).unwrap();
    let est = estimate_weights(
        &history,
        CompensatorModel::new(&f, &fs),
        CompensatorModel::new(&h, &hs),
        1.0,
        ThetaPolicy::FirstWindow,
        &vec![1.0; history.n()],
        None,
    )
    .unwrap();
    let base: Vec<f64> = (0..history.n()).map(|i| 0.5 + (i % 3) as f64).collect();
    let r0 = WeightSet::constant(&base, Provenance::Baseline);
    let both = combine_weights(&[&r0, &est.weights]).unwrap();
    for i in 0..history.n() {
        for t in [0.0, 1.3, 4.0, 9.9] {
            let want = base[i] * est.weights.weight_at(i, t);
            assert!((both.weight_at(i, t) - want).abs() <= 1e-14 * want.abs().max(1.0));
        }
    }
}
