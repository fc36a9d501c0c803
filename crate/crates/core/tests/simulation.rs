//! Generators against closed forms and independently integrated dynamics.

use ctmsm_core::sim::{
    baseline_covariate_share, confounded_covariate_share, marginal_treatment_hazard_confounded, simulate_baseline_scenario,
    simulate_confounded, simulate_hypothetical, BaselineScenario, ConfoundedScenario, TimeHazard,
};
use ctmsm_core::weights::UnitWeights;
use ctmsm_core::{nelson_aalen, EventHistory, EventKind};

fn quiet() -> ConfoundedScenario {
    ConfoundedScenario {
        alpha_d0: 0.0,
        alpha_da: 0.0,
        alpha_dl: 0.0,
        alpha_dal: 0.0,
        alpha_a0: 0.0,
        alpha_al: 0.0,
        alpha_l0: 0.0,
        alpha_la: 0.0,
        horizon: 1000.0,
        n: 5000,
        censoring: None,
    }
}

#[test]
fn outcome_times_pass_a_kolmogorov_smirnov_test() {
    let rate = 0.3;
    let h = simulate_confounded(&ConfoundedScenario { alpha_d0: rate, ..quiet() }, 20240611).unwrap();
    let mut t: Vec<f64> = (0..h.n()).map(|i| h.subject_times(i).outcome.unwrap()).collect();
    t.sort_by(f64::total_cmp);
    let n = t.len() as f64;
    let mut d = 0.0f64;
    for (k, x) in t.iter().enumerate() {
        let f = 1.0 - (-rate * x).exp();
        d = d.max((k as f64 + 1.0) / n - f).max(f - k as f64 / n);
    }
    // 1% critical value of the one-sample statistic
    assert!(d < 1.628 / n.sqrt(), "D = {d}");
}

#[test]
fn same_seed_same_history_and_streams_differ_by_seed() {
    let scn = ConfoundedScenario { n: 300, ..Default::default() };
    let a = simulate_confounded(&scn, 5).unwrap();
    assert_eq!(a, simulate_confounded(&scn, 5).unwrap());
    assert_ne!(a, simulate_confounded(&scn, 6).unwrap());
    // subject streams do not depend on cohort size
    let small = simulate_confounded(&ConfoundedScenario { n: 100, ..scn }, 5).unwrap();
    for i in 0..small.n() {
        assert_eq!(small.subject_times(i), a.subject_times(i));
    }
}

#[test]
fn histories_follow_the_state_machine() {
    let h = simulate_confounded(&ConfoundedScenario { n: 2000, ..Default::default() }, 1).unwrap();
    for i in 0..h.n() {
        let s = h.subject_times(i);
        let exit = s.exit().unwrap_or(h.horizon());
        assert!(s.treatment.is_none_or(|t| t <= exit));
        assert!(s.covariate.is_none_or(|t| t <= exit));
        assert!(s.censoring.is_none());
    }
}

fn share_check(h: &EventHistory, column_one: impl Fn(usize) -> bool, t: f64, expected: f64) {
    let untreated: Vec<usize> = (0..h.n())
        .filter(|&i| {
            let s = h.subject_times(i);
            s.treatment.is_none_or(|a| a >= t) && s.exit().is_none_or(|e| e >= t)
        })
        .collect();
    let m = untreated.len() as f64;
    let share = untreated.iter().filter(|&&i| column_one(i)).count() as f64 / m;
    let se = (expected * (1.0 - expected) / m).sqrt();
    assert!((share - expected).abs() < 4.0 * se, "t={t}: {share} vs {expected} (se {se})");
}

#[test]
fn baseline_share_among_untreated_matches_closed_form() {
    let scn = BaselineScenario { n: 40_000, ..Default::default() };
    let h = simulate_baseline_scenario(&scn, 77).unwrap();
    let col = h.baseline_column(BaselineScenario::COLUMN).unwrap();
    for t in [0.1, 0.5, 1.0, 1.5, 1.9] {
        // P(x=1 | untreated at t) = p e^{-aA t} / (p e^{-aA t} + 1 - p)
        let e = scn.p * (-scn.alpha_a * t).exp();
        let closed = e / (e + 1.0 - scn.p);
        assert!((baseline_covariate_share(&scn, t) - closed).abs() < 1e-15);
        share_check(&h, |i| h.baseline_row(i)[col] == 1.0, t, closed);
    }
}

/// RK4 integration of the untreated occupation probabilities
/// `(A=0, L=0)` and `(A=0, L=1)`.
fn occupation(s: &ConfoundedScenario, t: f64) -> (f64, f64) {
    let f = |p: [f64; 2]| {
        [
            -(s.alpha_a0 + s.alpha_l0 + s.alpha_d0) * p[0],
            s.alpha_l0 * p[0] - (s.alpha_a0 + s.alpha_al + s.alpha_d0 + s.alpha_dl) * p[1],
        ]
    };
    let steps = 4000;
    let h = t / steps as f64;
    let mut p = [1.0, 0.0];
    for _ in 0..steps {
        let add = |p: [f64; 2], k: [f64; 2], c: f64| [p[0] + c * k[0], p[1] + c * k[1]];
        let k1 = f(p);
        let k2 = f(add(p, k1, h / 2.0));
        let k3 = f(add(p, k2, h / 2.0));
        let k4 = f(add(p, k3, h));
        p = [
            p[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            p[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ];
    }
    (p[0], p[1])
}

#[test]
fn confounded_marginal_hazard_matches_integrated_occupations() {
    let scn = ConfoundedScenario::default();
    let m = marginal_treatment_hazard_confounded(&scn);
    let mut cumulative = 0.0;
    let mut last = 0.0;
    let rate = |t: f64| {
        let (p0, p1) = occupation(&scn, t);
        scn.alpha_a0 + scn.alpha_al * p1 / (p0 + p1)
    };
    for k in 1..=20 {
        let t = k as f64 * 0.5;
        let (p0, p1) = occupation(&scn, t);
        assert!((confounded_covariate_share(&scn, t) - p1 / (p0 + p1)).abs() < 1e-10);
        assert!((m.rate(t) - rate(t)).abs() < 1e-10);
        // Simpson on each half-unit cell
        cumulative += (t - last) / 6.0 * (rate(last) + 4.0 * rate(0.5 * (last + t)) + rate(t));
        last = t;
        assert!((m.cumulative(t) - cumulative).abs() < 1e-6, "t={t}: {} vs {cumulative}", m.cumulative(t));
    }
}

#[test]
fn confounded_covariate_share_matches_simulation() {
    let scn = ConfoundedScenario { n: 40_000, ..Default::default() };
    let h = simulate_confounded(&scn, 3).unwrap();
    for t in [0.5, 2.0, 5.0] {
        share_check(&h, |i| h.subject_times(i).covariate.is_some_and(|l| l < t), t, confounded_covariate_share(&scn, t));
    }
}

/// Sup over a grid of |NA - target| in units of the Nelson–Aalen standard error.
fn treatment_na_deviation(h: &EventHistory, target: &impl TimeHazard, horizon: f64) -> f64 {
    let na = nelson_aalen(h, EventKind::Treatment, &UnitWeights).unwrap();
    let grouped = h.grouped_events(EventKind::Treatment);
    let mut worst = 0.0f64;
    for k in 1..=10 {
        let t = horizon * k as f64 / 10.0;
        let est = na.eval(t)[0];
        let var: f64 = grouped
            .iter()
            .zip(&na.increments)
            .filter(|((s, _), _)| *s <= t)
            .map(|((_, ev), inc)| inc[0] * inc[0] / ev.len() as f64)
            .sum();
        worst = worst.max((est - target.cumulative(t)).abs() / var.sqrt().max(1e-9));
    }
    worst
}

#[test]
fn hypothetical_world_treats_at_the_marginal_rate() {
    let scn = ConfoundedScenario { n: 20_000, ..Default::default() };
    let m = marginal_treatment_hazard_confounded(&scn);
    let hyp = simulate_hypothetical(&scn, &m, 11).unwrap();
    let obs = simulate_confounded(&scn, 11).unwrap();
    assert!(treatment_na_deviation(&hyp, &m, scn.horizon) < 4.0);
    // the observational world has the same marginal treatment hazard
    assert!(treatment_na_deviation(&obs, &m, scn.horizon) < 4.0);
}
