//! Acceptance report: one PASS/FAIL line per criterion, metric and runtime
//! budget both required for a PASS.
//!
//! Runs as a plain binary (no test harness). Criteria are reported, not
//! asserted; set `ACCEPTANCE_STRICT=1` to exit non-zero when any criterion
//! fails, and `ACCEPTANCE_ONLY=1,2,8` to run a subset.

use std::time::{Duration, Instant};

use ctmsm::experiments::{censoring, fig1, fig2, fig3};
use ctmsm::pipeline::median;
use ctmsm_core::iptw::{discretize, fit_pooled_logistic, stabilized_iptw};
use ctmsm_core::sim::{simulate_confounded, CensoringHazard, ConfoundedScenario, SubjectRng};
use ctmsm_core::transform::{identity_spec, relative_survival_spec, solve_plugin, survival_spec, JumpIntegrator};
use ctmsm_core::weights::{estimate_weights, CompensatorModel, Provenance, ThetaPolicy, UnitWeights};
use ctmsm_core::{
    build_history, fit_additive, nelson_aalen, Baseline, DesignSpec, EventHistory, EventKind, EventRecord, StepPath,
    WeightSet, WeightSource,
};
use nalgebra::{DMatrix, DVector};

/// Master seed of every simulation below.
const SEED: u64 = 1;

const KM_TOL: f64 = 1e-12;
const NORMAL_EQUATIONS_TOL: f64 = 1e-10;
const THEORETICAL_MEAN_SE: f64 = 3.0;
const MEAN_WEIGHT_WIN_FRACTION: f64 = 0.7;
const CONSISTENCY_BEAT_FRACTION: f64 = 0.9;
const IDENTITY_TOL: f64 = 1e-12;
const CENSORING_BEAT_FRACTION: f64 = 0.8;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

// ---------------------------------------------------------------- criterion 1

fn kaplan_meier_equivalence() -> Outcome {
    let scn = ConfoundedScenario {
        n: 200,
        censoring: Some(CensoringHazard { base: 0.05, per_l: 0.1 }),
        ..Default::default()
    };
    let mut worst = 0.0f64;
    for rep in 0..100 {
        let h = simulate_confounded(&scn, ctmsm_core::sim::replication_seed(SEED, rep)).unwrap();
        let na = nelson_aalen(&h, EventKind::Outcome, &UnitWeights).unwrap();
        let path = solve_plugin(&survival_spec(), &[JumpIntegrator::from_column(&na, 0)], None, &[]).unwrap();
        let exits: Vec<f64> = (0..h.n()).map(|i| h.subject_times(i).exit().unwrap_or(f64::INFINITY)).collect();
        let mut s = 1.0;
        for t in h.event_times(EventKind::Outcome) {
            let r = exits.iter().filter(|&&e| e >= t).count() as f64;
            let d = (0..h.n()).filter(|&i| h.subject_times(i).outcome == Some(t)).count() as f64;
            s *= 1.0 - d / r;
            worst = worst.max((path.eval(t)[0] - s).abs());
        }
    }
    outcome(worst <= KM_TOL, format!("max |S_plugin - S_KM| = {worst:.3e} over 100 data sets (tol {KM_TOL:e})"))
}

// ---------------------------------------------------------------- criterion 2

const POOL: [&str; 6] = ["1", "A", "L", "x", "A*L", "A*x"];

fn random_case(rng: &mut SubjectRng) -> (EventHistory, WeightSet, Vec<&'static str>) {
    let n = 5 + (rng.uniform() * 46.0) as usize % 46;
    let grid = |rng: &mut SubjectRng| (1 + (rng.uniform() * 20.0) as u64 % 20) as f64 * 0.25;
    let mut records = Vec::new();
    let mut baseline = Baseline::new(vec!["x".into()]);
    let mut paths = Vec::new();
    for id in 1..=n as u64 {
        let d = (rng.uniform() < 0.8).then(|| grid(rng));
        let c = (rng.uniform() < 0.3).then(|| grid(rng));
        let (d, c) = match (d, c) {
            (Some(d), Some(c)) if c < d => (None, Some(c)),
            (Some(d), Some(_)) => (Some(d), None),
            other => other,
        };
        let exit = d.or(c);
        for kind in [EventKind::Treatment, EventKind::Covariate] {
            let t = grid(rng);
            if rng.uniform() < 0.5 && exit.is_none_or(|e| t <= e) {
                records.push(EventRecord::new(id, t, kind));
            }
        }
        records.extend(d.map(|t| EventRecord::new(id, t, EventKind::Outcome)));
        records.extend(c.map(|t| EventRecord::new(id, t, EventKind::Censoring)));
        baseline.push(id, vec![2.0 * rng.uniform() - 1.0]);
        let mut path = StepPath::constant(0.3 + 2.7 * rng.uniform());
        if rng.uniform() < 0.5 {
            path.push(grid(rng), 0.3 + 2.7 * rng.uniform());
        }
        paths.push(path);
    }
    let p = 1 + (rng.uniform() * 4.0) as usize % 4;
    let mut columns: Vec<&str> = POOL.to_vec();
    while columns.len() > p {
        let k = (rng.uniform() * columns.len() as f64) as usize % columns.len();
        columns.remove(k);
    }
    let history = build_history(records, baseline, 5.0).unwrap();
    (history, WeightSet { paths, truncation_bound: None, provenance: Provenance::Combined }, columns)
}

fn normal_equations_oracle() -> Outcome {
    let (mut worst, mut compared, mut singular_ok) = (0.0f64, 0usize, true);
    for case in 0..300 {
        let mut rng = SubjectRng::new(SEED, 1_000_000 + case);
        let (h, w, columns) = random_case(&mut rng);
        let spec = DesignSpec::parse(&columns).unwrap();
        let fit = fit_additive(&h, EventKind::Outcome, &spec, &w).unwrap();
        let p = columns.len();
        for (k, &s) in fit.times.iter().enumerate() {
            let mut g = DMatrix::<f64>::zeros(p, p);
            let mut r = DVector::<f64>::zeros(p);
            for i in 0..h.n() {
                let st = h.subject_times(i);
                if st.exit().is_some_and(|e| e < s) {
                    continue;
                }
                let a = if st.treatment.is_some_and(|t| t < s) { 1.0 } else { 0.0 };
                let l = if st.covariate.is_some_and(|t| t < s) { 1.0 } else { 0.0 };
                let x = h.baseline_row(i)[0];
                let row: Vec<f64> = columns
                    .iter()
                    .map(|c| match *c {
                        "1" => 1.0,
                        "A" => a,
                        "L" => l,
                        "x" => x,
                        "A*L" => a * l,
                        _ => a * x,
                    })
                    .collect();
                let z = DVector::from_vec(row);
                let wi = *w.paths[i].eval_left(s);
                g += wi * &z * z.transpose();
                if st.outcome == Some(s) {
                    r += wi * &z;
                }
            }
            let eig = g.clone().symmetric_eigen().eigenvalues;
            if eig.min() <= 1e-13 * eig.max() {
                singular_ok &= fit.skipped_times.contains(&s);
                continue;
            }
            if eig.min() < 1e-4 * eig.max() {
                continue;
            }
            let oracle = g.lu().solve(&r).unwrap();
            for (a, b) in fit.increments[k].iter().zip(oracle.iter()) {
                worst = worst.max((a - b).abs() / b.abs().max(1.0));
            }
            compared += 1;
        }
    }
    outcome(
        worst <= NORMAL_EQUATIONS_TOL && singular_ok && compared > 0,
        format!(
            "max relative deviation {worst:.3e} over {compared} event times of 300 data sets (tol {NORMAL_EQUATIONS_TOL:e}); singular times skipped: {singular_ok}"
        ),
    )
}

// ---------------------------------------------------------------- criterion 3

fn theoretical_mean() -> Outcome {
    let r = fig2::run_theoretical_mean(&fig2::TheoreticalMeanConfig::default(), SEED).unwrap();
    let z: Vec<f64> = r.mean.iter().zip(&r.se).map(|(m, s)| (m - 1.0) / s).collect();
    let worst = z.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    outcome(
        worst <= THEORETICAL_MEAN_SE,
        format!("max |mean - 1| / SE = {worst:.2} at {} times (limit {THEORETICAL_MEAN_SE})", z.len()),
    )
}

// ---------------------------------------------------------------- criterion 4

fn mean_weight_bias() -> Outcome {
    let cfg = fig2::MeanWeightConfig::default();
    let r = fig2::run_mean_weight_bias(&cfg, SEED).unwrap();
    let fractions: Vec<f64> = r
        .iter_fractions()
        .collect();
    let pass = fractions.iter().all(|&f| f >= MEAN_WEIGHT_WIN_FRACTION);
    let parts: Vec<String> =
        cfg.intervals.iter().zip(&fractions).map(|(k, f)| format!("K={k}: {f:.3}")).collect();
    let drift = r.ct.iter().fold(0.0f64, |a, c| a.max((c - 1.0).abs()));
    outcome(
        pass,
        format!(
            "share of grid times with |ct - 1| <= |IPTW - 1|: {} (need {MEAN_WEIGHT_WIN_FRACTION}); max |mean ct - 1| = {drift:.4}",
            parts.join(", ")
        ),
    )
}

trait WinFractions {
    fn iter_fractions(&self) -> Box<dyn Iterator<Item = f64> + '_>;
}

impl WinFractions for fig2::MeanWeightCurves {
    fn iter_fractions(&self) -> Box<dyn Iterator<Item = f64> + '_> {
        Box::new(self.iptw.iter().map(|curve| {
            let wins = self.ct.iter().zip(curve).filter(|(c, i)| (*c - 1.0).abs() <= (*i - 1.0).abs()).count();
            wins as f64 / self.ct.len() as f64
        }))
    }
}

// ---------------------------------------------------------------- criterion 5

fn effect_consistency() -> Outcome {
    let cfg = fig1::ConsistencyConfig::default();
    let rows = fig1::run_consistency(&cfg, SEED).unwrap();
    let medians = fig1::median_by_n(&rows, &cfg.ns);
    let decreasing = medians.windows(2).all(|w| w[1] < w[0]);
    let largest = *cfg.ns.iter().max().unwrap();
    let big: Vec<_> = rows.iter().filter(|r| r.n == largest).collect();
    let beat = big.iter().filter(|r| r.sup_ct < r.sup_unweighted).count() as f64 / big.len() as f64;
    outcome(
        decreasing && beat >= CONSISTENCY_BEAT_FRACTION,
        format!(
            "median sup distance {:?} over n = {:?} (decreasing: {decreasing}); ct beats unweighted in {beat:.2} of reps at n = {largest} (need {CONSISTENCY_BEAT_FRACTION})",
            medians.iter().map(|m| format!("{m:.4}")).collect::<Vec<_>>(),
            cfg.ns
        ),
    )
}

// ---------------------------------------------------------------- criterion 6

fn weight_convergence() -> Outcome {
    let cfg = fig3::ConvergenceConfig::default();
    let per_rep = fig3::run_weight_convergence(&cfg, SEED).unwrap();
    let medians: Vec<f64> =
        (0..cfg.ns.len()).map(|k| median(&per_rep.iter().map(|r| r[k]).collect::<Vec<_>>())).collect();
    let decreasing = medians.windows(2).all(|w| w[1] < w[0]);
    outcome(
        decreasing,
        format!(
            "median over reps of the subject-median sup |Rhat - R|: {:?} over n = {:?}",
            medians.iter().map(|m| format!("{m:.4}")).collect::<Vec<_>>(),
            cfg.ns
        ),
    )
}

// ---------------------------------------------------------------- criterion 7

fn bias_variance() -> Outcome {
    let cfg = fig3::BiasVarianceConfig::default();
    let rows = fig3::run_bias_variance(&cfg, SEED).unwrap();
    let largest = *cfg.ns.iter().max().unwrap();
    let at: Vec<&fig3::BiasVarianceRow> = rows.iter().filter(|r| r.n == largest).collect();
    let last = at.len() - 1;
    let (b1, b4) = (at[0].bias.abs(), at[last].bias.abs());
    let (v1, v4) = (at[0].variance, at[last].variance);
    let between = |x: f64, a: f64, b: f64| a.min(b) <= x && x <= a.max(b);
    let middle_ok = at[1..last]
        .iter()
        .all(|r| between(r.bias.abs(), b1, b4) || between(r.variance, v1, v4));
    let table: Vec<String> = at
        .iter()
        .map(|r| format!("k{}: bias {:.5} var {:.4e}", r.strategy + 1, r.bias, r.variance))
        .collect();
    outcome(
        b1 < b4 && v1 > v4 && middle_ok,
        format!(
            "n = {largest}, {} reps: {}; bias(k1) < bias(k4): {}, var(k1) > var(k4): {}, middle strategies between: {middle_ok}",
            cfg.reps,
            table.join("; "),
            b1 < b4,
            v1 > v4
        ),
    )
}

// ---------------------------------------------------------------- criterion 8

fn degenerate_identities() -> Outcome {
    // unconfounded treatment, factual and hypothetical models alike
    let scn = ConfoundedScenario { n: 1000, alpha_al: 0.0, ..Default::default() };
    let h = simulate_confounded(&scn, SEED).unwrap();
    let spec = DesignSpec::intercept_only();
    let fit = nelson_aalen(&h, EventKind::Treatment, &UnitWeights).unwrap();
    let est = estimate_weights(
        &h,
        CompensatorModel::new(&fit, &spec),
        CompensatorModel::new(&fit, &spec),
        2.0,
        ThetaPolicy::FirstWindow,
        &vec![1.0; h.n()],
        None,
    )
    .unwrap();
    let ct_dev = est
        .weights
        .paths
        .iter()
        .map(|p| (p.max_value() - 1.0).abs().max((p.min_value() - 1.0).abs()))
        .fold(0.0f64, f64::max);

    let table = discretize(&h, 8, h.horizon(), &DesignSpec::parse(&["L"]).unwrap()).unwrap();
    let pooled = fit_pooled_logistic(&table, &[0]).unwrap();
    let iptw = stabilized_iptw(&pooled, &pooled, &table, h.subject_ids()).unwrap();
    let iptw_exact = (0..h.n()).all(|i| iptw.paths[i].is_empty() && iptw.weight_at(i, h.horizon()) == 1.0);

    let outcome_fit = fit_additive(&h, EventKind::Outcome, &DesignSpec::parse(&["1", "A"]).unwrap(), &UnitWeights).unwrap();
    let b = JumpIntegrator::from_column(&outcome_fit, 0);
    let ident = solve_plugin(&identity_spec(1), std::slice::from_ref(&b), None, &[]).unwrap();
    let identity_ok = outcome_fit.times.iter().zip(&outcome_fit.cumulative).all(|(t, c)| (ident.eval(*t)[0] - c[0]).abs() <= IDENTITY_TOL);

    let rs = solve_plugin(&relative_survival_spec(), &[b.clone(), b], None, &[]).unwrap();
    let rs_ok = rs.values().iter().all(|v| v[0] == 1.0);

    outcome(
        ct_dev <= IDENTITY_TOL && iptw_exact && identity_ok && rs_ok,
        format!(
            "ct max |R - 1| = {ct_dev:.1e}; IPTW exactly 1: {iptw_exact}; identity plugin = integrator: {identity_ok}; RS = 1: {rs_ok}"
        ),
    )
}

// ---------------------------------------------------------------- criterion 9

fn censoring_validation() -> Outcome {
    let cfg = censoring::CensoringValidationConfig::default();
    let r = censoring::run_censoring_validation(&cfg, SEED).unwrap();
    let closer = r.sup_weighted.iter().zip(&r.sup_unweighted).filter(|(w, u)| w < u).count();
    let frac = closer as f64 / r.sup_weighted.len() as f64;
    outcome(
        frac >= CENSORING_BEAT_FRACTION,
        format!(
            "weighted fit closer to the uncensored oracle in {closer}/{} reps at n = {} (need {CENSORING_BEAT_FRACTION})",
            r.sup_weighted.len(),
            cfg.n
        ),
    )
}

fn main() {
    let criteria: [(u32, &str, u64, fn() -> Outcome); 9] = [
        (1, "Kaplan-Meier equivalence", 10, kaplan_meier_equivalence),
        (2, "normal-equations oracle", 10, normal_equations_oracle),
        (3, "exact weights have mean one", 120, theoretical_mean),
        (4, "mean weight: ct vs IPTW", 300, mean_weight_bias),
        (5, "effect consistency", 600, effect_consistency),
        (6, "weight convergence", 300, weight_convergence),
        (7, "bias-variance ordering", 600, bias_variance),
        (8, "degenerate identities", 10, degenerate_identities),
        (9, "censoring weights", 300, censoring_validation),
    ];
    let only: Option<Vec<u32>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let mut failed = 0;
    for (id, name, budget, run) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(budget);
        let pass = result.pass && in_time;
        failed += !pass as usize;
        println!(
            "criterion {id} [{}] {name}: {} ({:.1}s of {budget}s{})",
            if pass { "PASS" } else { "FAIL" },
            result.detail,
            elapsed.as_secs_f64(),
            if in_time { "" } else { ", over budget" }
        );
    }
    println!("acceptance: {failed} criteria failing");
    if failed > 0 && std::env::var_os("ACCEPTANCE_STRICT").is_some() {
        std::process::exit(1);
    }
}
