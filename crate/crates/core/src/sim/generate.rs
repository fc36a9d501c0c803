//! Event-history generators built from competing exponential clocks.
//!
//! In each state every clock with a positive rate draws an exponential time
//! in the fixed order D, A, L, C; the earliest fires and all clocks are
//! redrawn in the new state. Clocks with rate zero draw nothing.

use alloc::vec;
use alloc::vec::Vec;

use super::marginal::TimeHazard;
use super::rng::SubjectRng;
use super::scenario::{BaselineScenario, ConfoundedScenario};
use crate::error::Result;
use crate::history::{build_history, Baseline, EventHistory, EventKind, EventRecord};

/// Where the treatment clock comes from.
enum TreatmentClock<'a, H> {
    /// `a0 + aL * L`, redrawn each sojourn.
    Factual,
    /// A single draw from a deterministic hazard, fixed for the whole path.
    Fixed(&'a H),
}

fn simulate_subject<H: TimeHazard>(
    scn: &ConfoundedScenario,
    clock: &TreatmentClock<'_, H>,
    rng: &mut SubjectRng,
    id: u64,
    out: &mut Vec<EventRecord>,
) {
    let horizon = scn.horizon;
    let mut tau = None;
    if let TreatmentClock::Fixed(h) = clock {
        let e = rng.exponential(1.0);
        tau = h.inverse_cumulative(e, horizon);
    }
    let (mut t, mut a, mut l) = (0.0, false, false);
    loop {
        let mut next: Option<(f64, EventKind)> = None;
        let mut offer = |dt: Option<f64>, kind: EventKind| {
            if let Some(dt) = dt {
                if next.is_none_or(|(best, _)| dt < best) {
                    next = Some((dt, kind));
                }
            }
        };
        let draw = |rng: &mut SubjectRng, rate: f64| (rate > 0.0).then(|| rng.exponential(rate));
        offer(draw(rng, scn.outcome_rate(a, l)), EventKind::Outcome);
        if !a {
            match clock {
                TreatmentClock::Factual => offer(draw(rng, scn.treatment_rate(l)), EventKind::Treatment),
                TreatmentClock::Fixed(_) => offer(tau.map(|s| s - t), EventKind::Treatment),
            }
        }
        if !l {
            offer(draw(rng, scn.covariate_rate(a)), EventKind::Covariate);
        }
        offer(draw(rng, scn.censoring_rate(l)), EventKind::Censoring);

        let Some((dt, kind)) = next else { break };
        t += dt;
        if t > horizon {
            break;
        }
        out.push(EventRecord::new(id, t, kind));
        match kind {
            EventKind::Treatment => a = true,
            EventKind::Covariate => l = true,
            EventKind::Outcome | EventKind::Censoring => break,
        }
    }
}

fn confounded_world<H: TimeHazard>(
    scn: &ConfoundedScenario,
    clock: TreatmentClock<'_, H>,
    seed: u64,
) -> Result<EventHistory> {
    scn.validate()?;
    let mut records = Vec::new();
    let mut baseline = Baseline::new(vec![]);
    for id in 1..=scn.n as u64 {
        let mut rng = SubjectRng::new(seed, id);
        simulate_subject(scn, &clock, &mut rng, id, &mut records);
        baseline.push(id, vec![]);
    }
    build_history(records, baseline, scn.horizon)
}

/// Observational data with time-varying confounding by `L`.
pub fn simulate_confounded(scn: &ConfoundedScenario, seed: u64) -> Result<EventHistory> {
    confounded_world::<NoHazard>(scn, TreatmentClock::Factual, seed)
}

/// The hypothetical world where treatment initiation follows `marginal`
/// regardless of `L`; every other clock keeps its factual form.
pub fn simulate_hypothetical<H: TimeHazard>(
    scn: &ConfoundedScenario,
    marginal: &H,
    seed: u64,
) -> Result<EventHistory> {
    confounded_world(scn, TreatmentClock::Fixed(marginal), seed)
}

/// Binary baseline `x ~ Bernoulli(p)` and treatment at rate `a0 + aA * x`.
/// The first draw of each subject decides `x`, the second the treatment time.
pub fn simulate_baseline_scenario(scn: &BaselineScenario, seed: u64) -> Result<EventHistory> {
    scn.validate()?;
    let mut records = Vec::new();
    let mut baseline = Baseline::new(vec![BaselineScenario::COLUMN.into()]);
    for id in 1..=scn.n as u64 {
        let mut rng = SubjectRng::new(seed, id);
        let x = rng.bernoulli(scn.p);
        let t = rng.exponential(scn.treatment_rate(x));
        if t <= scn.horizon {
            records.push(EventRecord::new(id, t, EventKind::Treatment));
        }
        baseline.push(id, vec![x as u8 as f64]);
    }
    build_history(records, baseline, scn.horizon)
}

struct NoHazard;

impl TimeHazard for NoHazard {
    fn rate(&self, _: f64) -> f64 {
        0.0
    }
    fn cumulative(&self, _: f64) -> f64 {
        0.0
    }
}
