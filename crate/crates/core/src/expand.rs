//! Expansion of an event history onto the event times of one process: a row
//! per at-risk subject per event time, carrying left-limit design values and
//! the weight just before the event time.

use alloc::string::String;
use alloc::vec::Vec;

use crate::design::DesignSpec;
use crate::error::Result;
use crate::history::{EventHistory, EventKind};
use crate::weights::WeightSource;

#[derive(Debug, Clone, PartialEq)]
pub struct ExpandedRow {
    pub subject: u64,
    pub time: f64,
    pub event: bool,
    pub design: Vec<f64>,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpandedTable {
    pub event_kind: EventKind,
    pub columns: Vec<String>,
    pub rows: Vec<ExpandedRow>,
}

pub fn expand_to_event_grid<W: WeightSource + ?Sized>(
    history: &EventHistory,
    event_kind: EventKind,
    spec: &DesignSpec,
    weights: &W,
) -> Result<ExpandedTable> {
    let design = spec.bind(history)?;
    let mut rows = Vec::new();
    for (s, events) in history.grouped_events(event_kind) {
        for i in 0..history.n() {
            if !history.subject_times(i).at_risk(event_kind, s) {
                continue;
            }
            rows.push(ExpandedRow {
                subject: history.subject_ids()[i],
                time: s,
                event: events.contains(&i),
                design: design.row(history, i, s),
                weight: weights.weight_before(i, s),
            });
        }
    }
    Ok(ExpandedTable { event_kind, columns: spec.names(), rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::history::{build_history, Baseline, EventRecord};
    use crate::step::StepPath;
    use crate::weights::{Provenance, UnitWeights, WeightSet};
    use alloc::vec;

    fn two_subjects() -> EventHistory {
        build_history(
            vec![
                EventRecord::new(1, 1.0, EventKind::Outcome),
                EventRecord::new(2, 2.0, EventKind::Outcome),
            ],
            Baseline::default(),
            5.0,
        )
        .unwrap()
    }

    #[test]
    fn rows_follow_risk_sets() {
        let h = two_subjects();
        let t = expand_to_event_grid(&h, EventKind::Outcome, &DesignSpec::intercept_only(), &UnitWeights)
            .unwrap();
        let keys: Vec<_> = t.rows.iter().map(|r| (r.subject, r.time, r.event)).collect();
        assert_eq!(keys, vec![(1, 1.0, true), (2, 1.0, false), (2, 2.0, true)]);
        assert!(t.rows.iter().all(|r| r.weight == 1.0));
    }

    #[test]
    fn weights_are_left_limits() {
        let h = build_history(
            vec![
                EventRecord::new(1, 0.9, EventKind::Outcome),
                EventRecord::new(2, 1.0, EventKind::Outcome),
                EventRecord::new(3, 3.0, EventKind::Outcome),
            ],
            Baseline::default(),
            5.0,
        )
        .unwrap();
        let mut w = WeightSet::unit(3);
        w.provenance = Provenance::EstimatedTreatment;
        w.paths[2] = StepPath::new(1.0, vec![0.9], vec![2.0]).unwrap();
        let t = expand_to_event_grid(&h, EventKind::Outcome, &DesignSpec::intercept_only(), &w).unwrap();
        let s3: Vec<_> = t.rows.iter().filter(|r| r.subject == 3).map(|r| (r.time, r.weight)).collect();
        assert_eq!(s3, vec![(0.9, 1.0), (1.0, 2.0), (3.0, 2.0)]);
    }
}
