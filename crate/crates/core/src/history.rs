//! Event-history data: per-subject treatment (A), covariate (L), outcome (D)
//! and censoring (C) events plus baseline variables.

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::error::{Error, Result};

/// Kind of a recorded event. The declaration order is the tie-breaking
/// priority for simultaneous events: D < A < L < C.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EventKind {
    Outcome,
    Treatment,
    Covariate,
    Censoring,
}

impl EventKind {
    pub const ALL: [EventKind; 4] =
        [EventKind::Outcome, EventKind::Treatment, EventKind::Covariate, EventKind::Censoring];

    pub fn code(self) -> char {
        match self {
            EventKind::Outcome => 'D',
            EventKind::Treatment => 'A',
            EventKind::Covariate => 'L',
            EventKind::Censoring => 'C',
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        match code.trim() {
            "D" | "d" => Some(EventKind::Outcome),
            "A" | "a" => Some(EventKind::Treatment),
            "L" | "l" => Some(EventKind::Covariate),
            "C" | "c" => Some(EventKind::Censoring),
            _ => None,
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventRecord {
    pub subject: u64,
    pub time: f64,
    pub kind: EventKind,
    pub payload: Option<Vec<f64>>,
}

impl EventRecord {
    pub fn new(subject: u64, time: f64, kind: EventKind) -> Self {
        Self { subject, time, kind, payload: None }
    }

    fn sort_key_cmp(&self, other: &Self) -> Ordering {
        self.time
            .total_cmp(&other.time)
            .then(self.kind.cmp(&other.kind))
            .then(self.subject.cmp(&other.subject))
    }
}

/// Named baseline variables, one row per subject.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Baseline {
    pub names: Vec<String>,
    pub rows: Vec<(u64, Vec<f64>)>,
}

impl Baseline {
    pub fn new(names: Vec<String>) -> Self {
        Self { names, rows: Vec::new() }
    }

    pub fn push(&mut self, subject: u64, values: Vec<f64>) {
        self.rows.push((subject, values));
    }
}

/// Times of the single-jump processes for one subject.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SubjectTimes {
    pub treatment: Option<f64>,
    pub covariate: Option<f64>,
    pub outcome: Option<f64>,
    pub censoring: Option<f64>,
}

impl SubjectTimes {
    /// Time the subject leaves the study through D or C.
    pub fn exit(&self) -> Option<f64> {
        match (self.outcome, self.censoring) {
            (Some(d), Some(c)) => Some(d.min(c)),
            (d, c) => d.or(c),
        }
    }

    pub fn get(&self, kind: EventKind) -> Option<f64> {
        match kind {
            EventKind::Outcome => self.outcome,
            EventKind::Treatment => self.treatment,
            EventKind::Covariate => self.covariate,
            EventKind::Censoring => self.censoring,
        }
    }

    fn slot(&mut self, kind: EventKind) -> &mut Option<f64> {
        match kind {
            EventKind::Outcome => &mut self.outcome,
            EventKind::Treatment => &mut self.treatment,
            EventKind::Covariate => &mut self.covariate,
            EventKind::Censoring => &mut self.censoring,
        }
    }

    /// At-risk indicator with the left-limit convention: the subject is at
    /// risk for `process` at `t` unless that event, D or C happened strictly
    /// before `t`.
    pub fn at_risk(&self, process: EventKind, t: f64) -> bool {
        let before = |x: Option<f64>| x.is_some_and(|s| s < t);
        !(before(self.get(process)) || before(self.outcome) || before(self.censoring))
    }

    /// End of the at-risk period for `process` (the last `t` with `at_risk` true).
    pub fn risk_end(&self, process: EventKind, horizon: f64) -> f64 {
        let mut end = horizon;
        for x in [self.get(process), self.outcome, self.censoring].into_iter().flatten() {
            end = end.min(x);
        }
        end
    }

    /// Left-limit indicator `N_{t-}` of a single-jump process.
    pub fn jumped_before(&self, kind: EventKind, t: f64) -> bool {
        self.get(kind).is_some_and(|s| s < t)
    }
}

/// A validated, deterministically ordered event history.
///
/// Subjects are addressed internally by a dense index `0..n` in ascending id
/// order; [`EventHistory::index_of`] maps external ids.
#[derive(Debug, Clone, PartialEq)]
pub struct EventHistory {
    records: Vec<EventRecord>,
    ids: Vec<u64>,
    times: Vec<SubjectTimes>,
    baseline_names: Vec<String>,
    baseline: Vec<Vec<f64>>,
    horizon: f64,
}

/// Validates and sorts event records into an [`EventHistory`].
///
/// Records are ordered by time, then kind (D < A < L < C), then subject id.
/// Each subject may have at most one event of each kind, and no event may
/// follow its D or C.
pub fn build_history(
    mut records: Vec<EventRecord>,
    baseline: Baseline,
    horizon: f64,
) -> Result<EventHistory> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidHorizon(horizon));
    }
    let mut payload_width = None;
    for r in &records {
        if !(r.time >= 0.0) {
            return Err(Error::NegativeTime { subject: r.subject, time: r.time });
        }
        if r.time > horizon {
            return Err(Error::BeyondHorizon { subject: r.subject, time: r.time, horizon });
        }
        if let Some(p) = &r.payload {
            match payload_width {
                None => payload_width = Some(p.len()),
                Some(w) if w != p.len() => {
                    return Err(Error::PayloadArity {
                        subject: r.subject,
                        expected: w,
                        found: p.len(),
                    })
                }
                _ => {}
            }
        }
    }
    records.sort_by(EventRecord::sort_key_cmp);

    let mut ids: Vec<u64> = records.iter().map(|r| r.subject).collect();
    ids.extend(baseline.rows.iter().map(|(id, _)| *id));
    ids.sort_unstable();
    ids.dedup();

    let mut times = alloc::vec![SubjectTimes::default(); ids.len()];
    for r in &records {
        let idx = ids.binary_search(&r.subject).expect("id collected above");
        let slot = times[idx].slot(r.kind);
        if slot.is_some() {
            return Err(Error::DuplicateEvent { subject: r.subject, kind: r.kind });
        }
        *slot = Some(r.time);
    }
    for r in &records {
        let idx = ids.binary_search(&r.subject).expect("id collected above");
        if let Some(exit) = times[idx].exit() {
            if r.time > exit {
                return Err(Error::EventAfterExit { subject: r.subject, time: r.time, exit });
            }
        }
    }

    let width = baseline.names.len();
    let mut rows: Vec<Option<Vec<f64>>> = alloc::vec![None; ids.len()];
    for (id, values) in baseline.rows {
        if values.len() != width {
            return Err(Error::BaselineArity { subject: id, expected: width, found: values.len() });
        }
        let idx = ids.binary_search(&id).expect("id collected above");
        rows[idx] = Some(values);
    }
    let mut table = Vec::with_capacity(ids.len());
    for (idx, row) in rows.into_iter().enumerate() {
        match row {
            Some(v) => table.push(v),
            None if width == 0 => table.push(Vec::new()),
            None => {
                return Err(Error::BaselineArity { subject: ids[idx], expected: width, found: 0 })
            }
        }
    }

    Ok(EventHistory {
        records,
        ids,
        times,
        baseline_names: baseline.names,
        baseline: table,
        horizon,
    })
}

impl EventHistory {
    /// The same cohort followed up to an earlier `horizon`: events after it
    /// are dropped, subjects and baseline rows are kept.
    pub fn restrict(&self, horizon: f64) -> Result<EventHistory> {
        if !(horizon > 0.0 && horizon.is_finite()) || horizon > self.horizon {
            return Err(Error::InvalidHorizon(horizon));
        }
        let records: Vec<EventRecord> = self.records.iter().filter(|r| r.time <= horizon).cloned().collect();
        let mut times = alloc::vec![SubjectTimes::default(); self.ids.len()];
        for r in &records {
            let idx = self.ids.binary_search(&r.subject).expect("subject of own record");
            *times[idx].slot(r.kind) = Some(r.time);
        }
        Ok(EventHistory {
            records,
            ids: self.ids.clone(),
            times,
            baseline_names: self.baseline_names.clone(),
            baseline: self.baseline.clone(),
            horizon,
        })
    }

    pub fn n(&self) -> usize {
        self.ids.len()
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn records(&self) -> &[EventRecord] {
        &self.records
    }

    pub fn subject_ids(&self) -> &[u64] {
        &self.ids
    }

    pub fn index_of(&self, id: u64) -> Result<usize> {
        self.ids.binary_search(&id).map_err(|_| Error::UnknownSubject(id))
    }

    pub fn subject_times(&self, idx: usize) -> &SubjectTimes {
        &self.times[idx]
    }

    pub fn baseline_names(&self) -> &[String] {
        &self.baseline_names
    }

    pub fn baseline_column(&self, name: &str) -> Option<usize> {
        self.baseline_names.iter().position(|n| n == name)
    }

    pub fn baseline_row(&self, idx: usize) -> &[f64] {
        &self.baseline[idx]
    }

    /// Recovers the inputs of [`build_history`].
    pub fn baseline(&self) -> Baseline {
        Baseline {
            names: self.baseline_names.clone(),
            rows: self.ids.iter().copied().zip(self.baseline.iter().cloned()).collect(),
        }
    }

    /// `Y_t` for subject id and process; see [`SubjectTimes::at_risk`].
    pub fn at_risk(&self, subject: u64, process: EventKind, t: f64) -> Result<bool> {
        let idx = self.index_of(subject)?;
        Ok(self.times[idx].at_risk(process, t))
    }

    /// Events of one kind as `(time, subject index)`, in history order.
    pub fn events(&self, kind: EventKind) -> Vec<(f64, usize)> {
        self.records
            .iter()
            .filter(|r| r.kind == kind)
            .map(|r| (r.time, self.ids.binary_search(&r.subject).expect("known subject")))
            .collect()
    }

    /// Distinct event times of one kind, increasing.
    pub fn event_times(&self, kind: EventKind) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for r in self.records.iter().filter(|r| r.kind == kind) {
            if out.last() != Some(&r.time) {
                out.push(r.time);
            }
        }
        out
    }

    /// Events of `kind` grouped by distinct time: `(time, subject indices)`.
    pub fn grouped_events(&self, kind: EventKind) -> Vec<(f64, Vec<usize>)> {
        let mut out: Vec<(f64, Vec<usize>)> = Vec::new();
        for (t, idx) in self.events(kind) {
            match out.last_mut() {
                Some((s, v)) if *s == t => v.push(idx),
                _ => out.push((t, alloc::vec![idx])),
            }
        }
        out
    }
}
