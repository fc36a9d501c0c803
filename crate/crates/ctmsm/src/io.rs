//! CSV and JSON file formats.
//!
//! Numbers are written with Rust's shortest round-trip formatting, so
//! reading a file back reproduces every `f64` bit for bit.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use ctmsm_core::aalen::CumCoef;
use ctmsm_core::expand::ExpandedTable;
use ctmsm_core::transform::ParamPath;
use ctmsm_core::{build_history, Baseline, EventHistory, EventKind, EventRecord, StepPath, WeightSet};
use serde::Serialize;

use crate::error::{CliError, CliResult};

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.into(), source })?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| CliError::Io { path: path.into(), source })
}

fn reader(path: &Path) -> CliResult<csv::Reader<File>> {
    let file = File::open(path).map_err(|source| CliError::Io { path: path.into(), source })?;
    Ok(csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file))
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> CliError + '_ {
    move |source| CliError::Csv { path: path.into(), source }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.into(), source }
}

fn parse_f64(path: &Path, line: u64, field: &str) -> CliResult<f64> {
    field.parse().map_err(|_| CliError::Parse {
        path: path.into(),
        line,
        message: format!("`{field}` is not a number"),
    })
}

fn parse_u64(path: &Path, line: u64, field: &str) -> CliResult<u64> {
    field.parse().map_err(|_| CliError::Parse {
        path: path.into(),
        line,
        message: format!("`{field}` is not a subject id"),
    })
}

fn expect_header(path: &Path, rdr: &mut csv::Reader<File>, expected: &[&str]) -> CliResult<()> {
    let headers = rdr.headers().map_err(csv_err(path))?;
    let found: Vec<&str> = headers.iter().collect();
    if found.len() < expected.len() || found[..expected.len()] != *expected {
        return Err(CliError::Parse {
            path: path.into(),
            line: 1,
            message: format!("expected columns {}, found {}", expected.join(","), found.join(",")),
        });
    }
    Ok(())
}

/// Long-format events: `id,time,kind,value` with `kind` one of A, L, D, C
/// and `value` an optional `;`-separated payload.
pub fn read_events(path: &Path) -> CliResult<Vec<EventRecord>> {
    let mut rdr = reader(path)?;
    expect_header(path, &mut rdr, &["id", "time", "kind"])?;
    let mut out = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err(path))?;
        let line = k as u64 + 2;
        let id = parse_u64(path, line, rec.get(0).unwrap_or(""))?;
        let time = parse_f64(path, line, rec.get(1).unwrap_or(""))?;
        let kind_text = rec.get(2).unwrap_or("");
        let kind = EventKind::from_code(kind_text).ok_or_else(|| CliError::Parse {
            path: path.into(),
            line,
            message: format!("unknown event kind `{kind_text}`"),
        })?;
        let payload = match rec.get(3).filter(|v| !v.is_empty()) {
            Some(v) => Some(v.split(';').map(|x| parse_f64(path, line, x.trim())).collect::<CliResult<Vec<_>>>()?),
            None => None,
        };
        out.push(EventRecord { subject: id, time, kind, payload });
    }
    Ok(out)
}

/// Baseline table: `id` followed by named numeric columns. Every subject of
/// the cohort has a row, including those without events.
pub fn read_baseline(path: &Path) -> CliResult<Baseline> {
    let mut rdr = reader(path)?;
    expect_header(path, &mut rdr, &["id"])?;
    let names: Vec<String> = rdr.headers().map_err(csv_err(path))?.iter().skip(1).map(String::from).collect();
    let mut baseline = Baseline::new(names);
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err(path))?;
        let line = k as u64 + 2;
        let id = parse_u64(path, line, rec.get(0).unwrap_or(""))?;
        let values = rec.iter().skip(1).map(|v| parse_f64(path, line, v)).collect::<CliResult<Vec<_>>>()?;
        baseline.push(id, values);
    }
    Ok(baseline)
}

pub fn read_history(events: &Path, baseline: Option<&Path>, horizon: f64) -> CliResult<EventHistory> {
    let records = read_events(events)?;
    let baseline = match baseline {
        Some(p) => read_baseline(p)?,
        None => Baseline::default(),
    };
    Ok(build_history(records, baseline, horizon)?)
}

pub fn write_events(path: &Path, history: &EventHistory) -> CliResult<()> {
    let mut w = create(path)?;
    let err = io_err(path);
    writeln!(w, "id,time,kind,value").map_err(&err)?;
    for r in history.records() {
        let value = r
            .payload
            .as_ref()
            .map(|p| p.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(";"))
            .unwrap_or_default();
        writeln!(w, "{},{},{},{}", r.subject, r.time, r.kind.code(), value).map_err(&err)?;
    }
    w.flush().map_err(&err)
}

pub fn write_baseline(path: &Path, history: &EventHistory) -> CliResult<()> {
    let mut w = create(path)?;
    let err = io_err(path);
    let mut header = String::from("id");
    for name in history.baseline_names() {
        header.push(',');
        header.push_str(name);
    }
    writeln!(w, "{header}").map_err(&err)?;
    for (idx, id) in history.subject_ids().iter().enumerate() {
        let mut line = id.to_string();
        for v in history.baseline_row(idx) {
            line.push(',');
            line.push_str(&v.to_string());
        }
        writeln!(w, "{line}").map_err(&err)?;
    }
    w.flush().map_err(&err)
}

/// Weight paths as `id,time,value`: one row at time 0 with the initial value
/// and one row per jump.
pub fn write_weights(path: &Path, history: &EventHistory, weights: &WeightSet) -> CliResult<()> {
    let mut w = create(path)?;
    let err = io_err(path);
    writeln!(w, "id,time,value").map_err(&err)?;
    for (id, p) in history.subject_ids().iter().zip(&weights.paths) {
        writeln!(w, "{id},0,{}", p.initial()).map_err(&err)?;
        for (t, v) in p.jump_times().iter().zip(p.values()) {
            writeln!(w, "{id},{t},{v}").map_err(&err)?;
        }
    }
    w.flush().map_err(&err)
}

/// Reads weight paths written by [`write_weights`]; subjects missing from the
/// file get unit weight.
pub fn read_weights(path: &Path, history: &EventHistory) -> CliResult<WeightSet> {
    let mut rdr = reader(path)?;
    expect_header(path, &mut rdr, &["id", "time", "value"])?;
    let mut paths: Vec<Option<StepPath>> = vec![None; history.n()];
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err(path))?;
        let line = k as u64 + 2;
        let id = parse_u64(path, line, rec.get(0).unwrap_or(""))?;
        let time = parse_f64(path, line, rec.get(1).unwrap_or(""))?;
        let value = parse_f64(path, line, rec.get(2).unwrap_or(""))?;
        let idx = history.index_of(id)?;
        let bad = |message: &str| CliError::Parse { path: path.into(), line, message: message.into() };
        match &mut paths[idx] {
            slot @ None => {
                if time != 0.0 {
                    return Err(bad("first row of a subject must be at time 0"));
                }
                *slot = Some(StepPath::constant(value));
            }
            Some(p) => {
                let last = p.jump_times().last().copied().unwrap_or(0.0);
                if !(time > last) {
                    return Err(bad("times must increase within a subject"));
                }
                p.push(time, value);
            }
        }
    }
    Ok(WeightSet {
        paths: paths.into_iter().map(|p| p.unwrap_or_else(|| StepPath::constant(1.0))).collect(),
        truncation_bound: None,
        provenance: ctmsm_core::weights::Provenance::Combined,
    })
}

/// `time,increment_<col>..,cumulative_<col>..`.
pub fn write_cumcoef(path: &Path, fit: &CumCoef) -> CliResult<()> {
    let mut w = create(path)?;
    let err = io_err(path);
    let mut header = vec!["time".to_string()];
    header.extend(fit.columns.iter().map(|c| format!("increment_{c}")));
    header.extend(fit.columns.iter().map(|c| format!("cumulative_{c}")));
    writeln!(w, "{}", header.join(",")).map_err(&err)?;
    for k in 0..fit.times.len() {
        let mut line = fit.times[k].to_string();
        for v in fit.increments[k].iter().chain(&fit.cumulative[k]) {
            line.push(',');
            line.push_str(&v.to_string());
        }
        writeln!(w, "{line}").map_err(&err)?;
    }
    w.flush().map_err(&err)
}

pub fn read_cumcoef(path: &Path) -> CliResult<CumCoef> {
    let mut rdr = reader(path)?;
    let headers: Vec<String> = rdr.headers().map_err(csv_err(path))?.iter().map(String::from).collect();
    let bad_header = || CliError::Parse {
        path: path.into(),
        line: 1,
        message: "expected time,increment_*,cumulative_* columns".into(),
    };
    if headers.first().map(String::as_str) != Some("time") || headers.len() % 2 != 1 {
        return Err(bad_header());
    }
    let p = (headers.len() - 1) / 2;
    let columns = headers[1..=p]
        .iter()
        .map(|h| h.strip_prefix("increment_").map(String::from).ok_or_else(bad_header))
        .collect::<CliResult<Vec<_>>>()?;
    let mut fit = CumCoef { columns, times: vec![], increments: vec![], cumulative: vec![], skipped_times: vec![] };
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err(path))?;
        let line = k as u64 + 2;
        let vals = rec.iter().map(|v| parse_f64(path, line, v)).collect::<CliResult<Vec<_>>>()?;
        if vals.len() != 2 * p + 1 {
            return Err(CliError::Parse { path: path.into(), line, message: "wrong number of fields".into() });
        }
        fit.times.push(vals[0]);
        fit.increments.push(vals[1..=p].to_vec());
        fit.cumulative.push(vals[p + 1..].to_vec());
    }
    Ok(fit)
}

#[derive(Serialize)]
struct CumCoefMeta<'a> {
    columns: &'a [String],
    event_times: usize,
    skipped_times: &'a [f64],
    weights: &'a str,
}

pub fn write_cumcoef_meta(path: &Path, fit: &CumCoef, weights: &str) -> CliResult<()> {
    write_json(
        path,
        &CumCoefMeta {
            columns: &fit.columns,
            event_times: fit.times.len(),
            skipped_times: &fit.skipped_times,
            weights,
        },
    )
}

/// `time,state_1..state_d`, first row the initial state at time 0.
pub fn write_param_path(path: &Path, param: &ParamPath) -> CliResult<()> {
    let mut w = create(path)?;
    let err = io_err(path);
    let d = param.initial().len();
    let header: Vec<String> =
        std::iter::once("time".to_string()).chain((1..=d).map(|k| format!("state_{k}"))).collect();
    writeln!(w, "{}", header.join(",")).map_err(&err)?;
    let row = |t: f64, v: &[f64]| {
        std::iter::once(t.to_string()).chain(v.iter().map(|x| x.to_string())).collect::<Vec<_>>().join(",")
    };
    writeln!(w, "{}", row(0.0, param.initial())).map_err(&err)?;
    for (t, v) in param.jump_times().iter().zip(param.values()) {
        writeln!(w, "{}", row(*t, v)).map_err(&err)?;
    }
    w.flush().map_err(&err)
}

/// `id,time,event,<design columns>,weight`.
pub fn write_expanded(path: &Path, table: &ExpandedTable) -> CliResult<()> {
    let mut w = create(path)?;
    let err = io_err(path);
    let mut header = vec!["id".to_string(), "time".into(), "event".into()];
    header.extend(table.columns.iter().cloned());
    header.push("weight".into());
    writeln!(w, "{}", header.join(",")).map_err(&err)?;
    for r in &table.rows {
        let mut line = format!("{},{},{}", r.subject, r.time, r.event as u8);
        for v in &r.design {
            line.push(',');
            line.push_str(&v.to_string());
        }
        line.push(',');
        line.push_str(&r.weight.to_string());
        writeln!(w, "{line}").map_err(&err)?;
    }
    w.flush().map_err(&err)
}

/// A table of named numeric columns, e.g. curves on a time grid.
pub fn write_table(path: &Path, columns: &[String], rows: &[Vec<f64>]) -> CliResult<()> {
    let mut w = create(path)?;
    let err = io_err(path);
    writeln!(w, "{}", columns.join(",")).map_err(&err)?;
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(w, "{}", line.join(",")).map_err(&err)?;
    }
    w.flush().map_err(&err)
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> CliResult<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|source| CliError::Json { path: path.into(), source })?;
    writeln!(w).and_then(|_| w.flush()).map_err(io_err(path))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|source| CliError::Json { path: path.into(), source })
}
