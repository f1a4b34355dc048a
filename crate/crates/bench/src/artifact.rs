//! Trace CSV, failure-map CSV and run summaries.

use grnewton::solver::{RunResult, StepTrace};
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::Path;
use thiserror::Error;

pub const TRACE_HEADER: [&str; 9] = [
    "iter",
    "f",
    "grad_dual_norm",
    "gamma",
    "backtracks",
    "step_norm",
    "oracle_calls",
    "wall_seconds",
    "accepted",
];

pub const FAILURE_MAP_HEADER: [&str; 5] = ["x1", "x2", "status", "iters", "final_f"];

#[derive(Debug, Error)]
pub enum ArtifactError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed trace: {0}")]
    Malformed(String),
}

/// Shortest decimal that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub f: f64,
    pub grad_dual_norm: f64,
    pub gamma: f64,
    pub backtracks: usize,
    pub step_norm: f64,
    pub oracle_calls: usize,
    pub wall_seconds: f64,
    pub accepted: bool,
}

impl From<&StepTrace> for TraceRow {
    fn from(t: &StepTrace) -> Self {
        Self {
            iter: t.k,
            f: t.f,
            grad_dual_norm: t.grad_dual_norm,
            gamma: t.gamma,
            backtracks: t.backtracks,
            step_norm: t.step_primal_norm,
            oracle_calls: t.oracle_calls,
            wall_seconds: t.wall_seconds,
            accepted: t.accepted,
        }
    }
}

impl TraceRow {
    fn record(&self) -> [String; 9] {
        [
            self.iter.to_string(),
            fmt_f64(self.f),
            fmt_f64(self.grad_dual_norm),
            fmt_f64(self.gamma),
            self.backtracks.to_string(),
            fmt_f64(self.step_norm),
            self.oracle_calls.to_string(),
            fmt_f64(self.wall_seconds),
            self.accepted.to_string(),
        ]
    }
}

pub fn write_trace<W: Write>(rows: &[TraceRow], out: W) -> Result<(), ArtifactError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_HEADER)?;
    for r in rows {
        w.write_record(r.record())?;
    }
    w.flush().map_err(|source| ArtifactError::Io {
        path: "<trace>".into(),
        source,
    })?;
    Ok(())
}

pub fn emit_trace_csv(trace: &[StepTrace], path: &Path) -> Result<(), ArtifactError> {
    let rows: Vec<TraceRow> = trace.iter().map(TraceRow::from).collect();
    let file = std::fs::File::create(path).map_err(|source| io_err(path, source))?;
    write_trace(&rows, std::io::BufWriter::new(file))
}

fn parse<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, line: usize) -> Result<T, ArtifactError> {
    rec.get(i)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| ArtifactError::Malformed(format!("row {line}, column {}", TRACE_HEADER[i])))
}

pub fn read_trace<R: Read>(input: R) -> Result<Vec<TraceRow>, ArtifactError> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers()?.clone();
    if header.iter().ne(TRACE_HEADER.iter().copied()) {
        return Err(ArtifactError::Malformed(format!("unexpected header {header:?}")));
    }
    let mut rows = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        rows.push(TraceRow {
            iter: parse(&rec, 0, line)?,
            f: parse(&rec, 1, line)?,
            grad_dual_norm: parse(&rec, 2, line)?,
            gamma: parse(&rec, 3, line)?,
            backtracks: parse(&rec, 4, line)?,
            step_norm: parse(&rec, 5, line)?,
            oracle_calls: parse(&rec, 6, line)?,
            wall_seconds: parse(&rec, 7, line)?,
            accepted: parse(&rec, 8, line)?,
        });
    }
    Ok(rows)
}

pub fn read_trace_csv(path: &Path) -> Result<Vec<TraceRow>, ArtifactError> {
    let file = std::fs::File::open(path).map_err(|source| io_err(path, source))?;
    read_trace(file)
}

/// Per-run summary written next to the trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub experiment: String,
    pub method: String,
    pub strategy: String,
    pub seed: u64,
    pub run_index: usize,
    pub x0: Vec<f64>,
    pub status: String,
    pub iterations: usize,
    pub oracle_calls: usize,
    pub final_f: f64,
    pub final_grad_dual_norm: f64,
    pub wall_seconds: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace_file: Option<String>,
}

impl RunSummary {
    /// Fields that can be recomputed from the trace alone.
    pub fn consistent_with(&self, rows: &[TraceRow]) -> bool {
        let Some(last) = rows.last() else {
            return false;
        };
        let same = |a: f64, b: f64| a == b || (a.is_nan() && b.is_nan());
        rows.len() == self.iterations + 1
            && last.oracle_calls == self.oracle_calls
            && same(last.f, self.final_f)
            && same(last.grad_dual_norm, self.final_grad_dual_norm)
    }
}

pub fn summarize(
    experiment: &str,
    method: &str,
    strategy: &str,
    seed: u64,
    run_index: usize,
    x0: &[f64],
    result: &RunResult,
) -> RunSummary {
    RunSummary {
        experiment: experiment.to_string(),
        method: method.to_string(),
        strategy: strategy.to_string(),
        seed,
        run_index,
        x0: x0.to_vec(),
        status: result.status.as_str().to_string(),
        iterations: result.iterations(),
        oracle_calls: result.oracle_calls,
        final_f: result.final_f(),
        final_grad_dual_norm: result.final_grad(),
        wall_seconds: result.trace.last().map(|t| t.wall_seconds).unwrap_or(0.0),
        message: result.message.clone(),
        trace_file: None,
    }
}

/// One starting point of a failure map.
#[derive(Debug, Clone, PartialEq)]
pub struct FailureCell {
    pub x1: f64,
    pub x2: f64,
    pub status: String,
    pub iters: usize,
    pub final_f: f64,
}

impl FailureCell {
    pub fn failed(&self) -> bool {
        self.status != "converged"
    }
}

pub fn write_failure_map<W: Write>(cells: &[FailureCell], out: W) -> Result<(), ArtifactError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(FAILURE_MAP_HEADER)?;
    for c in cells {
        w.write_record([fmt_f64(c.x1), fmt_f64(c.x2), c.status.clone(), c.iters.to_string(), fmt_f64(c.final_f)])?;
    }
    w.flush().map_err(|source| ArtifactError::Io {
        path: "<failure map>".into(),
        source,
    })?;
    Ok(())
}

pub fn io_err(path: &Path, source: std::io::Error) -> ArtifactError {
    ArtifactError::Io {
        path: path.display().to_string(),
        source,
    }
}
