//! Batch replay of an event log through ingestion and the engine.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{Engine, EngineError, EngineParams, Rgb, TemperatureMessage};
use crate::ingest::{active_intervals, assign_to_periods, EventLog, IngestError, PeriodGrid};

/// Per-period pipeline state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimelineRecord {
    #[serde(rename = "period")]
    pub period_index: u64,
    pub start_ms: u64,
    pub u: f64,
    pub y: f64,
    pub level: u8,
    #[serde(rename = "color_hex")]
    pub color: Rgb,
    pub phrase: String,
}

impl TimelineRecord {
    pub fn message(&self) -> TemperatureMessage {
        TemperatureMessage {
            period_index: self.period_index,
            level: self.level,
            color: self.color,
            phrase: self.phrase.clone(),
        }
    }
}

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("invalid parameters: {0}")]
    Params(#[from] EngineError),
    #[error("{path}:{line}: {message}")]
    Input { path: String, line: usize, message: String },
    #[error("{0}")]
    Ingest(IngestError),
    #[error("reading {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("origin {origin_ms} ms is after the first event at {first_ms} ms")]
    OriginAfterEvents { origin_ms: u64, first_ms: u64 },
}

impl From<IngestError> for ReplayError {
    fn from(e: IngestError) -> Self {
        ReplayError::Ingest(e)
    }
}

impl ReplayError {
    /// True for errors in the caller's settings rather than the log.
    pub fn is_usage(&self) -> bool {
        matches!(self, ReplayError::Params(_))
    }
}

/// Replays log text. The grid origin is, in order of preference,
/// `origin_ms`, the log's `origin_ms` directive, or the first event
/// rounded down to a whole period.
pub fn run_replay(
    text: &str,
    params: &EngineParams,
    origin_ms: Option<u64>,
) -> Result<Vec<TimelineRecord>, ReplayError> {
    params.validate()?;
    let log = EventLog::parse(text)?;
    replay_log(&log, params, origin_ms)
}

/// Like [`run_replay`], reading from a file; parse errors carry the path.
pub fn run_replay_file(
    path: &Path,
    params: &EngineParams,
    origin_ms: Option<u64>,
) -> Result<Vec<TimelineRecord>, ReplayError> {
    params.validate()?;
    let display = path.display().to_string();
    let text = std::fs::read_to_string(path)
        .map_err(|source| ReplayError::Io { path: display.clone(), source })?;
    let log = EventLog::parse(&text).map_err(|e| match e {
        IngestError::Parse { line, message } => ReplayError::Input { path: display, line, message },
        other => ReplayError::Ingest(other),
    })?;
    replay_log(&log, params, origin_ms)
}

pub fn replay_log(
    log: &EventLog,
    params: &EngineParams,
    origin_ms: Option<u64>,
) -> Result<Vec<TimelineRecord>, ReplayError> {
    let mut engine = Engine::new(*params)?;
    let first = log.events.iter().map(|e| e.timestamp_ms).min();
    let grid = match origin_ms.or(log.origin_ms) {
        Some(origin) => PeriodGrid::new(origin, params.sampling_period_ms)?,
        None => PeriodGrid::aligned(first.unwrap_or(0), params.sampling_period_ms)?,
    };
    if let Some(first_ms) = first.filter(|&f| f < grid.origin_ms) {
        return Err(ReplayError::OriginAfterEvents { origin_ms: grid.origin_ms, first_ms });
    }

    let Some(horizon) = log.horizon().filter(|&h| h > grid.origin_ms) else {
        return Ok(Vec::new());
    };
    let last_period = grid.period_of(horizon - 1).expect("horizon is past the origin");

    let active = active_intervals(&log.events, horizon);
    let samples = assign_to_periods(&active, &grid, params, last_period)?;

    samples
        .into_iter()
        .map(|sample| {
            let message = engine.advance(sample.usage_factor)?;
            Ok(TimelineRecord {
                period_index: message.period_index,
                start_ms: grid.period_start(sample.period_index),
                u: sample.usage_factor,
                y: engine.state().overall_usage,
                level: message.level,
                color: message.color,
                phrase: message.phrase,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Jsonl,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "jsonl" => Ok(OutputFormat::Jsonl),
            other => Err(format!("unknown format `{other}` (expected csv or jsonl)")),
        }
    }
}

pub const CSV_HEADER: &str = "period,start_ms,u,y,level,color_hex,phrase";

/// Formats `x` with six significant digits, trailing zeros trimmed.
pub fn six_significant(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_finite() { "0".into() } else { x.to_string() };
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).max(0) as usize;
    let mut s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.truncate(s.trim_end_matches('0').trim_end_matches('.').len());
    }
    s
}

fn rounded(x: f64) -> f64 {
    six_significant(x).parse().expect("formatted float parses")
}

pub fn render(records: &[TimelineRecord], format: OutputFormat) -> String {
    let mut out = String::new();
    match format {
        OutputFormat::Csv => {
            out.push_str(CSV_HEADER);
            out.push('\n');
            for r in records {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    r.period_index,
                    r.start_ms,
                    six_significant(r.u),
                    six_significant(r.y),
                    r.level,
                    r.color,
                    r.phrase
                );
            }
        }
        OutputFormat::Jsonl => {
            for r in records {
                let printed = TimelineRecord { u: rounded(r.u), y: rounded(r.y), ..r.clone() };
                out.push_str(&serde_json::to_string(&printed).expect("record serializes"));
                out.push('\n');
            }
        }
    }
    out
}
