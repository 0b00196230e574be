//! Screen and call event logs, and the active intervals derived from them.
//!
//! Log format: UTF-8, one JSON object per line,
//! `{"t": <ms>, "kind": "screen_on" | "screen_off" | "call_start" | "call_end"}`.
//! Lines starting with `#` are comments. Two comment directives are
//! understood, `# origin_ms: <int>` and `# horizon_ms: <int>`.

use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{correct_duration, usage_from_total, EngineParams, PeriodSample};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    ScreenOn,
    ScreenOff,
    CallStart,
    CallEnd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RawEvent {
    pub timestamp_ms: u64,
    pub kind: EventKind,
}

impl RawEvent {
    pub fn new(timestamp_ms: u64, kind: EventKind) -> Self {
        Self { timestamp_ms, kind }
    }

    /// Parses one log record.
    pub fn from_json(line: &str) -> Result<Self, String> {
        let wire: WireEvent = serde_json::from_str(line).map_err(|e| e.to_string())?;
        let timestamp_ms =
            u64::try_from(wire.t).map_err(|_| format!("negative timestamp {}", wire.t))?;
        Ok(Self { timestamp_ms, kind: wire.kind })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&WireEvent { t: self.timestamp_ms as i64, kind: self.kind })
            .expect("event serialization is infallible")
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireEvent {
    t: i64,
    kind: EventKind,
}

/// Half-open span `[start_ms, end_ms)` with `start_ms < end_ms`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ActiveInterval {
    pub start_ms: u64,
    pub end_ms: u64,
}

impl ActiveInterval {
    /// `None` for empty or inverted spans.
    pub fn new(start_ms: u64, end_ms: u64) -> Option<Self> {
        (start_ms < end_ms).then_some(Self { start_ms, end_ms })
    }

    pub fn duration_ms(&self) -> u64 {
        self.end_ms - self.start_ms
    }
}

/// Sampling periods laid end to end from `origin_ms`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodGrid {
    pub origin_ms: u64,
    pub period_ms: u64,
}

impl PeriodGrid {
    pub fn new(origin_ms: u64, period_ms: u64) -> Result<Self, IngestError> {
        if period_ms == 0 {
            return Err(IngestError::ZeroPeriod);
        }
        Ok(Self { origin_ms, period_ms })
    }

    /// Grid whose origin is `timestamp_ms` rounded down to a whole multiple
    /// of the period since the epoch.
    pub fn aligned(timestamp_ms: u64, period_ms: u64) -> Result<Self, IngestError> {
        if period_ms == 0 {
            return Err(IngestError::ZeroPeriod);
        }
        Self::new(timestamp_ms - timestamp_ms % period_ms, period_ms)
    }

    pub fn period_start(&self, index: u64) -> u64 {
        self.origin_ms + index * self.period_ms
    }

    /// Period containing `timestamp_ms`, or `None` before the origin.
    pub fn period_of(&self, timestamp_ms: u64) -> Option<u64> {
        timestamp_ms
            .checked_sub(self.origin_ms)
            .map(|offset| offset / self.period_ms)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IngestError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("interval [{start_ms}, {end_ms}) lies outside the period range [{range_start_ms}, {range_end_ms})")]
    OutOfRange { start_ms: u64, end_ms: u64, range_start_ms: u64, range_end_ms: u64 },
    #[error("grid period {grid_ms} ms differs from the sampling period {sampling_ms} ms")]
    GridMismatch { grid_ms: u64, sampling_ms: u64 },
    #[error("period length must be positive")]
    ZeroPeriod,
}

/// A parsed log: events in file order plus any header directives.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EventLog {
    pub events: Vec<RawEvent>,
    pub origin_ms: Option<u64>,
    pub horizon_ms: Option<u64>,
}

impl EventLog {
    pub fn parse(text: &str) -> Result<Self, IngestError> {
        let mut log = EventLog::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() {
                continue;
            }
            if let Some(comment) = trimmed.strip_prefix('#') {
                if let Some((key, value)) = comment.split_once(':') {
                    let slot = match key.trim() {
                        "origin_ms" => &mut log.origin_ms,
                        "horizon_ms" => &mut log.horizon_ms,
                        _ => continue,
                    };
                    let parsed = value.trim().parse().map_err(|_| IngestError::Parse {
                        line,
                        message: format!("bad `{}` directive value `{}`", key.trim(), value.trim()),
                    })?;
                    *slot = Some(parsed);
                }
                continue;
            }
            let event = RawEvent::from_json(trimmed)
                .map_err(|message| IngestError::Parse { line, message })?;
            log.events.push(event);
        }
        Ok(log)
    }

    /// End of the observed span: the horizon directive if present (but
    /// never before the last event), otherwise the last event.
    pub fn horizon(&self) -> Option<u64> {
        let last = self.events.iter().map(|e| e.timestamp_ms).max();
        match (self.horizon_ms, last) {
            (Some(h), Some(l)) => Some(h.max(l)),
            (h, l) => h.or(l),
        }
    }
}

/// Events of a log in file order.
pub fn parse_event_log(text: &str) -> Result<Vec<RawEvent>, IngestError> {
    EventLog::parse(text).map(|log| log.events)
}

/// Sorts events by time (stable) and drops the ones that do not pair up:
/// repeated opens of something already open, and closes of something not
/// open. Screen and call streams are paired independently.
pub fn normalize_events(events: &[RawEvent]) -> Vec<RawEvent> {
    let mut sorted = events.to_vec();
    sorted.sort_by_key(|e| e.timestamp_ms);

    let mut screen_on = false;
    let mut in_call = false;
    sorted.retain(|e| {
        let (open, is_open) = match e.kind {
            EventKind::ScreenOn => (true, &mut screen_on),
            EventKind::ScreenOff => (false, &mut screen_on),
            EventKind::CallStart => (true, &mut in_call),
            EventKind::CallEnd => (false, &mut in_call),
        };
        if open == *is_open {
            return false;
        }
        *is_open = open;
        true
    });
    sorted
}

fn paired_intervals(
    events: &[RawEvent],
    open: EventKind,
    close: EventKind,
    horizon_ms: u64,
) -> Vec<ActiveInterval> {
    let mut out = Vec::new();
    let mut started = None;
    for e in events {
        if e.kind == open && started.is_none() {
            started = Some(e.timestamp_ms);
        } else if e.kind == close {
            if let Some(start) = started.take() {
                push_interval(&mut out, start, e.timestamp_ms);
            }
        }
    }
    if let Some(start) = started {
        push_interval(&mut out, start, horizon_ms);
    }
    out
}

/// Appends `[start, end)` to a sorted list, merging it into the last
/// interval when they touch or overlap.
pub fn push_interval(out: &mut Vec<ActiveInterval>, start: u64, end: u64) {
    if start >= end {
        return;
    }
    match out.last_mut() {
        Some(last) if start <= last.end_ms => last.end_ms = last.end_ms.max(end),
        _ => out.push(ActiveInterval { start_ms: start, end_ms: end }),
    }
}

/// Screen-on spans of a normalized stream; a screen still on at the end is
/// closed at `horizon_ms`. Touching spans are merged.
pub fn screen_intervals(events: &[RawEvent], horizon_ms: u64) -> Vec<ActiveInterval> {
    paired_intervals(events, EventKind::ScreenOn, EventKind::ScreenOff, horizon_ms)
}

/// Call spans of a normalized stream, closed at `horizon_ms` if still open.
pub fn call_intervals(events: &[RawEvent], horizon_ms: u64) -> Vec<ActiveInterval> {
    paired_intervals(events, EventKind::CallStart, EventKind::CallEnd, horizon_ms)
}

/// `screen` minus every call, as maximal disjoint sorted intervals.
///
/// Both inputs must be sorted and disjoint.
pub fn subtract_calls(screen: &[ActiveInterval], calls: &[ActiveInterval]) -> Vec<ActiveInterval> {
    let mut out = Vec::new();
    let mut c = 0;
    for s in screen {
        while c < calls.len() && calls[c].end_ms <= s.start_ms {
            c += 1;
        }
        let mut cursor = s.start_ms;
        let mut k = c;
        while k < calls.len() && calls[k].start_ms < s.end_ms {
            push_interval(&mut out, cursor, calls[k].start_ms.min(s.end_ms));
            cursor = cursor.max(calls[k].end_ms);
            k += 1;
        }
        push_interval(&mut out, cursor, s.end_ms);
    }
    out
}

/// Union of two sorted, disjoint interval lists.
pub fn union_intervals(a: &[ActiveInterval], b: &[ActiveInterval]) -> Vec<ActiveInterval> {
    let mut all: Vec<_> = a.iter().chain(b).copied().collect();
    all.sort_by_key(|i| i.start_ms);
    let mut out = Vec::with_capacity(all.len());
    for i in all {
        push_interval(&mut out, i.start_ms, i.end_ms);
    }
    out
}

/// Call-excluded screen-on intervals of a raw event stream.
pub fn active_intervals(events: &[RawEvent], horizon_ms: u64) -> Vec<ActiveInterval> {
    let normalized = normalize_events(events);
    subtract_calls(
        &screen_intervals(&normalized, horizon_ms),
        &call_intervals(&normalized, horizon_ms),
    )
}

/// Corrected usage time credited to each period in `periods`.
///
/// An interval shorter than the threshold is credited as a whole, after
/// correction, to the period holding its start. A longer one contributes
/// its overlap with each period. Parts outside `periods` are ignored.
pub fn credited_usage(
    active: &[ActiveInterval],
    grid: &PeriodGrid,
    params: &EngineParams,
    periods: Range<u64>,
) -> Vec<u64> {
    let len = periods.end.saturating_sub(periods.start) as usize;
    let mut totals = vec![0u64; len];
    let slot = |index: u64| {
        periods
            .contains(&index)
            .then(|| (index - periods.start) as usize)
    };

    for interval in active {
        let duration = interval.duration_ms();
        if duration < params.notification_threshold_ms {
            if let Some(i) = grid.period_of(interval.start_ms).and_then(slot) {
                totals[i] += correct_duration(duration, params);
            }
            continue;
        }
        let first = grid.period_of(interval.start_ms).unwrap_or(0).max(periods.start);
        let last = grid
            .period_of(interval.end_ms - 1)
            .map_or(0, |p| p.min(periods.end.saturating_sub(1)));
        for index in first..=last {
            let lo = interval.start_ms.max(grid.period_start(index));
            let hi = interval.end_ms.min(grid.period_start(index + 1));
            if lo < hi {
                if let Some(i) = slot(index) {
                    totals[i] += hi - lo;
                }
            }
        }
    }
    totals
}

/// One usage sample for every period `0..=last_period`, including idle
/// ones.
pub fn assign_to_periods(
    active: &[ActiveInterval],
    grid: &PeriodGrid,
    params: &EngineParams,
    last_period: u64,
) -> Result<Vec<PeriodSample>, IngestError> {
    if grid.period_ms != params.sampling_period_ms {
        return Err(IngestError::GridMismatch {
            grid_ms: grid.period_ms,
            sampling_ms: params.sampling_period_ms,
        });
    }
    let range_start_ms = grid.origin_ms;
    let range_end_ms = grid.period_start(last_period + 1);
    if let Some(bad) = active
        .iter()
        .find(|i| i.start_ms < range_start_ms || i.end_ms > range_end_ms)
    {
        return Err(IngestError::OutOfRange {
            start_ms: bad.start_ms,
            end_ms: bad.end_ms,
            range_start_ms,
            range_end_ms,
        });
    }

    let totals = credited_usage(active, grid, params, 0..last_period + 1);
    Ok(totals
        .into_iter()
        .enumerate()
        .map(|(n, total)| PeriodSample {
            period_index: n as u64,
            usage_factor: usage_from_total(total, params.sampling_period_ms),
        })
        .collect())
}
