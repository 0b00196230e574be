use serde::Serialize;
use thiserror::Error;

use crate::engine::{usage_from_total, Engine, EngineError, EngineParams, TemperatureMessage};
use crate::ingest::{
    active_intervals, credited_usage, push_interval, union_intervals, ActiveInterval, PeriodGrid,
    RawEvent,
};

/// Screen-on time credited after each keypress, in simulated ms.
pub const KEYPRESS_GRACE_MS: u64 = 2_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SessionError {
    #[error("event at {timestamp_ms} ms belongs to an already closed period (cutoff {cutoff_ms} ms)")]
    Stale { timestamp_ms: u64, cutoff_ms: u64 },
    #[error("event at {timestamp_ms} ms precedes the session origin {origin_ms} ms")]
    BeforeOrigin { timestamp_ms: u64, origin_ms: u64 },
}

/// Read-only view of a session.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Snapshot {
    pub current: Option<TemperatureMessage>,
    pub overall_usage: f64,
    pub next_period_index: u64,
    pub sim_time_ms: u64,
    pub params: EngineParams,
}

/// Live counterpart of replay: events arrive over time and each period is
/// closed once the clock has moved far enough past its end.
///
/// Period `n` closes when the clock reaches the end of `n` plus the
/// short-interval threshold (or the keypress grace, if longer). By then any
/// interval that began in `n` and is still open is already too long to be a
/// glance, so its classification and its share of `n` match what replay
/// computes from the complete log.
#[derive(Debug, Clone)]
pub struct Session {
    engine: Engine,
    grid: PeriodGrid,
    events: Vec<RawEvent>,
    keypresses: Vec<ActiveInterval>,
    current: Option<TemperatureMessage>,
    now_ms: u64,
}

impl Session {
    pub fn new(params: EngineParams, origin_ms: u64) -> Result<Self, EngineError> {
        let engine = Engine::new(params)?;
        let grid = PeriodGrid { origin_ms, period_ms: params.sampling_period_ms };
        Ok(Self {
            engine,
            grid,
            events: Vec::new(),
            keypresses: Vec::new(),
            current: None,
            now_ms: origin_ms,
        })
    }

    pub fn params(&self) -> &EngineParams {
        self.engine.params()
    }

    pub fn grid(&self) -> PeriodGrid {
        self.grid
    }

    pub fn now_ms(&self) -> u64 {
        self.now_ms
    }

    pub fn current(&self) -> Option<&TemperatureMessage> {
        self.current.as_ref()
    }

    /// Index of the period still accumulating activity.
    pub fn open_period(&self) -> u64 {
        self.engine.state().next_period_index
    }

    fn close_delay_ms(&self) -> u64 {
        self.params().notification_threshold_ms.max(KEYPRESS_GRACE_MS)
    }

    /// Events before this instant can no longer be accepted.
    pub fn cutoff_ms(&self) -> u64 {
        self.grid.period_start(self.open_period())
    }

    pub fn ingest_event(&mut self, event: RawEvent) -> Result<(), SessionError> {
        if event.timestamp_ms < self.grid.origin_ms {
            return Err(SessionError::BeforeOrigin {
                timestamp_ms: event.timestamp_ms,
                origin_ms: self.grid.origin_ms,
            });
        }
        let cutoff_ms = self.cutoff_ms();
        if event.timestamp_ms < cutoff_ms {
            return Err(SessionError::Stale { timestamp_ms: event.timestamp_ms, cutoff_ms });
        }
        if !self.events.contains(&event) {
            self.events.push(event);
        }
        Ok(())
    }

    /// Marks the screen active from `now_ms` for the grace window, merging
    /// with a window that is still running.
    pub fn keypress(&mut self, now_ms: u64) {
        let now_ms = now_ms.max(self.cutoff_ms());
        push_interval(&mut self.keypresses, now_ms, now_ms + KEYPRESS_GRACE_MS);
    }

    /// Moves the clock to `now_ms` (never backwards) and returns the
    /// messages of every period that closed, oldest first.
    pub fn advance_to(&mut self, now_ms: u64) -> Vec<TemperatureMessage> {
        self.now_ms = self.now_ms.max(now_ms);
        let mut closed = Vec::new();
        loop {
            let period = self.open_period();
            let closes_at = self.grid.period_start(period + 1) + self.close_delay_ms();
            if self.now_ms < closes_at {
                break;
            }
            let message = self.close_period(period);
            closed.push(message);
        }
        closed
    }

    fn close_period(&mut self, period: u64) -> TemperatureMessage {
        let known: Vec<RawEvent> =
            self.events.iter().copied().filter(|e| e.timestamp_ms <= self.now_ms).collect();
        let from_events = active_intervals(&known, self.now_ms);
        let active = union_intervals(&from_events, &self.keypresses);
        let credited = credited_usage(&active, &self.grid, self.params(), period..period + 1)[0];
        let u = usage_from_total(credited, self.params().sampling_period_ms);
        let message = self.engine.advance(u).expect("usage factor is within [0, 1]");
        self.current = Some(message.clone());
        // TODO: drop events and keypress windows that can no longer touch an open period
        message
    }

    /// Cold-starts the engine and forgets all activity so far. Returns the
    /// level-0 message that replaces the current one.
    pub fn reset(&mut self) -> TemperatureMessage {
        self.engine.reset();
        self.events.clear();
        self.keypresses.clear();
        let period = self.current.as_ref().map_or(0, |m| m.period_index);
        let message = self.engine.cold_message(period);
        self.current = Some(message.clone());
        message
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            current: self.current.clone(),
            overall_usage: self.engine.state().overall_usage,
            next_period_index: self.engine.state().next_period_index,
            sim_time_ms: self.now_ms,
            params: *self.params(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::Rgb;
    use crate::ingest::EventKind::*;

    const PERIOD: u64 = 1_800_000;

    fn session() -> Session {
        Session::new(EngineParams::default(), 0).unwrap()
    }

    #[test]
    fn periods_close_after_the_threshold_delay() {
        let mut s = session();
        assert!(s.advance_to(PERIOD).is_empty());
        assert!(s.advance_to(PERIOD + 29_999).is_empty());
        let msgs = s.advance_to(PERIOD + 30_000);
        assert_eq!(msgs.len(), 1);
        assert_eq!(msgs[0].period_index, 0);
        assert_eq!(msgs[0].color, Rgb::NEUTRAL_GRAY);
        assert_eq!(s.advance_to(5 * PERIOD).len(), 3);
    }

    #[test]
    fn glance_straddling_a_boundary_counts_in_its_start_period() {
        let mut s = session();
        s.ingest_event(RawEvent::new(PERIOD - 5_000, ScreenOn)).unwrap();
        s.advance_to(PERIOD + 5_000);
        s.ingest_event(RawEvent::new(PERIOD + 5_000, ScreenOff)).unwrap();
        let msgs = s.advance_to(PERIOD + 30_000);
        assert_eq!(msgs.len(), 1);
        let y = s.snapshot().overall_usage;
        assert!((y - 0.2 * 300.0 / 1800.0).abs() < 1e-15);
    }

    #[test]
    fn stale_and_duplicate_events() {
        let mut s = session();
        s.advance_to(2 * PERIOD);
        assert!(matches!(
            s.ingest_event(RawEvent::new(10, ScreenOn)),
            Err(SessionError::Stale { .. })
        ));
        let e = RawEvent::new(PERIOD + 1, ScreenOn);
        s.ingest_event(e).unwrap();
        s.ingest_event(e).unwrap();
        assert_eq!(s.events.len(), 1);

        let mut late = Session::new(EngineParams::default(), 1_000).unwrap();
        assert!(matches!(
            late.ingest_event(RawEvent::new(0, ScreenOn)),
            Err(SessionError::BeforeOrigin { .. })
        ));
    }

    #[test]
    fn keypresses_merge_within_grace() {
        let mut s = session();
        s.keypress(1_000);
        s.keypress(2_500);
        s.keypress(10_000);
        assert_eq!(
            s.keypresses,
            vec![
                ActiveInterval { start_ms: 1_000, end_ms: 4_500 },
                ActiveInterval { start_ms: 10_000, end_ms: 12_000 }
            ]
        );
    }

    #[test]
    fn continuous_typing_heats_to_level_one() {
        let mut s = session();
        let mut t = 0;
        while t < PERIOD {
            s.keypress(t);
            t += 500;
        }
        let msgs = s.advance_to(PERIOD + 30_000);
        assert_eq!(msgs[0].level, 1);
    }

    #[test]
    fn reset_cools_and_stays_cold() {
        let mut s = session();
        s.ingest_event(RawEvent::new(0, ScreenOn)).unwrap();
        s.advance_to(4 * PERIOD);
        assert!(s.current().unwrap().level > 0);
        let cold = s.reset();
        assert_eq!(cold.level, 0);
        assert_eq!(s.snapshot().current.as_ref(), Some(&cold));
        for m in s.advance_to(40 * PERIOD) {
            assert_eq!(m.level, 0);
        }
        assert_eq!(s.snapshot().overall_usage, 0.0);
    }

    #[test]
    fn clock_never_runs_backwards() {
        let mut s = session();
        s.advance_to(PERIOD * 3);
        s.advance_to(10);
        assert_eq!(s.now_ms(), PERIOD * 3);
    }
}
