//! Helpers shared by the integration tests.
#![allow(dead_code)]

use std::sync::Arc;

use futures::StreamExt;
use heatkb::engine::{EngineParams, TemperatureMessage};
use heatkb::ingest::{EventKind, RawEvent};
use heatkb::service::{
    FeedbackService, ManualClock, ScaledClock, ServiceConfig, StreamMessage, KEYPRESS_GRACE_MS,
};
use rand::Rng;

/// Usage factors by walking the log one second at a time.
///
/// Every timestamp and duration must be a whole number of seconds. Each
/// second is marked screen-on / in-call by replaying the events that fire
/// at its start; runs of screen-on, not-in-call seconds are the active
/// intervals.
pub fn per_second_usage(
    events: &[RawEvent],
    origin_ms: u64,
    params: &EngineParams,
    last_period: u64,
) -> Vec<f64> {
    assert!(events.iter().all(|e| e.timestamp_ms % 1000 == 0));
    assert_eq!(params.sampling_period_ms % 1000, 0);
    let origin = origin_ms / 1000;
    let period = params.sampling_period_ms / 1000;
    let end = origin + (last_period + 1) * period;

    let mut sorted = events.to_vec();
    sorted.sort_by_key(|e| e.timestamp_ms);
    let mut next = 0;
    let mut screen = false;
    let mut call = false;
    let mut active = Vec::new();
    for second in origin..end {
        while next < sorted.len() && sorted[next].timestamp_ms / 1000 <= second {
            match sorted[next].kind {
                EventKind::ScreenOn => screen = true,
                EventKind::ScreenOff => screen = false,
                EventKind::CallStart => call = true,
                EventKind::CallEnd => call = false,
            }
            next += 1;
        }
        active.push(screen && !call);
    }

    let period_of = |second: u64| ((second - origin) / period) as usize;
    let mut credit_ms = vec![0u64; (last_period + 1) as usize];
    let mut s = origin;
    while s < end {
        if !active[(s - origin) as usize] {
            s += 1;
            continue;
        }
        let run_start = s;
        while s < end && active[(s - origin) as usize] {
            s += 1;
        }
        let len_ms = (s - run_start) * 1000;
        if len_ms < params.notification_threshold_ms {
            credit_ms[period_of(run_start)] += len_ms.max(params.notification_correction_ms);
        } else {
            for second in run_start..s {
                credit_ms[period_of(second)] += 1000;
            }
        }
    }
    credit_ms
        .iter()
        .map(|&c| (c as f64 / params.sampling_period_ms as f64).min(1.0))
        .collect()
}

/// Random whole-second log of at most `max_events` events inside
/// `[origin, origin + periods * period]`.
pub fn random_log(
    rng: &mut impl Rng,
    origin_ms: u64,
    period_ms: u64,
    periods: u64,
    max_events: usize,
) -> Vec<RawEvent> {
    let span_s = periods * period_ms / 1000;
    let kinds = [EventKind::ScreenOn, EventKind::ScreenOff, EventKind::CallStart, EventKind::CallEnd];
    let n = rng.gen_range(0..=max_events);
    (0..n)
        .map(|_| {
            // screen events dominate, as on a real phone
            let kind = if rng.gen_bool(0.75) {
                kinds[rng.gen_range(0..2)]
            } else {
                kinds[rng.gen_range(2..4)]
            };
            RawEvent::new(origin_ms + rng.gen_range(0..=span_s) * 1000, kind)
        })
        .collect()
}

/// Moves a manual clock as a `time_scale` wall clock would be seen, at the
/// last wall instant whose simulated time does not exceed `target_ms`.
pub struct ScaledDriver {
    pub clock: Arc<ManualClock>,
    origin_ms: u64,
    time_scale: f64,
}

impl ScaledDriver {
    pub fn new(origin_ms: u64, time_scale: f64) -> Self {
        Self { clock: Arc::new(ManualClock::new(origin_ms)), origin_ms, time_scale }
    }

    fn sim(&self, wall_secs: f64) -> u64 {
        ScaledClock::simulated_ms(self.origin_ms, self.time_scale, wall_secs)
    }

    /// Sets the clock to the simulated time of the latest wall instant not
    /// past `target_ms`.
    pub fn move_to(&self, target_ms: u64) -> u64 {
        let mut wall = (target_ms - self.origin_ms) as f64 / 1000.0 / self.time_scale;
        while self.sim(wall) > target_ms {
            wall = f64::from_bits(wall.to_bits() - 1);
        }
        let now = self.sim(wall);
        self.clock.set(now);
        now
    }

    /// Sets the clock to the first wall instant at or past `target_ms`.
    pub fn move_past(&self, target_ms: u64) -> u64 {
        let mut wall = (target_ms - self.origin_ms) as f64 / 1000.0 / self.time_scale;
        while self.sim(wall) < target_ms {
            wall = f64::from_bits(wall.to_bits() + 1);
        }
        let now = self.sim(wall);
        self.clock.set(now);
        now
    }
}

/// Instant at which a session has closed period `last_period` but not the
/// one after it.
pub fn close_time(params: &EngineParams, origin_ms: u64, last_period: u64) -> u64 {
    origin_ms
        + (last_period + 1) * params.sampling_period_ms
        + params.notification_threshold_ms.max(KEYPRESS_GRACE_MS)
}

/// Feeds time-ordered events into a service the way a live monitor would,
/// with the clock at `time_scale`, and returns every broadcast message.
pub fn drive_service(
    events: &[RawEvent],
    params: EngineParams,
    origin_ms: u64,
    last_period: u64,
    time_scale: f64,
) -> Vec<TemperatureMessage> {
    let driver = ScaledDriver::new(origin_ms, time_scale);
    let config = ServiceConfig { params, origin_ms, time_scale, ..ServiceConfig::default() };
    let service = FeedbackService::new(config, driver.clock.clone()).unwrap();
    let mut rx = service.subscribe();

    let mut ordered = events.to_vec();
    ordered.sort_by_key(|e| e.timestamp_ms);
    for event in ordered {
        driver.move_to(event.timestamp_ms);
        service.tick();
        service.ingest_event(event).unwrap();
    }
    driver.move_past(close_time(&params, origin_ms, last_period));
    service.tick();

    std::iter::from_fn(|| rx.try_recv().ok()).map(|m| m.message()).collect()
}

/// Reads `count` messages from an SSE response body.
pub async fn read_sse(response: reqwest::Response, count: usize) -> Vec<StreamMessage> {
    let mut body = response.bytes_stream();
    let mut buffer = String::new();
    let mut out = Vec::new();
    while out.len() < count {
        let chunk = body.next().await.expect("stream ended early").unwrap();
        buffer.push_str(std::str::from_utf8(&chunk).unwrap());
        while let Some(end) = buffer.find("\n\n") {
            let frame: String = buffer.drain(..end + 2).collect();
            for line in frame.lines() {
                if let Some(data) = line.strip_prefix("data:") {
                    out.push(serde_json::from_str(data.trim()).unwrap());
                }
            }
        }
    }
    out
}
