use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

/// Source of simulated time in milliseconds.
pub trait Clock: Send + Sync {
    fn now_ms(&self) -> u64;
}

/// Wall-clock time since start, multiplied by a time scale and offset by
/// the session origin.
#[derive(Debug)]
pub struct ScaledClock {
    origin_ms: u64,
    time_scale: f64,
    started: Instant,
}

impl ScaledClock {
    pub fn start(origin_ms: u64, time_scale: f64) -> Self {
        Self { origin_ms, time_scale, started: Instant::now() }
    }

    /// Simulated time after `wall_secs` of real time.
    pub fn simulated_ms(origin_ms: u64, time_scale: f64, wall_secs: f64) -> u64 {
        origin_ms + (wall_secs * time_scale * 1000.0).floor() as u64
    }
}

impl Clock for ScaledClock {
    fn now_ms(&self) -> u64 {
        Self::simulated_ms(self.origin_ms, self.time_scale, self.started.elapsed().as_secs_f64())
    }
}

/// Clock moved by hand; for tests and scripted demos.
#[derive(Debug, Default)]
pub struct ManualClock(AtomicU64);

impl ManualClock {
    pub fn new(now_ms: u64) -> Self {
        Self(AtomicU64::new(now_ms))
    }

    pub fn set(&self, now_ms: u64) {
        self.0.store(now_ms, Ordering::SeqCst);
    }

    pub fn advance(&self, by_ms: u64) {
        self.0.fetch_add(by_ms, Ordering::SeqCst);
    }
}

impl Clock for ManualClock {
    fn now_ms(&self) -> u64 {
        self.0.load(Ordering::SeqCst)
    }
}
