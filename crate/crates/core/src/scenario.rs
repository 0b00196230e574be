//! Synthetic event logs for demos and tests.
//!
//! Logs start at t = 0 and use the default 30-minute period. Each log
//! carries `# origin_ms` and `# horizon_ms` directives so replay covers
//! exactly the requested number of periods.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ingest::{EventKind, RawEvent};

pub const SCENARIO_PERIOD_MS: u64 = 1_800_000;

/// Mean number of notification glances per hour in `notification-storm`.
pub const STORM_GLANCES_PER_HOUR: f64 = 12.0;
/// Glance length bounds (ms); always below the default 30 s threshold.
pub const GLANCE_MIN_MS: u64 = 3_000;
pub const GLANCE_MAX_MS: u64 = 15_000;
/// Share of the horizon that is quiet morning / busy midday in `typical-day`.
pub const MORNING_FRACTION: f64 = 0.25;
pub const MIDDAY_FRACTION: f64 = 0.45;
/// Midday session and gap lengths (ms).
pub const BURST_MIN_MS: u64 = 5 * 60_000;
pub const BURST_MAX_MS: u64 = 25 * 60_000;
pub const GAP_MIN_MS: u64 = 5 * 60_000;
pub const GAP_MAX_MS: u64 = 20 * 60_000;
/// Chance that a midday session contains a phone call, and its length bounds (ms).
pub const CALL_PROBABILITY: f64 = 0.25;
pub const CALL_MIN_MS: u64 = 60_000;
pub const CALL_MAX_MS: u64 = 4 * 60_000;
/// Evening glance rate per hour in `typical-day`.
pub const EVENING_GLANCES_PER_HOUR: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    TypicalDay,
    Uninterrupted,
    Idle,
    NotificationStorm,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [
        Scenario::TypicalDay,
        Scenario::Uninterrupted,
        Scenario::Idle,
        Scenario::NotificationStorm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::TypicalDay => "typical-day",
            Scenario::Uninterrupted => "uninterrupted",
            Scenario::Idle => "idle",
            Scenario::NotificationStorm => "notification-storm",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown scenario `{0}` (expected typical-day, uninterrupted, idle or notification-storm)")]
pub struct UnknownScenario(pub String);

impl FromStr for Scenario {
    type Err = UnknownScenario;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| UnknownScenario(s.to_string()))
    }
}

/// Events of a scenario over `horizon_periods` periods, in time order.
pub fn scenario_events(scenario: Scenario, seed: u64, horizon_periods: u64) -> Vec<RawEvent> {
    let horizon = horizon_periods * SCENARIO_PERIOD_MS;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut events = Vec::new();
    match scenario {
        Scenario::Idle => {}
        Scenario::Uninterrupted => {
            if horizon > 0 {
                events.push(RawEvent::new(0, EventKind::ScreenOn));
                events.push(RawEvent::new(horizon, EventKind::ScreenOff));
            }
        }
        Scenario::NotificationStorm => {
            glances(&mut rng, &mut events, 0, horizon, STORM_GLANCES_PER_HOUR);
        }
        Scenario::TypicalDay => {
            let midday_start = (horizon as f64 * MORNING_FRACTION) as u64;
            let evening_start = (horizon as f64 * (MORNING_FRACTION + MIDDAY_FRACTION)) as u64;
            bursts(&mut rng, &mut events, midday_start, evening_start);
            glances(&mut rng, &mut events, evening_start, horizon, EVENING_GLANCES_PER_HOUR);
        }
    }
    events
}

/// Scatters short glances over `[from, to)` with exponential gaps.
fn glances(rng: &mut ChaCha8Rng, out: &mut Vec<RawEvent>, from: u64, to: u64, per_hour: f64) {
    let mean_gap_ms = 3_600_000.0 / per_hour;
    let mut t = from;
    loop {
        let gap = -mean_gap_ms * (1.0 - rng.gen::<f64>()).ln();
        t += gap as u64;
        let len = rng.gen_range(GLANCE_MIN_MS..=GLANCE_MAX_MS);
        if t + len > to {
            break;
        }
        out.push(RawEvent::new(t, EventKind::ScreenOn));
        out.push(RawEvent::new(t + len, EventKind::ScreenOff));
        t += len;
    }
}

/// Alternates sessions and gaps over `[from, to)`; some sessions hold a call.
fn bursts(rng: &mut ChaCha8Rng, out: &mut Vec<RawEvent>, from: u64, to: u64) {
    let mut t = from + rng.gen_range(0..=GAP_MAX_MS);
    while t < to {
        let end = (t + rng.gen_range(BURST_MIN_MS..=BURST_MAX_MS)).min(to);
        out.push(RawEvent::new(t, EventKind::ScreenOn));
        if rng.gen_bool(CALL_PROBABILITY) && end - t > CALL_MAX_MS {
            let call_start = rng.gen_range(t..end - CALL_MAX_MS);
            let call_end = call_start + rng.gen_range(CALL_MIN_MS..=CALL_MAX_MS);
            out.push(RawEvent::new(call_start, EventKind::CallStart));
            out.push(RawEvent::new(call_end, EventKind::CallEnd));
        }
        out.push(RawEvent::new(end, EventKind::ScreenOff));
        t = end + rng.gen_range(GAP_MIN_MS..=GAP_MAX_MS);
    }
}

/// Scenario log text, deterministic in `(scenario, seed, horizon_periods)`.
pub fn gen_scenario(scenario: Scenario, seed: u64, horizon_periods: u64) -> String {
    let mut text = String::new();
    let _ = writeln!(text, "# scenario: {scenario} seed {seed} periods {horizon_periods}");
    let _ = writeln!(text, "# origin_ms: 0");
    let _ = writeln!(text, "# horizon_ms: {}", horizon_periods * SCENARIO_PERIOD_MS);
    for event in scenario_events(scenario, seed, horizon_periods) {
        text.push_str(&event.to_json());
        text.push('\n');
    }
    text
}
