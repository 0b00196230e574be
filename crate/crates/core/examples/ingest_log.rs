//! From raw screen/call events to per-period usage factors: normalization,
//! call exclusion, glance correction and period assignment.
//!
//!     cargo run -p heatkb --example ingest_log

use heatkb::engine::EngineParams;
use heatkb::ingest::{
    assign_to_periods, call_intervals, normalize_events, parse_event_log, screen_intervals,
    subtract_calls, PeriodGrid,
};

const LOG: &str = r#"# a short morning
{"t":0,"kind":"screen_on"}
{"t":600000,"kind":"call_start"}
{"t":900000,"kind":"call_end"}
{"t":1500000,"kind":"screen_off"}
{"t":1500000,"kind":"screen_off"}
{"t":2000000,"kind":"screen_on"}
{"t":2008000,"kind":"screen_off"}
{"t":3500000,"kind":"screen_on"}
{"t":3700000,"kind":"screen_off"}
"#;

fn main() {
    let params = EngineParams::default();
    let events = parse_event_log(LOG).unwrap();
    let normalized = normalize_events(&events);
    println!("{} events, {} after normalization", events.len(), normalized.len());

    let horizon = 3 * params.sampling_period_ms;
    let screen = screen_intervals(&normalized, horizon);
    let calls = call_intervals(&normalized, horizon);
    let active = subtract_calls(&screen, &calls);
    for interval in &active {
        println!(
            "active {:>8} .. {:>8} ms  ({} s)",
            interval.start_ms,
            interval.end_ms,
            interval.duration_ms() / 1000
        );
    }

    let grid = PeriodGrid::new(0, params.sampling_period_ms).unwrap();
    for sample in assign_to_periods(&active, &grid, &params, 2).unwrap() {
        println!("period {}  u = {:.4}", sample.period_index, sample.usage_factor);
    }
}
