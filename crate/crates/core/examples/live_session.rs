//! Drives a live session by hand: typing bursts, a notification glance
//! straddling a period boundary, then a reset.
//!
//!     cargo run -p heatkb --example live_session

use heatkb::engine::EngineParams;
use heatkb::ingest::{EventKind, RawEvent};
use heatkb::service::Session;

const PERIOD: u64 = 1_800_000;

fn main() {
    let mut session = Session::new(EngineParams::default(), 0).unwrap();

    // An hour of typing, one key every 1.5 s.
    for i in 0..2_400u64 {
        session.keypress(i * 1_500);
    }
    // A glance that starts before the first boundary and ends after it.
    session.ingest_event(RawEvent::new(3 * PERIOD - 4_000, EventKind::ScreenOn)).unwrap();
    session.ingest_event(RawEvent::new(3 * PERIOD + 6_000, EventKind::ScreenOff)).unwrap();

    for n in 1..=6u64 {
        for msg in session.advance_to(n * PERIOD + 30_000) {
            println!("period {:>2}: {:<12} {}", msg.period_index, msg.phrase, msg.color);
        }
    }
    println!("y = {:.4}", session.snapshot().overall_usage);

    let cold = session.reset();
    println!("after reset: {} {}", cold.phrase, cold.color);
}
