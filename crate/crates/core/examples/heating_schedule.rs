//! How fast the keyboard heats up under uninterrupted use after a long
//! break, and how it cools down afterwards.
//!
//!     cargo run -p heatkb --example heating_schedule

use heatkb::engine::{Engine, EngineParams};

fn main() {
    let mut engine = Engine::new(EngineParams::default()).unwrap();
    let period_min = EngineParams::default().sampling_period_ms / 60_000;

    println!("{:>6}  {:>5}  {:>8}  {:<14} color", "hours", "u", "y", "phrase");
    for n in 0..16u64 {
        // eight busy periods, then eight idle ones
        let u = if n < 8 { 1.0 } else { 0.0 };
        let msg = engine.advance(u).unwrap();
        let hours = ((n + 1) * period_min) as f64 / 60.0;
        println!(
            "{hours:>6.1}  {u:>5.2}  {:>8.4}  {:<14} {}",
            engine.state().overall_usage,
            msg.phrase,
            msg.color
        );
    }
}
