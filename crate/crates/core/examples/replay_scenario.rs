//! Generates a synthetic typical day and replays it into a timeline.
//!
//!     cargo run -p heatkb --example replay_scenario -- [seed]

use heatkb::engine::EngineParams;
use heatkb::replay::{render, run_replay, OutputFormat};
use heatkb::scenario::{gen_scenario, Scenario};

fn main() {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let log = gen_scenario(Scenario::TypicalDay, seed, 32);
    let records = run_replay(&log, &EngineParams::default(), None).unwrap();
    print!("{}", render(&records, OutputFormat::Csv));

    let hottest = records.iter().max_by_key(|r| r.level).unwrap();
    eprintln!(
        "hottest: \"{}\" after period {} (y = {:.3})",
        hottest.phrase, hottest.period_index, hottest.y
    );
}
