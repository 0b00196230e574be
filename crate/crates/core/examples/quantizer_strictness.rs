//! Lenient, neutral and strict quantizers side by side, plus the fixed
//! doubling quantizer.
//!
//!     cargo run -p heatkb --example quantizer_strictness

use heatkb::engine::{level_phrase, Quantizer};

fn main() {
    let quantizers = [
        ("s = 0.5", Quantizer::new(5, 0.5).unwrap()),
        ("s = 1.0", Quantizer::new(5, 1.0).unwrap()),
        ("s = 2.0", Quantizer::new(5, 2.0).unwrap()),
        ("doubling", Quantizer::doubling()),
    ];
    for (name, q) in &quantizers {
        let endpoints: Vec<String> = q.endpoints().iter().map(|e| format!("{e:.4}")).collect();
        println!("{name:<9} [{}]", endpoints.join(", "));
    }

    println!();
    print!("{:>5}", "y");
    for (name, _) in &quantizers {
        print!("  {name:<14}");
    }
    println!();
    for step in 0..=10 {
        let y = step as f64 / 10.0;
        print!("{y:>5.1}");
        for (_, q) in &quantizers {
            print!("  {:<14}", level_phrase(q.quantize(y).unwrap(), 5));
        }
        println!();
    }
}
