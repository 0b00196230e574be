//! Encodes temperature messages into the 12-byte payload and decodes them,
//! including what a corrupted payload looks like.
//!
//!     cargo run -p heatkb --example wire_codec

use heatkb::codec::{decode, encode};
use heatkb::engine::{Palette, TemperatureMessage};

fn main() {
    let palette = Palette::heat(5).unwrap();
    for level in 0..5 {
        let msg = TemperatureMessage::new(u64::from(level) * 3, level, &palette).unwrap();
        let payload = encode(&msg).unwrap();
        println!("{:<14} {payload}", msg.phrase);
    }

    let msg = TemperatureMessage::new(42, 3, &palette).unwrap();
    let mut bytes = *encode(&msg).unwrap().as_bytes();
    println!("\ndecoded: {:?}", decode(&bytes, 5).unwrap());
    bytes[9] ^= 0x10;
    println!("one flipped bit: {}", decode(&bytes, 5).unwrap_err());
    println!("truncated: {}", decode(&bytes[..7], 5).unwrap_err());
}
