//! Fixed 12-byte wire form of a [`TemperatureMessage`].
//!
//! ```text
//! offset  size  field
//!      0     2  magic "HK" (0x48 0x4B)
//!      2     1  version (0x01)
//!      3     1  level
//!      4     4  period index, u32 big-endian
//!      8     3  color R, G, B
//!     11     1  XOR of bytes 0..=10
//! ```

use std::fmt;

use thiserror::Error;

use crate::engine::{level_phrase, Rgb, TemperatureMessage, MAX_LEVELS};

pub const PAYLOAD_LEN: usize = 12;
pub const MAGIC: [u8; 2] = *b"HK";
pub const VERSION: u8 = 0x01;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("payload is {0} bytes, expected {PAYLOAD_LEN}")]
    Length(usize),
    #[error("bad magic {0:02x} {1:02x}")]
    Magic(u8, u8),
    #[error("unsupported version {0}")]
    Version(u8),
    #[error("checksum mismatch: stored {stored:02x}, computed {computed:02x}")]
    Checksum { stored: u8, computed: u8 },
    #[error("level {level} is not below {limit}")]
    Level { level: u8, limit: u8 },
    #[error("period index {0} does not fit in 32 bits")]
    PeriodOverflow(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WirePayload([u8; PAYLOAD_LEN]);

impl WirePayload {
    pub fn as_bytes(&self) -> &[u8; PAYLOAD_LEN] {
        &self.0
    }

    /// Lowercase, space-separated hex, e.g. `48 4b 01 ...`.
    pub fn to_hex(&self) -> String {
        hex_dump(&self.0)
    }
}

impl fmt::Display for WirePayload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

pub fn hex_dump(bytes: &[u8]) -> String {
    bytes
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn checksum(bytes: &[u8]) -> u8 {
    bytes.iter().fold(0, |acc, b| acc ^ b)
}

pub fn encode(msg: &TemperatureMessage) -> Result<WirePayload, CodecError> {
    if msg.level >= MAX_LEVELS {
        return Err(CodecError::Level { level: msg.level, limit: MAX_LEVELS });
    }
    let period =
        u32::try_from(msg.period_index).map_err(|_| CodecError::PeriodOverflow(msg.period_index))?;

    let mut out = [0u8; PAYLOAD_LEN];
    out[0..2].copy_from_slice(&MAGIC);
    out[2] = VERSION;
    out[3] = msg.level;
    out[4..8].copy_from_slice(&period.to_be_bytes());
    out[8..11].copy_from_slice(&[msg.color.0, msg.color.1, msg.color.2]);
    out[11] = checksum(&out[..11]);
    Ok(WirePayload(out))
}

/// Decodes a payload produced for a `level_count`-level alphabet. The
/// phrase is rebuilt from the level; levels at or above `level_count` are
/// rejected.
pub fn decode(bytes: &[u8], level_count: u8) -> Result<TemperatureMessage, CodecError> {
    let bytes: &[u8; PAYLOAD_LEN] =
        bytes.try_into().map_err(|_| CodecError::Length(bytes.len()))?;
    if bytes[0..2] != MAGIC {
        return Err(CodecError::Magic(bytes[0], bytes[1]));
    }
    if bytes[2] != VERSION {
        return Err(CodecError::Version(bytes[2]));
    }
    let computed = checksum(&bytes[..11]);
    if computed != bytes[11] {
        return Err(CodecError::Checksum { stored: bytes[11], computed });
    }
    let level = bytes[3];
    let limit = level_count.min(MAX_LEVELS);
    if level >= limit {
        return Err(CodecError::Level { level, limit });
    }
    let period = u32::from_be_bytes([bytes[4], bytes[5], bytes[6], bytes[7]]);
    Ok(TemperatureMessage {
        period_index: u64::from(period),
        level,
        color: Rgb(bytes[8], bytes[9], bytes[10]),
        phrase: level_phrase(level, level_count),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn msg(period_index: u64, level: u8, color: Rgb) -> TemperatureMessage {
        TemperatureMessage { period_index, level, color, phrase: level_phrase(level, 5) }
    }

    #[test]
    fn encodes_cold_message() {
        let p = encode(&msg(0, 0, Rgb(158, 158, 158))).unwrap();
        assert_eq!(
            p.as_bytes(),
            &[0x48, 0x4B, 0x01, 0x00, 0x00, 0x00, 0x00, 0x00, 0x9E, 0x9E, 0x9E, 0x9C]
        );
        assert_eq!(p.to_hex(), "48 4b 01 00 00 00 00 00 9e 9e 9e 9c");
    }

    #[test]
    fn encodes_hot_message() {
        let p = encode(&msg(1, 4, Rgb(183, 28, 28))).unwrap();
        let b = p.as_bytes();
        assert_eq!(b[3], 0x04);
        assert_eq!(&b[4..8], &[0, 0, 0, 1]);
        assert_eq!(&b[8..11], &[0xB7, 0x1C, 0x1C]);
        let mut xor = 0u8;
        for byte in &b[..11] {
            xor ^= byte;
        }
        assert_eq!(b[11], xor);
    }

    #[test]
    fn encode_range_errors() {
        let mut m = msg(0, 8, Rgb(0, 0, 0));
        assert_eq!(encode(&m), Err(CodecError::Level { level: 8, limit: 8 }));
        m.level = 0;
        m.period_index = 1 << 32;
        assert_eq!(encode(&m), Err(CodecError::PeriodOverflow(1 << 32)));
    }

    #[test]
    fn decode_errors_are_distinct() {
        let good = *encode(&msg(3, 2, Rgb(229, 115, 115))).unwrap().as_bytes();
        assert_eq!(decode(&good, 5).unwrap(), msg(3, 2, Rgb(229, 115, 115)));

        assert_eq!(decode(&good[..11], 5), Err(CodecError::Length(11)));

        let mut bad = good;
        bad[9] ^= 0x01;
        assert!(matches!(decode(&bad, 5), Err(CodecError::Checksum { .. })));

        let mut bad = good;
        bad[0] = b'X';
        assert!(matches!(decode(&bad, 5), Err(CodecError::Magic(..))));

        let mut bad = good;
        bad[2] = 2;
        bad[11] = checksum(&bad[..11]);
        assert_eq!(decode(&bad, 5), Err(CodecError::Version(2)));

        let mut bad = good;
        bad[3] = 6;
        bad[11] = checksum(&bad[..11]);
        assert_eq!(decode(&bad, 5), Err(CodecError::Level { level: 6, limit: 5 }));
        assert_eq!(decode(&bad, 8).unwrap().phrase, "level 6 of 8");
    }
}
