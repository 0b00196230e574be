//! Heating-up keyboard engine.
//!
//! Screen and call events become call-excluded active intervals
//! ([`ingest`]), then per-period usage factors with short glances corrected
//! upwards. The usage factors pass through a forgetting filter and a
//! strictness-shaped quantizer ([`engine`]), and each period's result is a
//! colored temperature message. Messages have a 12-byte wire form
//! ([`codec`]). They can be replayed in batch from a log ([`replay`],
//! [`scenario`]) or produced live by an HTTP service ([`service`]).
//!
//! ```
//! use heatkb::engine::{Engine, EngineParams};
//!
//! let mut engine = Engine::new(EngineParams::default()).unwrap();
//! let first = engine.advance(1.0).unwrap();
//! assert_eq!(first.phrase, "little");
//! ```

pub mod codec;
pub mod engine;
pub mod ingest;
pub mod replay;
pub mod scenario;
pub mod service;

pub use engine::{Engine, EngineParams, TemperatureMessage};
