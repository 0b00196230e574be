//! Usage estimation: duration correction, period usage factor, the
//! forgetting filter and the temperature quantizer.
//!
//! Everything here is a pure function of its inputs. [`Engine`] bundles the
//! parameters, quantizer, palette and filter state for callers that advance
//! one period at a time.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest number of temperature levels a message can carry.
pub const MAX_LEVELS: u8 = 8;

/// Phrases for the default five-level alphabet, coldest first.
pub const FIVE_LEVEL_PHRASES: [&str; 5] =
    ["very little", "little", "medium amount", "a lot", "a great deal"];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },
    #[error("usage value {0} is outside [0, 1]")]
    UsageOutOfRange(f64),
    #[error("level {level} is outside [0, {level_count})")]
    LevelOutOfRange { level: u8, level_count: u8 },
    #[error("invalid quantizer endpoints: {0}")]
    InvalidEndpoints(String),
    #[error("invalid palette: {0}")]
    InvalidPalette(String),
}

/// Non-fatal parameter findings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParamWarning {
    /// The correction time is below the short-interval threshold, so the
    /// correction can never lengthen anything.
    CorrectionBelowThreshold,
}

impl fmt::Display for ParamWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamWarning::CorrectionBelowThreshold => f.write_str(
                "notification correction time is below the short-interval threshold; \
                 corrections will have no effect",
            ),
        }
    }
}

/// Tuning knobs of the estimator. Durations are integer milliseconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EngineParams {
    pub sampling_period_ms: u64,
    pub notification_correction_ms: u64,
    pub notification_threshold_ms: u64,
    pub alpha: f64,
    pub strictness: f64,
    pub level_count: u8,
}

impl Default for EngineParams {
    fn default() -> Self {
        Self {
            sampling_period_ms: 1_800_000,
            notification_correction_ms: 300_000,
            notification_threshold_ms: 30_000,
            alpha: 0.2,
            strictness: 1.0,
            level_count: 5,
        }
    }
}

impl EngineParams {
    /// Builds parameters from durations in seconds, rounding to whole
    /// milliseconds, and validates them.
    pub fn from_seconds(
        sampling_period_s: f64,
        notification_correction_s: f64,
        notification_threshold_s: f64,
        alpha: f64,
        strictness: f64,
        level_count: u8,
    ) -> Result<Self, EngineError> {
        let params = Self {
            sampling_period_ms: seconds_to_ms("sampling_period_s", sampling_period_s)?,
            notification_correction_ms: seconds_to_ms(
                "notification_correction_s",
                notification_correction_s,
            )?,
            notification_threshold_ms: seconds_to_ms(
                "notification_threshold_s",
                notification_threshold_s,
            )?,
            alpha,
            strictness,
            level_count,
        };
        params.validate()?;
        Ok(params)
    }

    /// Checks every invariant and returns the non-fatal warnings.
    pub fn validate(&self) -> Result<Vec<ParamWarning>, EngineError> {
        if self.sampling_period_ms == 0 {
            return Err(invalid("sampling_period", "must be positive"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(invalid("alpha", format!("{} is not in (0, 1)", self.alpha)));
        }
        if !(self.strictness > 0.0 && self.strictness.is_finite()) {
            return Err(invalid(
                "strictness",
                format!("{} is not a positive finite number", self.strictness),
            ));
        }
        check_level_count(self.level_count)?;

        let mut warnings = Vec::new();
        if self.notification_correction_ms < self.notification_threshold_ms {
            warnings.push(ParamWarning::CorrectionBelowThreshold);
        }
        Ok(warnings)
    }
}

fn invalid(name: &'static str, reason: impl Into<String>) -> EngineError {
    EngineError::InvalidParam { name, reason: reason.into() }
}

fn seconds_to_ms(name: &'static str, seconds: f64) -> Result<u64, EngineError> {
    if !(seconds >= 0.0 && seconds.is_finite()) {
        return Err(invalid(name, format!("{seconds} is not a non-negative duration")));
    }
    Ok((seconds * 1000.0).round() as u64)
}

fn check_level_count(level_count: u8) -> Result<(), EngineError> {
    if !(2..=MAX_LEVELS).contains(&level_count) {
        return Err(invalid(
            "level_count",
            format!("{level_count} is not in [2, {MAX_LEVELS}]"),
        ));
    }
    Ok(())
}

/// Corrected duration of one active interval: intervals shorter than the
/// threshold count as at least the notification correction time.
pub fn correct_duration(actual_ms: u64, params: &EngineParams) -> u64 {
    if actual_ms < params.notification_threshold_ms {
        actual_ms.max(params.notification_correction_ms)
    } else {
        actual_ms
    }
}

/// Fraction of the sampling period covered by the corrected durations,
/// clamped to 1.
pub fn period_usage_factor(corrected_ms: &[u64], params: &EngineParams) -> f64 {
    let total: u64 = corrected_ms.iter().sum();
    usage_from_total(total, params.sampling_period_ms)
}

pub(crate) fn usage_from_total(total_ms: u64, period_ms: u64) -> f64 {
    (total_ms as f64 / period_ms as f64).min(1.0)
}

/// One step of the forgetting filter, `(1 - alpha) * y_prev + alpha * u`.
///
/// The result is clamped to `[0, 1]` so rounding cannot push it outside.
pub fn forgetting_step(y_prev: f64, u: f64, alpha: f64) -> f64 {
    ((1.0 - alpha) * y_prev + alpha * u).clamp(0.0, 1.0)
}

/// Weight of the input `k` periods back in the filter output.
pub fn impulse_weight(alpha: f64, k: u32) -> f64 {
    (1.0 - alpha).powi(k as i32) * alpha
}

/// Partition of `[0, 1]` into temperature levels.
///
/// Level `k` covers `[e_k, e_{k+1})`; the top level also includes 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Quantizer {
    endpoints: Vec<f64>,
}

impl Quantizer {
    /// Endpoints `(k / L)^s` for `k = 0..=L`.
    pub fn new(level_count: u8, strictness: f64) -> Result<Self, EngineError> {
        check_level_count(level_count)?;
        if !(strictness > 0.0 && strictness.is_finite()) {
            return Err(invalid(
                "strictness",
                format!("{strictness} is not a positive finite number"),
            ));
        }
        // k^s / L^s, not (k / L)^s: 1/25 is 0.04 exactly, 0.2^2 is not.
        let top = f64::from(level_count).powf(strictness);
        let endpoints = (0..=level_count)
            .map(|k| match k {
                0 => 0.0,
                k if k == level_count => 1.0,
                k => f64::from(k).powf(strictness) / top,
            })
            .collect();
        Self::from_endpoints(endpoints)
    }

    pub fn uniform(level_count: u8) -> Result<Self, EngineError> {
        Self::new(level_count, 1.0)
    }

    /// Five levels whose intervals each double the length of the previous
    /// one: 0, 1/31, 3/31, 7/31, 15/31, 1.
    pub fn doubling() -> Self {
        let endpoints = [0.0, 1.0, 3.0, 7.0, 15.0, 31.0]
            .iter()
            .map(|n| n / 31.0)
            .collect();
        Self { endpoints }
    }

    pub fn from_endpoints(endpoints: Vec<f64>) -> Result<Self, EngineError> {
        let levels = endpoints.len().saturating_sub(1);
        if levels < 2 || levels > MAX_LEVELS as usize {
            return Err(EngineError::InvalidEndpoints(format!(
                "{} endpoints give {levels} levels, expected 2..={MAX_LEVELS}",
                endpoints.len()
            )));
        }
        if endpoints[0] != 0.0 || endpoints[levels] != 1.0 {
            return Err(EngineError::InvalidEndpoints(
                "first endpoint must be 0 and last must be 1".into(),
            ));
        }
        if endpoints.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(Ordering::Less)) {
            return Err(EngineError::InvalidEndpoints(
                "endpoints must be strictly increasing".into(),
            ));
        }
        Ok(Self { endpoints })
    }

    pub fn endpoints(&self) -> &[f64] {
        &self.endpoints
    }

    pub fn level_count(&self) -> u8 {
        (self.endpoints.len() - 1) as u8
    }

    /// Level whose interval contains `y`. Ties at an interior endpoint go
    /// to the higher level.
    pub fn quantize(&self, y: f64) -> Result<u8, EngineError> {
        if !(0.0..=1.0).contains(&y) {
            return Err(EngineError::UsageOutOfRange(y));
        }
        let at_or_below = self.endpoints.partition_point(|&e| e <= y);
        let top = self.endpoints.len() - 2;
        Ok((at_or_below - 1).min(top) as u8)
    }
}

/// 8-bit RGB color.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rgb(pub u8, pub u8, pub u8);

impl Rgb {
    pub const NEUTRAL_GRAY: Rgb = Rgb(158, 158, 158);

    pub fn to_hex(self) -> String {
        format!("#{:02x}{:02x}{:02x}", self.0, self.1, self.2)
    }
}

impl fmt::Display for Rgb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("`{0}` is not a #rrggbb color")]
pub struct ParseRgbError(String);

impl FromStr for Rgb {
    type Err = ParseRgbError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseRgbError(s.to_string());
        let digits = s.strip_prefix('#').ok_or_else(err)?;
        if digits.len() != 6 || !digits.is_ascii() {
            return Err(err());
        }
        let channel = |i: usize| u8::from_str_radix(&digits[i..i + 2], 16).map_err(|_| err());
        Ok(Rgb(channel(0)?, channel(2)?, channel(4)?))
    }
}

impl Serialize for Rgb {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for Rgb {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Red shades of increasing saturation used above level 0.
const HEAT_ANCHORS: [Rgb; 4] = [
    Rgb(255, 205, 210),
    Rgb(229, 115, 115),
    Rgb(229, 57, 53),
    Rgb(183, 28, 28),
];

/// One color per temperature level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Palette {
    colors: Vec<Rgb>,
}

impl Palette {
    /// Gray at level 0, then reds of increasing saturation. The five-level
    /// palette uses the anchor shades exactly; other sizes interpolate
    /// between them.
    pub fn heat(level_count: u8) -> Result<Self, EngineError> {
        check_level_count(level_count)?;
        let reds = usize::from(level_count) - 1;
        let mut colors = vec![Rgb::NEUTRAL_GRAY];
        colors.extend((0..reds).map(|i| {
            if reds == 1 {
                return HEAT_ANCHORS[HEAT_ANCHORS.len() - 1];
            }
            let t = i as f64 / (reds - 1) as f64 * (HEAT_ANCHORS.len() - 1) as f64;
            let seg = (t.floor() as usize).min(HEAT_ANCHORS.len() - 2);
            lerp(HEAT_ANCHORS[seg], HEAT_ANCHORS[seg + 1], t - seg as f64)
        }));
        Self::new(colors)
    }

    pub fn new(colors: Vec<Rgb>) -> Result<Self, EngineError> {
        check_level_count(colors.len().min(usize::from(u8::MAX)) as u8)
            .map_err(|_| EngineError::InvalidPalette(format!("{} colors", colors.len())))?;
        for (i, a) in colors.iter().enumerate() {
            if colors[i + 1..].contains(a) {
                return Err(EngineError::InvalidPalette(format!("duplicate color {a}")));
            }
        }
        Ok(Self { colors })
    }

    pub fn colors(&self) -> &[Rgb] {
        &self.colors
    }

    pub fn color(&self, level: u8) -> Option<Rgb> {
        self.colors.get(usize::from(level)).copied()
    }
}

fn lerp(a: Rgb, b: Rgb, t: f64) -> Rgb {
    let mix = |x: u8, y: u8| (f64::from(x) + (f64::from(y) - f64::from(x)) * t).round() as u8;
    Rgb(mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

/// Human label for a level: the five stock phrases when there are five
/// levels, otherwise `level k of L`.
pub fn level_phrase(level: u8, level_count: u8) -> String {
    if level_count == 5 {
        if let Some(phrase) = FIVE_LEVEL_PHRASES.get(usize::from(level)) {
            return (*phrase).to_string();
        }
    }
    format!("level {level} of {level_count}")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodSample {
    pub period_index: u64,
    pub usage_factor: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EngineState {
    pub overall_usage: f64,
    pub next_period_index: u64,
}

impl EngineState {
    /// A keyboard that has not been warmed at all.
    pub const COLD: EngineState = EngineState { overall_usage: 0.0, next_period_index: 0 };
}

impl Default for EngineState {
    fn default() -> Self {
        Self::COLD
    }
}

/// The feedback shown during the period after `period_index`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemperatureMessage {
    pub period_index: u64,
    pub level: u8,
    pub color: Rgb,
    pub phrase: String,
}

impl TemperatureMessage {
    pub fn new(period_index: u64, level: u8, palette: &Palette) -> Result<Self, EngineError> {
        let level_count = palette.colors().len() as u8;
        let color = palette
            .color(level)
            .ok_or(EngineError::LevelOutOfRange { level, level_count })?;
        Ok(Self { period_index, level, color, phrase: level_phrase(level, level_count) })
    }
}

/// Consumes one period's usage factor: filters it into the overall usage
/// and quantizes the result into the message for that period.
pub fn advance_period(
    state: EngineState,
    u: f64,
    params: &EngineParams,
    quantizer: &Quantizer,
    palette: &Palette,
) -> Result<(EngineState, TemperatureMessage), EngineError> {
    if !(0.0..=1.0).contains(&u) {
        return Err(EngineError::UsageOutOfRange(u));
    }
    let overall_usage = forgetting_step(state.overall_usage, u, params.alpha);
    let level = quantizer.quantize(overall_usage)?;
    let message = TemperatureMessage::new(state.next_period_index, level, palette)?;
    let next = EngineState { overall_usage, next_period_index: state.next_period_index + 1 };
    Ok((next, message))
}

/// Stateful wrapper around [`advance_period`].
#[derive(Debug, Clone)]
pub struct Engine {
    params: EngineParams,
    quantizer: Quantizer,
    palette: Palette,
    state: EngineState,
}

impl Engine {
    /// Cold engine with the power-law quantizer and heat palette implied by
    /// `params`.
    pub fn new(params: EngineParams) -> Result<Self, EngineError> {
        params.validate()?;
        let quantizer = Quantizer::new(params.level_count, params.strictness)?;
        let palette = Palette::heat(params.level_count)?;
        Self::with_parts(params, quantizer, palette)
    }

    pub fn with_parts(
        params: EngineParams,
        quantizer: Quantizer,
        palette: Palette,
    ) -> Result<Self, EngineError> {
        params.validate()?;
        if quantizer.level_count() != params.level_count
            || palette.colors().len() != usize::from(params.level_count)
        {
            return Err(invalid(
                "level_count",
                "quantizer, palette and params disagree on the number of levels",
            ));
        }
        Ok(Self { params, quantizer, palette, state: EngineState::COLD })
    }

    pub fn params(&self) -> &EngineParams {
        &self.params
    }

    pub fn quantizer(&self) -> &Quantizer {
        &self.quantizer
    }

    pub fn palette(&self) -> &Palette {
        &self.palette
    }

    pub fn state(&self) -> EngineState {
        self.state
    }

    pub fn advance(&mut self, u: f64) -> Result<TemperatureMessage, EngineError> {
        let (next, message) =
            advance_period(self.state, u, &self.params, &self.quantizer, &self.palette)?;
        self.state = next;
        Ok(message)
    }

    /// Drops all accumulated usage; the period cursor keeps counting.
    pub fn reset(&mut self) {
        self.state.overall_usage = 0.0;
    }

    /// Level-0 message, as shown right after a cold start or reset.
    pub fn cold_message(&self, period_index: u64) -> TemperatureMessage {
        TemperatureMessage::new(period_index, 0, &self.palette)
            .expect("palette always has a level 0")
    }
}
