//! Live feedback service: one [`Session`] behind a lock, a scaled clock
//! that closes periods, and a broadcast of every new current message.

mod clock;
mod http;
mod session;

use std::sync::{Arc, Mutex, MutexGuard};
use std::time::Duration;

use serde::Serialize;
use tokio::sync::{broadcast, watch};

use crate::codec;
use crate::engine::{EngineError, EngineParams, Rgb, TemperatureMessage};
use crate::ingest::RawEvent;

pub use clock::{Clock, ManualClock, ScaledClock};
pub use http::router;
pub use session::{Session, SessionError, Snapshot, KEYPRESS_GRACE_MS};

pub const DEFAULT_TIME_SCALE: f64 = 60.0;
pub const DEFAULT_LISTEN: &str = "127.0.0.1:8080";
const STREAM_CAPACITY: usize = 1024;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ServiceConfig {
    pub params: EngineParams,
    pub origin_ms: u64,
    /// Simulated seconds per wall-clock second.
    pub time_scale: f64,
    pub listen: String,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            params: EngineParams::default(),
            origin_ms: 0,
            time_scale: DEFAULT_TIME_SCALE,
            listen: DEFAULT_LISTEN.to_string(),
        }
    }
}

impl ServiceConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        self.params.validate()?;
        if !(self.time_scale > 0.0 && self.time_scale.is_finite()) {
            return Err(EngineError::InvalidParam {
                name: "time_scale",
                reason: format!("{} is not a positive finite number", self.time_scale),
            });
        }
        Ok(())
    }
}

/// A message as sent on the stream: the structured fields plus the wire
/// payload in hex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct StreamMessage {
    pub period_index: u64,
    pub level: u8,
    pub color: Rgb,
    pub phrase: String,
    pub payload_hex: String,
}

impl StreamMessage {
    pub fn new(message: &TemperatureMessage) -> Self {
        // Period indices beyond u32 only occur after ~245,000 years of
        // half-hour periods; the hex is left empty rather than failing.
        let payload_hex = codec::encode(message).map(|p| p.to_hex()).unwrap_or_default();
        Self {
            period_index: message.period_index,
            level: message.level,
            color: message.color,
            phrase: message.phrase.clone(),
            payload_hex,
        }
    }

    pub fn message(&self) -> TemperatureMessage {
        TemperatureMessage {
            period_index: self.period_index,
            level: self.level,
            color: self.color,
            phrase: self.phrase.clone(),
        }
    }
}

/// Shared handle to a running session.
#[derive(Clone)]
pub struct FeedbackService {
    inner: Arc<Inner>,
}

struct Inner {
    config: ServiceConfig,
    clock: Arc<dyn Clock>,
    session: Mutex<Session>,
    stream: broadcast::Sender<StreamMessage>,
    snapshot: watch::Sender<Snapshot>,
}

impl FeedbackService {
    pub fn new(config: ServiceConfig, clock: Arc<dyn Clock>) -> Result<Self, EngineError> {
        config.validate()?;
        let session = Session::new(config.params, config.origin_ms)?;
        let (stream, _) = broadcast::channel(STREAM_CAPACITY);
        let (snapshot, _) = watch::channel(session.snapshot());
        Ok(Self {
            inner: Arc::new(Inner {
                config,
                clock,
                session: Mutex::new(session),
                stream,
                snapshot,
            }),
        })
    }

    /// Service on a wall clock scaled by `config.time_scale`.
    pub fn with_scaled_clock(config: ServiceConfig) -> Result<Self, EngineError> {
        let clock = Arc::new(ScaledClock::start(config.origin_ms, config.time_scale));
        Self::new(config, clock)
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.inner.config
    }

    pub fn subscribe(&self) -> broadcast::Receiver<StreamMessage> {
        self.inner.stream.subscribe()
    }

    fn session(&self) -> MutexGuard<'_, Session> {
        self.inner.session.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
    }

    /// Publishes while the session lock is held so every subscriber sees
    /// messages in the order the session produced them.
    fn publish(&self, session: &Session, messages: &[TemperatureMessage]) {
        for message in messages {
            let _ = self.inner.stream.send(StreamMessage::new(message));
        }
        self.inner.snapshot.send_replace(session.snapshot());
    }

    /// Advances the session to the clock's current time.
    pub fn tick(&self) -> Vec<TemperatureMessage> {
        let now = self.inner.clock.now_ms();
        let mut session = self.session();
        let closed = session.advance_to(now);
        self.publish(&session, &closed);
        closed
    }

    pub fn ingest_event(&self, event: RawEvent) -> Result<(), SessionError> {
        self.tick();
        let mut session = self.session();
        session.ingest_event(event)?;
        self.inner.snapshot.send_replace(session.snapshot());
        Ok(())
    }

    pub fn keypress(&self) {
        self.tick();
        let now = self.inner.clock.now_ms();
        self.session().keypress(now);
    }

    pub fn reset(&self) -> TemperatureMessage {
        let mut session = self.session();
        let message = session.reset();
        self.publish(&session, std::slice::from_ref(&message));
        message
    }

    /// Latest published state; never waits on the session lock.
    pub fn snapshot(&self) -> Snapshot {
        self.inner.snapshot.borrow().clone()
    }

    /// Ticks on a fixed wall-clock interval until the returned handle is
    /// aborted or the runtime shuts down.
    pub fn spawn_ticker(&self, every: Duration) -> tokio::task::JoinHandle<()> {
        let service = self.clone();
        tokio::spawn(async move {
            let mut interval = tokio::time::interval(every);
            interval.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Skip);
            loop {
                interval.tick().await;
                service.tick();
            }
        })
    }
}

/// Binds `config.listen`, starts the ticker and serves until ctrl-c.
pub async fn serve(config: ServiceConfig) -> std::io::Result<()> {
    let service = FeedbackService::with_scaled_clock(config.clone())
        .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidInput, e))?;
    let listener = tokio::net::TcpListener::bind(&config.listen).await?;
    let ticker = service.spawn_ticker(Duration::from_millis(50));
    eprintln!("heatkb service listening on http://{}", listener.local_addr()?);
    let result = axum::serve(listener, router(service))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await;
    ticker.abort();
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::EventKind;

    fn service() -> (FeedbackService, Arc<ManualClock>) {
        let clock = Arc::new(ManualClock::new(0));
        let service = FeedbackService::new(ServiceConfig::default(), clock.clone()).unwrap();
        (service, clock)
    }

    #[test]
    fn snapshot_tracks_last_broadcast() {
        let (svc, clock) = service();
        let mut rx = svc.subscribe();
        svc.ingest_event(RawEvent::new(0, EventKind::ScreenOn)).unwrap();
        clock.set(3 * 1_800_000 + 30_000);
        let closed = svc.tick();
        assert_eq!(closed.len(), 3);
        let mut last = None;
        while let Ok(m) = rx.try_recv() {
            last = Some(m);
        }
        let last = last.unwrap();
        assert_eq!(svc.snapshot().current, Some(last.message()));
        assert_eq!(last.level, 2);
        assert_eq!(last.payload_hex.split(' ').count(), 12);
    }

    #[test]
    fn reset_broadcasts_cold_message() {
        let (svc, clock) = service();
        let mut rx = svc.subscribe();
        svc.ingest_event(RawEvent::new(0, EventKind::ScreenOn)).unwrap();
        clock.set(2 * 1_800_000 + 30_000);
        svc.tick();
        let cold = svc.reset();
        let received: Vec<_> = std::iter::from_fn(|| rx.try_recv().ok()).collect();
        assert_eq!(received.last().unwrap().message(), cold);
        assert_eq!(cold.level, 0);
        assert_eq!(svc.snapshot().overall_usage, 0.0);
    }

    #[test]
    fn rejects_bad_time_scale() {
        let config = ServiceConfig { time_scale: 0.0, ..ServiceConfig::default() };
        assert!(FeedbackService::new(config, Arc::new(ManualClock::new(0))).is_err());
    }
}
