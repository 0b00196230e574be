mod support;

use std::sync::Arc;
use std::time::Duration;

use heatkb::engine::Rgb;
use heatkb::ingest::{EventKind, RawEvent};
use heatkb::service::{router, FeedbackService, ManualClock, ServiceConfig};
use reqwest::StatusCode;

const PERIOD: u64 = 1_800_000;

struct Harness {
    base: String,
    clock: Arc<ManualClock>,
    service: FeedbackService,
    client: reqwest::Client,
}

impl Harness {
    async fn start() -> Self {
        let clock = Arc::new(ManualClock::new(0));
        let service = FeedbackService::new(ServiceConfig::default(), clock.clone()).unwrap();
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
        let base = format!("http://{}", listener.local_addr().unwrap());
        let app = router(service.clone());
        tokio::spawn(async move { axum::serve(listener, app).await });
        service.spawn_ticker(Duration::from_millis(5));
        Self { base, clock, service, client: reqwest::Client::new() }
    }

    fn url(&self, path: &str) -> String {
        format!("{}{path}", self.base)
    }

    async fn post(&self, path: &str, body: &str) -> reqwest::Response {
        self.client.post(self.url(path)).body(body.to_string()).send().await.unwrap()
    }

    async fn json(&self, path: &str) -> serde_json::Value {
        self.client.get(self.url(path)).send().await.unwrap().json().await.unwrap()
    }

    async fn stream(&self) -> reqwest::Response {
        self.client.get(self.url("/stream")).send().await.unwrap()
    }
}

#[tokio::test]
async fn config_and_initial_state() {
    let h = Harness::start().await;
    let config = h.json("/config").await;
    assert_eq!(config["time_scale"], 60.0);
    assert_eq!(config["params"]["sampling_period_ms"], PERIOD);
    assert_eq!(config["params"]["alpha"], 0.2);

    let state = h.json("/state").await;
    assert!(state["current"].is_null());
    assert_eq!(state["overall_usage"], 0.0);
    assert_eq!(state["next_period_index"], 0);
}

#[tokio::test]
async fn event_errors() {
    let h = Harness::start().await;
    assert_eq!(h.post("/events", "{not json").await.status(), StatusCode::BAD_REQUEST);
    assert_eq!(
        h.post("/events", r#"{"t":-5,"kind":"screen_on"}"#).await.status(),
        StatusCode::BAD_REQUEST
    );
    assert_eq!(
        h.post("/events", r#"{"t":5,"kind":"unlock"}"#).await.status(),
        StatusCode::BAD_REQUEST
    );

    h.clock.set(3 * PERIOD);
    h.service.tick();
    let stale = h.post("/events", r#"{"t":1000,"kind":"screen_on"}"#).await;
    assert_eq!(stale.status(), StatusCode::CONFLICT);
    let body: serde_json::Value = stale.json().await.unwrap();
    assert!(body["error"].as_str().unwrap().contains("closed period"));
}

#[tokio::test]
async fn subscribers_see_identical_sequences() {
    let h = Harness::start().await;
    let first = h.stream().await;
    let second = h.stream().await;
    let readers = [
        tokio::spawn(support::read_sse(first, 5)),
        tokio::spawn(support::read_sse(second, 5)),
    ];

    let on = RawEvent::new(0, EventKind::ScreenOn).to_json();
    assert_eq!(h.post("/events", &on).await.status(), StatusCode::ACCEPTED);
    h.clock.set(4 * PERIOD + 30_000);
    h.service.tick();
    let reset = h.post("/reset", "").await;
    let cold: serde_json::Value = reset.json().await.unwrap();
    assert_eq!(cold["level"], 0);

    let [a, b] = readers;
    let a = a.await.unwrap();
    let b = b.await.unwrap();
    assert_eq!(a, b);
    let levels: Vec<u8> = a.iter().map(|m| m.level).collect();
    assert_eq!(levels, vec![1, 1, 2, 2, 0]);
    assert_eq!(a[3].color, Rgb(229, 115, 115));
    assert_eq!(a[4].color, Rgb::NEUTRAL_GRAY);
    assert_eq!(a[4].payload_hex, cold["payload_hex"]);

    let state = h.json("/state").await;
    assert_eq!(state["current"]["level"], 0);
    assert_eq!(state["overall_usage"], 0.0);
}

#[tokio::test]
async fn typing_heats_the_keyboard() {
    let h = Harness::start().await;
    let stream = h.stream().await;
    let reader = tokio::spawn(support::read_sse(stream, 1));
    let mut t = 0;
    while t < PERIOD {
        h.clock.set(t);
        let status = h.post("/keypress", "").await.status();
        assert_eq!(status, StatusCode::NO_CONTENT);
        t += 1_500;
    }
    h.clock.set(PERIOD + 30_000);
    let messages = tokio::time::timeout(Duration::from_secs(5), reader).await.unwrap().unwrap();
    assert_eq!(messages[0].level, 1);
    assert_eq!(messages[0].phrase, "little");
}

#[tokio::test]
async fn concurrent_clients_are_serialized() {
    let h = Arc::new(Harness::start().await);
    let stream = h.stream().await;
    let reader = tokio::spawn(support::read_sse(stream, 2));

    // 40 clients each report one glance in period 0
    let mut tasks = Vec::new();
    for i in 0..40u64 {
        let h = h.clone();
        tasks.push(tokio::spawn(async move {
            let start = i * 40_000;
            let on = RawEvent::new(start, EventKind::ScreenOn).to_json();
            let off = RawEvent::new(start + 5_000, EventKind::ScreenOff).to_json();
            (h.post("/events", &on).await.status(), h.post("/events", &off).await.status())
        }));
    }
    for task in tasks {
        let (a, b) = task.await.unwrap();
        assert_eq!((a, b), (StatusCode::ACCEPTED, StatusCode::ACCEPTED));
    }
    h.clock.set(2 * PERIOD + 30_000);
    let messages = tokio::time::timeout(Duration::from_secs(5), reader).await.unwrap().unwrap();
    assert_eq!(messages.iter().map(|m| m.period_index).collect::<Vec<_>>(), vec![0, 1]);

    // Arrival order of events cannot matter: the log they form replays the same.
    let mut events = Vec::new();
    for i in 0..40u64 {
        events.push(RawEvent::new(i * 40_000, EventKind::ScreenOn));
        events.push(RawEvent::new(i * 40_000 + 5_000, EventKind::ScreenOff));
    }
    let log = heatkb::ingest::EventLog {
        events,
        origin_ms: Some(0),
        horizon_ms: Some(2 * PERIOD),
    };
    let records =
        heatkb::replay::replay_log(&log, &heatkb::engine::EngineParams::default(), None).unwrap();
    let expected: Vec<_> = records.iter().map(|r| r.message()).collect();
    let got: Vec<_> = messages.iter().map(|m| m.message()).collect();
    assert_eq!(got, expected);
}
