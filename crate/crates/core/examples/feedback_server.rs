//! Embeds the feedback service, simulates a user typing against it and
//! prints the stream. Twenty simulated minutes pass per wall second, so the
//! run takes about twelve seconds.
//!
//!     cargo run -p heatkb --example feedback_server
//!
//! While it runs the endpoints are live, e.g.
//! `curl -N http://127.0.0.1:<port>/stream`.

use std::time::{Duration, Instant};

use heatkb::service::{router, FeedbackService, ServiceConfig};

#[tokio::main]
async fn main() {
    let config = ServiceConfig { time_scale: 1200.0, ..ServiceConfig::default() };
    let service = FeedbackService::with_scaled_clock(config).unwrap();
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    println!("listening on http://{}", listener.local_addr().unwrap());

    let app = router(service.clone());
    tokio::spawn(async move { axum::serve(listener, app).await });
    service.spawn_ticker(Duration::from_millis(10));

    // Type without pause for 80 simulated minutes, then walk away. A key
    // every millisecond of wall time is about 1.2 s of simulated time,
    // inside the keypress grace window, so the typing is one long interval.
    let typist = service.clone();
    tokio::spawn(async move {
        let until = Instant::now() + Duration::from_secs(4);
        while Instant::now() < until {
            typist.keypress();
            tokio::time::sleep(Duration::from_millis(1)).await;
        }
    });

    let mut stream = service.subscribe();
    for _ in 0..8 {
        let msg = stream.recv().await.unwrap();
        println!(
            "period {:>2}: {:<12} {}  [{}]",
            msg.period_index, msg.phrase, msg.color, msg.payload_hex
        );
    }
}
