use std::convert::Infallible;

use axum::extract::State;
use axum::http::StatusCode;
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::Stream;
use tokio::sync::broadcast;

use super::{FeedbackService, SessionError, StreamMessage};
use crate::ingest::RawEvent;

/// Routes:
///
/// - `POST /events` one event record, same JSON as a log line
/// - `POST /keypress` typing activity at the current simulated time
/// - `POST /reset` cold start; returns the new current message
/// - `GET /state`, `GET /config`
/// - `GET /stream` server-sent events, one JSON message per period
pub fn router(service: FeedbackService) -> Router {
    Router::new()
        .route("/events", post(post_event))
        .route("/keypress", post(post_keypress))
        .route("/reset", post(post_reset))
        .route("/state", get(get_state))
        .route("/config", get(get_config))
        .route("/stream", get(get_stream))
        .with_state(service)
}

fn error(status: StatusCode, message: impl ToString) -> Response {
    (status, Json(serde_json::json!({ "error": message.to_string() }))).into_response()
}

async fn post_event(State(service): State<FeedbackService>, body: String) -> Response {
    let event = match RawEvent::from_json(body.trim()) {
        Ok(event) => event,
        Err(message) => return error(StatusCode::BAD_REQUEST, message),
    };
    match service.ingest_event(event) {
        Ok(()) => StatusCode::ACCEPTED.into_response(),
        Err(e @ (SessionError::Stale { .. } | SessionError::BeforeOrigin { .. })) => {
            error(StatusCode::CONFLICT, e)
        }
    }
}

async fn post_keypress(State(service): State<FeedbackService>) -> StatusCode {
    service.keypress();
    StatusCode::NO_CONTENT
}

async fn post_reset(State(service): State<FeedbackService>) -> Json<StreamMessage> {
    Json(StreamMessage::new(&service.reset()))
}

async fn get_state(State(service): State<FeedbackService>) -> Response {
    Json(service.snapshot()).into_response()
}

async fn get_config(State(service): State<FeedbackService>) -> Response {
    Json(service.config().clone()).into_response()
}

async fn get_stream(
    State(service): State<FeedbackService>,
) -> Sse<impl Stream<Item = Result<Event, Infallible>>> {
    let rx = service.subscribe();
    let stream = futures::stream::unfold(rx, |mut rx| async move {
        match rx.recv().await {
            Ok(message) => {
                let event = Event::default()
                    .json_data(&message)
                    .expect("stream messages serialize");
                Some((Ok(event), rx))
            }
            // A lagging subscriber would see a gap; end its stream instead.
            Err(broadcast::error::RecvError::Lagged(_) | broadcast::error::RecvError::Closed) => {
                None
            }
        }
    });
    Sse::new(stream).keep_alive(KeepAlive::default())
}
