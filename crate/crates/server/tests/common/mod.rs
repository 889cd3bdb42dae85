#![allow(dead_code)]

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use minebench::engine::{BoardView, CellView, Coord, MineField};
use minebench_server::{router, AppState, ServerConfig};
use serde_json::Value;
use tower::ServiceExt;

pub fn app(config: ServerConfig) -> Router {
    router(AppState::open(config).unwrap())
}

pub async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req.header("content-type", "application/json").body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = serde_json::from_slice(&bytes).unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into()));
    (status, value)
}

pub async fn get(app: &Router, uri: &str) -> (StatusCode, Value) {
    call(app, Method::GET, uri, None).await
}

pub async fn post(app: &Router, uri: &str, body: Value) -> (StatusCode, Value) {
    call(app, Method::POST, uri, Some(body)).await
}

pub async fn act(app: &Router, id: &str, action: &str) -> (StatusCode, Value) {
    post(app, &format!("/api/games/{id}/actions"), serde_json::json!({ "action": action })).await
}

pub fn wall() -> MineField {
    MineField::new(5, 5, [(1, 5), (2, 5), (4, 5), (5, 5)].map(|(r, c)| Coord::new(r, c))).unwrap()
}

/// The view as the standard-symbol token grid the API returns.
pub fn tokens(view: &BoardView) -> Value {
    let rows: Vec<Vec<String>> = view
        .cells()
        .chunks(view.cols())
        .map(|r| {
            r.iter()
                .map(|c| match c {
                    CellView::Unopened => "?".to_string(),
                    CellView::Flagged => "F".to_string(),
                    CellView::Blank => ".".to_string(),
                    CellView::Numbered(n) => n.to_string(),
                })
                .collect()
        })
        .collect();
    serde_json::to_value(rows).unwrap()
}
