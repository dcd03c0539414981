use std::time::Duration;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use brics_core::GrammarSet;
use brics_gateway::{router, AppState};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

const SAMPLE: &str = "void f() {\n  if (x > 0) {\n    y = 1;\n  }\n}\n";

fn app() -> Router {
    router(AppState::new(GrammarSet::builtin()))
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
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

async fn open(app: &Router, text: &str) -> String {
    let (status, v) = call(app, "POST", "/sessions", Some(json!({"text": text, "grammar": "c"}))).await;
    assert_eq!(status, StatusCode::CREATED);
    v["session_id"].as_str().unwrap().to_string()
}

#[tokio::test]
async fn create_and_fetch() {
    let app = app();
    let (status, v) = call(&app, "POST", "/sessions", Some(json!({"text": SAMPLE, "grammar": "c"}))).await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(v["version"], 0);
    assert_eq!(v["tree"]["roots"][0]["children"][0]["kind"], "branch");
    assert_eq!(v["diagnostics"], json!([]));
    let id = v["session_id"].as_str().unwrap();

    let (status, v) = call(&app, "GET", &format!("/sessions/{id}"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["text"], SAMPLE);

    let (status, v) = call(&app, "GET", "/sessions/nope", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(v["code"], "E_NOT_FOUND");
    assert_eq!(v["status"], 404);

    let (status, v) = call(&app, "POST", "/sessions", Some(json!({"text": "", "grammar": "cobol"}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["code"], "E_UNKNOWN_GRAMMAR");

    let (status, v) = call(&app, "POST", "/sessions", Some(json!({"txt": ""}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(v["code"], "E_BAD_REQUEST");
}

#[tokio::test]
async fn edits_and_errors() {
    let app = app();
    let id = open(&app, SAMPLE).await;
    let uri = format!("/sessions/{id}/edits");
    let at = SAMPLE.find("  if").unwrap();
    let (status, v) = call(&app, "POST", &uri, Some(json!({"start_byte": at, "end_byte": at, "replacement": "//", "base_version": 0}))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["version"], 1);
    assert_eq!(v["tree"]["roots"][0]["children"], json!([]));

    let (status, v) = call(&app, "POST", &uri, Some(json!({"start_byte": 0, "end_byte": 0, "replacement": "x", "base_version": 0}))).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(v["code"], "E_STALE");
    let (status, v) = call(&app, "POST", &uri, Some(json!({"start_byte": 0, "end_byte": 999, "replacement": "", "base_version": 1}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["code"], "E_RANGE");
}

#[tokio::test]
async fn rects_overview_and_svg() {
    let app = app();
    let id = open(&app, SAMPLE).await;
    let (status, v) = call(&app, "GET", &format!("/sessions/{id}/rects"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["rects"].as_array().unwrap().len(), 2);
    assert_eq!(v["rects"][1]["fill"], "#E8E8E8");

    let (status, v) = call(&app, "GET", &format!("/sessions/{id}/overview?w=200&h=100&g=1&from=1&to=5&errors=2"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["rects"].as_array().unwrap().len(), 2);
    let scale = v["scale"].as_f64().unwrap();
    assert!(scale > 0.0 && scale * 5.0 <= 100.0);
    assert_eq!(v["error_lines"][0]["line"], 2);
    assert_eq!(v["error_lines"][0]["y"].as_f64().unwrap(), scale);

    let (status, v) = call(&app, "GET", &format!("/sessions/{id}/overview?w=200&h=100&g=1&from=1&to=100"), None).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["code"], "E_RANGE");
    let (status, _) = call(&app, "GET", &format!("/sessions/{id}/overview?w=abc&h=1"), None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    let (status, svg) = call(&app, "GET", &format!("/sessions/{id}/render.svg?fold=0"), None).await;
    assert_eq!(status, StatusCode::OK);
    let svg = svg.as_str().unwrap();
    assert_eq!(svg.matches("<rect").count(), 2);
    assert!(!svg.contains("y = 1"));
}

#[tokio::test]
async fn extract_applies_as_an_edit() {
    let app = app();
    let text = "int f() {\n    int a = 1;\n    int b = 2;\n    if (a > 0) {\n        b = a + 1;\n    }\n    return b;\n}\n";
    let id = open(&app, text).await;
    let uri = format!("/sessions/{id}/refactor/extract");
    let (status, v) = call(&app, "POST", &uri, Some(json!({"block_id": 1, "name": "bump"}))).await;
    assert_eq!(status, StatusCode::OK, "{v}");
    assert_eq!(v["version"], 1);
    assert_eq!(v["call_line"], 4);
    assert_eq!(v["deps"]["outputs"], json!(["b"]));
    let (_, snap) = call(&app, "GET", &format!("/sessions/{id}"), None).await;
    assert_eq!(snap["text"], v["new_source"]);

    let (status, v) = call(&app, "POST", &uri, Some(json!({"block_id": 0, "name": "bump"}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["code"], "E_NAME_TAKEN");
    let (status, v) = call(&app, "POST", &uri, Some(json!({"block_id": 1, "name": "x", "base_version": 0}))).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(v["code"], "E_STALE");
}

#[tokio::test]
async fn events_arrive_in_version_order() {
    let app = app();
    let id = open(&app, "").await;
    let req = Request::builder().uri(format!("/sessions/{id}/events")).body(Body::empty()).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    assert_eq!(resp.headers()["content-type"], "application/x-ndjson");
    let mut body = resp.into_body();

    for v in 0..20u64 {
        let edit = json!({"start_byte": 0, "end_byte": 0, "replacement": "{}", "base_version": v});
        let (status, _) = call(&app, "POST", &format!("/sessions/{id}/edits"), Some(edit)).await;
        assert_eq!(status, StatusCode::OK);
    }
    let mut buf = String::new();
    while buf.lines().count() < 20 {
        let frame = tokio::time::timeout(Duration::from_secs(5), body.frame()).await.unwrap().unwrap().unwrap();
        buf.push_str(std::str::from_utf8(frame.data_ref().unwrap()).unwrap());
    }
    let versions: Vec<u64> = buf
        .lines()
        .map(|l| serde_json::from_str::<Value>(l).unwrap()["version"].as_u64().unwrap())
        .collect();
    assert_eq!(versions, (1..=20).collect::<Vec<_>>());
    let last: Value = serde_json::from_str(buf.lines().last().unwrap()).unwrap();
    assert_eq!(last["digest"], brics_core::digest(&"{}".repeat(20)));
}

#[tokio::test]
async fn serves_over_tcp() {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(brics_gateway::serve(listener, AppState::new(GrammarSet::builtin())));
    let mut stream = tokio::net::TcpStream::connect(addr).await.unwrap();
    use tokio::io::{AsyncReadExt, AsyncWriteExt};
    stream
        .write_all(b"GET /sessions/none HTTP/1.1\r\nhost: x\r\nconnection: close\r\n\r\n")
        .await
        .unwrap();
    let mut out = String::new();
    stream.read_to_string(&mut out).await.unwrap();
    assert!(out.starts_with("HTTP/1.1 404"), "{out}");
    assert!(out.contains("E_NOT_FOUND"));
}
