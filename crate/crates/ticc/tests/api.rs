use axum::body::{to_bytes, Body};
use axum::http::{Request, StatusCode};
use axum::Router;
use serde_json::{json, Value};
use tower::ServiceExt;

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri).header("content-type", "application/json");
    let req = match body {
        Some(b) => req.body(Body::from(b.to_string())).unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = to_bytes(resp.into_body(), usize::MAX).await.unwrap();
    let value = serde_json::from_slice(&bytes).unwrap_or(Value::Null);
    (status, value)
}

async fn small_session(app: &Router, rounds: usize) -> String {
    let (status, view) =
        call(app, "POST", "/sessions", Some(json!({"samples": 40, "seed": 5, "rounds": rounds}))).await;
    assert_eq!(status, StatusCode::CREATED);
    view["session_id"].as_str().unwrap().to_string()
}

#[tokio::test]
async fn create_returns_the_human_view() {
    let app = ticc::router();
    let (status, view) = call(&app, "POST", "/sessions", Some(json!({"samples": 10}))).await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(view["role"], "human");
    assert_eq!(view["scenario"], "human-study");
    assert_eq!(view["phase"], "robot_turn");
    assert_eq!(view["shopping_list"].as_array().unwrap().len(), 4);
    assert!(view.get("true_capabilities").is_none());
}

#[tokio::test]
async fn spectator_view_hides_the_list() {
    let app = ticc::router();
    let id = small_session(&app, 1).await;
    let (status, view) = call(&app, "GET", &format!("/sessions/{id}/view?role=spectator"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert!(view.get("shopping_list").is_none());
    let (_, view) = call(&app, "GET", &format!("/sessions/{id}/view"), None).await;
    assert_eq!(view["role"], "spectator");
}

#[tokio::test]
async fn errors_have_code_and_message() {
    let app = ticc::router();
    let (status, err) = call(&app, "POST", "/sessions", Some(json!({"scenario": "nowhere"}))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(err["code"], "not_found");
    assert!(err["message"].as_str().unwrap().contains("nowhere"));

    let (status, err) = call(&app, "GET", "/sessions/s404/view", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(err["code"], "not_found");

    let id = small_session(&app, 1).await;
    let (status, err) =
        call(&app, "POST", &format!("/sessions/{id}/human-step"), Some(json!({"action_kind": "noop"}))).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(err["code"], "conflict");

    call(&app, "POST", &format!("/sessions/{id}/robot-step"), None).await;
    let (status, err) =
        call(&app, "POST", &format!("/sessions/{id}/human-step"), Some(json!({"action_kind": "pick"}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(err["code"], "invalid");
    let (status, err) = call(
        &app,
        "POST",
        &format!("/sessions/{id}/human-step"),
        Some(json!({"action_kind": "pick", "item": 17})),
    )
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(err["code"], "invalid");

    let (status, err) = call(&app, "POST", "/sessions", Some(json!({"rounds": 0}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(err["code"], "invalid");
}

#[tokio::test]
async fn full_session_runs_to_done() {
    let app = ticc::router();
    let id = small_session(&app, 2).await;
    let mut closed = 0;
    for _round in 0..2 {
        for _step in 0..6 {
            let (status, r) = call(&app, "POST", &format!("/sessions/{id}/robot-step"), None).await;
            assert_eq!(status, StatusCode::OK);
            assert_eq!(r["view"]["phase"], "human_turn");
            assert!(r["action"]["kind"].is_string());
            let (status, h) = call(
                &app,
                "POST",
                &format!("/sessions/{id}/human-step"),
                Some(json!({"action_kind": "pick", "item": 1})),
            )
            .await;
            assert_eq!(status, StatusCode::OK);
            if !h["round_result"].is_null() {
                closed += 1;
            }
        }
    }
    assert_eq!(closed, 2);
    let (_, view) = call(&app, "GET", &format!("/sessions/{id}/view?role=human"), None).await;
    assert_eq!(view["phase"], "done");
    assert_eq!(view["ledger"].as_array().unwrap().len(), 2);
    assert!(view["true_capabilities"]["human"].is_array());

    let (status, err) = call(&app, "POST", &format!("/sessions/{id}/robot-step"), None).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(err["code"], "conflict");

    let (status, log) = call(&app, "GET", &format!("/sessions/{id}/log"), None).await;
    assert_eq!(status, StatusCode::OK);
    let rounds = log["rounds"].as_array().unwrap();
    assert_eq!(rounds.len(), 2);
    assert_eq!(rounds[0]["steps"].as_array().unwrap().len(), 6);
    assert_eq!(rounds[0]["theta_likelihood"].as_array().unwrap().len(), 7);
    assert_eq!(log["events"][0]["event"], "created");
}
