use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use ibismeet::api::{router, AppState};
use ibismeet_core::query::Answer;
use ibismeet_core::store::{to_canonical, Store};
use ibismeet_core::Meeting;
use ibismeet_testkit::{contradiction_mutant, m1, m1_transcript, mutation};
use serde_json::{json, Value};
use tower::ServiceExt;

fn app_with(meetings: &[Meeting]) -> (tempfile::TempDir, Router) {
    let dir = tempfile::tempdir().unwrap();
    let mut store = Store::open(dir.path()).unwrap();
    for m in meetings {
        store.save_meeting(m, false).unwrap();
    }
    let state = Arc::new(AppState::new(store, None).unwrap());
    (dir, router(state))
}

async fn call_raw(app: &Router, method: &str, uri: &str, body: Vec<u8>) -> (StatusCode, Value) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(Body::from(body))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
    (status, value)
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let raw = body.map(|b| serde_json::to_vec(&b).unwrap()).unwrap_or_default();
    call_raw(app, method, uri, raw).await
}

fn codes(report: &Value) -> Vec<String> {
    report["violations"].as_array().unwrap().iter().map(|v| v["code"].as_str().unwrap().to_owned()).collect()
}

#[tokio::test]
async fn listing_and_fetching_meetings() {
    let (_dir, app) = app_with(&[m1()]);
    let (status, list) = call(&app, "GET", "/meetings", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(list[0]["id"], "M1");
    assert_eq!(list[0]["episodes"], 17);
    let (status, doc) = call(&app, "GET", "/meetings/M1", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(serde_json::from_value::<Meeting>(doc).unwrap(), m1());
    let (status, err) = call(&app, "GET", "/meetings/Z", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(err["code"], "NOT_FOUND");
}

#[tokio::test]
async fn query_chosen_alternative() {
    let (_dir, app) = app_with(&[m1()]);
    let (status, answer) = call(&app, "POST", "/query", Some(json!({"query": "chosen(issue=\"I1\")"}))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(serde_json::from_value::<Answer>(answer).unwrap().ids(), ["P2"]);
    let (status, err) = call(&app, "POST", "/query", Some(json!({"query": "chosen(issue=I1)"}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(err["code"], "PARSE_ERROR");
    let (status, err) = call(&app, "POST", "/query", Some(json!({"query": "chosen(issue=\"I9\")"}))).await;
    assert_eq!(status, StatusCode::NOT_FOUND, "{err}");
    let (status, err) = call(&app, "POST", "/query", Some(json!({"query": "democratic(decision=\"e8\")"}))).await;
    assert_eq!((status, err["code"].as_str()), (StatusCode::BAD_REQUEST, Some("INVALID_INPUT")));
    let (status, _) = call_raw(&app, "POST", "/query", b"not json".to_vec()).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn later_reply_is_refused_with_a_report() {
    let (_dir, app) = app_with(&[m1()]);
    let (status, err) = call(&app, "POST", "/meetings/M1/reply-to", Some(json!({"from": "e6", "to": ["e15"]}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(err["code"], "VALIDATION_FAILED");
    assert_eq!(codes(&err["report"]), ["REPLY_NOT_EARLIER"]);
    assert_eq!(err["report"]["violations"][0]["episode"], "e6");
    let (_, doc) = call(&app, "GET", "/meetings/M1", None).await;
    assert_eq!(serde_json::from_value::<Meeting>(doc).unwrap(), m1());
}

#[tokio::test]
async fn edits_that_add_violations_are_not_persisted() {
    let (_dir, app) = app_with(&[m1()]);
    let (status, err) = call(&app, "POST", "/meetings/M1/reply-to", Some(json!({"from": "e9", "to": ["e6"]}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(codes(&err["report"]), ["REPLY_UNLICENSED"]);

    let unlicensed = json!({"parent": "e0", "label": "REJECT(alternative)", "turns": "t14"});
    let (status, err) = call(&app, "POST", "/meetings/M1/episodes", Some(unlicensed)).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(codes(&err["report"]), ["CHILD_UNLICENSED"]);

    let outside = json!({"parent": "e3", "label": "JUSTIFY", "turns": "t11..t13"});
    let (status, err) = call(&app, "POST", "/meetings/M1/episodes", Some(outside)).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(codes(&err["report"]), ["TEMPORAL_CONTAINMENT"]);

    let (status, err) =
        call(&app, "POST", "/meetings/M1/episodes", Some(json!({"parent": "e99", "label": "ISSUE", "turns": "t6"}))).await;
    assert_eq!((status, err["code"].as_str()), (StatusCode::NOT_FOUND, Some("NOT_FOUND")));
    let (status, err) =
        call(&app, "POST", "/meetings/M1/episodes", Some(json!({"parent": "e3", "label": "ISSUE", "turns": "t99"}))).await;
    assert_eq!((status, err["code"].as_str()), (StatusCode::BAD_REQUEST, Some("INVALID_INPUT")));
    let (status, err) =
        call(&app, "POST", "/meetings/M1/episodes", Some(json!({"parent": "e3", "label": "VOTE", "turns": "t6"}))).await;
    assert_eq!((status, err["code"].as_str()), (StatusCode::BAD_REQUEST, Some("PARSE_ERROR")));

    let (_, doc) = call(&app, "GET", "/meetings/M1", None).await;
    assert_eq!(serde_json::from_value::<Meeting>(doc).unwrap(), m1());
}

#[tokio::test]
async fn licensed_edits_are_persisted() {
    let (dir, app) = app_with(&[m1()]);
    let ask = json!({"parent": "e3", "label": "ASK(explanation)", "turns": "t10", "speaker": "C", "id": "e17"});
    let (status, created) = call(&app, "POST", "/meetings/M1/episodes", Some(ask)).await;
    assert_eq!(status, StatusCode::CREATED, "{created}");
    assert_eq!(created["episode"], "e17");
    let provide = json!({"parent": "e3", "label": "PROVIDE(explanation)", "turns": "t11", "speaker": "B"});
    let (status, created) = call(&app, "POST", "/meetings/M1/episodes", Some(provide)).await;
    assert_eq!(status, StatusCode::CREATED, "{created}");
    let provide_id = created["episode"].as_str().unwrap().to_owned();
    for (from, to) in [("e17", "e6"), (provide_id.as_str(), "e17")] {
        let (status, report) = call(&app, "POST", "/meetings/M1/reply-to", Some(json!({"from": from, "to": [to]}))).await;
        assert_eq!(status, StatusCode::OK, "{report}");
        assert!(codes(&report).is_empty());
    }
    // persisted before the response
    let stored = Store::open(dir.path()).unwrap().load_meeting("M1").unwrap();
    assert_eq!(stored.episodes.len(), 19);
    assert_eq!(stored.replies_of(&provide_id).iter().map(ToString::to_string).collect::<Vec<_>>(), ["e17"]);
    let (status, report) = call(&app, "POST", "/meetings/M1/validate", None).await;
    assert_eq!(status, StatusCode::OK);
    assert!(codes(&report).is_empty());
}

#[tokio::test]
async fn put_replaces_and_queries_see_it() {
    let (_dir, app) = app_with(&[m1()]);
    let (_, answer) = call(&app, "POST", "/query", Some(json!({"query": "contradictions()"}))).await;
    assert!(serde_json::from_value::<Answer>(answer).unwrap().ids().is_empty());

    let (status, report) = call_raw(&app, "PUT", "/meetings/M1", to_canonical(&contradiction_mutant())).await;
    assert_eq!(status, StatusCode::OK);
    assert!(codes(&report).is_empty());
    let (_, answer) = call(&app, "POST", "/query", Some(json!({"query": "contradictions()"}))).await;
    assert_eq!(serde_json::from_value::<Answer>(answer).unwrap().items().len(), 1);

    // stored as given, violations and all
    let (status, report) = call_raw(&app, "PUT", "/meetings/M1", to_canonical(&mutation("late_reply"))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(codes(&report), ["REPLY_NOT_EARLIER"]);

    let (status, err) = call_raw(&app, "PUT", "/meetings/M2", to_canonical(&m1())).await;
    assert_eq!((status, err["code"].as_str()), (StatusCode::BAD_REQUEST, Some("INVALID_INPUT")));
    let (status, err) = call_raw(&app, "PUT", "/meetings/M1", b"{\"id\":".to_vec()).await;
    assert_eq!((status, err["code"].as_str()), (StatusCode::BAD_REQUEST, Some("PARSE_ERROR")));
}

#[tokio::test]
async fn suggestions_and_index_rebuild() {
    let (_dir, app) = app_with(&[m1_transcript()]);
    let (status, found) = call(&app, "GET", "/meetings/M1/suggestions", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(found[0]["parent"], "e0");
    assert_eq!(found[0]["turn_span"], "t6..t12");
    let (status, stats) = call(&app, "POST", "/index/rebuild", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(stats["meetings"], 1);
    assert!(stats["segments"].as_u64().unwrap() > 24);
    let (status, _) = call(&app, "GET", "/meetings/Z/suggestions", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn grammar_can_be_read_and_replaced() {
    let (dir, app) = app_with(&[m1()]);
    let (status, doc) = call(&app, "GET", "/grammar", None).await;
    assert_eq!(status, StatusCode::OK);
    let text = doc["text"].as_str().unwrap().to_owned();
    assert!(text.contains("reply DECISION PROPOSE(alternative)"));

    let (status, err) = call(&app, "PUT", "/grammar", Some(json!({"text": "child MEETING\n"}))).await;
    assert_eq!((status, err["code"].as_str()), (StatusCode::BAD_REQUEST, Some("PARSE_ERROR")));
    assert!(err["message"].as_str().unwrap().contains("line 1"));

    let stripped: String = text.lines().filter(|l| !l.starts_with("reply DECISION")).map(|l| format!("{l}\n")).collect();
    let (status, _) = call(&app, "PUT", "/grammar", Some(json!({"text": stripped}))).await;
    assert_eq!(status, StatusCode::OK);
    let (_, report) = call(&app, "POST", "/meetings/M1/validate", None).await;
    assert_eq!(codes(&report), ["REPLY_UNLICENSED"]);
    // kept in the store for the next session
    assert!(!Store::open(dir.path()).unwrap().grammar().unwrap().to_text().contains("reply DECISION"));
}
