use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use serde_json::{json, Value};
use tower::ServiceExt;

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req
            .header("content-type", "application/json")
            .body(Body::from(b.to_string()))
            .unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = axum::body::to_bytes(resp.into_body(), usize::MAX).await.unwrap();
    let value = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
    (status, value)
}

async fn load(app: &Router, src: &str) -> u64 {
    let (status, v) = call(app, "POST", "/program", Some(json!({ "source": src }))).await;
    assert_eq!(status, StatusCode::OK, "{v}");
    v["programId"].as_u64().unwrap()
}

#[tokio::test]
async fn self_blocking_term_offers_one_tau() {
    let app = ccslm_cli::server::router();
    let id = load(&app, "main = a:{a}.0_0 | ~a.0_0").await;
    let (status, v) = call(&app, "GET", &format!("/program/{id}/state/0/transitions"), None).await;
    assert_eq!(status, StatusCode::OK);
    let ts = v.as_array().unwrap();
    let taus: Vec<_> = ts.iter().filter(|t| t["action"] == "tau").collect();
    assert_eq!(taus.len(), 1);
    for (i, t) in ts.iter().enumerate() {
        assert_eq!(t["index"], i);
        assert_eq!(t["source"], 0);
        assert!(t["targetTerm"].is_string());
    }
}

#[tokio::test]
async fn mutually_blocking_pair_has_one_transition() {
    let app = ccslm_cli::server::router();
    let id = load(&app, "main = ~a:{~a}.0_0 | a:{a}.0_0").await;
    let (_, v) = call(&app, "GET", &format!("/program/{id}/state/0/transitions"), None).await;
    let ts = v.as_array().unwrap();
    assert_eq!(ts.len(), 1);
    assert_eq!(ts[0]["action"], "tau");
}

#[tokio::test]
async fn step_then_undo() {
    let app = ccslm_cli::server::router();
    let id = load(&app, "S = r:{w}.S + w:{w}.S1; S1 = sigma:{sigma}.S; main = S").await;
    let (_, ts) = call(&app, "GET", &format!("/program/{id}/state/0/transitions"), None).await;
    let w = ts.as_array().unwrap().iter().find(|t| t["action"] == "w").unwrap()["index"].clone();

    let (status, v) = call(&app, "POST", &format!("/program/{id}/step"), Some(json!({ "from": 0, "index": w }))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["stateTerm"], "S1");
    let s1 = v["newState"].as_u64().unwrap();

    let (status, _) = call(&app, "POST", &format!("/program/{id}/step"), Some(json!({ "from": 0, "index": 0 }))).await;
    assert_eq!(status, StatusCode::CONFLICT);
    let (status, _) = call(&app, "POST", &format!("/program/{id}/step"), Some(json!({ "from": s1, "index": 9 }))).await;
    assert_eq!(status, StatusCode::CONFLICT);

    let (status, v) = call(&app, "POST", &format!("/program/{id}/undo"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["newState"], 0);
    assert_eq!(v["stateTerm"], "S");
    let (status, _) = call(&app, "POST", &format!("/program/{id}/undo"), None).await;
    assert_eq!(status, StatusCode::CONFLICT);
}

#[tokio::test]
async fn errors_map_to_statuses() {
    let app = ccslm_cli::server::router();
    let (status, v) = call(&app, "POST", "/program", Some(json!({ "source": "main = sigma.0_0" }))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(v["diagnostics"][0]["code"], "E-clock-stability");
    let (status, v) = call(&app, "POST", "/program", Some(json!({ "source": "main = a." }))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(!v["diagnostics"].as_array().unwrap().is_empty());

    let (status, _) = call(&app, "GET", "/program/99/lts", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let id = load(&app, "main = a.0_0").await;
    let (status, _) = call(&app, "GET", &format!("/program/{id}/state/7/transitions"), None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = call(&app, "GET", &format!("/program/{id}/coherence?cong=weak&labels=full"), None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn analysis_endpoints() {
    let app = ccslm_cli::server::router();
    let id = load(&app, "main = a.b.0_0 + a.c.0_0").await;
    let (status, v) = call(&app, "GET", &format!("/program/{id}/coherence"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["verdict"], "incoherent");
    assert!(v["violations"].as_array().unwrap().iter().any(|x| x["kind"] == "not-observable"));

    let (_, v) = call(&app, "GET", &format!("/program/{id}/lts?bound=2"), None).await;
    assert_eq!(v["complete"], false);
    assert_eq!(v["states"].as_array().unwrap().len(), 2);
    let (_, v) = call(&app, "GET", &format!("/program/{id}/coherence?bound=2"), None).await;
    assert_ne!(v["verdict"], "coherent");
}

#[tokio::test]
async fn programs_are_isolated() {
    let app = ccslm_cli::server::router();
    let a = load(&app, "main = a.0_0").await;
    let b = load(&app, "main = a.0_0").await;
    assert_ne!(a, b);
    let (status, _) = call(&app, "POST", &format!("/program/{a}/step"), Some(json!({ "from": 0, "index": 0 }))).await;
    assert_eq!(status, StatusCode::OK);
    let (status, _) = call(&app, "POST", &format!("/program/{b}/step"), Some(json!({ "from": 0, "index": 0 }))).await;
    assert_eq!(status, StatusCode::OK);
}
