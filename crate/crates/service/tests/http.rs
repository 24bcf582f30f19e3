use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use starpath::{parse_term, tree_equal, validate_trace, Mode, Precedence, Trace};
use starpath_service::{router, AppState};
use tower::ServiceExt;

async fn call(
    app: &Router,
    method: Method,
    uri: &str,
    body: Option<Value>,
) -> (StatusCode, Value, String) {
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
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let text = String::from_utf8(bytes.to_vec()).unwrap();
    (
        status,
        serde_json::from_str(&text).unwrap_or(Value::Null),
        text,
    )
}

async fn create(app: &Router, variant: &str, initial: &str, policy: &str) -> (String, Value) {
    let (st, v, _) = call(
        app,
        Method::POST,
        "/sessions",
        Some(json!({"variant": variant, "initial": initial, "hydra_policy": policy, "seed": 1})),
    )
    .await;
    assert_eq!(st, StatusCode::CREATED, "{v}");
    (
        v["session_id"].as_str().unwrap().to_string(),
        v["state"].clone(),
    )
}

fn same_tree(term: &Value, want: &str) -> bool {
    tree_equal(
        &parse_term(term.as_str().unwrap()).unwrap(),
        &parse_term(want).unwrap(),
    )
}

#[tokio::test(flavor = "multi_thread")]
async fn health() {
    let app = router(AppState::default());
    let (st, v, _) = call(&app, Method::GET, "/health", None).await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(v["status"], "ok");
}

#[tokio::test(flavor = "multi_thread")]
async fn create_reports_heads() {
    let app = router(AppState::default());
    let (id, state) = create(&app, "kp", "dagger(0(0,0))", "fixed:2").await;
    assert_eq!(state["heads"].as_array().unwrap().len(), 2);
    let (_, got, _) = call(&app, Method::GET, &format!("/sessions/{id}"), None).await;
    assert_eq!(got, state);

    let (_, bare) = create(&app, "kp", "dagger", "fixed:2").await;
    assert_eq!(bare["slain"], true);
    assert!(bare["heads"].as_array().unwrap().is_empty());

    let (_, sh) = create(&app, "sh", "4(2,3(6,5))", "fixed:1").await;
    assert!(sh["heads"]
        .as_array()
        .unwrap()
        .iter()
        .any(|h| h["position"] == json!([2, 2])));

    let (st, v, _) = call(
        &app,
        Method::POST,
        "/sessions",
        Some(json!({"variant": "kp", "initial": "0(0)"})),
    )
    .await;
    assert_eq!(st, StatusCode::BAD_REQUEST);
    assert_eq!(v["code"], "invalid");
    let (st, v, _) = call(
        &app,
        Method::POST,
        "/sessions",
        Some(json!({"variant": "kp"})),
    )
    .await;
    assert_eq!(st, StatusCode::BAD_REQUEST);
    assert!(v["error"].is_string());
}

#[tokio::test(flavor = "multi_thread")]
async fn kp_battle_chop_undo_export() {
    let app = router(AppState::default());
    let (id, state) = create(&app, "kp", "dagger(0(0,0))", "fixed:2").await;
    let head = state["heads"][0]["id"].clone();
    let (st, out, _) = call(
        &app,
        Method::POST,
        &format!("/sessions/{id}/chop"),
        Some(json!({"head_id": head, "want_certificate": true})),
    )
    .await;
    assert_eq!(st, StatusCode::OK, "{out}");
    assert!(same_tree(&out["state"]["term"], "dagger(0(0),0(0))"));
    let cert: Trace = serde_json::from_value(out["certificate"].clone()).unwrap();
    assert!(cert.len() >= 2);
    validate_trace(&cert, &Precedence::empty(), Mode::Star).unwrap();
    // the untouched nodes keep their ids
    assert_eq!(out["state"]["tree"]["id"], state["tree"]["id"]);

    let (st, back, _) = call(&app, Method::POST, &format!("/sessions/{id}/undo"), None).await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(back, state);
    let (st, v, _) = call(&app, Method::POST, &format!("/sessions/{id}/undo"), None).await;
    assert_eq!(st, StatusCode::CONFLICT);
    assert_eq!(v["code"], "nothing-to-undo");

    // leftmost to the end
    let mut cur = state;
    let mut moves = 0;
    while cur["slain"] == false {
        let head = cur["heads"][0]["id"].clone();
        let (st, out, _) = call(
            &app,
            Method::POST,
            &format!("/sessions/{id}/chop"),
            Some(json!({"head_id": head})),
        )
        .await;
        assert_eq!(st, StatusCode::OK);
        cur = out["state"].clone();
        moves += 1;
    }
    assert_eq!(moves, 7);
    let (st, _, log) = call(&app, Method::GET, &format!("/sessions/{id}/log"), None).await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(log.lines().count(), 7);
    let records: Vec<starpath::hydra::MoveRecord> = log
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert!(starpath::hydra::replay_log(&records).unwrap().slain);
}

#[tokio::test(flavor = "multi_thread")]
async fn errors_have_codes() {
    let app = router(AppState::default());
    let (st, v, _) = call(&app, Method::GET, "/sessions/nope", None).await;
    assert_eq!(st, StatusCode::NOT_FOUND);
    assert_eq!(v["code"], "not-found");

    let (id, state) = create(&app, "kp", "dagger(0(0,0))", "fixed:2").await;
    let root = state["tree"]["id"].clone();
    let (st, v, _) = call(
        &app,
        Method::POST,
        &format!("/sessions/{id}/chop"),
        Some(json!({"head_id": root})),
    )
    .await;
    assert_eq!(st, StatusCode::CONFLICT);
    assert_eq!(v["code"], "illegal-move");
    assert_eq!(v["state"], state);

    let head = state["heads"][0]["id"].clone();
    let (st, v, _) = call(
        &app,
        Method::POST,
        &format!("/sessions/{id}/chop"),
        Some(json!({"head_id": head, "params": {}})),
    )
    .await;
    assert_eq!(st, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["code"], "params-out-of-domain");

    let (st, _, _) = call(&app, Method::DELETE, &format!("/sessions/{id}"), None).await;
    assert_eq!(st, StatusCode::NO_CONTENT);
    let (st, _, _) = call(&app, Method::DELETE, &format!("/sessions/{id}"), None).await;
    assert_eq!(st, StatusCode::NOT_FOUND);
}

#[tokio::test(flavor = "multi_thread")]
async fn buchholz_substeps_show_the_graft() {
    let app = router(AppState::default());
    let (id, state) = create(&app, "bh", "dagger(0(omega),0(2,7(5)))", "fixed:2").await;
    let head = state["heads"]
        .as_array()
        .unwrap()
        .iter()
        .find(|h| h["position"] == json!([2, 2, 1]))
        .unwrap()["id"]
        .clone();
    let (st, out, _) = call(
        &app,
        Method::POST,
        &format!("/sessions/{id}/chop"),
        Some(json!({"head_id": head})),
    )
    .await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(out["substeps"][0]["phase"], "bh2");
    assert!(same_tree(&out["substeps"][0]["grafted"], "4(2,7(0))"));
    assert!(out.get("certificate").is_none());
}

#[tokio::test(flavor = "multi_thread")]
async fn star_hydra_substeps_follow_the_phases() {
    let app = router(AppState::default());
    let (id, state) = create(&app, "sh", "4(2,3(6,5))", "fixed:1").await;
    let head = state["heads"]
        .as_array()
        .unwrap()
        .iter()
        .find(|h| h["position"] == json!([2, 2]))
        .unwrap()["id"]
        .clone();
    let params = json!({
        "betas": ["4", "4"],
        "response": [
            {"move": "lengthen", "position": [], "label": "2"},
            {"move": "lengthen", "position": [1, 2, 2], "label": "3"},
            {"move": "widen", "position": [1], "child": 2, "count": 2}
        ]
    });
    let (st, out, _) = call(
        &app,
        Method::POST,
        &format!("/sessions/{id}/chop"),
        Some(json!({"head_id": head, "params": params, "want_certificate": true})),
    )
    .await;
    assert_eq!(st, StatusCode::OK, "{out}");
    let phases: Vec<&str> = out["substeps"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["phase"].as_str().unwrap())
        .collect();
    assert_eq!(
        phases,
        [
            "chop",
            "propagate",
            "lengthen",
            "lengthen",
            "widen",
            "waive"
        ]
    );
    assert!(same_tree(
        &out["state"]["term"],
        "2(4(2,3(6,3(4),4),3(6,3(4),4)))"
    ));
    let cert: Trace = serde_json::from_value(out["certificate"].clone()).unwrap();
    assert!(tree_equal(
        &cert.end,
        &parse_term(out["state"]["term"].as_str().unwrap()).unwrap()
    ));

    let bad = json!({"betas": ["5"]});
    let (st, _, _) = call(
        &app,
        Method::POST,
        &format!("/sessions/{id}/chop"),
        Some(json!({"head_id": out["state"]["heads"][0]["id"], "params": bad})),
    )
    .await;
    assert_eq!(st, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test(flavor = "multi_thread")]
async fn same_seed_same_log() {
    let mut logs = Vec::new();
    for _ in 0..2 {
        let app = router(AppState::default());
        let (id, mut cur) = create(&app, "sh", "3(2,1(0))", "random:2").await;
        for _ in 0..4 {
            if cur["slain"] == true {
                break;
            }
            let head = cur["heads"][0]["id"].clone();
            let (_, out, _) = call(
                &app,
                Method::POST,
                &format!("/sessions/{id}/chop"),
                Some(json!({"head_id": head})),
            )
            .await;
            cur = out["state"].clone();
        }
        logs.push(
            call(&app, Method::GET, &format!("/sessions/{id}/log"), None)
                .await
                .2,
        );
    }
    assert!(!logs[0].is_empty());
    assert_eq!(logs[0], logs[1]);
}

#[tokio::test(flavor = "multi_thread")]
async fn snapshot_restores_sessions() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sessions.json");
    let state = AppState::restore(Some(path.clone())).unwrap();
    let app = router(state.clone());
    let (id, view) = create(&app, "kp", "dagger(0(0,0))", "fixed:2").await;
    let head = view["heads"][0]["id"].clone();
    call(
        &app,
        Method::POST,
        &format!("/sessions/{id}/chop"),
        Some(json!({"head_id": head})),
    )
    .await;
    let (_, before, _) = call(&app, Method::GET, &format!("/sessions/{id}"), None).await;
    state.persist().await.unwrap();

    let restored = AppState::restore(Some(path)).unwrap();
    assert_eq!(restored.session_count().await, 1);
    let app = router(restored);
    let (_, after, _) = call(&app, Method::GET, &format!("/sessions/{id}"), None).await;
    assert_eq!(after, before);
    let (st, _, _) = call(&app, Method::POST, &format!("/sessions/{id}/undo"), None).await;
    assert_eq!(st, StatusCode::OK);
}

#[tokio::test(flavor = "multi_thread")]
async fn serves_over_tcp_and_snapshots_on_shutdown() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    let (tx, rx) = tokio::sync::oneshot::channel::<()>();
    let state = AppState::new(Some(path.clone()));
    let server = tokio::spawn(starpath_service::serve_on(
        listener,
        state,
        std::time::Duration::from_secs(30),
        async {
            let _ = rx.await;
        },
    ));
    let mut stream = tokio::net::TcpStream::connect(addr).await.unwrap();
    use tokio::io::{AsyncReadExt, AsyncWriteExt};
    stream
        .write_all(b"GET /health HTTP/1.1\r\nHost: x\r\nConnection: close\r\n\r\n")
        .await
        .unwrap();
    let mut buf = String::new();
    stream.read_to_string(&mut buf).await.unwrap();
    assert!(buf.starts_with("HTTP/1.1 200"), "{buf}");
    tx.send(()).unwrap();
    server.await.unwrap().unwrap();
    assert!(path.exists());
}
