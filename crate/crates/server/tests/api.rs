use std::path::Path;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use orderlearn::datasets::io::write_dir;
use orderlearn::datasets::{generate_synthetic, SyntheticConfig};
use orderlearn::order::{Label, Pair};
use orderlearn::rng::seeded;
use orderlearn_server::{read_log, replay_closure, router, Catalog, EventSource, LabelEvent, SessionStore};
use rand::seq::SliceRandom;
use serde_json::{json, Value};
use tempfile::TempDir;
use tower::ServiceExt;

struct Fixture {
    dir: TempDir,
}

impl Fixture {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let pool = generate_synthetic(&SyntheticConfig {
            n_nodes: 9,
            n_layers: 3,
            edge_prob: 0.4,
            dim: 2,
            noise: 0.3,
            seed: 4,
            max_pairs: None,
        })
        .unwrap();
        let toy = dir.path().join("data/toy");
        write_dir(&pool, &toy).unwrap();
        let names: String = (0..9).map(|i| format!("{i},concept-{i}\n")).collect();
        std::fs::write(toy.join("names.csv"), format!("id,name\n{names}")).unwrap();
        let ui = dir.path().join("ui");
        std::fs::create_dir_all(&ui).unwrap();
        std::fs::write(ui.join("index.html"), "<html>labeling</html>").unwrap();
        Fixture { dir }
    }

    fn logs(&self) -> std::path::PathBuf {
        self.dir.path().join("logs")
    }

    fn store(&self) -> Arc<SessionStore> {
        let catalog = Catalog::load(&self.dir.path().join("data")).unwrap();
        let store = SessionStore::new(catalog, &self.logs()).unwrap();
        store.restore().unwrap();
        Arc::new(store)
    }

    fn app(&self) -> (Router, Arc<SessionStore>) {
        let store = self.store();
        (router(Arc::clone(&store), Some(self.dir.path().join("ui"))), store)
    }
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Vec<u8>) {
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
    let bytes = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, bytes)
}

async fn call_json(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let (status, bytes) = call(app, method, uri, body).await;
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

async fn create(app: &Router, strategy: &str, budget: usize) -> String {
    let (status, body) = call_json(
        app,
        "POST",
        "/api/sessions",
        Some(json!({"dataset": "toy", "strategy": strategy, "budget": budget, "seed": 3})),
    )
    .await;
    assert_eq!(status, StatusCode::OK, "{body}");
    body["id"].as_str().unwrap().to_string()
}

async fn next(app: &Router, id: &str) -> Value {
    let (status, body) = call_json(app, "GET", &format!("/api/sessions/{id}/next"), None).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    body
}

async fn label(app: &Router, id: &str, src: u64, dst: u64, label: i64) -> (StatusCode, Value) {
    call_json(
        app,
        "POST",
        &format!("/api/sessions/{id}/labels"),
        Some(json!({"src": src, "dst": dst, "label": label})),
    )
    .await
}

fn pair_of(q: &Value) -> (u64, u64) {
    (q["src"].as_u64().unwrap(), q["dst"].as_u64().unwrap())
}

fn truth_sign(store: &SessionStore, src: u64, dst: u64) -> i64 {
    let pool = &store.catalog().get("toy").unwrap().pool;
    i64::from(pool.truth().label(Pair::new(src as u32, dst as u32)).unwrap().sign())
}

/// Answers `n` queries from the ground truth.
async fn answer_truthfully(app: &Router, store: &SessionStore, id: &str, n: usize) {
    for _ in 0..n {
        let q = next(app, id).await;
        if q.get("exhausted").is_some() {
            break;
        }
        let (s, d) = pair_of(&q);
        let (status, body) = label(app, id, s, d, truth_sign(store, s, d)).await;
        assert_eq!(status, StatusCode::OK, "{body}");
    }
}

#[tokio::test]
async fn sessions_are_created_with_distinct_ids() {
    let fx = Fixture::new();
    let (app, _) = fx.app();
    let a = create(&app, "lc-r+", 10).await;
    let b = create(&app, "LC-R+", 10).await;
    assert_ne!(a, b);
    let (status, body) = call_json(&app, "GET", "/api/sessions", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["sessions"].as_array().unwrap().len(), 2);
    let (status, body) = call_json(&app, "GET", "/api/datasets", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["datasets"][0]["name"], "toy");
}

#[tokio::test]
async fn bad_creation_requests_are_rejected() {
    let fx = Fixture::new();
    let (app, _) = fx.app();
    let (status, body) = call_json(
        &app,
        "POST",
        "/api/sessions",
        Some(json!({"dataset": "toy", "strategy": "entropy", "budget": 5})),
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"], "unknown_strategy");
    let (status, body) = call_json(
        &app,
        "POST",
        "/api/sessions",
        Some(json!({"dataset": "nope", "strategy": "lc", "budget": 5})),
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"], "unknown_dataset");
    let (status, _) = call(&app, "POST", "/api/sessions", Some(json!({"strategy": "lc"}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, body) = call_json(&app, "GET", "/api/sessions/missing/stats", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(body["error"], "unknown_session");
}

#[tokio::test]
async fn next_is_pure_and_names_the_nodes() {
    let fx = Fixture::new();
    let (app, _) = fx.app();
    let id = create(&app, "qbc-r+", 10).await;
    let a = next(&app, &id).await;
    let b = next(&app, &id).await;
    assert_eq!(a, b);
    let (s, d) = pair_of(&a);
    assert_eq!(a["src_name"], format!("concept-{s}"));
    assert_eq!(a["dst_name"], format!("concept-{d}"));
    assert_eq!(a["query_index"], 1);
    assert_eq!(a["budget_remaining"], 10);
}

#[tokio::test]
async fn a_positive_answer_deduces_the_reverse_negative() {
    let fx = Fixture::new();
    let (app, _) = fx.app();
    let id = create(&app, "cnt", 10).await;
    let (_, fresh) = call_json(&app, "GET", &format!("/api/sessions/{id}/stats"), None).await;
    assert_eq!(fresh["queries_used"], 0);
    assert_eq!(fresh["labeled_total"], 0);
    assert_eq!(fresh["status"], "active");

    let (s, d) = pair_of(&next(&app, &id).await);
    let (status, body) = label(&app, &id, s, d, 1).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    assert_eq!(body["accepted"], true);
    let deduced: Vec<LabelEvent> = serde_json::from_value(body["deduced"].clone()).unwrap();
    assert!(deduced
        .iter()
        .any(|e| e.pair() == Pair::new(d as u32, s as u32) && e.label == Label::Negative && e.source == EventSource::Deduced));
    let stats = &body["stats"];
    assert_eq!(stats["queries_used"], 1);
    assert!(stats["labeled_total"].as_u64().unwrap() >= 2);
    assert_eq!(
        stats["deduced_total"].as_u64().unwrap(),
        stats["labeled_total"].as_u64().unwrap() - 1 - stats["seed_total"].as_u64().unwrap()
    );
    assert_eq!(stats["deduced_total"].as_u64().unwrap(), deduced.len() as u64);
    let by_rule: u64 = stats["deduced_by_rule"].as_object().unwrap().values().map(|v| v.as_u64().unwrap()).sum();
    assert_eq!(by_rule, deduced.len() as u64);
    assert!(stats["bounds"]["lower"].as_u64().unwrap() <= stats["bounds"]["upper"].as_u64().unwrap());
}

#[tokio::test]
async fn labels_for_other_pairs_are_stale() {
    let fx = Fixture::new();
    let (app, _) = fx.app();
    let id = create(&app, "lc", 10).await;
    let (s, d) = pair_of(&next(&app, &id).await);
    let (status, body) = label(&app, &id, d, s, -1).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(body["error"], "stale_pair");
    assert_eq!(body["expected"]["src"], s);
    let (status, body) = label(&app, &id, s, d, 0).await;
    assert_eq!(status, StatusCode::BAD_REQUEST, "{body}");
    let (_, stats) = call_json(&app, "GET", &format!("/api/sessions/{id}/stats"), None).await;
    assert_eq!(stats["status"], "active");
    assert_eq!(stats["queries_used"], 0);
}

#[tokio::test]
async fn contradicting_a_deduction_halts_the_session() {
    let fx = Fixture::new();
    let (app, _) = fx.app();
    let id = create(&app, "lc-r+", 10).await;
    let (s, d) = pair_of(&next(&app, &id).await);
    let (status, _) = label(&app, &id, s, d, 1).await;
    assert_eq!(status, StatusCode::OK);
    // (d, s) is now a deduced negative.
    let (status, body) = label(&app, &id, d, s, 1).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(body["error"], "conflict");
    let c = &body["conflict"];
    assert_eq!(c["inserted"], json!({"src": d, "dst": s}));
    assert_eq!(c["inserted_label"], 1);
    assert_eq!(c["existing"], -1);
    assert!(c["rule"].is_string());

    let (_, stats) = call_json(&app, "GET", &format!("/api/sessions/{id}/stats"), None).await;
    assert_eq!(stats["status"], "conflicted");
    assert_eq!(stats["conflict"], *c);
    let (status, body) = call_json(&app, "GET", &format!("/api/sessions/{id}/next"), None).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(body["error"], "halted");

    // The halt survives a restart.
    let (app2, _) = fx.app();
    let (_, stats) = call_json(&app2, "GET", &format!("/api/sessions/{id}/stats"), None).await;
    assert_eq!(stats["status"], "conflicted");
}

#[tokio::test]
async fn budget_exhaustion() {
    let fx = Fixture::new();
    let (app, store) = fx.app();
    let id = create(&app, "random", 2).await;
    answer_truthfully(&app, &store, &id, 2).await;
    assert_eq!(next(&app, &id).await, json!({"exhausted": true}));
    let (_, stats) = call_json(&app, "GET", &format!("/api/sessions/{id}/stats"), None).await;
    assert_eq!(stats["status"], "exhausted");
    assert_eq!(stats["budget_remaining"], 0);
    let (status, body) = label(&app, &id, 0, 1, 1).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(body["error"], "exhausted");
}

#[tokio::test]
async fn a_full_pool_run_ends_with_nothing_left() {
    let fx = Fixture::new();
    let (app, store) = fx.app();
    let id = create(&app, "qbc-r+", 1000).await;
    answer_truthfully(&app, &store, &id, 1000).await;
    let (_, stats) = call_json(&app, "GET", &format!("/api/sessions/{id}/stats"), None).await;
    assert_eq!(stats["remaining"], 0);
    assert_eq!(stats["status"], "exhausted");
    assert!(stats["queries_used"].as_u64().unwrap() >= stats["bounds"]["lower"].as_u64().unwrap());
}

#[tokio::test]
async fn the_log_records_answers_and_deductions() {
    let fx = Fixture::new();
    let (app, store) = fx.app();
    let (status, body) = call_json(
        &app,
        "POST",
        "/api/sessions",
        Some(json!({"dataset": "toy", "strategy": "lc-r+", "budget": 8, "n_seeds": 4, "seed": 1})),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    let id = body["id"].as_str().unwrap().to_string();
    answer_truthfully(&app, &store, &id, 8).await;

    let (status, bytes) = call(&app, "GET", &format!("/api/sessions/{id}/log"), None).await;
    assert_eq!(status, StatusCode::OK);
    let events: Vec<LabelEvent> = String::from_utf8(bytes)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    let seeds = events.iter().filter(|e| e.source == EventSource::Seed).count();
    assert_eq!(seeds, 4);
    let human: Vec<usize> = events
        .iter()
        .filter(|e| e.source == EventSource::Human)
        .map(|e| e.query_index)
        .collect();
    assert_eq!(human, (1..=8).collect::<Vec<_>>());
    let mut current = 0;
    for e in &events {
        match e.source {
            EventSource::Seed => assert_eq!(e.query_index, 0),
            EventSource::Human => current = e.query_index,
            EventSource::Deduced => {
                assert_eq!(e.query_index, current);
                assert!(e.rule.is_some());
            }
            EventSource::Rejected => panic!("no conflicts in a truthful run"),
        }
    }
    let (_, stats) = call_json(&app, "GET", &format!("/api/sessions/{id}/stats"), None).await;
    let deduced_events = events.iter().filter(|e| e.source == EventSource::Deduced).count() as u64;
    assert_eq!(stats["deduced_total"].as_u64().unwrap(), deduced_events);
    assert_eq!(stats["labeled_total"].as_u64().unwrap(), events.len() as u64);
}

async fn closure_dump(app: &Router, id: &str) -> Vec<u8> {
    let (status, bytes) = call(app, "GET", &format!("/api/sessions/{id}/closure"), None).await;
    assert_eq!(status, StatusCode::OK);
    bytes
}

#[tokio::test]
async fn restart_replays_to_a_byte_identical_closure() {
    let fx = Fixture::new();
    let (app, store) = fx.app();
    let id = create(&app, "lc-r+", 15).await;
    answer_truthfully(&app, &store, &id, 10).await;
    let dump = closure_dump(&app, &id).await;
    let stats = call_json(&app, "GET", &format!("/api/sessions/{id}/stats"), None).await.1;
    let pending = next(&app, &id).await;
    drop(app);
    drop(store);

    let (app2, store2) = fx.app();
    assert_eq!(closure_dump(&app2, &id).await, dump);
    assert_eq!(call_json(&app2, "GET", &format!("/api/sessions/{id}/stats"), None).await.1, stats);
    assert_eq!(next(&app2, &id).await, pending);
    answer_truthfully(&app2, &store2, &id, 5).await;
    let (_, stats) = call_json(&app2, "GET", &format!("/api/sessions/{id}/stats"), None).await;
    assert_eq!(stats["queries_used"], 15);
    // A new session after restart does not reuse the old id.
    assert_ne!(create(&app2, "lc", 3).await, id);
}

#[tokio::test]
async fn permuted_answers_replay_to_the_same_closure() {
    let fx = Fixture::new();
    let (app, store) = fx.app();
    let id = create(&app, "qbc-r+", 12).await;
    answer_truthfully(&app, &store, &id, 12).await;
    let log = fx.logs().join(format!("{id}.jsonl"));
    let events = read_log(&log).unwrap();
    let pool = &store.catalog().get("toy").unwrap().pool;
    let reference = replay_closure(pool, &events).unwrap();
    let live = store.get(&id).unwrap();
    let live = live.lock().unwrap();
    assert_eq!(reference.positive_set(), live.closure().positive_set());
    assert_eq!(reference.negative_set(), live.closure().negative_set());
    let mut answers: Vec<LabelEvent> = events.into_iter().filter(|e| e.is_answer()).collect();
    let mut rng = seeded(8);
    for _ in 0..5 {
        answers.shuffle(&mut rng);
        let c = replay_closure(pool, &answers).unwrap();
        assert_eq!(c.positive_set(), reference.positive_set());
        assert_eq!(c.negative_set(), reference.negative_set());
    }
}

fn rewrite_log(path: &Path, f: impl Fn(&mut Vec<LabelEvent>)) {
    let mut events = read_log(path).unwrap();
    f(&mut events);
    let text: String = events.iter().map(|e| serde_json::to_string(e).unwrap() + "\n").collect();
    std::fs::write(path, text).unwrap();
}

#[test]
fn tampered_logs_fail_to_replay() {
    let fx = Fixture::new();
    let store = fx.store();
    let id = store
        .create(&orderlearn_server::CreateSession {
            dataset: "toy".into(),
            strategy: "cnt".into(),
            budget: Some(5),
            n_seeds: 0,
            seed: Some(2),
        })
        .unwrap();
    {
        let session = store.get(&id).unwrap();
        let mut s = session.lock().unwrap();
        for _ in 0..3 {
            let q = s.next_query().unwrap().unwrap();
            let pair = Pair::new(q.src, q.dst);
            let y = s.dataset().pool.truth().label(pair).unwrap();
            s.submit(pair, y).unwrap();
        }
    }
    drop(store);
    let log = fx.logs().join(format!("{id}.jsonl"));
    let original = std::fs::read(&log).unwrap();

    rewrite_log(&log, |events| {
        let h = events.iter_mut().find(|e| e.source == EventSource::Human).unwrap();
        h.query_index = 7;
    });
    let catalog = Catalog::load(&fx.dir.path().join("data")).unwrap();
    let err = SessionStore::new(catalog, &fx.logs()).unwrap().restore().unwrap_err();
    assert!(err.to_string().contains("query_index"), "{err}");

    std::fs::write(&log, &original).unwrap();
    rewrite_log(&log, |events| {
        let d = events.iter_mut().find(|e| e.source == EventSource::Deduced).unwrap();
        d.label = d.label.flipped();
    });
    let catalog = Catalog::load(&fx.dir.path().join("data")).unwrap();
    assert!(SessionStore::new(catalog, &fx.logs()).unwrap().restore().is_err());

    std::fs::write(&log, &original).unwrap();
    rewrite_log(&log, |events| {
        events[0].dst = events[0].src;
    });
    let catalog = Catalog::load(&fx.dir.path().join("data")).unwrap();
    assert!(SessionStore::new(catalog, &fx.logs()).unwrap().restore().is_err());

    std::fs::write(&log, &original).unwrap();
    assert_eq!(fx.store().list().len(), 1);
}

#[tokio::test]
async fn the_ui_directory_is_served() {
    let fx = Fixture::new();
    let (app, _) = fx.app();
    let (status, bytes) = call(&app, "GET", "/index.html", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(bytes, b"<html>labeling</html>");
}
