use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use serde_json::{json, Value};
use smartsearch::app::{pipeline_for, synthetic_corpus};
use smartsearch::config::AppConfig;
use smartsearch::service::{router, AppState};
use smartsearch_core::eval::generate_queries;
use tower::ServiceExt;

fn config() -> AppConfig {
    let mut cfg = AppConfig::from_toml_str(
        r#"
url_template = "https://archive.example/files/{file_id}"
[providers.llm]
endpoint = "https://user:pw@llm.example:8443/v1/chat?key=abc"
"#,
        "test",
    )
    .unwrap();
    cfg.validate().unwrap();
    cfg.server.ui_dir = None;
    cfg
}

fn ready_app() -> Router {
    let cfg = config();
    let pipeline = pipeline_for(&cfg, synthetic_corpus(&cfg, 7)).unwrap();
    router(Arc::new(AppState::with_pipeline(cfg, pipeline)))
}

async fn call(app: &Router, req: Request<Body>) -> (StatusCode, Value) {
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = axum::body::to_bytes(resp.into_body(), usize::MAX).await.unwrap();
    let body = serde_json::from_slice(&bytes).unwrap_or(Value::String(String::from_utf8_lossy(&bytes).into()));
    (status, body)
}

fn post(body: Value) -> Request<Body> {
    Request::post("/v1/query").header("content-type", "application/json").body(Body::from(body.to_string())).unwrap()
}

fn get(path: &str) -> Request<Body> {
    Request::get(path).body(Body::empty()).unwrap()
}

/// Drop every timing field so two responses can be compared.
fn without_timings(mut v: Value) -> Value {
    fn strip(v: &mut Value) {
        match v {
            Value::Object(m) => {
                m.retain(|k, _| k != "ms" && k != "total_ms");
                m.values_mut().for_each(strip);
            }
            Value::Array(a) => a.iter_mut().for_each(strip),
            _ => {}
        }
    }
    strip(&mut v);
    v
}

#[tokio::test]
async fn not_ready_until_pipeline_is_set() {
    let cfg = config();
    let corpus = synthetic_corpus(&cfg, 7);
    let state = Arc::new(AppState::new(cfg.clone()));
    let app = router(Arc::clone(&state));
    let (s, body) = call(&app, get("/healthz")).await;
    assert_eq!(s, StatusCode::SERVICE_UNAVAILABLE);
    assert_eq!(body["status"], "index_not_ready");
    let (s, body) = call(&app, post(json!({"query": "Give me some files about oceans"}))).await;
    assert_eq!(s, StatusCode::SERVICE_UNAVAILABLE);
    assert_eq!(body["code"], "index_not_ready");

    state.set_pipeline(pipeline_for(&cfg, corpus).unwrap());
    let (s, body) = call(&app, get("/healthz")).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(body["status"], "ready");
    assert_eq!(body["files"], 120);
}

#[tokio::test]
async fn english_query_response_shape() {
    let app = ready_app();
    let (s, body) = call(&app, post(json!({"query": "Recommend some image files about wildlife"}))).await;
    assert_eq!(s, StatusCode::OK, "{body}");
    let ids: Vec<&str> = body["file_ids"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert!(!ids.is_empty());
    for id in &ids {
        assert!(body["text"].as_str().unwrap().contains(&format!("[file_id: {id}]")));
    }
    let urls = body["file_urls"].as_array().unwrap();
    assert_eq!(urls.len(), ids.len());
    assert_eq!(urls[0], format!("https://archive.example/files/{}", ids[0]));
    assert_eq!(body["language"]["code"], "en");
    assert_eq!(body["translation_degraded"], false);
    assert_eq!(body["degradations"], json!([]));
    let trace = &body["trace"];
    assert_eq!(trace["route"]["engines"], json!(["image"]));
    assert_eq!(trace["stages"].as_array().unwrap().len(), 6);
    assert!(trace["retrieved"].as_array().unwrap().len() <= 10);
}

#[tokio::test]
async fn korean_query_cites_the_same_files_in_korean() {
    let app = ready_app();
    let topics: Vec<String> = smartsearch_core::eval::DEFAULT_TOPICS.iter().map(|t| t.to_string()).collect();
    let q = generate_queries(&topics, true).unwrap().into_iter().find(|q| q.text_ko.is_some()).unwrap();
    let (_, en) = call(&app, post(json!({"query": q.text_en}))).await;
    let (s, ko) = call(&app, post(json!({"query": q.text_ko.unwrap()}))).await;
    assert_eq!(s, StatusCode::OK, "{ko}");
    assert_eq!(ko["language"]["code"], "ko");
    assert_eq!(ko["file_ids"], en["file_ids"]);
    assert_eq!(ko["trace"]["query_en"], json!(q.text_en));
    assert!(ko["text"].as_str().unwrap().chars().any(|c| ('\u{ac00}'..='\u{d7a3}').contains(&c)));
}

#[tokio::test]
async fn bad_requests_are_400() {
    let app = ready_app();
    for body in [
        json!({"query": "oceans", "alpha": 3.0}),
        json!({"query": "oceans", "alpha": -0.1}),
        json!({"query": "   "}),
        json!({"query": "oceans", "k": 0}),
        json!({"query": "oceans", "branch_k": 0}),
        json!({"query": "oceans", "colour": "red"}),
        json!({"query": "oceans", "ablation": {"spellcheck": true}}),
        json!({"text": "oceans"}),
    ] {
        let (s, resp) = call(&app, post(body.clone())).await;
        assert_eq!(s, StatusCode::BAD_REQUEST, "{body} -> {resp}");
        assert_eq!(resp["code"], "bad_request");
        assert!(!resp["error"].as_str().unwrap().is_empty());
    }
    let raw =
        Request::post("/v1/query").header("content-type", "application/json").body(Body::from("{not json")).unwrap();
    assert_eq!(call(&app, raw).await.0, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn config_is_redacted() {
    let app = ready_app();
    let (s, body) = call(&app, get("/v1/config")).await;
    assert_eq!(s, StatusCode::OK);
    let llm = &body["providers"]["llm"];
    assert_eq!(llm["endpoint"], "https://llm.example:8443/…");
    assert_eq!(llm["auth_env_var"], "SMARTSEARCH_LLM_API_KEY");
    assert!(llm["api_key_set"].is_boolean());
    let text = body.to_string();
    assert!(!text.contains("pw@") && !text.contains("key=abc"));
    assert!(body["prompt_template"].as_str().unwrap().contains("{chunks}"));
}

#[tokio::test]
async fn alpha_zero_ranks_by_bm25_alone() {
    let app = ready_app();
    let body = json!({"query": "Give me some files about oceans", "alpha": 0.0, "ablation": {"router": true}});
    let (s, resp) = call(&app, post(body)).await;
    assert_eq!(s, StatusCode::OK, "{resp}");
    assert_eq!(resp["trace"]["merged_index"], true);
    let nodes = resp["trace"]["retrieved"].as_array().unwrap();
    assert!(nodes.len() > 1);
    let key = |n: &Value| (-n["bm25_norm"].as_f64().unwrap(), n["chunk_id"].as_str().unwrap().to_string());
    let mut sorted = nodes.clone();
    sorted.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
    assert_eq!(&sorted, nodes);
    for n in nodes {
        assert_eq!(n["hybrid_score"], n["bm25_norm"]);
    }
}

#[tokio::test]
async fn concurrent_identical_requests_agree() {
    let app = ready_app();
    let body = json!({"query": "Retrieve some audio or video files about celebrities", "k": 7});
    let handles: Vec<_> = (0..8)
        .map(|_| {
            let app = app.clone();
            let body = body.clone();
            tokio::spawn(async move { call(&app, post(body)).await })
        })
        .collect();
    let mut seen = Vec::new();
    for h in handles {
        let (s, v) = h.await.unwrap();
        assert_eq!(s, StatusCode::OK);
        seen.push(without_timings(v));
    }
    assert!(seen.windows(2).all(|w| w[0] == w[1]));
}

#[tokio::test]
async fn serves_the_ui_bundle() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("index.html"), "<h1>search</h1>").unwrap();
    let mut cfg = config();
    cfg.server.ui_dir = Some(dir.path().to_path_buf());
    let app = router(Arc::new(AppState::new(cfg)));
    let (s, body) = call(&app, get("/ui/")).await;
    assert_eq!((s, body), (StatusCode::OK, Value::String("<h1>search</h1>".into())));
    assert_eq!(call(&app, get("/ui/missing.js")).await.0, StatusCode::NOT_FOUND);
    assert_eq!(call(&app, get("/nowhere")).await.0, StatusCode::NOT_FOUND);
}
