use std::collections::BTreeMap;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use lesionkit::io::export_nomogram;
use lesionkit::model::*;
use lesionkit_service::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tower::ServiceExt;

fn continuous_fixture() -> Nomogram {
    let model = LogisticModel {
        predictors: vec!["margin".into(), "convexity1".into()],
        intercept: -3.1,
        coefficients: vec![0.7, -4.2],
        covariance: vec![vec![0.0; 3]; 3],
        n: 100,
        events: 40,
        iterations: 5,
    };
    let mut n = build_nomogram("test-fused", Task::Biopsy, &model, vec![AxisSpec::descriptor("margin").unwrap(), AxisSpec::continuous(0.6, 1.0)]).unwrap();
    n.bands = vec![Band { label: "follow-up".into(), min_probability: 0.0 }, Band { label: "biopsy advised".into(), min_probability: 0.3 }];
    n
}

fn registry() -> Registry {
    let mut r = Registry::default();
    for n in [paper_fixture_nomogram(Task::Biopsy, None), paper_fixture_nomogram(Task::Malignancy, None), continuous_fixture()] {
        r.insert_bytes(export_nomogram(&n), "memory").unwrap();
    }
    r
}

async fn call(app: &axum::Router, req: Request<Body>) -> (StatusCode, Vec<u8>) {
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    (status, resp.into_body().collect().await.unwrap().to_bytes().to_vec())
}

fn score_req(body: &impl serde::Serialize) -> Request<Body> {
    Request::post("/score").header("content-type", "application/json").body(Body::from(serde_json::to_vec(body).unwrap())).unwrap()
}

#[tokio::test]
async fn list_and_fetch() {
    let reg = registry();
    let app = router(reg.clone());
    let (s, body) = call(&app, Request::get("/nomograms").body(Body::empty()).unwrap()).await;
    assert_eq!(s, StatusCode::OK);
    let list: Vec<ListEntry> = serde_json::from_slice(&body).unwrap();
    let ids: Vec<&str> = list.iter().map(|e| e.id.as_str()).collect();
    assert_eq!(ids, vec!["biopsy-paper-fixture", "malignancy-paper-fixture", "test-fused"]);
    for id in ids {
        let (s, body) = call(&app, Request::get(format!("/nomograms/{id}")).body(Body::empty()).unwrap()).await;
        assert_eq!(s, StatusCode::OK);
        assert_eq!(body, reg.get(id).unwrap().bytes.to_vec());
        assert_eq!(lesionkit::io::verify_checksum(&body).unwrap(), reg.get(id).unwrap().checksum);
    }
    let (s, body) = call(&app, Request::get("/nomograms/nope").body(Body::empty()).unwrap()).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert_eq!(serde_json::from_slice::<ErrorBody>(&body).unwrap().error, "not_found");
}

#[tokio::test]
async fn minimum_risk_scores_zero_and_is_stable() {
    let reg = registry();
    let app = router(reg.clone());
    let n = &reg.get("biopsy-paper-fixture").unwrap().nomogram;
    let req = ScoreRequest { nomogram_id: n.id.clone(), features: n.min_risk_features() };
    let (s, a) = call(&app, score_req(&req)).await;
    assert_eq!(s, StatusCode::OK);
    let r: ScoreResponse = serde_json::from_slice(&a).unwrap();
    assert_eq!(r.total_points, 0.0);
    assert!(!r.calibrated);
    assert_eq!(r.checksum, reg.get(&n.id).unwrap().checksum);
    assert_eq!(r.version, "1.1");
    let (_, b) = call(&app, score_req(&req)).await;
    assert_eq!(a, b);
}

#[tokio::test]
async fn validation_errors_are_field_level() {
    let app = router(registry());
    let mut f = BTreeMap::new();
    f.insert("margin".to_string(), FeatureValue::Level("speculated".into()));
    f.insert("convexity1".to_string(), FeatureValue::Level("high".into()));
    let (s, body) = call(&app, score_req(&ScoreRequest { nomogram_id: "test-fused".into(), features: f })).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    let e: ErrorBody = serde_json::from_slice(&body).unwrap();
    let fields: Vec<&str> = e.fields.iter().map(|f| f.field.as_str()).collect();
    assert_eq!(fields, vec!["margin", "convexity1"]);
    let (s, _) = call(&app, Request::post("/score").body(Body::from("{not json")).unwrap()).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    let (s, _) = call(&app, score_req(&ScoreRequest { nomogram_id: "missing".into(), features: BTreeMap::new() })).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
}

fn random_features(n: &Nomogram, rng: &mut ChaCha8Rng) -> BTreeMap<String, FeatureValue> {
    n.predictors
        .iter()
        .map(|a| {
            let v = match &a.kind {
                AxisKind::Categorical { levels } => FeatureValue::Level(levels[rng.gen_range(0..levels.len())].clone()),
                AxisKind::Continuous => FeatureValue::Value(rng.gen_range(a.range.0 - 0.1..a.range.1 + 0.1)),
            };
            (a.name.clone(), v)
        })
        .collect()
}

#[tokio::test]
async fn responses_match_library_scores() {
    let reg = registry();
    let app = router(reg.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let ids = reg.ids().into_iter().map(String::from).collect::<Vec<_>>();
    for k in 0..1000 {
        let doc = reg.get(&ids[k % ids.len()]).unwrap();
        let features = random_features(&doc.nomogram, &mut rng);
        let direct = doc.nomogram.score_features(&features).unwrap();
        let (s, body) = call(&app, score_req(&ScoreRequest { nomogram_id: doc.nomogram.id.clone(), features })).await;
        assert_eq!(s, StatusCode::OK);
        let got: serde_json::Value = serde_json::from_slice(&body).unwrap();
        let want = serde_json::to_value(ScoreResponse::new(doc, &direct)).unwrap();
        assert_eq!(got.to_string(), want.to_string());
        let p = got["probability"].as_f64().unwrap();
        assert!((p - direct.probability).abs() <= 5e-12 * direct.probability);
        assert_eq!(got["warnings"].as_array().unwrap().len(), direct.clamped.len());
    }
}

#[tokio::test]
async fn concurrent_identical_requests_agree() {
    let reg = registry();
    let app = router(reg.clone());
    let n = reg.get("test-fused").unwrap().nomogram.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let req = ScoreRequest { nomogram_id: n.id.clone(), features: random_features(&n, &mut rng) };
    let handles: Vec<_> = (0..32)
        .map(|_| {
            let app = app.clone();
            let body = serde_json::to_vec(&req).unwrap();
            tokio::spawn(async move { call(&app, Request::post("/score").body(Body::from(body)).unwrap()).await.1 })
        })
        .collect();
    let mut bodies = Vec::new();
    for h in handles {
        bodies.push(h.await.unwrap());
    }
    assert!(bodies.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn load_dir_serves_documents_and_rejects_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let nested = dir.path().join("biopsy/nomograms");
    std::fs::create_dir_all(&nested).unwrap();
    let bytes = export_nomogram(&continuous_fixture());
    std::fs::write(nested.join("test-fused.json"), &bytes).unwrap();
    std::fs::write(dir.path().join("manifest.json"), b"{\"files\": {}}").unwrap();
    let reg = Registry::load_dir(dir.path()).unwrap();
    assert_eq!(reg.ids(), vec!["test-fused"]);
    assert_eq!(reg.get("test-fused").unwrap().bytes.to_vec(), bytes);
    let mut bad = bytes.clone();
    let i = bad.iter().position(|&b| b == b'7').unwrap();
    bad[i] = b'8';
    std::fs::write(nested.join("test-fused.json"), &bad).unwrap();
    assert!(matches!(Registry::load_dir(dir.path()), Err(LoadError::Document { .. })));
}

#[test]
fn twelve_significant_digits() {
    assert_eq!(round_significant(0.123456789012345), 0.123456789012);
    assert_eq!(round_significant(98765.4321098765), 98765.4321099);
    assert_eq!(round_significant(0.0), 0.0);
}
