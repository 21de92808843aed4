//! HTTP scoring of exported nomograms.
//!
//! Documents are loaded once at startup and never change afterwards, so
//! handlers share them without locking.
//!
//! Routes:
//! - `GET /nomograms`: loaded ids with version and checksum
//! - `GET /nomograms/{id}`: the document exactly as exported
//! - `POST /score`: `{"nomogram_id": .., "features": {..}}`

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::path::Path;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use lesionkit::io::{import_nomogram, DocumentError};
use lesionkit::model::{FeatureValue, FieldError, Nomogram, NomogramScore, Task};
use serde::{Deserialize, Serialize};

/// Significant digits of every number in a score response.
pub const SIGNIFICANT_DIGITS: usize = 12;

pub fn round_significant(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().expect("formatted float parses")
}

#[derive(Debug, Clone)]
pub struct LoadedNomogram {
    pub bytes: Bytes,
    pub nomogram: Nomogram,
    pub version: String,
    pub checksum: String,
    pub compatibility: Vec<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Document { path: String, source: DocumentError },
    #[error("{0}: {1}")]
    Io(String, std::io::Error),
    #[error("nomogram id {0} loaded twice")]
    DuplicateId(String),
}

#[derive(Debug, Clone, Default)]
pub struct Registry {
    docs: BTreeMap<String, LoadedNomogram>,
}

impl Registry {
    pub fn insert_bytes(&mut self, bytes: Vec<u8>, origin: &str) -> Result<&LoadedNomogram, LoadError> {
        let imp = import_nomogram(&bytes).map_err(|source| LoadError::Document { path: origin.into(), source })?;
        let id = imp.nomogram.id.clone();
        if self.docs.contains_key(&id) {
            return Err(LoadError::DuplicateId(id));
        }
        let doc = LoadedNomogram { bytes: Bytes::from(bytes), nomogram: imp.nomogram, version: imp.version, checksum: imp.checksum, compatibility: imp.compatibility };
        Ok(self.docs.entry(id).or_insert(doc))
    }

    /// Loads every `*.json` nomogram document under `dir`, recursively.
    pub fn load_dir(dir: &Path) -> Result<Self, LoadError> {
        let mut reg = Self::default();
        let mut stack = vec![dir.to_path_buf()];
        let mut files = Vec::new();
        while let Some(d) = stack.pop() {
            let entries = std::fs::read_dir(&d).map_err(|e| LoadError::Io(d.display().to_string(), e))?;
            for e in entries {
                let p = e.map_err(|e| LoadError::Io(d.display().to_string(), e))?.path();
                if p.is_dir() {
                    stack.push(p);
                } else if p.extension().is_some_and(|x| x == "json") {
                    files.push(p);
                }
            }
        }
        files.sort();
        for p in files {
            let bytes = std::fs::read(&p).map_err(|e| LoadError::Io(p.display().to_string(), e))?;
            // run directories also hold reports; only sealed nomogram documents are served
            if matches!(lesionkit::io::verify_checksum(&bytes), Err(DocumentError::MissingChecksum)) {
                continue;
            }
            reg.insert_bytes(bytes, &p.display().to_string())?;
        }
        Ok(reg)
    }

    pub fn get(&self, id: &str) -> Option<&LoadedNomogram> {
        self.docs.get(id)
    }

    pub fn ids(&self) -> Vec<&str> {
        self.docs.keys().map(String::as_str).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ListEntry {
    pub id: String,
    pub task: Task,
    pub version: String,
    pub checksum: String,
    pub relative_risk_only: bool,
    pub predictors: Vec<String>,
    pub compatibility: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRequest {
    pub nomogram_id: String,
    pub features: BTreeMap<String, FeatureValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictorPoints {
    pub name: String,
    pub points: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreResponse {
    pub nomogram_id: String,
    pub version: String,
    pub checksum: String,
    pub total_points: f64,
    pub per_predictor: Vec<PredictorPoints>,
    pub linear_predictor: f64,
    pub probability: f64,
    pub calibrated: bool,
    pub band: Option<String>,
    pub warnings: Vec<String>,
}

impl ScoreResponse {
    pub fn new(doc: &LoadedNomogram, s: &NomogramScore) -> Self {
        Self {
            nomogram_id: doc.nomogram.id.clone(),
            version: doc.version.clone(),
            checksum: doc.checksum.clone(),
            total_points: round_significant(s.total_points),
            per_predictor: s.per_predictor.iter().map(|(n, p)| PredictorPoints { name: n.clone(), points: round_significant(*p) }).collect(),
            linear_predictor: round_significant(s.linear_predictor),
            probability: round_significant(s.probability),
            calibrated: s.calibrated,
            band: s.band.clone(),
            warnings: s.clamped.iter().map(|n| format!("{n}: input outside the axis range was clamped")).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fields: Vec<FieldError>,
}

fn error(status: StatusCode, kind: &str, message: String, fields: Vec<FieldError>) -> Response {
    (status, Json(ErrorBody { error: kind.into(), message, fields })).into_response()
}

type Shared = Arc<Registry>;

async fn list(State(reg): State<Shared>) -> Json<Vec<ListEntry>> {
    Json(
        reg.docs
            .values()
            .map(|d| ListEntry {
                id: d.nomogram.id.clone(),
                task: d.nomogram.task,
                version: d.version.clone(),
                checksum: d.checksum.clone(),
                relative_risk_only: d.nomogram.relative_risk_only,
                predictors: d.nomogram.predictor_names().into_iter().map(String::from).collect(),
                compatibility: d.compatibility.clone(),
            })
            .collect(),
    )
}

async fn fetch(State(reg): State<Shared>, UrlPath(id): UrlPath<String>) -> Response {
    match reg.get(&id) {
        Some(d) => ([(header::CONTENT_TYPE, "application/json")], d.bytes.clone()).into_response(),
        None => error(StatusCode::NOT_FOUND, "not_found", format!("no nomogram {id:?}"), vec![]),
    }
}

/// Scores a request against the registry; the handler's only logic.
pub fn score_request(reg: &Registry, req: &ScoreRequest) -> Result<ScoreResponse, (StatusCode, ErrorBody)> {
    let doc = reg.get(&req.nomogram_id).ok_or_else(|| {
        (StatusCode::NOT_FOUND, ErrorBody { error: "not_found".into(), message: format!("no nomogram {:?}", req.nomogram_id), fields: vec![] })
    })?;
    let s = doc.nomogram.score_features(&req.features).map_err(|fields| {
        (StatusCode::BAD_REQUEST, ErrorBody { error: "validation".into(), message: "feature map does not match the nomogram".into(), fields })
    })?;
    Ok(ScoreResponse::new(doc, &s))
}

async fn score(State(reg): State<Shared>, body: Bytes) -> Response {
    let req: ScoreRequest = match serde_json::from_slice(&body) {
        Ok(r) => r,
        Err(e) => return error(StatusCode::BAD_REQUEST, "malformed", e.to_string(), vec![]),
    };
    match score_request(&reg, &req) {
        Ok(r) => Json(r).into_response(),
        Err((status, body)) => (status, Json(body)).into_response(),
    }
}

pub fn router(reg: Registry) -> Router {
    Router::new()
        .route("/nomograms", get(list))
        .route("/nomograms/{id}", get(fetch))
        .route("/score", post(score))
        .with_state(Arc::new(reg))
}

pub async fn serve(reg: Registry, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(reg)).await
}
