//! HTTP triage service for hard images.
//!
//! Read routes are side-effect free. `POST /api/annotation` is the only
//! mutating route; writes go through one mutex-guarded journal so lines are
//! never interleaved, and each record is fsynced before the response.

mod fallback;

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::path::{Component, Path, PathBuf};
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::Utc;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::ensemble::softmax_row;
use crate::error::{Error, Result};
use crate::model::{AnnotationDraft, DatasetManifest, ErrorAnnotation, ImageSet, OverlapPartition, PredictionSet, Split};
use crate::store;
use crate::taxonomy::{self, Prevalence};

pub const DEFAULT_PORT: u16 = 8710;

pub struct TriageConfig {
    pub manifest: DatasetManifest,
    pub partition: OverlapPartition,
    pub runs: Vec<PredictionSet>,
    pub images_root: PathBuf,
    pub annotations_path: PathBuf,
    /// Built UI bundle; `index.html` is served at `/`, the rest under `/assets`.
    pub assets_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ClassRef {
    pub index: usize,
    pub name: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ScoredClass {
    pub index: usize,
    pub name: String,
    pub prob: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MemberPrediction {
    pub method_id: String,
    pub top3: Vec<ScoredClass>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct QueueItem {
    pub image_id: String,
    pub truth: ClassRef,
    pub overlap: usize,
    pub members: Vec<MemberPrediction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotation: Option<ErrorAnnotation>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ManifestSummary {
    pub dataset_id: String,
    pub num_classes: usize,
    pub num_images: usize,
    pub split_counts: BTreeMap<Split, usize>,
    pub analyzed_images: u64,
    pub hard_images: u64,
    pub runs: usize,
}

struct Journal {
    path: PathBuf,
    entries: Vec<ErrorAnnotation>,
}

/// Immutable analysis snapshot plus the annotation journal.
pub struct TriageState {
    manifest: DatasetManifest,
    partition: OverlapPartition,
    hard: ImageSet,
    members: BTreeMap<String, Vec<MemberPrediction>>,
    images_root: PathBuf,
    assets_dir: Option<PathBuf>,
    journal: Mutex<Journal>,
}

/// The `k` most probable classes, ties to the lower index.
pub fn top_k(row: &[f32], k: usize, manifest: &DatasetManifest) -> Vec<ScoredClass> {
    let probs = softmax_row(row);
    let mut order: Vec<usize> = (0..probs.len()).collect();
    order.sort_by(|&a, &b| probs[b].total_cmp(&probs[a]).then(a.cmp(&b)));
    order
        .into_iter()
        .take(k)
        .map(|i| ScoredClass {
            index: i,
            name: manifest.vocabulary().name(i).unwrap_or_default().to_string(),
            prob: probs[i],
        })
        .collect()
}

impl TriageState {
    pub fn new(config: TriageConfig) -> Result<Self> {
        let TriageConfig {
            manifest,
            partition,
            runs,
            images_root,
            annotations_path,
            assets_dir,
        } = config;
        let mut members = BTreeMap::new();
        for id in partition.labels().keys() {
            manifest.truth(id)?;
            let per_image = runs
                .iter()
                .map(|run| {
                    Ok(MemberPrediction {
                        method_id: run.method_id().to_string(),
                        top3: top_k(run.covered_row(id)?, 3, &manifest),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            members.insert(id.clone(), per_image);
        }
        let entries = store::read_annotations(&annotations_path)?;
        Ok(TriageState {
            hard: partition.hard().into_iter().collect(),
            manifest,
            partition,
            members,
            images_root,
            assets_dir,
            journal: Mutex::new(Journal {
                path: annotations_path,
                entries,
            }),
        })
    }

    fn entries(&self) -> Vec<ErrorAnnotation> {
        self.journal.lock().expect("journal lock").entries.clone()
    }

    pub fn resolved(&self) -> BTreeMap<String, ErrorAnnotation> {
        taxonomy::resolve_annotations(&self.entries())
    }

    pub fn prevalence(&self) -> Prevalence {
        taxonomy::prevalence(&self.resolved(), &self.hard)
    }

    pub fn summary(&self) -> ManifestSummary {
        ManifestSummary {
            dataset_id: self.manifest.dataset_id().to_string(),
            num_classes: self.manifest.num_classes(),
            num_images: self.manifest.len(),
            split_counts: self.manifest.split_counts(),
            analyzed_images: self.partition.num_images(),
            hard_images: self.hard.len() as u64,
            runs: self.partition.n(),
        }
    }

    /// Items with overlap `o`: unannotated first, then annotated, each by id.
    pub fn queue(&self, o: usize) -> Vec<QueueItem> {
        let resolved = self.resolved();
        let (mut open, mut done): (Vec<QueueItem>, Vec<QueueItem>) = self
            .partition
            .ids_with(o)
            .into_iter()
            .map(|id| {
                let truth = self.manifest.label_of(&id).expect("validated at startup");
                QueueItem {
                    truth: ClassRef {
                        index: truth,
                        name: self.manifest.vocabulary().name(truth).unwrap_or_default().to_string(),
                    },
                    overlap: o,
                    members: self.members[&id].clone(),
                    annotation: resolved.get(&id).cloned(),
                    image_id: id,
                }
            })
            .partition(|item| item.annotation.is_none());
        open.sort_by(|a, b| a.image_id.cmp(&b.image_id));
        done.sort_by(|a, b| a.image_id.cmp(&b.image_id));
        open.extend(done);
        open
    }

    /// Validates, stamps and durably appends one annotation.
    pub fn annotate(&self, draft: AnnotationDraft) -> Result<ErrorAnnotation> {
        let mut journal = self.journal.lock().expect("journal lock");
        let record = draft.stamp(Utc::now())?;
        if self.partition.label(&record.image_id).is_none() {
            return Err(Error::UnknownImageId(record.image_id));
        }
        store::append_annotation(&journal.path, &record)?;
        journal.entries.push(record.clone());
        Ok(record)
    }

    fn image_file(&self, image_id: &str) -> Option<PathBuf> {
        let rel = self.manifest.record(image_id)?.image_path.as_deref()?;
        if rel.contains("://") {
            return None;
        }
        safe_join(&self.images_root, rel)
    }
}

/// Joins `rel` under `root`, refusing absolute paths and `..`.
fn safe_join(root: &Path, rel: &str) -> Option<PathBuf> {
    let rel = Path::new(rel);
    if rel.components().all(|c| matches!(c, Component::Normal(_) | Component::CurDir)) {
        Some(root.join(rel))
    } else {
        None
    }
}

fn content_type(path: &Path) -> &'static str {
    match path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .as_deref()
    {
        Some("jpg" | "jpeg") => "image/jpeg",
        Some("png") => "image/png",
        Some("html") => "text/html; charset=utf-8",
        Some("js" | "mjs") => "text/javascript",
        Some("css") => "text/css",
        Some("svg") => "image/svg+xml",
        Some("json") => "application/json",
        _ => "application/octet-stream",
    }
}

fn error_response(status: StatusCode, code: &str, message: impl Into<String>) -> Response {
    (status, Json(json!({ "error": code, "message": message.into() }))).into_response()
}

fn not_found() -> Response {
    error_response(StatusCode::NOT_FOUND, "not_found", "no such resource")
}

#[derive(Deserialize)]
struct QueueParams {
    group: Option<String>,
}

/// `hard` → 0, `overlap-k` → k.
fn parse_group(group: Option<&str>, n: usize) -> Option<usize> {
    match group {
        None | Some("hard") => Some(0),
        Some(g) => {
            let k: usize = g.strip_prefix("overlap-")?.parse().ok()?;
            (k <= n).then_some(k)
        }
    }
}

async fn get_manifest(State(state): State<Arc<TriageState>>) -> Json<ManifestSummary> {
    Json(state.summary())
}

async fn get_queue(State(state): State<Arc<TriageState>>, Query(params): Query<QueueParams>) -> Response {
    match parse_group(params.group.as_deref(), state.partition.n()) {
        Some(o) => Json(state.queue(o)).into_response(),
        None => error_response(
            StatusCode::BAD_REQUEST,
            "invalid_group",
            "group must be `hard` or `overlap-k` with 0 <= k <= N",
        ),
    }
}

async fn get_annotations(State(state): State<Arc<TriageState>>) -> Json<BTreeMap<String, ErrorAnnotation>> {
    Json(state.resolved())
}

async fn get_prevalence(State(state): State<Arc<TriageState>>) -> Json<Prevalence> {
    Json(state.prevalence())
}

async fn post_annotation(State(state): State<Arc<TriageState>>, body: Bytes) -> Response {
    let draft: AnnotationDraft = match serde_json::from_slice(&body) {
        Ok(d) => d,
        Err(e) => return error_response(StatusCode::BAD_REQUEST, "malformed_json", e.to_string()),
    };
    match state.annotate(draft) {
        Ok(record) => Json(record).into_response(),
        Err(e @ (Error::InvalidErrorClass(_) | Error::UnknownImageId(_))) => {
            error_response(StatusCode::BAD_REQUEST, e.code(), e.to_string())
        }
        Err(e) => {
            log::error!("annotation write failed: {e}");
            error_response(StatusCode::INTERNAL_SERVER_ERROR, e.code(), e.to_string())
        }
    }
}

async fn send_file(path: PathBuf) -> Response {
    match tokio::fs::read(&path).await {
        Ok(bytes) => ([(header::CONTENT_TYPE, content_type(&path))], bytes).into_response(),
        Err(_) => not_found(),
    }
}

async fn get_image(State(state): State<Arc<TriageState>>, UrlPath(image_id): UrlPath<String>) -> Response {
    match state.image_file(&image_id) {
        Some(path) => send_file(path).await,
        None => not_found(),
    }
}

async fn get_index(State(state): State<Arc<TriageState>>) -> Response {
    if let Some(dir) = &state.assets_dir {
        let index = dir.join("index.html");
        if index.is_file() {
            return send_file(index).await;
        }
    }
    Html(fallback::INDEX_HTML).into_response()
}

async fn get_asset(State(state): State<Arc<TriageState>>, UrlPath(rel): UrlPath<String>) -> Response {
    match state.assets_dir.as_deref().and_then(|dir| safe_join(dir, &rel)) {
        Some(path) => send_file(path).await,
        None => not_found(),
    }
}

pub fn router(state: Arc<TriageState>) -> Router {
    Router::new()
        .route("/", get(get_index))
        .route("/assets/{*path}", get(get_asset))
        .route("/api/manifest", get(get_manifest))
        .route("/api/queue", get(get_queue))
        .route("/api/image/{image_id}", get(get_image))
        .route("/api/annotations", get(get_annotations))
        .route("/api/annotation", post(post_annotation))
        .route("/api/prevalence", get(get_prevalence))
        .with_state(state)
}

/// Binds `127.0.0.1:port` (0 picks a free port).
pub async fn bind(port: u16) -> Result<tokio::net::TcpListener> {
    let addr = SocketAddr::from(([127, 0, 0, 1], port));
    tokio::net::TcpListener::bind(addr).await.map_err(|e| match e.kind() {
        std::io::ErrorKind::AddrInUse => Error::PortInUse(port),
        _ => Error::io(format!("tcp://{addr}"), e),
    })
}

/// Serves the triage API until ctrl-c.
pub async fn serve(config: TriageConfig, port: u16) -> Result<()> {
    if !config.images_root.is_dir() {
        return Err(Error::MissingImagesRoot(config.images_root));
    }
    let state = Arc::new(TriageState::new(config)?);
    let listener = bind(port).await?;
    let local = listener.local_addr().map_err(|e| Error::io("tcp", e))?;
    log::info!("triage server listening on http://{local}");
    eprintln!("serving {} hard images on http://{local}", state.hard.len());
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| Error::io("tcp", e))
}
