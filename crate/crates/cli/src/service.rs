//! HTTP API over the brick pipeline.
//!
//! Jobs are content-addressed: the id is the SHA-256 of the normalized spec
//! JSON, so repeating a request returns the stored result and identical
//! in-flight requests share one computation.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tokio::sync::{OnceCell, Semaphore};
use tower_http::cors::CorsLayer;
use tpms_forge::grid::max_voxels;
use tpms_forge::io::stl_bytes;
use tpms_forge::{build_brick, BrickSpec, Error, MeshReport};

use crate::surface_rows;

/// Jobs kept before the least recently used one is dropped.
pub const STORE_CAPACITY: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobStatus {
    Done,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobRecord {
    pub id: String,
    pub spec: BrickSpec,
    pub status: JobStatus,
    pub report: Option<MeshReport>,
    /// `CODE: message` when the job failed.
    pub error: Option<String>,
}

pub fn job_id(spec: &BrickSpec) -> String {
    hex::encode(Sha256::digest(spec.normalized().to_json().as_bytes()))
}

struct Job {
    record: JobRecord,
    stl: Arc<Vec<u8>>,
}

#[derive(Default)]
struct JobStore {
    jobs: IndexMap<String, Arc<Job>>,
}

impl JobStore {
    fn get(&mut self, id: &str) -> Option<Arc<Job>> {
        let job = self.jobs.shift_remove(id)?;
        self.jobs.insert(id.to_string(), job.clone());
        Some(job)
    }

    fn insert(&mut self, job: Arc<Job>) {
        self.jobs.shift_remove(&job.record.id);
        self.jobs.insert(job.record.id.clone(), job);
        while self.jobs.len() > STORE_CAPACITY {
            self.jobs.shift_remove_index(0);
        }
    }
}

type Outcome = std::result::Result<Arc<Job>, (StatusCode, JobRecord)>;

pub struct AppState {
    store: Mutex<JobStore>,
    inflight: Mutex<HashMap<String, Arc<OnceCell<Outcome>>>>,
    workers: Semaphore,
}

impl AppState {
    pub fn new(workers: usize) -> Arc<Self> {
        Arc::new(AppState {
            store: Mutex::default(),
            inflight: Mutex::default(),
            workers: Semaphore::new(workers.max(1)),
        })
    }

    pub fn stored_ids(&self) -> Vec<String> {
        self.store.lock().unwrap().jobs.keys().cloned().collect()
    }
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/surfaces", get(surfaces))
        .route("/api/generate", post(generate))
        .route("/api/mesh/{file}", get(mesh))
        .route("/api/report/{id}", get(report))
        .layer(CorsLayer::permissive())
        .with_state(state)
}

pub async fn serve(bind: &str, port: u16, workers: usize) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind((bind, port)).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(AppState::new(workers))).await
}

async fn surfaces() -> Json<serde_json::Value> {
    Json(serde_json::to_value(surface_rows()).expect("rows serialize"))
}

fn error_body(status: StatusCode, e: &Error) -> Response {
    let body = serde_json::json!({ "error": format!("{}: {e}", e.code()) });
    (status, Json(body)).into_response()
}

fn status_for(e: &Error) -> StatusCode {
    match e {
        _ if e.is_solver_failure() => StatusCode::CONFLICT,
        Error::CapExceeded { .. } => StatusCode::PAYLOAD_TOO_LARGE,
        Error::NotWatertight(_) | Error::CapFailure(_) | Error::Sink(_) => {
            StatusCode::INTERNAL_SERVER_ERROR
        }
        _ => StatusCode::UNPROCESSABLE_ENTITY,
    }
}

async fn generate(State(state): State<Arc<AppState>>, body: Bytes) -> Response {
    let text = match std::str::from_utf8(&body) {
        Ok(t) => t,
        Err(_) => {
            let e = Error::InvalidSpec("body is not UTF-8".into());
            return error_body(StatusCode::UNPROCESSABLE_ENTITY, &e);
        }
    };
    let spec = match BrickSpec::from_json(text).and_then(|s| s.validate().map(|_| s)) {
        Ok(s) => s.normalized(),
        Err(e) => return error_body(status_for(&e), &e),
    };
    let requested: u128 = spec.dims().iter().map(|&n| n as u128).product();
    let cap = max_voxels();
    if requested > cap {
        return error_body(StatusCode::PAYLOAD_TOO_LARGE, &Error::CapExceeded { requested, cap });
    }

    let id = job_id(&spec);
    if let Some(job) = state.store.lock().unwrap().get(&id) {
        return Json(job.record.clone()).into_response();
    }
    let cell = state.inflight.lock().unwrap().entry(id.clone()).or_default().clone();
    let outcome = cell
        .get_or_init(|| async {
            let _permit = state.workers.acquire().await.expect("semaphore open");
            let outcome = run_job(id.clone(), spec).await;
            if let Ok(job) = &outcome {
                state.store.lock().unwrap().insert(job.clone());
            }
            state.inflight.lock().unwrap().remove(&id);
            outcome
        })
        .await;
    match outcome {
        Ok(job) => Json(job.record.clone()).into_response(),
        Err((status, record)) => (*status, Json(record.clone())).into_response(),
    }
}

async fn run_job(id: String, spec: BrickSpec) -> Outcome {
    let work = spec.clone();
    let built = tokio::task::spawn_blocking(move || build_brick(&work))
        .await
        .unwrap_or_else(|e| Err(Error::NotWatertight(format!("generation panicked: {e}"))));
    match built {
        Ok(result) => {
            let stl = Arc::new(stl_bytes(&result.mesh));
            let record = JobRecord {
                id,
                spec,
                status: JobStatus::Done,
                report: Some(result.report),
                error: None,
            };
            Ok(Arc::new(Job { record, stl }))
        }
        Err(e) => Err((
            status_for(&e),
            JobRecord {
                id,
                spec,
                status: JobStatus::Failed,
                report: None,
                error: Some(format!("{}: {e}", e.code())),
            },
        )),
    }
}

fn not_found(id: &str) -> Response {
    let body = serde_json::json!({ "error": format!("NOT_FOUND: no job {id}") });
    (StatusCode::NOT_FOUND, Json(body)).into_response()
}

async fn mesh(State(state): State<Arc<AppState>>, Path(file): Path<String>) -> Response {
    let Some(id) = file.strip_suffix(".stl") else {
        return not_found(&file);
    };
    match state.store.lock().unwrap().get(id) {
        Some(job) => (
            [(header::CONTENT_TYPE, "application/octet-stream")],
            job.stl.as_ref().clone(),
        )
            .into_response(),
        None => not_found(id),
    }
}

async fn report(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Response {
    match state.store.lock().unwrap().get(&id) {
        Some(job) => Json(job.record.report.clone()).into_response(),
        None => not_found(&id),
    }
}
