//! HTTP/JSON service for simulations, convergence studies and verification.
//!
//! Runs and convergence studies are submitted as jobs and executed on the
//! blocking thread pool; clients poll `GET /jobs/{id}`. Verification is
//! answered synchronously.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::{Arc, RwLock};

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use tokio::net::TcpListener;
use tokio::sync::Semaphore;
use uuid::Uuid;

use vlbm_core::api::{
    ApiError, CaseList, ConvergenceRequest, Health, JobAccepted, JobKind, JobState, JobStatus, VerifyRequest,
    VerifyResponse,
};
use vlbm_core::io::{convergence_study, execute, verify, ConvergenceTable, RunConfig, RunControl, RunSummary};
use vlbm_core::{builtin_cases, Error};

#[derive(Debug, Clone)]
pub struct ServerConfig {
    /// Jobs allowed to run at once; the rest wait in the queue.
    pub max_concurrent_jobs: usize,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self { max_concurrent_jobs: 1 }
    }
}

#[derive(Debug)]
struct Job {
    kind: JobKind,
    state: JobState,
    control: Arc<RunControl>,
    summary: Option<RunSummary>,
    convergence: Option<ConvergenceTable>,
    error: Option<ApiError>,
}

impl Job {
    fn status(&self, id: Uuid) -> JobStatus {
        let (steps, time) = match &self.summary {
            Some(s) => (s.steps, s.time),
            None => self.control.progress(),
        };
        JobStatus {
            id: id.to_string(),
            kind: self.kind,
            state: self.state,
            steps,
            time,
            summary: self.summary.clone(),
            convergence: self.convergence.clone(),
            error: self.error.clone(),
        }
    }
}

#[derive(Clone)]
pub struct AppState {
    jobs: Arc<RwLock<HashMap<Uuid, Job>>>,
    slots: Arc<Semaphore>,
    threads: usize,
}

impl AppState {
    pub fn new(config: &ServerConfig) -> Self {
        Self {
            jobs: Arc::default(),
            slots: Arc::new(Semaphore::new(config.max_concurrent_jobs.max(1))),
            threads: vlbm_core::io::configure_threads().unwrap_or(1),
        }
    }

    fn update(&self, id: Uuid, f: impl FnOnce(&mut Job)) {
        if let Some(job) = self.jobs.write().expect("job table poisoned").get_mut(&id) {
            f(job);
        }
    }
}

/// Error response: status code plus the wire error.
pub struct HttpError(StatusCode, ApiError);

impl From<Error> for HttpError {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::UnknownCase(_) => StatusCode::NOT_FOUND,
            Error::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
            _ => StatusCode::BAD_REQUEST,
        };
        HttpError(status, ApiError::from(&e))
    }
}

impl IntoResponse for HttpError {
    fn into_response(self) -> Response {
        (self.0, Json(self.1)).into_response()
    }
}

fn not_found(id: &str) -> HttpError {
    HttpError(
        StatusCode::NOT_FOUND,
        ApiError { kind: "not_found".into(), message: format!("no job `{id}`"), exit_code: 1, cell: None, step: None },
    )
}

fn internal(msg: String) -> HttpError {
    HttpError(
        StatusCode::INTERNAL_SERVER_ERROR,
        ApiError { kind: "internal".into(), message: msg, exit_code: 1, cell: None, step: None },
    )
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/cases", get(cases))
        .route("/cases/{name}", get(case))
        .route("/runs", post(submit_run))
        .route("/convergence", post(submit_convergence))
        .route("/jobs", get(list_jobs))
        .route("/jobs/{id}", get(job).delete(cancel_job))
        .route("/verify", post(run_verify))
        .with_state(state)
}

async fn health(State(state): State<AppState>) -> Json<Health> {
    Json(Health { status: "ok".into(), version: env!("CARGO_PKG_VERSION").into(), threads: state.threads })
}

async fn cases() -> Json<CaseList> {
    Json(CaseList { cases: builtin_cases().iter().map(|c| c.info()).collect() })
}

async fn case(Path(name): Path<String>) -> Result<Json<vlbm_core::cases::CaseInfo>, HttpError> {
    Ok(Json(vlbm_core::case_by_name(&name)?.info()))
}

enum Work {
    Run(RunConfig),
    Convergence(RunConfig, Vec<usize>),
}

fn spawn_job(state: &AppState, work: Work) -> (StatusCode, Json<JobAccepted>) {
    let id = Uuid::new_v4();
    let kind = match work {
        Work::Run(_) => JobKind::Run,
        Work::Convergence(..) => JobKind::Convergence,
    };
    let control = Arc::new(RunControl::new());
    state.jobs.write().expect("job table poisoned").insert(
        id,
        Job { kind, state: JobState::Queued, control: control.clone(), summary: None, convergence: None, error: None },
    );
    let st = state.clone();
    tokio::spawn(async move {
        let Ok(_permit) = st.slots.clone().acquire_owned().await else { return };
        if control.is_cancelled() {
            st.update(id, |j| j.state = JobState::Cancelled);
            return;
        }
        st.update(id, |j| j.state = JobState::Running);
        tracing::info!(%id, ?kind, "job started");
        let ctl = control.clone();
        let outcome = tokio::task::spawn_blocking(move || match work {
            Work::Run(cfg) => execute(&cfg, &ctl).map(|o| (Some(o.summary), None)),
            Work::Convergence(cfg, meshes) => convergence_study(&cfg, &meshes, &ctl).map(|t| (None, Some(t))),
        })
        .await;
        st.update(id, |j| match outcome {
            Ok(Ok((summary, table))) => {
                j.state = JobState::Succeeded;
                j.summary = summary;
                j.convergence = table;
            }
            Ok(Err(Error::Cancelled)) => {
                j.state = JobState::Cancelled;
                j.error = Some(ApiError::from(&Error::Cancelled));
            }
            Ok(Err(e)) => {
                j.state = JobState::Failed;
                j.error = Some(ApiError::from(&e));
            }
            Err(join) => {
                j.state = JobState::Failed;
                j.error = Some(ApiError {
                    kind: "internal".into(),
                    message: format!("job panicked: {join}"),
                    exit_code: 1,
                    cell: None,
                    step: None,
                });
            }
        });
        tracing::info!(%id, "job finished");
    });
    (StatusCode::ACCEPTED, Json(JobAccepted { id: id.to_string(), kind }))
}

/// Rejects configurations that cannot start, so clients see the error at
/// submission rather than on the first poll.
fn precheck(cfg: &RunConfig) -> Result<(), HttpError> {
    cfg.validate()?;
    let case = cfg.resolve_case()?;
    if let Some(nx) = cfg.nx {
        case.grid(nx, cfg.ny)?;
    }
    Ok(())
}

async fn submit_run(State(state): State<AppState>, Json(cfg): Json<RunConfig>) -> Result<impl IntoResponse, HttpError> {
    precheck(&cfg)?;
    Ok(spawn_job(&state, Work::Run(cfg)))
}

async fn submit_convergence(
    State(state): State<AppState>,
    Json(req): Json<ConvergenceRequest>,
) -> Result<impl IntoResponse, HttpError> {
    precheck(&req.config)?;
    let case = req.config.resolve_case()?;
    if case.exact.is_none() {
        return Err(Error::Unsupported(format!("case `{}` has no exact solution", case.name)).into());
    }
    if req.meshes.is_empty() || req.meshes.contains(&0) {
        return Err(Error::Config("meshes must be a non-empty list of positive sizes".into()).into());
    }
    Ok(spawn_job(&state, Work::Convergence(req.config, req.meshes)))
}

async fn list_jobs(State(state): State<AppState>) -> Json<Vec<JobStatus>> {
    let jobs = state.jobs.read().expect("job table poisoned");
    Json(jobs.iter().map(|(id, j)| j.status(*id)).collect())
}

fn parse_id(id: &str) -> Result<Uuid, HttpError> {
    Uuid::parse_str(id).map_err(|_| not_found(id))
}

async fn job(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<JobStatus>, HttpError> {
    let uuid = parse_id(&id)?;
    let jobs = state.jobs.read().expect("job table poisoned");
    jobs.get(&uuid).map(|j| Json(j.status(uuid))).ok_or_else(|| not_found(&id))
}

async fn cancel_job(State(state): State<AppState>, Path(id): Path<String>) -> Result<impl IntoResponse, HttpError> {
    let uuid = parse_id(&id)?;
    let jobs = state.jobs.read().expect("job table poisoned");
    let job = jobs.get(&uuid).ok_or_else(|| not_found(&id))?;
    job.control.cancel();
    Ok((StatusCode::ACCEPTED, Json(job.status(uuid))))
}

async fn run_verify(Json(req): Json<VerifyRequest>) -> Result<Json<VerifyResponse>, HttpError> {
    let report = tokio::task::spawn_blocking(move || verify(req.suite))
        .await
        .map_err(|e| internal(format!("verification panicked: {e}")))??;
    Ok(Json(VerifyResponse { passed: report.passed(), report }))
}

/// Serves on an already bound listener until the task is dropped.
pub async fn serve(listener: TcpListener, config: ServerConfig) -> std::io::Result<()> {
    let app = router(AppState::new(&config));
    axum::serve(listener, app).await
}

/// Binds `addr` and serves in a background task; returns the bound address.
pub async fn spawn(addr: SocketAddr, config: ServerConfig) -> std::io::Result<(SocketAddr, tokio::task::JoinHandle<std::io::Result<()>>)> {
    let listener = TcpListener::bind(addr).await?;
    let local = listener.local_addr()?;
    tracing::info!(%local, "vlbm service listening");
    Ok((local, tokio::spawn(serve(listener, config))))
}
