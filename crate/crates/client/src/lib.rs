//! Async client for the vlbm HTTP service.

use std::time::Duration;

pub use reqwest::StatusCode;
use serde::de::DeserializeOwned;
use serde::Serialize;

use vlbm_core::api::{
    ApiError, CaseList, ConvergenceRequest, Health, JobAccepted, JobState, JobStatus, VerifyRequest, VerifyResponse,
};
use vlbm_core::io::{ConvergenceTable, RunConfig, RunSummary, Suite};

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    #[error("request failed: {0}")]
    Http(#[from] reqwest::Error),

    #[error("server returned {status}: {error}")]
    Api { status: StatusCode, error: ApiError },

    #[error("job {id} {state:?}: {error}")]
    Job { id: String, state: JobState, error: ApiError },

    #[error("unexpected response: {0}")]
    Protocol(String),
}

impl ClientError {
    /// Exit code of the underlying solver error where one is known.
    pub fn exit_code(&self) -> i32 {
        match self {
            ClientError::Api { error, .. } | ClientError::Job { error, .. } => error.exit_code,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, ClientError>;

#[derive(Debug, Clone)]
pub struct Client {
    base: String,
    http: reqwest::Client,
    poll: Duration,
}

impl Client {
    pub fn new(base_url: impl Into<String>) -> Self {
        let base = base_url.into().trim_end_matches('/').to_string();
        Self { base, http: reqwest::Client::new(), poll: Duration::from_millis(200) }
    }

    pub fn with_poll_interval(mut self, poll: Duration) -> Self {
        self.poll = poll;
        self
    }

    pub fn base_url(&self) -> &str {
        &self.base
    }

    async fn decode<T: DeserializeOwned>(resp: reqwest::Response) -> Result<T> {
        let status = resp.status();
        if status.is_success() {
            return Ok(resp.json().await?);
        }
        let body = resp.text().await?;
        match serde_json::from_str::<ApiError>(&body) {
            Ok(error) => Err(ClientError::Api { status, error }),
            Err(_) => Err(ClientError::Protocol(format!("{status}: {body}"))),
        }
    }

    async fn get<T: DeserializeOwned>(&self, path: &str) -> Result<T> {
        Self::decode(self.http.get(format!("{}{path}", self.base)).send().await?).await
    }

    async fn post<B: Serialize, T: DeserializeOwned>(&self, path: &str, body: &B) -> Result<T> {
        Self::decode(self.http.post(format!("{}{path}", self.base)).json(body).send().await?).await
    }

    pub async fn health(&self) -> Result<Health> {
        self.get("/health").await
    }

    pub async fn cases(&self) -> Result<CaseList> {
        self.get("/cases").await
    }

    pub async fn submit_run(&self, config: &RunConfig) -> Result<JobAccepted> {
        self.post("/runs", config).await
    }

    pub async fn submit_convergence(&self, config: &RunConfig, meshes: &[usize]) -> Result<JobAccepted> {
        self.post("/convergence", &ConvergenceRequest { config: config.clone(), meshes: meshes.to_vec() }).await
    }

    pub async fn job(&self, id: &str) -> Result<JobStatus> {
        self.get(&format!("/jobs/{id}")).await
    }

    pub async fn jobs(&self) -> Result<Vec<JobStatus>> {
        self.get("/jobs").await
    }

    pub async fn cancel(&self, id: &str) -> Result<JobStatus> {
        Self::decode(self.http.delete(format!("{}/jobs/{id}", self.base)).send().await?).await
    }

    pub async fn verify(&self, suite: Suite) -> Result<VerifyResponse> {
        self.post("/verify", &VerifyRequest { suite }).await
    }

    /// Polls until the job reaches a terminal state; failures become
    /// [`ClientError::Job`].
    pub async fn wait(&self, id: &str) -> Result<JobStatus> {
        loop {
            let status = self.job(id).await?;
            match status.state {
                JobState::Succeeded => return Ok(status),
                JobState::Failed | JobState::Cancelled => {
                    let error = status.error.clone().unwrap_or_else(|| ApiError {
                        kind: "unknown".into(),
                        message: "job ended without a result".into(),
                        exit_code: 1,
                        cell: None,
                        step: None,
                    });
                    return Err(ClientError::Job { id: id.into(), state: status.state, error });
                }
                JobState::Queued | JobState::Running => tokio::time::sleep(self.poll).await,
            }
        }
    }

    pub async fn run_and_wait(&self, config: &RunConfig) -> Result<RunSummary> {
        let accepted = self.submit_run(config).await?;
        self.wait(&accepted.id)
            .await?
            .summary
            .ok_or_else(|| ClientError::Protocol("finished run has no summary".into()))
    }

    pub async fn convergence_and_wait(&self, config: &RunConfig, meshes: &[usize]) -> Result<ConvergenceTable> {
        let accepted = self.submit_convergence(config, meshes).await?;
        self.wait(&accepted.id)
            .await?
            .convergence
            .ok_or_else(|| ClientError::Protocol("finished study has no table".into()))
    }
}
