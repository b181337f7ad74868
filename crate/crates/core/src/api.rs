//! Request and response bodies shared by the HTTP service and its clients.

use serde::{Deserialize, Serialize};

use crate::cases::CaseInfo;
use crate::error::Error;
use crate::io::{ConvergenceTable, RunConfig, RunSummary, Suite, VerifyReport};
use crate::mesh::CellIndex;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub version: String,
    pub threads: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseList {
    pub cases: Vec<CaseInfo>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRequest {
    pub config: RunConfig,
    pub meshes: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyRequest {
    pub suite: Suite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobKind {
    Run,
    Convergence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobState {
    Queued,
    Running,
    Succeeded,
    Failed,
    Cancelled,
}

impl JobState {
    pub fn is_terminal(self) -> bool {
        matches!(self, JobState::Succeeded | JobState::Failed | JobState::Cancelled)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobAccepted {
    pub id: String,
    pub kind: JobKind,
}

/// Error carried over the wire, keeping the process exit code.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiError {
    pub kind: String,
    pub message: String,
    pub exit_code: i32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cell: Option<CellIndex>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<u64>,
}

impl From<&Error> for ApiError {
    fn from(e: &Error) -> Self {
        let kind = match e {
            Error::Config(_) => "config",
            Error::DegenerateState(_) => "degenerate_state",
            Error::SolverAbort { .. } => "solver_abort",
            Error::UnknownCase(_) => "unknown_case",
            Error::Unsupported(_) => "unsupported",
            Error::Cancelled => "cancelled",
            Error::Verification(_) => "verification",
            Error::Io(_) => "io",
        };
        let (cell, step) = match e {
            Error::SolverAbort { cell, step, .. } => (Some(*cell), Some(*step)),
            _ => (None, None),
        };
        ApiError { kind: kind.into(), message: e.to_string(), exit_code: e.exit_code(), cell, step }
    }
}

impl std::fmt::Display for ApiError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for ApiError {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobStatus {
    pub id: String,
    pub kind: JobKind,
    pub state: JobState,
    /// Steps and simulated time of the run in progress.
    pub steps: u64,
    pub time: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<RunSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convergence: Option<ConvergenceTable>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ApiError>,
}

/// Result of a verification request; `passed` mirrors the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyResponse {
    pub passed: bool,
    pub report: VerifyReport,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn abort_keeps_location() {
        let e = Error::SolverAbort { cell: CellIndex { i: 3, j: 4 }, step: 17, time: 0.5, detail: "x".into() };
        let a = ApiError::from(&e);
        assert_eq!((a.kind.as_str(), a.exit_code, a.cell, a.step), ("solver_abort", 2, Some(CellIndex { i: 3, j: 4 }), Some(17)));
        let json = serde_json::to_string(&a).unwrap();
        assert_eq!(serde_json::from_str::<ApiError>(&json).unwrap(), a);
    }

    #[test]
    fn status_round_trip() {
        let s = JobStatus {
            id: "abc".into(),
            kind: JobKind::Run,
            state: JobState::Running,
            steps: 3,
            time: 0.25,
            summary: None,
            convergence: None,
            error: None,
        };
        let json = serde_json::to_string(&s).unwrap();
        assert!(json.contains("\"running\"") && !json.contains("summary"));
        assert_eq!(serde_json::from_str::<JobStatus>(&json).unwrap(), s);
        assert!(!JobState::Running.is_terminal() && JobState::Cancelled.is_terminal());
    }
}
