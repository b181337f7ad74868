use std::time::Duration;

use vlbm_client::{Client, ClientError, StatusCode};
use vlbm_core::api::JobState;
use vlbm_core::io::{RunConfig, Suite};
use vlbm_server::ServerConfig;

async fn start() -> Client {
    let (addr, _task) = vlbm_server::spawn(([127, 0, 0, 1], 0).into(), ServerConfig::default()).await.unwrap();
    Client::new(format!("http://{addr}")).with_poll_interval(Duration::from_millis(20))
}

fn sod(nx: usize) -> RunConfig {
    RunConfig { nx: Some(nx), ..RunConfig::for_case("sod") }
}

#[tokio::test]
async fn health_and_cases() {
    let c = start().await;
    assert_eq!(c.health().await.unwrap().status, "ok");
    let cases = c.cases().await.unwrap().cases;
    assert!(cases.iter().any(|k| k.name == "sod" && k.has_exact && k.strip));
    assert!(cases.iter().any(|k| k.name == "sedov" && !k.has_exact));
}

#[tokio::test]
async fn sod_run_writes_artifacts() {
    let c = start().await;
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig { output_dir: Some(dir.path().to_path_buf()), ..sod(50) };
    let s = c.run_and_wait(&cfg).await.unwrap();
    assert!(s.completed);
    assert!((s.time - s.t_final).abs() < 1e-12);
    assert!(s.min_rho > 0.0 && s.min_p > 0.0);
    assert!(s.error.is_some());
    for f in ["summary.json", "profile.csv", "exact.csv", "theta_profile.csv"] {
        assert!(dir.path().join(f).exists(), "{f} missing");
    }
}

#[tokio::test]
async fn bad_config_is_rejected_at_submission() {
    let c = start().await;
    let cfg = RunConfig { alpha: 1.5, ..sod(20) };
    match c.submit_run(&cfg).await {
        Err(ClientError::Api { status, error }) => {
            assert_eq!(status, StatusCode::BAD_REQUEST);
            assert_eq!(error.kind, "config");
            assert_eq!(error.exit_code, 1);
        }
        other => panic!("expected config error, got {other:?}"),
    }
    match c.submit_run(&RunConfig::for_case("nope")).await {
        Err(ClientError::Api { status, .. }) => assert_eq!(status, StatusCode::NOT_FOUND),
        other => panic!("expected unknown case, got {other:?}"),
    }
}

#[tokio::test]
async fn unknown_job_is_404() {
    let c = start().await;
    for id in ["not-a-uuid", "00000000-0000-0000-0000-000000000000"] {
        match c.job(id).await {
            Err(ClientError::Api { status, .. }) => assert_eq!(status, StatusCode::NOT_FOUND),
            other => panic!("expected 404, got {other:?}"),
        }
    }
}

#[tokio::test]
async fn cancel_stops_a_long_run() {
    let c = start().await;
    let cfg = RunConfig { nx: Some(400), ..RunConfig::for_case("sedov") };
    let id = c.submit_run(&cfg).await.unwrap().id;
    tokio::time::sleep(Duration::from_millis(100)).await;
    c.cancel(&id).await.unwrap();
    match c.wait(&id).await {
        Err(ClientError::Job { state, error, .. }) => {
            assert_eq!(state, JobState::Cancelled);
            assert_eq!(error.kind, "cancelled");
        }
        other => panic!("expected cancellation, got {other:?}"),
    }
    assert_eq!(c.jobs().await.unwrap().len(), 1);
}

#[tokio::test]
async fn convergence_table() {
    let c = start().await;
    let t = c.convergence_and_wait(&RunConfig::for_case("sod"), &[20, 40]).await.unwrap();
    assert_eq!(t.rows.len(), 2);
    assert!(t.rows[1].report.l1 < t.rows[0].report.l1);
    assert!(t.rows[0].rates.is_none() && t.rows[1].rates.is_some());

    match c.submit_convergence(&RunConfig::for_case("sedov"), &[20]).await {
        Err(ClientError::Api { error, .. }) => assert_eq!(error.kind, "unsupported"),
        other => panic!("expected unsupported, got {other:?}"),
    }
}

#[tokio::test]
async fn verify_moments() {
    let c = start().await;
    let r = c.verify(Suite::Moments).await.unwrap();
    assert!(r.passed, "{:?}", r.report);
    assert!(!r.report.checks.is_empty());
}
