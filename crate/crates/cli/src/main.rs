use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use vlbm_client::{Client, ClientError};
use vlbm_core::io::{RunConfig, Suite};
use vlbm_server::ServerConfig;

#[derive(Parser)]
#[command(name = "vlbm", version, about = "Blended lattice Boltzmann solver for the 2D Euler equations")]
struct Cli {
    /// Service to talk to; an in-process server is started when omitted.
    #[arg(long, global = true, env = "VLBM_SERVER")]
    server: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP service.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
        /// Jobs executed concurrently.
        #[arg(long, default_value_t = 1)]
        max_jobs: usize,
    },
    /// Run one simulation and print its summary.
    Run(RunArgs),
    /// Error table over a list of meshes.
    Convergence {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated cell counts along x, e.g. 20,40,80,160.
        #[arg(long, value_delimiter = ',', required = true)]
        meshes: Vec<usize>,
    },
    /// Fixed-seed property suites.
    Verify {
        #[arg(default_value = "all")]
        suite: String,
    },
    /// Built-in cases.
    ListCases,
}

#[derive(Args, Clone, Default)]
struct RunArgs {
    /// Flat `key = value` configuration file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    case: Option<String>,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    ny: Option<usize>,
    /// pp, lmp, rlmp, none or first_order.
    #[arg(long)]
    limiter: Option<String>,
    #[arg(long)]
    no_pressure_limiter: bool,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    kinetic_speed: Option<f64>,
    #[arg(long)]
    t_final: Option<f64>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    snapshot_every: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    snapshot_times: Vec<f64>,
    /// csv and/or vtk.
    #[arg(long, value_delimiter = ',')]
    formats: Vec<String>,
    #[arg(long)]
    check_bounds: bool,
    #[arg(long)]
    max_steps: Option<u64>,
    /// Extra `key=value` settings, applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn absolute(p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        std::env::current_dir().map(|d| d.join(p)).unwrap_or_else(|_| p.to_path_buf())
    }
}

impl RunArgs {
    fn to_config(&self) -> vlbm_core::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_kv_file(path)?,
            None => RunConfig::default(),
        };
        let mut overrides: Vec<(&str, String)> = Vec::new();
        let mut opt = |k: &'static str, v: Option<String>| {
            if let Some(v) = v {
                overrides.push((k, v));
            }
        };
        opt("case", self.case.clone());
        opt("nx", self.nx.map(|v| v.to_string()));
        opt("ny", self.ny.map(|v| v.to_string()));
        opt("limiter", self.limiter.clone());
        opt("alpha", self.alpha.map(|v| v.to_string()));
        opt("kinetic_speed", self.kinetic_speed.map(|v| v.to_string()));
        opt("t_final", self.t_final.map(|v| v.to_string()));
        opt("snapshot_every", self.snapshot_every.map(|v| v.to_string()));
        opt("max_steps", self.max_steps.map(|v| v.to_string()));
        let join = |v: &[String]| (!v.is_empty()).then(|| v.join(","));
        opt("snapshot_times", join(&self.snapshot_times.iter().map(f64::to_string).collect::<Vec<_>>()));
        opt("formats", join(&self.formats));
        opt("pressure_limiter", self.no_pressure_limiter.then(|| "false".into()));
        opt("check_bounds", self.check_bounds.then(|| "true".into()));
        for (k, v) in overrides {
            cfg.set(k, &v)?;
        }
        if let Some(dir) = &self.output_dir {
            cfg.output_dir = Some(dir.clone());
        }
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| vlbm_core::Error::Config(format!("--set expects KEY=VALUE, got `{kv}`")))?;
            cfg.set(k.trim(), v.trim())?;
        }
        // the service resolves paths in its own working directory
        cfg.output_dir = cfg.output_dir.as_deref().map(absolute);
        cfg.validate()?;
        Ok(cfg)
    }
}

enum Failure {
    Core(vlbm_core::Error),
    Client(ClientError),
    Io(std::io::Error),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        let code = match self {
            Failure::Core(e) => e.exit_code(),
            Failure::Client(e) => e.exit_code(),
            Failure::Io(_) => 1,
        };
        code.clamp(1, 255) as u8
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Core(e) => write!(f, "{e}"),
            Failure::Client(e) => write!(f, "{e}"),
            Failure::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<vlbm_core::Error> for Failure {
    fn from(e: vlbm_core::Error) -> Self {
        Failure::Core(e)
    }
}

impl From<ClientError> for Failure {
    fn from(e: ClientError) -> Self {
        Failure::Client(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

fn print_json<T: serde::Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

async fn connect(server: Option<String>) -> Result<Client, Failure> {
    match server {
        Some(url) => Ok(Client::new(url)),
        None => {
            let (addr, _task) = vlbm_server::spawn(([127, 0, 0, 1], 0).into(), ServerConfig::default()).await?;
            Ok(Client::new(format!("http://{addr}")))
        }
    }
}

async fn dispatch(cli: Cli) -> Result<u8, Failure> {
    if let Command::Serve { addr, max_jobs } = cli.command {
        let (_, task) = vlbm_server::spawn(addr, ServerConfig { max_concurrent_jobs: max_jobs }).await?;
        task.await.map_err(|e| Failure::Io(std::io::Error::other(e)))??;
        return Ok(0);
    }
    // configuration problems are reported before any server is contacted
    let prepared = match &cli.command {
        Command::Run(args) => Some(args.to_config()?),
        Command::Convergence { run, .. } => Some(run.to_config()?),
        _ => None,
    };
    let suite = match &cli.command {
        Command::Verify { suite } => Some(suite.parse::<Suite>()?),
        _ => None,
    };
    let client = connect(cli.server).await?;
    match cli.command {
        Command::Run(_) => {
            let summary = client.run_and_wait(&prepared.expect("prepared")).await?;
            print_json(&summary);
        }
        Command::Convergence { meshes, .. } => {
            let table = client.convergence_and_wait(&prepared.expect("prepared"), &meshes).await?;
            print!("{}", table.to_csv());
        }
        Command::Verify { .. } => {
            let resp = client.verify(suite.expect("parsed")).await?;
            for c in &resp.report.checks {
                println!("{} {}/{}: {}", if c.passed { "PASS" } else { "FAIL" }, c.suite, c.name, c.detail);
            }
            if !resp.passed {
                return Ok(3);
            }
        }
        Command::ListCases => {
            for c in client.cases().await?.cases {
                println!("{:<18} t = {:<6} mesh {}x{}  {}", c.name, c.t_final, c.default_mesh.0, c.default_mesh.1, c.description);
            }
        }
        Command::Serve { .. } => unreachable!(),
    }
    Ok(0)
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "warn".into()))
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    let runtime = match tokio::runtime::Builder::new_multi_thread().enable_all().build() {
        Ok(rt) => rt,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    match runtime.block_on(dispatch(cli)) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
