//! Run orchestration and convergence studies.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{OutputFormat, RunConfig};
use super::output::{
    fmt_f64, primitive_field, write_exact_csv, write_profile_csv, write_snapshot_csv, write_theta_csv,
    write_theta_profile_csv, write_vtk,
};
use crate::cases::{compare_densities, convergence_rates, CaseSpec, ErrorReport, Rates};
use crate::error::{Error, Result};
use crate::euler::Conserved;
use crate::limiters::DensityKind;
use crate::mesh::{moments, CellField, Grid, ThetaField};
use crate::solver::SolverState;

/// Shared progress and cancellation flag for a running job.
#[derive(Debug, Default)]
pub struct RunControl {
    cancel: AtomicBool,
    steps: AtomicU64,
    time_bits: AtomicU64,
}

impl RunControl {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn cancel(&self) {
        self.cancel.store(true, Ordering::Relaxed);
    }

    pub fn is_cancelled(&self) -> bool {
        self.cancel.load(Ordering::Relaxed)
    }

    /// Steps taken and simulated time reached so far.
    pub fn progress(&self) -> (u64, f64) {
        (self.steps.load(Ordering::Relaxed), f64::from_bits(self.time_bits.load(Ordering::Relaxed)))
    }

    fn record(&self, state: &SolverState) {
        self.steps.store(state.steps, Ordering::Relaxed);
        self.time_bits.store(state.time.to_bits(), Ordering::Relaxed);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotInfo {
    pub step: u64,
    pub time: f64,
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub case: String,
    pub limiter: DensityKind,
    pub pressure_limiter: bool,
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub alpha: f64,
    pub kinetic_speed: Option<f64>,
    pub t_final: f64,
    pub time: f64,
    pub steps: u64,
    /// False when the run stopped at `max_steps` before `t_final`.
    pub completed: bool,
    pub wall_time_s: f64,
    /// Smallest interior density and pressure seen over the whole run.
    pub min_rho: f64,
    pub min_p: f64,
    /// Domain integrals of `(rho, m1, m2, E)`.
    pub initial_totals: [f64; 4],
    pub final_totals: [f64; 4],
    /// `|final - initial|`, divided by `|initial|` where that is nonzero.
    pub conservation_drift: [f64; 4],
    /// Worst relative excursion of the new density outside the local bounds.
    pub max_bound_violation: Option<f64>,
    pub error: Option<ErrorReport>,
    pub snapshots: Vec<SnapshotInfo>,
    pub output_dir: Option<PathBuf>,
}

/// Final state of a run together with its summary.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub summary: RunSummary,
    pub state: SolverState,
    pub grid: Grid,
}

fn totals(u: &CellField<Conserved>, grid: &Grid) -> [f64; 4] {
    (grid.dx * grid.dx * u.sum()).to_array()
}

struct Writer<'a> {
    dir: Option<&'a Path>,
    formats: &'a [OutputFormat],
    case: &'a CaseSpec,
    grid: Grid,
    written: Vec<SnapshotInfo>,
}

impl Writer<'_> {
    fn snapshot(&mut self, state: &SolverState, theta: Option<&ThetaField>) -> Result<()> {
        let Some(dir) = self.dir else { return Ok(()) };
        if self.written.last().is_some_and(|s| s.step == state.steps) {
            return Ok(());
        }
        let w = primitive_field(&moments(&state.field), self.case.gas())?;
        let stem = format!("{:06}", state.steps);
        let path = dir.join(format!("snapshot_{stem}.csv"));
        if self.formats.contains(&OutputFormat::Csv) {
            write_snapshot_csv(&path, &self.grid, &w)?;
            if let Some(t) = theta {
                write_theta_csv(&dir.join(format!("faces_theta_{stem}.csv")), &self.grid, t)?;
            }
            if self.case.strip {
                write_profile_csv(&dir.join(format!("profile_{stem}.csv")), &self.grid, &w, theta)?;
            }
        }
        if self.formats.contains(&OutputFormat::Vtk) {
            write_vtk(&dir.join(format!("snapshot_{stem}.vtk")), &self.grid, &w, state.time)?;
        }
        self.written.push(SnapshotInfo { step: state.steps, time: state.time, path });
        Ok(())
    }

    fn finish(&self, state: &SolverState, theta: Option<&ThetaField>) -> Result<()> {
        let Some(dir) = self.dir else { return Ok(()) };
        if !self.case.strip || !self.formats.contains(&OutputFormat::Csv) {
            return Ok(());
        }
        let w = primitive_field(&moments(&state.field), self.case.gas())?;
        write_profile_csv(&dir.join("profile.csv"), &self.grid, &w, theta)?;
        if let Some(t) = theta {
            write_theta_profile_csv(&dir.join("theta_profile.csv"), &self.grid, t)?;
        }
        if let Some(exact) = &self.case.exact {
            write_exact_csv(&dir.join("exact.csv"), &self.grid, exact, state.time, self.case.gamma)?;
        }
        Ok(())
    }
}

/// Density error against the case's exact solution at the state's time.
/// Strip cases are measured along the middle row.
pub fn density_error(case: &CaseSpec, grid: &Grid, state: &SolverState) -> Result<Option<ErrorReport>> {
    let Some(exact) = &case.exact else { return Ok(None) };
    let rho = moments(&state.field).map(|u| u.rho);
    let rows: Vec<usize> = if case.strip { vec![grid.ny / 2] } else { (0..grid.ny).collect() };
    let mut num = Vec::with_capacity(rows.len() * grid.nx);
    let mut reference = Vec::with_capacity(rows.len() * grid.nx);
    for &j in &rows {
        for i in 0..grid.nx {
            let (x, y) = grid.center(i as isize, j as isize);
            num.push(rho.get(i, j));
            reference.push(exact.primitive(x, y, state.time, case.gamma)?.rho);
        }
    }
    let measure = if case.strip { grid.dx } else { grid.dx * grid.dx };
    Ok(Some(compare_densities(&num, &reference, grid.nx, grid.dx, measure)))
}

/// Runs a configuration to completion, returning the final state.
pub fn execute(config: &RunConfig, control: &RunControl) -> Result<RunOutcome> {
    config.validate()?;
    let case = config.resolve_case()?;
    let nx = config.nx.unwrap_or(case.default_mesh.0);
    let ny = if config.nx.is_none() && config.ny.is_none() && !case.strip { Some(case.default_mesh.1) } else { config.ny };
    let grid = case.grid(nx, ny)?;
    let limiter = config.limiter_config(&case);
    let (solver, mut state) = case.setup(grid, limiter, config.alpha, config.kinetic_speed)?;
    let t_final = config.t_final.unwrap_or(case.t_final);
    if let Some(dir) = &config.output_dir {
        std::fs::create_dir_all(dir)?;
    }
    let started = Instant::now();
    let initial = moments(&state.field);
    let initial_totals = totals(&initial, &grid);
    let (mut min_rho, mut min_p, _) = crate::solver::scan_admissibility(&state.field, solver.gas);

    let mut stops: Vec<f64> = config.snapshot_times.iter().copied().filter(|&t| t < t_final).collect();
    stops.sort_by(f64::total_cmp);
    stops.dedup();
    let mut next_stop = 0;

    let mut writer =
        Writer { dir: config.output_dir.as_deref(), formats: &config.formats, case: &case, grid, written: Vec::new() };
    writer.snapshot(&state, None)?;

    let mut last_theta: Option<ThetaField> = None;
    let mut max_violation: Option<f64> = config.check_bounds.then_some(0.0);
    let mut completed = true;
    while state.time < t_final {
        if control.is_cancelled() {
            return Err(Error::Cancelled);
        }
        if config.max_steps.is_some_and(|m| state.steps >= m) {
            completed = false;
            break;
        }
        let target = stops.get(next_stop).copied().unwrap_or(t_final);
        let report = solver.advance(&mut state, target)?;
        min_rho = min_rho.min(report.min_rho);
        min_p = min_p.min(report.min_p);
        if let Some(v) = max_violation.as_mut() {
            *v = v.max(bound_violation(&state, &report.bounds));
        }
        control.record(&state);
        let mut write = config.snapshot_every.is_some_and(|n| state.steps % n == 0);
        if state.time == target && next_stop < stops.len() {
            next_stop += 1;
            write = true;
        }
        if write {
            writer.snapshot(&state, Some(&report.theta))?;
        }
        last_theta = Some(report.theta);
    }
    writer.snapshot(&state, last_theta.as_ref())?;
    writer.finish(&state, last_theta.as_ref())?;

    let final_totals = totals(&moments(&state.field), &grid);
    let conservation_drift = std::array::from_fn(|k| {
        let d = (final_totals[k] - initial_totals[k]).abs();
        if initial_totals[k] != 0.0 { d / initial_totals[k].abs() } else { d }
    });
    let error = density_error(&case, &grid, &state)?;
    let summary = RunSummary {
        case: case.name.clone(),
        limiter: limiter.density,
        pressure_limiter: limiter.pressure,
        nx: grid.nx,
        ny: grid.ny,
        dx: grid.dx,
        alpha: config.alpha,
        kinetic_speed: config.kinetic_speed.or(case.fixed_speed),
        t_final,
        time: state.time,
        steps: state.steps,
        completed,
        wall_time_s: started.elapsed().as_secs_f64(),
        min_rho,
        min_p,
        initial_totals,
        final_totals,
        conservation_drift,
        max_bound_violation: max_violation,
        error,
        snapshots: writer.written.clone(),
        output_dir: config.output_dir.clone(),
    };
    if let Some(dir) = &config.output_dir {
        std::fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary).map_err(json_err)?)?;
    }
    Ok(RunOutcome { summary, state, grid })
}

/// Largest relative excursion of the interior density outside `[mu, nu]`.
pub fn bound_violation(state: &SolverState, bounds: &crate::limiters::DensityBounds) -> f64 {
    let mut worst = 0.0f64;
    for (_, _, p) in state.field.interior_indices() {
        let rho = state.field.total[p].rho;
        let b = bounds.at(p);
        let scale = rho.abs().max(f64::MIN_POSITIVE);
        worst = worst.max((b.mu - rho) / scale).max((rho - b.nu) / scale);
    }
    worst
}

fn json_err(e: serde_json::Error) -> Error {
    Error::Config(format!("serialization failed: {e}"))
}

/// Runs a configuration and returns its summary.
pub fn run(config: &RunConfig) -> Result<RunSummary> {
    execute(config, &RunControl::new()).map(|o| o.summary)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub nx: usize,
    pub steps: u64,
    pub report: ErrorReport,
    /// Orders against the previous row; absent unless the cell size halved.
    pub rates: Option<Rates>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub case: String,
    pub limiter: DensityKind,
    pub t_final: f64,
    pub rows: Vec<ConvergenceRow>,
}

pub const CONVERGENCE_HEADER: [&str; 15] = [
    "nx", "dx", "steps", "l1", "l1_rate", "l2", "l2_rate", "linf", "linf_rate", "rel_l1", "rel_l1_rate", "rel_l2",
    "rel_l2_rate", "rel_linf", "rel_linf_rate",
];

impl ConvergenceTable {
    pub fn to_csv(&self) -> String {
        let mut out = CONVERGENCE_HEADER.join(",");
        out.push('\n');
        for r in &self.rows {
            let rate = |k: usize, rel: bool| {
                r.rates.map_or(String::new(), |x| fmt_f64(if rel { x.relative[k] } else { x.absolute[k] }))
            };
            let e = &r.report;
            let cells = [
                r.nx.to_string(),
                fmt_f64(e.dx),
                r.steps.to_string(),
                fmt_f64(e.l1),
                rate(0, false),
                fmt_f64(e.l2),
                rate(1, false),
                fmt_f64(e.linf),
                rate(2, false),
                fmt_f64(e.rel_l1),
                rate(0, true),
                fmt_f64(e.rel_l2),
                rate(1, true),
                fmt_f64(e.rel_linf),
                rate(2, true),
            ];
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Runs the configuration on each mesh and tabulates density errors.
pub fn convergence_study(config: &RunConfig, meshes: &[usize], control: &RunControl) -> Result<ConvergenceTable> {
    let case = config.resolve_case()?;
    if case.exact.is_none() {
        return Err(Error::Unsupported(format!("case `{}` has no exact solution", case.name)));
    }
    if meshes.is_empty() {
        return Err(Error::Config("convergence study needs at least one mesh".into()));
    }
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(meshes.len());
    for &nx in meshes {
        let cfg = RunConfig {
            nx: Some(nx),
            ny: None,
            output_dir: None,
            snapshot_every: None,
            snapshot_times: Vec::new(),
            max_steps: None,
            ..config.clone()
        };
        let out = execute(&cfg, control)?;
        let report = out.summary.error.expect("case has an exact solution");
        let rates = rows
            .last()
            .and_then(|prev| convergence_rates(&[prev.report, report]).ok())
            .map(|r| r[0]);
        rows.push(ConvergenceRow { nx, steps: out.summary.steps, report, rates });
    }
    let table = ConvergenceTable {
        case: case.name.clone(),
        limiter: config.limiter.unwrap_or(case.default_limiter),
        t_final: config.t_final.unwrap_or(case.t_final),
        rows,
    };
    if let Some(dir) = &config.output_dir {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("convergence.csv"), table.to_csv())?;
        std::fs::write(dir.join("convergence.json"), serde_json::to_string_pretty(&table).map_err(json_err)?)?;
    }
    Ok(table)
}
