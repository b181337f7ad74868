//! Built-in benchmark configurations, exact solutions and error norms.

pub mod exact;
pub mod norms;

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use exact::{exact_entropy_wave, exact_isentropic_wave, exact_riemann_1d, RiemannSolution};
pub use norms::{compare_densities, convergence_rates, error_norms, ErrorReport, Rates};

use crate::error::{Error, Result};
use crate::euler::{to_conserved, Conserved, GasModel, Primitive};
use crate::kinetic::{KineticModel, SpeedPolicy, DEFAULT_ALPHA};
use crate::limiters::{DensityKind, LimiterConfig};
use crate::mesh::{init_distributions, BoundaryPlan, CellField, Grid, SideCondition};
use crate::solver::{Solver, SolverState};

/// Initial condition `(x, y, grid) -> Primitive`; the grid is available for
/// resolution-dependent data.
pub type InitFn = Arc<dyn Fn(f64, f64, &Grid) -> Primitive + Send + Sync>;

/// Reference solution attached to a case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Exact {
    EntropyWave,
    Riemann { left: Primitive, right: Primitive, x0: f64 },
    Isentropic { amp: f64 },
}

impl Exact {
    pub fn primitive(&self, x: f64, y: f64, t: f64, gamma: f64) -> Result<Primitive> {
        match *self {
            Exact::EntropyWave => Ok(exact_entropy_wave(x, y, t)),
            Exact::Riemann { left, right, x0 } => {
                if t <= 0.0 {
                    return Ok(if x < x0 { left } else { right });
                }
                exact_riemann_1d(left, right, gamma, (x - x0) / t)
            }
            Exact::Isentropic { amp } => exact_isentropic_wave(x, t, amp),
        }
    }

    /// Whether relative norms are the customary comparison for this case.
    pub fn is_smooth(&self) -> bool {
        !matches!(self, Exact::Riemann { .. })
    }
}

#[derive(Clone)]
pub struct CaseSpec {
    pub name: String,
    pub description: String,
    /// `[x0, x1, y0, y1]`; the `y` range is ignored for strip problems.
    pub domain: [f64; 4],
    /// One-dimensional problem run as a four-cell strip, periodic in `y`.
    pub strip: bool,
    pub gamma: f64,
    pub initial: InitFn,
    pub boundary: BoundaryPlan,
    pub t_final: f64,
    pub default_mesh: (usize, usize),
    pub default_limiter: DensityKind,
    pub fixed_speed: Option<f64>,
    pub exact: Option<Exact>,
    /// Shift the grid by half a cell when needed so that one cell is
    /// centred on the origin.
    pub center_origin: bool,
    pub notes: String,
}

impl std::fmt::Debug for CaseSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CaseSpec")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("strip", &self.strip)
            .field("gamma", &self.gamma)
            .field("t_final", &self.t_final)
            .field("default_mesh", &self.default_mesh)
            .field("default_limiter", &self.default_limiter)
            .field("fixed_speed", &self.fixed_speed)
            .field("exact", &self.exact)
            .finish_non_exhaustive()
    }
}

/// Serializable summary of a case for listings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseInfo {
    pub name: String,
    pub description: String,
    pub domain: [f64; 4],
    pub strip: bool,
    pub gamma: f64,
    pub t_final: f64,
    pub default_mesh: (usize, usize),
    pub default_limiter: DensityKind,
    pub fixed_speed: Option<f64>,
    pub has_exact: bool,
    pub notes: String,
}

/// Number of cells across a strip problem.
pub const STRIP_WIDTH: usize = 4;

impl CaseSpec {
    pub fn gas(&self) -> GasModel {
        GasModel { gamma: self.gamma }
    }

    pub fn info(&self) -> CaseInfo {
        CaseInfo {
            name: self.name.clone(),
            description: self.description.clone(),
            domain: self.domain,
            strip: self.strip,
            gamma: self.gamma,
            t_final: self.t_final,
            default_mesh: self.default_mesh,
            default_limiter: self.default_limiter,
            fixed_speed: self.fixed_speed,
            has_exact: self.exact.is_some(),
            notes: self.notes.clone(),
        }
    }

    /// Grid with `nx` cells across `x`; `ny` is derived from the square-cell
    /// constraint when omitted.
    pub fn grid(&self, nx: usize, ny: Option<usize>) -> Result<Grid> {
        if nx == 0 {
            return Err(Error::Config("mesh must have at least one cell".into()));
        }
        let [x0, x1, y0, y1] = self.domain;
        let dx = (x1 - x0) / nx as f64;
        let ny = if self.strip {
            match ny {
                Some(n) if n != STRIP_WIDTH => {
                    return Err(Error::Config(format!(
                        "{} is one-dimensional and runs on a {STRIP_WIDTH}-cell strip, got ny = {n}",
                        self.name
                    )))
                }
                _ => STRIP_WIDTH,
            }
        } else {
            let derived = ((y1 - y0) / dx).round() as usize;
            if derived == 0 || ((derived as f64) * dx - (y1 - y0)).abs() > 1e-9 * (y1 - y0) {
                return Err(Error::Config(format!(
                    "nx = {nx} does not give square cells on {}x{} domain",
                    x1 - x0,
                    y1 - y0
                )));
            }
            match ny {
                Some(n) if n != derived => {
                    return Err(Error::Config(format!(
                        "ny = {n} does not give square cells with nx = {nx} (expected {derived})"
                    )))
                }
                _ => derived,
            }
        };
        if ny == 0 {
            return Err(Error::Config("mesh must have at least one cell".into()));
        }
        let mut origin = (x0, if self.strip { 0.0 } else { y0 });
        if self.center_origin {
            if nx % 2 == 0 {
                origin.0 -= 0.5 * dx;
            }
            if ny % 2 == 0 {
                origin.1 -= 0.5 * dx;
            }
        }
        Grid::new(nx, ny, dx, origin)
    }

    pub fn initial_primitive(&self, grid: &Grid) -> CellField<Primitive> {
        CellField::from_fn(grid.nx, grid.ny, |i, j| {
            let (x, y) = grid.center(i as isize, j as isize);
            (self.initial)(x, y, grid)
        })
    }

    pub fn initial_field(&self, grid: &Grid) -> Result<CellField<Conserved>> {
        let gas = self.gas();
        let w = self.initial_primitive(grid);
        let data = w.data.iter().map(|&w| to_conserved(w, gas)).collect::<Result<Vec<_>>>()?;
        Ok(CellField { nx: grid.nx, ny: grid.ny, data })
    }

    /// Solver and initial state for a run of this case.
    pub fn setup(&self, grid: Grid, limiter: LimiterConfig, alpha: f64, speed: Option<f64>) -> Result<(Solver, SolverState)> {
        let speed = speed.or(self.fixed_speed);
        let solver = Solver {
            gas: self.gas(),
            alpha,
            policy: speed.map_or(SpeedPolicy::Critical, SpeedPolicy::Fixed),
            plan: self.boundary.clone(),
            limiter,
        };
        solver.validate(&grid)?;
        let u0 = self.initial_field(&grid)?;
        let model = KineticModel::new(alpha, speed.unwrap_or(1.0))?;
        let field = init_distributions(&u0, grid, &model, self.gas())?;
        Ok((solver, SolverState { field, time: 0.0, steps: 0 }))
    }

    /// Setup at the default mesh, limiter and rest weight.
    pub fn default_setup(&self) -> Result<(Solver, SolverState)> {
        let grid = self.grid(self.default_mesh.0, Some(self.default_mesh.1))?;
        self.setup(grid, LimiterConfig::new(self.default_limiter), DEFAULT_ALPHA, None)
    }

    /// Inline one-dimensional Riemann problem on `[x0, x1]` with the jump at `xj`.
    pub fn riemann_strip(
        name: &str,
        left: Primitive,
        right: Primitive,
        gamma: f64,
        x_range: (f64, f64),
        xj: f64,
        t_final: f64,
    ) -> Result<Self> {
        GasModel::new(gamma)?;
        if !(x_range.1 > x_range.0) || !(t_final > 0.0) {
            return Err(Error::Config("inline case needs a non-empty domain and positive final time".into()));
        }
        for w in [left, right] {
            if !(w.rho > 0.0 && w.p > 0.0) {
                return Err(Error::Config(format!("inline state {w:?} is not admissible")));
            }
        }
        let left = Primitive { v2: 0.0, ..left };
        let right = Primitive { v2: 0.0, ..right };
        Ok(Self {
            name: name.to_string(),
            description: "user-defined one-dimensional Riemann problem".into(),
            domain: [x_range.0, x_range.1, 0.0, 0.0],
            strip: true,
            gamma,
            initial: Arc::new(move |x, _, _| if x < xj { left } else { right }),
            boundary: BoundaryPlan::strip(SideCondition::ZeroGradient),
            t_final,
            default_mesh: (200, STRIP_WIDTH),
            default_limiter: DensityKind::Rlmp,
            fixed_speed: None,
            exact: Some(Exact::Riemann { left, right, x0: xj }),
            center_origin: false,
            notes: String::new(),
        })
    }
}

/// Names of the built-in cases, in listing order.
pub const CASE_NAMES: [&str; 10] = [
    "entropy_wave",
    "sod",
    "shu_osher",
    "isentropic_vacuum",
    "leblanc",
    "sedov",
    "riemann2d_cfg3",
    "dmr",
    "jet_m80",
    "jet_m2000",
];

pub fn builtin_cases() -> Vec<CaseSpec> {
    CASE_NAMES.iter().map(|n| case_by_name(n).expect("builtin case")).collect()
}

pub fn case_by_name(name: &str) -> Result<CaseSpec> {
    let strip = |name: &str, desc: &str, domain: (f64, f64), gamma: f64, init: InitFn, t: f64, n: usize| CaseSpec {
        name: name.into(),
        description: desc.into(),
        domain: [domain.0, domain.1, 0.0, 0.0],
        strip: true,
        gamma,
        initial: init,
        boundary: BoundaryPlan::strip(SideCondition::ZeroGradient),
        t_final: t,
        default_mesh: (n, STRIP_WIDTH),
        default_limiter: DensityKind::Rlmp,
        fixed_speed: None,
        exact: None,
        center_origin: false,
        notes: String::new(),
    };
    let spec = match name {
        "entropy_wave" => CaseSpec {
            name: name.into(),
            description: "sinusoidal entropy wave advected diagonally across the periodic unit square".into(),
            domain: [0.0, 1.0, 0.0, 1.0],
            strip: false,
            gamma: 1.4,
            initial: Arc::new(|x, y, _| exact_entropy_wave(x, y, 0.0)),
            boundary: BoundaryPlan::periodic(),
            t_final: 1.0,
            default_mesh: (80, 80),
            default_limiter: DensityKind::Pp,
            fixed_speed: Some(10.7),
            exact: Some(Exact::EntropyWave),
            center_origin: false,
            notes: "fixed kinetic speed a = 10.7: dt = dx/10.7 divides t = 1 for dx = 2^-k/20 (214 * 2^k steps)".into(),
        },
        "sod" => {
            let (l, r) = (Primitive::new(1.0, 0.0, 0.0, 1.0), Primitive::new(0.125, 0.0, 0.0, 0.1));
            let mut c = strip(name, "Sod shock tube on [0, 1]", (0.0, 1.0), 1.4, Arc::new(move |x, _, _| if x < 0.5 { l } else { r }), 0.2, 100);
            c.boundary = c.boundary.with_sponge([5, 5, 0, 0]);
            c.exact = Some(Exact::Riemann { left: l, right: r, x0: 0.5 });
            c.notes = "states (1, 0, 1) | (0.125, 0, 0.1); 5-cell first-order sponge at both ends".into();
            c
        }
        "shu_osher" => {
            let mut c = strip(
                name,
                "shock interacting with a density sine wave on [-5, 5]",
                (-5.0, 5.0),
                1.4,
                Arc::new(|x, _, _| {
                    if x < -4.0 {
                        Primitive::new(3.857143, 2.629369, 0.0, 10.33333333333)
                    } else {
                        Primitive::new(1.0 + 0.2 * (5.0 * x).sin(), 0.0, 0.0, 1.0)
                    }
                }),
                1.8,
                800,
            );
            c.notes = "reference: first-order run on 20000 cells".into();
            c
        }
        "isentropic_vacuum" => {
            let amp = 0.9999995;
            let mut c = strip(
                name,
                "near-vacuum smooth isentropic wave, gamma = 3, periodic on [-1, 1]",
                (-1.0, 1.0),
                3.0,
                Arc::new(move |x, _, _| {
                    let rho = 1.0 + amp * (PI * x).sin();
                    Primitive::new(rho, 0.0, 0.0, rho * rho * rho)
                }),
                0.1,
                50,
            );
            c.boundary = BoundaryPlan::periodic();
            c.default_limiter = DensityKind::Pp;
            c.exact = Some(Exact::Isentropic { amp });
            c
        }
        "leblanc" => {
            let g = 5.0 / 3.0;
            let (l, r) = (Primitive::new(1.0, 0.0, 0.0, 0.1 * (g - 1.0)), Primitive::new(1e-3, 0.0, 0.0, 1e-7 * (g - 1.0)));
            let mut c = strip(name, "LeBlanc shock tube on [0, 9]", (0.0, 9.0), g, Arc::new(move |x, _, _| if x <= 3.0 { l } else { r }), 6.0, 1000);
            c.exact = Some(Exact::Riemann { left: l, right: r, x0: 3.0 });
            c
        }
        "sedov" => CaseSpec {
            name: name.into(),
            description: "Sedov blast wave on [-1.1, 1.1]^2".into(),
            domain: [-1.1, 1.1, -1.1, 1.1],
            strip: false,
            gamma: 1.4,
            initial: Arc::new(|x, y, grid| {
                let h = 0.5 * grid.dx;
                if x.abs() < h && y.abs() < h {
                    let e = 0.979264 / (grid.dx * grid.dx);
                    Primitive::new(1.0, 0.0, 0.0, 0.4 * e)
                } else {
                    Primitive::new(1.0, 0.0, 0.0, 0.4 * 1e-12)
                }
            }),
            boundary: BoundaryPlan::uniform(SideCondition::ZeroGradient),
            t_final: 1.0,
            default_mesh: (400, 400),
            default_limiter: DensityKind::Rlmp,
            fixed_speed: None,
            exact: None,
            center_origin: true,
            notes: "energy 0.979264 deposited in the cell centred on the origin; shock radius 1 at t = 1".into(),
        },
        "riemann2d_cfg3" => {
            let init: InitFn = Arc::new(|x, y, _| match (x <= 0.8, y <= 0.8) {
                (true, true) => Primitive::new(0.138, 1.206, 1.206, 0.029),
                (true, false) => Primitive::new(0.5323, 1.206, 0.0, 0.3),
                (false, true) => Primitive::new(0.5323, 0.0, 1.206, 0.3),
                (false, false) => Primitive::new(1.5, 0.0, 0.0, 1.5),
            });
            CaseSpec {
                name: name.into(),
                description: "two-dimensional Riemann problem, configuration 3".into(),
                domain: [0.0, 1.0, 0.0, 1.0],
                strip: false,
                gamma: 1.4,
                initial: init,
                boundary: BoundaryPlan::uniform(SideCondition::ZeroGradient),
                t_final: 0.8,
                default_mesh: (400, 400),
                default_limiter: DensityKind::Rlmp,
                fixed_speed: None,
                exact: None,
                center_origin: false,
                notes: "density contours: 30 levels from 0.127 to 1.774".into(),
            }
        }
        "dmr" => {
            let shock = dmr_state;
            let dirichlet = SideCondition::dirichlet(shock);
            CaseSpec {
                name: name.into(),
                description: "double Mach reflection of a Mach 10 oblique shock on [0, 3] x [0, 1]".into(),
                domain: [0.0, 3.0, 0.0, 1.0],
                strip: false,
                gamma: 1.4,
                initial: Arc::new(move |x, y, _| shock(x, y, 0.0)),
                boundary: BoundaryPlan {
                    west: dirichlet.clone(),
                    east: dirichlet.clone(),
                    north: dirichlet.clone(),
                    south: SideCondition::Split {
                        at: 1.0 / 6.0,
                        below: Box::new(dirichlet),
                        above: Box::new(SideCondition::ReflectiveWall),
                    },
                    sponge: [0; 4],
                },
                t_final: 0.2,
                default_mesh: (1500, 500),
                default_limiter: DensityKind::Rlmp,
                fixed_speed: None,
                exact: None,
                center_origin: false,
                notes: "reflective wall for x >= 1/6 on the bottom; density contours: 30 levels from 1.386 to 22.589".into(),
            }
        }
        "jet_m80" => jet(name, 30.0, [0.0, 2.0, -0.5, 0.5], 0.07),
        "jet_m2000" => jet(name, 800.0, [0.0, 1.0, -0.25, 0.25], 0.001),
        other => return Err(Error::UnknownCase(other.to_string())),
    };
    Ok(spec)
}

/// Pre/post-shock state of the double Mach reflection at `(x, y, t)`.
pub fn dmr_state(x: f64, y: f64, t: f64) -> Primitive {
    if x >= 1.0 / 6.0 + (y + 20.0 * t) / 3f64.sqrt() {
        Primitive::new(1.4, 0.0, 0.0, 1.0)
    } else {
        Primitive::new(8.0, 8.25 * (PI / 6.0).cos(), -8.25 * (PI / 6.0).sin(), 116.5)
    }
}

fn jet(name: &str, speed: f64, domain: [f64; 4], t_final: f64) -> CaseSpec {
    let ambient = Primitive::new(0.5, 0.0, 0.0, 0.4127);
    let inflow = Primitive::new(5.0, speed, 0.0, 0.4127);
    CaseSpec {
        name: name.into(),
        description: format!("astrophysical jet, inflow speed {speed}, gamma = 5/3"),
        domain,
        strip: false,
        gamma: 5.0 / 3.0,
        initial: Arc::new(move |_, _, _| ambient),
        boundary: BoundaryPlan {
            west: SideCondition::dirichlet(move |_, y, _| if y.abs() < 0.05 { inflow } else { ambient }),
            ..BoundaryPlan::uniform(SideCondition::ZeroGradient)
        },
        t_final,
        default_mesh: (800, 400),
        default_limiter: DensityKind::Rlmp,
        fixed_speed: None,
        exact: None,
        center_origin: false,
        notes: "log-density is the customary display".into(),
    }
}
