//! Face-wise blending parameters: density limiters (PP, LMP, RLMP), the
//! pressure-positivity limiter and their combination into a [`ThetaField`].

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::euler::Conserved;
use crate::mesh::{Grid, ThetaField};
use crate::solver::FaceFluxes;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DensityKind {
    /// Positivity only.
    #[default]
    Pp,
    /// Local maximum principle.
    Lmp,
    /// Relaxed local maximum principle.
    Rlmp,
    /// No limiting: pure second order.
    None,
    /// `theta = 0`: pure first order.
    FirstOrder,
}

impl DensityKind {
    pub const ALL: [DensityKind; 5] =
        [DensityKind::Pp, DensityKind::Lmp, DensityKind::Rlmp, DensityKind::None, DensityKind::FirstOrder];

    pub fn as_str(self) -> &'static str {
        match self {
            DensityKind::Pp => "pp",
            DensityKind::Lmp => "lmp",
            DensityKind::Rlmp => "rlmp",
            DensityKind::None => "none",
            DensityKind::FirstOrder => "first_order",
        }
    }
}

impl fmt::Display for DensityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DensityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "pp" => Ok(DensityKind::Pp),
            "lmp" => Ok(DensityKind::Lmp),
            "rlmp" => Ok(DensityKind::Rlmp),
            "none" | "second_order" => Ok(DensityKind::None),
            "first_order" | "first" => Ok(DensityKind::FirstOrder),
            other => Err(Error::Config(format!(
                "unknown limiter `{other}` (expected pp, lmp, rlmp, none or first_order)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimiterConfig {
    pub density: DensityKind,
    pub pressure: bool,
    pub eps: f64,
    pub relax_lo: f64,
    pub relax_hi: f64,
}

impl Default for LimiterConfig {
    fn default() -> Self {
        Self { density: DensityKind::Pp, pressure: true, eps: 1e-16, relax_lo: 0.999, relax_hi: 1.001 }
    }
}

impl LimiterConfig {
    pub fn new(density: DensityKind) -> Self {
        Self { density, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.relax_lo > 0.0 && self.relax_lo < 1.0 && self.relax_hi > 1.0 && self.relax_hi.is_finite()) {
            return Err(Error::Config(format!(
                "relaxation factors must satisfy 0 < lo < 1 < hi, got {} and {}",
                self.relax_lo, self.relax_hi
            )));
        }
        if !(self.eps > 0.0) {
            return Err(Error::Config(format!("eps must be positive, got {}", self.eps)));
        }
        Ok(())
    }
}

/// Lower and upper density bounds of one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellBounds {
    pub mu: f64,
    pub nu: f64,
}

impl CellBounds {
    pub const UNBOUNDED: CellBounds = CellBounds { mu: 0.0, nu: f64::INFINITY };
}

/// Per-cell bounds over the padded grid. Only the interior and the first
/// ghost ring carry meaningful values.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityBounds {
    pub grid: Grid,
    pub mu: Vec<f64>,
    pub nu: Vec<f64>,
}

impl DensityBounds {
    #[inline]
    pub fn at(&self, p: usize) -> CellBounds {
        CellBounds { mu: self.mu[p], nu: self.nu[p] }
    }

    pub fn cell(&self, i: isize, j: isize) -> CellBounds {
        self.at(self.grid.idx(i, j))
    }
}

/// Local density bounds from the cell density and the four face
/// intermediate densities.
pub fn density_bounds(config: &LimiterConfig, total: &[Conserved], faces: &FaceFluxes) -> DensityBounds {
    let grid = faces.grid;
    let n = grid.padded_len();
    let mut mu = vec![0.0; n];
    let mut nu = vec![f64::INFINITY; n];
    let (lo, hi) = match config.density {
        DensityKind::Lmp => (1.0, 1.0),
        DensityKind::Rlmp => (config.relax_lo, config.relax_hi),
        _ => return DensityBounds { grid, mu, nu },
    };
    let px = grid.px();
    let g = grid.ghost as isize;
    let reach = (g - 1).min(1);
    mu.par_chunks_mut(px).zip(nu.par_chunks_mut(px)).enumerate().for_each(|(row, (mu_row, nu_row))| {
        let j = row as isize - g;
        if j < -reach || j >= grid.ny as isize + reach {
            return;
        }
        for i in -reach..grid.nx as isize + reach {
            let p = grid.idx(i, j);
            let c = [
                total[p].rho,
                faces.ustar_x[p].rho,
                faces.ustar_x[p - 1].rho,
                faces.ustar_y[p].rho,
                faces.ustar_y[p - px].rho,
            ];
            let (mn, mx) = c.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
            let k = (i + g) as usize;
            mu_row[k] = lo * mn;
            nu_row[k] = hi * mx;
        }
    });
    DensityBounds { grid, mu, nu }
}

/// Density blending parameter on one face, before clamping to `[0, 1]`.
///
/// `left` is the cell on the low-index side of the face, `right` the other.
/// The intermediate density is pushed down by the increment in `left` and up
/// in `right`.
pub fn theta_rho(
    kind: DensityKind,
    left: CellBounds,
    right: CellBounds,
    rho_star: f64,
    increment: f64,
    kappa: f64,
    eps: f64,
) -> f64 {
    match kind {
        DensityKind::None => 1.0,
        DensityKind::FirstOrder => 0.0,
        _ if increment == 0.0 => 1.0,
        DensityKind::Pp => (kappa * rho_star / increment.abs() - eps).max(0.0),
        DensityKind::Lmp | DensityKind::Rlmp => {
            let room = if increment > 0.0 {
                (right.nu - rho_star).min(rho_star - left.mu)
            } else {
                (rho_star - right.mu).min(left.nu - rho_star)
            };
            (kappa * room.max(0.0) / increment.abs()).max(0.0)
        }
    }
}

/// Terms of the pressure-positivity quadratic for `u* + s d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PressureQuadratic {
    pub gamma0: f64,
    pub gamma1: f64,
    pub discriminant: f64,
}

pub fn pressure_quadratic(ustar: Conserved, d: Conserved) -> PressureQuadratic {
    let gamma0 = ustar.m1 * ustar.m1 + ustar.m2 * ustar.m2 - 2.0 * ustar.rho * ustar.e;
    let gamma1 = 2.0 * (d.rho * ustar.e + d.e * ustar.rho - d.m1 * ustar.m1 - d.m2 * ustar.m2);
    let c2 = d.m1 * d.m1 + d.m2 * d.m2 - 2.0 * d.rho * d.e;
    PressureQuadratic { gamma0, gamma1, discriminant: gamma1 * gamma1 - 4.0 * gamma0 * c2 }
}

/// Spectral radius of `B^{-1/2} A B^{-1/2}` for the pencil built from the
/// intermediate state and the face increment.
pub fn pressure_spectral_radius(ustar: Conserved, d: Conserved) -> Result<f64> {
    let q = pressure_quadratic(ustar, d);
    let c2 = d.m1 * d.m1 + d.m2 * d.m2 - 2.0 * d.rho * d.e;
    let scale = q.gamma1 * q.gamma1 + (4.0 * q.gamma0 * c2).abs();
    if q.discriminant < -1e-12 * scale {
        return Err(Error::DegenerateState(format!(
            "negative discriminant {} in pressure limiter (u* = {ustar:?}, increment = {d:?})",
            q.discriminant
        )));
    }
    let root = q.discriminant.max(0.0).sqrt();
    Ok((d.rho.abs() / ustar.rho).max((q.gamma1.abs() + root) / (-2.0 * q.gamma0)))
}

/// Pressure blending parameter on one face, before clamping to `[0, 1]`.
pub fn theta_pressure(ustar: Conserved, dflux: Conserved, kappa: f64, eps: f64) -> Result<f64> {
    if dflux == Conserved::ZERO {
        return Ok(1.0);
    }
    let r = pressure_spectral_radius(ustar, dflux)?;
    Ok((kappa / r - eps).max(0.0))
}

/// `theta = min(1, theta_rho, theta_p)` on every face adjacent to an
/// interior cell.
pub fn compute_theta(
    faces: &FaceFluxes,
    bounds: &DensityBounds,
    config: &LimiterConfig,
    kappa: f64,
) -> Result<ThetaField> {
    let grid = faces.grid;
    let (nx, ny) = (grid.nx, grid.ny);
    match config.density {
        DensityKind::None => return Ok(ThetaField::filled(nx, ny, 1.0)),
        DensityKind::FirstOrder => return Ok(ThetaField::filled(nx, ny, 0.0)),
        _ => {}
    }
    let face_theta = |p_left: usize, p_right: usize, ustar: Conserved, incr: Conserved| -> Result<f64> {
        let tr = theta_rho(config.density, bounds.at(p_left), bounds.at(p_right), ustar.rho, incr.rho, kappa, config.eps);
        let tp = if config.pressure { theta_pressure(ustar, incr, kappa, config.eps)? } else { f64::INFINITY };
        Ok(tr.min(tp).min(1.0))
    };
    let px = grid.px();

    let theta_x: Vec<f64> = (0..ny)
        .into_par_iter()
        .map(|j| {
            (-1..nx as isize)
                .map(|i| {
                    let p = grid.idx(i, j as isize);
                    face_theta(p, p + 1, faces.ustar_x[p], faces.df[p])
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?
        .concat();
    let theta_y: Vec<f64> = (-1..ny as isize)
        .into_par_iter()
        .map(|j| {
            (0..nx as isize)
                .map(|i| {
                    let p = grid.idx(i, j);
                    face_theta(p, p + px, faces.ustar_y[p], faces.dg[p])
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?
        .concat();
    Ok(ThetaField { nx, ny, theta_x, theta_y })
}
