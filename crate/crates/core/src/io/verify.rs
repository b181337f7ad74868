//! Fixed-seed property suites runnable from the command line or service.

use std::str::FromStr;

use nalgebra::{Matrix3, SymmetricEigen};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::euler::{flux_x_unchecked, flux_y_unchecked, GasModel};
use crate::fd_oracle::{characteristic_poly_check, kinetic_history, multistep_residual, relative_residual};
use crate::kinetic::{maxwellian, KineticModel};
use crate::limiters::{compute_theta, density_bounds, pressure_quadratic, pressure_spectral_radius, DensityKind, LimiterConfig};
use crate::mesh::{init_distributions, moments, BoundaryPlan, ThetaField};
use crate::sampling::{admissible_state, random_field, rng};
use crate::solver::{compute_face_data, first_order_step, second_order_step};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Moments,
    FdOracle,
    Limiters,
    All,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "moments" => Ok(Suite::Moments),
            "fd-oracle" | "fd_oracle" => Ok(Suite::FdOracle),
            "limiters" => Ok(Suite::Limiters),
            "all" => Ok(Suite::All),
            other => Err(Error::Config(format!("unknown suite `{other}` (expected moments, fd-oracle, limiters or all)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub suite: String,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// `Err(Verification)` naming the failed checks.
    pub fn into_result(self) -> Result<Self> {
        if self.passed() {
            return Ok(self);
        }
        let failed: Vec<&str> = self.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        Err(Error::Verification(failed.join(", ")))
    }
}

fn check(suite: &str, name: &str, passed: bool, detail: String) -> Check {
    Check { suite: suite.into(), name: name.into(), passed, detail }
}

pub fn verify(suite: Suite) -> Result<VerifyReport> {
    let mut checks = Vec::new();
    if matches!(suite, Suite::Moments | Suite::All) {
        checks.extend(moment_checks()?);
    }
    if matches!(suite, Suite::FdOracle | Suite::All) {
        checks.extend(fd_checks()?);
    }
    if matches!(suite, Suite::Limiters | Suite::All) {
        checks.extend(limiter_checks()?);
    }
    Ok(VerifyReport { checks })
}

fn moment_checks() -> Result<Vec<Check>> {
    let gas = GasModel::air();
    let mut rng = rng(101);
    let mut worst = [0.0f64; 3];
    for _ in 0..1000 {
        let u = admissible_state(&mut rng, 0.01, 5.0, 3.0, gas);
        let model = KineticModel::new(rng.gen_range(0.5..0.99), rng.gen_range(1.0..50.0))?;
        let mut sums = [crate::euler::Conserved::ZERO; 3];
        for k in 1..=5 {
            let m = maxwellian(k, u, &model, gas)?;
            let (ex, ey) = model.velocity(k);
            sums[0] = sums[0] + m;
            sums[1] = sums[1] + ex * m;
            sums[2] = sums[2] + ey * m;
        }
        let targets = [u, flux_x_unchecked(u, gas), flux_y_unchecked(u, gas)];
        for c in 0..3 {
            let scale = targets[c].max_abs().max(u.max_abs());
            worst[c] = worst[c].max((sums[c] - targets[c]).max_abs() / scale);
        }
    }
    let mut out = Vec::new();
    for (name, w) in ["sum_equals_state", "x_moment_equals_flux", "y_moment_equals_flux"].iter().zip(worst) {
        out.push(check("moments", name, w <= 1e-13, format!("max relative deviation {w:e} over 1000 states")));
    }

    let (field, model) = random_field(7, 12, 0.0, gas);
    let u = moments(&field);
    let again = init_distributions(&u, field.grid, &model, gas)?;
    let dev = u.data.iter().zip(&moments(&again).data).map(|(a, b)| (*a - *b).max_abs()).fold(0.0, f64::max);
    out.push(check("moments", "init_then_moments_round_trip", dev <= 1e-14, format!("max deviation {dev:e}")));
    Ok(out)
}

fn fd_checks() -> Result<Vec<Check>> {
    let gas = GasModel::air();
    let plan = BoundaryPlan::periodic();
    let mut out = Vec::new();
    let mut worst = 0.0f64;
    for seed in 0..3 {
        let (h, a) = kinetic_history(second_order_step, seed, 16, gas);
        let r = multistep_residual(&h, &plan, a, 0.5, gas)?;
        worst = worst.max(relative_residual(&h, &r));
    }
    out.push(check("fd-oracle", "second_order_history_satisfies_recurrence", worst <= 1e-11, format!("max relative residual {worst:e} (bound 1e-11)")));
    let (h, a) = kinetic_history(first_order_step, 0, 16, gas);
    let r = relative_residual(&h, &multistep_residual(&h, &plan, a, 0.5, gas)?);
    out.push(check("fd-oracle", "first_order_history_violates_recurrence", r > 1e-6, format!("relative residual {r:e} (must exceed 1e-6)")));
    for n in 2..=4 {
        let ok = characteristic_poly_check(n)?;
        out.push(check("fd-oracle", &format!("characteristic_polynomial_{n}x{n}"), ok, format!("P(A) = 0 on a {n}x{n} periodic grid")));
    }
    Ok(out)
}

fn limiter_checks() -> Result<Vec<Check>> {
    let gas = GasModel::air();
    let mut out = Vec::new();
    let mut rng = rng(202);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let u = admissible_state(&mut rng, 0.01, 5.0, 3.0, gas);
        let d = crate::euler::Conserved::new(
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-5.0..5.0),
        );
        let pencil = |v: crate::euler::Conserved| Matrix3::new(v.rho, 0.0, -v.m1, 0.0, v.rho, -v.m2, -v.m1, -v.m2, 2.0 * v.e);
        let l = pencil(u).cholesky().ok_or_else(|| Error::DegenerateState("pencil not positive definite".into()))?.l();
        let li = l.try_inverse().ok_or_else(|| Error::DegenerateState("singular factor".into()))?;
        let c = li * pencil(d) * li.transpose();
        let dense = SymmetricEigen::new((c + c.transpose()) * 0.5).eigenvalues.amax();
        let r = pressure_spectral_radius(u, d)?;
        worst = worst.max((r - dense).abs() / dense);
    }
    out.push(check("limiters", "pressure_radius_matches_eigensolver", worst <= 1e-10, format!("max relative deviation {worst:e} over 1000 pairs")));

    let mut all_negative = true;
    for _ in 0..10_000 {
        let u = admissible_state(&mut rng, 0.01, 5.0, 3.0, gas);
        all_negative &= pressure_quadratic(u, u).gamma0 < 0.0;
    }
    out.push(check("limiters", "gamma0_negative_on_admissible_states", all_negative, "10000 states".into()));

    let mut ordered = true;
    let mut in_range = true;
    for seed in 0..20 {
        let (field, model) = random_field(300 + seed, 12, 0.1, gas);
        let faces = compute_face_data(&field, &model, gas);
        let thetas: Vec<ThetaField> = [DensityKind::Lmp, DensityKind::Rlmp, DensityKind::Pp]
            .iter()
            .map(|&k| {
                let cfg = LimiterConfig::new(k);
                compute_theta(&faces, &density_bounds(&cfg, &field.total, &faces), &cfg, model.kappa())
            })
            .collect::<Result<_>>()?;
        in_range &= thetas.iter().all(ThetaField::in_unit_interval);
        let le = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| x <= y);
        ordered &= le(&thetas[0].theta_x, &thetas[1].theta_x)
            && le(&thetas[1].theta_x, &thetas[2].theta_x)
            && le(&thetas[0].theta_y, &thetas[1].theta_y)
            && le(&thetas[1].theta_y, &thetas[2].theta_y);
    }
    out.push(check("limiters", "lmp_le_rlmp_le_pp", ordered, "face-wise on 20 random fields".into()));
    out.push(check("limiters", "theta_in_unit_interval", in_range, "all limiters, 20 random fields".into()));
    Ok(out)
}
