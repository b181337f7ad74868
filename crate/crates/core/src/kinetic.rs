//! The D2Q5 kinetic model: lattice velocities, Maxwellian equilibria and the
//! kinetic-speed policy.
//!
//! Waves are numbered 1..=5 with velocities `(+a,0)`, `(-a,0)`, `(0,+a)`,
//! `(0,-a)` and rest. Under exact streaming (`a dt = dx`) each moving wave
//! shifts by exactly one cell per step.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::euler::{flux_x_unchecked, flux_y_unchecked, Conserved, GasModel};

/// Number of discrete velocities.
pub const Q: usize = 5;

/// Unit lattice directions `(e_x, e_y) / a` for waves 1..=5.
pub const DIRECTIONS: [(i32, i32); Q] = [(1, 0), (-1, 0), (0, 1), (0, -1), (0, 0)];

/// Default rest weight: the smallest value for which the first-order update
/// is a convex combination.
pub const DEFAULT_ALPHA: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KineticModel {
    /// Rest-wave weight, `1/2 <= alpha < 1`.
    pub alpha: f64,
    /// Current kinetic speed `a`.
    pub speed: f64,
}

impl KineticModel {
    pub fn new(alpha: f64, speed: f64) -> Result<Self> {
        if !(0.5..1.0).contains(&alpha) {
            return Err(Error::Config(format!("alpha must lie in [1/2, 1), got {alpha}")));
        }
        if !(speed > 0.0) || !speed.is_finite() {
            return Err(Error::Config(format!("kinetic speed must be positive, got {speed}")));
        }
        Ok(Self { alpha, speed })
    }

    /// Model with `alpha` anywhere in `[0, 1)`. The limiter guarantees need
    /// `alpha >= 1/2`; smaller values are only meaningful for experiments such
    /// as the four-wave (`alpha = 0`) limit.
    pub fn unconstrained(alpha: f64, speed: f64) -> Self {
        Self { alpha, speed }
    }

    pub fn with_speed(self, speed: f64) -> Self {
        Self { speed, ..self }
    }

    /// Velocity components `(e_x, e_y)` of wave `k` (1-based).
    pub fn velocity(&self, k: usize) -> (f64, f64) {
        let (dx, dy) = DIRECTIONS[k - 1];
        (dx as f64 * self.speed, dy as f64 * self.speed)
    }

    /// `kappa = a (1 - alpha) / 2`, the Lax-Friedrichs speed of the
    /// intermediate states.
    pub fn kappa(&self) -> f64 {
        self.speed * (1.0 - self.alpha) / 2.0
    }

    /// All five equilibria at once (flux evaluated once per direction).
    #[inline]
    pub fn equilibria(&self, u: Conserved, gas: GasModel) -> [Conserved; Q] {
        let w = (1.0 - self.alpha) / 4.0;
        let base = w * u;
        let half_inv_a = 0.5 / self.speed;
        let f = half_inv_a * flux_x_unchecked(u, gas);
        let g = half_inv_a * flux_y_unchecked(u, gas);
        [base + f, base - f, base + g, base - g, self.alpha * u]
    }

    /// Equilibria of the four moving waves only.
    #[inline]
    pub fn moving_equilibria(&self, u: Conserved, gas: GasModel) -> [Conserved; 4] {
        let w = (1.0 - self.alpha) / 4.0;
        let base = w * u;
        let half_inv_a = 0.5 / self.speed;
        let f = half_inv_a * flux_x_unchecked(u, gas);
        let g = half_inv_a * flux_y_unchecked(u, gas);
        [base + f, base - f, base + g, base - g]
    }
}

/// Maxwellian `M_k(u)` for wave `k` in `1..=5`.
pub fn maxwellian(k: usize, u: Conserved, model: &KineticModel, gas: GasModel) -> Result<Conserved> {
    if !(1..=Q).contains(&k) {
        return Err(Error::Config(format!("wave index {k} outside 1..=5")));
    }
    if u.rho == 0.0 && k != 5 {
        return Err(Error::DegenerateState(format!("zero density in {u:?}")));
    }
    if k == 5 {
        return Ok(model.alpha * u);
    }
    Ok(model.moving_equilibria(u, gas)[k - 1])
}

/// Smallest kinetic speed for which the D2Q5 Maxwellians are monotone
/// non-decreasing, given the largest characteristic speed.
pub fn min_kinetic_speed(lambda_max: f64, alpha: f64) -> f64 {
    2.0 * lambda_max / (1.0 - alpha)
}

/// How the kinetic speed is chosen each step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub enum SpeedPolicy {
    /// `a = 2 lambda / (1 - alpha)`, recomputed every step.
    #[default]
    Critical,
    /// A user-supplied constant speed; must dominate the stability minimum.
    Fixed(f64),
}

/// Kinetic speed for the next step.
pub fn kinetic_speed_policy(lambda_max: f64, alpha: f64, policy: SpeedPolicy) -> Result<f64> {
    if !(lambda_max > 0.0) || !lambda_max.is_finite() {
        return Err(Error::DegenerateState(format!("max wave speed {lambda_max} is not positive")));
    }
    let min = min_kinetic_speed(lambda_max, alpha);
    match policy {
        SpeedPolicy::Critical => Ok(min),
        SpeedPolicy::Fixed(a) if a >= min => Ok(a),
        SpeedPolicy::Fixed(a) => Err(Error::Config(format!(
            "fixed kinetic speed {a} is below the monotonicity bound {min} (lambda = {lambda_max})"
        ))),
    }
}
