//! Ideal-gas Euler physics: conserved/primitive states, fluxes, admissibility
//! and wave speeds.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Heat-capacity ratio of an ideal gas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GasModel {
    pub gamma: f64,
}

impl GasModel {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 1.0) || !gamma.is_finite() {
            return Err(Error::Config(format!("gamma must be > 1, got {gamma}")));
        }
        Ok(Self { gamma })
    }

    pub fn air() -> Self {
        Self { gamma: 1.4 }
    }
}

/// Conserved state `(rho, rho v1, rho v2, E)`.
///
/// Intermediate algebra (distributions, flux increments) reuses this type, so
/// construction never checks admissibility; see [`Conserved::is_admissible`].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Conserved {
    pub rho: f64,
    pub m1: f64,
    pub m2: f64,
    pub e: f64,
}

/// Primitive state `(rho, v1, v2, p)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Primitive {
    pub rho: f64,
    pub v1: f64,
    pub v2: f64,
    pub p: f64,
}

impl Primitive {
    pub const fn new(rho: f64, v1: f64, v2: f64, p: f64) -> Self {
        Self { rho, v1, v2, p }
    }
}

impl Conserved {
    pub const ZERO: Conserved = Conserved::new(0.0, 0.0, 0.0, 0.0);

    pub const fn new(rho: f64, m1: f64, m2: f64, e: f64) -> Self {
        Self { rho, m1, m2, e }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.rho, self.m1, self.m2, self.e]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub fn dot(self, w: [f64; 4]) -> f64 {
        self.rho * w[0] + self.m1 * w[1] + self.m2 * w[2] + self.e * w[3]
    }

    /// Exchange the two momentum components (x <-> y mirror).
    pub fn swap_xy(self) -> Self {
        Self::new(self.rho, self.m2, self.m1, self.e)
    }

    pub fn max_abs(self) -> f64 {
        self.rho.abs().max(self.m1.abs()).max(self.m2.abs()).max(self.e.abs())
    }

    pub fn is_finite(self) -> bool {
        self.rho.is_finite() && self.m1.is_finite() && self.m2.is_finite() && self.e.is_finite()
    }

    /// Internal energy density `E - |m|^2 / (2 rho)`.
    pub fn internal_energy(self) -> f64 {
        self.e - 0.5 * (self.m1 * self.m1 + self.m2 * self.m2) / self.rho
    }

    /// Membership in the admissible set: `rho > 0` and positive internal energy.
    pub fn is_admissible(self) -> bool {
        self.rho > 0.0 && self.internal_energy() > 0.0
    }

    pub fn pressure(self, gas: GasModel) -> f64 {
        (gas.gamma - 1.0) * self.internal_energy()
    }
}

pub fn is_admissible(u: Conserved) -> bool {
    u.is_admissible()
}

pub fn to_primitive(u: Conserved, gas: GasModel) -> Result<Primitive> {
    if u.rho == 0.0 {
        return Err(Error::DegenerateState(format!("zero density in {u:?}")));
    }
    let v1 = u.m1 / u.rho;
    let v2 = u.m2 / u.rho;
    let p = (gas.gamma - 1.0) * (u.e - 0.5 * u.rho * (v1 * v1 + v2 * v2));
    Ok(Primitive { rho: u.rho, v1, v2, p })
}

pub fn to_conserved(w: Primitive, gas: GasModel) -> Result<Conserved> {
    if !(w.rho > 0.0) {
        return Err(Error::DegenerateState(format!("non-positive density in {w:?}")));
    }
    let m1 = w.rho * w.v1;
    let m2 = w.rho * w.v2;
    let e = w.p / (gas.gamma - 1.0) + 0.5 * w.rho * (w.v1 * w.v1 + w.v2 * w.v2);
    Ok(Conserved { rho: w.rho, m1, m2, e })
}

/// x-direction flux `(rho v1, rho v1^2 + p, rho v1 v2, (E + p) v1)`.
///
/// Hot path: no degeneracy check, callers guarantee `rho != 0`.
#[inline]
pub fn flux_x_unchecked(u: Conserved, gas: GasModel) -> Conserved {
    let v1 = u.m1 / u.rho;
    let p = (gas.gamma - 1.0) * (u.e - 0.5 * (u.m1 * u.m1 + u.m2 * u.m2) / u.rho);
    Conserved::new(u.m1, u.m1 * v1 + p, u.m2 * v1, (u.e + p) * v1)
}

/// y-direction flux `(rho v2, rho v1 v2, rho v2^2 + p, (E + p) v2)`.
#[inline]
pub fn flux_y_unchecked(u: Conserved, gas: GasModel) -> Conserved {
    let v2 = u.m2 / u.rho;
    let p = (gas.gamma - 1.0) * (u.e - 0.5 * (u.m1 * u.m1 + u.m2 * u.m2) / u.rho);
    Conserved::new(u.m2, u.m1 * v2, u.m2 * v2 + p, (u.e + p) * v2)
}

pub fn flux_x(u: Conserved, gas: GasModel) -> Result<Conserved> {
    if u.rho == 0.0 {
        return Err(Error::DegenerateState(format!("zero density in {u:?}")));
    }
    Ok(flux_x_unchecked(u, gas))
}

pub fn flux_y(u: Conserved, gas: GasModel) -> Result<Conserved> {
    if u.rho == 0.0 {
        return Err(Error::DegenerateState(format!("zero density in {u:?}")));
    }
    Ok(flux_y_unchecked(u, gas))
}

/// `|v| + c`, the bound on the spectral radii of both flux Jacobians.
pub fn local_wave_speed(u: Conserved, gas: GasModel) -> Result<f64> {
    if !u.is_admissible() {
        return Err(Error::DegenerateState(format!("wave speed of inadmissible state {u:?}")));
    }
    Ok(wave_speed_unchecked(u, gas))
}

#[inline]
pub(crate) fn wave_speed_unchecked(u: Conserved, gas: GasModel) -> f64 {
    let v1 = u.m1 / u.rho;
    let v2 = u.m2 / u.rho;
    let p = (gas.gamma - 1.0) * u.internal_energy();
    (v1 * v1 + v2 * v2).sqrt() + (gas.gamma * p / u.rho).sqrt()
}

impl Add for Conserved {
    type Output = Conserved;
    #[inline]
    fn add(self, o: Conserved) -> Conserved {
        Conserved::new(self.rho + o.rho, self.m1 + o.m1, self.m2 + o.m2, self.e + o.e)
    }
}

impl Sub for Conserved {
    type Output = Conserved;
    #[inline]
    fn sub(self, o: Conserved) -> Conserved {
        Conserved::new(self.rho - o.rho, self.m1 - o.m1, self.m2 - o.m2, self.e - o.e)
    }
}

impl Neg for Conserved {
    type Output = Conserved;
    #[inline]
    fn neg(self) -> Conserved {
        Conserved::new(-self.rho, -self.m1, -self.m2, -self.e)
    }
}

impl Mul<Conserved> for f64 {
    type Output = Conserved;
    #[inline]
    fn mul(self, u: Conserved) -> Conserved {
        Conserved::new(self * u.rho, self * u.m1, self * u.m2, self * u.e)
    }
}

impl Mul<f64> for Conserved {
    type Output = Conserved;
    #[inline]
    fn mul(self, s: f64) -> Conserved {
        s * self
    }
}

impl AddAssign for Conserved {
    #[inline]
    fn add_assign(&mut self, o: Conserved) {
        *self = *self + o;
    }
}

impl SubAssign for Conserved {
    #[inline]
    fn sub_assign(&mut self, o: Conserved) {
        *self = *self - o;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_admissible(rng: &mut impl Rng) -> Conserved {
        let w = Primitive::new(
            rng.gen_range(0.01..10.0),
            rng.gen_range(-5.0..5.0),
            rng.gen_range(-5.0..5.0),
            rng.gen_range(0.01..10.0),
        );
        to_conserved(w, GasModel::air()).unwrap()
    }

    #[test]
    fn primitive_of_rest_state() {
        let gas = GasModel::air();
        let w = to_primitive(Conserved::new(1.0, 0.0, 0.0, 1.0 / 0.4), gas).unwrap();
        assert_eq!(w.rho, 1.0);
        assert_eq!((w.v1, w.v2), (0.0, 0.0));
        assert!((w.p - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pressure_from_eos() {
        let w = to_primitive(Conserved::new(1.0, 1.0, 0.0, 3.0), GasModel::air()).unwrap();
        assert!((w.p - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_density_is_degenerate() {
        assert!(matches!(
            to_primitive(Conserved::new(0.0, 1.0, 0.0, 1.0), GasModel::air()),
            Err(Error::DegenerateState(_))
        ));
        assert!(to_conserved(Primitive::new(-1.0, 0.0, 0.0, 1.0), GasModel::air()).is_err());
        assert!(flux_x(Conserved::ZERO, GasModel::air()).is_err());
    }

    #[test]
    fn conserved_of_reference_states() {
        let gas = GasModel::air();
        let u = to_conserved(Primitive::new(1.0, 0.0, 0.0, 1.0), gas).unwrap();
        assert!((u - Conserved::new(1.0, 0.0, 0.0, 2.5)).max_abs() < 1e-15);
        let u = to_conserved(Primitive::new(0.125, 0.0, 0.0, 0.1), gas).unwrap();
        assert!((u.e - 0.25).abs() < 1e-15);

        let (rho, v, p) = (3.857143, 2.629369, 10.33333333333);
        let u = to_conserved(Primitive::new(rho, v, 0.0, p), gas).unwrap();
        let expected = p / 0.4 + 0.5 * rho * v * v;
        assert!((u.e - expected).abs() < 1e-13 * expected);
        assert!((u.e - 39.166669265).abs() < 1e-8);
    }

    #[test]
    fn round_trip_is_identity() {
        let gas = GasModel::air();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let u = random_admissible(&mut rng);
            let back = to_conserved(to_primitive(u, gas).unwrap(), gas).unwrap();
            for (a, b) in u.to_array().iter().zip(back.to_array()) {
                assert!((a - b).abs() <= 1e-14 * u.max_abs(), "{u:?} {back:?}");
            }
        }
    }

    #[test]
    fn fluxes_of_rest_state() {
        let gas = GasModel::air();
        let u = Conserved::new(1.0, 0.0, 0.0, 2.5);
        let f = flux_x(u, gas).unwrap();
        let g = flux_y(u, gas).unwrap();
        assert!((f.m1 - 1.0).abs() < 1e-15 && f.rho == 0.0 && f.m2 == 0.0 && f.e == 0.0);
        assert!((g.m2 - 1.0).abs() < 1e-15 && g.rho == 0.0 && g.m1 == 0.0 && g.e == 0.0);
    }

    #[test]
    fn flux_formulas_term_by_term() {
        let gas = GasModel::air();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let u = random_admissible(&mut rng);
            let w = to_primitive(u, gas).unwrap();
            let f = flux_x(u, gas).unwrap();
            let g = flux_y(u, gas).unwrap();
            let e_tot = w.p / 0.4 + 0.5 * w.rho * (w.v1 * w.v1 + w.v2 * w.v2);
            let fx = [w.rho * w.v1, w.rho * w.v1 * w.v1 + w.p, w.rho * w.v1 * w.v2, (e_tot + w.p) * w.v1];
            let gy = [w.rho * w.v2, w.rho * w.v1 * w.v2, w.rho * w.v2 * w.v2 + w.p, (e_tot + w.p) * w.v2];
            let scale = u.max_abs() * (1.0 + w.v1.abs() + w.v2.abs());
            for k in 0..4 {
                assert!((f.to_array()[k] - fx[k]).abs() < 1e-12 * scale);
                assert!((g.to_array()[k] - gy[k]).abs() < 1e-12 * scale);
            }
        }
    }

    #[test]
    fn flux_swap_symmetry_is_exact() {
        let gas = GasModel::air();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let u = random_admissible(&mut rng);
            assert_eq!(flux_y(u.swap_xy(), gas).unwrap(), flux_x(u, gas).unwrap().swap_xy());
        }
    }

    #[test]
    fn wave_speeds() {
        let gas = GasModel::air();
        let s = local_wave_speed(Conserved::new(1.0, 0.0, 0.0, 2.5), gas).unwrap();
        assert!((s - 1.4f64.sqrt()).abs() < 1e-15);
        assert!((s - 1.183216).abs() < 1e-6);
        let right = to_conserved(Primitive::new(0.125, 0.0, 0.0, 0.1), gas).unwrap();
        assert!((local_wave_speed(right, gas).unwrap() - 1.12f64.sqrt()).abs() < 1e-14);

        let slow = to_conserved(Primitive::new(1.3, 0.7, 0.0, 2.0), gas).unwrap();
        let fast = to_conserved(Primitive::new(1.3, 1.4, 0.0, 2.0), gas).unwrap();
        let diff = local_wave_speed(fast, gas).unwrap() - local_wave_speed(slow, gas).unwrap();
        assert!((diff - 0.7).abs() < 1e-14);

        assert!(local_wave_speed(Conserved::new(1.0, 0.0, 0.0, 0.0), gas).is_err());
    }

    #[test]
    fn admissibility() {
        assert!(is_admissible(Conserved::new(1.0, 0.0, 0.0, 2.5)));
        assert!(!is_admissible(Conserved::new(1.0, 0.0, 0.0, 0.0)));
        assert!(!is_admissible(Conserved::new(-1.0, 0.0, 0.0, 1.0)));
        assert!(!is_admissible(Conserved::new(0.0, 0.0, 0.0, 1.0)));
    }

    #[test]
    fn admissible_set_is_convex() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10_000 {
            let u = random_admissible(&mut rng);
            let w = random_admissible(&mut rng);
            let t: f64 = rng.gen_range(0.0..=1.0);
            assert!((t * u + (1.0 - t) * w).is_admissible());
        }
    }

    #[test]
    fn wave_speed_positive_on_admissible_states() {
        let gas = GasModel::air();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..1000 {
            assert!(local_wave_speed(random_admissible(&mut rng), gas).unwrap() > 0.0);
        }
    }
}
