//! Exact solutions: translated entropy wave, one-dimensional Riemann
//! problem, and the gamma = 3 isentropic wave.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::euler::Primitive;

/// Entropy wave `(1 + 0.1 sin 2pi(x + y), 1, 1, 1)` advected with unit
/// velocity in both directions on the unit torus.
pub fn exact_entropy_wave(x: f64, y: f64, t: f64) -> Primitive {
    let xs = (x - t).rem_euclid(1.0);
    let ys = (y - t).rem_euclid(1.0);
    Primitive::new(1.0 + 0.1 * (2.0 * PI * (xs + ys)).sin(), 1.0, 1.0, 1.0)
}

/// Exact solution of the planar Riemann problem for an ideal gas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiemannSolution {
    pub left: Primitive,
    pub right: Primitive,
    pub gamma: f64,
    pub p_star: f64,
    pub u_star: f64,
}

fn sound(w: Primitive, gamma: f64) -> f64 {
    (gamma * w.p / w.rho).sqrt()
}

/// Pressure function of one side and its derivative.
fn pressure_fn(p: f64, w: Primitive, gamma: f64) -> (f64, f64) {
    let c = sound(w, gamma);
    if p > w.p {
        let a = 2.0 / ((gamma + 1.0) * w.rho);
        let b = (gamma - 1.0) / (gamma + 1.0) * w.p;
        let q = (a / (p + b)).sqrt();
        ((p - w.p) * q, q * (1.0 - 0.5 * (p - w.p) / (p + b)))
    } else {
        let e = (gamma - 1.0) / (2.0 * gamma);
        let r = p / w.p;
        (2.0 * c / (gamma - 1.0) * (r.powf(e) - 1.0), r.powf(-(gamma + 1.0) / (2.0 * gamma)) / (w.rho * c))
    }
}

impl RiemannSolution {
    pub fn new(left: Primitive, right: Primitive, gamma: f64) -> Result<Self> {
        for w in [left, right] {
            if !(w.rho > 0.0 && w.p > 0.0) {
                return Err(Error::Config(format!("Riemann data must be admissible, got {w:?}")));
            }
        }
        let (cl, cr) = (sound(left, gamma), sound(right, gamma));
        let du = right.v1 - left.v1;
        if 2.0 / (gamma - 1.0) * (cl + cr) <= du {
            return Err(Error::Unsupported("Riemann data generate vacuum".into()));
        }
        // two-rarefaction guess, always positive
        let z = (gamma - 1.0) / (2.0 * gamma);
        let num = cl + cr - 0.5 * (gamma - 1.0) * du;
        let den = cl / left.p.powf(z) + cr / right.p.powf(z);
        let mut p = (num / den).powf(1.0 / z);
        for _ in 0..200 {
            let (fl, dl) = pressure_fn(p, left, gamma);
            let (fr, dr) = pressure_fn(p, right, gamma);
            let step = (fl + fr + du) / (dl + dr);
            let next = if p - step > 0.0 { p - step } else { 0.1 * p };
            let change = (next - p).abs() / (0.5 * (next + p));
            p = next;
            if change < 1e-14 {
                break;
            }
        }
        let (fl, _) = pressure_fn(p, left, gamma);
        let (fr, _) = pressure_fn(p, right, gamma);
        let residual = fl + fr + du;
        if !(residual.abs() <= 1e-10 * (cl + cr + du.abs())) {
            return Err(Error::DegenerateState(format!("star-pressure iteration did not converge (residual {residual})")));
        }
        let u_star = 0.5 * (left.v1 + right.v1) + 0.5 * (fr - fl);
        Ok(Self { left, right, gamma, p_star: p, u_star })
    }

    /// Star-region density on either side of the contact.
    pub fn star_densities(&self) -> (f64, f64) {
        let g = self.gamma;
        let side = |w: Primitive| {
            let r = self.p_star / w.p;
            if r > 1.0 {
                let k = (g - 1.0) / (g + 1.0);
                w.rho * (r + k) / (k * r + 1.0)
            } else {
                w.rho * r.powf(1.0 / g)
            }
        };
        (side(self.left), side(self.right))
    }

    /// Shock speeds `(left, right)`; `None` for rarefactions.
    pub fn shock_speeds(&self) -> (Option<f64>, Option<f64>) {
        let g = self.gamma;
        let speed = |w: Primitive, sign: f64| {
            let r = self.p_star / w.p;
            (r > 1.0).then(|| w.v1 + sign * sound(w, g) * ((g + 1.0) / (2.0 * g) * r + (g - 1.0) / (2.0 * g)).sqrt())
        };
        (speed(self.left, -1.0), speed(self.right, 1.0))
    }

    /// Solution at similarity coordinate `xi = (x - x0) / t`.
    pub fn sample(&self, xi: f64) -> Primitive {
        let g = self.gamma;
        let (rl, rr) = self.star_densities();
        let (sl, sr) = self.shock_speeds();
        if xi <= self.u_star {
            let w = self.left;
            let c = sound(w, g);
            match sl {
                Some(s) => {
                    if xi <= s {
                        w
                    } else {
                        Primitive::new(rl, self.u_star, w.v2, self.p_star)
                    }
                }
                None => {
                    let c_star = c * (self.p_star / w.p).powf((g - 1.0) / (2.0 * g));
                    if xi <= w.v1 - c {
                        w
                    } else if xi >= self.u_star - c_star {
                        Primitive::new(rl, self.u_star, w.v2, self.p_star)
                    } else {
                        let k = 2.0 / (g + 1.0) + (g - 1.0) / ((g + 1.0) * c) * (w.v1 - xi);
                        let rho = w.rho * k.powf(2.0 / (g - 1.0));
                        let v = 2.0 / (g + 1.0) * (c + 0.5 * (g - 1.0) * w.v1 + xi);
                        Primitive::new(rho, v, w.v2, w.p * k.powf(2.0 * g / (g - 1.0)))
                    }
                }
            }
        } else {
            let w = self.right;
            let c = sound(w, g);
            match sr {
                Some(s) => {
                    if xi >= s {
                        w
                    } else {
                        Primitive::new(rr, self.u_star, w.v2, self.p_star)
                    }
                }
                None => {
                    let c_star = c * (self.p_star / w.p).powf((g - 1.0) / (2.0 * g));
                    if xi >= w.v1 + c {
                        w
                    } else if xi <= self.u_star + c_star {
                        Primitive::new(rr, self.u_star, w.v2, self.p_star)
                    } else {
                        let k = 2.0 / (g + 1.0) - (g - 1.0) / ((g + 1.0) * c) * (w.v1 - xi);
                        let rho = w.rho * k.powf(2.0 / (g - 1.0));
                        let v = 2.0 / (g + 1.0) * (-c + 0.5 * (g - 1.0) * w.v1 + xi);
                        Primitive::new(rho, v, w.v2, w.p * k.powf(2.0 * g / (g - 1.0)))
                    }
                }
            }
        }
    }
}

/// Exact Riemann solution at `xi = x / t`.
pub fn exact_riemann_1d(left: Primitive, right: Primitive, gamma: f64, xi: f64) -> Result<Primitive> {
    Ok(RiemannSolution::new(left, right, gamma)?.sample(xi))
}

/// Time at which characteristics of the isentropic wave first cross.
pub fn isentropic_breaking_time(amp: f64) -> f64 {
    1.0 / (3f64.sqrt() * amp * PI)
}

/// Foot of the Burgers characteristic through `(x, t)` for data `w0`.
fn burgers_foot(x: f64, t: f64, w0: impl Fn(f64) -> (f64, f64)) -> f64 {
    let mut x0 = x - w0(x).0 * t;
    for _ in 0..100 {
        let (w, dw) = w0(x0);
        let r = x0 + w * t - x;
        let step = r / (1.0 + dw * t);
        x0 -= step;
        if step.abs() <= 1e-15 * (1.0 + x0.abs()) {
            break;
        }
    }
    x0
}

/// Isentropic wave `(1 + amp sin(pi x), 0, rho^3)` with gamma = 3: both
/// Riemann invariants `v +- c` are Burgers solutions.
pub fn exact_isentropic_wave(x: f64, t: f64, amp: f64) -> Result<Primitive> {
    if t >= isentropic_breaking_time(amp) {
        return Err(Error::Unsupported(format!(
            "isentropic wave breaks at t = {}, requested t = {t}",
            isentropic_breaking_time(amp)
        )));
    }
    let s3 = 3f64.sqrt();
    let plus = |x0: f64| (s3 * (1.0 + amp * (PI * x0).sin()), s3 * amp * PI * (PI * x0).cos());
    let minus = |x0: f64| (-s3 * (1.0 + amp * (PI * x0).sin()), -s3 * amp * PI * (PI * x0).cos());
    let wp = plus(burgers_foot(x, t, plus)).0;
    let wm = minus(burgers_foot(x, t, minus)).0;
    let v = 0.5 * (wp + wm);
    let c = 0.5 * (wp - wm);
    let rho = c / s3;
    Ok(Primitive::new(rho, v, 0.0, rho * rho * rho))
}
