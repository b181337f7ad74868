//! Seeded random states and fields for property checks.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::euler::{local_wave_speed, to_conserved, Conserved, GasModel, Primitive};
use crate::kinetic::KineticModel;
use crate::mesh::{apply_boundaries, init_distributions, BoundaryPlan, CellField, DistributionField, Grid};

/// Deterministic generator used by every check.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Admissible state with density and pressure in `[lo, hi)` and velocity
/// components in `[-v, v)`.
pub fn admissible_state(rng: &mut impl Rng, lo: f64, hi: f64, v: f64, gas: GasModel) -> Conserved {
    let w = Primitive::new(rng.gen_range(lo..hi), rng.gen_range(-v..v), rng.gen_range(-v..v), rng.gen_range(lo..hi));
    to_conserved(w, gas).expect("sampled state is admissible")
}

/// Random admissible `n x n` periodic field at the critical kinetic speed,
/// with the moving populations scaled by `1 + perturb * U(-1, 1)` so the
/// field is away from equilibrium. Ghost layers are filled.
pub fn random_field(seed: u64, n: usize, perturb: f64, gas: GasModel) -> (DistributionField, KineticModel) {
    let grid = Grid::new(n, n, 1.0 / n as f64, (0.0, 0.0)).expect("valid grid");
    let mut rng = rng(seed);
    let u0 = CellField::from_primitive(&grid, gas, |_, _| {
        Primitive::new(rng.gen_range(0.2..2.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(0.2..2.0))
    })
    .expect("sampled field is admissible");
    let lambda = u0.data.iter().map(|&u| local_wave_speed(u, gas).expect("admissible")).fold(0.0, f64::max);
    let model = KineticModel::new(0.5, 4.0 * lambda).expect("valid model");
    let mut field = init_distributions(&u0, grid, &model, gas).expect("admissible field");
    for wave in field.waves.iter_mut() {
        for v in wave.iter_mut() {
            *v = *v * (1.0 + perturb * rng.gen_range(-1.0..1.0));
        }
    }
    apply_boundaries(&mut field, &BoundaryPlan::periodic(), 0.0, &model, gas).expect("periodic ghosts");
    (field, model)
}

/// Smooth periodic field on the unit square with random phases.
pub fn smooth_field(seed: u64, n: usize, gas: GasModel) -> CellField<Conserved> {
    let grid = Grid::new(n, n, 1.0 / n as f64, (0.0, 0.0)).expect("valid grid");
    let mut rng = rng(seed);
    let (ph1, ph2): (f64, f64) = (rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.0..2.0 * PI));
    CellField::from_primitive(&grid, gas, |x, y| {
        Primitive::new(
            1.0 + 0.2 * (2.0 * PI * x + ph1).sin() * (2.0 * PI * y).cos(),
            0.3 * (2.0 * PI * y + ph2).sin(),
            -0.2 * (2.0 * PI * x).cos(),
            1.0 + 0.1 * (2.0 * PI * (x - y)).sin(),
        )
    })
    .expect("smooth field is admissible")
}
