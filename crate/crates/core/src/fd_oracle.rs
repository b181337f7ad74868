//! Multi-step finite-difference form of the second-order scheme, used as an
//! independent check on the kinetic implementation.
//!
//! Eliminating the kinetic variables gives a five-level recurrence on the
//! conserved field alone. All stencils here wrap periodically.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::euler::{flux_x_unchecked, flux_y_unchecked, local_wave_speed, Conserved, GasModel};
use crate::kinetic::KineticModel;
use crate::mesh::{apply_boundaries, init_distributions, moments, BoundaryPlan, CellField, DistributionField, Grid};

/// Single-step kinetic update with a fixed speed.
pub type Stepper = fn(&DistributionField, &KineticModel, GasModel) -> DistributionField;

/// Six consecutive moment fields produced by `step` from a smooth periodic
/// `n x n` field at constant kinetic speed; returns the history and the speed.
pub fn kinetic_history(step: Stepper, seed: u64, n: usize, gas: GasModel) -> (Vec<CellField<Conserved>>, f64) {
    let u0 = crate::sampling::smooth_field(seed, n, gas);
    let lambda = u0.data.iter().map(|&u| local_wave_speed(u, gas).expect("admissible")).fold(0.0, f64::max);
    let model = KineticModel::new(0.5, 6.0 * lambda).expect("valid model");
    let plan = BoundaryPlan::periodic();
    let grid = Grid::new(n, n, 1.0 / n as f64, (0.0, 0.0)).expect("valid grid");
    let mut field = init_distributions(&u0, grid, &model, gas).expect("admissible field");
    let mut hist = vec![moments(&field)];
    for _ in 0..5 {
        apply_boundaries(&mut field, &plan, 0.0, &model, gas).expect("periodic ghosts");
        field = step(&field, &model, gas);
        hist.push(moments(&field));
    }
    (hist, model.speed)
}

/// Moment matrix mapping the five populations to
/// `(sum, u1 - u2, u3 - u4, u1 + u2, u3 + u4)`.
pub struct MomentMatrix;

impl MomentMatrix {
    pub const Q: [[f64; 5]; 5] = [
        [1.0, 1.0, 1.0, 1.0, 1.0],
        [1.0, -1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, -1.0, 0.0],
        [1.0, 1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 1.0, 0.0],
    ];

    pub const Q_INV: [[f64; 5]; 5] = [
        [0.0, 0.5, 0.0, 0.5, 0.0],
        [0.0, -0.5, 0.0, 0.5, 0.0],
        [0.0, 0.0, 0.5, 0.0, 0.5],
        [0.0, 0.0, -0.5, 0.0, 0.5],
        [1.0, 0.0, 0.0, -1.0, -1.0],
    ];

    pub fn apply(m: &[[f64; 5]; 5], v: [Conserved; 5]) -> [Conserved; 5] {
        std::array::from_fn(|r| (0..5).fold(Conserved::ZERO, |acc, c| acc + m[r][c] * v[c]))
    }

    /// Equilibrium moments `(u, f/a, g/a, (1-alpha)u/2, (1-alpha)u/2)`.
    pub fn equilibrium_moments(u: Conserved, a: f64, alpha: f64, gas: GasModel) -> [Conserved; 5] {
        let h = 0.5 * (1.0 - alpha) * u;
        [u, (1.0 / a) * flux_x_unchecked(u, gas), (1.0 / a) * flux_y_unchecked(u, gas), h, h]
    }
}

/// Periodic stencil operators on cell fields.
pub mod ops {
    use super::*;

    pub fn shift(u: &CellField<Conserved>, di: isize, dj: isize) -> CellField<Conserved> {
        CellField::from_fn(u.nx, u.ny, |i, j| u.wrapped(i as isize + di, j as isize + dj))
    }

    pub fn lin(terms: &[(f64, &CellField<Conserved>)]) -> CellField<Conserved> {
        let (nx, ny) = (terms[0].1.nx, terms[0].1.ny);
        let mut data = vec![Conserved::ZERO; nx * ny];
        for (c, f) in terms {
            for (d, v) in data.iter_mut().zip(&f.data) {
                *d += *c * *v;
            }
        }
        CellField { nx, ny, data }
    }

    /// Centred difference in x: `(u_{i+1} - u_{i-1}) / 2`.
    pub fn dx(u: &CellField<Conserved>) -> CellField<Conserved> {
        lin(&[(0.5, &shift(u, 1, 0)), (-0.5, &shift(u, -1, 0))])
    }

    pub fn dy(u: &CellField<Conserved>) -> CellField<Conserved> {
        lin(&[(0.5, &shift(u, 0, 1)), (-0.5, &shift(u, 0, -1))])
    }

    pub fn ax(u: &CellField<Conserved>) -> CellField<Conserved> {
        lin(&[(0.5, &shift(u, 1, 0)), (0.5, &shift(u, -1, 0))])
    }

    pub fn ay(u: &CellField<Conserved>) -> CellField<Conserved> {
        lin(&[(0.5, &shift(u, 0, 1)), (0.5, &shift(u, 0, -1))])
    }

    /// Average of the four edge neighbours.
    pub fn aa(u: &CellField<Conserved>) -> CellField<Conserved> {
        lin(&[
            (0.25, &shift(u, 1, 0)),
            (0.25, &shift(u, -1, 0)),
            (0.25, &shift(u, 0, 1)),
            (0.25, &shift(u, 0, -1)),
        ])
    }

    /// Average of the four diagonal neighbours.
    pub fn ad(u: &CellField<Conserved>) -> CellField<Conserved> {
        lin(&[
            (0.25, &shift(u, 1, 1)),
            (0.25, &shift(u, -1, 1)),
            (0.25, &shift(u, 1, -1)),
            (0.25, &shift(u, -1, -1)),
        ])
    }

    /// `D_x` averaged over the three rows `j-1, j, j+1`.
    pub fn dx_bar(u: &CellField<Conserved>) -> CellField<Conserved> {
        let d = dx(u);
        lin(&[(1.0 / 3.0, &shift(&d, 0, -1)), (1.0 / 3.0, &d), (1.0 / 3.0, &shift(&d, 0, 1))])
    }

    pub fn dy_bar(u: &CellField<Conserved>) -> CellField<Conserved> {
        let d = dy(u);
        lin(&[(1.0 / 3.0, &shift(&d, -1, 0)), (1.0 / 3.0, &d), (1.0 / 3.0, &shift(&d, 1, 0))])
    }
}

/// Left-hand side of the five-level recurrence evaluated on
/// `history = [u^n, ..., u^{n+5}]` generated with constant kinetic speed `a`.
pub fn multistep_residual(
    history: &[CellField<Conserved>],
    plan: &BoundaryPlan,
    a: f64,
    alpha: f64,
    gas: GasModel,
) -> Result<CellField<Conserved>> {
    use ops::*;
    if history.len() != 6 {
        return Err(Error::Config(format!("need six consecutive fields, got {}", history.len())));
    }
    if !plan.is_fully_periodic() {
        return Err(Error::Unsupported("the multi-step oracle needs a fully periodic domain".into()));
    }
    let (nx, ny) = (history[0].nx, history[0].ny);
    if nx < 5 || ny < 5 || history.iter().any(|h| h.nx != nx || h.ny != ny) {
        return Err(Error::Config(format!("history must be at least 5x5 and uniformly sized, got {nx}x{ny}")));
    }
    let u = history;
    let f: Vec<_> = u.iter().map(|h| h.map(|v| flux_x_unchecked(v, gas))).collect();
    let g: Vec<_> = u.iter().map(|h| h.map(|v| flux_y_unchecked(v, gas))).collect();

    let d41 = lin(&[(1.0, &u[4]), (-1.0, &u[1])]);
    let d32 = lin(&[(1.0, &u[3]), (-1.0, &u[2])]);
    let (aa41, aa32, ad32) = (aa(&d41), aa(&d32), ad(&d32));
    let s = 2.0 * (1.0 - alpha);
    let k = 2.0 / a;

    Ok(lin(&[
        (1.0, &u[5]),
        (-1.0, &u[0]),
        // (4A_a - 1)(u4 - u1)
        (4.0, &aa41),
        (-1.0, &d41),
        // (4A_d - 4A_a + 2)(u3 - u2)
        (4.0, &ad32),
        (-4.0, &aa32),
        (2.0, &d32),
        // flux terms
        (k, &dx(&f[4])),
        (3.0 * k, &dx_bar(&f[3])),
        (3.0 * k, &dx_bar(&f[2])),
        (k, &dx(&f[1])),
        (k, &dy(&g[4])),
        (3.0 * k, &dy_bar(&g[3])),
        (3.0 * k, &dy_bar(&g[2])),
        (k, &dy(&g[1])),
        // 2(1 - alpha)[(1 - A_a)(u4 - u1) + (3A_a - 2A_d - 1)(u3 - u2)]
        (s, &d41),
        (-s, &aa41),
        (3.0 * s, &aa32),
        (-2.0 * s, &ad32),
        (-s, &d32),
    ]))
}

/// `max |residual| / max |u|` over the history.
pub fn relative_residual(history: &[CellField<Conserved>], residual: &CellField<Conserved>) -> f64 {
    let scale = history.iter().flat_map(|h| h.data.iter()).map(|u| u.max_abs()).fold(0.0, f64::max);
    residual.data.iter().map(|r| r.max_abs()).fold(0.0, f64::max) / scale
}

/// Dense shift operator `u_{i,j} -> u_{i+di, j+dj}` on an `n x n` periodic
/// grid with row-major cell numbering.
fn shift_matrix(n: usize, di: isize, dj: isize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n * n, n * n);
    for j in 0..n {
        for i in 0..n {
            let si = (i as isize + di).rem_euclid(n as isize) as usize;
            let sj = (j as isize + dj).rem_euclid(n as isize) as usize;
            m[(j * n + i, sj * n + si)] += 1.0;
        }
    }
    m
}

fn kron5(block: &[[f64; 5]; 5], id: &DMatrix<f64>) -> DMatrix<f64> {
    let b = DMatrix::from_fn(5, 5, |r, c| block[r][c]);
    b.kronecker(id)
}

/// The one-step moment propagator `A = -Q T Q^{-1}` on an `n x n` periodic
/// grid (one conserved component).
pub fn moment_propagator(n: usize) -> DMatrix<f64> {
    let c = n * n;
    let id = DMatrix::<f64>::identity(c, c);
    let mut t = DMatrix::zeros(5 * c, 5 * c);
    let blocks = [shift_matrix(n, -1, 0), shift_matrix(n, 1, 0), shift_matrix(n, 0, -1), shift_matrix(n, 0, 1), id.clone()];
    for (k, b) in blocks.iter().enumerate() {
        t.view_mut((k * c, k * c), (c, c)).copy_from(b);
    }
    -(kron5(&MomentMatrix::Q, &id) * t * kron5(&MomentMatrix::Q_INV, &id))
}

/// The block form `[-1, D_x, D_y, 1 - A_x, 1 - A_y; ...]` of the propagator
/// built directly from the stencil operators.
pub fn moment_propagator_blocks(n: usize) -> DMatrix<f64> {
    let c = n * n;
    let id = DMatrix::<f64>::identity(c, c);
    let (xp, xm, yp, ym) = (shift_matrix(n, 1, 0), shift_matrix(n, -1, 0), shift_matrix(n, 0, 1), shift_matrix(n, 0, -1));
    let dx = (&xp - &xm) * 0.5;
    let dy = (&yp - &ym) * 0.5;
    let ax = (&xp + &xm) * 0.5;
    let ay = (&yp + &ym) * 0.5;
    let z = DMatrix::zeros(c, c);
    let rows: [[DMatrix<f64>; 5]; 5] = [
        [-&id, dx.clone(), dy.clone(), &id - &ax, &id - &ay],
        [z.clone(), -&ax, z.clone(), dx.clone(), z.clone()],
        [z.clone(), z.clone(), -&ay, z.clone(), dy.clone()],
        [z.clone(), dx, z.clone(), -&ax, z.clone()],
        [z.clone(), z.clone(), dy, z, -ay],
    ];
    let mut a = DMatrix::zeros(5 * c, 5 * c);
    for (r, row) in rows.iter().enumerate() {
        for (col, b) in row.iter().enumerate() {
            a.view_mut((r * c, col * c), (c, c)).copy_from(b);
        }
    }
    a
}

/// Spectral norm of `P(A) = (A + 1)(A^4 + 4A_a A^3 + (2 + 4A_d)A^2 + 4A_a A + 1)`
/// on an `n x n` periodic grid, with `A_a`, `A_d` acting blockwise.
pub fn characteristic_poly_norm(n: usize) -> Result<f64> {
    if n == 0 || n > 8 {
        return Err(Error::Unsupported(format!("dense characteristic check limited to 1..=8 cells per side, got {n}")));
    }
    let c = n * n;
    let id = DMatrix::<f64>::identity(5 * c, 5 * c);
    let edge = (shift_matrix(n, 1, 0) + shift_matrix(n, -1, 0) + shift_matrix(n, 0, 1) + shift_matrix(n, 0, -1)) * 0.25;
    let diag = (shift_matrix(n, 1, 1) + shift_matrix(n, -1, 1) + shift_matrix(n, 1, -1) + shift_matrix(n, -1, -1)) * 0.25;
    let five = DMatrix::<f64>::identity(5, 5);
    let aa = five.kronecker(&edge);
    let ad = five.kronecker(&diag);
    let a = moment_propagator(n);
    let a2 = &a * &a;
    let a3 = &a2 * &a;
    let a4 = &a3 * &a;
    let quartic = &a4 + (&aa * 4.0) * &a3 + (&id * 2.0 + &ad * 4.0) * &a2 + (&aa * 4.0) * &a + &id;
    let p = (&a + &id) * quartic;
    Ok(p.svd(false, false).singular_values.max())
}

/// True when `P(A)` vanishes to `1e-12` on an `n x n` grid.
pub fn characteristic_poly_check(n: usize) -> Result<bool> {
    Ok(characteristic_poly_norm(n)? <= 1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::euler::Primitive;
    use crate::mesh::SideCondition;
    use crate::solver::{first_order_step, second_order_step};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn q_inverse_is_exact() {
        for r in 0..5 {
            for c in 0..5 {
                let v: f64 = (0..5).map(|k| MomentMatrix::Q[r][k] * MomentMatrix::Q_INV[k][c]).sum();
                assert_eq!(v, if r == c { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn equilibrium_moments_match_maxwellians() {
        let gas = GasModel::air();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..200 {
            let u = crate::euler::to_conserved(
                Primitive::new(rng.gen_range(0.1..3.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(0.1..3.0)),
                gas,
            )
            .unwrap();
            let model = KineticModel::new(rng.gen_range(0.5..0.9), rng.gen_range(5.0..20.0)).unwrap();
            let eq = model.equilibria(u, gas);
            let m = MomentMatrix::apply(&MomentMatrix::Q, eq);
            let expect = MomentMatrix::equilibrium_moments(u, model.speed, model.alpha, gas);
            for k in 0..5 {
                assert!((m[k] - expect[k]).max_abs() <= 1e-14 * u.max_abs().max(1.0) * 10.0);
            }
        }
    }

    fn history(step: Stepper, seed: u64) -> (Vec<CellField<Conserved>>, f64) {
        kinetic_history(step, seed, 16, GasModel::air())
    }

    #[test]
    fn second_order_histories_satisfy_recurrence() {
        for seed in 0..3 {
            let (h, a) = history(second_order_step, seed);
            let r = multistep_residual(&h, &BoundaryPlan::periodic(), a, 0.5, GasModel::air()).unwrap();
            let rel = relative_residual(&h, &r);
            assert!(rel <= 1e-11, "residual {rel}");
        }
    }

    #[test]
    fn first_order_histories_violate_recurrence() {
        let (h, a) = history(first_order_step, 0);
        let r = multistep_residual(&h, &BoundaryPlan::periodic(), a, 0.5, GasModel::air()).unwrap();
        assert!(relative_residual(&h, &r) > 1e-6);
    }

    #[test]
    fn constant_history_has_zero_residual() {
        let u = CellField::from_fn(6, 6, |_, _| Conserved::new(1.0, 0.2, 0.1, 3.0));
        let h = vec![u; 6];
        let r = multistep_residual(&h, &BoundaryPlan::periodic(), 3.0, 0.5, GasModel::air()).unwrap();
        assert!(r.data.iter().all(|v| v.max_abs() < 1e-15));
    }

    #[test]
    fn non_periodic_input_is_rejected() {
        let u = CellField::from_fn(6, 6, |_, _| Conserved::new(1.0, 0.0, 0.0, 2.5));
        let h = vec![u; 6];
        let plan = BoundaryPlan::strip(SideCondition::ZeroGradient);
        assert!(multistep_residual(&h, &plan, 3.0, 0.5, GasModel::air()).is_err());
        assert!(multistep_residual(&h[..5], &BoundaryPlan::periodic(), 3.0, 0.5, GasModel::air()).is_err());
    }

    #[test]
    fn propagator_block_form() {
        for n in [1, 3, 4] {
            let a = moment_propagator(n);
            let b = moment_propagator_blocks(n);
            assert!((a - b).amax() < 1e-15);
        }
    }

    #[test]
    fn single_cell_propagator_is_minus_identity() {
        let a = moment_propagator(1);
        assert!((a + DMatrix::<f64>::identity(5, 5)).amax() == 0.0);
        assert!(characteristic_poly_check(1).unwrap());
    }

    #[test]
    fn characteristic_polynomial_annihilates_propagator() {
        for n in [2, 3, 4, 5] {
            let norm = characteristic_poly_norm(n).unwrap();
            assert!(norm <= 1e-12, "n = {n}: {norm}");
        }
        assert!(characteristic_poly_check(9).is_err());
    }
}
