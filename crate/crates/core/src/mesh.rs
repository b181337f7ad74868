//! Cartesian grid, distribution storage, boundary conditions and moment
//! reconstruction.
//!
//! Every field lives on a ghost-padded array. Cell `(i, j)` with
//! `0 <= i < nx`, `0 <= j < ny` is interior; ghost cells carry indices down
//! to `-ghost` and up to `nx - 1 + ghost`. Rows are contiguous in `i`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::euler::{to_conserved, Conserved, GasModel, Primitive};
use crate::kinetic::KineticModel;

/// Default ghost width. Density bounds of the first ghost ring need the
/// intermediate states on its outer faces, hence two layers.
pub const DEFAULT_GHOST: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CellIndex {
    pub i: i64,
    pub j: i64,
}

impl fmt::Display for CellIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.i, self.j)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    /// Square cell size.
    pub dx: f64,
    /// Lower-left corner of the interior domain.
    pub origin: (f64, f64),
    pub ghost: usize,
}

impl Grid {
    pub fn new(nx: usize, ny: usize, dx: f64, origin: (f64, f64)) -> Result<Self> {
        Self::with_ghost(nx, ny, dx, origin, DEFAULT_GHOST)
    }

    pub fn with_ghost(nx: usize, ny: usize, dx: f64, origin: (f64, f64), ghost: usize) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::Config(format!("mesh must be non-empty, got {nx}x{ny}")));
        }
        if !(dx > 0.0) || !dx.is_finite() {
            return Err(Error::Config(format!("cell size must be positive, got {dx}")));
        }
        if ghost < 1 {
            return Err(Error::Config("ghost width must be at least 1".into()));
        }
        Ok(Self { nx, ny, dx, origin, ghost })
    }

    /// Padded row length.
    #[inline]
    pub fn px(&self) -> usize {
        self.nx + 2 * self.ghost
    }

    #[inline]
    pub fn py(&self) -> usize {
        self.ny + 2 * self.ghost
    }

    #[inline]
    pub fn padded_len(&self) -> usize {
        self.px() * self.py()
    }

    #[inline]
    pub fn cells(&self) -> usize {
        self.nx * self.ny
    }

    /// Flat padded index of cell `(i, j)`.
    #[inline]
    pub fn idx(&self, i: isize, j: isize) -> usize {
        let g = self.ghost as isize;
        debug_assert!(i >= -g && i < self.nx as isize + g);
        debug_assert!(j >= -g && j < self.ny as isize + g);
        ((j + g) as usize) * self.px() + (i + g) as usize
    }

    /// Inverse of [`Grid::idx`].
    #[inline]
    pub fn coords(&self, p: usize) -> (isize, isize) {
        let g = self.ghost as isize;
        ((p % self.px()) as isize - g, (p / self.px()) as isize - g)
    }

    /// Cell-centre coordinates (valid for ghost cells too).
    #[inline]
    pub fn center(&self, i: isize, j: isize) -> (f64, f64) {
        (
            self.origin.0 + (i as f64 + 0.5) * self.dx,
            self.origin.1 + (j as f64 + 0.5) * self.dx,
        )
    }

    pub fn is_interior(&self, i: isize, j: isize) -> bool {
        i >= 0 && j >= 0 && (i as usize) < self.nx && (j as usize) < self.ny
    }

    pub fn extent(&self) -> (f64, f64) {
        (self.nx as f64 * self.dx, self.ny as f64 * self.dx)
    }
}

/// Interior-only cell data in row-major order (`i` fastest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellField<T> {
    pub nx: usize,
    pub ny: usize,
    pub data: Vec<T>,
}

impl<T: Copy> CellField<T> {
    pub fn from_fn(nx: usize, ny: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                data.push(f(i, j));
            }
        }
        Self { nx, ny, data }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[j * self.nx + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[j * self.nx + i] = v;
    }

    /// Periodic access with wrap-around in both directions.
    #[inline]
    pub fn wrapped(&self, i: isize, j: isize) -> T {
        let i = i.rem_euclid(self.nx as isize) as usize;
        let j = j.rem_euclid(self.ny as isize) as usize;
        self.get(i, j)
    }

    pub fn map<U: Copy>(&self, f: impl Fn(T) -> U) -> CellField<U> {
        CellField { nx: self.nx, ny: self.ny, data: self.data.iter().map(|&v| f(v)).collect() }
    }
}

impl CellField<Conserved> {
    pub fn sum(&self) -> Conserved {
        self.data.iter().fold(Conserved::ZERO, |a, &b| a + b)
    }

    pub fn from_primitive(grid: &Grid, gas: GasModel, mut f: impl FnMut(f64, f64) -> Primitive) -> Result<Self> {
        let mut data = Vec::with_capacity(grid.cells());
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let (x, y) = grid.center(i as isize, j as isize);
                data.push(to_conserved(f(x, y), gas)?);
            }
        }
        Ok(Self { nx: grid.nx, ny: grid.ny, data })
    }
}

/// The five D2Q5 populations over the padded grid.
///
/// The four moving populations are stored explicitly together with the
/// zeroth moment; the rest population is `total - (u1 + u2 + u3 + u4)`.
/// This is exactly the information the blended update reads and writes, so
/// neither the rest population nor its equilibrium is ever materialised.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionField {
    pub grid: Grid,
    /// Populations 1..=4, indexed `waves[k - 1][padded index]`.
    pub waves: [Vec<Conserved>; 4],
    /// Zeroth moment `sum_k u_k`.
    pub total: Vec<Conserved>,
}

impl DistributionField {
    pub fn zeros(grid: Grid) -> Self {
        let n = grid.padded_len();
        Self {
            grid,
            waves: std::array::from_fn(|_| vec![Conserved::ZERO; n]),
            total: vec![Conserved::ZERO; n],
        }
    }

    /// Builds a field from explicit per-wave interior values.
    pub fn from_components(grid: Grid, components: [&CellField<Conserved>; 5]) -> Self {
        let mut field = Self::zeros(grid);
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let p = grid.idx(i as isize, j as isize);
                let mut sum = Conserved::ZERO;
                for (k, c) in components.iter().enumerate() {
                    let v = c.get(i, j);
                    if k < 4 {
                        field.waves[k][p] = v;
                    }
                    sum += v;
                }
                field.total[p] = sum;
            }
        }
        field
    }

    /// Population `k` (1-based) at padded index `p`.
    #[inline]
    pub fn component(&self, k: usize, p: usize) -> Conserved {
        if k == 5 {
            self.rest(p)
        } else {
            self.waves[k - 1][p]
        }
    }

    #[inline]
    pub fn rest(&self, p: usize) -> Conserved {
        self.total[p] - (((self.waves[0][p] + self.waves[1][p]) + self.waves[2][p]) + self.waves[3][p])
    }

    pub fn component_field(&self, k: usize) -> CellField<Conserved> {
        let g = self.grid;
        CellField::from_fn(g.nx, g.ny, |i, j| self.component(k, g.idx(i as isize, j as isize)))
    }

    /// Conserved value at interior cell `(i, j)`.
    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Conserved {
        self.total[self.grid.idx(i as isize, j as isize)]
    }

    pub fn interior_indices(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        let g = self.grid;
        (0..g.ny).flat_map(move |j| (0..g.nx).map(move |i| (i, j, g.idx(i as isize, j as isize))))
    }
}

pub fn init_distributions(
    u0: &CellField<Conserved>,
    grid: Grid,
    model: &KineticModel,
    gas: GasModel,
) -> Result<DistributionField> {
    if u0.nx != grid.nx || u0.ny != grid.ny {
        return Err(Error::Config(format!(
            "initial field is {}x{} but grid is {}x{}",
            u0.nx, u0.ny, grid.nx, grid.ny
        )));
    }
    let mut field = DistributionField::zeros(grid);
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let u = u0.get(i, j);
            if !u.is_admissible() {
                return Err(Error::Config(format!("initial state at ({i}, {j}) is not admissible: {u:?}")));
            }
            let p = grid.idx(i as isize, j as isize);
            let eq = model.moving_equilibria(u, gas);
            for k in 0..4 {
                field.waves[k][p] = eq[k];
            }
            field.total[p] = u;
        }
    }
    Ok(field)
}

/// Zeroth moment over the interior.
pub fn moments(field: &DistributionField) -> CellField<Conserved> {
    let g = field.grid;
    CellField::from_fn(g.nx, g.ny, |i, j| field.total[g.idx(i as isize, j as isize)])
}

/// Boundary state as a function of `(x, y, t)`.
pub type StateFn = Arc<dyn Fn(f64, f64, f64) -> Primitive + Send + Sync>;

#[derive(Clone)]
pub enum SideCondition {
    Periodic,
    ZeroGradient,
    /// Ghost populations set to the Maxwellians of a prescribed state.
    Dirichlet(StateFn),
    /// Specular wall: normal momentum and the normal wave pair are mirrored.
    ReflectiveWall,
    /// Different conditions on either side of `at` along the boundary
    /// coordinate (`y` for west/east, `x` for south/north).
    Split {
        at: f64,
        below: Box<SideCondition>,
        above: Box<SideCondition>,
    },
}

impl fmt::Debug for SideCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SideCondition::Periodic => write!(f, "Periodic"),
            SideCondition::ZeroGradient => write!(f, "ZeroGradient"),
            SideCondition::Dirichlet(_) => write!(f, "Dirichlet(..)"),
            SideCondition::ReflectiveWall => write!(f, "ReflectiveWall"),
            SideCondition::Split { at, below, above } => {
                write!(f, "Split {{ at: {at}, below: {below:?}, above: {above:?} }}")
            }
        }
    }
}

impl SideCondition {
    pub fn dirichlet(f: impl Fn(f64, f64, f64) -> Primitive + Send + Sync + 'static) -> Self {
        SideCondition::Dirichlet(Arc::new(f))
    }

    fn is_periodic(&self) -> bool {
        matches!(self, SideCondition::Periodic)
    }

    fn resolve(&self, coord: f64) -> &SideCondition {
        match self {
            SideCondition::Split { at, below, above } => {
                if coord < *at {
                    below.resolve(coord)
                } else {
                    above.resolve(coord)
                }
            }
            other => other,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    West,
    East,
    South,
    North,
}

#[derive(Debug, Clone)]
pub struct BoundaryPlan {
    pub west: SideCondition,
    pub east: SideCondition,
    pub south: SideCondition,
    pub north: SideCondition,
    /// Sponge widths in cells, `[west, east, south, north]`; blending is
    /// switched off on every face touching a sponge cell.
    pub sponge: [usize; 4],
}

impl BoundaryPlan {
    pub fn periodic() -> Self {
        Self::uniform(SideCondition::Periodic)
    }

    pub fn uniform(c: SideCondition) -> Self {
        Self { west: c.clone(), east: c.clone(), south: c.clone(), north: c, sponge: [0; 4] }
    }

    /// Strip layout for one-dimensional problems: `x` condition on west/east,
    /// periodic in `y`.
    pub fn strip(x: SideCondition) -> Self {
        Self {
            west: x.clone(),
            east: x,
            south: SideCondition::Periodic,
            north: SideCondition::Periodic,
            sponge: [0; 4],
        }
    }

    pub fn with_sponge(mut self, sponge: [usize; 4]) -> Self {
        self.sponge = sponge;
        self
    }

    pub fn side(&self, side: Side) -> &SideCondition {
        match side {
            Side::West => &self.west,
            Side::East => &self.east,
            Side::South => &self.south,
            Side::North => &self.north,
        }
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        if self.west.is_periodic() != self.east.is_periodic() {
            return Err(Error::Config("periodic west/east boundaries must come in pairs".into()));
        }
        if self.south.is_periodic() != self.north.is_periodic() {
            return Err(Error::Config("periodic south/north boundaries must come in pairs".into()));
        }
        for (w, n, name) in [
            (self.sponge[0], grid.nx, "west"),
            (self.sponge[1], grid.nx, "east"),
            (self.sponge[2], grid.ny, "south"),
            (self.sponge[3], grid.ny, "north"),
        ] {
            if 2 * w > n {
                return Err(Error::Config(format!("{name} sponge width {w} exceeds half the mesh ({n})")));
            }
        }
        Ok(())
    }

    pub fn is_fully_periodic(&self) -> bool {
        self.west.is_periodic() && self.south.is_periodic()
    }
}

#[inline]
fn flip_x(u: Conserved) -> Conserved {
    Conserved::new(u.rho, -u.m1, u.m2, u.e)
}

#[inline]
fn flip_y(u: Conserved) -> Conserved {
    Conserved::new(u.rho, u.m1, -u.m2, u.e)
}

/// Fills every ghost cell of `field` according to `plan` at time `t`.
///
/// West/east ghosts are filled first over interior rows, then south/north
/// ghosts over the full padded width, so corners follow the south/north rule.
pub fn apply_boundaries(
    field: &mut DistributionField,
    plan: &BoundaryPlan,
    t: f64,
    model: &KineticModel,
    gas: GasModel,
) -> Result<()> {
    let grid = field.grid;
    let g = grid.ghost as isize;
    let nx = grid.nx as isize;
    let ny = grid.ny as isize;

    for j in 0..ny {
        for layer in 1..=g {
            // west
            let ghost = (-layer, j);
            let (xc, yc) = grid.center(ghost.0, ghost.1);
            let cond = plan.west.resolve(yc);
            fill_x_ghost(field, cond, ghost, (nx - layer, j), (layer - 1, j), (0, j), (xc, yc), t, model, gas)?;
            // east
            let ghost = (nx - 1 + layer, j);
            let (xc, yc) = grid.center(ghost.0, ghost.1);
            let cond = plan.east.resolve(yc);
            fill_x_ghost(field, cond, ghost, (layer - 1, j), (nx - layer, j), (nx - 1, j), (xc, yc), t, model, gas)?;
        }
    }
    for i in -g..nx + g {
        for layer in 1..=g {
            let ghost = (i, -layer);
            let (xc, yc) = grid.center(ghost.0, ghost.1);
            let cond = plan.south.resolve(xc);
            fill_y_ghost(field, cond, ghost, (i, ny - layer), (i, layer - 1), (i, 0), (xc, yc), t, model, gas)?;
            let ghost = (i, ny - 1 + layer);
            let (xc, yc) = grid.center(ghost.0, ghost.1);
            let cond = plan.north.resolve(xc);
            fill_y_ghost(field, cond, ghost, (i, layer - 1), (i, ny - layer), (i, ny - 1), (xc, yc), t, model, gas)?;
        }
    }
    Ok(())
}

type Ij = (isize, isize);

fn copy_cell(field: &mut DistributionField, dst: usize, src: usize) {
    for k in 0..4 {
        field.waves[k][dst] = field.waves[k][src];
    }
    field.total[dst] = field.total[src];
}

fn set_maxwellian(
    field: &mut DistributionField,
    dst: usize,
    w: Primitive,
    model: &KineticModel,
    gas: GasModel,
) -> Result<()> {
    let u = to_conserved(w, gas)?;
    let eq = model.moving_equilibria(u, gas);
    for k in 0..4 {
        field.waves[k][dst] = eq[k];
    }
    field.total[dst] = u;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn fill_x_ghost(
    field: &mut DistributionField,
    cond: &SideCondition,
    ghost: Ij,
    periodic_src: Ij,
    mirror_src: Ij,
    nearest: Ij,
    xy: (f64, f64),
    t: f64,
    model: &KineticModel,
    gas: GasModel,
) -> Result<()> {
    let grid = field.grid;
    let dst = grid.idx(ghost.0, ghost.1);
    match cond {
        SideCondition::Periodic => copy_cell(field, dst, grid.idx(periodic_src.0, periodic_src.1)),
        SideCondition::ZeroGradient => copy_cell(field, dst, grid.idx(nearest.0, nearest.1)),
        SideCondition::Dirichlet(f) => set_maxwellian(field, dst, f(xy.0, xy.1, t), model, gas)?,
        SideCondition::ReflectiveWall => {
            let src = grid.idx(mirror_src.0, mirror_src.1);
            let [u1, u2, u3, u4] = [0, 1, 2, 3].map(|k| field.waves[k][src]);
            field.waves[0][dst] = flip_x(u2);
            field.waves[1][dst] = flip_x(u1);
            field.waves[2][dst] = flip_x(u3);
            field.waves[3][dst] = flip_x(u4);
            field.total[dst] = flip_x(field.total[src]);
        }
        SideCondition::Split { .. } => unreachable!("split conditions are resolved before filling"),
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn fill_y_ghost(
    field: &mut DistributionField,
    cond: &SideCondition,
    ghost: Ij,
    periodic_src: Ij,
    mirror_src: Ij,
    nearest: Ij,
    xy: (f64, f64),
    t: f64,
    model: &KineticModel,
    gas: GasModel,
) -> Result<()> {
    let grid = field.grid;
    let dst = grid.idx(ghost.0, ghost.1);
    match cond {
        SideCondition::Periodic => copy_cell(field, dst, grid.idx(periodic_src.0, periodic_src.1)),
        SideCondition::ZeroGradient => copy_cell(field, dst, grid.idx(nearest.0, nearest.1)),
        SideCondition::Dirichlet(f) => set_maxwellian(field, dst, f(xy.0, xy.1, t), model, gas)?,
        SideCondition::ReflectiveWall => {
            let src = grid.idx(mirror_src.0, mirror_src.1);
            let [u1, u2, u3, u4] = [0, 1, 2, 3].map(|k| field.waves[k][src]);
            field.waves[0][dst] = flip_y(u1);
            field.waves[1][dst] = flip_y(u2);
            field.waves[2][dst] = flip_y(u4);
            field.waves[3][dst] = flip_y(u3);
            field.total[dst] = flip_y(field.total[src]);
        }
        SideCondition::Split { .. } => unreachable!("split conditions are resolved before filling"),
    }
    Ok(())
}

/// Face-centred blending parameters.
///
/// `x(i, j)` is the value on the vertical face `(i + 1/2, j)` for
/// `-1 <= i < nx`; `y(i, j)` the horizontal face `(i, j + 1/2)` for
/// `-1 <= j < ny`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaField {
    pub nx: usize,
    pub ny: usize,
    pub theta_x: Vec<f64>,
    pub theta_y: Vec<f64>,
}

impl ThetaField {
    pub fn filled(nx: usize, ny: usize, value: f64) -> Self {
        Self { nx, ny, theta_x: vec![value; (nx + 1) * ny], theta_y: vec![value; nx * (ny + 1)] }
    }

    #[inline]
    pub fn x_index(&self, i: isize, j: isize) -> usize {
        (i + 1) as usize + (self.nx + 1) * j as usize
    }

    #[inline]
    pub fn y_index(&self, i: isize, j: isize) -> usize {
        i as usize + self.nx * (j + 1) as usize
    }

    #[inline]
    pub fn x(&self, i: isize, j: isize) -> f64 {
        self.theta_x[self.x_index(i, j)]
    }

    #[inline]
    pub fn y(&self, i: isize, j: isize) -> f64 {
        self.theta_y[self.y_index(i, j)]
    }

    pub fn set_x(&mut self, i: isize, j: isize, v: f64) {
        let k = self.x_index(i, j);
        self.theta_x[k] = v;
    }

    pub fn set_y(&mut self, i: isize, j: isize, v: f64) {
        let k = self.y_index(i, j);
        self.theta_y[k] = v;
    }

    pub fn in_unit_interval(&self) -> bool {
        self.theta_x.iter().chain(&self.theta_y).all(|t| (0.0..=1.0).contains(t))
    }

    /// Forces `theta = 0` on every face touching a sponge cell.
    pub fn apply_sponge(&mut self, sponge: [usize; 4]) {
        let (nx, ny) = (self.nx as isize, self.ny as isize);
        let [w, e, s, n] = sponge.map(|v| v as isize);
        let in_sponge = |i: isize, j: isize| i < w || i >= nx - e || j < s || j >= ny - n;
        if sponge == [0; 4] {
            return;
        }
        for j in 0..ny {
            for i in -1..nx {
                let touches = (i >= 0 && in_sponge(i, j)) || (i + 1 < nx && in_sponge(i + 1, j));
                if touches {
                    self.set_x(i, j, 0.0);
                }
            }
        }
        for j in -1..ny {
            for i in 0..nx {
                let touches = (j >= 0 && in_sponge(i, j)) || (j + 1 < ny && in_sponge(i, j + 1));
                if touches {
                    self.set_y(i, j, 0.0);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::euler::Primitive;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gas() -> GasModel {
        GasModel::air()
    }

    fn model() -> KineticModel {
        KineticModel::new(0.5, 6.0).unwrap()
    }

    fn uniform_field(grid: Grid, w: Primitive) -> DistributionField {
        let u0 = CellField::from_primitive(&grid, gas(), |_, _| w).unwrap();
        init_distributions(&u0, grid, &model(), gas()).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(Grid::new(0, 4, 0.1, (0.0, 0.0)).is_err());
        assert!(Grid::new(4, 4, 0.0, (0.0, 0.0)).is_err());
        assert!(Grid::with_ghost(4, 4, 0.1, (0.0, 0.0), 0).is_err());
        let g = Grid::new(5, 3, 0.1, (0.0, 0.0)).unwrap();
        for p in 0..g.padded_len() {
            let (i, j) = g.coords(p);
            assert_eq!(g.idx(i, j), p);
        }
    }

    #[test]
    fn uniform_init_has_uniform_moments() {
        let grid = Grid::new(6, 5, 0.1, (0.0, 0.0)).unwrap();
        let w = Primitive::new(1.2, 0.3, -0.4, 0.9);
        let u = to_conserved(w, gas()).unwrap();
        let field = uniform_field(grid, w);
        let m = moments(&field);
        assert!(m.data.iter().all(|&v| v == u));
        for k in 1..=5 {
            let c = field.component_field(k);
            assert!(c.data.iter().all(|&v| v == c.data[0]));
        }
    }

    #[test]
    fn sod_moments_reproduce_initial_profile() {
        let grid = Grid::new(100, 4, 0.01, (0.0, 0.0)).unwrap();
        let u0 = CellField::from_primitive(&grid, gas(), |x, _| {
            if x < 0.5 {
                Primitive::new(1.0, 0.0, 0.0, 1.0)
            } else {
                Primitive::new(0.125, 0.0, 0.0, 0.1)
            }
        })
        .unwrap();
        let field = init_distributions(&u0, grid, &model(), gas()).unwrap();
        assert_eq!(moments(&field), u0);
        // and the explicit five-population sum agrees
        let sum = CellField::from_fn(grid.nx, grid.ny, |i, j| {
            (1..=5).map(|k| field.component_field(k).get(i, j)).fold(Conserved::ZERO, |a, b| a + b)
        });
        for (a, b) in sum.data.iter().zip(&u0.data) {
            assert!((*a - *b).max_abs() < 1e-15 * b.max_abs());
        }
    }

    #[test]
    fn entropy_wave_population_difference_is_flux_over_speed() {
        let n = 20;
        let grid = Grid::new(n, n, 1.0 / n as f64, (0.0, 0.0)).unwrap();
        let model = KineticModel::new(0.5, 10.7).unwrap();
        let u0 = CellField::from_primitive(&grid, gas(), |x, y| {
            Primitive::new(1.0 + 0.1 * (2.0 * std::f64::consts::PI * (x + y)).sin(), 1.0, 1.0, 1.0)
        })
        .unwrap();
        let field = init_distributions(&u0, grid, &model, gas()).unwrap();
        for (i, j, p) in field.interior_indices() {
            let diff = field.waves[0][p] - field.waves[1][p];
            let f = crate::euler::flux_x(u0.get(i, j), gas()).unwrap();
            assert!((diff - (1.0 / 10.7) * f).max_abs() < 1e-15 * f.max_abs().max(1.0));
        }
    }

    #[test]
    fn inadmissible_initial_data_is_rejected() {
        let grid = Grid::new(2, 2, 0.5, (0.0, 0.0)).unwrap();
        let mut u0 = CellField::from_fn(2, 2, |_, _| Conserved::new(1.0, 0.0, 0.0, 2.5));
        u0.set(1, 1, Conserved::new(1.0, 0.0, 0.0, -1.0));
        assert!(init_distributions(&u0, grid, &model(), gas()).is_err());
    }

    #[test]
    fn moments_are_linear_and_sum_components() {
        let grid = Grid::new(7, 6, 0.1, (0.0, 0.0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut rand_field = || {
            let comps: Vec<CellField<Conserved>> = (0..5)
                .map(|_| {
                    CellField::from_fn(7, 6, |_, _| {
                        Conserved::new(rng.gen(), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen())
                    })
                })
                .collect();
            comps
        };
        let a = rand_field();
        let b = rand_field();
        let fa = DistributionField::from_components(grid, [&a[0], &a[1], &a[2], &a[3], &a[4]]);
        let fb = DistributionField::from_components(grid, [&b[0], &b[1], &b[2], &b[3], &b[4]]);
        let sum: Vec<CellField<Conserved>> = (0..5)
            .map(|k| CellField::from_fn(7, 6, |i, j| a[k].get(i, j) + b[k].get(i, j)))
            .collect();
        let fs = DistributionField::from_components(grid, [&sum[0], &sum[1], &sum[2], &sum[3], &sum[4]]);
        let (ma, mb, ms) = (moments(&fa), moments(&fb), moments(&fs));
        for j in 0..6 {
            for i in 0..7 {
                let direct = (0..5).fold(Conserved::ZERO, |acc, k| acc + a[k].get(i, j));
                assert!((ma.get(i, j) - direct).max_abs() < 1e-15 * 8.0);
                assert!((ms.get(i, j) - (ma.get(i, j) + mb.get(i, j))).max_abs() < 1e-14);
            }
        }
    }

    fn all_plans() -> Vec<BoundaryPlan> {
        vec![
            BoundaryPlan::periodic(),
            BoundaryPlan::uniform(SideCondition::ZeroGradient),
            BoundaryPlan::uniform(SideCondition::ReflectiveWall),
            BoundaryPlan::strip(SideCondition::ZeroGradient),
            BoundaryPlan {
                south: SideCondition::ReflectiveWall,
                ..BoundaryPlan::uniform(SideCondition::ZeroGradient)
            },
        ]
    }

    #[test]
    fn uniform_field_ghosts_match_interior() {
        let grid = Grid::new(5, 4, 0.1, (0.0, 0.0)).unwrap();
        let w = Primitive::new(1.0, 0.0, 0.0, 1.0);
        for plan in all_plans() {
            let mut field = uniform_field(grid, w);
            apply_boundaries(&mut field, &plan, 0.0, &model(), gas()).unwrap();
            let reference = field.total[grid.idx(0, 0)];
            let waves: [Conserved; 4] = std::array::from_fn(|k| field.waves[k][grid.idx(0, 0)]);
            for p in 0..grid.padded_len() {
                assert_eq!(field.total[p], reference, "{plan:?}");
                for k in 0..4 {
                    assert_eq!(field.waves[k][p], waves[k], "{plan:?}");
                }
            }
        }
    }

    #[test]
    fn periodic_ghost_wraps() {
        let grid = Grid::new(4, 1, 0.25, (0.0, 0.0)).unwrap();
        let u0 = CellField::from_fn(4, 1, |i, _| Conserved::new(1.0 + i as f64, 0.0, 0.0, 10.0));
        let mut field = init_distributions(&u0, grid, &model(), gas()).unwrap();
        apply_boundaries(&mut field, &BoundaryPlan::periodic(), 0.0, &model(), gas()).unwrap();
        assert_eq!(field.total[grid.idx(-1, 0)], u0.get(3, 0));
        assert_eq!(field.total[grid.idx(-2, 0)], u0.get(2, 0));
        assert_eq!(field.total[grid.idx(4, 0)], u0.get(0, 0));
        assert_eq!(field.waves[1][grid.idx(4, 0)], field.waves[1][grid.idx(0, 0)]);
    }

    #[test]
    fn boundaries_are_idempotent() {
        let grid = Grid::new(6, 5, 0.1, (0.0, 0.0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u0 = CellField::from_primitive(&grid, gas(), |_, _| {
            Primitive::new(rng.gen_range(0.5..2.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), 1.0)
        })
        .unwrap();
        let mut plans = all_plans();
        plans.push(BoundaryPlan::uniform(SideCondition::dirichlet(|x, _, t| Primitive::new(1.0 + x, t, 0.0, 1.0))));
        for plan in plans {
            let mut field = init_distributions(&u0, grid, &model(), gas()).unwrap();
            apply_boundaries(&mut field, &plan, 0.3, &model(), gas()).unwrap();
            let once = field.clone();
            apply_boundaries(&mut field, &plan, 0.3, &model(), gas()).unwrap();
            assert_eq!(once, field);
        }
    }

    #[test]
    fn reflective_wall_mirrors_normal_pair() {
        let grid = Grid::new(3, 3, 0.1, (0.0, 0.0)).unwrap();
        let u0 = CellField::from_primitive(&grid, gas(), |x, y| Primitive::new(1.0 + x, 0.2 + y, -0.7, 1.0)).unwrap();
        let mut field = init_distributions(&u0, grid, &model(), gas()).unwrap();
        let plan = BoundaryPlan { south: SideCondition::ReflectiveWall, ..BoundaryPlan::periodic() };
        let plan = BoundaryPlan { north: SideCondition::ReflectiveWall, ..plan };
        apply_boundaries(&mut field, &plan, 0.0, &model(), gas()).unwrap();
        for i in 0..3 {
            let ghost = grid.idx(i, -1);
            let src = grid.idx(i, 0);
            assert_eq!(field.waves[2][ghost], flip_y(field.waves[3][src]));
            assert_eq!(field.waves[3][ghost], flip_y(field.waves[2][src]));
            assert_eq!(field.waves[0][ghost], flip_y(field.waves[0][src]));
            assert_eq!(field.total[ghost].m2, -field.total[src].m2);
            let ghost2 = grid.idx(i, -2);
            assert_eq!(field.total[ghost2], flip_y(field.total[grid.idx(i, 1)]));
        }
    }

    #[test]
    fn dirichlet_split_follows_moving_shock() {
        // double Mach reflection top boundary
        let post = Primitive::new(8.0, 8.25 * (std::f64::consts::PI / 6.0).cos(), -8.25 * 0.5, 116.5);
        let pre = Primitive::new(1.4, 0.0, 0.0, 1.0);
        let shock = move |x: f64, y: f64, t: f64| {
            if x >= 1.0 / 6.0 + (y + 20.0 * t) / 3f64.sqrt() {
                pre
            } else {
                post
            }
        };
        let grid = Grid::new(60, 20, 0.05, (0.0, 0.0)).unwrap();
        let u0 = CellField::from_primitive(&grid, gas(), |_, _| pre).unwrap();
        let mut field = init_distributions(&u0, grid, &model(), gas()).unwrap();
        let plan = BoundaryPlan { north: SideCondition::dirichlet(shock), ..BoundaryPlan::uniform(SideCondition::ZeroGradient) };
        let t = 0.1;
        apply_boundaries(&mut field, &plan, t, &model(), gas()).unwrap();
        let post_u = to_conserved(post, gas()).unwrap();
        let pre_u = to_conserved(pre, gas()).unwrap();
        for i in 0..60 {
            let (x, y) = grid.center(i, 20);
            let expect = if x >= 1.0 / 6.0 + (y + 20.0 * t) / 3f64.sqrt() { pre_u } else { post_u };
            assert_eq!(field.total[grid.idx(i, 20)], expect);
        }
        // the switch really happens inside the domain at this time
        let x_switch = 1.0 / 6.0 + (1.025 + 2.0) / 3f64.sqrt();
        assert!(x_switch > 0.0 && x_switch < 3.0);
    }

    #[test]
    fn periodic_pairs_are_required() {
        let grid = Grid::new(4, 4, 0.1, (0.0, 0.0)).unwrap();
        let plan = BoundaryPlan { west: SideCondition::ZeroGradient, ..BoundaryPlan::periodic() };
        assert!(plan.validate(&grid).is_err());
        let plan = BoundaryPlan::periodic().with_sponge([3, 0, 0, 0]);
        assert!(plan.validate(&grid).is_err());
        assert!(BoundaryPlan::periodic().with_sponge([2, 2, 0, 0]).validate(&grid).is_ok());
    }

    #[test]
    fn sponge_zeroes_layer_faces() {
        let mut theta = ThetaField::filled(20, 4, 1.0);
        theta.apply_sponge([5, 5, 0, 0]);
        for j in 0..4 {
            for i in -1..20 {
                let expect = if i + 1 <= 5 || i >= 20 - 5 - 1 { 0.0 } else { 1.0 };
                assert_eq!(theta.x(i, j), expect, "face {i}+1/2");
            }
        }
        assert_eq!(theta.y(2, 0), 0.0);
        assert_eq!(theta.y(10, 0), 1.0);
    }
}
