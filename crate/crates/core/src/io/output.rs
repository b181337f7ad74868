//! Field serialization: CSV snapshots, face blending parameters, line
//! profiles and legacy VTK.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::cases::Exact;
use crate::error::{Error, Result};
use crate::euler::{to_primitive, Conserved, GasModel, Primitive};
use crate::mesh::{CellField, Grid, ThetaField};

pub const SNAPSHOT_HEADER: [&str; 6] = ["x", "y", "rho", "v1", "v2", "p"];
pub const THETA_HEADER: [&str; 4] = ["x", "y", "axis", "theta"];
pub const PROFILE_HEADER: [&str; 6] = ["x", "rho", "v1", "v2", "p", "theta"];
pub const THETA_PROFILE_HEADER: [&str; 2] = ["x", "theta"];
pub const EXACT_HEADER: [&str; 5] = ["x", "rho", "v1", "v2", "p"];

/// Shortest decimal text that parses back to the same value.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Config(format!("malformed CSV: {other:?}")),
    }
}

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    Ok(csv::Writer::from_writer(File::create(path)?))
}

pub fn primitive_field(u: &CellField<Conserved>, gas: GasModel) -> Result<CellField<Primitive>> {
    let data = u.data.iter().map(|&c| to_primitive(c, gas)).collect::<Result<Vec<_>>>()?;
    Ok(CellField { nx: u.nx, ny: u.ny, data })
}

/// Cell-centre primitive values, one row per cell, `i` fastest.
pub fn write_snapshot_csv(path: &Path, grid: &Grid, w: &CellField<Primitive>) -> Result<()> {
    let mut out = writer(path)?;
    out.write_record(SNAPSHOT_HEADER).map_err(csv_err)?;
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let (x, y) = grid.center(i as isize, j as isize);
            let c = w.get(i, j);
            out.write_record([x, y, c.rho, c.v1, c.v2, c.p].map(fmt_f64)).map_err(csv_err)?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Snapshot read back from CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotRows {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub values: Vec<Primitive>,
}

pub fn read_snapshot_csv(path: &Path) -> Result<SnapshotRows> {
    let mut rdr = csv::Reader::from_path(path).map_err(csv_err)?;
    let header: Vec<String> = rdr.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
    if header != SNAPSHOT_HEADER {
        return Err(Error::Config(format!("unexpected snapshot columns {header:?}, expected {SNAPSHOT_HEADER:?}")));
    }
    let mut rows = SnapshotRows { x: Vec::new(), y: Vec::new(), values: Vec::new() };
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let v: Vec<f64> = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|_| Error::Config(format!("non-numeric field `{s}`"))))
            .collect::<Result<_>>()?;
        rows.x.push(v[0]);
        rows.y.push(v[1]);
        rows.values.push(Primitive::new(v[2], v[3], v[4], v[5]));
    }
    Ok(rows)
}

/// Every face blending parameter, located at the face midpoint.
pub fn write_theta_csv(path: &Path, grid: &Grid, theta: &ThetaField) -> Result<()> {
    let mut out = writer(path)?;
    out.write_record(THETA_HEADER).map_err(csv_err)?;
    let (x0, y0) = grid.origin;
    for j in 0..grid.ny as isize {
        for i in -1..grid.nx as isize {
            let (x, y) = (x0 + (i + 1) as f64 * grid.dx, y0 + (j as f64 + 0.5) * grid.dx);
            out.write_record([fmt_f64(x), fmt_f64(y), "x".into(), fmt_f64(theta.x(i, j))]).map_err(csv_err)?;
        }
    }
    for j in -1..grid.ny as isize {
        for i in 0..grid.nx as isize {
            let (x, y) = (x0 + (i as f64 + 0.5) * grid.dx, y0 + (j + 1) as f64 * grid.dx);
            out.write_record([fmt_f64(x), fmt_f64(y), "y".into(), fmt_f64(theta.y(i, j))]).map_err(csv_err)?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Row `j = ny / 2` with a per-cell `theta` (smaller of the two x-faces);
/// the column is left empty when no step has been taken.
pub fn write_profile_csv(path: &Path, grid: &Grid, w: &CellField<Primitive>, theta: Option<&ThetaField>) -> Result<()> {
    let mut out = writer(path)?;
    out.write_record(PROFILE_HEADER).map_err(csv_err)?;
    let j = grid.ny / 2;
    for i in 0..grid.nx {
        let (x, _) = grid.center(i as isize, j as isize);
        let c = w.get(i, j);
        let t = theta.map_or(String::new(), |t| {
            let (ii, jj) = (i as isize, j as isize);
            fmt_f64(t.x(ii - 1, jj).min(t.x(ii, jj)))
        });
        let mut rec: Vec<String> = [x, c.rho, c.v1, c.v2, c.p].map(fmt_f64).to_vec();
        rec.push(t);
        out.write_record(&rec).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// x-face parameters along row `j = ny / 2`.
pub fn write_theta_profile_csv(path: &Path, grid: &Grid, theta: &ThetaField) -> Result<()> {
    let mut out = writer(path)?;
    out.write_record(THETA_PROFILE_HEADER).map_err(csv_err)?;
    let j = (grid.ny / 2) as isize;
    for i in -1..grid.nx as isize {
        let x = grid.origin.0 + (i + 1) as f64 * grid.dx;
        out.write_record([fmt_f64(x), fmt_f64(theta.x(i, j))]).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// Reference solution at the cell centres of row `j = ny / 2`.
pub fn write_exact_csv(path: &Path, grid: &Grid, exact: &Exact, t: f64, gamma: f64) -> Result<()> {
    let mut out = writer(path)?;
    out.write_record(EXACT_HEADER).map_err(csv_err)?;
    let j = (grid.ny / 2) as isize;
    for i in 0..grid.nx as isize {
        let (x, y) = grid.center(i, j);
        let w = exact.primitive(x, y, t, gamma)?;
        out.write_record([x, w.rho, w.v1, w.v2, w.p].map(fmt_f64)).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// ASCII legacy VTK structured points with cell data.
pub fn write_vtk(path: &Path, grid: &Grid, w: &CellField<Primitive>, time: f64) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "density, velocity and pressure at t = {}", fmt_f64(time))?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET STRUCTURED_POINTS")?;
    writeln!(out, "DIMENSIONS {} {} 1", grid.nx + 1, grid.ny + 1)?;
    writeln!(out, "ORIGIN {} {} 0", fmt_f64(grid.origin.0), fmt_f64(grid.origin.1))?;
    writeln!(out, "SPACING {} {} 1", fmt_f64(grid.dx), fmt_f64(grid.dx))?;
    writeln!(out, "CELL_DATA {}", grid.nx * grid.ny)?;
    let fields: [(&str, fn(&Primitive) -> f64); 4] =
        [("rho", |w| w.rho), ("v1", |w| w.v1), ("v2", |w| w.v2), ("p", |w| w.p)];
    for (name, get) in fields {
        writeln!(out, "SCALARS {name} double 1")?;
        writeln!(out, "LOOKUP_TABLE default")?;
        for v in &w.data {
            writeln!(out, "{}", fmt_f64(get(v)))?;
        }
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn snapshot_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let grid = Grid::new(7, 5, 0.1, (-0.35, 0.0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let w = CellField::from_fn(7, 5, |_, _| {
            Primitive::new(rng.gen::<f64>() * 1e-7, rng.gen_range(-1e3..1e3), 1.0 / 3.0, rng.gen::<f64>() * 1e12)
        });
        let path = dir.path().join("s.csv");
        write_snapshot_csv(&path, &grid, &w).unwrap();
        let back = read_snapshot_csv(&path).unwrap();
        assert_eq!(back.values, w.data);
        assert_eq!(back.x[8], grid.center(1, 1).0);
        assert_eq!(back.y[8], grid.center(1, 1).1);
    }

    #[test]
    fn header_mismatch_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "x,y,density\n0,0,1\n").unwrap();
        let err = read_snapshot_csv(&path).unwrap_err().to_string();
        assert!(err.contains("density"));
    }

    #[test]
    fn theta_and_profile_layout() {
        let dir = tempfile::tempdir().unwrap();
        let grid = Grid::new(4, 2, 0.25, (0.0, 0.0)).unwrap();
        let mut theta = ThetaField::filled(4, 2, 1.0);
        theta.set_x(1, 1, 0.25);
        write_theta_csv(&dir.path().join("t.csv"), &grid, &theta).unwrap();
        let text = std::fs::read_to_string(dir.path().join("t.csv")).unwrap();
        assert_eq!(text.lines().count(), 1 + 5 * 2 + 4 * 3);
        assert!(text.contains("0.5,0.375,x,0.25"));
        let w = CellField::from_fn(4, 2, |_, _| Primitive::new(1.0, 0.0, 0.0, 1.0));
        write_profile_csv(&dir.path().join("p.csv"), &grid, &w, Some(&theta)).unwrap();
        let text = std::fs::read_to_string(dir.path().join("p.csv")).unwrap();
        let rows: Vec<&str> = text.lines().collect();
        assert_eq!(rows[0], "x,rho,v1,v2,p,theta");
        assert!(rows[2].ends_with(",0.25") && rows[3].ends_with(",0.25") && rows[1].ends_with(",1.0"));
        write_profile_csv(&dir.path().join("p0.csv"), &grid, &w, None).unwrap();
        let text = std::fs::read_to_string(dir.path().join("p0.csv")).unwrap();
        assert!(text.lines().nth(1).unwrap().ends_with(','));
    }

    #[test]
    fn vtk_has_all_cells() {
        let dir = tempfile::tempdir().unwrap();
        let grid = Grid::new(3, 2, 0.5, (0.0, 0.0)).unwrap();
        let w = CellField::from_fn(3, 2, |i, j| Primitive::new(1.0 + i as f64, j as f64, 0.0, 1.0));
        let path = dir.path().join("f.vtk");
        write_vtk(&path, &grid, &w, 0.5).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("DIMENSIONS 4 3 1") && text.contains("CELL_DATA 6"));
        assert_eq!(text.lines().count(), 8 + 4 * (2 + 6));
    }
}
