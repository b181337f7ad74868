//! Discrete density error norms and observed convergence rates.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{CellField, Grid};

/// Density error of one run.
///
/// `l1`, `l2`, `linf` are the weighted norms `h sum |e|`, `(h sum e^2)^(1/2)`
/// and `max |e|`, with `h = dx^2` on a plane and `dx` on a line. The `rel_*`
/// variants divide by the same norm of the exact density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub nx: usize,
    pub dx: f64,
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
    pub rel_l1: f64,
    pub rel_l2: f64,
    pub rel_linf: f64,
}

impl ErrorReport {
    pub fn absolute(&self) -> [f64; 3] {
        [self.l1, self.l2, self.linf]
    }

    pub fn relative(&self) -> [f64; 3] {
        [self.rel_l1, self.rel_l2, self.rel_linf]
    }
}

/// Norms of `rho - exact` with the exact density sampled at cell centres.
pub fn error_norms(rho: &CellField<f64>, grid: &Grid, exact: impl Fn(f64, f64) -> f64 + Sync) -> ErrorReport {
    assert_eq!((rho.nx, rho.ny), (grid.nx, grid.ny), "field and grid sizes differ");
    let reference: Vec<f64> = (0..grid.cells())
        .into_par_iter()
        .map(|c| {
            let (x, y) = grid.center((c % grid.nx) as isize, (c / grid.nx) as isize);
            exact(x, y)
        })
        .collect();
    compare_densities(&rho.data, &reference, grid.nx, grid.dx, grid.dx * grid.dx)
}

/// Norms of `rho - reference` over matching samples; `measure` weights the
/// sums (`dx` for a line, `dx^2` for a plane).
pub fn compare_densities(rho: &[f64], reference: &[f64], nx: usize, dx: f64, measure: f64) -> ErrorReport {
    assert_eq!(rho.len(), reference.len(), "sample counts differ");
    // sum|e|, sum e^2, max|e|, sum|r|, sum r^2, max|r|, accumulated per chunk
    // in a fixed order so the result does not depend on the thread count
    let chunk = nx.max(1);
    let parts: Vec<[f64; 6]> = rho
        .par_chunks(chunk)
        .zip(reference.par_chunks(chunk))
        .map(|(a, b)| {
            let mut acc = [0.0; 6];
            for (&v, &r) in a.iter().zip(b) {
                let e = v - r;
                acc[0] += e.abs();
                acc[1] += e * e;
                acc[2] = acc[2].max(e.abs());
                acc[3] += r.abs();
                acc[4] += r * r;
                acc[5] = acc[5].max(r.abs());
            }
            acc
        })
        .collect();
    let mut s = [0.0; 6];
    for r in parts {
        s[0] += r[0];
        s[1] += r[1];
        s[2] = s[2].max(r[2]);
        s[3] += r[3];
        s[4] += r[4];
        s[5] = s[5].max(r[5]);
    }
    let rel = |num: f64, den: f64| if den > 0.0 { num / den } else { num };
    ErrorReport {
        nx,
        dx,
        l1: measure * s[0],
        l2: (measure * s[1]).sqrt(),
        linf: s[2],
        rel_l1: rel(s[0], s[3]),
        rel_l2: rel(s[1], s[4]).sqrt(),
        rel_linf: rel(s[2], s[5]),
    }
}

/// Observed orders between consecutive runs, for the absolute and relative
/// norms in `(l1, l2, linf)` order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    pub absolute: [f64; 3],
    pub relative: [f64; 3],
}

/// `log2(e_coarse / e_fine)` for each successive pair; the cell size must
/// halve between entries.
pub fn convergence_rates(reports: &[ErrorReport]) -> Result<Vec<Rates>> {
    if reports.len() < 2 {
        return Err(Error::Config("need at least two runs to compute rates".into()));
    }
    reports
        .windows(2)
        .map(|w| {
            let ratio = w[0].dx / w[1].dx;
            if (ratio - 2.0).abs() > 1e-9 {
                return Err(Error::Config(format!(
                    "cell sizes {} -> {} do not halve",
                    w[0].dx, w[1].dx
                )));
            }
            let r = |a: [f64; 3], b: [f64; 3]| std::array::from_fn(|k| (a[k] / b[k]).log2());
            Ok(Rates { absolute: r(w[0].absolute(), w[1].absolute()), relative: r(w[0].relative(), w[1].relative()) })
        })
        .collect()
}
