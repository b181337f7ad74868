//! Blended D2Q5 vectorial lattice Boltzmann solver for the two-dimensional
//! compressible Euler equations.

pub mod error;
pub mod euler;
pub mod kinetic;
pub mod limiters;
pub mod fd_oracle;
pub mod mesh;
pub mod solver;
pub mod cases;
pub mod sampling;
pub mod io;
pub mod api;

pub use error::{Error, Result};
pub use euler::{Conserved, GasModel, Primitive};
pub use kinetic::{KineticModel, SpeedPolicy};
pub use limiters::{DensityKind, LimiterConfig};
pub use mesh::{BoundaryPlan, CellField, CellIndex, DistributionField, Grid, SideCondition, ThetaField};
pub use solver::{Solver, SolverState, StepContext, StepReport};
pub use cases::{builtin_cases, case_by_name, error_norms, CaseSpec, ErrorReport};
pub use io::{RunConfig, RunSummary};
