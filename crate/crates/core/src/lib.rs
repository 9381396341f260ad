//! Unfitted finite elements for the Poisson problem on level-set domains.
//!
//! The physical domain is described implicitly by an analytic level set and
//! embedded in a structured background triangulation. The discrete domain is
//! the negative part of the piecewise linear nodal interpolant of the level
//! set. Dirichlet data are imposed weakly with the penalty-free
//! (nonsymmetric) Nitsche method, the trace on the exact boundary is
//! recovered with a Taylor expansion along the discrete normal, and a ghost
//! penalty on faces of the cut band keeps the system well conditioned.
//!
//! The crate is organised bottom-up:
//!
//! * [`mesh`]: structured background triangulation with face adjacency.
//! * [`levelset`]: analytic level sets and ray root finding.
//! * [`cut`]: element classification, interface reconstruction, cut-cell
//!   quadrature support, ghost faces and boundary patches.
//! * [`fe`]: Lagrange elements, quadrature and degree-of-freedom maps.
//! * [`assembly`]: the bilinear form, ghost penalty and load vector.
//! * [`solver`]: sparse direct solve of the nonsymmetric system.
//! * [`analysis`]: manufactured solutions, error norms and convergence
//!   studies.

pub mod analysis;
pub mod assembly;
pub mod cut;
pub mod error;
pub mod fe;
pub mod levelset;
pub mod mesh;
pub mod solver;
pub mod sparse;

pub use analysis::{
    convergence_study, run_case, CaseId, ConvergenceTable, ManufacturedCase, RunConfig, RunRecord,
};
pub use assembly::{AssembledSystem, AssemblyConfig};
pub use cut::{CutTopology, ElementClass, Patch};
pub use error::{Error, Result};
pub use fe::{DiscreteSpace, QuadratureRule, ReferenceElement};
pub use levelset::{LevelSetCase, RayRootConfig};
pub use mesh::{BackgroundMesh, BoundingBox};
pub use solver::{solve_linear_system, SolveReport};
pub use sparse::SparseMatrix;

/// Points and vectors in the plane.
pub type Point = nalgebra::Point2<f64>;
pub type Vector = nalgebra::Vector2<f64>;
