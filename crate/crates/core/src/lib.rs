//! Generation of printable triply periodic minimal surface bricks.
//!
//! The pipeline runs from an implicit [`field::FieldSpec`] through a sampled
//! [`grid::VoxelGrid`], marching-cubes extraction with boundary capping
//! ([`isosurface`]), measurement ([`metrics`]) and export ([`io`]).
//! [`brick::build_brick`] strings the stages together; [`solver`] finds the
//! iso-level that meets a density or wall-thickness target.

pub mod brick;
pub mod error;
pub mod field;
pub mod grid;
pub mod io;
pub mod isosurface;
pub mod mesh;
pub mod metrics;
pub mod solver;

pub use brick::{build_brick, validate_constraints, BrickMode, BrickResult, BrickSpec};
pub use error::{Error, Result};
pub use field::{FieldSample, FieldSpec, ScalarField, SurfaceKind, Symmetry, SymmetryDescriptor};
pub use grid::{sample, transform_inside_negative, union_min, Domain, SolidMode, VoxelGrid};
pub use isosurface::{cap_boundary, marching_cubes};
pub use mesh::{weld_and_clean, TriangleMesh};
pub use metrics::{MeshReport, Warning};
pub use solver::{solve_iso_for_density, solve_thickness_for_wall, SolveResult};
