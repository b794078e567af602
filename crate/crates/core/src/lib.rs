//! Discontinuous Galerkin interior-penalty toolkit: meshes, modal bases,
//! weighted-penalty diffusion and poroelastic stepping, convergence studies
//! and the parameter sweeps that generate training data for the solver-cost
//! models.

pub mod basis;
pub mod biot;
pub mod cases;
pub mod error;
pub mod flow;
pub mod mech;
pub mod mesh;
pub mod quad;
pub mod solve;
pub mod space;
pub mod sparse;
pub mod study;
pub mod sweep;

pub use error::{Error, Result};
