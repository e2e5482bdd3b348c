//! Discrete potential theory on point clouds.
//!
//! Riesz kernels `|x − y|^(α−n)` and the α-Green kernel of a domain are
//! assembled as symmetric positive-definite matrices over a sampled point
//! cloud. On top of them the crate computes potentials, energies, capacities,
//! equilibrium measures and balayage (as cone projection in the energy norm),
//! and it solves the minimum Green-energy problem in the external field of a
//! fixed charge as a quadratic program on the probability simplex.
//!
//! See the `examples/` directory of the crate for one runnable program per
//! capability, and the `rgreen` binary for the config-driven scenario runner.

pub mod balayage;
pub mod domain;
pub mod error;
pub mod gauss;
pub mod geometry;
pub mod green;
pub mod kernel;
pub mod measure;
pub mod qp;
pub mod report;
pub mod scenario;
pub mod svg;
pub mod verify;

pub use domain::{validate_field_separation, DomainConfig};
pub use error::{Error, Result};
pub use geometry::PointSet;
pub use kernel::{KernelKind, KernelMatrix};
pub use measure::{restrict, DiscreteMeasure, IndexSet};
