//! Parameter-uniform solvers for singularly perturbed first-order transport
//! problems `u_t + a u_x + b u = f` with `a ≥ α > 0`, `b ≥ 0`.
//!
//! Layers are resolved with Shishkin meshes, a fitted operator at outflow
//! layers, and characteristic-aligned coordinates for transported pulses.
//! The [`experiments`] module runs two-mesh convergence studies.

#![warn(missing_docs)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod characteristics;
pub mod composition;
pub mod error;
pub mod experiments;
pub mod mesh;
pub mod solvers;
pub mod types;

pub use error::{Error, Result};
pub use mesh::{Mesh1D, MeshKind, TensorMesh};
pub use solvers::{AlignedSolution, FittedParams, Frame, SchemeKind};
pub use types::{
    check_compatibility, shift_exponential, BoundaryData, CompatibilityReport, Extension,
    GridFunction, ProblemBuilder, ScalarField1D, ScalarField2D, Smoothness, TransportProblem,
};
