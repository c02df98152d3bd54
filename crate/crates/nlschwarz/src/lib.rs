//! Nonlinear Schwarz solvers for finite element problems on structured 2D meshes.
//!
//! The crate provides the building blocks for one-level and two-level
//! (additive / hybrid) nonlinear Schwarz methods with an RGDSW coarse space,
//! plus a Newton-Krylov-Schwarz baseline:
//!
//! * [`mesh`] / [`decomp`] — structured triangular meshes, dual graphs,
//!   element-based overlapping decompositions and restriction/prolongation maps.
//! * [`fem`] — residual and tangent assembly for a scalar nonlinear diffusion
//!   problem and a 2D compressible Neo-Hooke elasticity problem.
//! * [`linalg`] — CSR matrices, sparse and dense LU, restarted GMRES.
//! * [`coarse`] — RGDSW coarse basis construction (inverse-distance interface
//!   weights, energy-minimizing interior extension).
//! * [`solver`] — nonlinear corrections, matrix-free tangents, the outer
//!   Newton loop and the NKS baseline.

pub mod coarse;
pub mod decomp;
pub mod error;
pub mod fem;
pub mod linalg;
pub mod mesh;
pub mod solver;

pub use error::{Error, Result};
