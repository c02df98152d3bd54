//! Sparse and dense linear algebra used by the Schwarz solvers.

mod csr;
mod dense;
mod gmres;
mod sparse_lu;

pub use csr::{CsrMatrix, LinearOperator};
pub use dense::{DenseLu, DenseMatrix};
pub use gmres::{gmres, GmresConfig, GmresResult};
pub use sparse_lu::SparseLu;
