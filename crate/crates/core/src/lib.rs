//! Projected SOR and adaptive projected SOR for convex quadratic programs
//! with nonnegativity or box constraints,
//!
//! ```text
//! minimize  V(x) = 1/2 x^T A x - b^T x   subject to  lower <= x <= upper,
//! ```
//!
//! with `A` sparse, symmetric and positive semidefinite with a positive
//! diagonal. Least-squares problems `min 1/2 ||C x - d||^2` are handled
//! through column actions of `C` without forming `C^T C`.
//!
//! ```
//! use nqp_sor::{linalg::SparseSymMatrix, model::NqpProblem, solvers};
//!
//! let a = SparseSymMatrix::from_dense(&[
//!     vec![2.0, -1.0, 0.5],
//!     vec![-1.0, 2.0, -1.0],
//!     vec![0.5, -1.0, 2.0],
//! ])?;
//! let p = NqpProblem::new(a, vec![2.0, -2.0, 2.0])?;
//! let r = solvers::apsor_wolfe_solve(&p, &solvers::SolverConfig::default())?;
//! assert!(r.converged());
//! assert!((r.x[0] - 0.8).abs() < 1e-8 && r.x[1] == 0.0);
//! # Ok::<(), nqp_sor::Error>(())
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
mod error;
pub mod generators;
pub mod imaging;
pub mod io;
pub mod linalg;
pub mod model;
pub mod solvers;

pub use error::{Error, Result};
