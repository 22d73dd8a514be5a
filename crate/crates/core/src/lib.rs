//! Kernel interpolation with product kernels.
//!
//! A product kernel `K(x, y) = prod_i K_i(x^i, y^i)` acts on coordinate
//! slices. On grid-like point sets its interpolation matrix is a Kronecker
//! product of component matrices, and so are the Cholesky factor, the Newton
//! basis Vandermonde matrix and the spectrum. The crate provides
//!
//! * component kernels (Askey, Wendland, Gaussian) and product kernels,
//! * dense linear algebra with Kronecker products, Cholesky and a Jacobi
//!   eigensolver,
//! * grid point sets in canonical order,
//! * direct and Kronecker-structured interpolation and the power function,
//! * Newton and tensor Newton bases,
//! * componentwise P-greedy point selection.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod greedy;
pub mod grid;
pub mod interpolation;
pub mod kernels;
pub mod linalg;
pub mod newton;
pub mod tensor;

pub use error::{Error, Result};
pub use greedy::{run_pgreedy, CandidateGrid, GreedyRun, GreedyState, StepOutcome, StopReason, StopRule, TraceRow};
pub use grid::{ComponentPointSet, GridPointSet};
pub use interpolation::{Evaluate, Interpolant, ProductInterpolant};
pub use kernels::{ComponentKernel, Family, Kernel, ProductKernel};
pub use linalg::{DenseMatrix, LowerTriangular};
pub use newton::{NewtonBasis, NewtonInterpolant, TensorNewtonBasis, TensorNewtonInterpolant};
