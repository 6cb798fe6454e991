//! Dense and sparse complex linear algebra used throughout the crate.

mod chebyshev;
mod dense;
mod sparse;

pub use chebyshev::{lowest_eigenpairs, ChebyshevOptions};
pub use dense::{general_eigenvalues, hermitian_eigen, hermitian_eigenvalues, lu_solve, CMat};
pub use sparse::SparseHermitianOperator;

pub use num_complex::Complex64 as C64;
