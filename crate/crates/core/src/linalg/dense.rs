use faer::{linalg::solvers::Solve, Mat, Side};

use super::C64;
use crate::error::{Error, Result};

pub type CMat = Mat<C64>;

/// Eigen-decomposition of a Hermitian matrix (lower triangle is read).
/// Eigenvalues ascend; eigenvectors are the columns of the returned matrix.
pub fn hermitian_eigen(a: &CMat) -> Result<(Vec<f64>, CMat)> {
    let evd = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Decomposition(format!("{e:?}")))?;
    let values = evd.S().column_vector().iter().map(|z| z.re).collect();
    Ok((values, evd.U().to_owned()))
}

pub fn hermitian_eigenvalues(a: &CMat) -> Result<Vec<f64>> {
    let values = a
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Decomposition(format!("{e:?}")))?;
    Ok(values)
}

/// Eigenvalues of a general complex matrix, sorted by real part then
/// imaginary part.
pub fn general_eigenvalues(a: &CMat) -> Result<Vec<C64>> {
    let mut values = a
        .eigenvalues()
        .map_err(|e| Error::Decomposition(format!("{e:?}")))?;
    values.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    Ok(values)
}

/// Solves `a x = b` by LU with partial pivoting.
pub fn lu_solve(a: &CMat, b: &CMat) -> CMat {
    a.partial_piv_lu().solve(b)
}
