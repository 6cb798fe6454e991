//! Lowest eigenpairs of a sparse Hermitian operator by Chebyshev-filtered
//! subspace iteration.
//!
//! Landau levels are flat bands with `~αM` nearly degenerate states, which
//! single-vector Krylov methods resolve poorly. A block method with a
//! polynomial filter handles the clusters without special treatment: each
//! sweep damps the unwanted part of the spectrum `[a, b]` with a Chebyshev
//! polynomial, re-orthonormalizes, and performs a Rayleigh-Ritz projection.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{hermitian_eigen, CMat, SparseHermitianOperator, C64};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct ChebyshevOptions {
    /// Polynomial degree of the filter applied in every sweep.
    pub degree: usize,
    /// Extra basis vectors beyond the `k` requested; `None` picks
    /// `max(16, k / 2)`.
    pub guard: Option<usize>,
    /// Absolute residual `‖Hx − θx‖` required for every returned pair.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for ChebyshevOptions {
    fn default() -> Self {
        Self {
            degree: 16,
            guard: None,
            tolerance: 1e-10,
            max_iterations: 400,
            seed: 0x1a77_1ce5,
        }
    }
}

fn apply_block(h: &SparseHermitianOperator, x: &CMat, out: &mut CMat) {
    for j in 0..x.ncols() {
        h.apply(x.col_as_slice(j), out.col_as_slice_mut(j));
    }
}

fn orthonormalize(y: &CMat) -> CMat {
    y.qr().compute_thin_Q()
}

/// Rayleigh-Ritz on the span of the orthonormal columns of `q`.
fn rayleigh_ritz(h: &SparseHermitianOperator, q: &CMat) -> Result<(Vec<f64>, CMat, CMat)> {
    let mut hq = CMat::zeros(q.nrows(), q.ncols());
    apply_block(h, q, &mut hq);
    let mut small = q.adjoint() * &hq;
    // symmetrize against rounding before the dense solve
    let p = small.nrows();
    for i in 0..p {
        small[(i, i)] = C64::new(small[(i, i)].re, 0.0);
        for j in 0..i {
            let avg = (small[(i, j)] + small[(j, i)].conj()) * 0.5;
            small[(i, j)] = avg;
            small[(j, i)] = avg.conj();
        }
    }
    let (theta, v) = hermitian_eigen(&small)?;
    let x = q * &v;
    let hx = &hq * &v;
    Ok((theta, x, hx))
}

/// Applies the scaled Chebyshev filter of the given degree that damps
/// `[a, b]` and amplifies everything below `a`; `a0` estimates the lowest
/// eigenvalue and only controls scaling.
fn chebyshev_filter(h: &SparseHermitianOperator, x: &CMat, degree: usize, a: f64, b: f64, a0: f64) -> CMat {
    let e = (b - a) / 2.0;
    let c = (b + a) / 2.0;
    let mut sigma = e / (a0 - c);
    let tau = 2.0 / sigma;

    let (n, p) = (x.nrows(), x.ncols());
    let mut hx = CMat::zeros(n, p);
    apply_block(h, x, &mut hx);
    let mut prev = x.clone();
    let mut cur = CMat::from_fn(n, p, |i, j| (hx[(i, j)] - x[(i, j)] * c) * (sigma / e));
    for _ in 1..degree {
        let sigma_new = 1.0 / (tau - sigma);
        apply_block(h, &cur, &mut hx);
        let next = CMat::from_fn(n, p, |i, j| {
            (hx[(i, j)] - cur[(i, j)] * c) * (2.0 * sigma_new / e) - prev[(i, j)] * (sigma * sigma_new)
        });
        prev = cur;
        cur = next;
        sigma = sigma_new;
    }
    cur
}

/// The `k` algebraically smallest eigenpairs of `h`, ascending.
pub fn lowest_eigenpairs(h: &SparseHermitianOperator, k: usize, opts: &ChebyshevOptions) -> Result<(Vec<f64>, CMat)> {
    let n = h.dim();
    assert!(k >= 1 && k <= n, "requested {k} eigenpairs of a {n}-dimensional operator");
    let guard = opts.guard.unwrap_or_else(|| (k / 2).max(16));
    let p = (k + guard).min(n);
    if p == n {
        let (w, v) = hermitian_eigen(&h.to_dense())?;
        let vk = v.subcols(0, k).to_owned();
        return Ok((w[..k].to_vec(), vk));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let start = CMat::from_fn(n, p, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    let (_, hi) = h.spectral_bounds();
    let (mut theta, mut x, mut hx) = rayleigh_ritz(h, &orthonormalize(&start))?;

    let mut worst = f64::INFINITY;
    for iteration in 0..opts.max_iterations {
        worst = (0..k)
            .map(|j| {
                (0..n)
                    .map(|i| (hx[(i, j)] - x[(i, j)] * theta[j]).norm_sqr())
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max);
        if worst <= opts.tolerance {
            log::debug!("chebyshev subspace iteration converged in {iteration} sweeps");
            let xk = x.subcols(0, k).to_owned();
            theta.truncate(k);
            return Ok((theta, xk));
        }
        let upper_ritz = theta[p - 1];
        let a = if upper_ritz < hi { upper_ritz } else { hi - 1e-8 * hi.abs().max(1.0) };
        let y = chebyshev_filter(h, &x, opts.degree, a, hi, theta[0]);
        (theta, x, hx) = rayleigh_ritz(h, &orthonormalize(&y))?;
    }
    Err(Error::SolverFailure {
        iterations: opts.max_iterations,
        residual: worst,
        tolerance: opts.tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(n: usize) -> SparseHermitianOperator {
        let diag: Vec<f64> = (0..n).map(|i| 0.01 * (i % 5) as f64).collect();
        let off: Vec<_> = (0..n - 1).map(|i| (i, i + 1, C64::new(-1.0, 0.1 * (i % 3) as f64))).collect();
        SparseHermitianOperator::from_parts(&diag, &off)
    }

    #[test]
    fn matches_dense_solver() {
        let h = chain(300);
        let (w_dense, _) = hermitian_eigen(&h.to_dense()).unwrap();
        let (w, v) = lowest_eigenpairs(&h, 12, &ChebyshevOptions::default()).unwrap();
        for j in 0..12 {
            assert!((w[j] - w_dense[j]).abs() < 1e-10, "{j}: {} vs {}", w[j], w_dense[j]);
        }
        let gram = v.adjoint() * &v;
        for i in 0..12 {
            for j in 0..12 {
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((gram[(i, j)] - C64::new(target, 0.0)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn reports_failure_when_starved() {
        let h = chain(400);
        let opts = ChebyshevOptions { max_iterations: 1, degree: 2, ..Default::default() };
        match lowest_eigenpairs(&h, 10, &opts) {
            Err(Error::SolverFailure { iterations: 1, .. }) => {}
            other => panic!("expected solver failure, got {other:?}"),
        }
    }
}
