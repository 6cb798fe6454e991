//! Diagonalization of lattice Hamiltonians and derived spectral observables.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::exec::{try_map_indexed, Execution};
use crate::lattice::{build_hamiltonian, Gauge, LatticeSpec, Site};
use crate::linalg::{hermitian_eigen, hermitian_eigenvalues, lowest_eigenpairs, ChebyshevOptions, CMat, SparseHermitianOperator};

/// Largest dimension accepted by [`DiagonalizationMode::Full`].
pub const DENSE_CEILING: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiagonalizationMode {
    Full,
    /// The `k` algebraically smallest eigenpairs.
    LowestK(usize),
}

#[derive(Debug, Clone)]
pub struct SpectrumResult {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Column `λ` holds `f_λ(r_i)`.
    pub eigenvectors: Option<CMat>,
}

impl SpectrumResult {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// `|f_λ(r_i)|²` for every mode `λ`.
    pub fn site_weights(&self, site_index: usize) -> Result<Vec<f64>> {
        let Some(v) = &self.eigenvectors else {
            return invalid("spectrum was computed without eigenvectors");
        };
        if site_index >= v.nrows() {
            return invalid(format!("site index {site_index} out of range for dimension {}", v.nrows()));
        }
        Ok((0..v.ncols()).map(|l| v[(site_index, l)].norm_sqr()).collect())
    }
}

pub fn diagonalize(h: &SparseHermitianOperator, mode: DiagonalizationMode) -> Result<SpectrumResult> {
    solve(h, mode, true)
}

/// Eigenvalues only; cheaper for [`DiagonalizationMode::Full`].
pub fn eigenvalues(h: &SparseHermitianOperator, mode: DiagonalizationMode) -> Result<Vec<f64>> {
    Ok(solve(h, mode, false)?.eigenvalues)
}

fn solve(h: &SparseHermitianOperator, mode: DiagonalizationMode, vectors: bool) -> Result<SpectrumResult> {
    let n = h.dim();
    match mode {
        DiagonalizationMode::Full => {
            if n > DENSE_CEILING {
                return invalid(format!("dimension {n} exceeds the dense ceiling {DENSE_CEILING}; use LowestK"));
            }
            let dense = h.to_dense();
            if vectors {
                let (eigenvalues, v) = hermitian_eigen(&dense)?;
                Ok(SpectrumResult { eigenvalues, eigenvectors: Some(v) })
            } else {
                Ok(SpectrumResult { eigenvalues: hermitian_eigenvalues(&dense)?, eigenvectors: None })
            }
        }
        DiagonalizationMode::LowestK(k) => {
            if k == 0 || k > n {
                return invalid(format!("LowestK({k}) requires 1 <= k <= {n}"));
            }
            let (eigenvalues, v) = lowest_eigenpairs(h, k, &ChebyshevOptions::default())?;
            Ok(SpectrumResult { eigenvalues, eigenvectors: vectors.then_some(v) })
        }
    }
}

/// Lorentzian-broadened local density of states
/// `ρ(r_e, ω) = Σ_λ |f_λ(r_e)|² (γ/π) / ((ω − ω_λ)² + γ²)`.
pub fn projected_dos(
    spectrum: &SpectrumResult,
    spec: &LatticeSpec,
    site: Site,
    omega_grid: &[f64],
    broadening: f64,
    exec: Execution,
) -> Result<Vec<f64>> {
    if !spec.contains(site) {
        return invalid(format!("site ({}, {}) lies outside the {}×{} lattice", site.x, site.y, spec.nx, spec.ny));
    }
    if !(broadening > 0.0) {
        return invalid(format!("broadening must be positive, got {broadening}"));
    }
    let weights = spectrum.site_weights(spec.index(site))?;
    let values = &spectrum.eigenvalues;
    let g2 = broadening * broadening;
    let norm = broadening / PI;
    try_map_indexed(exec, omega_grid.len(), |k| {
        let w = omega_grid[k];
        Ok(weights.iter().zip(values).map(|(p, e)| p * norm / ((w - e).powi(2) + g2)).sum())
    })
}

/// Spectrum of the lattice at every flux in `alphas`.
pub fn butterfly_scan(
    spec: &LatticeSpec,
    gauge: Gauge,
    alphas: &[f64],
    mode: DiagonalizationMode,
    exec: Execution,
) -> Result<Vec<Vec<f64>>> {
    for &a in alphas {
        if !(0.0..1.0).contains(&a) {
            return invalid(format!("flux {a} outside [0, 1)"));
        }
    }
    try_map_indexed(exec, alphas.len(), |k| {
        let s = LatticeSpec { alpha: alphas[k], ..spec.clone() };
        eigenvalues(&build_hamiltonian(&s, gauge, None)?, mode)
    })
}

/// Groups ascending eigenvalues into clusters whose consecutive spacing is
/// below `tolerance`, returning `(mean, count)` per cluster.
pub fn plateaus(eigenvalues: &[f64], tolerance: f64) -> Vec<(f64, usize)> {
    let mut out: Vec<(f64, usize)> = Vec::new();
    let mut start = 0;
    for i in 1..=eigenvalues.len() {
        if i == eigenvalues.len() || eigenvalues[i] - eigenvalues[i - 1] > tolerance {
            let chunk = &eigenvalues[start..i];
            if !chunk.is_empty() {
                out.push((chunk.iter().sum::<f64>() / chunk.len() as f64, chunk.len()));
            }
            start = i;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_site_chain() {
        let h = SparseHermitianOperator::from_parts(&[3.0, 3.0], &[(0, 1, crate::linalg::C64::new(-1.0, 0.0))]);
        let s = diagonalize(&h, DiagonalizationMode::Full).unwrap();
        assert!((s.eigenvalues[0] - 2.0).abs() < 1e-14);
        assert!((s.eigenvalues[1] - 4.0).abs() < 1e-14);
    }

    #[test]
    fn zero_field_band_width() {
        let mut spec = LatticeSpec::new(20, 20, 0.0);
        spec.omega_p = 7.0;
        let ev = eigenvalues(&build_hamiltonian(&spec, Gauge::Symmetric, None).unwrap(), DiagonalizationMode::Full).unwrap();
        assert!(ev[0] >= 3.0 && ev[0] < 3.1);
        assert!(*ev.last().unwrap() <= 11.0 && *ev.last().unwrap() > 10.9);
    }

    #[test]
    fn lowest_landau_cluster() {
        let spec = LatticeSpec::new(20, 20, 0.08);
        let ev = eigenvalues(&build_hamiltonian(&spec, Gauge::Symmetric, None).unwrap(), DiagonalizationMode::Full).unwrap();
        let wc = spec.cyclotron_frequency();
        let target = spec.band_edge() + 0.5 * wc;
        assert!((ev[0] - target).abs() < 0.1 * wc, "{} vs {target}", ev[0]);
    }

    #[test]
    fn lowest_k_matches_full() {
        let spec = LatticeSpec::new(20, 20, 0.08);
        let h = build_hamiltonian(&spec, Gauge::Symmetric, None).unwrap();
        let full = eigenvalues(&h, DiagonalizationMode::Full).unwrap();
        let part = diagonalize(&h, DiagonalizationMode::LowestK(60)).unwrap();
        for (a, b) in part.eigenvalues.iter().zip(&full) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn dense_ceiling_enforced() {
        let spec = LatticeSpec::new(65, 64, 0.1);
        let h = build_hamiltonian(&spec, Gauge::Symmetric, None).unwrap();
        assert!(eigenvalues(&h, DiagonalizationMode::Full).is_err());
    }

    #[test]
    fn dos_integrates_to_one() {
        let spec = LatticeSpec::new(12, 12, 0.08);
        let s = diagonalize(&build_hamiltonian(&spec, Gauge::Symmetric, None).unwrap(), DiagonalizationMode::Full).unwrap();
        let dw = 1e-4;
        let grid: Vec<f64> = (0..=140_000).map(|k| -7.0 + dw * k as f64).collect();
        let rho = projected_dos(&s, &spec, Site::new(6, 6), &grid, 1e-3, Execution::Parallel).unwrap();
        let total: f64 = rho.iter().sum::<f64>() * dw;
        assert!((total - 1.0).abs() < 1e-3, "{total}");
        assert!(projected_dos(&s, &spec, Site::new(12, 0), &grid, 1e-3, Execution::Sequential).is_err());
    }

    #[test]
    fn mirror_flux_spectra() {
        let spec = LatticeSpec::new(8, 7, 0.0);
        let out = butterfly_scan(&spec, Gauge::Symmetric, &[0.3, 0.7], DiagonalizationMode::Full, Execution::Parallel).unwrap();
        for (a, b) in out[0].iter().zip(&out[1]) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn plateau_grouping() {
        let p = plateaus(&[0.0, 0.001, 0.002, 1.0, 1.0005, 3.0], 0.01);
        assert_eq!(p.len(), 3);
        assert_eq!(p[0].1, 3);
        assert_eq!(p[2], (3.0, 1));
    }
}
