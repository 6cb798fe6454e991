//! Gaussian on-site disorder ensembles.
//!
//! Realization `k` of a [`DisorderSpec`] draws its site offsets from a
//! ChaCha20 stream keyed by `(seed, k)`, so any realization can be
//! regenerated on its own and ensembles do not depend on thread scheduling.

use faer::Mat;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::dynamics::{EmitterSet, SingleExcitationGenerator};
use crate::error::{invalid, Error, Result};
use crate::exec::{pairwise_sum, try_map_indexed, Execution};
use crate::lattice::{build_hamiltonian, DissipationProfile, Gauge, LatticeSpec};
use crate::linalg::{hermitian_eigen, lu_solve, C64};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisorderSpec {
    /// Standard deviation `Δω_p` of the on-site frequencies.
    pub delta_omega_p: f64,
    pub seed: u64,
    pub n_realizations: usize,
}

impl DisorderSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta_omega_p >= 0.0) || !self.delta_omega_p.is_finite() {
            return invalid(format!("disorder width must be a non-negative number, got {}", self.delta_omega_p));
        }
        if self.n_realizations == 0 {
            return invalid("ensemble needs at least one realization");
        }
        Ok(())
    }
}

/// Site offsets `δω_p^i` of realization `k`.
pub fn sample_disorder(spec: &DisorderSpec, num_sites: usize, k: usize) -> Result<Vec<f64>> {
    spec.validate()?;
    if k >= spec.n_realizations {
        return invalid(format!("realization {k} out of range ({} realizations)", spec.n_realizations));
    }
    if spec.delta_omega_p == 0.0 {
        return Ok(vec![0.0; num_sites]);
    }
    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
    rng.set_stream(k as u64);
    let normal = Normal::new(0.0, spec.delta_omega_p).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok((0..num_sites).map(|_| normal.sample(&mut rng)).collect())
}

/// Clean system to which disorder is added.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisorderedSystem {
    pub lattice: LatticeSpec,
    #[serde(default)]
    pub gauge: Gauge,
    pub emitters: EmitterSet,
    /// Uniform photon loss.
    #[serde(default)]
    pub gamma_p: f64,
}

impl DisorderedSystem {
    pub fn validate(&self) -> Result<()> {
        self.lattice.validate()?;
        self.emitters.validate(&self.lattice)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    /// Spectra: a single row. Populations: one row per emitter holding the
    /// coherent average `|⟨c_n⟩|²`.
    pub mean: Vec<Vec<f64>>,
    /// Populations only: the realization mean of `|c_n|²`.
    pub incoherent_mean: Option<Vec<Vec<f64>>>,
    /// Per-realization rows, when requested.
    pub realizations: Option<Vec<Vec<Vec<f64>>>>,
    pub count: usize,
}

fn wrap(k: usize, e: Error) -> Error {
    Error::Realization { index: k, source: Box::new(e) }
}

/// Excitation spectrum of emitter `probe` on the full disordered lattice,
/// `S(ω) = |[(ω_e − iγ_e/2 − ω) − g² Σ_λ f_λ f_λ† / (ω_λ − iγ_p/2 − ω)]⁻¹_nn|²`
/// with the sum restricted to emitter sites.
pub fn lattice_excitation_spectrum(system: &DisorderedSystem, offsets: Option<&[f64]>, probe: usize, omega_grid: &[f64]) -> Result<Vec<f64>> {
    system.validate()?;
    let em = &system.emitters;
    if probe >= em.len() {
        return invalid(format!("probe emitter {probe} out of range"));
    }
    if !(em.gamma_e > 0.0) {
        return invalid("excitation spectrum requires gamma_e > 0");
    }
    let h = build_hamiltonian(&system.lattice, system.gauge, offsets)?;
    let (w, v) = hermitian_eigen(&h.to_dense())?;
    let sites = em.site_indices(&system.lattice);
    let n = sites.len();
    let f: Vec<Vec<C64>> = sites.iter().map(|&s| (0..w.len()).map(|l| v[(s, l)]).collect()).collect();
    let g2 = em.g * em.g;
    let rhs = Mat::from_fn(n, 1, |i, _| if i == probe { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
    Ok(omega_grid
        .iter()
        .map(|&om| {
            let denom: Vec<C64> = w.iter().map(|&wl| 1.0 / C64::new(wl - om, -0.5 * system.gamma_p)).collect();
            let a = Mat::from_fn(n, n, |p, q| {
                let sigma: C64 = (0..w.len()).map(|l| f[p][l] * f[q][l].conj() * denom[l]).sum();
                let diag = if p == q { C64::new(em.omega_e - om, -0.5 * em.gamma_e) } else { C64::new(0.0, 0.0) };
                diag - g2 * sigma
            });
            lu_solve(&a, &rhs)[(probe, 0)].norm_sqr()
        })
        .collect())
}

/// Realization-averaged excitation spectrum of emitter `probe`.
pub fn averaged_excitation_spectrum(
    system: &DisorderedSystem,
    disorder: &DisorderSpec,
    probe: usize,
    omega_grid: &[f64],
    keep_realizations: bool,
    exec: Execution,
) -> Result<EnsembleResult> {
    disorder.validate()?;
    system.validate()?;
    let m = system.lattice.num_sites();
    let runs = try_map_indexed(exec, disorder.n_realizations, |k| {
        let offsets = sample_disorder(disorder, m, k).map_err(|e| wrap(k, e))?;
        lattice_excitation_spectrum(system, Some(&offsets), probe, omega_grid).map_err(|e| wrap(k, e))
    })?;
    let scale = 1.0 / runs.len() as f64;
    let mean = pairwise_sum(&runs).into_iter().map(|x| x * scale).collect();
    Ok(EnsembleResult {
        mean: vec![mean],
        incoherent_mean: None,
        realizations: keep_realizations.then(|| runs.into_iter().map(|r| vec![r]).collect()),
        count: disorder.n_realizations,
    })
}

/// Emitter amplitudes `c_n(t)` (as `out[n][k]`) after exciting `initial`
/// on the lossless lattice with the given offsets, by exact diagonalization.
pub fn emitter_amplitudes(system: &DisorderedSystem, offsets: Option<&[f64]>, initial: usize, t_grid: &[f64]) -> Result<Vec<Vec<C64>>> {
    system.validate()?;
    if system.gamma_p != 0.0 || system.emitters.gamma_e != 0.0 {
        return invalid("population ensembles are evaluated without losses");
    }
    let n = system.emitters.len();
    if initial >= n {
        return invalid(format!("initial emitter {initial} out of range"));
    }
    let h = build_hamiltonian(&system.lattice, system.gauge, offsets)?;
    let gen = SingleExcitationGenerator::new(&system.lattice, &h, &system.emitters, &DissipationProfile::none())?;
    let (w, v) = hermitian_eigen(&gen.to_dense())?;
    let amp: Vec<C64> = (0..w.len()).map(|l| v[(initial, l)].conj()).collect();
    Ok((0..n)
        .map(|e| {
            t_grid
                .iter()
                .map(|&t| (0..w.len()).map(|l| v[(e, l)] * amp[l] * C64::from_polar(1.0, -w[l] * t)).sum())
                .collect()
        })
        .collect())
}

/// Coherent ensemble average `p̄_n(t) = |⟨c_n(t)⟩|²`.
pub fn averaged_population(
    system: &DisorderedSystem,
    disorder: &DisorderSpec,
    initial: usize,
    t_grid: &[f64],
    keep_realizations: bool,
    exec: Execution,
) -> Result<EnsembleResult> {
    disorder.validate()?;
    system.validate()?;
    let m = system.lattice.num_sites();
    let n = system.emitters.len();
    let runs: Vec<Vec<Vec<C64>>> = try_map_indexed(exec, disorder.n_realizations, |k| {
        let offsets = sample_disorder(disorder, m, k).map_err(|e| wrap(k, e))?;
        emitter_amplitudes(system, Some(&offsets), initial, t_grid).map_err(|e| wrap(k, e))
    })?;
    let scale = 1.0 / runs.len() as f64;
    let mut mean = Vec::with_capacity(n);
    let mut incoherent = Vec::with_capacity(n);
    for e in 0..n {
        let amps: Vec<Vec<C64>> = runs.iter().map(|r| r[e].clone()).collect();
        let pops: Vec<Vec<f64>> = amps.iter().map(|r| r.iter().map(|z| z.norm_sqr()).collect()).collect();
        mean.push(pairwise_sum(&amps).into_iter().map(|z| (z * scale).norm_sqr()).collect());
        incoherent.push(pairwise_sum(&pops).into_iter().map(|p| p * scale).collect());
    }
    let realizations = keep_realizations.then(|| {
        runs.iter().map(|r| r.iter().map(|row| row.iter().map(|z| z.norm_sqr()).collect()).collect()).collect()
    });
    Ok(EnsembleResult { mean, incoherent_mean: Some(incoherent), realizations, count: disorder.n_realizations })
}

/// Local maxima whose topographic prominence is at least
/// `min_prominence · max(values)`, as `(index, value)`.
pub fn prominent_maxima(values: &[f64], min_prominence: f64) -> Vec<(usize, f64)> {
    let top = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let n = values.len();
    let mut out = Vec::new();
    for i in 0..n {
        let v = values[i];
        let left_ok = i == 0 || values[i - 1] < v;
        let right_ok = i + 1 == n || values[i + 1] <= v;
        if !(left_ok && right_ok) {
            continue;
        }
        let walk = |range: &mut dyn Iterator<Item = usize>| {
            let mut low = v;
            for j in range {
                if values[j] > v {
                    return low;
                }
                low = low.min(values[j]);
            }
            low
        };
        let left = walk(&mut (0..i).rev());
        let right = walk(&mut (i + 1..n));
        let prominence = v - left.max(right);
        if prominence >= min_prominence * top {
            out.push((i, v));
        }
    }
    out
}

/// Maximum of `p` within each window `[(k − ½)T, (k + ½)T]`, `k = 1..=count`.
pub fn revival_heights(p: &[f64], times: &[f64], period: f64, count: usize) -> Vec<f64> {
    (1..=count)
        .map(|k| {
            let (lo, hi) = ((k as f64 - 0.5) * period, (k as f64 + 0.5) * period);
            times.iter().zip(p).filter(|(t, _)| **t >= lo && **t < hi).map(|(_, v)| *v).fold(0.0, f64::max)
        })
        .collect()
}

/// Time at which `p` peaks again after first dropping below half of `p[0]`.
/// Fast ripples on top of the slow oscillation are ignored.
pub fn first_revival_time(p: &[f64], times: &[f64]) -> Option<f64> {
    let half = 0.5 * p.first()?;
    let dip = p.iter().position(|&v| v < half)?;
    let rise = dip + p[dip..].iter().position(|&v| v >= half)?;
    let end = p[rise..].iter().position(|&v| v < half).map_or(p.len(), |k| rise + k);
    let peak = (rise..end).max_by(|&a, &b| p[a].total_cmp(&p[b]))?;
    Some(times[peak])
}

/// Start of the first window of length `period` in which `max − min` of `p`
/// falls below `threshold`.
pub fn contrast_drop_time(p: &[f64], times: &[f64], period: f64, threshold: f64) -> Option<f64> {
    let t_end = *times.last()?;
    let mut k = 0usize;
    loop {
        let lo = k as f64 * period;
        let hi = lo + period;
        if hi > t_end + 1e-12 {
            return None;
        }
        let window: Vec<f64> = times.iter().zip(p).filter(|(t, _)| **t >= lo && **t <= hi).map(|(_, v)| *v).collect();
        let max = window.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = window.iter().copied().fold(f64::INFINITY, f64::min);
        if max - min < threshold {
            return Some(lo);
        }
        k += 1;
    }
}
