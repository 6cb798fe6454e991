//! Dispersive regime: photon-mediated complex hoppings between emitters
//! detuned from every Landau level, and hard-core boson dynamics under them.

use std::f64::consts::TAU;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::continuum::{greens_projected, GreensProjection};
use crate::error::{invalid, Error, Result};
use crate::lattice::Position;
use crate::linalg::{hermitian_eigen, hermitian_eigenvalues, CMat, C64};

const ZERO: C64 = C64::new(0.0, 0.0);

/// Ratio `|ω_e − ω_ℓ| / g` below which a warning is logged.
pub const DISPERSIVE_WARNING_RATIO: f64 = 5.0;

#[derive(Debug, Clone)]
pub struct EffectiveCouplingMatrix {
    /// Hermitian, zero diagonal.
    pub jtilde: CMat,
    /// Signed coupling of the closest pair, `g²/(ω_e − ω_ℓ) · α e^{−d²/4l_B²} L_ℓ(d²/2l_B²)`.
    pub g0: f64,
    /// `θ_nm`, antisymmetric.
    pub theta: Vec<Vec<f64>>,
}

impl EffectiveCouplingMatrix {
    pub fn len(&self) -> usize {
        self.jtilde.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Three sites with `J̃_nm = G_0 e^{iθ_nm}` and `θ_12 = θ_23 = θ_31 = θ_△/3`.
    pub fn equilateral(g0: f64, theta_triangle: f64) -> Self {
        let t = theta_triangle / 3.0;
        let theta = vec![vec![0.0, t, -t], vec![-t, 0.0, t], vec![t, -t, 0.0]];
        let jtilde = Mat::from_fn(3, 3, |a, b| if a == b { ZERO } else { C64::from_polar(g0, theta[a][b]) });
        Self { jtilde, g0, theta }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { jtilde: Mat::from_fn(self.len(), self.len(), |a, b| self.jtilde[(a, b)] * s), g0: self.g0 * s, theta: self.theta.clone() }
    }

    pub fn conjugate(&self) -> Self {
        let n = self.len();
        Self {
            jtilde: Mat::from_fn(n, n, |a, b| self.jtilde[(a, b)].conj()),
            g0: self.g0,
            theta: self.theta.iter().map(|r| r.iter().map(|t| -t).collect()).collect(),
        }
    }
}

/// `J̃_nm = g²/(ω_e − ω_ℓ) · G_ℓ(r_n, r_m)` for `n ≠ m`.
pub fn effective_couplings(positions: &[Position], ell: usize, alpha: f64, g: f64, omega_e: f64, omega_ell: f64) -> Result<EffectiveCouplingMatrix> {
    if positions.len() < 2 {
        return invalid("effective couplings need at least two emitters");
    }
    let detuning = omega_e - omega_ell;
    if detuning.abs() <= f64::EPSILON * omega_e.abs().max(omega_ell.abs()).max(1.0) {
        return Err(Error::Resonant { detuning });
    }
    if detuning.abs() < DISPERSIVE_WARNING_RATIO * g.abs() {
        log::warn!("dispersive couplings used with |ω_e − ω_ℓ|/g = {:.2} < {DISPERSIVE_WARNING_RATIO}", detuning.abs() / g.abs());
    }
    let proj = GreensProjection::new(ell, alpha)?;
    let scale = g * g / detuning;
    let n = positions.len();
    let mut theta = vec![vec![0.0; n]; n];
    let mut closest = f64::INFINITY;
    for a in 0..n {
        for b in 0..n {
            if a != b {
                theta[a][b] = proj.phase(positions[a], positions[b]);
                closest = closest.min(distance(positions[a], positions[b]));
            }
        }
    }
    let jtilde = Mat::from_fn(n, n, |a, b| if a == b { ZERO } else { scale * greens_projected(&proj, positions[a], positions[b]) });
    Ok(EffectiveCouplingMatrix { jtilde, g0: scale * proj.amplitude(closest), theta })
}

fn distance(a: Position, b: Position) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// `det J̃` for three emitters; `2 G_0³ cos θ_△` when equidistant.
pub fn chirality_determinant(j: &EffectiveCouplingMatrix) -> Result<C64> {
    if j.len() != 3 {
        return invalid(format!("chirality determinant is defined for three emitters, got {}", j.len()));
    }
    let m = &j.jtilde;
    Ok(m[(0, 0)] * (m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)]) - m[(0, 1)] * (m[(1, 0)] * m[(2, 2)] - m[(1, 2)] * m[(2, 0)])
        + m[(0, 2)] * (m[(1, 0)] * m[(2, 1)] - m[(1, 1)] * m[(2, 0)]))
}

/// `θ_△ = θ_12 + θ_23 + θ_31`.
pub fn triangle_phase(j: &EffectiveCouplingMatrix) -> Result<f64> {
    if j.len() != 3 {
        return invalid("triangle phase needs three emitters");
    }
    Ok(j.theta[0][1] + j.theta[1][2] + j.theta[2][0])
}

/// Hard-core occupation basis: single sites, or pairs `n < m` in
/// lexicographic order.
pub fn hardcore_basis(num_emitters: usize, sector: usize) -> Result<Vec<Vec<usize>>> {
    match sector {
        1 => Ok((0..num_emitters).map(|a| vec![a]).collect()),
        2 => Ok((0..num_emitters).flat_map(|a| (a + 1..num_emitters).map(move |b| vec![a, b])).collect()),
        s => invalid(format!("hard-core sector must be 1 or 2, got {s}")),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HardCoreState {
    pub sector: usize,
    pub amplitudes: Vec<C64>,
}

impl HardCoreState {
    /// All listed emitters excited.
    pub fn excited(num_emitters: usize, sites: &[usize]) -> Result<Self> {
        let sector = sites.len();
        let basis = hardcore_basis(num_emitters, sector)?;
        let mut key = sites.to_vec();
        key.sort_unstable();
        let idx = basis.iter().position(|s| *s == key).ok_or_else(|| Error::InvalidArgument(format!("invalid occupation {sites:?}")))?;
        let mut amplitudes = vec![ZERO; basis.len()];
        amplitudes[idx] = C64::new(1.0, 0.0);
        Ok(Self { sector, amplitudes })
    }
}

/// `H_eff = Σ J̃_nm σ₊ⁿ σ₋ᵐ` on the hard-core sector.
pub fn hardcore_hamiltonian(j: &EffectiveCouplingMatrix, sector: usize) -> Result<(Vec<Vec<usize>>, CMat)> {
    let basis = hardcore_basis(j.len(), sector)?;
    let d = basis.len();
    let mut h = Mat::<C64>::zeros(d, d);
    for (col, occ) in basis.iter().enumerate() {
        for &from in occ {
            for to in 0..j.len() {
                if occ.contains(&to) {
                    continue;
                }
                let mut target: Vec<usize> = occ.iter().map(|&s| if s == from { to } else { s }).collect();
                target.sort_unstable();
                let row = basis.iter().position(|s| *s == target).expect("target in basis");
                h[(row, col)] += j.jtilde[(to, from)];
            }
        }
    }
    Ok((basis, h))
}

/// Emitter populations `p_n(t)` as `out[k][n]`.
pub fn evolve_hardcore(j: &EffectiveCouplingMatrix, initial: &HardCoreState, t_grid: &[f64]) -> Result<Vec<Vec<f64>>> {
    let (basis, h) = hardcore_hamiltonian(j, initial.sector)?;
    if initial.amplitudes.len() != basis.len() {
        return invalid("initial hard-core state does not match the sector dimension");
    }
    let (w, v) = hermitian_eigen(&h)?;
    let d = basis.len();
    let amp: Vec<C64> = (0..d).map(|l| (0..d).map(|i| v[(i, l)].conj() * initial.amplitudes[i]).sum()).collect();
    Ok(t_grid
        .iter()
        .map(|&t| {
            let rotated: Vec<C64> = (0..d).map(|l| amp[l] * C64::from_polar(1.0, -w[l] * t)).collect();
            let mut pops = vec![0.0; j.len()];
            for i in 0..d {
                let c: C64 = (0..d).map(|l| v[(i, l)] * rotated[l]).sum();
                for &s in &basis[i] {
                    pops[s] += c.norm_sqr();
                }
            }
            pops
        })
        .collect())
}

/// `|c_n(t)| = |1/3 + (2/3) cos(√3 G_0 t + φ_n)|` with `φ = (0, 4π/3, 2π/3)`.
pub fn chiral_closed_form(g0: f64, t_grid: &[f64]) -> [Vec<f64>; 3] {
    let shift = [0.0, 2.0 * TAU / 3.0, TAU / 3.0];
    shift.map(|phi| t_grid.iter().map(|&t| (1.0 / 3.0 + 2.0 / 3.0 * (3f64.sqrt() * g0 * t + phi).cos()).abs()).collect())
}

/// `nx × ny` square grid of spacing `d` centered on the origin.
pub fn square_emitter_lattice(nx: usize, ny: usize, d: f64) -> Vec<Position> {
    let (cx, cy) = ((nx as f64 - 1.0) / 2.0, (ny as f64 - 1.0) / 2.0);
    (0..ny).flat_map(|y| (0..nx).map(move |x| [d * (x as f64 - cx), d * (y as f64 - cy)])).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmitterLatticeSpectrum {
    /// Single-excitation eigenvalues of `H_eff` divided by `|J̃_nn|`.
    pub eigenvalues: Vec<f64>,
    /// `|J̃|` of a nearest-neighbour pair.
    pub nearest_neighbour: f64,
    /// `α (d/l0)²`.
    pub alpha_eff: f64,
}

/// Spectrum of a square emitter lattice of spacing `d`. With `cutoff`,
/// couplings between emitters farther apart than `cutoff` are dropped.
pub fn emitter_lattice_spectrum(
    nx: usize,
    ny: usize,
    d: f64,
    ell: usize,
    alpha: f64,
    g: f64,
    detuning: f64,
    cutoff: Option<f64>,
) -> Result<EmitterLatticeSpectrum> {
    if nx * ny < 2 || !(d > 0.0) {
        return invalid("emitter lattice needs at least two emitters and positive spacing");
    }
    let positions = square_emitter_lattice(nx, ny, d);
    let mut j = effective_couplings(&positions, ell, alpha, g, detuning, 0.0)?;
    if let Some(rc) = cutoff {
        for a in 0..positions.len() {
            for b in 0..positions.len() {
                if distance(positions[a], positions[b]) > rc {
                    j.jtilde[(a, b)] = ZERO;
                }
            }
        }
    }
    let nn = j.g0.abs();
    if nn == 0.0 {
        return invalid("nearest-neighbour coupling vanishes; spectrum cannot be normalized");
    }
    let (_, h) = hardcore_hamiltonian(&j, 1)?;
    let eigenvalues = hermitian_eigenvalues(&h)?.into_iter().map(|e| e / nn).collect();
    Ok(EmitterLatticeSpectrum { eigenvalues, nearest_neighbour: nn, alpha_eff: alpha * d * d })
}

/// Magnetic phase enclosed by a triangle, `A_△ / l_B²` with the signed area
/// positive for clockwise vertex order.
pub fn enclosed_flux(vertices: [Position; 3], alpha: f64) -> f64 {
    let [a, b, c] = vertices;
    let ccw_area = 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
    -ccw_area * TAU * alpha
}

/// Side length of an equilateral triangle enclosing the phase `θ_△`.
pub fn equilateral_side_for_flux(theta_triangle: f64, alpha: f64) -> f64 {
    (4.0 * theta_triangle.abs() / (3f64.sqrt() * TAU * alpha)).sqrt()
}
