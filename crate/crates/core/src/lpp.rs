//! Landau-photon polaritons: emitters coupled to a single Landau level
//! through `N` collective photon modes `B_n`.
//!
//! Energies in [`build_lpp_hamiltonian`] are excitation energies: the ground
//! state `|g, vac⟩` is at zero, a spin flip costs `ω_e` and a photon `ω_ℓ`.

use std::collections::HashMap;
use std::f64::consts::TAU;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::continuum::{greens_projected, landau_frequency, CorrectionOrder, GreensProjection, LandauSpectrumParams};
use crate::dynamics::{rabi_frequency, EmitterSet};
use crate::error::{invalid, Error, Result};
use crate::exec::{try_map_indexed, Execution};
use crate::lattice::{LatticeSpec, Position};
use crate::linalg::{general_eigenvalues, hermitian_eigen, lu_solve, CMat, C64};

const ZERO: C64 = C64::new(0.0, 0.0);

/// `G_nm = G_ℓ(r_n, r_m)`.
pub fn gram_matrix(positions: &[Position], proj: &GreensProjection) -> CMat {
    let n = positions.len();
    Mat::from_fn(n, n, |a, b| greens_projected(proj, positions[a], positions[b]))
}

/// Principal square root of a Gram matrix.
#[derive(Debug, Clone)]
pub struct CouplingMatrix {
    pub k: CMat,
    /// Moore-Penrose inverse of `k`; equals `k⁻¹` at full rank.
    pub k_pinv: CMat,
    pub rank: usize,
    /// Eigenvalues of the Gram matrix, ascending, after truncation.
    pub gram_eigenvalues: Vec<f64>,
}

impl CouplingMatrix {
    pub fn is_full_rank(&self) -> bool {
        self.rank == self.k.nrows()
    }
}

/// `K = U diag(√χ) U†`. Eigenvalues below `1e−10 · max diag(G)` are set to
/// zero; eigenvalues below `−1e−12` are rejected.
pub fn coupling_matrix_k(gram: &CMat) -> Result<CouplingMatrix> {
    let n = gram.nrows();
    if n == 0 || gram.ncols() != n {
        return invalid("Gram matrix must be square and non-empty");
    }
    let (mut chi, u) = hermitian_eigen(gram)?;
    if let Some(&lowest) = chi.first() {
        if lowest < -1e-12 {
            return Err(Error::NotPositiveSemidefinite { eigenvalue: lowest });
        }
    }
    let scale = (0..n).map(|i| gram[(i, i)].re).fold(0.0f64, f64::max);
    let cut = 1e-10 * scale;
    let mut rank = 0;
    for c in chi.iter_mut() {
        if *c < cut {
            *c = 0.0;
        } else {
            rank += 1;
        }
    }
    let root: Vec<f64> = chi.iter().map(|c| c.sqrt()).collect();
    let inv: Vec<f64> = root.iter().map(|&r| if r > 0.0 { 1.0 / r } else { 0.0 }).collect();
    let build = |d: &[f64]| Mat::from_fn(n, n, |a, b| (0..n).map(|l| u[(a, l)] * d[l] * u[(b, l)].conj()).sum());
    Ok(CouplingMatrix { k: build(&root), k_pinv: build(&inv), rank, gram_eigenvalues: chi })
}

#[derive(Debug, Clone)]
pub struct LppModel {
    pub ell: usize,
    pub alpha: f64,
    /// Emitter positions measured from the symmetric-gauge origin.
    pub positions: Vec<Position>,
    pub omega_e: f64,
    pub omega_ell: f64,
    pub g: f64,
    pub gamma_e: f64,
    pub gamma_p: f64,
    pub gram: CMat,
    pub coupling: CouplingMatrix,
}

impl LppModel {
    pub fn new(positions: Vec<Position>, ell: usize, alpha: f64, omega_e: f64, omega_ell: f64, g: f64) -> Result<Self> {
        if positions.is_empty() {
            return invalid("LPP model needs at least one emitter");
        }
        let proj = GreensProjection::new(ell, alpha)?;
        let gram = gram_matrix(&positions, &proj);
        let coupling = coupling_matrix_k(&gram)?;
        Ok(Self { ell, alpha, positions, omega_e, omega_ell, g, gamma_e: 0.0, gamma_p: 0.0, gram, coupling })
    }

    /// Model defined by its Gram matrix alone. Functions that need emitter
    /// positions (mode functions, correlations) are unavailable.
    pub fn from_gram(gram: CMat, ell: usize, alpha: f64, omega_e: f64, omega_ell: f64, g: f64) -> Result<Self> {
        GreensProjection::new(ell, alpha)?;
        let coupling = coupling_matrix_k(&gram)?;
        Ok(Self { ell, alpha, positions: Vec::new(), omega_e, omega_ell, g, gamma_e: 0.0, gamma_p: 0.0, gram, coupling })
    }

    /// Model for emitters on a lattice, with `ω_ℓ` from the quartic formula.
    pub fn from_lattice(spec: &LatticeSpec, emitters: &EmitterSet, ell: usize) -> Result<Self> {
        emitters.validate(spec)?;
        let params = LandauSpectrumParams::from_lattice(spec, CorrectionOrder::Quartic);
        let omega_ell = landau_frequency(ell, &params, spec.hopping);
        let positions = emitters.positions.iter().map(|&s| spec.position(s)).collect();
        let mut m = Self::new(positions, ell, spec.alpha, emitters.omega_e, omega_ell, emitters.g)?;
        m.gamma_e = emitters.gamma_e;
        Ok(m)
    }

    pub fn with_losses(mut self, gamma_e: f64, gamma_p: f64) -> Self {
        self.gamma_e = gamma_e;
        self.gamma_p = gamma_p;
        self
    }

    pub fn num_emitters(&self) -> usize {
        self.gram.nrows()
    }

    pub fn rabi_frequency(&self) -> f64 {
        rabi_frequency(self.alpha, self.g)
    }

    pub fn magnetic_length(&self) -> f64 {
        1.0 / (TAU * self.alpha).sqrt()
    }

    pub fn is_lossless(&self) -> bool {
        self.gamma_e == 0.0 && self.gamma_p == 0.0
    }

    /// Coefficients `u_n(r) = Σ_m (K⁻¹)_nm G_ℓ(r_m, r)` of the mode
    /// `B_n = Σ_i u_n(r_i) Ψ(r_i)`, one row per mode.
    pub fn mode_coefficients(&self, points: &[Position]) -> Result<CMat> {
        if self.positions.len() != self.gram.nrows() {
            return invalid("model was built without emitter positions");
        }
        let proj = GreensProjection::new(self.ell, self.alpha)?;
        let n = self.num_emitters();
        let g = Mat::from_fn(n, points.len(), |m, i| greens_projected(&proj, self.positions[m], points[i]));
        Ok(&self.coupling.k_pinv * &g)
    }
}

/// Occupation state: excited emitters (ascending, no repeats) and photon
/// mode labels (ascending, repeats allowed).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FockState {
    pub spins: Vec<usize>,
    pub bosons: Vec<usize>,
}

impl FockState {
    fn boson_count(&self, m: usize) -> usize {
        self.bosons.iter().filter(|&&b| b == m).count()
    }

    fn without_boson(&self, m: usize) -> Self {
        let mut s = self.clone();
        let pos = s.bosons.iter().position(|&b| b == m).expect("boson present");
        s.bosons.remove(pos);
        s
    }

    fn with_spin(&self, n: usize) -> Self {
        let mut s = self.clone();
        s.spins.push(n);
        s.spins.sort_unstable();
        s
    }
}

/// Ordered basis of an excitation-number sector. Sector 1: `σ₊ⁿ|0⟩` then
/// `B†ₙ|0⟩`. Sector 2: spin pairs `n < m`, then spin `n` with boson `m`,
/// then boson pairs `n ≤ m`, each block in lexicographic order. A doubly
/// occupied mode is `(B†ₙ)²/√2 |0⟩`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FewExcitationBasis {
    pub sector: usize,
    pub num_emitters: usize,
    pub states: Vec<FockState>,
}

impl FewExcitationBasis {
    pub fn new(num_emitters: usize, sector: usize) -> Result<Self> {
        let n = num_emitters;
        let mut states = Vec::new();
        match sector {
            1 => {
                states.extend((0..n).map(|a| FockState { spins: vec![a], bosons: vec![] }));
                states.extend((0..n).map(|a| FockState { spins: vec![], bosons: vec![a] }));
            }
            2 => {
                for a in 0..n {
                    for b in a + 1..n {
                        states.push(FockState { spins: vec![a, b], bosons: vec![] });
                    }
                }
                for a in 0..n {
                    for b in 0..n {
                        states.push(FockState { spins: vec![a], bosons: vec![b] });
                    }
                }
                for a in 0..n {
                    for b in a..n {
                        states.push(FockState { spins: vec![], bosons: vec![a, b] });
                    }
                }
            }
            s => return invalid(format!("excitation sector must be 1 or 2, got {s}")),
        }
        Ok(Self { sector, num_emitters, states })
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn index_of(&self, state: &FockState) -> Option<usize> {
        self.states.iter().position(|s| s == state)
    }
}

/// Dense `H_LPP` on the requested sector, including `−iγ_e/2` per excited
/// emitter and `−iγ_p/2` per photon.
pub fn build_lpp_hamiltonian(model: &LppModel, sector: usize) -> Result<(FewExcitationBasis, CMat)> {
    let basis = FewExcitationBasis::new(model.num_emitters(), sector)?;
    let lookup: HashMap<&FockState, usize> = basis.states.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let d = basis.dim();
    let n = model.num_emitters();
    let k = &model.coupling.k;
    let spin_e = C64::new(model.omega_e, -0.5 * model.gamma_e);
    let photon_e = C64::new(model.omega_ell, -0.5 * model.gamma_p);
    let mut h = Mat::<C64>::zeros(d, d);
    for (col, state) in basis.states.iter().enumerate() {
        h[(col, col)] = spin_e * state.spins.len() as f64 + photon_e * state.bosons.len() as f64;
        // g K_nm σ₊ⁿ B_m and its conjugate.
        for m in 0..n {
            let occ = state.boson_count(m);
            if occ == 0 {
                continue;
            }
            let lowered = state.without_boson(m);
            for a in 0..n {
                if lowered.spins.contains(&a) {
                    continue;
                }
                let target = lowered.with_spin(a);
                let row = lookup[&target];
                let v = model.g * k[(a, m)] * (occ as f64).sqrt();
                h[(row, col)] += v;
                h[(col, row)] += v.conj();
            }
        }
    }
    Ok((basis, h))
}

#[derive(Debug, Clone)]
pub struct LppSpectrum {
    /// Sorted by real part.
    pub eigenvalues: Vec<C64>,
    /// Present for lossless models.
    pub eigenvectors: Option<CMat>,
}

pub fn lpp_spectrum(model: &LppModel, sector: usize) -> Result<(FewExcitationBasis, LppSpectrum)> {
    let (basis, h) = build_lpp_hamiltonian(model, sector)?;
    let spectrum = if model.is_lossless() {
        let (w, v) = hermitian_eigen(&h)?;
        LppSpectrum { eigenvalues: w.into_iter().map(|x| C64::new(x, 0.0)).collect(), eigenvectors: Some(v) }
    } else {
        LppSpectrum { eigenvalues: general_eigenvalues(&h)?, eigenvectors: None }
    };
    Ok((basis, spectrum))
}

/// Roots `λ_ν = 2 cos((θ + 2πν)/3)` of `λ³ − 3λ − 2 cos θ = 0`, ascending.
pub fn triangle_eigenvalues(theta_triangle: f64) -> [f64; 3] {
    let mut l = [0, 1, 2].map(|nu| 2.0 * ((theta_triangle + TAU * nu as f64) / 3.0).cos());
    l.sort_by(f64::total_cmp);
    l
}

/// Sector-1 frequencies of three equidistant emitters at resonance
/// `ω_ℓ = ω_e`: `ω_e − i(γ_e+γ_p)/4 ± Ω √(1 + Λ_ν − (γ_e−γ_p)²/16Ω²)` with
/// `Λ_ν = e^{−d²/4l_B²} L_ℓ(d²/2l_B²) λ_ν`. Sorted by real, then imaginary part.
pub fn lpp_closed_form_spectrum(
    d_over_lb: f64,
    ell: usize,
    theta_triangle: f64,
    omega: f64,
    omega_e: f64,
    losses: Option<(f64, f64)>,
) -> [C64; 6] {
    let (ge, gp) = losses.unwrap_or((0.0, 0.0));
    let x = 0.5 * d_over_lb * d_over_lb;
    let overlap = crate::continuum::laguerre_gaussian(ell, 0, x);
    let center = C64::new(omega_e, -0.25 * (ge + gp));
    let bar = ge - gp;
    let mut out = Vec::with_capacity(6);
    for lambda in triangle_eigenvalues(theta_triangle) {
        let arg = C64::new(1.0 + overlap * lambda - bar * bar / (16.0 * omega * omega), 0.0);
        let split = omega * arg.sqrt();
        out.push(center - split);
        out.push(center + split);
    }
    out.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    [out[0], out[1], out[2], out[3], out[4], out[5]]
}

/// `S(ω) = |⟨σ₋ⁿ (H − ω − i(γ_e/2)Σσ₊σ₋)⁻¹ σ₊ⁿ⟩|²` from a sector-1 matrix.
pub fn excitation_spectrum(
    basis: &FewExcitationBasis,
    h: &CMat,
    emitter: usize,
    omega_grid: &[f64],
    gamma_e: f64,
    exec: Execution,
) -> Result<Vec<f64>> {
    if basis.sector != 1 || h.nrows() != basis.dim() {
        return invalid("excitation spectrum needs a sector-1 Hamiltonian and basis");
    }
    if !(gamma_e > 0.0) {
        return invalid("excitation spectrum requires gamma_e > 0");
    }
    let probe = basis
        .index_of(&FockState { spins: vec![emitter], bosons: vec![] })
        .ok_or_else(|| Error::InvalidArgument(format!("no emitter {emitter}")))?;
    // Without emitter-photon coupling the photon block is irrelevant and may
    // be exactly singular on the grid.
    let spins: Vec<usize> = (0..basis.dim()).filter(|&i| !basis.states[i].spins.is_empty()).collect();
    let coupled = (0..basis.dim())
        .filter(|i| !spins.contains(i))
        .any(|p| spins.iter().any(|&s| h[(s, p)] != ZERO || h[(p, s)] != ZERO));
    let active: Vec<usize> = if coupled { (0..basis.dim()).collect() } else { spins };
    let d = active.len();
    let local = active.iter().position(|&i| i == probe).expect("probe is a spin state");
    let rhs = Mat::from_fn(d, 1, |i, _| if i == local { C64::new(1.0, 0.0) } else { ZERO });
    try_map_indexed(exec, omega_grid.len(), |k| {
        let w = omega_grid[k];
        let a = Mat::from_fn(d, d, |i, j| {
            let (gi, gj) = (active[i], active[j]);
            let mut v = h[(gi, gj)];
            if gi == gj {
                v -= w;
                if !basis.states[gi].spins.is_empty() {
                    v -= C64::new(0.0, 0.5 * gamma_e);
                }
            }
            v
        });
        let x = lu_solve(&a, &rhs)[(local, 0)];
        if !(x.re.is_finite() && x.im.is_finite()) {
            return invalid(format!("resolvent is singular at omega = {w}"));
        }
        Ok(x.norm_sqr())
    })
}

/// `C(r_i, r_ref) = ⟨Ψ†(r_ref)Ψ†(r_i)Ψ(r_i)Ψ(r_ref)⟩ / ⟨Ψ†(r_ref)Ψ(r_ref)⟩` for a
/// sector-2 state, with the field projected on the model's photon modes.
pub fn two_photon_correlation(
    state: &[C64],
    basis: &FewExcitationBasis,
    model: &LppModel,
    grid: &[Position],
    r_ref: Position,
) -> Result<Vec<f64>> {
    if basis.sector != 2 || state.len() != basis.dim() {
        return invalid("two-photon correlation needs a sector-2 state");
    }
    let n = model.num_emitters();
    // Ψ(r) ≈ Σ_n conj(u_n(r)) B_n
    let w = |u: &CMat, m: usize, i: usize| u[(m, i)].conj();
    let u_ref = model.mode_coefficients(&[r_ref])?;
    let u_grid = model.mode_coefficients(grid)?;

    let mut single = vec![ZERO; 2 * n];
    for (amp, s) in state.iter().zip(&basis.states) {
        match (s.spins.as_slice(), s.bosons.as_slice()) {
            (&[a], &[m]) => single[a] += amp * w(&u_ref, m, 0),
            (&[], &[a, b]) if a == b => single[n + a] += amp * 2f64.sqrt() * w(&u_ref, a, 0),
            (&[], &[a, b]) => {
                single[n + b] += amp * w(&u_ref, a, 0);
                single[n + a] += amp * w(&u_ref, b, 0);
            }
            _ => {}
        }
    }
    let density: f64 = single.iter().map(|z| z.norm_sqr()).sum();
    if density < 1e-14 {
        return Err(Error::UndefinedReference { density });
    }
    let pairs: Vec<(usize, usize, C64)> = state
        .iter()
        .zip(&basis.states)
        .filter(|(_, s)| s.spins.is_empty())
        .map(|(amp, s)| (s.bosons[0], s.bosons[1], *amp))
        .collect();
    Ok((0..grid.len())
        .map(|i| {
            let a: C64 = pairs
                .iter()
                .map(|&(p, q, amp)| {
                    let v = if p == q {
                        2f64.sqrt() * w(&u_grid, p, i) * w(&u_ref, p, 0)
                    } else {
                        w(&u_grid, p, i) * w(&u_ref, q, 0) + w(&u_grid, q, i) * w(&u_ref, p, 0)
                    };
                    amp * v
                })
                .sum();
            a.norm_sqr() / density
        })
        .collect())
}

/// `max |Σ_i u_n(r_i) u_m(r_i)* − δ_nm|` over the lattice sites.
pub fn lpp_mode_commutator_check(model: &LppModel, spec: &LatticeSpec) -> Result<f64> {
    if !model.coupling.is_full_rank() {
        return Err(Error::RankDeficient { rank: model.coupling.rank, dim: model.num_emitters() });
    }
    let sites: Vec<Position> = (0..spec.num_sites()).map(|i| spec.position_of_index(i)).collect();
    let u = model.mode_coefficients(&sites)?;
    let overlap = &u * u.adjoint();
    let n = model.num_emitters();
    let mut worst = 0.0f64;
    for a in 0..n {
        for b in 0..n {
            let target = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((overlap[(a, b)] - target).norm());
        }
    }
    Ok(worst)
}

/// Gram matrix of three equidistant emitters at separation `d` with
/// enclosed phase `θ_△`, split evenly over the three bonds.
pub fn equidistant_triangle_gram(alpha: f64, ell: usize, d_over_lb: f64, theta_triangle: f64) -> CMat {
    let x = 0.5 * d_over_lb * d_over_lb;
    let off = alpha * crate::continuum::laguerre_gaussian(ell, 0, x);
    let t = theta_triangle / 3.0;
    Mat::from_fn(3, 3, |a, b| {
        if a == b {
            C64::new(alpha, 0.0)
        } else if (a + 1) % 3 == b {
            C64::from_polar(off, t)
        } else {
            C64::from_polar(off, -t)
        }
    })
}

/// Vertices of an equilateral triangle of side `d` centered at `center`,
/// ordered counter-clockwise.
pub fn equilateral_triangle(center: Position, d: f64) -> Vec<Position> {
    let r = d / 3f64.sqrt();
    (0..3)
        .map(|k| {
            let a = TAU * k as f64 / 3.0 + 0.5 * std::f64::consts::PI;
            [center[0] + r * a.cos(), center[1] + r * a.sin()]
        })
        .collect()
}
