//! Single-excitation emitter-photon dynamics on the full lattice.
//!
//! The state is evolved in a frame rotating at `ω_p`; populations, photon
//! densities and currents do not depend on this choice.

use std::f64::consts::FRAC_PI_2;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::continuum::{greens_projected, GreensProjection};
use crate::error::{invalid, Error, Result};
use crate::lattice::{DissipationProfile, Gauge, LatticeSpec, Site};
use crate::linalg::{hermitian_eigen, lu_solve, CMat, SparseHermitianOperator, C64};
use crate::spectrum::SpectrumResult;

const I: C64 = C64::new(0.0, 1.0);
const ZERO: C64 = C64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmitterSet {
    pub positions: Vec<Site>,
    pub omega_e: f64,
    pub g: f64,
    #[serde(default)]
    pub gamma_e: f64,
}

impl EmitterSet {
    pub fn new(positions: Vec<Site>, omega_e: f64, g: f64) -> Self {
        Self { positions, omega_e, g, gamma_e: 0.0 }
    }

    pub fn single(site: Site, omega_e: f64, g: f64) -> Self {
        Self::new(vec![site], omega_e, g)
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn validate(&self, spec: &LatticeSpec) -> Result<()> {
        if self.positions.is_empty() {
            return invalid("emitter set is empty");
        }
        for (n, s) in self.positions.iter().enumerate() {
            if !spec.contains(*s) {
                return invalid(format!("emitter {n} at ({}, {}) lies outside the lattice", s.x, s.y));
            }
            if self.positions[..n].contains(s) {
                return invalid(format!("emitter {n} duplicates an earlier position"));
            }
        }
        if self.gamma_e < 0.0 {
            return invalid(format!("gamma_e must be non-negative, got {}", self.gamma_e));
        }
        Ok(())
    }

    pub fn site_indices(&self, spec: &LatticeSpec) -> Vec<usize> {
        self.positions.iter().map(|&s| spec.index(s)).collect()
    }
}

/// Emitter amplitudes `c_n` and photon wavefunction `φ(r_i)` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleExcitationState {
    pub c: Vec<C64>,
    pub phi: Vec<C64>,
    pub t: f64,
}

impl SingleExcitationState {
    /// Emitter `n` excited, photon vacuum.
    pub fn excited_emitter(n: usize, num_emitters: usize, num_sites: usize) -> Self {
        let mut c = vec![ZERO; num_emitters];
        c[n] = C64::new(1.0, 0.0);
        Self { c, phi: vec![ZERO; num_sites], t: 0.0 }
    }

    pub fn populations(&self) -> Vec<f64> {
        self.c.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn photon_norm(&self) -> f64 {
        self.phi.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.populations().iter().sum::<f64>() + self.photon_norm()
    }

    fn to_vec(&self) -> Vec<C64> {
        self.c.iter().chain(&self.phi).copied().collect()
    }

    fn from_vec(v: &[C64], n: usize, t: f64) -> Self {
        Self { c: v[..n].to_vec(), phi: v[n..].to_vec(), t }
    }
}

/// Which full states a [`Trajectory`] keeps.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Keep {
    #[default]
    All,
    None,
    /// Indices into the time grid.
    At(Vec<usize>),
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// `c_n(t_k)` as `emitter[k][n]`.
    pub emitter: Vec<Vec<C64>>,
    pub photon_norm: Vec<f64>,
    pub states: Vec<SingleExcitationState>,
}

impl Trajectory {
    pub fn population(&self, n: usize) -> Vec<f64> {
        self.emitter.iter().map(|c| c[n].norm_sqr()).collect()
    }

    pub fn total_norm(&self) -> Vec<f64> {
        self.emitter
            .iter()
            .zip(&self.photon_norm)
            .map(|(c, p)| c.iter().map(|z| z.norm_sqr()).sum::<f64>() + p)
            .collect()
    }

    pub fn state_at(&self, t: f64) -> Option<&SingleExcitationState> {
        self.states.iter().find(|s| s.t == t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Propagator {
    /// Fixed-step fourth-order Runge-Kutta.
    #[default]
    Rk4,
    /// Exact exponential from a dense eigendecomposition; lossless only.
    Spectral,
}

#[derive(Debug, Clone, Default)]
pub struct EvolutionOptions {
    pub propagator: Propagator,
    /// Upper bound on the RK4 step; defaults to `0.02 / ‖A‖`.
    pub max_step: Option<f64>,
    pub keep: Keep,
}

/// The non-Hermitian single-excitation operator in the rotating frame,
/// acting on `(c_1..c_N, φ_1..φ_M)`.
#[derive(Debug, Clone)]
pub struct SingleExcitationGenerator {
    photon: SparseHermitianOperator,
    photon_loss: Vec<f64>,
    sites: Vec<usize>,
    emitter_diag: C64,
    g: f64,
}

impl SingleExcitationGenerator {
    pub fn new(spec: &LatticeSpec, h: &SparseHermitianOperator, emitters: &EmitterSet, dissipation: &DissipationProfile) -> Result<Self> {
        emitters.validate(spec)?;
        if h.dim() != spec.num_sites() {
            return invalid(format!("Hamiltonian dimension {} does not match {} lattice sites", h.dim(), spec.num_sites()));
        }
        let frame = vec![-spec.omega_p; h.dim()];
        let photon_loss = if dissipation.is_lossless() { vec![0.0; h.dim()] } else { dissipation.site_rates(spec) };
        Ok(Self {
            photon: h.with_diagonal_shift(&frame),
            photon_loss,
            sites: emitters.site_indices(spec),
            emitter_diag: C64::new(emitters.omega_e - spec.omega_p, -0.5 * emitters.gamma_e),
            g: emitters.g,
        })
    }

    pub fn num_emitters(&self) -> usize {
        self.sites.len()
    }

    pub fn dim(&self) -> usize {
        self.sites.len() + self.photon.dim()
    }

    pub fn is_lossless(&self) -> bool {
        self.emitter_diag.im == 0.0 && self.photon_loss.iter().all(|&g| g == 0.0)
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[C64], y: &mut [C64]) {
        let n = self.sites.len();
        let (xc, xp) = x.split_at(n);
        let (yc, yp) = y.split_at_mut(n);
        self.photon.apply(xp, yp);
        for (i, v) in yp.iter_mut().enumerate() {
            *v -= I * (0.5 * self.photon_loss[i]) * xp[i];
        }
        for (k, &s) in self.sites.iter().enumerate() {
            yc[k] = self.emitter_diag * xc[k] + self.g * xp[s];
            yp[s] += self.g * xc[k];
        }
    }

    pub fn to_dense(&self) -> CMat {
        let n = self.sites.len();
        let d = self.dim();
        let mut a = Mat::<C64>::zeros(d, d);
        for (i, j, v) in self.photon.entries() {
            a[(n + i, n + j)] = v;
        }
        for i in 0..self.photon.dim() {
            a[(n + i, n + i)] -= I * (0.5 * self.photon_loss[i]);
        }
        for (k, &s) in self.sites.iter().enumerate() {
            a[(k, k)] = self.emitter_diag;
            a[(k, n + s)] = C64::new(self.g, 0.0);
            a[(n + s, k)] = C64::new(self.g, 0.0);
        }
        a
    }

    /// Bound on the spectral radius of `A`.
    pub fn norm_bound(&self) -> f64 {
        let (lo, hi) = self.photon.spectral_bounds();
        let loss = self.photon_loss.iter().fold(0.0f64, |m, &g| m.max(g));
        lo.abs().max(hi.abs()) + 0.5 * loss + self.emitter_diag.norm() + 2.0 * self.g.abs()
    }

    /// `⟨ψ|A|ψ⟩`; real and conserved when lossless.
    pub fn expectation(&self, state: &SingleExcitationState) -> C64 {
        let x = state.to_vec();
        let mut y = vec![ZERO; x.len()];
        self.apply(&x, &mut y);
        x.iter().zip(&y).map(|(a, b)| a.conj() * b).sum()
    }
}

fn check_grid(t0: f64, t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return invalid("time grid is empty");
    }
    if t_grid[0] < t0 {
        return invalid(format!("time grid starts at {} before the initial state time {t0}", t_grid[0]));
    }
    if t_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return invalid("time grid must be strictly increasing");
    }
    Ok(())
}

/// Integrates `i dψ/dt = A ψ` for the coupled emitter-lattice system and
/// records the state on `t_grid`.
pub fn evolve_single_excitation(
    spec: &LatticeSpec,
    h: &SparseHermitianOperator,
    emitters: &EmitterSet,
    dissipation: &DissipationProfile,
    initial: &SingleExcitationState,
    t_grid: &[f64],
    opts: &EvolutionOptions,
) -> Result<Trajectory> {
    let gen = SingleExcitationGenerator::new(spec, h, emitters, dissipation)?;
    evolve_with_generator(&gen, initial, t_grid, opts)
}

pub fn evolve_with_generator(
    gen: &SingleExcitationGenerator,
    initial: &SingleExcitationState,
    t_grid: &[f64],
    opts: &EvolutionOptions,
) -> Result<Trajectory> {
    let n = gen.num_emitters();
    if initial.c.len() != n || initial.phi.len() != gen.photon.dim() {
        return invalid("initial state does not match the emitter set and lattice");
    }
    if initial.norm_sqr() > 1.0 + 1e-12 {
        return invalid(format!("initial norm² {} exceeds 1", initial.norm_sqr()));
    }
    check_grid(initial.t, t_grid)?;
    let mut traj = Trajectory {
        times: t_grid.to_vec(),
        emitter: Vec::with_capacity(t_grid.len()),
        photon_norm: Vec::with_capacity(t_grid.len()),
        states: Vec::new(),
    };
    let mut record = |k: usize, v: &[C64]| {
        traj.emitter.push(v[..n].to_vec());
        traj.photon_norm.push(v[n..].iter().map(|z| z.norm_sqr()).sum());
        let keep = match &opts.keep {
            Keep::All => true,
            Keep::None => false,
            Keep::At(idx) => idx.contains(&k),
        };
        if keep {
            traj.states.push(SingleExcitationState::from_vec(v, n, t_grid[k]));
        }
    };
    match opts.propagator {
        Propagator::Rk4 => {
            let h_max = opts.max_step.unwrap_or(0.02 / gen.norm_bound().max(1e-12));
            if !(h_max > 0.0) {
                return invalid(format!("maximum step must be positive, got {h_max}"));
            }
            let mut rk = Rk4::new(gen.dim());
            let mut psi = initial.to_vec();
            let mut t = initial.t;
            for (k, &target) in t_grid.iter().enumerate() {
                let span = target - t;
                if span > 0.0 {
                    let steps = (span / h_max).ceil().max(1.0) as usize;
                    let dt = span / steps as f64;
                    for _ in 0..steps {
                        rk.step(gen, &mut psi, dt);
                    }
                    if psi.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                        return Err(Error::Integrator { time: target, reason: "state became non-finite".into() });
                    }
                }
                t = target;
                record(k, &psi);
            }
        }
        Propagator::Spectral => {
            if !gen.is_lossless() {
                return invalid("the spectral propagator requires vanishing loss rates");
            }
            let (w, v) = hermitian_eigen(&gen.to_dense())?;
            let psi0 = Mat::from_fn(gen.dim(), 1, |i, _| initial.to_vec()[i]);
            let amp = v.adjoint() * &psi0;
            let mut psi = vec![ZERO; gen.dim()];
            for (k, &target) in t_grid.iter().enumerate() {
                let dt = target - initial.t;
                let rotated = Mat::from_fn(w.len(), 1, |l, _| amp[(l, 0)] * C64::from_polar(1.0, -w[l] * dt));
                let out = &v * &rotated;
                for (i, p) in psi.iter_mut().enumerate() {
                    *p = out[(i, 0)];
                }
                record(k, &psi);
            }
        }
    }
    Ok(traj)
}

struct Rk4 {
    k1: Vec<C64>,
    k2: Vec<C64>,
    k3: Vec<C64>,
    k4: Vec<C64>,
    tmp: Vec<C64>,
}

impl Rk4 {
    fn new(d: usize) -> Self {
        Self { k1: vec![ZERO; d], k2: vec![ZERO; d], k3: vec![ZERO; d], k4: vec![ZERO; d], tmp: vec![ZERO; d] }
    }

    /// One step of `dψ/dt = −i A ψ`.
    fn step(&mut self, gen: &SingleExcitationGenerator, psi: &mut [C64], dt: f64) {
        let f = |x: &[C64], out: &mut [C64]| {
            gen.apply(x, out);
            for v in out.iter_mut() {
                *v *= -I;
            }
        };
        f(psi, &mut self.k1);
        for i in 0..psi.len() {
            self.tmp[i] = psi[i] + 0.5 * dt * self.k1[i];
        }
        f(&self.tmp, &mut self.k2);
        for i in 0..psi.len() {
            self.tmp[i] = psi[i] + 0.5 * dt * self.k2[i];
        }
        f(&self.tmp, &mut self.k3);
        for i in 0..psi.len() {
            self.tmp[i] = psi[i] + dt * self.k3[i];
        }
        f(&self.tmp, &mut self.k4);
        for i in 0..psi.len() {
            psi[i] += dt / 6.0 * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
    }
}

/// Emitter amplitudes from the delayed equations
/// `ċ_n = −(γ_e/2) c_n − g² Σ_m ∫₀ᵗ G(t−s, r_n, r_m) e^{iω_e(t−s)} c_m(s) ds`,
/// solved by trapezoidal product integration on a uniform grid starting at 0.
/// `kernel(τ, n, m)` returns `G(τ, r_n, r_m)`.
pub fn memory_kernel_evolution<K>(emitters: &EmitterSet, kernel: K, initial: &[C64], t_grid: &[f64]) -> Result<Vec<Vec<C64>>>
where
    K: Fn(f64, usize, usize) -> C64,
{
    let n = emitters.len();
    if initial.len() != n {
        return invalid(format!("initial amplitudes have length {}, expected {n}", initial.len()));
    }
    if t_grid.len() < 2 || t_grid[0] != 0.0 {
        return invalid("memory-kernel grid must start at 0 and contain at least two points");
    }
    let dt = t_grid[1] - t_grid[0];
    for (k, &t) in t_grid.iter().enumerate() {
        if (t - k as f64 * dt).abs() > 1e-9 * dt.max(1.0) * (k as f64 + 1.0) {
            return invalid("memory-kernel grid must be uniform");
        }
    }
    let g2 = emitters.g * emitters.g;
    let half_gamma = 0.5 * emitters.gamma_e;
    let steps = t_grid.len();
    let kern: Vec<CMat> = (0..steps)
        .map(|k| {
            let tau = k as f64 * dt;
            let phase = C64::from_polar(1.0, emitters.omega_e * tau);
            Mat::from_fn(n, n, |a, b| kernel(tau, a, b) * phase)
        })
        .collect();
    let mut c: Vec<Vec<C64>> = vec![initial.to_vec()];
    let matvec = |m: &CMat, v: &[C64], out: &mut [C64], scale: f64| {
        for a in 0..n {
            for b in 0..n {
                out[a] += scale * m[(a, b)] * v[b];
            }
        }
    };
    // f_k = −(γ/2) c_k − g² I_k, with I_k the trapezoidal memory integral.
    let mut f_prev: Vec<C64> = initial.iter().map(|z| -half_gamma * z).collect();
    let lhs = Mat::from_fn(n, n, |a, b| {
        let id = if a == b { 1.0 + 0.5 * dt * half_gamma } else { 0.0 };
        C64::new(id, 0.0) + 0.25 * g2 * dt * dt * kern[0][(a, b)]
    });
    for k in 1..steps {
        // Known part of I_k: ½K_k c_0 + Σ_{j=1}^{k−1} K_{k−j} c_j, times dt.
        let mut known = vec![ZERO; n];
        matvec(&kern[k], &c[0], &mut known, 0.5 * dt);
        for j in 1..k {
            matvec(&kern[k - j], &c[j], &mut known, dt);
        }
        let rhs = Mat::from_fn(n, 1, |a, _| c[k - 1][a] + 0.5 * dt * (f_prev[a] - g2 * known[a]));
        let sol = lu_solve(&lhs, &rhs);
        let next: Vec<C64> = (0..n).map(|a| sol[(a, 0)]).collect();
        if next.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Integrator { time: t_grid[k], reason: "memory-kernel solution became non-finite".into() });
        }
        let mut integral = known;
        matvec(&kern[0], &next, &mut integral, 0.5 * dt);
        f_prev = (0..n).map(|a| -half_gamma * next[a] - g2 * integral[a]).collect();
        c.push(next);
    }
    Ok(c)
}

/// Exact lattice propagator `G(τ, r_n, r_m) = Σ_λ f_λ(r_n) f*_λ(r_m) e^{−iω_λ τ}`
/// restricted to the given sites.
pub fn lattice_kernel(spectrum: &SpectrumResult, sites: &[usize]) -> Result<impl Fn(f64, usize, usize) -> C64> {
    let Some(v) = &spectrum.eigenvectors else {
        return invalid("lattice kernel needs eigenvectors");
    };
    let rows: Vec<Vec<C64>> = sites.iter().map(|&s| (0..v.ncols()).map(|l| v[(s, l)]).collect()).collect();
    let w = spectrum.eigenvalues.clone();
    Ok(move |tau: f64, a: usize, b: usize| {
        rows[a].iter().zip(&rows[b]).zip(&w).map(|((x, y), e)| x * y.conj() * C64::from_polar(1.0, -e * tau)).sum()
    })
}

/// `Ω = √α g`.
pub fn rabi_frequency(alpha: f64, g: f64) -> f64 {
    alpha.max(0.0).sqrt() * g
}

/// `t_π = π / 2Ω`.
pub fn transfer_time(alpha: f64, g: f64) -> f64 {
    FRAC_PI_2 / rabi_frequency(alpha, g)
}

/// Golden-rule rate `Γ = g²/(2J)` at the band center.
pub fn markov_decay_rate(g: f64, hopping: f64) -> f64 {
    g * g / (2.0 * hopping)
}

/// Photon emitted by a resonant emitter into level `ell`,
/// `φ(r_i, t) = −i sin(Ωt)/√α · G_ℓ(r_i, r_e)`.
pub fn emitted_photon_profile(spec: &LatticeSpec, gauge: Gauge, ell: usize, r_e: Site, g: f64, t: f64) -> Result<Vec<C64>> {
    if !spec.contains(r_e) {
        return invalid("emitter lies outside the lattice");
    }
    let proj = GreensProjection::new(ell, spec.alpha)?.with_gauge(gauge);
    let omega = rabi_frequency(spec.alpha, g);
    let pre = -I * (omega * t).sin() / spec.alpha.sqrt();
    let re = spec.position(r_e);
    Ok((0..spec.num_sites()).map(|i| pre * greens_projected(&proj, spec.position_of_index(i), re)).collect())
}

/// Probability current `I_{j→i}` on every bond `(i, j)` returned by
/// [`LatticeSpec::bonds`], i.e. `−2J Im(e^{iφ_ij} φ_i* φ_j)`.
pub fn bond_currents(phi: &[C64], spec: &LatticeSpec, gauge: Gauge) -> Result<Vec<(Site, Site, f64)>> {
    if phi.len() != spec.num_sites() {
        return invalid("photon wavefunction does not match the lattice");
    }
    spec.bonds()
        .map(|(i, j)| {
            let p = spec.bond_phase(gauge, i, j)?;
            let z = C64::from_polar(1.0, p) * phi[spec.index(i)].conj() * phi[spec.index(j)];
            Ok((i, j, -2.0 * spec.hopping * z.im))
        })
        .collect()
}

/// Net hopping inflow `Σ_b I_{b→a}` into every site.
pub fn current_inflow(phi: &[C64], spec: &LatticeSpec, gauge: Gauge) -> Result<Vec<f64>> {
    let mut out = vec![0.0; spec.num_sites()];
    for (i, j, c) in bond_currents(phi, spec, gauge)? {
        out[spec.index(i)] += c;
        out[spec.index(j)] -= c;
    }
    Ok(out)
}

/// Site current `(j_x, j_y)`: mean of the incoming and outgoing bond current
/// along each axis; boundary sites use their single bond.
pub fn photon_current(phi: &[C64], spec: &LatticeSpec, gauge: Gauge) -> Result<Vec<[f64; 2]>> {
    let mut sum = vec![[0.0; 2]; spec.num_sites()];
    let mut count = vec![[0u8; 2]; spec.num_sites()];
    for (i, j, c) in bond_currents(phi, spec, gauge)? {
        let axis = usize::from(i.x == j.x);
        for s in [spec.index(i), spec.index(j)] {
            sum[s][axis] += c;
            count[s][axis] += 1;
        }
    }
    Ok(sum
        .iter()
        .zip(&count)
        .map(|(s, n)| [0, 1].map(|a| if n[a] > 0 { s[a] / n[a] as f64 } else { 0.0 }))
        .collect())
}
