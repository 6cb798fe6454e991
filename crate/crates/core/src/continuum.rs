//! Continuum Landau-level objects on the lattice: orbitals, level
//! frequencies, gauge phases and the level-projected Green's function.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::lattice::{Gauge, LatticeSpec, Position};
use crate::linalg::C64;

/// Generalized Laguerre polynomial `L_n^m(x)` by upward recurrence in `n`.
pub fn generalized_laguerre(n: usize, m: i64, x: f64) -> f64 {
    let m = m as f64;
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + m - x;
    for k in 1..n {
        let k = k as f64;
        let next = ((2.0 * k + 1.0 + m - x) * cur - (k + m) * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `e^{−x/2} L_n^m(x)`, evaluated through the log-magnitude for large `x`
/// where the Gaussian factor alone would underflow.
pub fn laguerre_gaussian(n: usize, m: i64, x: f64) -> f64 {
    let l = generalized_laguerre(n, m, x);
    if x <= 700.0 || l == 0.0 {
        return l * (-0.5 * x).exp();
    }
    l.signum() * (l.abs().ln() - 0.5 * x).exp()
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Landau level `ell` and degeneracy label `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LandauIndex {
    pub ell: usize,
    pub k: usize,
}

impl LandauIndex {
    pub const fn new(ell: usize, k: usize) -> Self {
        Self { ell, k }
    }
}

fn magnetic_length(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return invalid(format!("flux alpha = {alpha} has no magnetic length"));
    }
    Ok(1.0 / (TAU * alpha).sqrt())
}

/// Symmetric-gauge Landau orbital `Φ_ℓk(r)` normalized on the lattice, so
/// that `Σ_i |Φ_ℓk(r_i)|² ≈ 1`. `r` is measured from the gauge origin.
pub fn landau_orbital(idx: LandauIndex, r: Position, alpha: f64) -> Result<C64> {
    let lb = magnetic_length(alpha)?;
    let xi = C64::new(r[0], r[1]) / (2f64.sqrt() * lb);
    let x = xi.norm_sqr();
    let prefactor = alpha.sqrt();
    let (ell, k) = (idx.ell, idx.k);
    // For k < ℓ use L_ℓ^{−j}(x) = (−x)^j (ℓ−j)!/ℓ! L_{ℓ−j}^{j}(x), j = ℓ − k.
    let (power, base, lag, lower, upper) = if k >= ell {
        (k - ell, xi, generalized_laguerre(ell, (k - ell) as i64, x), ell, k)
    } else {
        (ell - k, -xi.conj(), generalized_laguerre(k, (ell - k) as i64, x), k, ell)
    };
    if lag == 0.0 {
        return Ok(C64::new(0.0, 0.0));
    }
    if power > 0 && x == 0.0 {
        return Ok(C64::new(0.0, 0.0));
    }
    let log_mag = 0.5 * (ln_factorial(lower) - ln_factorial(upper))
        + if power > 0 { power as f64 * 0.5 * x.ln() } else { 0.0 }
        - 0.5 * x
        + lag.abs().ln();
    let phase = power as f64 * base.arg();
    Ok(C64::from_polar(prefactor * lag.signum() * log_mag.exp(), phase))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum CorrectionOrder {
    Harmonic,
    #[default]
    Quartic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LandauSpectrumParams {
    /// Band edge `ω_p − 4J`.
    pub omega_b: f64,
    /// `4π α J`.
    pub omega_c: f64,
    pub correction_order: CorrectionOrder,
}

impl LandauSpectrumParams {
    pub fn from_lattice(spec: &LatticeSpec, order: CorrectionOrder) -> Self {
        Self { omega_b: spec.band_edge(), omega_c: spec.cyclotron_frequency(), correction_order: order }
    }
}

/// `ω_ℓ = ω_b + ω_c(ℓ + ½)`, minus `ω_c²(2ℓ² + 2ℓ + 1)/(32J)` at quartic order.
pub fn landau_frequency(ell: usize, params: &LandauSpectrumParams, hopping: f64) -> f64 {
    let l = ell as f64;
    let harmonic = params.omega_b + params.omega_c * (l + 0.5);
    match params.correction_order {
        CorrectionOrder::Harmonic => harmonic,
        CorrectionOrder::Quartic => harmonic - params.omega_c.powi(2) / (32.0 * hopping) * (2.0 * l * l + 2.0 * l + 1.0),
    }
}

/// Symmetric-gauge phase `θ_ij = −(x_i y_j − x_j y_i)/(2 l_B²)`.
pub fn gauge_phase_theta(r_i: Position, r_j: Position, lb: f64) -> f64 {
    -(r_i[0] * r_j[1] - r_j[0] * r_i[1]) / (2.0 * lb * lb)
}

/// Green's function projected on a single Landau level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreensProjection {
    pub ell: usize,
    pub alpha: f64,
    #[serde(default)]
    pub gauge: Gauge,
}

impl GreensProjection {
    pub fn new(ell: usize, alpha: f64) -> Result<Self> {
        magnetic_length(alpha)?;
        Ok(Self { ell, alpha, gauge: Gauge::Symmetric })
    }

    pub fn with_gauge(mut self, gauge: Gauge) -> Self {
        self.gauge = gauge;
        self
    }

    pub fn magnetic_length(&self) -> f64 {
        1.0 / (TAU * self.alpha).sqrt()
    }

    /// `|G_ℓ|` as a function of separation:
    /// `α e^{−d²/4l_B²} L_ℓ(d²/2l_B²)` (signed).
    pub fn amplitude(&self, distance: f64) -> f64 {
        let lb = self.magnetic_length();
        let x = distance * distance / (2.0 * lb * lb);
        self.alpha * laguerre_gaussian(self.ell, 0, x)
    }

    /// Gauge-dependent phase of `G_ℓ(r_i, r_j)`.
    pub fn phase(&self, r_i: Position, r_j: Position) -> f64 {
        let lb = self.magnetic_length();
        let theta = gauge_phase_theta(r_i, r_j, lb);
        match self.gauge {
            Gauge::Symmetric => theta,
            Gauge::LandauX => theta + (r_i[0] * r_i[1] - r_j[0] * r_j[1]) / (2.0 * lb * lb),
        }
    }
}

/// `G_ℓ(r_i, r_j) = √α e^{iθ_ij} Φ_ℓℓ(r_i − r_j)`, positions measured from
/// the gauge origin.
pub fn greens_projected(proj: &GreensProjection, r_i: Position, r_j: Position) -> C64 {
    let d = (r_i[0] - r_j[0]).hypot(r_i[1] - r_j[1]);
    C64::from_polar(1.0, proj.phase(r_i, r_j)) * proj.amplitude(d)
}

/// `Σ_{k ≤ k_max} Φ_ℓk(r_i) Φ*_ℓk(r_j)`; converges to [`greens_projected`].
pub fn orbital_resummation(ell: usize, alpha: f64, r_i: Position, r_j: Position, k_max: usize) -> Result<C64> {
    let mut sum = C64::new(0.0, 0.0);
    for k in 0..=k_max {
        let idx = LandauIndex::new(ell, k);
        sum += landau_orbital(idx, r_i, alpha)? * landau_orbital(idx, r_j, alpha)?.conj();
    }
    Ok(sum)
}

/// Default degeneracy truncation `ceil(α M) + 4ℓ`.
pub fn default_k_max(spec: &LatticeSpec, ell: usize) -> usize {
    (spec.alpha * spec.num_sites() as f64).ceil() as usize + 4 * ell
}

/// Truncated Landau sum `Σ_{ℓ ≤ ell_max} G_ℓ(r_i, r_j) e^{−iω_ℓ t}` with
/// quartic level frequencies.
pub fn full_greens(t: f64, r_i: Position, r_j: Position, spec: &LatticeSpec, ell_max: usize) -> Result<C64> {
    let params = LandauSpectrumParams::from_lattice(spec, CorrectionOrder::Quartic);
    let mut sum = C64::new(0.0, 0.0);
    for ell in 0..=ell_max {
        let proj = GreensProjection::new(ell, spec.alpha)?;
        let w = landau_frequency(ell, &params, spec.hopping);
        sum += greens_projected(&proj, r_i, r_j) * C64::from_polar(1.0, -w * t);
    }
    Ok(sum)
}
