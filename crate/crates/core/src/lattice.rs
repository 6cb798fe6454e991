//! Square photonic lattice with a synthetic magnetic field.
//!
//! Lengths are measured in units of the lattice spacing `l0 = 1` and
//! frequencies in the same unit as the hopping `J` (normally `J = 1`).
//! Sites are indexed row-major, `index = x + nx * y`, with integer
//! coordinates `0 <= x < nx`, `0 <= y < ny`. Gauge-dependent quantities use
//! positions measured from [`LatticeSpec::origin`], which defaults to the
//! lattice center.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::{SparseHermitianOperator, C64};

/// Continuous position in units of `l0`.
pub type Position = [f64; 2];

/// Integer lattice coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Site {
    pub x: usize,
    pub y: usize,
}

impl Site {
    pub const fn new(x: usize, y: usize) -> Self {
        Self { x, y }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Gauge {
    /// `A = B(−y/2, x/2, 0)`
    #[default]
    Symmetric,
    /// `A = B(0, x, 0)`
    LandauX,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub nx: usize,
    pub ny: usize,
    /// On-site photon frequency.
    #[serde(default)]
    pub omega_p: f64,
    /// Hopping magnitude.
    #[serde(default = "unit_hopping")]
    pub hopping: f64,
    /// Flux per plaquette in units of the flux quantum, `0 <= alpha < 1`.
    pub alpha: f64,
    /// Gauge origin; `None` means the lattice center.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<Position>,
}

fn unit_hopping() -> f64 {
    1.0
}

impl LatticeSpec {
    /// `nx × ny` lattice with `ω_p = 0` and `J = 1`.
    pub fn new(nx: usize, ny: usize, alpha: f64) -> Self {
        Self { nx, ny, omega_p: 0.0, hopping: 1.0, alpha, origin: None }
    }

    pub fn with_origin(mut self, origin: Position) -> Self {
        self.origin = Some(origin);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < 2 || self.ny < 2 {
            return invalid(format!("lattice must be at least 2×2, got {}×{}", self.nx, self.ny));
        }
        if !(self.hopping > 0.0) {
            return invalid(format!("hopping must be positive, got {}", self.hopping));
        }
        if !(0.0..1.0).contains(&self.alpha) {
            return invalid(format!("flux alpha must lie in [0, 1), got {}", self.alpha));
        }
        Ok(())
    }

    pub fn num_sites(&self) -> usize {
        self.nx * self.ny
    }

    pub fn index(&self, site: Site) -> usize {
        site.x + self.nx * site.y
    }

    pub fn site(&self, index: usize) -> Site {
        Site { x: index % self.nx, y: index / self.nx }
    }

    pub fn contains(&self, site: Site) -> bool {
        site.x < self.nx && site.y < self.ny
    }

    pub fn center(&self) -> Position {
        [(self.nx as f64 - 1.0) / 2.0, (self.ny as f64 - 1.0) / 2.0]
    }

    pub fn origin(&self) -> Position {
        self.origin.unwrap_or_else(|| self.center())
    }

    /// Position of a site relative to the gauge origin.
    pub fn position(&self, site: Site) -> Position {
        let o = self.origin();
        [site.x as f64 - o[0], site.y as f64 - o[1]]
    }

    pub fn position_of_index(&self, index: usize) -> Position {
        self.position(self.site(index))
    }

    /// `l_B = l0 / sqrt(2π α)`; `None` at zero field.
    pub fn magnetic_length(&self) -> Option<f64> {
        (self.alpha > 0.0).then(|| 1.0 / (TAU * self.alpha).sqrt())
    }

    /// Lower band edge `ω_b = ω_p − 4J`.
    pub fn band_edge(&self) -> f64 {
        self.omega_p - 4.0 * self.hopping
    }

    /// `ω_c = 4π α J`.
    pub fn cyclotron_frequency(&self) -> f64 {
        4.0 * PI * self.alpha * self.hopping
    }

    /// Nearest-neighbour bonds `(i, j)` with `i = j + e_x` or `i = j + e_y`.
    pub fn bonds(&self) -> impl Iterator<Item = (Site, Site)> + '_ {
        (0..self.ny).flat_map(move |y| {
            (0..self.nx).flat_map(move |x| {
                let here = Site::new(x, y);
                let right = (x + 1 < self.nx).then(|| (Site::new(x + 1, y), here));
                let up = (y + 1 < self.ny).then(|| (Site::new(x, y + 1), here));
                right.into_iter().chain(up)
            })
        })
    }

    /// Peierls phase for the hop `j → i` between neighbouring sites.
    pub fn bond_phase(&self, gauge: Gauge, i: Site, j: Site) -> Result<f64> {
        peierls_phase(gauge, self.alpha, self.position(i), self.position(j))
    }
}

/// Line integral `(e/ħ)∫_{r_j}^{r_i} A·dr` along the bond, with positions
/// measured from the gauge origin. Both gauges are linear in `r`, so the
/// midpoint rule is exact. Antisymmetric under `i ↔ j`.
pub fn peierls_phase(gauge: Gauge, alpha: f64, r_i: Position, r_j: Position) -> Result<f64> {
    let dx = r_i[0] - r_j[0];
    let dy = r_i[1] - r_j[1];
    let unit = |d: f64| (d.abs() - 1.0).abs() < 1e-9;
    let zero = |d: f64| d.abs() < 1e-9;
    if !((unit(dx) && zero(dy)) || (zero(dx) && unit(dy))) {
        return invalid(format!("sites {r_i:?} and {r_j:?} are not nearest neighbours"));
    }
    let xm = 0.5 * (r_i[0] + r_j[0]);
    let ym = 0.5 * (r_i[1] + r_j[1]);
    // (e/ħ) B l0² = 2π α
    let strength = TAU * alpha;
    Ok(match gauge {
        Gauge::Symmetric => strength * 0.5 * (-ym * dx + xm * dy),
        Gauge::LandauX => strength * xm * dy,
    })
}

/// Tight-binding Hamiltonian with open boundaries: diagonal
/// `ω_p + shift_i`, hopping `−J e^{iφ_ij}` on every bond.
pub fn build_hamiltonian(spec: &LatticeSpec, gauge: Gauge, onsite_shift: Option<&[f64]>) -> Result<SparseHermitianOperator> {
    spec.validate()?;
    let m = spec.num_sites();
    let mut diagonal = vec![spec.omega_p; m];
    if let Some(shift) = onsite_shift {
        if shift.len() != m {
            return invalid(format!("on-site shift has {} entries, lattice has {m} sites", shift.len()));
        }
        for (d, s) in diagonal.iter_mut().zip(shift) {
            *d += s;
        }
    }
    let mut hops = Vec::with_capacity(2 * m);
    for (i, j) in spec.bonds() {
        let phi = spec.bond_phase(gauge, i, j)?;
        hops.push((spec.index(i), spec.index(j), C64::from_polar(-spec.hopping, phi)));
    }
    Ok(SparseHermitianOperator::from_parts(&diagonal, &hops))
}

/// Counter-clockwise sum of bond phases around every plaquette, reduced to
/// `[0, 2π)`. Plaquettes are ordered by their lower-left corner, row-major.
pub fn plaquette_flux_check(spec: &LatticeSpec, gauge: Gauge) -> Result<Vec<f64>> {
    spec.validate()?;
    let mut fluxes = Vec::with_capacity((spec.nx - 1) * (spec.ny - 1));
    for y in 0..spec.ny - 1 {
        for x in 0..spec.nx - 1 {
            let corners = [Site::new(x, y), Site::new(x + 1, y), Site::new(x + 1, y + 1), Site::new(x, y + 1)];
            let mut total = 0.0;
            for k in 0..4 {
                let from = corners[k];
                let to = corners[(k + 1) % 4];
                total += spec.bond_phase(gauge, to, from)?;
            }
            let mut wrapped = total.rem_euclid(TAU);
            if TAU - wrapped < 1e-12 {
                wrapped = 0.0;
            }
            fluxes.push(wrapped);
        }
    }
    Ok(fluxes)
}

/// Spatially varying photon loss `γ̃_p(r) = γ_p + γ_edge / (1 + exp(−(r − R0)/w))`,
/// where `r` is the distance from the lattice center.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DissipationProfile {
    pub gamma_p: f64,
    pub gamma_edge: f64,
    pub r0: f64,
    #[serde(default = "default_width")]
    pub width: f64,
}

fn default_width() -> f64 {
    2.0
}

impl DissipationProfile {
    pub fn none() -> Self {
        Self { gamma_p: 0.0, gamma_edge: 0.0, r0: 0.0, width: default_width() }
    }

    /// Uniform loss only.
    pub fn uniform(gamma_p: f64) -> Self {
        Self { gamma_p, ..Self::none() }
    }

    /// Absorber with onset at half the shorter lattice side and edge loss
    /// `10³ γ_p`.
    pub fn absorbing(spec: &LatticeSpec, gamma_p: f64) -> Self {
        Self {
            gamma_p,
            gamma_edge: 1e3 * gamma_p,
            r0: 0.5 * spec.nx.min(spec.ny) as f64,
            width: default_width(),
        }
    }

    pub fn rate_at(&self, r: f64) -> f64 {
        if self.gamma_edge == 0.0 {
            return self.gamma_p;
        }
        self.gamma_p + self.gamma_edge / (1.0 + (-(r - self.r0) / self.width).exp())
    }

    pub fn site_rates(&self, spec: &LatticeSpec) -> Vec<f64> {
        let c = spec.center();
        (0..spec.num_sites())
            .map(|i| {
                let s = spec.site(i);
                self.rate_at((s.x as f64 - c[0]).hypot(s.y as f64 - c[1]))
            })
            .collect()
    }

    pub fn is_lossless(&self) -> bool {
        self.gamma_p == 0.0 && self.gamma_edge == 0.0
    }
}
