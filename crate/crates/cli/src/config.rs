//! TOML experiment configuration.
//!
//! Frequencies may be given in any unit as long as `lattice.hopping` uses the
//! same one; [`ExperimentConfig::normalized`] rescales everything to units of
//! the hopping `J`. Times are always in units of `1/J` and lengths in lattice
//! spacings.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use lpp_core::continuum::{landau_frequency, CorrectionOrder, LandauSpectrumParams};
use lpp_core::dynamics::{EmitterSet, Propagator};
use lpp_core::lpp::equilateral_triangle;
use lpp_core::{DissipationProfile, Gauge, LatticeSpec, Position, Site};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Butterfly,
    Dos,
    Evolve,
    Lpp,
    Chiral,
    EmitterButterfly,
    DisorderSweep,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Butterfly => "butterfly",
            Experiment::Dos => "dos",
            Experiment::Evolve => "evolve",
            Experiment::Lpp => "lpp",
            Experiment::Chiral => "chiral",
            Experiment::EmitterButterfly => "emitter-butterfly",
            Experiment::DisorderSweep => "disorder-sweep",
        }
    }

    /// Experiments that place emitters on lattice sites.
    fn needs_sites(self) -> bool {
        matches!(self, Experiment::Dos | Experiment::Evolve | Experiment::DisorderSweep)
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GaugeChoice {
    #[default]
    Symmetric,
    LandauX,
}

impl From<GaugeChoice> for Gauge {
    fn from(g: GaugeChoice) -> Self {
        match g {
            GaugeChoice::Symmetric => Gauge::Symmetric,
            GaugeChoice::LandauX => Gauge::LandauX,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Units {
    /// Label of the frequency unit used throughout the file, e.g. `"MHz"`.
    pub frequency: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSection {
    pub nx: usize,
    pub ny: usize,
    pub alpha: f64,
    #[serde(default)]
    pub omega_p: f64,
    #[serde(default = "one")]
    pub hopping: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Resonance {
    /// Landau level index.
    pub level: usize,
    /// `ω_e − ω_ℓ`, with `ω_ℓ` from the quartic-corrected formula.
    #[serde(default)]
    pub detuning: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Triangle {
    /// Side length in lattice spacings.
    pub side: f64,
    /// Center in lattice coordinates; defaults to the lattice center.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<[f64; 2]>,
    /// Visit the vertices clockwise instead of counter-clockwise.
    #[serde(default)]
    pub clockwise: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmitterSection {
    /// Lattice coordinates `[x, y]`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub positions: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub triangle: Option<Triangle>,
    pub g: f64,
    #[serde(default)]
    pub gamma_e: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_e: Option<f64>,
    /// Detuning from the lower band edge `ω_b = ω_p − 4J`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_e: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resonance: Option<Resonance>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DissipationSection {
    #[serde(default)]
    pub gamma_p: f64,
    /// Absorbing boundary with `γ_edge = 1000 γ_p` and `R0 = min(nx, ny)/2`
    /// unless overridden.
    #[serde(default)]
    pub absorber: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_edge: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r0: Option<f64>,
    #[serde(default = "two")]
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisorderSection {
    pub delta_omega_p: f64,
    #[serde(default = "hundred")]
    pub n_realizations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ButterflyParams {
    #[serde(default)]
    pub alpha_min: f64,
    #[serde(default = "half")]
    pub alpha_max: f64,
    #[serde(default = "default_count")]
    pub count: usize,
    /// Keep only the lowest eigenvalues.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lowest: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DosParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub site: Option<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_max: Option<f64>,
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default = "milli")]
    pub broadening: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PropagatorChoice {
    #[default]
    Rk4,
    Spectral,
}

impl From<PropagatorChoice> for Propagator {
    fn from(p: PropagatorChoice) -> Self {
        match p {
            PropagatorChoice::Rk4 => Propagator::Rk4,
            PropagatorChoice::Spectral => Propagator::Spectral,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveParams {
    pub t_max: f64,
    #[serde(default = "default_count")]
    pub points: usize,
    /// Times at which the photon field is written; snapped to the grid.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub snapshots: Vec<f64>,
    #[serde(default)]
    pub propagator: PropagatorChoice,
    #[serde(default)]
    pub initial: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LppParams {
    pub ell: usize,
    #[serde(default = "one_usize")]
    pub sector: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_max: Option<f64>,
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default)]
    pub probe: usize,
    /// Line width of the excitation spectrum; defaults to `emitters.gamma_e`
    /// or, if that is zero, `0.02 Ω`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linewidth: Option<f64>,
    /// Sector-2 eigenstates (ascending energy) whose correlation map is written.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub correlation_states: Vec<usize>,
    #[serde(default)]
    pub reference: usize,
    #[serde(default)]
    pub normalize: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChiralParams {
    #[serde(default)]
    pub ell: usize,
    /// Defaults to two periods of the ideal chiral triangle.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default = "first_emitter")]
    pub initial: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmitterButterflyParams {
    pub nx: usize,
    pub ny: usize,
    pub spacings: Vec<f64>,
    /// Landau level the emitters are detuned from; the detuning follows
    /// from the emitter frequency.
    #[serde(default)]
    pub ell: usize,
    #[serde(default = "yes")]
    pub nearest_neighbour: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Observable {
    #[default]
    Spectrum,
    Population,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisorderSweepParams {
    pub deltas: Vec<f64>,
    #[serde(default)]
    pub observable: Observable,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(default = "default_points")]
    pub points: usize,
    /// Probed emitter for spectra, initially excited emitter for populations.
    #[serde(default)]
    pub emitter: usize,
    #[serde(default)]
    pub keep_realizations: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<Experiment>,
    #[serde(default)]
    pub gauge: GaugeChoice,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Free-form notes carried into the manifest.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub units: Option<Units>,
    pub lattice: LatticeSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub emitters: Option<EmitterSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dissipation: Option<DissipationSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disorder: Option<DisorderSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub butterfly: Option<ButterflyParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dos: Option<DosParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evolve: Option<EvolveParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lpp: Option<LppParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chiral: Option<ChiralParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub emitter_butterfly: Option<EmitterButterflyParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disorder_sweep: Option<DisorderSweepParams>,
}

fn one() -> f64 {
    1.0
}
fn two() -> f64 {
    2.0
}
fn half() -> f64 {
    0.5
}
fn milli() -> f64 {
    1e-3
}
fn hundred() -> usize {
    100
}
fn one_usize() -> usize {
    1
}
fn default_count() -> usize {
    501
}
fn default_points() -> usize {
    1001
}
fn yes() -> bool {
    true
}
fn first_emitter() -> Vec<usize> {
    vec![0]
}

/// A single validation failure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

/// Conversion applied by [`ExperimentConfig::normalized`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitScale {
    pub frequency_unit: String,
    /// Value of `J` in the input unit; every frequency was divided by it.
    pub hopping: f64,
}

#[derive(Default)]
struct Errors(Vec<FieldError>);

impl Errors {
    fn push(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.0.push(FieldError { path: path.into(), message: message.into() });
    }

    fn positive(&mut self, path: &str, v: f64) {
        if !(v > 0.0 && v.is_finite()) {
            self.push(path, format!("must be positive, got {v}"));
        }
    }

    fn non_negative(&mut self, path: &str, v: f64) {
        if !(v >= 0.0 && v.is_finite()) {
            self.push(path, format!("must be non-negative, got {v}"));
        }
    }

    fn finite(&mut self, path: &str, v: f64) {
        if !v.is_finite() {
            self.push(path, format!("must be finite, got {v}"));
        }
    }

    fn at_least(&mut self, path: &str, v: usize, min: usize) {
        if v < min {
            self.push(path, format!("must be at least {min}, got {v}"));
        }
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

impl ExperimentConfig {
    /// Parses without validating.
    pub fn from_toml(text: &str, origin: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| {
            let (line, column) = e.span().map_or((0, 0), |s| line_col(text, s.start));
            CliError::Parse { origin: origin.to_string(), line, column, message: e.message().trim().to_string() }
        })
    }

    /// Reads, parses and validates a configuration file.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let cfg = Self::from_toml(&text, &path.display().to_string())?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes to TOML")
    }

    pub fn lattice_spec(&self) -> LatticeSpec {
        let l = &self.lattice;
        LatticeSpec { nx: l.nx, ny: l.ny, omega_p: l.omega_p, hopping: l.hopping, alpha: l.alpha, origin: l.origin }
    }

    pub fn gauge(&self) -> Gauge {
        self.gauge.into()
    }

    /// Landau level frequency from the quartic-corrected formula.
    pub fn landau_level(&self, ell: usize) -> f64 {
        let spec = self.lattice_spec();
        landau_frequency(ell, &LandauSpectrumParams::from_lattice(&spec, CorrectionOrder::Quartic), spec.hopping)
    }

    /// Emitter frequency resolved from whichever of `omega_e`, `delta_e` or
    /// `resonance` is set.
    pub fn emitter_frequency(&self) -> Option<f64> {
        let e = self.emitters.as_ref()?;
        match (e.omega_e, e.delta_e, &e.resonance) {
            (Some(w), None, None) => Some(w),
            (None, Some(d), None) => Some(self.lattice_spec().band_edge() + d),
            (None, None, Some(r)) => Some(self.landau_level(r.level) + r.detuning),
            _ => None,
        }
    }

    /// Emitter coordinates relative to the gauge origin.
    pub fn emitter_positions(&self) -> Vec<Position> {
        let spec = self.lattice_spec();
        let origin = spec.origin();
        let Some(e) = &self.emitters else { return Vec::new() };
        if let Some(t) = &e.triangle {
            let center = t.center.unwrap_or(spec.center());
            let mut pts = equilateral_triangle([center[0] - origin[0], center[1] - origin[1]], t.side);
            if t.clockwise {
                pts.swap(1, 2);
            }
            pts
        } else {
            e.positions.iter().map(|p| [p[0] - origin[0], p[1] - origin[1]]).collect()
        }
    }

    /// Emitters on lattice sites; only valid after validation for
    /// site-based experiments.
    pub fn emitter_set(&self) -> Option<EmitterSet> {
        let e = self.emitters.as_ref()?;
        let sites = e.positions.iter().map(|p| Site::new(p[0].round() as usize, p[1].round() as usize)).collect();
        let mut set = EmitterSet::new(sites, self.emitter_frequency()?, e.g);
        set.gamma_e = e.gamma_e;
        Some(set)
    }

    pub fn dissipation_profile(&self) -> DissipationProfile {
        let Some(d) = &self.dissipation else { return DissipationProfile::none() };
        let l = &self.lattice;
        let (edge, r0) = if d.absorber { (1e3 * d.gamma_p, 0.5 * l.nx.min(l.ny) as f64) } else { (0.0, 0.0) };
        DissipationProfile { gamma_p: d.gamma_p, gamma_edge: d.gamma_edge.unwrap_or(edge), r0: d.r0.unwrap_or(r0), width: d.width }
    }

    pub fn disorder_seed(&self) -> u64 {
        self.disorder.as_ref().and_then(|d| d.seed).or(self.seed).unwrap_or(0)
    }

    /// Checks every field and cross-field constraint, reporting all failures.
    pub fn validate(&self) -> Result<(), CliError> {
        let mut err = Errors::default();
        let Some(experiment) = self.experiment else {
            err.push("experiment", "missing; set it in the file or use a subcommand");
            return Err(CliError::Validation(err.0));
        };
        if let Some(u) = &self.units {
            if u.frequency.trim().is_empty() {
                err.push("units.frequency", "must not be empty");
            }
        }

        let l = &self.lattice;
        err.at_least("lattice.nx", l.nx, 2);
        err.at_least("lattice.ny", l.ny, 2);
        if !(0.0..1.0).contains(&l.alpha) {
            err.push("lattice.alpha", format!("must lie in [0, 1), got {}", l.alpha));
        }
        err.positive("lattice.hopping", l.hopping);
        err.finite("lattice.omega_p", l.omega_p);
        if let Some(o) = l.origin {
            err.finite("lattice.origin[0]", o[0]);
            err.finite("lattice.origin[1]", o[1]);
        }

        let needs_emitters = !matches!(experiment, Experiment::Butterfly | Experiment::Dos);
        match &self.emitters {
            None if needs_emitters => err.push("emitters", format!("required for the {experiment} experiment")),
            None => {}
            Some(e) => self.validate_emitters(e, experiment, &mut err),
        }

        if let Some(d) = &self.dissipation {
            err.non_negative("dissipation.gamma_p", d.gamma_p);
            if let Some(v) = d.gamma_edge {
                err.non_negative("dissipation.gamma_edge", v);
            }
            if let Some(v) = d.r0 {
                err.non_negative("dissipation.r0", v);
            }
            err.positive("dissipation.width", d.width);
            if d.gamma_edge.unwrap_or(0.0) > 0.0 && !d.absorber && d.r0.is_none() {
                err.push("dissipation.r0", "required when gamma_edge is set without absorber = true");
            }
        }
        if let Some(d) = &self.disorder {
            err.non_negative("disorder.delta_omega_p", d.delta_omega_p);
            err.at_least("disorder.n_realizations", d.n_realizations, 1);
        }

        let missing = |err: &mut Errors, section: &str| err.push(section, format!("section required for the {experiment} experiment"));
        match experiment {
            Experiment::Butterfly => match &self.butterfly {
                None => missing(&mut err, "butterfly"),
                Some(b) => {
                    for (path, v) in [("butterfly.alpha_min", b.alpha_min), ("butterfly.alpha_max", b.alpha_max)] {
                        if !(0.0..1.0).contains(&v) {
                            err.push(path, format!("must lie in [0, 1), got {v}"));
                        }
                    }
                    if b.alpha_max < b.alpha_min {
                        err.push("butterfly.alpha_max", "must not be below alpha_min");
                    }
                    err.at_least("butterfly.count", b.count, 1);
                    if let Some(k) = b.lowest {
                        err.at_least("butterfly.lowest", k, 1);
                    }
                }
            },
            Experiment::Dos => match &self.dos {
                None => missing(&mut err, "dos"),
                Some(d) => {
                    if let Some(s) = d.site {
                        if s[0] >= l.nx || s[1] >= l.ny {
                            err.push("dos.site", format!("({}, {}) lies outside the {}x{} lattice", s[0], s[1], l.nx, l.ny));
                        }
                    }
                    grid_checks(&mut err, "dos", d.omega_min, d.omega_max, d.points);
                    err.positive("dos.broadening", d.broadening);
                    if l.nx * l.ny > lpp_core::spectrum::DENSE_CEILING {
                        err.push("lattice", format!("the dos experiment needs all eigenvectors; at most {} sites", lpp_core::spectrum::DENSE_CEILING));
                    }
                }
            },
            Experiment::Evolve => match &self.evolve {
                None => missing(&mut err, "evolve"),
                Some(p) => {
                    err.positive("evolve.t_max", p.t_max);
                    err.at_least("evolve.points", p.points, 2);
                    for (k, &t) in p.snapshots.iter().enumerate() {
                        if !(0.0..=p.t_max).contains(&t) {
                            err.push(format!("evolve.snapshots[{k}]"), format!("{t} lies outside [0, t_max]"));
                        }
                    }
                    if p.initial >= self.num_emitters() {
                        err.push("evolve.initial", format!("no emitter with index {}", p.initial));
                    }
                    if p.propagator == PropagatorChoice::Spectral && !self.dissipation_profile().is_lossless() {
                        err.push("evolve.propagator", "spectral propagation requires a lossless lattice");
                    }
                }
            },
            Experiment::Lpp => match &self.lpp {
                None => missing(&mut err, "lpp"),
                Some(p) => {
                    if !(1..=2).contains(&p.sector) {
                        err.push("lpp.sector", format!("must be 1 or 2, got {}", p.sector));
                    }
                    grid_checks(&mut err, "lpp", p.omega_min, p.omega_max, p.points);
                    let n = self.num_emitters();
                    if p.probe >= n {
                        err.push("lpp.probe", format!("no emitter with index {}", p.probe));
                    }
                    if p.reference >= n {
                        err.push("lpp.reference", format!("no emitter with index {}", p.reference));
                    }
                    if let Some(w) = p.linewidth {
                        err.positive("lpp.linewidth", w);
                    }
                    if l.alpha == 0.0 {
                        err.push("lattice.alpha", "the lpp experiment needs a nonzero flux");
                    }
                }
            },
            Experiment::Chiral => match &self.chiral {
                None => missing(&mut err, "chiral"),
                Some(p) => {
                    if let Some(t) = p.t_max {
                        err.positive("chiral.t_max", t);
                    }
                    err.at_least("chiral.points", p.points, 2);
                    let n = self.num_emitters();
                    if p.initial.is_empty() || p.initial.len() > 2 {
                        err.push("chiral.initial", "must list one or two emitters");
                    }
                    for (k, &i) in p.initial.iter().enumerate() {
                        if i >= n {
                            err.push(format!("chiral.initial[{k}]"), format!("no emitter with index {i}"));
                        }
                    }
                    if l.alpha == 0.0 {
                        err.push("lattice.alpha", "the chiral experiment needs a nonzero flux");
                    }
                }
            },
            Experiment::EmitterButterfly => match &self.emitter_butterfly {
                None => missing(&mut err, "emitter_butterfly"),
                Some(p) => {
                    if p.nx * p.ny < 2 {
                        err.push("emitter_butterfly", "needs at least two emitters");
                    }
                    if p.spacings.is_empty() {
                        err.push("emitter_butterfly.spacings", "must not be empty");
                    }
                    for (k, &d) in p.spacings.iter().enumerate() {
                        err.positive(&format!("emitter_butterfly.spacings[{k}]"), d);
                    }
                    if let Some(w) = self.emitter_frequency() {
                        if w == self.landau_level(p.ell) {
                            err.push("emitters", "the emitter-butterfly experiment needs emitters detuned from the Landau level");
                        }
                    }
                    if l.alpha == 0.0 {
                        err.push("lattice.alpha", "the emitter-butterfly experiment needs a nonzero flux");
                    }
                }
            },
            Experiment::DisorderSweep => match &self.disorder_sweep {
                None => missing(&mut err, "disorder_sweep"),
                Some(p) => {
                    if p.deltas.is_empty() {
                        err.push("disorder_sweep.deltas", "must not be empty");
                    }
                    for (k, &d) in p.deltas.iter().enumerate() {
                        err.non_negative(&format!("disorder_sweep.deltas[{k}]"), d);
                    }
                    if p.emitter >= self.num_emitters() {
                        err.push("disorder_sweep.emitter", format!("no emitter with index {}", p.emitter));
                    }
                    if self.disorder.is_none() {
                        err.push("disorder", "section required for the disorder-sweep experiment (n_realizations, seed)");
                    }
                    if self.dissipation_profile().gamma_edge > 0.0 {
                        err.push("dissipation.gamma_edge", "edge absorbers are not supported in disorder sweeps");
                    }
                    match p.observable {
                        Observable::Spectrum => {
                            grid_checks(&mut err, "disorder_sweep", p.omega_min, p.omega_max, p.points);
                            if self.emitters.as_ref().is_some_and(|e| !(e.gamma_e > 0.0)) {
                                err.push("emitters.gamma_e", "excitation spectra need a positive emitter linewidth");
                            }
                        }
                        Observable::Population => {
                            match p.t_max {
                                None => err.push("disorder_sweep.t_max", "required for population sweeps"),
                                Some(t) => err.positive("disorder_sweep.t_max", t),
                            }
                            err.at_least("disorder_sweep.points", p.points, 2);
                            if self.emitters.as_ref().is_some_and(|e| e.gamma_e != 0.0) {
                                err.push("emitters.gamma_e", "population ensembles are evaluated without losses");
                            }
                            if !self.dissipation_profile().is_lossless() {
                                err.push("dissipation", "population ensembles are evaluated without losses");
                            }
                        }
                    }
                }
            },
        }

        if err.0.is_empty() {
            Ok(())
        } else {
            Err(CliError::Validation(err.0))
        }
    }

    fn num_emitters(&self) -> usize {
        self.emitters.as_ref().map_or(0, |e| if e.triangle.is_some() { 3 } else { e.positions.len() })
    }

    fn validate_emitters(&self, e: &EmitterSection, experiment: Experiment, err: &mut Errors) {
        let l = &self.lattice;
        match (&e.triangle, e.positions.is_empty()) {
            (Some(_), false) => err.push("emitters", "give either positions or triangle, not both"),
            (None, true) if experiment != Experiment::EmitterButterfly => err.push("emitters.positions", "at least one emitter is required"),
            _ => {}
        }
        if let Some(t) = &e.triangle {
            err.positive("emitters.triangle.side", t.side);
            if experiment.needs_sites() {
                err.push("emitters.triangle", format!("the {experiment} experiment needs emitters on lattice sites"));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for (k, p) in e.positions.iter().enumerate() {
            let path = format!("emitters.positions[{k}]");
            if !(p[0].is_finite() && p[1].is_finite()) {
                err.push(path, "coordinates must be finite");
                continue;
            }
            if experiment.needs_sites() {
                let on_site = p[0].fract() == 0.0 && p[1].fract() == 0.0;
                if !on_site {
                    err.push(&path, format!("({}, {}) is not a lattice site", p[0], p[1]));
                } else if !seen.insert((p[0] as i64, p[1] as i64)) {
                    err.push(&path, "duplicates an earlier emitter");
                }
            }
            if p[0] < 0.0 || p[1] < 0.0 || p[0] > (l.nx - 1) as f64 || p[1] > (l.ny - 1) as f64 {
                err.push(path, format!("({}, {}) lies outside the {}x{} lattice", p[0], p[1], l.nx, l.ny));
            }
        }
        err.non_negative("emitters.g", e.g);
        err.non_negative("emitters.gamma_e", e.gamma_e);
        let set = [e.omega_e.is_some(), e.delta_e.is_some(), e.resonance.is_some()].iter().filter(|&&b| b).count();
        if set != 1 {
            err.push("emitters", "exactly one of omega_e, delta_e or resonance must be given");
        }
        if let Some(r) = &e.resonance {
            err.finite("emitters.resonance.detuning", r.detuning);
            if l.alpha == 0.0 {
                err.push("emitters.resonance", "Landau levels need a nonzero flux");
            } else if self.landau_level(r.level) >= l.omega_p {
                err.push("emitters.resonance.level", format!("level {} is not resolved below the band center at alpha = {}", r.level, l.alpha));
            }
        }
    }

    /// Copy with every frequency divided by the hopping, so that `J = 1`.
    pub fn normalized(&self) -> (Self, UnitScale) {
        let j = self.lattice.hopping;
        let s = |v: f64| v / j;
        let so = |v: Option<f64>| v.map(s);
        let mut c = self.clone();
        c.lattice.omega_p = s(c.lattice.omega_p);
        c.lattice.hopping = 1.0;
        if let Some(e) = &mut c.emitters {
            e.g = s(e.g);
            e.gamma_e = s(e.gamma_e);
            e.omega_e = so(e.omega_e);
            e.delta_e = so(e.delta_e);
            if let Some(r) = &mut e.resonance {
                r.detuning = s(r.detuning);
            }
        }
        if let Some(d) = &mut c.dissipation {
            d.gamma_p = s(d.gamma_p);
            d.gamma_edge = so(d.gamma_edge);
        }
        if let Some(d) = &mut c.disorder {
            d.delta_omega_p = s(d.delta_omega_p);
        }
        if let Some(d) = &mut c.dos {
            d.omega_min = so(d.omega_min);
            d.omega_max = so(d.omega_max);
            d.broadening = s(d.broadening);
        }
        if let Some(p) = &mut c.lpp {
            p.omega_min = so(p.omega_min);
            p.omega_max = so(p.omega_max);
            p.linewidth = so(p.linewidth);
        }
        if let Some(p) = &mut c.disorder_sweep {
            p.deltas = p.deltas.iter().map(|&v| s(v)).collect();
            p.omega_min = so(p.omega_min);
            p.omega_max = so(p.omega_max);
        }
        let unit = c.units.take().map_or_else(|| "J".to_string(), |u| u.frequency);
        (c, UnitScale { frequency_unit: unit, hopping: j })
    }
}

fn grid_checks(err: &mut Errors, section: &str, lo: Option<f64>, hi: Option<f64>, points: usize) {
    if let (Some(a), Some(b)) = (lo, hi) {
        if !(b > a) {
            err.push(format!("{section}.omega_max"), format!("must exceed omega_min ({a}), got {b}"));
        }
    }
    err.at_least(&format!("{section}.points"), points, 2);
}
