//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails. Pass criterion numbers as arguments to
//! run a subset, e.g. `cargo test --test acceptance -- 5 6 7`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};
use std::sync::OnceLock;
use std::time::Instant;

use lpp_core::continuum::{
    greens_projected, landau_frequency, landau_orbital, orbital_resummation, CorrectionOrder, GreensProjection, LandauIndex,
    LandauSpectrumParams,
};
use lpp_core::dipole::{
    chiral_closed_form, chirality_determinant, effective_couplings, emitter_lattice_spectrum, evolve_hardcore, triangle_phase,
    EffectiveCouplingMatrix, HardCoreState,
};
use lpp_core::disorder::{
    averaged_excitation_spectrum, averaged_population, contrast_drop_time, emitter_amplitudes, first_revival_time, prominent_maxima,
    revival_heights, sample_disorder, DisorderSpec, DisorderedSystem, EnsembleResult,
};
use lpp_core::dynamics::{
    evolve_single_excitation, lattice_kernel, markov_decay_rate, memory_kernel_evolution, rabi_frequency, transfer_time, EmitterSet,
    EvolutionOptions, Keep, SingleExcitationGenerator, SingleExcitationState,
};
use lpp_core::lattice::{build_hamiltonian, plaquette_flux_check};
use lpp_core::linalg::hermitian_eigenvalues;
use lpp_core::lpp::{
    coupling_matrix_k, equidistant_triangle_gram, equilateral_triangle, gram_matrix, lpp_closed_form_spectrum, lpp_mode_commutator_check,
    lpp_spectrum, triangle_eigenvalues, LppModel,
};
use lpp_core::spectrum::{diagonalize, eigenvalues, plateaus};
use lpp_core::{DiagonalizationMode, DissipationProfile, Execution, Gauge, LatticeSpec, Position, Result, Site, C64};

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

type Criterion = fn() -> Result<Outcome>;

fn quartic(spec: &LatticeSpec, ell: usize) -> f64 {
    landau_frequency(ell, &LandauSpectrumParams::from_lattice(spec, CorrectionOrder::Quartic), spec.hopping)
}

fn grid(t_max: f64, points: usize) -> Vec<f64> {
    (0..points).map(|k| t_max * k as f64 / (points - 1) as f64).collect()
}

fn emitter_population(spec: &LatticeSpec, em: &EmitterSet, diss: &DissipationProfile, times: &[f64]) -> Result<Vec<f64>> {
    let h = build_hamiltonian(spec, Gauge::Symmetric, None)?;
    let init = SingleExcitationState::excited_emitter(0, em.len(), spec.num_sites());
    let opts = EvolutionOptions { keep: Keep::None, ..Default::default() };
    Ok(evolve_single_excitation(spec, &h, em, diss, &init, times, &opts)?.population(0))
}

/// First local minimum, refined by a parabola through the three samples.
fn first_minimum(p: &[f64], t: &[f64]) -> Option<f64> {
    (1..p.len() - 1).find(|&i| p[i] < p[i - 1] && p[i] <= p[i + 1]).map(|i| {
        let (a, b, c) = (p[i - 1], p[i], p[i + 1]);
        let h = t[i] - t[i - 1];
        let denom = a - 2.0 * b + c;
        if denom.abs() < 1e-300 {
            t[i]
        } else {
            t[i] + 0.5 * h * (a - c) / denom
        }
    })
}

fn c1_landau_gap() -> Result<Outcome> {
    let spec = LatticeSpec::new(50, 50, 0.08);
    let ev = eigenvalues(&build_hamiltonian(&spec, Gauge::Symmetric, None)?, DiagonalizationMode::Full)?;
    let levels: Vec<(f64, usize)> = plateaus(&ev, 1e-4).into_iter().filter(|p| p.1 >= 50).collect();
    if levels.len() < 2 {
        return Ok(Outcome::new(false, "fewer than two plateaus found"));
    }
    let gap = levels[1].0 - levels[0].0;
    let rel = (gap / 0.874 - 1.0).abs();
    Ok(Outcome::new(
        rel <= 0.02,
        format!("(ω1−ω0)/J = {gap:.5} from plateaus of {} and {} states; deviation {:.2}% (tolerance 2%)", levels[0].1, levels[1].1, 100.0 * rel),
    ))
}

fn c2_markov_decay() -> Result<Outcome> {
    let spec = LatticeSpec::new(50, 50, 0.0);
    let g = 0.14;
    let gamma = markov_decay_rate(g, spec.hopping);
    let em = EmitterSet::single(Site::new(25, 25), spec.band_edge() + 0.5, g);
    let diss = DissipationProfile::absorbing(&spec, 4e-4);
    let t = grid(3.0 / gamma, 301);
    let p = emitter_population(&spec, &em, &diss, &t)?;
    let n = t.len() as f64;
    let y: Vec<f64> = p.iter().map(|v| v.ln()).collect();
    let (mt, my) = (t.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let slope = t.iter().zip(&y).map(|(a, b)| (a - mt) * (b - my)).sum::<f64>() / t.iter().map(|a| (a - mt).powi(2)).sum::<f64>();
    let fit = -slope;
    let rel = (fit / gamma - 1.0).abs();
    Ok(Outcome::new(
        rel <= 0.10,
        format!("Γ_fit = {fit:.5} vs g²/2J = {gamma:.5}; deviation {:.1}% (tolerance 10%; ω_e = ω_b + 0.5J, absorber R0 = 25, γ_edge = 0.4J)", 100.0 * rel),
    ))
}

fn c3_vacuum_rabi() -> Result<Outcome> {
    let spec = LatticeSpec::new(50, 50, 0.08);
    let g = 0.14;
    let tpi = transfer_time(spec.alpha, g);
    let t = grid(1.6 * tpi, 801);
    let mut ratios = Vec::new();
    for ell in 0..3 {
        let em = EmitterSet::single(Site::new(25, 25), quartic(&spec, ell), g);
        let p = emitter_population(&spec, &em, &DissipationProfile::none(), &t)?;
        match first_minimum(&p, &t) {
            Some(tm) => ratios.push(tm / tpi),
            None => return Ok(Outcome::new(false, format!("no minimum found for ℓ = {ell}"))),
        }
    }
    let each = ratios.iter().all(|r| (r - 1.0).abs() <= 0.05);
    let spread = ratios.iter().cloned().fold(f64::MIN, f64::max) / ratios.iter().cloned().fold(f64::MAX, f64::min);
    Ok(Outcome::new(
        each && spread <= 1.05,
        format!("t_min/t_π for ℓ=0,1,2: {:.4}, {:.4}, {:.4}; spread {:.4} (tolerance 5% each and across ℓ)", ratios[0], ratios[1], ratios[2], spread),
    ))
}

fn min_frozen_population(g: f64) -> Result<f64> {
    let spec = LatticeSpec::new(50, 50, 0.08);
    let w = 0.5 * (quartic(&spec, 0) + quartic(&spec, 1));
    let em = EmitterSet::single(Site::new(25, 25), w, g);
    let t = grid(3.0 * transfer_time(spec.alpha, g), 601);
    let p = emitter_population(&spec, &em, &DissipationProfile::none(), &t)?;
    Ok(p.into_iter().fold(f64::INFINITY, f64::min))
}

fn c4_frozen_emitter() -> Result<Outcome> {
    let g = 0.04;
    let low = min_frozen_population(g)?;
    let info = min_frozen_population(0.14)?;
    Ok(Outcome::new(
        low > 0.99,
        format!("g/J = {g}: min p_e = {low:.5} over 3t_π (threshold 0.99); at g/J = 0.14 min p_e = {info:.4}"),
    ))
}

fn sorted_real(values: &[C64]) -> Vec<f64> {
    let mut v: Vec<f64> = values.iter().map(|z| z.re).collect();
    v.sort_by(f64::total_cmp);
    v
}

fn c5_closed_form_lpp() -> Result<Outcome> {
    let (alpha, g, ell, w) = (0.08, 0.14, 1, 1.7);
    let omega = rabi_frequency(alpha, g);
    let lb = 1.0 / (TAU * alpha).sqrt();
    let mut worst = 0.0f64;
    let mut cases = 0;
    let mut rejected = Vec::new();
    for d in [0.5, 1.0, 2.0, 4.0] {
        for theta in [0.0, FRAC_PI_4, FRAC_PI_2] {
            let model = match LppModel::from_gram(equidistant_triangle_gram(alpha, ell, d, theta), ell, alpha, w, w, g) {
                Ok(m) => m,
                Err(lpp_core::Error::NotPositiveSemidefinite { .. }) => {
                    rejected.push(format!("({d}, {theta:.3})"));
                    continue;
                }
                Err(e) => return Err(e),
            };
            let numeric = sorted_real(&lpp_spectrum(&model, 1)?.1.eigenvalues);
            let exact = sorted_real(&lpp_closed_form_spectrum(d, ell, theta, omega, w, None));
            worst = numeric.iter().zip(&exact).fold(worst, |m, (a, b)| m.max((a - b).abs()));
            cases += 1;
        }
        let tri = equilateral_triangle([0.3, -0.2], d * lb);
        let model = LppModel::new(tri, ell, alpha, w, w, g)?;
        let theta = {
            let j = effective_couplings(&model.positions, ell, alpha, g, w + 1.0, w)?;
            triangle_phase(&j)?
        };
        let numeric = sorted_real(&lpp_spectrum(&model, 1)?.1.eigenvalues);
        let exact = sorted_real(&lpp_closed_form_spectrum(d, ell, theta, omega, w, None));
        worst = numeric.iter().zip(&exact).fold(worst, |m, (a, b)| m.max((a - b).abs()));
        cases += 1;
    }
    Ok(Outcome::new(
        worst <= 1e-10,
        format!(
            "{cases} configurations, max |Δω| = {worst:.2e} (tolerance 1e-10); non-realizable (d/l_B, θ_△) rejected as indefinite Gram: [{}]",
            rejected.join(", ")
        ),
    ))
}

fn c6_polariton_interaction() -> Result<Outcome> {
    let (alpha, g, w) = (0.08, 0.14, 1.3);
    let model = LppModel::new(vec![[0.0, 0.0]], 0, alpha, w, w, g)?;
    let one = sorted_real(&lpp_spectrum(&model, 1)?.1.eigenvalues);
    let two = sorted_real(&lpp_spectrum(&model, 2)?.1.eigenvalues);
    let omega = model.rabi_frequency();
    let u = two[0] - 2.0 * one[0];
    let want = omega * (2.0 - 2f64.sqrt());
    let err = (u - want).abs();
    Ok(Outcome::new(err <= 1e-12, format!("U = {u:.15} vs Ω(2−√2) = {want:.15}; |Δ| = {err:.1e} (tolerance 1e-12)")))
}

fn chiral_mismatch(j: &EffectiveCouplingMatrix) -> Result<f64> {
    let period = TAU / (3f64.sqrt() * j.g0.abs());
    let t = grid(2.0 * period, 2001);
    let pops = evolve_hardcore(j, &HardCoreState::excited(3, &[0])?, &t)?;
    let closed = chiral_closed_form(j.g0, &t);
    let mut worst = 0.0f64;
    for (k, p) in pops.iter().enumerate() {
        for n in 0..3 {
            worst = worst.max((p[n].sqrt() - closed[n][k]).abs());
        }
    }
    Ok(worst)
}

fn c7_chiral_flow() -> Result<Outcome> {
    let ideal = EffectiveCouplingMatrix::equilateral(0.05, FRAC_PI_2);
    let e_ideal = chiral_mismatch(&ideal)?;
    let d_ideal = chirality_determinant(&ideal)?.norm();

    let alpha = 1.0 / (16.0 * 3f64.sqrt());
    let mut tri = equilateral_triangle([0.0, 0.0], 4.0);
    let mut j = effective_couplings(&tri, 0, alpha, 0.1, -0.5, 0.0)?;
    if triangle_phase(&j)? < 0.0 {
        tri.swap(1, 2);
        j = effective_couplings(&tri, 0, alpha, 0.1, -0.5, 0.0)?;
    }
    let theta = triangle_phase(&j)?;
    let e_geo = chiral_mismatch(&j)?;
    let d_geo = chirality_determinant(&j)?.norm();
    let pass = e_ideal <= 1e-8 && e_geo <= 1e-8 && d_ideal <= 1e-12 && d_geo <= 1e-12;
    Ok(Outcome::new(
        pass,
        format!(
            "ideal: max |Δ|c_n|| = {e_ideal:.1e}, |det| = {d_ideal:.1e}; geometric (α = 1/(16√3), d = 4, θ_△ = {theta:.12}): {e_geo:.1e}, |det| = {d_geo:.1e} (tolerances 1e-8, 1e-12)"
        ),
    ))
}

fn c8_projection_validity() -> Result<Outcome> {
    let spec = LatticeSpec::new(20, 20, 0.08);
    let g = 0.08;
    let omega = rabi_frequency(spec.alpha, g);
    let em = EmitterSet::single(Site::new(10, 10), quartic(&spec, 0), g);
    let t = grid(PI / omega, 401);
    let p = emitter_population(&spec, &em, &DissipationProfile::none(), &t)?;
    let worst = t.iter().zip(&p).map(|(t, p)| (p - (omega * t).cos().powi(2)).abs()).fold(0.0, f64::max);
    Ok(Outcome::new(worst <= 0.05, format!("max |p_e − cos²Ωt| over one period = {worst:.4} (tolerance 0.05)")))
}

fn c9_gauge_invariance() -> Result<Outcome> {
    let spec = LatticeSpec::new(30, 30, 0.08);
    let sym = eigenvalues(&build_hamiltonian(&spec, Gauge::Symmetric, None)?, DiagonalizationMode::Full)?;
    let lan = eigenvalues(&build_hamiltonian(&spec, Gauge::LandauX, None)?, DiagonalizationMode::Full)?;
    let shifted = spec.clone().with_origin([3.7, -1.2]);
    let moved = eigenvalues(&build_hamiltonian(&shifted, Gauge::Symmetric, None)?, DiagonalizationMode::Full)?;
    let diff = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let (e_gauge, e_origin) = (diff(&sym, &lan), diff(&sym, &moved));

    let mut e_green = 0.0f64;
    for ell in 0..4 {
        let proj = GreensProjection::new(ell, spec.alpha)?;
        for (i, j) in [(0, 899), (31, 47), (450, 451), (212, 640), (77, 77)] {
            let (a, b) = (spec.position_of_index(i), spec.position_of_index(j));
            let (sa, sb) = (shifted.position_of_index(i), shifted.position_of_index(j));
            e_green = e_green.max((greens_projected(&proj, a, b).norm() - greens_projected(&proj, sa, sb).norm()).abs());
        }
    }
    Ok(Outcome::new(
        e_gauge <= 1e-10 && e_origin <= 1e-10 && e_green <= 1e-12,
        format!("symmetric vs Landau: {e_gauge:.1e}; origin shift: {e_origin:.1e} (tolerance 1e-10); |G_ℓ| origin shift: {e_green:.1e} (tolerance 1e-12)"),
    ))
}

fn c10_effective_butterfly() -> Result<Outcome> {
    let (alpha, d) = (0.08, 2.0);
    let em = emitter_lattice_spectrum(20, 20, d, 0, alpha, 0.1, -1.0, Some(1.01 * d))?;
    let lattice = eigenvalues(&build_hamiltonian(&LatticeSpec::new(20, 20, 0.32), Gauge::Symmetric, None)?, DiagonalizationMode::Full)?;
    let (lo, hi) = (em.eigenvalues[0], *em.eigenvalues.last().unwrap());
    let (llo, lhi) = (lattice[0], *lattice.last().unwrap());
    let rel = ((lo - llo) / llo).abs().max(((hi - lhi) / lhi).abs());
    let full = emitter_lattice_spectrum(20, 20, d, 0, alpha, 0.1, -1.0, None)?;
    Ok(Outcome::new(
        em.alpha_eff == 0.32 && rel <= 0.02,
        format!(
            "α_eff = {}; edges [{lo:.6}, {hi:.6}] vs Hofstadter [{llo:.6}, {lhi:.6}], deviation {:.1e} (tolerance 2%); all-to-all edges [{:.3}, {:.3}]",
            em.alpha_eff,
            rel,
            full.eigenvalues[0],
            full.eigenvalues.last().unwrap()
        ),
    ))
}

struct ChiralEnsembles {
    period: f64,
    times: Vec<f64>,
    clean_max: [f64; 2],
    deltas: Vec<f64>,
    results: Vec<EnsembleResult>,
}

fn chiral_system() -> Result<(DisorderedSystem, f64)> {
    let alpha = 1.0 / 30.0;
    let lattice = LatticeSpec::new(25, 25, alpha);
    let wc = lattice.cyclotron_frequency();
    let mut sites = vec![Site::new(10, 10), Site::new(14, 11), Site::new(11, 14)];
    let phase = |sites: &[Site]| -> Result<f64> {
        let pos: Vec<Position> = sites.iter().map(|&s| lattice.position(s)).collect();
        triangle_phase(&effective_couplings(&pos, 0, alpha, 0.1, -1.0, 0.0)?)
    };
    if phase(&sites)? < 0.0 {
        sites.swap(1, 2);
    }
    let omega_e = quartic(&lattice, 0) - 0.25 * wc;
    let emitters = EmitterSet::new(sites, omega_e, 0.1);
    Ok((DisorderedSystem { lattice, gauge: Gauge::Symmetric, emitters, gamma_p: 0.0 }, wc))
}

fn chiral_ensembles() -> &'static Result<ChiralEnsembles> {
    static CELL: OnceLock<Result<ChiralEnsembles>> = OnceLock::new();
    CELL.get_or_init(|| {
        let (system, wc) = chiral_system()?;
        let coarse = grid(20_000.0, 8001);
        let clean = emitter_amplitudes(&system, None, 0, &coarse)?;
        let p1: Vec<f64> = clean[0].iter().map(|z| z.norm_sqr()).collect();
        let period = first_revival_time(&p1, &coarse).ok_or_else(|| lpp_core::Error::InvalidArgument("no revival in clean run".into()))?;
        let times = grid(4.0 * period, 801);
        let clean = emitter_amplitudes(&system, None, 0, &times)?;
        let cmax = |n: usize| clean[n].iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
        let deltas = vec![0.05, 0.1, 0.2, 0.5];
        let mut results = Vec::new();
        for &r in &deltas {
            let spec = DisorderSpec { delta_omega_p: r * wc, seed: 20_190_412, n_realizations: 100 };
            results.push(averaged_population(&system, &spec, 0, &times, false, Execution::Parallel)?);
        }
        Ok(ChiralEnsembles { period, times, clean_max: [cmax(1), cmax(2)], deltas, results })
    })
}

fn c11_disorder() -> Result<Outcome> {
    let lattice = LatticeSpec::new(20, 20, 0.08);
    let g = 0.08;
    let omega = rabi_frequency(lattice.alpha, g);
    let mut emitters = EmitterSet::single(Site::new(10, 10), quartic(&lattice, 0), g);
    emitters.gamma_e = omega;
    let system = DisorderedSystem { lattice, gauge: Gauge::Symmetric, emitters, gamma_p: 0.0 };
    let w0 = system.emitters.omega_e;
    let omegas: Vec<f64> = (0..401).map(|k| w0 - 5.0 * omega + 10.0 * omega * k as f64 / 400.0).collect();
    let mut peaks = Vec::new();
    for ratio in [0.7, 2.0] {
        let spec = DisorderSpec { delta_omega_p: ratio * g, seed: 7, n_realizations: 100 };
        let s = averaged_excitation_spectrum(&system, &spec, 0, &omegas, false, Execution::Parallel)?;
        let found: Vec<f64> = prominent_maxima(&s.mean[0], 0.3).into_iter().map(|(i, _)| (omegas[i] - w0) / omega).collect();
        peaks.push(found);
    }
    let doublet = peaks[0].len() == 2 && {
        let sep = (peaks[0][1] - peaks[0][0]) / 2.0;
        (sep - 1.0).abs() <= 0.2
    };
    let single = peaks[1].len() == 1;

    let ens = match chiral_ensembles() {
        Ok(e) => e,
        Err(e) => return Ok(Outcome::new(false, format!("chiral ensemble failed: {e}"))),
    };
    let heights: Vec<f64> = ens.results.iter().map(|r| revival_heights(&r.mean[0], &ens.times, ens.period, 1)[0]).collect();
    let washed = heights[3] < 0.1;
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:+.3}")).collect::<Vec<_>>().join(", ");
    Ok(Outcome::new(
        doublet && single && washed,
        format!(
            "maxima at (ω−ω_e)/Ω: Δ/g=0.7 → [{}], Δ/g=2 → [{}]; chiral first-revival p̄_1 for Δ/ω_c = {:?}: [{}] (clean max p2, p3 = {:.3}, {:.3}; last must be < 0.1)",
            fmt(&peaks[0]),
            fmt(&peaks[1]),
            ens.deltas,
            heights.iter().map(|h| format!("{h:.3}")).collect::<Vec<_>>().join(", "),
            ens.clean_max[0],
            ens.clean_max[1]
        ),
    ))
}

struct Checks {
    lines: Vec<String>,
    pass: bool,
}

impl Checks {
    fn check(&mut self, name: &str, ok: bool, detail: String) {
        self.pass &= ok;
        self.lines.push(format!("      {} {name}: {detail}", if ok { "ok  " } else { "FAIL" }));
    }
}

fn c12_properties() -> Result<Outcome> {
    let mut c = Checks { lines: Vec::new(), pass: true };

    // lattice-core
    let spec = LatticeSpec::new(12, 9, 0.137);
    let mut flux = 0.0f64;
    for gauge in [Gauge::Symmetric, Gauge::LandauX] {
        for f in plaquette_flux_check(&spec, gauge)? {
            flux = flux.max((f - TAU * spec.alpha).abs());
        }
    }
    c.check("flux quantization", flux <= 1e-12, format!("{flux:.1e}"));
    let h = build_hamiltonian(&spec, Gauge::Symmetric, None)?;
    c.check("hermiticity", h.hermiticity_defect() == 0.0, format!("{:.1e}", h.hermiticity_defect()));
    let s = diagonalize(&h, DiagonalizationMode::Full)?;
    let v = s.eigenvectors.as_ref().unwrap();
    let comp = (0..spec.num_sites()).map(|i| ((0..v.ncols()).map(|l| v[(i, l)].norm_sqr()).sum::<f64>() - 1.0).abs()).fold(0.0, f64::max);
    c.check("DOS completeness", comp <= 1e-10, format!("{comp:.1e}"));
    let flat = eigenvalues(&build_hamiltonian(&LatticeSpec::new(15, 15, 0.0), Gauge::Symmetric, None)?, DiagonalizationMode::Full)?;
    c.check("zero-field bandwidth", flat[0] >= -4.0 && *flat.last().unwrap() <= 4.0, format!("[{:.4}, {:.4}]", flat[0], flat.last().unwrap()));

    // continuum
    let alpha = 0.08;
    let big = LatticeSpec::new(40, 40, alpha);
    let sites: Vec<Position> = (0..big.num_sites()).map(|i| big.position_of_index(i)).collect();
    let mut ortho = 0.0f64;
    let labels = [LandauIndex::new(0, 0), LandauIndex::new(0, 2), LandauIndex::new(1, 1), LandauIndex::new(1, 3), LandauIndex::new(2, 0)];
    for a in &labels {
        for b in &labels {
            let mut sum = C64::new(0.0, 0.0);
            for &r in &sites {
                sum += landau_orbital(*a, r, alpha)?.conj() * landau_orbital(*b, r, alpha)?;
            }
            let target = if a == b { 1.0 } else { 0.0 };
            ortho = ortho.max((sum - target).norm());
        }
    }
    c.check("orbital orthonormality", ortho <= 1e-3, format!("{ortho:.1e}"));
    let mut resum = 0.0f64;
    for ell in 0..3 {
        let proj = GreensProjection::new(ell, alpha)?;
        for (a, b) in [([0.0, 0.0], [1.0, 2.0]), ([-1.5, 0.5], [2.0, -1.0]), ([0.3, 0.3], [0.3, 0.3])] {
            let s = orbital_resummation(ell, alpha, a, b, 120)?;
            resum = resum.max((s - greens_projected(&proj, a, b)).norm());
        }
    }
    c.check("Landau-orbital resummation", resum <= 1e-6, format!("{resum:.1e}"));
    let llsub = diagonalize(&build_hamiltonian(&big, Gauge::Symmetric, None)?, DiagonalizationMode::LowestK(100))?;
    let basis = llsub.eigenvectors.as_ref().unwrap();
    let mut overlap = f64::INFINITY;
    for k in 0..4 {
        let phi: Vec<C64> = sites.iter().map(|&r| landau_orbital(LandauIndex::new(0, k), r, alpha)).collect::<Result<_>>()?;
        let norm: f64 = phi.iter().map(|z| z.norm_sqr()).sum();
        let proj: f64 = (0..basis.ncols())
            .map(|l| (0..phi.len()).map(|i| basis[(i, l)].conj() * phi[i]).sum::<C64>().norm_sqr())
            .sum();
        overlap = overlap.min((proj / norm).sqrt());
    }
    c.check("lowest-level overlap with lattice eigenvectors", overlap > 0.99, format!("{overlap:.5}"));

    // dynamics
    let small = LatticeSpec::new(20, 20, 0.08);
    let hs = build_hamiltonian(&small, Gauge::Symmetric, None)?;
    let em = EmitterSet::new(vec![Site::new(8, 9), Site::new(12, 11)], quartic(&small, 0) + 0.05, 0.1);
    let mut init = SingleExcitationState::excited_emitter(0, 2, small.num_sites());
    init.c[0] = C64::new(0.6, 0.0);
    init.c[1] = C64::new(0.0, 0.48);
    init.phi[50] = C64::new(0.4, -0.3);
    init.phi[51] = C64::new(0.0, (1.0f64 - 0.36 - 0.2304 - 0.25).sqrt());
    let t = grid(200.0, 101);
    let tr = evolve_single_excitation(&small, &hs, &em, &DissipationProfile::none(), &init, &t, &EvolutionOptions::default())?;
    let drift = tr.total_norm().iter().zip(&t).map(|(n, t)| (n - 1.0).abs() / t.max(1.0)).fold(0.0, f64::max);
    c.check("norm conservation", drift <= 1e-9, format!("{drift:.1e} per J·t"));
    let gen = SingleExcitationGenerator::new(&small, &hs, &em, &DissipationProfile::none())?;
    let e0 = gen.expectation(&tr.states[0]).re;
    let energy = tr.states.iter().map(|s| ((gen.expectation(s).re - e0) / e0).abs()).fold(0.0, f64::max);
    c.check("energy conservation", energy <= 1e-8, format!("{energy:.1e} relative"));

    let g = 0.08;
    let res = EmitterSet::single(Site::new(10, 10), quartic(&small, 0), g);
    let period = PI / rabi_frequency(small.alpha, g);
    let tk = grid(period, 1201);
    let full = emitter_population(&small, &res, &DissipationProfile::none(), &tk)?;
    let spectrum = diagonalize(&hs, DiagonalizationMode::Full)?;
    let kernel = lattice_kernel(&spectrum, &[small.index(Site::new(10, 10))])?;
    let memory = memory_kernel_evolution(&res, kernel, &[C64::new(1.0, 0.0)], &tk)?;
    let oracle = full.iter().zip(&memory).map(|(a, b)| (a - b[0].norm_sqr()).abs()).fold(0.0, f64::max);
    c.check("memory-kernel vs lattice evolution", oracle <= 0.02, format!("{oracle:.1e}"));

    let fortyby = LatticeSpec::new(40, 40, 0.0);
    let gm = 0.14;
    let gam = markov_decay_rate(gm, 1.0);
    let decay = emitter_population(
        &fortyby,
        &EmitterSet::single(Site::new(20, 20), fortyby.band_edge() + 0.5, gm),
        &DissipationProfile::absorbing(&fortyby, 4e-4),
        &grid(3.0 / gam, 301),
    )?;
    let mut running = f64::INFINITY;
    let mut revival = 0.0f64;
    for p in decay {
        running = running.min(p);
        revival = revival.max(p - running);
    }
    c.check("absorber suppresses revivals", revival <= 0.01, format!("largest rise {revival:.1e}"));

    // lpp-model
    let mut psd = f64::INFINITY;
    let mut kk = 0.0f64;
    let mut diag = 0.0f64;
    let proj = GreensProjection::new(1, alpha)?;
    for seed in 0..20u64 {
        let pts: Vec<Position> = (0..5)
            .map(|k| {
                let a = (seed * 7 + k * 13) as f64;
                [3.0 * (a * 0.37).sin(), 3.0 * (a * 0.91).cos()]
            })
            .collect();
        let gmat = gram_matrix(&pts, &proj);
        psd = psd.min(hermitian_eigenvalues(&gmat)?[0]);
        let km = coupling_matrix_k(&gmat)?;
        let prod = &km.k * km.k.adjoint();
        for a in 0..5 {
            diag = diag.max((gmat[(a, a)].re - alpha).abs());
            for b in 0..5 {
                kk = kk.max((prod[(a, b)] - gmat[(a, b)]).norm());
            }
        }
    }
    c.check("Gram positive semidefinite", psd >= -1e-12, format!("min eigenvalue {psd:.1e}"));
    c.check("K K† = G", kk <= 1e-10, format!("{kk:.1e}"));
    c.check("Gram diagonal = α", diag <= 1e-12, format!("{diag:.1e}"));

    let one = LppModel::from_lattice(&big, &EmitterSet::single(Site::new(20, 20), 0.0, 0.1), 0)?;
    let two = LppModel::from_lattice(&big, &EmitterSet::new(vec![Site::new(18, 20), Site::new(22, 20)], 0.0, 0.1), 0)?;
    let c1 = lpp_mode_commutator_check(&one, &big)?;
    let c2 = lpp_mode_commutator_check(&two, &big)?;
    let same = LppModel::new(vec![[1.0, 1.0], [1.0, 1.0]], 0, alpha, 0.0, 0.0, 0.1)?;
    let degenerate = lpp_mode_commutator_check(&same, &big).is_err();
    c.check("mode commutators", c1 < 1e-6 && c2 < 1e-3 && degenerate, format!("N=1: {c1:.1e}, N=2 d=4: {c2:.1e}, coincident rejected: {degenerate}"));

    let tri = equilateral_triangle([0.4, -0.7], 3.1);
    let model = LppModel::new(tri.clone(), 2, alpha, 0.9, 0.9, 0.12)?;
    let ev = sorted_real(&lpp_spectrum(&model, 1)?.1.eigenvalues);
    let sym = (0..ev.len()).map(|k| (ev[k] - 0.9 + ev[ev.len() - 1 - k] - 0.9).abs()).fold(0.0, f64::max);
    c.check("upper/lower polariton symmetry", sym <= 1e-12, format!("{sym:.1e}"));
    let moved: Vec<Position> = tri.iter().map(|p| [p[0] + 5.3, p[1] - 2.9]).collect();
    let shifted = LppModel::new(moved, 2, alpha, 0.9, 0.9, 0.12)?;
    let mut origin = 0.0f64;
    for sector in [1, 2] {
        let a = sorted_real(&lpp_spectrum(&model, sector)?.1.eigenvalues);
        let b = sorted_real(&lpp_spectrum(&shifted, sector)?.1.eigenvalues);
        origin = a.iter().zip(&b).fold(origin, |m, (x, y)| m.max((x - y).abs()));
    }
    c.check("gauge-origin invariance of H_LPP", origin <= 1e-10, format!("{origin:.1e}"));

    let lb = 1.0 / (TAU * alpha).sqrt();
    let mut tc = Vec::new();
    for d in [0.2, 0.1, 0.05] {
        let m = LppModel::new(equilateral_triangle([0.0, 0.0], d * lb), 0, alpha, 0.0, 0.0, 0.1)?;
        let ev = sorted_real(&lpp_spectrum(&m, 1)?.1.eigenvalues);
        let bright = 0.5 * (ev[5] - ev[0]);
        let dark = ev[1..5].iter().map(|x| x.abs()).fold(0.0, f64::max);
        tc.push(((bright / (3f64.sqrt() * m.rabi_frequency()) - 1.0).abs(), dark / m.rabi_frequency()));
    }
    let tc_ok = tc.iter().all(|x| x.0 <= 0.01) && tc[0].1 > tc[1].1 && tc[1].1 > tc[2].1;
    c.check(
        "Tavis-Cummings limit",
        tc_ok,
        format!(
            "collective coupling deviation at d/l_B = 0.2, 0.1, 0.05: {:.2e}, {:.2e}, {:.2e}; dark-state spread/Ω: {:.3}, {:.3}, {:.3}",
            tc[0].0, tc[1].0, tc[2].0, tc[0].1, tc[1].1, tc[2].1
        ),
    );
    let split = [0.3, 1.0, 2.0, 2.9].iter().all(|&th| {
        let l = triangle_eigenvalues(th);
        l[1] - l[0] > 1e-6 && l[2] - l[1] > 1e-6
    });
    c.check("chirality splitting", split, "θ_△ ∈ {0.3, 1.0, 2.0, 2.9}".into());

    // effective-dipole
    let jt = EffectiveCouplingMatrix::equilateral(0.04, 0.0);
    let t = grid(300.0, 301);
    let p = evolve_hardcore(&jt, &HardCoreState::excited(3, &[0])?, &t)?;
    let achiral = p.iter().map(|x| (x[1] - x[2]).abs()).fold(0.0, f64::max);
    c.check("no chirality at θ_△ = 0", achiral <= 1e-12, format!("max |p2 − p3| = {achiral:.1e}"));
    let jp = EffectiveCouplingMatrix::equilateral(0.04, FRAC_PI_2);
    let holes = evolve_hardcore(&jp, &HardCoreState::excited(3, &[1, 2])?, &t)?;
    let particles = evolve_hardcore(&jp.conjugate(), &HardCoreState::excited(3, &[0])?, &t)?;
    let ph = holes.iter().zip(&particles).map(|(h, q)| (0..3).map(|n| (1.0 - h[n] - q[n]).abs()).fold(0.0, f64::max)).fold(0.0, f64::max);
    c.check("hole follows the reversed-flux particle", ph <= 1e-10, format!("{ph:.1e}"));
    let scaled = evolve_hardcore(&jp.scaled(2.5), &HardCoreState::excited(3, &[0])?, &t.iter().map(|x| x / 2.5).collect::<Vec<_>>())?;
    let base = evolve_hardcore(&jp, &HardCoreState::excited(3, &[0])?, &t)?;
    let cov = scaled.iter().zip(&base).map(|(a, b)| (0..3).map(|n| (a[n] - b[n]).abs()).fold(0.0, f64::max)).fold(0.0, f64::max);
    c.check("time-scale covariance", cov <= 1e-10, format!("{cov:.1e}"));
    let jr = effective_couplings(&equilateral_triangle([1.0, 2.0], 2.5), 1, alpha, 0.1, 0.7, 0.0)?;
    let herm = (0..3).flat_map(|a| (0..3).map(move |b| (a, b))).map(|(a, b)| (jr.jtilde[(a, b)] - jr.jtilde[(b, a)].conj()).norm()).fold(0.0, f64::max);
    c.check("J̃ hermiticity", herm == 0.0, format!("{herm:.1e}"));

    // disorder
    let dspec = DisorderSpec { delta_omega_p: 0.1, seed: 99, n_realizations: 3 };
    let det = sample_disorder(&dspec, 500, 2)? == sample_disorder(&dspec, 500, 2)?;
    c.check("disorder determinism", det, "identical draws for equal (seed, k)".into());
    match chiral_ensembles() {
        Ok(ens) => {
            let mut jensen = f64::NEG_INFINITY;
            for r in &ens.results {
                let inc = r.incoherent_mean.as_ref().unwrap();
                for n in 0..3 {
                    for (a, b) in r.mean[n].iter().zip(&inc[n]) {
                        jensen = jensen.max(a - b);
                    }
                }
            }
            c.check("coherent average ≤ incoherent average", jensen <= 1e-12, format!("max excess {jensen:.1e}"));
            let drops: Vec<f64> = ens
                .results
                .iter()
                .map(|r| contrast_drop_time(&r.mean[0], &ens.times, ens.period, 0.5).unwrap_or(f64::INFINITY))
                .collect();
            let monotone = drops.windows(2).all(|w| w[1] <= w[0]);
            c.check("monotone degradation", monotone, format!("contrast-drop times {drops:?} for Δ/ω_c = {:?}", ens.deltas));
        }
        Err(e) => c.check("chiral ensembles", false, e.to_string()),
    }

    let n = c.lines.len();
    let failed = c.lines.iter().filter(|l| l.contains("FAIL")).count();
    let mut detail = format!("{} of {n} property checks hold", n - failed);
    for l in &c.lines {
        detail.push('\n');
        detail.push_str(l);
    }
    Ok(Outcome::new(c.pass, detail))
}

fn main() {
    let criteria: [(usize, &str, Criterion); 12] = [
        (1, "Landau gap", c1_landau_gap),
        (2, "Markovian decay", c2_markov_decay),
        (3, "vacuum Rabi oscillations", c3_vacuum_rabi),
        (4, "frozen emitter", c4_frozen_emitter),
        (5, "closed-form LPP spectra", c5_closed_form_lpp),
        (6, "polariton interaction", c6_polariton_interaction),
        (7, "chiral flow", c7_chiral_flow),
        (8, "projection validity", c8_projection_validity),
        (9, "gauge invariance", c9_gauge_invariance),
        (10, "effective butterfly", c10_effective_butterfly),
        (11, "disorder robustness", c11_disorder),
        (12, "property suites", c12_properties),
    ];
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failures = Vec::new();
    for (id, name, run) in criteria {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let outcome = run().unwrap_or_else(|e| Outcome::new(false, format!("error: {e}")));
        println!(
            "criterion {id:>2} {} {name} [{:.1}s]: {}",
            if outcome.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            outcome.detail
        );
        if !outcome.pass {
            failures.push(id);
        }
    }
    if !failures.is_empty() {
        println!("failed criteria: {failures:?}");
        std::process::exit(1);
    }
}
