//! Dispatch from a validated configuration to the simulation library.

use std::f64::consts::TAU;
use std::path::Path;
use std::time::Instant;

use lpp_core::dipole::{chirality_determinant, effective_couplings, emitter_lattice_spectrum, evolve_hardcore, triangle_phase, HardCoreState};
use lpp_core::disorder::{
    averaged_excitation_spectrum, averaged_population, contrast_drop_time, emitter_amplitudes, first_revival_time, prominent_maxima,
    revival_heights, DisorderSpec, DisorderedSystem,
};
use lpp_core::dynamics::{evolve_single_excitation, photon_current, rabi_frequency, EvolutionOptions, Keep, SingleExcitationState};
use lpp_core::lattice::build_hamiltonian;
use lpp_core::lpp::{build_lpp_hamiltonian, excitation_spectrum, lpp_spectrum, two_photon_correlation, LppModel};
use lpp_core::spectrum::{butterfly_scan, diagonalize, projected_dos};
use lpp_core::{DiagonalizationMode, Execution, Site};
use serde::Serialize;
use serde_json::json;

use crate::config::{Experiment, ExperimentConfig, Observable};
use crate::output::{header, numbered, sci, sha256_hex, OutputDir, RunManifest};
use crate::CliError;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads reported in the manifest; the pool itself is set up
    /// by the caller.
    pub threads: usize,
    pub execution: Execution,
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

/// Validates `cfg`, runs its experiment into `out` and writes the manifest.
pub fn run(cfg: &ExperimentConfig, out: &Path, opts: &RunOptions) -> Result<RunManifest, CliError> {
    cfg.validate()?;
    let start = Instant::now();
    let mut hashed = cfg.clone();
    hashed.output = None;
    let config_hash = sha256_hex(hashed.to_toml().as_bytes());
    let (norm, units) = cfg.normalized();
    let experiment = norm.experiment.expect("validated");
    let mut dir = OutputDir::create(out)?;
    log::info!("running {experiment} into {}", out.display());
    let exec = opts.execution;
    match experiment {
        Experiment::Butterfly => butterfly(&norm, &mut dir, exec)?,
        Experiment::Dos => dos(&norm, &mut dir, exec)?,
        Experiment::Evolve => evolve(&norm, &mut dir)?,
        Experiment::Lpp => lpp(&norm, &mut dir, exec)?,
        Experiment::Chiral => chiral(&norm, &mut dir)?,
        Experiment::EmitterButterfly => emitter_butterfly(&norm, &mut dir)?,
        Experiment::DisorderSweep => disorder_sweep(&norm, &mut dir, exec)?,
    }
    let seed = matches!(experiment, Experiment::DisorderSweep).then(|| norm.disorder_seed());
    let manifest = RunManifest {
        experiment: experiment.name().to_string(),
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash,
        seed,
        threads: opts.threads,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        units,
        metadata: cfg.metadata.clone(),
        outputs: dir.checksums().clone(),
    };
    dir.finish(&manifest)?;
    Ok(manifest)
}

fn butterfly(cfg: &ExperimentConfig, dir: &mut OutputDir, exec: Execution) -> Result<(), CliError> {
    let p = cfg.butterfly.as_ref().expect("validated");
    let alphas = linspace(p.alpha_min, p.alpha_max, p.count);
    let mode = p.lowest.map_or(DiagonalizationMode::Full, DiagonalizationMode::LowestK);
    let levels = butterfly_scan(&cfg.lattice_spec(), cfg.gauge(), &alphas, mode, exec).map_err(CliError::numerical("butterfly scan"))?;
    let rows = alphas
        .iter()
        .zip(&levels)
        .flat_map(|(&a, ev)| ev.iter().enumerate().map(move |(k, &w)| vec![sci(a), k.to_string(), sci(w)]));
    dir.csv("butterfly.csv", &header(&["alpha", "eigenvalue_index", "omega_over_J"]), rows)
}

fn dos(cfg: &ExperimentConfig, dir: &mut OutputDir, exec: Execution) -> Result<(), CliError> {
    let p = cfg.dos.as_ref().expect("validated");
    let spec = cfg.lattice_spec();
    let site = p.site.map_or(Site::new(spec.nx / 2, spec.ny / 2), |s| Site::new(s[0], s[1]));
    let lo = p.omega_min.unwrap_or(spec.omega_p - 4.5);
    let hi = p.omega_max.unwrap_or(spec.omega_p + 4.5);
    let omegas = linspace(lo, hi, p.points);
    let h = build_hamiltonian(&spec, cfg.gauge(), None).map_err(CliError::numerical("building the lattice Hamiltonian"))?;
    let spectrum = diagonalize(&h, DiagonalizationMode::Full).map_err(CliError::numerical("diagonalizing the lattice"))?;
    let rho = projected_dos(&spectrum, &spec, site, &omegas, p.broadening, exec).map_err(CliError::numerical("projected density of states"))?;
    dir.csv("dos.csv", &header(&["omega_over_J", "rho"]), omegas.iter().zip(&rho).map(|(w, r)| vec![sci(*w), sci(*r)]))
}

fn evolve(cfg: &ExperimentConfig, dir: &mut OutputDir) -> Result<(), CliError> {
    let p = cfg.evolve.as_ref().expect("validated");
    let spec = cfg.lattice_spec();
    let gauge = cfg.gauge();
    let emitters = cfg.emitter_set().expect("validated");
    let times = linspace(0.0, p.t_max, p.points);
    let step = p.t_max / (p.points - 1) as f64;
    let mut snaps: Vec<usize> = p.snapshots.iter().map(|t| ((t / step).round() as usize).min(p.points - 1)).collect();
    snaps.sort_unstable();
    snaps.dedup();
    let h = build_hamiltonian(&spec, gauge, None).map_err(CliError::numerical("building the lattice Hamiltonian"))?;
    let init = SingleExcitationState::excited_emitter(p.initial, emitters.len(), spec.num_sites());
    let opts = EvolutionOptions { propagator: p.propagator.into(), max_step: None, keep: Keep::At(snaps.clone()) };
    let tr = evolve_single_excitation(&spec, &h, &emitters, &cfg.dissipation_profile(), &init, &times, &opts)
        .map_err(CliError::numerical("single-excitation evolution"))?;

    let n = emitters.len();
    let mut cols = vec!["t".to_string()];
    cols.extend(numbered("p_e", n));
    cols.push("photon_norm".into());
    let rows = (0..times.len()).map(|k| {
        let mut row = vec![sci(times[k])];
        row.extend(tr.emitter[k].iter().map(|c| sci(c.norm_sqr())));
        row.push(sci(tr.photon_norm[k]));
        row
    });
    dir.csv("population.csv", &cols, rows)?;

    for (k, state) in tr.states.iter().enumerate() {
        let current = photon_current(&state.phi, &spec, gauge).map_err(CliError::numerical("photon current"))?;
        let rows = (0..spec.num_sites()).map(|i| {
            let s = spec.site(i);
            let z = state.phi[i];
            vec![s.x.to_string(), s.y.to_string(), sci(z.re), sci(z.im), sci(current[i][0]), sci(current[i][1])]
        });
        dir.csv(&format!("field_t{k}.csv"), &header(&["x", "y", "re_phi", "im_phi", "jx", "jy"]), rows)?;
    }
    let snapshot_times: Vec<f64> = tr.states.iter().map(|s| s.t).collect();
    dir.json("evolve.json", &json!({ "omega_e": emitters.omega_e, "g": emitters.g, "snapshot_times": snapshot_times }))
}

fn lpp(cfg: &ExperimentConfig, dir: &mut OutputDir, exec: Execution) -> Result<(), CliError> {
    let p = cfg.lpp.as_ref().expect("validated");
    let spec = cfg.lattice_spec();
    let e = cfg.emitters.as_ref().expect("validated");
    let positions = cfg.emitter_positions();
    let omega_e = cfg.emitter_frequency().expect("validated");
    let omega_ell = cfg.landau_level(p.ell);
    let gamma_p = cfg.dissipation_profile().gamma_p;
    let model = LppModel::new(positions.clone(), p.ell, spec.alpha, omega_e, omega_ell, e.g)
        .map_err(CliError::numerical("building the LPP model"))?
        .with_losses(e.gamma_e, gamma_p);
    let lossless = model.clone().with_losses(0.0, 0.0);

    let (_, spectrum) = lpp_spectrum(&model, p.sector).map_err(CliError::numerical("LPP spectrum"))?;
    let rows = spectrum.eigenvalues.iter().enumerate().map(|(k, w)| vec![k.to_string(), sci(w.re), sci(w.im)]);
    dir.csv("spectrum.csv", &header(&["index", "re_omega", "im_omega"]), rows)?;

    let omega = model.rabi_frequency();
    let span = 3.0 * omega * (positions.len() as f64).sqrt();
    let lo = p.omega_min.unwrap_or(omega_e - span);
    let hi = p.omega_max.unwrap_or(omega_e + span);
    let omegas = linspace(lo, hi, p.points);
    let linewidth = p.linewidth.unwrap_or(if e.gamma_e > 0.0 { e.gamma_e } else { 0.02 * omega });
    let (basis1, h1) = build_lpp_hamiltonian(&lossless, 1).map_err(CliError::numerical("sector-1 Hamiltonian"))?;
    let mut s = excitation_spectrum(&basis1, &h1, p.probe, &omegas, linewidth, exec).map_err(CliError::numerical("excitation spectrum"))?;
    let s_max = s.iter().copied().fold(0.0, f64::max);
    if p.normalize && s_max > 0.0 {
        s.iter_mut().for_each(|v| *v /= s_max);
    }
    dir.csv("excitation_spectrum.csv", &header(&["omega", "S"]), omegas.iter().zip(&s).map(|(w, v)| vec![sci(*w), sci(*v)]))?;

    if !p.correlation_states.is_empty() {
        let (basis2, two) = lpp_spectrum(&lossless, 2).map_err(CliError::numerical("sector-2 spectrum"))?;
        let vecs = two.eigenvectors.expect("lossless sector has eigenvectors");
        let grid: Vec<_> = (0..spec.num_sites()).map(|i| spec.position_of_index(i)).collect();
        for &state in &p.correlation_states {
            if state >= vecs.ncols() {
                return Err(CliError::Validation(vec![crate::FieldError {
                    path: "lpp.correlation_states".into(),
                    message: format!("state {state} exceeds the {}-dimensional two-excitation sector", vecs.ncols()),
                }]));
            }
            let column: Vec<_> = (0..vecs.nrows()).map(|r| vecs[(r, state)]).collect();
            let c = two_photon_correlation(&column, &basis2, &lossless, &grid, positions[p.reference])
                .map_err(CliError::numerical("two-photon correlation"))?;
            let rows = (0..spec.num_sites()).map(|i| {
                let site = spec.site(i);
                vec![site.x.to_string(), site.y.to_string(), sci(c[i])]
            });
            dir.csv(&format!("correlation_{state}.csv"), &header(&["x", "y", "C"]), rows)?;
        }
    }

    #[derive(Serialize)]
    struct Sidecar {
        ell: usize,
        sector: usize,
        alpha: f64,
        magnetic_length: f64,
        rabi_frequency: f64,
        omega_e: f64,
        omega_ell: f64,
        gamma_e: f64,
        gamma_p: f64,
        gram_eigenvalues: Vec<f64>,
        rank: usize,
        positions: Vec<[f64; 2]>,
        linewidth: f64,
        normalized: bool,
        spectrum_max: f64,
    }
    dir.json(
        "lpp.json",
        &Sidecar {
            ell: p.ell,
            sector: p.sector,
            alpha: spec.alpha,
            magnetic_length: model.magnetic_length(),
            rabi_frequency: omega,
            omega_e,
            omega_ell,
            gamma_e: e.gamma_e,
            gamma_p,
            gram_eigenvalues: model.coupling.gram_eigenvalues.clone(),
            rank: model.coupling.rank,
            positions,
            linewidth,
            normalized: p.normalize,
            spectrum_max: s_max,
        },
    )
}

fn chiral(cfg: &ExperimentConfig, dir: &mut OutputDir) -> Result<(), CliError> {
    let p = cfg.chiral.as_ref().expect("validated");
    let e = cfg.emitters.as_ref().expect("validated");
    let positions = cfg.emitter_positions();
    let n = positions.len();
    let omega_e = cfg.emitter_frequency().expect("validated");
    let j = effective_couplings(&positions, p.ell, cfg.lattice.alpha, e.g, omega_e, cfg.landau_level(p.ell))
        .map_err(CliError::numerical("effective couplings"))?;
    let period = TAU / (3f64.sqrt() * j.g0.abs());
    let times = linspace(0.0, p.t_max.unwrap_or(2.0 * period), p.points);
    let init = HardCoreState::excited(n, &p.initial).map_err(CliError::numerical("initial state"))?;
    let pops = evolve_hardcore(&j, &init, &times).map_err(CliError::numerical("hard-core evolution"))?;
    let mut cols = vec!["t".to_string()];
    cols.extend((1..=n).map(|k| format!("p{k}")));
    let rows = times.iter().zip(&pops).map(|(t, p)| std::iter::once(sci(*t)).chain(p.iter().map(|v| sci(*v))).collect());
    dir.csv("chiral.csv", &cols, rows)?;
    let (theta, det) = if n == 3 {
        let d = chirality_determinant(&j).map_err(CliError::numerical("chirality determinant"))?;
        (Some(triangle_phase(&j).map_err(CliError::numerical("triangle phase"))?), Some([d.re, d.im]))
    } else {
        (None, None)
    };
    dir.json(
        "chiral.json",
        &json!({ "g0": j.g0, "theta_triangle": theta, "chirality_determinant": det, "period": period, "positions": positions }),
    )
}

fn emitter_butterfly(cfg: &ExperimentConfig, dir: &mut OutputDir) -> Result<(), CliError> {
    let p = cfg.emitter_butterfly.as_ref().expect("validated");
    let e = cfg.emitters.as_ref().expect("validated");
    let detuning = cfg.emitter_frequency().expect("validated") - cfg.landau_level(p.ell);
    let mut summary = Vec::new();
    for (k, &d) in p.spacings.iter().enumerate() {
        let cutoff = p.nearest_neighbour.then_some(1.01 * d);
        let s = emitter_lattice_spectrum(p.nx, p.ny, d, p.ell, cfg.lattice.alpha, e.g, detuning, cutoff)
            .map_err(CliError::numerical(format!("emitter lattice with spacing {d}")))?;
        let rows = s.eigenvalues.iter().enumerate().map(|(i, w)| vec![i.to_string(), sci(*w)]);
        dir.csv(&format!("emitter_butterfly_{k}.csv"), &header(&["index", "omega_over_Jnn"]), rows)?;
        summary.push(json!({ "spacing": d, "alpha_eff": s.alpha_eff, "nearest_neighbour_coupling": s.nearest_neighbour }));
    }
    dir.json("emitter_butterfly.json", &json!({ "detuning": detuning, "spacings": summary }))
}

fn disorder_sweep(cfg: &ExperimentConfig, dir: &mut OutputDir, exec: Execution) -> Result<(), CliError> {
    let p = cfg.disorder_sweep.as_ref().expect("validated");
    let d = cfg.disorder.as_ref().expect("validated");
    let system = DisorderedSystem {
        lattice: cfg.lattice_spec(),
        gauge: cfg.gauge(),
        emitters: cfg.emitter_set().expect("validated"),
        gamma_p: cfg.dissipation_profile().gamma_p,
    };
    let seed = cfg.disorder_seed();
    let n = system.emitters.len();
    let mut summary = Vec::new();
    match p.observable {
        Observable::Spectrum => {
            let w0 = system.emitters.omega_e;
            let omega = rabi_frequency(system.lattice.alpha, system.emitters.g);
            let lo = p.omega_min.unwrap_or(w0 - 5.0 * omega);
            let hi = p.omega_max.unwrap_or(w0 + 5.0 * omega);
            let omegas = linspace(lo, hi, p.points);
            for (k, &delta) in p.deltas.iter().enumerate() {
                let spec = DisorderSpec { delta_omega_p: delta, seed, n_realizations: d.n_realizations };
                let r = averaged_excitation_spectrum(&system, &spec, p.emitter, &omegas, p.keep_realizations, exec)
                    .map_err(CliError::numerical(format!("disorder ensemble at delta = {delta}")))?;
                let mean = &r.mean[0];
                dir.csv(&format!("spectrum_delta_{k}.csv"), &header(&["omega", "S"]), omegas.iter().zip(mean).map(|(w, s)| vec![sci(*w), sci(*s)]))?;
                if let Some(all) = &r.realizations {
                    let rows = all.iter().enumerate().flat_map(|(i, real)| {
                        omegas.iter().zip(&real[0]).map(move |(w, s)| vec![i.to_string(), sci(*w), sci(*s)])
                    });
                    dir.csv(&format!("spectrum_delta_{k}_realizations.csv"), &header(&["realization", "omega", "S"]), rows)?;
                }
                let peaks: Vec<f64> = prominent_maxima(mean, 0.3).into_iter().map(|(i, _)| omegas[i]).collect();
                summary.push(json!({ "delta_omega_p": delta, "maxima": peaks }));
            }
        }
        Observable::Population => {
            let times = linspace(0.0, p.t_max.expect("validated"), p.points);
            let clean = emitter_amplitudes(&system, None, p.emitter, &times).map_err(CliError::numerical("clean evolution"))?;
            let clean_p: Vec<f64> = clean[p.emitter].iter().map(|z| z.norm_sqr()).collect();
            let period = first_revival_time(&clean_p, &times);
            for (k, &delta) in p.deltas.iter().enumerate() {
                let spec = DisorderSpec { delta_omega_p: delta, seed, n_realizations: d.n_realizations };
                let r = averaged_population(&system, &spec, p.emitter, &times, p.keep_realizations, exec)
                    .map_err(CliError::numerical(format!("disorder ensemble at delta = {delta}")))?;
                let mut cols = vec!["t".to_string()];
                cols.extend(numbered("pbar", n));
                let rows = (0..times.len()).map(|i| std::iter::once(sci(times[i])).chain(r.mean.iter().map(|m| sci(m[i]))).collect());
                dir.csv(&format!("population_delta_{k}.csv"), &cols, rows)?;
                if let Some(all) = &r.realizations {
                    let mut cols = vec!["realization".to_string(), "t".to_string()];
                    cols.extend(numbered("p", n));
                    let rows = all.iter().enumerate().flat_map(|(j, real)| {
                        let times = &times;
                        (0..times.len()).map(move |i| {
                            [j.to_string(), sci(times[i])].into_iter().chain(real.iter().map(|m| sci(m[i]))).collect()
                        })
                    });
                    dir.csv(&format!("population_delta_{k}_realizations.csv"), &cols, rows)?;
                }
                let mean = &r.mean[p.emitter];
                let first = period.map(|t| revival_heights(mean, &times, t, 1)[0]);
                let drop = period.and_then(|t| contrast_drop_time(mean, &times, t, 0.5));
                summary.push(json!({ "delta_omega_p": delta, "first_revival_height": first, "contrast_drop_time": drop }));
            }
            summary.insert(0, json!({ "clean_period": period }));
        }
    }
    dir.json("summary.json", &json!({ "seed": seed, "n_realizations": d.n_realizations, "results": summary }))
}
