//! Named configurations.

use std::collections::BTreeMap;

use crate::config::*;

pub const NAMES: [&str; 7] = ["paper-microwave", "fig1b", "fig2", "fig3a", "fig4a", "fig4b", "fig-s2"];

fn lattice(nx: usize, ny: usize, alpha: f64) -> LatticeSection {
    LatticeSection { nx, ny, alpha, omega_p: 0.0, hopping: 1.0, origin: None }
}

fn base(experiment: Experiment, lattice: LatticeSection) -> ExperimentConfig {
    ExperimentConfig {
        experiment: Some(experiment),
        gauge: GaugeChoice::Symmetric,
        seed: None,
        output: None,
        metadata: BTreeMap::new(),
        units: None,
        lattice,
        emitters: None,
        dissipation: None,
        disorder: None,
        butterfly: None,
        dos: None,
        evolve: None,
        lpp: None,
        chiral: None,
        emitter_butterfly: None,
        disorder_sweep: None,
    }
}

fn emitters(positions: Vec<[f64; 2]>, g: f64) -> EmitterSection {
    EmitterSection { positions, triangle: None, g, gamma_e: 0.0, omega_e: None, delta_e: None, resonance: None }
}

fn note(cfg: &mut ExperimentConfig, key: &str, value: &str) {
    cfg.metadata.insert(key.to_string(), value.to_string());
}

pub fn preset(name: &str) -> Option<ExperimentConfig> {
    let cfg = match name {
        "paper-microwave" => {
            let mut c = base(Experiment::Evolve, LatticeSection { omega_p: 5400.0, hopping: 100.0, ..lattice(24, 24, 1.0 / 6.0) });
            c.units = Some(Units { frequency: "MHz".into() });
            let mut e = emitters(vec![[12.0, 12.0]], 20.0);
            e.omega_e = Some(5000.0);
            e.gamma_e = 0.05;
            c.emitters = Some(e);
            c.dissipation = Some(DissipationSection { gamma_p: 0.05, absorber: false, gamma_edge: None, r0: None, width: 2.0 });
            c.disorder = Some(DisorderSection { delta_omega_p: 1.0, n_realizations: 100, seed: None });
            c.evolve = Some(EvolveParams { t_max: 200.0, points: 1001, snapshots: Vec::new(), propagator: PropagatorChoice::Rk4, initial: 0 });
            note(&mut c, "source", "microwave resonator parameters");
            note(&mut c, "geometry", "lattice size and flux are not part of the table; 24x24 at alpha = 1/6 chosen");
            c
        }
        "fig1b" => {
            let mut c = base(Experiment::Dos, lattice(20, 20, 0.08));
            c.dos = Some(DosParams { site: Some([10, 10]), omega_min: Some(-4.5), omega_max: Some(4.5), points: 9001, broadening: 1e-3 });
            c
        }
        "fig2" => {
            let mut c = base(Experiment::Evolve, lattice(50, 50, 0.08));
            let mut e = emitters(vec![[25.0, 25.0]], 0.14);
            e.delta_e = Some(1.35);
            c.emitters = Some(e);
            c.dissipation = Some(DissipationSection { gamma_p: 4e-4, absorber: true, gamma_edge: None, r0: None, width: 2.0 });
            c.evolve = Some(EvolveParams { t_max: 300.0, points: 1201, snapshots: vec![40.0], propagator: PropagatorChoice::Rk4, initial: 0 });
            note(&mut c, "absorber", "edge absorber with gamma_edge = 1000 gamma_p and R0 = 25 assumed");
            c
        }
        "fig3a" => {
            let mut c = base(Experiment::Lpp, lattice(40, 40, 0.08));
            let mut e = emitters(Vec::new(), 0.14);
            e.triangle = Some(Triangle { side: 4.0, center: None, clockwise: false });
            e.resonance = Some(Resonance { level: 1, detuning: 0.0 });
            c.emitters = Some(e);
            c.lpp = Some(LppParams {
                ell: 1,
                sector: 2,
                omega_min: None,
                omega_max: None,
                points: 1001,
                probe: 0,
                linewidth: None,
                correlation_states: vec![0, 1, 2],
                reference: 0,
                normalize: true,
            });
            c
        }
        "fig4a" => {
            let alpha = 1.0 / (16.0 * 3f64.sqrt());
            let mut c = base(Experiment::Chiral, lattice(30, 30, alpha));
            let mut e = emitters(Vec::new(), 0.1);
            e.triangle = Some(Triangle { side: 4.0, center: None, clockwise: true });
            e.resonance = Some(Resonance { level: 0, detuning: -0.5 });
            c.emitters = Some(e);
            c.chiral = Some(ChiralParams { ell: 0, t_max: None, points: 1001, initial: vec![0] });
            note(&mut c, "detuning", "emitter detuning from the lowest Landau level not stated; -0.5 J assumed");
            c
        }
        "fig4b" => {
            let mut c = base(Experiment::EmitterButterfly, lattice(40, 40, 0.08));
            let mut e = emitters(Vec::new(), 0.1);
            e.resonance = Some(Resonance { level: 0, detuning: -0.5 });
            c.emitters = Some(e);
            c.emitter_butterfly = Some(EmitterButterflyParams { nx: 20, ny: 20, spacings: vec![2.0, 5.39], ell: 0, nearest_neighbour: true });
            c
        }
        "fig-s2" => {
            let alpha = 1.0 / (16.0 * 3f64.sqrt());
            let mut c = base(Experiment::DisorderSweep, LatticeSection { omega_p: 9.5, hopping: 0.75, ..lattice(31, 31, alpha) });
            c.units = Some(Units { frequency: "arbitrary".into() });
            let mut e = emitters(vec![[13.0, 13.0], [17.0, 13.0], [15.0, 16.0]], 0.1);
            e.omega_e = Some(0.5);
            c.emitters = Some(e);
            c.disorder = Some(DisorderSection { delta_omega_p: 0.0, n_realizations: 100, seed: Some(1) });
            c.disorder_sweep = Some(DisorderSweepParams {
                deltas: vec![0.05, 0.1, 0.2, 0.5],
                observable: Observable::Population,
                omega_min: None,
                omega_max: None,
                t_max: Some(2.0e5),
                points: 801,
                emitter: 0,
                keep_realizations: false,
            });
            note(&mut c, "ambiguity", "reference values stored verbatim (omega_p = 9.5, omega_e = 0.5, J = 0.75, arbitrary units, triangular lattice, gamma = 1e-5); run on a square lattice without losses, and the resonance condition implied by these numbers is unclear");
            c
        }
        _ => return None,
    };
    Some(cfg)
}
