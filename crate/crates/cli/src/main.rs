use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lpp_core::Execution;
use lpp_sim::config::Observable;
use lpp_sim::{presets, run, CliError, Experiment, ExperimentConfig, FieldError, RunOptions, OUTPUT_ROOT_ENV};

/// Landau-polariton lattice simulator.
#[derive(Parser)]
#[command(name = "lpp-sim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML experiment file.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Start from a named preset instead of a file.
    #[arg(long)]
    preset: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 lets rayon decide.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Disable data parallelism.
    #[arg(long)]
    sequential: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Hofstadter butterfly of the bare lattice.
    Butterfly(Common),
    /// Local photonic density of states.
    Dos(Common),
    /// Single-excitation time evolution.
    Evolve(Common),
    /// Landau-photon-polariton spectra and correlations.
    Lpp {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        sector: Option<usize>,
        /// Rescale the excitation spectrum to unit maximum.
        #[arg(long)]
        normalize: bool,
    },
    /// Chiral transfer around an emitter triangle.
    Chiral(Common),
    /// Butterfly of an emitter lattice with effective couplings.
    EmitterButterfly(Common),
    /// Disorder-averaged spectra or populations.
    DisorderSweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated disorder widths.
        #[arg(long, value_delimiter = ',')]
        deltas: Option<Vec<f64>>,
        /// Number of disorder realizations.
        #[arg(long)]
        ndis: Option<usize>,
        #[arg(long, value_enum)]
        observable: Option<ObservableArg>,
    },
    /// Run whatever experiment the configuration names.
    Run(Common),
    /// Print a preset as TOML, or list the presets.
    Preset { name: Option<String> },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum ObservableArg {
    Spectrum,
    Population,
}

fn field(path: &str, message: impl Into<String>) -> CliError {
    CliError::Validation(vec![FieldError { path: path.into(), message: message.into() }])
}

fn load(common: &Common) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match (&common.config, &common.preset) {
        (Some(path), _) => ExperimentConfig::load(path)?,
        (None, Some(name)) => presets::preset(name)
            .ok_or_else(|| field("preset", format!("unknown preset {name:?}; known: {}", presets::NAMES.join(", "))))?,
        (None, None) => return Err(field("config", "pass --config <file> or --preset <name>")),
    };
    if let Some(seed) = common.seed {
        cfg.seed = Some(seed);
        if let Some(d) = &mut cfg.disorder {
            d.seed = Some(seed);
        }
    }
    Ok(cfg)
}

fn select(cfg: &mut ExperimentConfig, wanted: Experiment) -> Result<(), CliError> {
    match cfg.experiment {
        Some(e) if e != wanted => Err(field("experiment", format!("configuration is for {e}, not {wanted}"))),
        _ => {
            cfg.experiment = Some(wanted);
            Ok(())
        }
    }
}

fn output_dir(common: &Common, cfg: &ExperimentConfig) -> PathBuf {
    let name = cfg.experiment.map_or("run", |e| e.name());
    common
        .out
        .clone()
        .or_else(|| cfg.output.clone())
        .or_else(|| std::env::var_os(OUTPUT_ROOT_ENV).map(|root| PathBuf::from(root).join(name)))
        .unwrap_or_else(|| PathBuf::from("lpp-out").join(name))
}

fn execute(common: &Common, mut cfg: ExperimentConfig) -> Result<(), CliError> {
    if common.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(common.threads).build_global() {
            log::warn!("could not configure the thread pool: {e}");
        }
    }
    let out = output_dir(common, &cfg);
    cfg.output = None;
    let opts = RunOptions {
        threads: rayon::current_num_threads(),
        execution: if common.sequential { Execution::Sequential } else { Execution::Parallel },
    };
    let manifest = run(&cfg, &out, &opts)?;
    println!("{} finished in {:.2} s, {} files in {}", manifest.experiment, manifest.wall_clock_seconds, manifest.outputs.len(), out.display());
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let (common, experiment) = match &cli.command {
        Command::Preset { name: None } => {
            presets::NAMES.iter().for_each(|n| println!("{n}"));
            return Ok(());
        }
        Command::Preset { name: Some(name) } => {
            let cfg = presets::preset(name).ok_or_else(|| field("preset", format!("unknown preset {name:?}")))?;
            print!("{}", cfg.to_toml());
            return Ok(());
        }
        Command::Butterfly(c) => (c, Some(Experiment::Butterfly)),
        Command::Dos(c) => (c, Some(Experiment::Dos)),
        Command::Evolve(c) => (c, Some(Experiment::Evolve)),
        Command::Lpp { common, .. } => (common, Some(Experiment::Lpp)),
        Command::Chiral(c) => (c, Some(Experiment::Chiral)),
        Command::EmitterButterfly(c) => (c, Some(Experiment::EmitterButterfly)),
        Command::DisorderSweep { common, .. } => (common, Some(Experiment::DisorderSweep)),
        Command::Run(c) => (c, None),
    };
    let mut cfg = load(common)?;
    if let Some(e) = experiment {
        select(&mut cfg, e)?;
    }
    match &cli.command {
        Command::Lpp { sector, normalize, .. } => {
            if let Some(p) = &mut cfg.lpp {
                if let Some(s) = sector {
                    p.sector = *s;
                }
                p.normalize |= normalize;
            }
        }
        Command::DisorderSweep { deltas, ndis, observable, .. } => {
            if let Some(p) = &mut cfg.disorder_sweep {
                if let Some(d) = deltas {
                    p.deltas = d.clone();
                }
                if let Some(o) = observable {
                    p.observable = match o {
                        ObservableArg::Spectrum => Observable::Spectrum,
                        ObservableArg::Population => Observable::Population,
                    };
                }
            }
            if let (Some(d), Some(n)) = (&mut cfg.disorder, ndis) {
                d.n_realizations = *n;
            }
        }
        _ => {}
    }
    execute(common, cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
