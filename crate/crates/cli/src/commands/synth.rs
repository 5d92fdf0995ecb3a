use std::path::PathBuf;

use anyhow::{anyhow, Context};
use clap::Args;
use lineshape::experiment::GridSpec;
use lineshape::units::ns_to_s;
use lineshape::{sample_profile, ExperimentConfig};

use super::{create, open};
use crate::args::{parse_frequency, parse_grid, PulseArgs};
use crate::failure::{Classify, Outcome};
use crate::manifest::RunManifest;

/// Flags override the matching fields of `--config`.
#[derive(Args, Debug)]
pub struct SynthArgs {
    /// Experiment configuration JSON; the pulse flags are then not allowed
    #[arg(long)]
    pub config: Option<PathBuf>,

    #[command(flatten)]
    pub pulse: PulseArgs,

    /// Detuning grid, ±SPAN:N or LO:HI:N [default: ±40MHz:101]
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
    pub grid: Option<GridSpec>,

    /// Shots per detuning [default: 4096]
    #[arg(long)]
    pub shots: Option<u32>,

    /// Ground-state readout error ε₀
    #[arg(long)]
    pub eps0: Option<f64>,

    /// Excited-state readout error ε₁
    #[arg(long)]
    pub eps1: Option<f64>,

    /// Offset of the true resonance, e.g. 200kHz
    #[arg(long, value_parser = parse_frequency, allow_hyphen_values = true)]
    pub delta0: Option<f64>,

    /// Sampling seed; equal seeds reproduce the dataset exactly
    #[arg(long)]
    pub seed: Option<u64>,

    /// Propagator step in ns [default: 2/9]
    #[arg(long)]
    pub dt_ns: Option<f64>,

    /// Dataset CSV to write
    #[arg(short, long)]
    pub output: PathBuf,
}

pub fn run(args: SynthArgs) -> Outcome<()> {
    let mut config = match (&args.config, args.pulse.is_empty()) {
        (Some(path), true) => {
            let file = open(path)?;
            lineshape::io::read_json::<_, ExperimentConfig>(file)
                .with_context(|| format!("invalid experiment config {}", path.display()))
                .usage()?
        }
        (Some(_), false) => return Err(anyhow!("--config cannot be combined with pulse flags")).usage(),
        (None, _) => ExperimentConfig::new(args.pulse.resolve()?),
    };
    if let Some(grid) = args.grid {
        config.grid = grid;
    }
    if let Some(shots) = args.shots {
        config.shots = shots;
    }
    if let Some(e) = args.eps0 {
        config.eps0 = e;
    }
    if let Some(e) = args.eps1 {
        config.eps1 = e;
    }
    if let Some(d) = args.delta0 {
        config.delta0_hz = d;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(ns) = args.dt_ns {
        config.dt = ns_to_s(ns);
    }
    config.validate().usage()?;
    if !(config.dt.is_finite() && config.dt > 0.0) {
        return Err(anyhow!("propagator step must be positive")).usage();
    }

    let data = sample_profile(&config).runtime()?;
    lineshape::io::write_dataset_csv(create(&args.output)?, &data).runtime()?;

    let mut manifest = RunManifest::new("synth", &config).runtime()?.output(&args.output);
    if let Some(path) = &args.config {
        manifest = manifest.input(path);
    }
    manifest.write_beside(&args.output).runtime()?;
    Ok(())
}
