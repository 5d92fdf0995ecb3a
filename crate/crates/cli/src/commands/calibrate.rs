use std::path::PathBuf;

use clap::Args;
use lineshape::experiment::GridSpec;
use lineshape::{PulseKind, PulseSpec, RzcForm};
use serde::{Deserialize, Serialize};

use super::{calibrate, create};
use crate::args::{dt_seconds, parse_form, parse_grid, PulseArgs};
use crate::failure::{Classify, Outcome};
use crate::manifest::RunManifest;

#[derive(Args, Debug)]
pub struct CalibrateArgs {
    #[command(flatten)]
    pub pulse: PulseArgs,

    /// RZC algebraic form: strict or as_printed
    #[arg(long, default_value = "strict", value_parser = parse_form)]
    pub form: RzcForm,

    /// Detuning grid the least-squares objective runs over
    #[arg(long, default_value = "±40MHz:201", value_parser = parse_grid, allow_hyphen_values = true)]
    pub grid: GridSpec,

    /// Propagator step in ns [default: 2/9]
    #[arg(long)]
    pub dt_ns: Option<f64>,

    /// JSON record to write
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CalibrationRecord {
    pub kind: PulseKind,
    pub form: RzcForm,
    pub a: f64,
    /// Max |RZC − numeric| over the grid.
    pub residual: f64,
    pub grid_spec: GridSpec,
}

#[derive(Serialize)]
struct CalibrateConfig {
    pulse: PulseSpec,
    form: RzcForm,
    grid: GridSpec,
    dt_s: f64,
}

pub fn run(args: CalibrateArgs) -> Outcome<()> {
    let spec = args.pulse.resolve()?;
    let dt = dt_seconds(args.dt_ns)?;
    let grid = args.grid.detunings().usage()?;
    let result = calibrate(&spec, args.form, &grid, dt)?;
    let record = CalibrationRecord {
        kind: spec.kind(),
        form: args.form,
        a: result.a,
        residual: result.residual,
        grid_spec: args.grid,
    };
    lineshape::io::write_json(create(&args.output)?, &record).runtime()?;

    let config = CalibrateConfig {
        pulse: spec,
        form: args.form,
        grid: args.grid,
        dt_s: dt,
    };
    RunManifest::new("calibrate-a", &config)
        .runtime()?
        .output(&args.output)
        .write_beside(&args.output)
        .runtime()?;
    Ok(())
}
