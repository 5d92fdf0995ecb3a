use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::Args;
use lineshape::experiment::GridSpec;
use lineshape::{profile_numeric, ModelKind, PulseSpec, RzcForm};
use serde::Serialize;

use super::{analytic_model, create};
use crate::args::{dt_seconds, parse_grid, PulseArgs, RzcArgs};
use crate::failure::{Classify, Outcome};
use crate::manifest::RunManifest;

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub pulse: PulseArgs,

    /// Detuning grid, ±SPAN:N or LO:HI:N
    #[arg(long, default_value = "±40MHz:101", value_parser = parse_grid, allow_hyphen_values = true)]
    pub grid: GridSpec,

    /// Comma-separated curves: `numeric` and/or analytic model names
    #[arg(long, default_value = "numeric", value_delimiter = ',', value_parser = parse_curve)]
    pub models: Vec<Curve>,

    #[command(flatten)]
    pub rzc: RzcArgs,

    /// Propagator step in ns [default: 2/9]
    #[arg(long)]
    pub dt_ns: Option<f64>,

    /// Wide profile CSV to write
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Curve {
    Numeric,
    Model(ModelKind),
}

impl fmt::Display for Curve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Curve::Numeric => f.write_str("numeric"),
            Curve::Model(kind) => write!(f, "{kind}"),
        }
    }
}

impl FromStr for Curve {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "numeric" => Ok(Curve::Numeric),
            "lorentzian" => Err("the Lorentzian has no pulse parameters; it only appears in fits".into()),
            other => other.parse::<ModelKind>().map(Curve::Model).map_err(|e| e.to_string()),
        }
    }
}

fn parse_curve(s: &str) -> Result<Curve, String> {
    s.parse()
}

#[derive(Serialize)]
struct SimulateConfig {
    pulse: PulseSpec,
    grid: GridSpec,
    models: Vec<String>,
    form: RzcForm,
    /// Area-correction parameter per RZC model, given or calibrated.
    a: BTreeMap<String, f64>,
    dt_s: f64,
}

pub fn run(args: SimulateArgs) -> Outcome<()> {
    let spec = args.pulse.resolve()?;
    let dt = dt_seconds(args.dt_ns)?;
    let grid = args.grid.detunings().usage()?;

    let mut columns = Vec::new();
    let mut a_values = BTreeMap::new();
    for curve in &args.models {
        let profile = match curve {
            Curve::Numeric => profile_numeric(&spec, &grid, dt).runtime()?,
            Curve::Model(kind) => {
                let (model, _) = analytic_model(*kind, &spec, &args.rzc, dt)?;
                if let Some(a) = model_a(&model) {
                    a_values.insert(kind.to_string(), a);
                }
                model.profile(&grid).runtime()?
            }
        };
        columns.push((curve.to_string(), profile));
    }

    let writer = create(&args.output)?;
    lineshape::io::write_profiles_csv(writer, &columns).runtime()?;

    let config = SimulateConfig {
        pulse: spec,
        grid: args.grid,
        models: args.models.iter().map(|c| c.to_string()).collect(),
        form: args.rzc.form,
        a: a_values,
        dt_s: dt,
    };
    RunManifest::new("simulate", &config)
        .runtime()?
        .output(&args.output)
        .write_beside(&args.output)
        .runtime()?;
    Ok(())
}

fn model_a(model: &lineshape::ProfileModel) -> Option<f64> {
    use lineshape::ProfileModel::*;
    match *model {
        DemkovRzc { a, .. } | GaussianRzc { a, .. } | Sech2Rzc { a, .. } => Some(a),
        _ => None,
    }
}
