use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::Args;
use lineshape::fit::{fit_guarded, lorentzian_model, shot_noise_mae};
use lineshape::{DataSet, FitResult, ModelKind, PulseSpec, RzcForm};
use serde::{Deserialize, Serialize};

use super::{analytic_model, create, open};
use crate::args::{dt_seconds, parse_model, PulseArgs, RzcArgs};
use crate::failure::{Classify, Outcome};
use crate::manifest::RunManifest;

/// The analytic fit is flagged when its MAE exceeds this multiple of the
/// shot-noise MAE plus [`MISFIT_ALLOWANCE`].
pub const MISFIT_NOISE_FACTOR: f64 = 1.5;

/// Model error tolerated on top of shot noise.
pub const MISFIT_ALLOWANCE: f64 = 2.0e-3;

#[derive(Args, Debug)]
pub struct FitArgs {
    /// Dataset CSV with a detuning_mhz column
    #[arg(long)]
    pub data: PathBuf,

    /// Probability column to fit when the CSV holds several
    #[arg(long)]
    pub column: Option<String>,

    /// Analytic model fitted next to the Lorentzian
    #[arg(long, value_parser = parse_model)]
    pub model: ModelKind,

    #[command(flatten)]
    pub pulse: PulseArgs,

    #[command(flatten)]
    pub rzc: RzcArgs,

    /// Propagator step in ns, used when `a` is calibrated [default: 2/9]
    #[arg(long)]
    pub dt_ns: Option<f64>,

    /// Fit JSON to write
    #[arg(short, long)]
    pub output: PathBuf,

    /// Residuals CSV [default: <output stem>.residuals.csv]
    #[arg(long)]
    pub residuals: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub mae_analytic: f64,
    pub mae_lorentzian: f64,
    /// Lorentzian MAE over analytic MAE; absent when the analytic MAE is zero.
    pub mae_ratio: Option<f64>,
    pub sdrf_analytic_hz: f64,
    pub sdrf_lorentzian_hz: f64,
    /// Lorentzian SDRF over analytic SDRF; absent when the analytic SDRF is zero.
    pub sdrf_ratio: Option<f64>,
    /// Expected MAE of a correct model from binomial readout alone; absent
    /// without shot counts.
    pub shot_noise_mae: Option<f64>,
    pub misfit_threshold: f64,
    pub analytic_misfit: bool,
}

impl Comparison {
    pub fn new(analytic: &FitResult, lorentzian: &FitResult, data: &DataSet) -> lineshape::Result<Self> {
        let ratio = |num: f64, den: f64| (den > 0.0).then(|| num / den);
        let noise = match data.shots() {
            Some(shots) => Some(shot_noise_mae(analytic.curve(data.detunings())?.probabilities(), shots)?),
            None => None,
        };
        let threshold = MISFIT_NOISE_FACTOR * noise.unwrap_or(0.0) + MISFIT_ALLOWANCE;
        Ok(Comparison {
            mae_analytic: analytic.mae,
            mae_lorentzian: lorentzian.mae,
            mae_ratio: ratio(lorentzian.mae, analytic.mae),
            sdrf_analytic_hz: analytic.sdrf_hz,
            sdrf_lorentzian_hz: lorentzian.sdrf_hz,
            sdrf_ratio: ratio(lorentzian.sdrf_hz, analytic.sdrf_hz),
            shot_noise_mae: noise,
            misfit_threshold: threshold,
            analytic_misfit: analytic.mae > threshold,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitDocument {
    pub dataset: String,
    pub dataset_digest: String,
    pub analytic: FitResult,
    pub lorentzian: FitResult,
    pub comparison: Comparison,
}

#[derive(Serialize)]
struct FitConfig<'a> {
    model: ModelKind,
    pulse: PulseSpec,
    form: RzcForm,
    a: Option<f64>,
    column: Option<&'a str>,
    dataset_digest: &'a str,
}

pub fn run(args: FitArgs) -> Outcome<()> {
    let spec = args.pulse.resolve()?;
    let dt = dt_seconds(args.dt_ns)?;
    let data = lineshape::io::read_dataset_csv(open(&args.data)?, args.column.as_deref())
        .with_context(|| format!("reading {}", args.data.display()))
        .runtime()?;
    let (model, calibration) = analytic_model(args.model, &spec, &args.rzc, dt)?;

    let analytic = fit_guarded(&model, &data)
        .with_context(|| format!("fitting {}", args.model))
        .runtime()?;
    let lorentzian = fit_guarded(&lorentzian_model(), &data)
        .context("fitting the Lorentzian")
        .runtime()?;
    let comparison = Comparison::new(&analytic, &lorentzian, &data).runtime()?;

    let residuals_path = args.residuals.clone().unwrap_or_else(|| default_residuals_path(&args.output));
    write_residuals(&residuals_path, &data, &analytic, &lorentzian)?;

    let document = FitDocument {
        dataset: args.data.display().to_string(),
        dataset_digest: data.digest(),
        analytic,
        lorentzian,
        comparison,
    };
    lineshape::io::write_json(create(&args.output)?, &document).runtime()?;

    let config = FitConfig {
        model: args.model,
        pulse: spec,
        form: args.rzc.form,
        a: args.rzc.a.or(calibration.map(|c| c.a)),
        column: args.column.as_deref(),
        dataset_digest: &document.dataset_digest,
    };
    RunManifest::new("fit", &config)
        .runtime()?
        .input(&args.data)
        .output(&args.output)
        .output(&residuals_path)
        .write_beside(&args.output)
        .runtime()?;
    Ok(())
}

fn default_residuals_path(output: &Path) -> PathBuf {
    let stem = output.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "fit".into());
    output.with_file_name(format!("{stem}.residuals.csv"))
}

fn write_residuals(path: &Path, data: &DataSet, analytic: &FitResult, lorentzian: &FitResult) -> Outcome<()> {
    let grid = data.detunings();
    let fa = analytic.curve(grid).runtime()?;
    let fl = lorentzian.curve(grid).runtime()?;
    let ra = analytic.residuals(data).runtime()?;
    let rl = lorentzian.residuals(data).runtime()?;
    let columns: [(&str, &[f64]); 5] = [
        ("probability", data.probabilities()),
        ("analytic", fa.probabilities()),
        ("lorentzian", fl.probabilities()),
        ("analytic_residual", &ra),
        ("lorentzian_residual", &rl),
    ];
    lineshape::io::write_columns_csv(create(path)?, grid, &columns).runtime()
}
