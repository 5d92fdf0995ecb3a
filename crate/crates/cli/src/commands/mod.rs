use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use anyhow::{anyhow, Context};
use lineshape::calibration::default_calibration_grid;
use lineshape::{calibrate_a, CalibrationResult, ModelKind, PulseSpec, RzcShape};
use lineshape::{ProfileModel, RzcForm};

use crate::args::RzcArgs;
use crate::failure::{Classify, Outcome};

pub mod calibrate;
pub mod fit;
pub mod report;
pub mod simulate;
pub mod synth;

pub(crate) fn create(path: &Path) -> Outcome<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .with_context(|| format!("cannot create {}", path.display()))
        .runtime()
}

pub(crate) fn open(path: &Path) -> Outcome<File> {
    File::open(path).with_context(|| format!("cannot open {}", path.display())).runtime()
}

/// Analytic model for `kind` on `spec`. RZC models without an explicit `a`
/// are calibrated against the numerical profile first.
pub(crate) fn analytic_model(
    kind: ModelKind,
    spec: &PulseSpec,
    rzc: &RzcArgs,
    dt: f64,
) -> Outcome<(ProfileModel, Option<CalibrationResult>)> {
    if kind == ModelKind::Lorentzian {
        return Err(anyhow!("the Lorentzian baseline has no pulse parameters")).usage();
    }
    // shape check before any expensive calibration
    ProfileModel::for_pulse(kind, spec, Some(0.0), rzc.form).usage()?;
    if !kind.is_rzc() {
        return Ok((ProfileModel::for_pulse(kind, spec, None, rzc.form).usage()?, None));
    }
    let (a, calibration) = match rzc.a {
        Some(a) => (a, None),
        None => {
            let result = calibrate(spec, rzc.form, &default_calibration_grid(), dt)?;
            (result.a, Some(result))
        }
    };
    Ok((ProfileModel::for_pulse(kind, spec, Some(a), rzc.form).usage()?, calibration))
}

pub(crate) fn calibrate(spec: &PulseSpec, form: RzcForm, grid: &[f64], dt: f64) -> Outcome<CalibrationResult> {
    calibrate_a(RzcShape::from_pulse_kind(spec.kind()), spec, grid, form, dt)
        .with_context(|| format!("calibrating a for the {} pulse", spec.kind()))
        .runtime()
}
