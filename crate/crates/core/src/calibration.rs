//! Fixing the area-correction parameter `a` of the conjecture profiles by
//! least squares against the numerical reference.

use serde::{Deserialize, Serialize};

use crate::analytic::{rzc_profile, RzcForm, RzcShape};
use crate::dynamics::{profile_numeric, symmetric_grid, LineProfile};
use crate::error::{Error, Result};
use crate::pulse::PulseSpec;
use crate::units::mhz_to_angular;

/// Golden-section termination width in `a`.
pub const A_TOLERANCE: f64 = 1e-4;

/// Largest tolerated disagreement between the two search starts.
pub const MULTI_START_TOLERANCE: f64 = 1e-3;

const SCAN_POINTS: usize = 41;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub shape: RzcShape,
    pub form: RzcForm,
    pub a: f64,
    /// Max |RZC − reference| over the grid at the fitted `a`.
    pub residual: f64,
    /// Sum of squared deviations at the fitted `a`.
    pub objective: f64,
    pub grid: Vec<f64>,
}

/// 201 points over Δ/2π ∈ [−40, 40] MHz.
pub fn default_calibration_grid() -> Vec<f64> {
    symmetric_grid(0.0, mhz_to_angular(40.0), 201).expect("static grid is valid")
}

/// Fits `a` for `shape` against the numerical profile of `spec`.
///
/// For [`RzcShape::Rectangular`] the pulse duration plays the role of τ.
pub fn calibrate_a(shape: RzcShape, spec: &PulseSpec, grid: &[f64], form: RzcForm, dt: f64) -> Result<CalibrationResult> {
    if spec.kind() != shape.pulse_kind() {
        return Err(Error::InvalidParameter {
            name: "spec",
            reason: format!("calibrating {shape:?} against a {} pulse", spec.kind()),
        });
    }
    let reference = profile_numeric(spec, grid, dt)?;
    calibrate_against(shape, spec, &reference, form)
}

/// Same as [`calibrate_a`] with a precomputed reference profile.
pub fn calibrate_against(shape: RzcShape, spec: &PulseSpec, reference: &LineProfile, form: RzcForm) -> Result<CalibrationResult> {
    let width = match shape {
        RzcShape::Rectangular => spec.duration(),
        _ => spec.tau(),
    };
    let omega0 = spec.omega0();
    let deviations = |a: f64| -> Result<Vec<f64>> {
        reference
            .detunings()
            .iter()
            .zip(reference.probabilities())
            .map(|(d, p)| Ok(rzc_profile(shape, omega0, width, a, *d, form)? - p))
            .collect()
    };
    let objective = |a: f64| -> Result<f64> { Ok(deviations(a)?.iter().map(|r| r * r).sum()) };

    let full = golden_section(&objective, 0.0, 1.0, A_TOLERANCE)?;

    let step = 1.0 / (SCAN_POINTS - 1) as f64;
    let mut best = (0usize, f64::INFINITY);
    for i in 0..SCAN_POINTS {
        let value = objective(i as f64 * step)?;
        if value < best.1 {
            best = (i, value);
        }
    }
    let lo = best.0.saturating_sub(1) as f64 * step;
    let hi = ((best.0 + 1).min(SCAN_POINTS - 1)) as f64 * step;
    let local = golden_section(&objective, lo, hi, A_TOLERANCE)?;

    if (full - local).abs() > MULTI_START_TOLERANCE {
        return Err(Error::NonUnimodal(format!(
            "full-interval search found a = {full:.5}, bracketed search found a = {local:.5}"
        )));
    }
    let a = if objective(local)? < objective(full)? { local } else { full };
    let devs = deviations(a)?;
    Ok(CalibrationResult {
        shape,
        form,
        a,
        residual: devs.iter().fold(0.0, |m, r| f64::max(m, r.abs())),
        objective: devs.iter().map(|r| r * r).sum(),
        grid: reference.detunings().to_vec(),
    })
}

/// Minimizes a unimodal function on `[lo, hi]` to bracket width `tol`.
pub fn golden_section<F>(f: &F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2)?;
        }
    }
    // endpoints are reachable when the minimum sits on the boundary
    let mid = 0.5 * (lo + hi);
    let candidates = [lo, mid, hi];
    let mut best = (mid, f(mid)?);
    for x in candidates {
        let v = f(x)?;
        if v < best.1 {
            best = (x, v);
        }
    }
    Ok(best.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulse::PulseKind;
    use crate::units::BACKEND_DT;
    use std::f64::consts::PI;

    #[test]
    fn golden_section_finds_interior_and_boundary_minima() {
        let x = golden_section(&|x: f64| Ok((x - 0.37).powi(2)), 0.0, 1.0, 1e-6).unwrap();
        assert!((x - 0.37).abs() < 1e-6);
        let x = golden_section(&|x: f64| Ok((x + 0.2).powi(2)), 0.0, 1.0, 1e-6).unwrap();
        assert_eq!(x, 0.0);
        let x = golden_section(&|x: f64| Ok(-x), 0.0, 1.0, 1e-6).unwrap();
        assert_eq!(x, 1.0);
    }

    #[test]
    fn rectangular_sanity_endpoint() {
        let duration = 96.0 * BACKEND_DT;
        let spec = PulseSpec::rectangular(PI / duration, duration).unwrap();
        let grid = symmetric_grid(0.0, 3.0 * spec.omega0(), 101).unwrap();
        let cal = calibrate_a(RzcShape::Rectangular, &spec, &grid, RzcForm::Strict, BACKEND_DT).unwrap();
        assert!((cal.a - 1.0).abs() < 1e-3, "{}", cal.a);
        assert!(cal.residual < 1e-8);
    }

    #[test]
    fn mismatched_pulse_is_rejected() {
        let spec = PulseSpec::with_cutoff_and_area(PulseKind::Sech, 21.33e-9, 1e-3, PI).unwrap();
        let err = calibrate_a(RzcShape::Gaussian, &spec, &[0.0, 1.0], RzcForm::Strict, BACKEND_DT);
        assert!(err.is_err());
    }

    #[test]
    fn default_grid_layout() {
        let grid = default_calibration_grid();
        assert_eq!(grid.len(), 201);
        assert!((grid[200] - mhz_to_angular(40.0)).abs() < 1e-6);
        assert_eq!(grid[100], 0.0);
    }
}
