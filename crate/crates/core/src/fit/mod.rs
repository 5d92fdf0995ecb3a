//! Least-squares fitting of loss-corrected model profiles and of the
//! Lorentzian baseline.
//!
//! Analytic models keep their pulse parameters frozen and fit
//! θ = (Δ₀, ε₀, ε₁); the Lorentzian fits θ = (A, k, C, Δ₀). Every model
//! enters through Δ → Δ − Δ₀.

mod lm;
mod metrics;

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analytic::{lorentzian_profile, ModelKind, ProfileModel};
use crate::dynamics::{check_grid, LineProfile, Provenance};
use crate::error::{Error, Result};

pub use lm::{COST_TOLERANCE, JACOBIAN_STEP, MAX_ITERATIONS, STEP_TOLERANCE};
pub use metrics::{apply_losses, mae, ofi, residuals, shot_noise_mae, OVERFIT_THRESHOLD};

/// Number of perturbed restarts once the overfitting index is exceeded.
pub const MAX_RESTARTS: usize = 10;
/// Half-width of the uniform multiplicative restart perturbation.
pub const RESTART_SPREAD: f64 = 0.2;
/// Seed used by [`fit_guarded`].
pub const DEFAULT_RESTART_SEED: u64 = 0x5eed;

/// Weight of the residual rows penalizing infeasible loss parameters.
const PENALTY_WEIGHT: f64 = 10.0;
/// Keeps 1 − ε₀ − ε₁ strictly positive.
const EPS_MARGIN: f64 = 1e-9;
const EPS_SCALE: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDataSet")]
pub struct DataSet {
    detunings: Vec<f64>,
    probabilities: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    shots: Option<Vec<u32>>,
}

#[derive(Deserialize)]
struct RawDataSet {
    detunings: Vec<f64>,
    probabilities: Vec<f64>,
    #[serde(default)]
    shots: Option<Vec<u32>>,
}

impl TryFrom<RawDataSet> for DataSet {
    type Error = Error;

    fn try_from(raw: RawDataSet) -> Result<Self> {
        DataSet::new(raw.detunings, raw.probabilities, raw.shots)
    }
}

impl DataSet {
    /// Validates a measurement set. Detunings are in rad/s.
    pub fn new(detunings: Vec<f64>, probabilities: Vec<f64>, shots: Option<Vec<u32>>) -> Result<Self> {
        if detunings.len() != probabilities.len() {
            return Err(Error::GridMismatch(format!(
                "{} detunings but {} probabilities",
                detunings.len(),
                probabilities.len()
            )));
        }
        if detunings.is_empty() {
            return Err(Error::InsufficientData("dataset has no points".into()));
        }
        check_grid(&detunings)?;
        for (i, p) in probabilities.iter().enumerate() {
            if !(0.0..=1.0).contains(p) {
                return Err(Error::InvalidParameter {
                    name: "probabilities",
                    reason: format!("point {i} has P = {p}, outside [0, 1]"),
                });
            }
        }
        if let Some(shots) = &shots {
            if shots.len() != probabilities.len() {
                return Err(Error::GridMismatch(format!(
                    "{} shot counts for {} points",
                    shots.len(),
                    probabilities.len()
                )));
            }
            for (i, (s, p)) in shots.iter().zip(&probabilities).enumerate() {
                if *s == 0 {
                    return Err(Error::InvalidParameter {
                        name: "shots",
                        reason: format!("point {i} has zero shots"),
                    });
                }
                let counts = p * f64::from(*s);
                if (counts - counts.round()).abs() > 1e-6 {
                    return Err(Error::InvalidParameter {
                        name: "probabilities",
                        reason: format!("point {i}: P = {p} is not a multiple of 1/{s}"),
                    });
                }
            }
        }
        Ok(DataSet {
            detunings,
            probabilities,
            shots,
        })
    }

    /// Noise-free dataset read off a profile.
    pub fn from_profile(profile: &LineProfile) -> Result<Self> {
        DataSet::new(profile.detunings().to_vec(), profile.probabilities().to_vec(), None)
    }

    pub fn detunings(&self) -> &[f64] {
        &self.detunings
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn shots(&self) -> Option<&[u32]> {
        self.shots.as_deref()
    }

    pub fn len(&self) -> usize {
        self.detunings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.detunings.is_empty()
    }

    /// Hex SHA-256 of the little-endian values.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        for d in &self.detunings {
            hasher.update(d.to_le_bytes());
        }
        for p in &self.probabilities {
            hasher.update(p.to_le_bytes());
        }
        if let Some(shots) = &self.shots {
            for s in shots {
                hasher.update(s.to_le_bytes());
            }
        }
        hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Fitted parameter vector. Detuning offsets are in rad/s, `k` in s².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FitParameters {
    Analytic { delta0: f64, eps0: f64, eps1: f64 },
    Lorentzian { amplitude: f64, k: f64, offset: f64, delta0: f64 },
}

impl FitParameters {
    pub const ANALYTIC_NAMES: [&'static str; 3] = ["delta0", "eps0", "eps1"];
    pub const LORENTZIAN_NAMES: [&'static str; 4] = ["amplitude", "k", "offset", "delta0"];

    pub fn delta0(&self) -> f64 {
        match *self {
            FitParameters::Analytic { delta0, .. } | FitParameters::Lorentzian { delta0, .. } => delta0,
        }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        match *self {
            FitParameters::Analytic { delta0, eps0, eps1 } => vec![delta0, eps0, eps1],
            FitParameters::Lorentzian { amplitude, k, offset, delta0 } => vec![amplitude, k, offset, delta0],
        }
    }

    pub fn names(&self) -> &'static [&'static str] {
        match self {
            FitParameters::Analytic { .. } => &Self::ANALYTIC_NAMES,
            FitParameters::Lorentzian { .. } => &Self::LORENTZIAN_NAMES,
        }
    }

    fn delta0_index(&self) -> usize {
        match self {
            FitParameters::Analytic { .. } => 0,
            FitParameters::Lorentzian { .. } => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: ProfileModel,
    pub parameters: FitParameters,
    pub parameter_names: Vec<String>,
    /// Row-major covariance of `parameters` in their internal units.
    pub covariance: Vec<Vec<f64>>,
    pub mae: f64,
    pub ofi: f64,
    /// Standard deviation of the fitted resonance frequency, Hz.
    pub sdrf_hz: f64,
    pub converged: bool,
    pub iterations: usize,
    pub restarts: usize,
    /// Sum of squared data residuals.
    pub cost: f64,
    pub dataset_digest: String,
    #[serde(skip)]
    pub cost_history: Vec<f64>,
}

impl FitResult {
    pub fn kind(&self) -> ModelKind {
        self.model.kind()
    }

    /// Fitted curve on `grid`.
    pub fn curve(&self, grid: &[f64]) -> Result<LineProfile> {
        check_grid(grid)?;
        let values = grid
            .iter()
            .map(|d| predict(&self.model, &self.parameters, *d))
            .collect::<Result<Vec<_>>>()?;
        let provenance = match self.kind() {
            ModelKind::Lorentzian => Provenance::Lorentzian,
            kind => Provenance::Analytic(kind),
        };
        Ok(LineProfile::unchecked(grid.to_vec(), values, provenance))
    }

    pub fn residuals(&self, data: &DataSet) -> Result<Vec<f64>> {
        residuals(&self.curve(data.detunings())?, data)
    }
}

/// Loss-corrected (or Lorentzian) prediction at detuning `delta`.
pub fn predict(model: &ProfileModel, params: &FitParameters, delta: f64) -> Result<f64> {
    match *params {
        FitParameters::Analytic { delta0, eps0, eps1 } => {
            let (e0, e1) = clamp_losses(eps0, eps1);
            Ok(metrics::losses_unchecked(model.evaluate(delta - delta0)?, e0, e1))
        }
        FitParameters::Lorentzian { amplitude, k, offset, delta0 } => {
            Ok(lorentzian_profile(amplitude, k, offset, delta - delta0))
        }
    }
}

fn predict_raw(model: &ProfileModel, params: &FitParameters, delta: f64) -> Result<f64> {
    match *params {
        FitParameters::Analytic { delta0, eps0, eps1 } => {
            Ok(metrics::losses_unchecked(model.evaluate(delta - delta0)?, eps0, eps1))
        }
        FitParameters::Lorentzian { .. } => predict(model, params, delta),
    }
}

fn clamp_losses(eps0: f64, eps1: f64) -> (f64, f64) {
    let e0 = eps0.max(0.0);
    let e1 = eps1.max(0.0);
    let total = e0 + e1;
    let cap = 1.0 - EPS_MARGIN;
    if total > cap {
        (e0 * cap / total, e1 * cap / total)
    } else {
        (e0, e1)
    }
}

fn grid_step(data: &DataSet) -> f64 {
    let d = data.detunings();
    if d.len() < 2 {
        1.0
    } else {
        (d[d.len() - 1] - d[0]) / (d.len() - 1) as f64
    }
}

fn argmax(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, v)| if *v > best.1 { (i, *v) } else { best })
        .0
}

/// Moment-style starting point for fitting `kind` to `data`.
pub fn initial_guess(kind: ModelKind, data: &DataSet) -> Vec<f64> {
    let p = data.probabilities();
    let d = data.detunings();
    let lo = p.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let peak = argmax(p);
    match kind {
        ModelKind::Lorentzian => {
            let amplitude = hi - lo;
            let half = lo + 0.5 * amplitude;
            let above: Vec<usize> = (0..p.len()).filter(|i| p[*i] >= half).collect();
            let width = match (above.first(), above.last()) {
                (Some(a), Some(b)) if b > a => d[*b] - d[*a],
                _ => grid_step(data),
            };
            let half_width = (0.5 * width).max(0.5 * grid_step(data));
            vec![amplitude, 1.0 / (half_width * half_width), lo, d[peak]]
        }
        _ => {
            let (e0, e1) = clamp_losses(lo, 1.0 - hi);
            vec![d[peak], e0, e1]
        }
    }
}

fn typical_scales(kind: ModelKind, data: &DataSet, init: &[f64]) -> Vec<f64> {
    let step = grid_step(data);
    match kind {
        ModelKind::Lorentzian => vec![init[0].abs().max(EPS_SCALE), init[1].abs().max(f64::MIN_POSITIVE), EPS_SCALE, step],
        _ => vec![step, EPS_SCALE, EPS_SCALE],
    }
}

/// Levenberg–Marquardt fit of `model` to `data` from `init`.
///
/// For [`ProfileModel::Lorentzian`] the variant's own values are ignored;
/// `init` carries (A, k, C, Δ₀).
pub fn fit(model: &ProfileModel, data: &DataSet, init: &[f64]) -> Result<FitResult> {
    let kind = model.kind();
    let lorentzian = kind == ModelKind::Lorentzian;
    let expected = if lorentzian { 4 } else { 3 };
    if init.len() != expected {
        return Err(Error::InvalidParameter {
            name: "init",
            reason: format!("{kind} takes {expected} parameters, got {}", init.len()),
        });
    }
    if init.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "init",
            reason: format!("non-finite starting value in {init:?}"),
        });
    }
    if lorentzian {
        if init[1] <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "init",
                reason: format!("Lorentzian k must be > 0, got {}", init[1]),
            });
        }
    } else if !(init[1] >= 0.0 && init[2] >= 0.0 && init[1] + init[2] < 1.0) {
        return Err(Error::InvalidParameter {
            name: "init",
            reason: format!("need ε₀, ε₁ ≥ 0 and ε₀ + ε₁ < 1, got ({}, {})", init[1], init[2]),
        });
    }
    let n = data.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!("a fit needs at least 2 points, got {n}")));
    }
    if n <= expected {
        return Err(Error::InsufficientData(format!(
            "{n} points cannot constrain {expected} parameters"
        )));
    }

    let to_params = |x: &[f64]| -> FitParameters {
        if lorentzian {
            FitParameters::Lorentzian {
                amplitude: x[0],
                k: x[1],
                offset: x[2],
                delta0: x[3],
            }
        } else {
            FitParameters::Analytic {
                delta0: x[0],
                eps0: x[1],
                eps1: x[2],
            }
        }
    };
    let scales = typical_scales(kind, data, init);
    let residual = |x: &[f64]| -> Result<Vec<f64>> {
        let params = to_params(x);
        let mut r = Vec::with_capacity(n + 3);
        for (d, p) in data.detunings().iter().zip(data.probabilities()) {
            r.push(predict(model, &params, *d)? - p);
        }
        if lorentzian {
            // k ≤ 0 turns the peak into a pole
            r.push(PENALTY_WEIGHT * (-x[1] / scales[1]).max(0.0));
        } else {
            r.push(PENALTY_WEIGHT * (-x[1]).max(0.0));
            r.push(PENALTY_WEIGHT * (-x[2]).max(0.0));
            r.push(PENALTY_WEIGHT * (x[1].max(0.0) + x[2].max(0.0) - (1.0 - EPS_MARGIN)).max(0.0));
        }
        Ok(r)
    };

    let outcome = lm::minimize(&residual, init, &scales)?;

    let mut x = outcome.params.clone();
    if !lorentzian {
        let (e0, e1) = clamp_losses(x[1], x[2]);
        x[1] = e0;
        x[2] = e1;
    }
    let parameters = to_params(&x);
    // the loss model is linear in ε, so its unclamped form gives a Jacobian
    // that stays informative when a fitted ε sits on its bound
    let raw = |x: &[f64]| -> Result<Vec<f64>> {
        let params = to_params(x);
        data.detunings()
            .iter()
            .zip(data.probabilities())
            .map(|(d, p)| Ok(predict_raw(model, &params, *d)? - p))
            .collect()
    };
    let jac = lm::jacobian(&raw, &x, &scales, n)?;
    let final_residuals = raw(&x)?;
    let cov = lm::covariance(&jac, &final_residuals)?;
    let mut covariance = vec![vec![0.0; expected]; expected];
    for (i, row) in covariance.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = 0.5 * (cov[(i, j)] + cov[(j, i)]);
        }
    }
    let data_residuals = &final_residuals[..];
    let mut result = FitResult {
        model: *model,
        parameters,
        parameter_names: parameters.names().iter().map(|s| s.to_string()).collect(),
        covariance,
        mae: mae(data_residuals)?,
        ofi: ofi(data)?,
        sdrf_hz: 0.0,
        converged: outcome.converged,
        iterations: outcome.iterations,
        restarts: 0,
        cost: data_residuals.iter().map(|r| r * r).sum(),
        dataset_digest: data.digest(),
        cost_history: outcome.cost_history,
    };
    result.sdrf_hz = sdrf(&result)?;
    Ok(result)
}

/// √Var(Δ₀) converted to Hz.
pub fn sdrf(fit: &FitResult) -> Result<f64> {
    let i = fit.parameters.delta0_index();
    let var = fit
        .covariance
        .get(i)
        .and_then(|row| row.get(i))
        .copied()
        .ok_or_else(|| Error::DegenerateFit("covariance has no resonance-offset entry".into()))?;
    if !var.is_finite() || var < 0.0 {
        return Err(Error::DegenerateFit(format!("variance of Δ₀ is {var}")));
    }
    Ok(var.sqrt() / (2.0 * PI))
}

/// Runs `fit` from `init`; if the data's overfitting index exceeds
/// [`OVERFIT_THRESHOLD`] it is rerun [`MAX_RESTARTS`] times from
/// perturbed starts and the lowest-MAE result is kept.
///
/// Each restart scales every parameter by an independent uniform factor in
/// 1 ± [`RESTART_SPREAD`]; parameters at zero move additively by that
/// fraction of their entry in `scales`. Restarts whose fit fails are skipped.
pub fn overfit_guard<F>(data: &DataSet, init: &[f64], scales: &[f64], seed: u64, fit: F) -> Result<FitResult>
where
    F: Fn(&[f64]) -> Result<FitResult>,
{
    let mut best = fit(init)?;
    if ofi(data)? <= OVERFIT_THRESHOLD {
        return Ok(best);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_RESTARTS {
        let start: Vec<f64> = init
            .iter()
            .zip(scales)
            .map(|(x, s)| {
                let u: f64 = rng.random_range(-RESTART_SPREAD..=RESTART_SPREAD);
                if *x == 0.0 { u * s } else { x * (1.0 + u) }
            })
            .collect();
        if let Ok(candidate) = fit(&start) {
            if candidate.mae < best.mae {
                best = candidate;
            }
        }
    }
    best.restarts = MAX_RESTARTS;
    Ok(best)
}

/// Fits `model` from [`initial_guess`] behind the overfitting guard.
pub fn fit_guarded(model: &ProfileModel, data: &DataSet) -> Result<FitResult> {
    let kind = model.kind();
    let init = initial_guess(kind, data);
    let scales = typical_scales(kind, data, &init);
    overfit_guard(data, &init, &scales, DEFAULT_RESTART_SEED, |start| {
        let mut start = start.to_vec();
        if kind != ModelKind::Lorentzian {
            let (e0, e1) = clamp_losses(start[1], start[2]);
            start[1] = e0;
            start[2] = e1;
        } else {
            start[1] = start[1].abs();
        }
        fit(model, data, &start)
    })
}

/// Lorentzian placeholder accepted by [`fit`]; its values are not used.
pub fn lorentzian_model() -> ProfileModel {
    ProfileModel::Lorentzian {
        amplitude: 1.0,
        k: 1.0,
        offset: 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::symmetric_grid;
    use crate::units::{hz_to_angular, mhz_to_angular};
    use std::cell::Cell;

    const TAU: f64 = 21.33e-9;

    fn rabi_model() -> ProfileModel {
        ProfileModel::Rabi {
            omega0: PI / TAU,
            duration: TAU,
        }
    }

    fn synthetic(model: &ProfileModel, params: FitParameters, points: usize) -> DataSet {
        let grid = symmetric_grid(0.0, mhz_to_angular(40.0), points).unwrap();
        let p = grid.iter().map(|d| predict(model, &params, *d).unwrap()).collect();
        DataSet::new(grid, p, None).unwrap()
    }

    fn stub(mae: f64) -> FitResult {
        FitResult {
            model: rabi_model(),
            parameters: FitParameters::Analytic {
                delta0: 0.0,
                eps0: 0.0,
                eps1: 0.0,
            },
            parameter_names: vec![],
            covariance: vec![vec![0.0; 3]; 3],
            mae,
            ofi: 0.0,
            sdrf_hz: 0.0,
            converged: true,
            iterations: 1,
            restarts: 0,
            cost: 0.0,
            dataset_digest: String::new(),
            cost_history: vec![],
        }
    }

    #[test]
    fn dataset_validation() {
        assert!(DataSet::new(vec![0.0, 1.0], vec![0.5], None).is_err());
        assert!(DataSet::new(vec![1.0, 0.0], vec![0.5, 0.5], None).is_err());
        assert!(DataSet::new(vec![0.0, 1.0], vec![0.5, 1.5], None).is_err());
        assert!(DataSet::new(vec![0.0, 1.0], vec![0.5, 0.25], Some(vec![4, 4])).is_ok());
        assert!(DataSet::new(vec![0.0, 1.0], vec![0.5, 0.3], Some(vec![4, 4])).is_err());
        assert!(DataSet::new(vec![0.0, 1.0], vec![0.5, 0.25], Some(vec![4, 0])).is_err());
        assert!(DataSet::new(vec![], vec![], None).is_err());
    }

    #[test]
    fn digest_tracks_content() {
        let a = DataSet::new(vec![0.0, 1.0], vec![0.5, 0.25], None).unwrap();
        let b = DataSet::new(vec![0.0, 1.0], vec![0.5, 0.26], None).unwrap();
        assert_eq!(a.digest(), a.clone().digest());
        assert_ne!(a.digest(), b.digest());
        assert_eq!(a.digest().len(), 64);
    }

    #[test]
    fn dataset_json_round_trip_validates() {
        let a = DataSet::new(vec![0.0, 1.0], vec![0.5, 0.25], Some(vec![4, 4])).unwrap();
        let json = serde_json::to_string(&a).unwrap();
        assert_eq!(serde_json::from_str::<DataSet>(&json).unwrap(), a);
        assert!(serde_json::from_str::<DataSet>(r#"{"detunings":[1,0],"probabilities":[0,0]}"#).is_err());
    }

    #[test]
    fn zero_noise_rabi_recovery() {
        let model = rabi_model();
        let truth = FitParameters::Analytic {
            delta0: 0.0,
            eps0: 0.03,
            eps1: 0.07,
        };
        let data = synthetic(&model, truth, 101);
        let result = fit(&model, &data, &initial_guess(ModelKind::Rabi, &data)).unwrap();
        let FitParameters::Analytic { delta0, eps0, eps1 } = result.parameters else {
            panic!("analytic parameters expected")
        };
        assert!(result.converged);
        assert!((eps0 - 0.03).abs() < 1e-8, "{eps0}");
        assert!((eps1 - 0.07).abs() < 1e-8, "{eps1}");
        // Δ₀ is compared in units of the grid spacing
        assert!(delta0.abs() / grid_step(&data) < 1e-8, "{delta0}");
        assert!(result.mae < 1e-10);
        assert!(result.sdrf_hz < 1.0);
    }

    #[test]
    fn zero_noise_shifted_lorentzian_recovery() {
        let truth = FitParameters::Lorentzian {
            amplitude: 0.85,
            k: 1.0 / mhz_to_angular(4.0).powi(2),
            offset: 0.04,
            delta0: hz_to_angular(2.0e5),
        };
        let data = synthetic(&lorentzian_model(), truth, 101);
        let result = fit(&lorentzian_model(), &data, &initial_guess(ModelKind::Lorentzian, &data)).unwrap();
        for (got, want) in result.parameters.to_vec().iter().zip(truth.to_vec()) {
            assert!((got - want).abs() <= 1e-6 * want.abs(), "{got} vs {want}");
        }
    }

    #[test]
    fn cost_never_increases() {
        let model = ProfileModel::RosenZener {
            omega0: 1.0 / TAU,
            tau: TAU,
        };
        let truth = FitParameters::Analytic {
            delta0: hz_to_angular(3.0e5),
            eps0: 0.035,
            eps1: 0.07,
        };
        let mut data = synthetic(&model, truth, 61);
        // deterministic bumps so the optimum has nonzero cost
        let bumped: Vec<f64> = data
            .probabilities()
            .iter()
            .enumerate()
            .map(|(i, p)| (p + 0.01 * ((i * 7919) % 13) as f64 / 13.0 - 0.005).clamp(0.0, 1.0))
            .collect();
        data = DataSet::new(data.detunings().to_vec(), bumped, None).unwrap();
        let result = fit(&model, &data, &[hz_to_angular(-1.0e6), 0.0, 0.2]).unwrap();
        assert!(result.cost_history.len() > 2);
        for w in result.cost_history.windows(2) {
            assert!(w[1] <= w[0], "{} -> {}", w[0], w[1]);
        }
        assert!((result.parameters.delta0() - truth.delta0()).abs() < hz_to_angular(5.0e4));
    }

    #[test]
    fn init_outside_bounds_is_rejected() {
        let model = rabi_model();
        let data = synthetic(
            &model,
            FitParameters::Analytic {
                delta0: 0.0,
                eps0: 0.0,
                eps1: 0.0,
            },
            11,
        );
        assert!(fit(&model, &data, &[0.0, -0.1, 0.0]).is_err());
        assert!(fit(&model, &data, &[0.0, 0.6, 0.5]).is_err());
        assert!(fit(&model, &data, &[0.0, 0.0]).is_err());
        assert!(fit(&lorentzian_model(), &data, &[1.0, -1.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn too_few_points() {
        let data = DataSet::new(vec![0.0], vec![0.5], None).unwrap();
        assert!(matches!(fit(&rabi_model(), &data, &[0.0, 0.0, 0.0]), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn guard_skips_restarts_on_smooth_data() {
        let data = synthetic(
            &rabi_model(),
            FitParameters::Analytic {
                delta0: 0.0,
                eps0: 0.0,
                eps1: 0.0,
            },
            101,
        );
        assert!(ofi(&data).unwrap() < OVERFIT_THRESHOLD);
        let calls = Cell::new(0);
        let result = overfit_guard(&data, &[0.0, 0.0, 0.0], &[1.0; 3], 1, |_| {
            calls.set(calls.get() + 1);
            Ok(stub(0.5))
        })
        .unwrap();
        assert_eq!(calls.get(), 1);
        assert_eq!(result.restarts, 0);
    }

    #[test]
    fn guard_restarts_on_alternating_data_and_keeps_best() {
        let grid: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let p: Vec<f64> = (0..20).map(|i| (i % 2) as f64).collect();
        let data = DataSet::new(grid, p, None).unwrap();
        assert_eq!(ofi(&data).unwrap(), 1.0);
        let calls = Cell::new(0usize);
        let result = overfit_guard(&data, &[1.0, 2.0, 0.0], &[1.0; 3], 7, |start| {
            let i = calls.get();
            calls.set(i + 1);
            assert!(start[0] >= 0.8 && start[0] <= 1.2);
            assert!(start[1] >= 1.6 && start[1] <= 2.4);
            assert!(start[2].abs() <= 0.2);
            // the fourth call is the best
            Ok(stub(if i == 3 { 0.01 } else { 0.5 + i as f64 }))
        })
        .unwrap();
        assert_eq!(calls.get(), 1 + MAX_RESTARTS);
        assert_eq!(result.restarts, MAX_RESTARTS);
        assert_eq!(result.mae, 0.01);
    }

    #[test]
    fn guard_threshold_is_strict() {
        // one excursion of 0.5 over 10 steps: 1.0 / 10 rounds to the literal 0.1
        let grid: Vec<f64> = (0..11).map(|i| i as f64).collect();
        let mut p = vec![0.0; 11];
        p[1] = 0.5;
        let data = DataSet::new(grid, p, None).unwrap();
        assert_eq!(ofi(&data).unwrap(), 0.1);
        let calls = Cell::new(0);
        let result = overfit_guard(&data, &[0.0; 3], &[1.0; 3], 1, |_| {
            calls.set(calls.get() + 1);
            Ok(stub(0.5))
        })
        .unwrap();
        assert_eq!(calls.get(), 1);
        assert_eq!(result.restarts, 0);
    }

    #[test]
    fn restarts_are_deterministic() {
        let grid: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let p: Vec<f64> = (0..20).map(|i| (i % 2) as f64).collect();
        let data = DataSet::new(grid, p, None).unwrap();
        let record = |seed| {
            let starts = std::cell::RefCell::new(Vec::new());
            overfit_guard(&data, &[1.0, 0.0], &[1.0, 1.0], seed, |s| {
                starts.borrow_mut().push(s.to_vec());
                Ok(stub(0.1))
            })
            .unwrap();
            starts.into_inner()
        };
        assert_eq!(record(3), record(3));
        assert_ne!(record(3), record(4));
    }

    #[test]
    fn fit_result_json_round_trip() {
        let model = rabi_model();
        let data = synthetic(
            &model,
            FitParameters::Analytic {
                delta0: 0.0,
                eps0: 0.03,
                eps1: 0.07,
            },
            41,
        );
        let result = fit_guarded(&model, &data).unwrap();
        let json = serde_json::to_string(&result).unwrap();
        let back: FitResult = serde_json::from_str(&json).unwrap();
        assert_eq!(back.parameters, result.parameters);
        assert_eq!(back.dataset_digest, data.digest());
        assert!(back.cost_history.is_empty());
    }

    #[test]
    fn covariance_is_symmetric_psd() {
        let model = rabi_model();
        let truth = FitParameters::Analytic {
            delta0: hz_to_angular(1.0e5),
            eps0: 0.03,
            eps1: 0.07,
        };
        let data = synthetic(&model, truth, 41);
        let bumped: Vec<f64> = data
            .probabilities()
            .iter()
            .enumerate()
            .map(|(i, p)| p + if i % 3 == 0 { 0.004 } else { -0.002 })
            .collect();
        let data = DataSet::new(data.detunings().to_vec(), bumped, None).unwrap();
        let r = fit_guarded(&model, &data).unwrap();
        let c = &r.covariance;
        for i in 0..3 {
            assert!(c[i][i] >= 0.0);
            for j in 0..3 {
                assert_eq!(c[i][j], c[j][i]);
                assert!(c[i][j].powi(2) <= c[i][i] * c[j][j] * (1.0 + 1e-9));
            }
        }
        assert!(r.sdrf_hz > 0.0);
    }
}
