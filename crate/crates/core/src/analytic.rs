//! Closed-form and approximate transition line profiles.
//!
//! All functions take angular Rabi frequencies and detunings (rad/s) and
//! times in seconds, and are even in the detuning.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{check_grid, LineProfile, Provenance};
use crate::error::{require_finite, require_positive, Error, Result};
use crate::pulse::{PulseKind, PulseSpec};
use crate::special::bessel_j_complex_order;

/// Reference area-correction constants for the as-printed forms.
pub const REFERENCE_A_EXPONENTIAL: f64 = 0.158;
pub const REFERENCE_A_GAUSSIAN: f64 = 0.676;
pub const REFERENCE_A_SECH2: f64 = 0.449;

/// Davis–Dykhne–Pechukas constants for the Gaussian pulse.
pub const DDP_MU: f64 = 0.316193;
pub const DDP_NU: f64 = 0.462350;
pub const DDP_M: f64 = 1.311468;

const SECH2_SERIES_LIMIT: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Rabi,
    RosenZener,
    DemkovBessel,
    DemkovRzc,
    GaussianDdp,
    GaussianRzc,
    Sech2Rzc,
    Lorentzian,
}

impl ModelKind {
    pub const ALL: [ModelKind; 8] = [
        ModelKind::Rabi,
        ModelKind::RosenZener,
        ModelKind::DemkovBessel,
        ModelKind::DemkovRzc,
        ModelKind::GaussianDdp,
        ModelKind::GaussianRzc,
        ModelKind::Sech2Rzc,
        ModelKind::Lorentzian,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Rabi => "rabi",
            ModelKind::RosenZener => "rosen_zener",
            ModelKind::DemkovBessel => "demkov_bessel",
            ModelKind::DemkovRzc => "demkov_rzc",
            ModelKind::GaussianDdp => "gaussian_ddp",
            ModelKind::GaussianRzc => "gaussian_rzc",
            ModelKind::Sech2Rzc => "sech2_rzc",
            ModelKind::Lorentzian => "lorentzian",
        }
    }

    /// Pulse shape the model describes; `None` for the Lorentzian.
    pub fn pulse_kind(self) -> Option<PulseKind> {
        match self {
            ModelKind::Rabi => Some(PulseKind::Rectangular),
            ModelKind::RosenZener => Some(PulseKind::Sech),
            ModelKind::DemkovBessel | ModelKind::DemkovRzc => Some(PulseKind::Exponential),
            ModelKind::GaussianDdp | ModelKind::GaussianRzc => Some(PulseKind::Gaussian),
            ModelKind::Sech2Rzc => Some(PulseKind::Sech2),
            ModelKind::Lorentzian => None,
        }
    }

    pub fn is_rzc(self) -> bool {
        matches!(self, ModelKind::DemkovRzc | ModelKind::GaussianRzc | ModelKind::Sech2Rzc)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let valid: Vec<_> = ModelKind::ALL.iter().map(|k| k.name()).collect();
                Error::Parse(format!("unknown model `{s}` (valid: {})", valid.join(", ")))
            })
    }
}

/// Which algebraic form of the area-corrected Fourier-transform profile to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RzcForm {
    /// sin²(S/2)·|F(Δ)/(Ω₀τ̃)|² with the exact infinite-support transform.
    #[default]
    Strict,
    /// The alternative closed forms for the exponential, Gaussian and
    /// sech² pulses. The sech² variant tends to 4·sin²(S/2) at resonance and
    /// is therefore not bounded by one.
    AsPrinted,
}

impl fmt::Display for RzcForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RzcForm::Strict => "strict",
            RzcForm::AsPrinted => "as_printed",
        })
    }
}

impl FromStr for RzcForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict" => Ok(RzcForm::Strict),
            "as_printed" => Ok(RzcForm::AsPrinted),
            other => Err(Error::Parse(format!("unknown form `{other}` (valid: strict, as_printed)"))),
        }
    }
}

/// Rabi profile for a rectangular pulse of duration `duration`.
pub fn rabi_profile(omega0: f64, duration: f64, delta: f64) -> Result<f64> {
    require_finite("omega0", omega0)?;
    require_positive("duration", duration)?;
    require_finite("delta", delta)?;
    let r2 = omega0 * omega0 + delta * delta;
    if r2 == 0.0 {
        return Ok(0.0);
    }
    Ok(omega0 * omega0 / r2 * (0.5 * duration * r2.sqrt()).sin().powi(2))
}

/// Rosen–Zener profile of the sech pulse: sin²(πΩ₀τ/2) / cosh²(πΔτ/2).
pub fn rosen_zener_profile(omega0: f64, tau: f64, delta: f64) -> Result<f64> {
    require_finite("omega0", omega0)?;
    require_positive("tau", tau)?;
    require_finite("delta", delta)?;
    let num = (0.5 * PI * omega0 * tau).sin().powi(2);
    let den = (0.5 * PI * delta * tau).cosh().powi(2);
    Ok(num / den)
}

/// Exact exponential-pulse profile through complex-order Bessel functions.
pub fn demkov_bessel_profile(omega0: f64, tau: f64, delta: f64) -> Result<f64> {
    require_finite("omega0", omega0)?;
    require_positive("tau", tau)?;
    require_finite("delta", delta)?;
    let omega = omega0.abs() * tau;
    if omega == 0.0 {
        return Ok(0.0);
    }
    let d = (delta * tau).abs();
    let nu = Complex64::new(0.5, 0.5 * d);
    let x = 0.5 * omega;
    let product = bessel_j_complex_order(nu, x)? * bessel_j_complex_order(-nu, x)?;
    let sech = 1.0 / (0.5 * PI * d).cosh();
    Ok((0.5 * PI * omega).powi(2) * sech * sech * product.re.powi(2))
}

/// Pulse shapes covered by the area-corrected conjecture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RzcShape {
    /// Rabi prefactor Ω₀²/(Ω₀²+Δ²) with the corrected area inside the sine;
    /// `tau` is the pulse duration. Exact at a = 1.
    Rectangular,
    /// Exact at a = 0.
    Sech,
    Exponential,
    Gaussian,
    Sech2,
}

impl RzcShape {
    pub fn pulse_kind(self) -> PulseKind {
        match self {
            RzcShape::Rectangular => PulseKind::Rectangular,
            RzcShape::Sech => PulseKind::Sech,
            RzcShape::Exponential => PulseKind::Exponential,
            RzcShape::Gaussian => PulseKind::Gaussian,
            RzcShape::Sech2 => PulseKind::Sech2,
        }
    }

    pub fn from_pulse_kind(kind: PulseKind) -> Self {
        match kind {
            PulseKind::Rectangular => RzcShape::Rectangular,
            PulseKind::Sech => RzcShape::Sech,
            PulseKind::Exponential => RzcShape::Exponential,
            PulseKind::Gaussian => RzcShape::Gaussian,
            PulseKind::Sech2 => RzcShape::Sech2,
        }
    }

    /// τ̃ = ∫Ω dt / Ω₀ over the infinite support.
    pub fn effective_width(self, tau: f64) -> f64 {
        match self {
            RzcShape::Rectangular => tau,
            RzcShape::Sech => PI * tau,
            RzcShape::Exponential | RzcShape::Sech2 => 2.0 * tau,
            RzcShape::Gaussian => PI.sqrt() * tau,
        }
    }
}

/// Area-corrected conjecture profile with S(Δ) = τ̃·√(Ω₀² + aΔ²).
pub fn rzc_profile(shape: RzcShape, omega0: f64, tau: f64, a: f64, delta: f64, form: RzcForm) -> Result<f64> {
    require_finite("omega0", omega0)?;
    require_positive("tau", tau)?;
    require_finite("delta", delta)?;
    if !(0.0..=1.0).contains(&a) {
        return Err(Error::InvalidParameter {
            name: "a",
            reason: format!("area-correction parameter must lie in [0, 1], got {a}"),
        });
    }
    let root = (omega0 * omega0 + a * delta * delta).sqrt();
    let half_area = 0.5 * shape.effective_width(tau) * root;
    let dt = (delta * tau).abs();
    let p = match (shape, form) {
        (RzcShape::Rectangular, _) => {
            let r2 = omega0 * omega0 + delta * delta;
            if r2 == 0.0 {
                0.0
            } else {
                omega0 * omega0 / r2 * half_area.sin().powi(2)
            }
        }
        (RzcShape::Sech, _) => half_area.sin().powi(2) / (0.5 * PI * dt).cosh().powi(2),
        (RzcShape::Exponential, RzcForm::Strict) => half_area.sin().powi(2) / (1.0 + dt * dt).powi(2),
        (RzcShape::Exponential, RzcForm::AsPrinted) => half_area.sin().powi(2) / (1.0 + dt * dt),
        (RzcShape::Gaussian, RzcForm::Strict) => half_area.sin().powi(2) * (-0.5 * dt * dt).exp(),
        (RzcShape::Gaussian, RzcForm::AsPrinted) => {
            ((0.5 * PI).sqrt() * tau * root).sin().powi(2) * (-dt * dt).exp()
        }
        (RzcShape::Sech2, form) => {
            let x = 0.5 * PI * dt;
            // (x / sinh x)² → 1 as x → 0
            let ratio_sq = if dt < SECH2_SERIES_LIMIT {
                1.0 - x * x / 3.0
            } else {
                (x / x.sinh()).powi(2)
            };
            let prefactor = match form {
                RzcForm::Strict => ratio_sq,
                RzcForm::AsPrinted => 4.0 * ratio_sq,
            };
            prefactor * half_area.sin().powi(2)
        }
    };
    Ok(p)
}

/// Davis–Dykhne–Pechukas approximation for the Gaussian pulse.
///
/// α = Ω₀/Δ is singular at resonance, so |Δ| is clamped to `10⁻⁶/τ`. The
/// formula tends to sin²(√(−ln ν)·Ω₀τ) there, with an error roughly linear
/// in Δτ (about 10⁻⁷ at the clamp).
pub fn gaussian_ddp_profile(omega0: f64, tau: f64, delta: f64) -> Result<f64> {
    require_finite("omega0", omega0)?;
    require_positive("tau", tau)?;
    require_finite("delta", delta)?;
    let delta = delta.abs().max(1e-6 / tau);
    let alpha = omega0.abs() / delta;
    let dt = delta * tau;

    let s = (alpha * alpha + 1.0).sqrt() - 1.0;
    let inner = alpha * alpha / ((1.0 + DDP_NU * s).powi(2) - 1.0);
    let log_inner = positive_log("α²/((1+ν(√(α²+1)−1))²−1)", inner)?;
    let first = s * positive_sqrt("½·ln(α²/((1+ν(√(α²+1)−1))²−1))", 0.5 * log_inner)?;
    let l = positive_log("α²/(μ(2−μ))", alpha * alpha / (DDP_MU * (2.0 - DDP_MU)))?;
    let second = 0.5 * positive_sqrt("√(L²+π²)+L", (l * l + PI * PI).sqrt() + l)?;
    let re_d = dt * (first + second);

    let lm = positive_log("mα", DDP_M * alpha)?;
    let im_d = 0.5 * dt * positive_sqrt("√(4ln²(mα)+π²)−2ln(mα)", (4.0 * lm * lm + PI * PI).sqrt() - 2.0 * lm)?;

    Ok(re_d.sin().powi(2) / im_d.cosh().powi(2))
}

fn positive_log(what: &str, arg: f64) -> Result<f64> {
    if arg.is_finite() && arg > 0.0 {
        Ok(arg.ln())
    } else {
        Err(Error::Domain(format!("logarithm argument {what} = {arg} is not positive")))
    }
}

fn positive_sqrt(what: &str, arg: f64) -> Result<f64> {
    if arg.is_finite() && arg > 0.0 {
        Ok(arg.sqrt())
    } else {
        Err(Error::Domain(format!("square-root argument {what} = {arg} is not positive")))
    }
}

/// L(Δ) = A / (1 + kΔ²) + C.
pub fn lorentzian_profile(amplitude: f64, k: f64, offset: f64, delta: f64) -> f64 {
    amplitude / (1.0 + k * delta * delta) + offset
}

/// A line-profile model with its physical inputs frozen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProfileModel {
    Rabi { omega0: f64, duration: f64 },
    RosenZener { omega0: f64, tau: f64 },
    DemkovBessel { omega0: f64, tau: f64 },
    DemkovRzc { omega0: f64, tau: f64, a: f64, form: RzcForm },
    GaussianDdp { omega0: f64, tau: f64 },
    GaussianRzc { omega0: f64, tau: f64, a: f64, form: RzcForm },
    Sech2Rzc { omega0: f64, tau: f64, a: f64, form: RzcForm },
    Lorentzian { amplitude: f64, k: f64, offset: f64 },
}

impl ProfileModel {
    /// Model of `kind` with the pulse's Ω₀, τ and T. RZC kinds need `a`.
    pub fn for_pulse(kind: ModelKind, spec: &PulseSpec, a: Option<f64>, form: RzcForm) -> Result<Self> {
        if let Some(expected) = kind.pulse_kind() {
            if expected != spec.kind() {
                return Err(Error::InvalidParameter {
                    name: "model",
                    reason: format!("{kind} describes {expected} pulses, got a {} pulse", spec.kind()),
                });
            }
        }
        Self::with_pulse_parameters(kind, spec, a, form)
    }

    /// Like [`ProfileModel::for_pulse`] but without checking that the model
    /// matches the pulse shape. Mismatched pairings are useful for misfit studies.
    pub fn with_pulse_parameters(kind: ModelKind, spec: &PulseSpec, a: Option<f64>, form: RzcForm) -> Result<Self> {
        let (omega0, tau) = (spec.omega0(), spec.tau());
        let need_a = || {
            a.ok_or(Error::InvalidParameter {
                name: "a",
                reason: format!("{kind} needs an area-correction parameter"),
            })
        };
        Ok(match kind {
            ModelKind::Rabi => ProfileModel::Rabi {
                omega0,
                duration: spec.duration(),
            },
            ModelKind::RosenZener => ProfileModel::RosenZener { omega0, tau },
            ModelKind::DemkovBessel => ProfileModel::DemkovBessel { omega0, tau },
            ModelKind::GaussianDdp => ProfileModel::GaussianDdp { omega0, tau },
            ModelKind::DemkovRzc => ProfileModel::DemkovRzc { omega0, tau, a: need_a()?, form },
            ModelKind::GaussianRzc => ProfileModel::GaussianRzc { omega0, tau, a: need_a()?, form },
            ModelKind::Sech2Rzc => ProfileModel::Sech2Rzc { omega0, tau, a: need_a()?, form },
            ModelKind::Lorentzian => {
                return Err(Error::InvalidParameter {
                    name: "model",
                    reason: "the Lorentzian has no pulse parameters".into(),
                })
            }
        })
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            ProfileModel::Rabi { .. } => ModelKind::Rabi,
            ProfileModel::RosenZener { .. } => ModelKind::RosenZener,
            ProfileModel::DemkovBessel { .. } => ModelKind::DemkovBessel,
            ProfileModel::DemkovRzc { .. } => ModelKind::DemkovRzc,
            ProfileModel::GaussianDdp { .. } => ModelKind::GaussianDdp,
            ProfileModel::GaussianRzc { .. } => ModelKind::GaussianRzc,
            ProfileModel::Sech2Rzc { .. } => ModelKind::Sech2Rzc,
            ProfileModel::Lorentzian { .. } => ModelKind::Lorentzian,
        }
    }

    pub fn evaluate(&self, delta: f64) -> Result<f64> {
        match *self {
            ProfileModel::Rabi { omega0, duration } => rabi_profile(omega0, duration, delta),
            ProfileModel::RosenZener { omega0, tau } => rosen_zener_profile(omega0, tau, delta),
            ProfileModel::DemkovBessel { omega0, tau } => demkov_bessel_profile(omega0, tau, delta),
            ProfileModel::DemkovRzc { omega0, tau, a, form } => {
                rzc_profile(RzcShape::Exponential, omega0, tau, a, delta, form)
            }
            ProfileModel::GaussianDdp { omega0, tau } => gaussian_ddp_profile(omega0, tau, delta),
            ProfileModel::GaussianRzc { omega0, tau, a, form } => {
                rzc_profile(RzcShape::Gaussian, omega0, tau, a, delta, form)
            }
            ProfileModel::Sech2Rzc { omega0, tau, a, form } => {
                rzc_profile(RzcShape::Sech2, omega0, tau, a, delta, form)
            }
            ProfileModel::Lorentzian { amplitude, k, offset } => {
                require_finite("delta", delta)?;
                Ok(lorentzian_profile(amplitude, k, offset, delta))
            }
        }
    }

    pub fn profile(&self, grid: &[f64]) -> Result<LineProfile> {
        check_grid(grid)?;
        let values = grid.iter().map(|d| self.evaluate(*d)).collect::<Result<Vec<_>>>()?;
        let provenance = match self.kind() {
            ModelKind::Lorentzian => Provenance::Lorentzian,
            kind => Provenance::Analytic(kind),
        };
        match self {
            // the printed sech² form exceeds one near resonance
            ProfileModel::Sech2Rzc { form: RzcForm::AsPrinted, .. } => {
                Ok(LineProfile::unchecked(grid.to_vec(), values, provenance))
            }
            _ => LineProfile::new(grid.to_vec(), values, provenance),
        }
    }
}
