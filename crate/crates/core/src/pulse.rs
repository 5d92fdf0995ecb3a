//! Pulse envelopes, truncation durations, area normalization and sampling.
//!
//! Every envelope is centred at `T/2` and evaluated with the reduced time
//! `x = (t - T/2) / τ`. The rectangular pulse ignores `τ`.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{require_finite, require_positive, Error, Result};
use crate::units::{angular_to_mhz, mhz_to_angular, ns_to_s, s_to_ns};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseKind {
    Rectangular,
    Sech,
    Exponential,
    Gaussian,
    Sech2,
}

impl PulseKind {
    pub const ALL: [PulseKind; 5] = [
        PulseKind::Rectangular,
        PulseKind::Sech,
        PulseKind::Exponential,
        PulseKind::Gaussian,
        PulseKind::Sech2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PulseKind::Rectangular => "rectangular",
            PulseKind::Sech => "sech",
            PulseKind::Exponential => "exponential",
            PulseKind::Gaussian => "gaussian",
            PulseKind::Sech2 => "sech2",
        }
    }

    /// Envelope divided by its peak value, as a function of `x = (t - T/2)/τ`.
    fn shape(self, x: f64) -> f64 {
        match self {
            PulseKind::Rectangular => 1.0,
            PulseKind::Sech => 1.0 / x.cosh(),
            PulseKind::Exponential => (-x.abs()).exp(),
            PulseKind::Gaussian => (-x * x).exp(),
            PulseKind::Sech2 => {
                let s = 1.0 / x.cosh();
                s * s
            }
        }
    }
}

impl fmt::Display for PulseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PulseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PulseKind::ALL
            .into_iter()
            .find(|k| k.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| {
                Error::Parse(format!(
                    "unknown pulse shape `{s}` (valid: rectangular, sech, exponential, gaussian, sech2)"
                ))
            })
    }
}

/// A parametrized pulse envelope. All quantities in SI / angular units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PulseDocument", into = "PulseDocument")]
pub struct PulseSpec {
    kind: PulseKind,
    omega0: f64,
    tau: f64,
    duration: f64,
}

impl PulseSpec {
    pub fn new(kind: PulseKind, omega0: f64, tau: f64, duration: f64) -> Result<Self> {
        require_finite("omega0", omega0)?;
        if omega0 < 0.0 {
            return Err(Error::InvalidParameter {
                name: "omega0",
                reason: format!("must be ≥ 0, got {omega0}"),
            });
        }
        require_positive("tau", tau)?;
        require_positive("duration", duration)?;
        Ok(Self {
            kind,
            omega0,
            tau,
            duration,
        })
    }

    /// Rectangular pulse of the given duration; `τ` is set to the duration.
    pub fn rectangular(omega0: f64, duration: f64) -> Result<Self> {
        Self::new(PulseKind::Rectangular, omega0, duration, duration)
    }

    /// Builds a pulse whose truncated area equals `area`.
    pub fn with_area(kind: PulseKind, tau: f64, duration: f64, area: f64) -> Result<Self> {
        let omega0 = amplitude_for_area(kind, tau, duration, area)?;
        Self::new(kind, omega0, tau, duration)
    }

    /// Pulse with the truncation point placed at `fraction` of the peak and
    /// the amplitude normalized to `area`. Rectangular pulses take `tau` as
    /// their duration.
    pub fn with_cutoff_and_area(kind: PulseKind, tau: f64, fraction: f64, area: f64) -> Result<Self> {
        let duration = match kind {
            PulseKind::Rectangular => tau,
            _ => duration_for_cutoff(kind, tau, fraction)?,
        };
        Self::with_area(kind, tau, duration, area)
    }

    pub fn kind(&self) -> PulseKind {
        self.kind
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn center(&self) -> f64 {
        0.5 * self.duration
    }

    /// Same pulse with the peak Rabi frequency replaced.
    pub fn with_omega0(&self, omega0: f64) -> Result<Self> {
        Self::new(self.kind, omega0, self.tau, self.duration)
    }

    /// Same pulse with a new duration (e.g. rounded onto a sample grid).
    pub fn with_duration(&self, duration: f64) -> Result<Self> {
        let tau = if self.kind == PulseKind::Rectangular {
            duration
        } else {
            self.tau
        };
        Self::new(self.kind, self.omega0, tau, duration)
    }

    /// Truncated pulse area ∫₀ᵀ Ω dt, rad.
    pub fn area(&self) -> f64 {
        self.omega0 * normalized_area(self.kind, self.tau, self.duration)
    }
}

/// Flat key-value form used in configuration and provenance documents.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PulseDocument {
    pub kind: PulseKind,
    pub omega0_mhz: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_ns: Option<f64>,
    pub duration_ns: f64,
}

impl From<PulseSpec> for PulseDocument {
    fn from(spec: PulseSpec) -> Self {
        PulseDocument {
            kind: spec.kind,
            omega0_mhz: angular_to_mhz(spec.omega0),
            tau_ns: (spec.kind != PulseKind::Rectangular).then(|| s_to_ns(spec.tau)),
            duration_ns: s_to_ns(spec.duration),
        }
    }
}

impl TryFrom<PulseDocument> for PulseSpec {
    type Error = Error;

    fn try_from(doc: PulseDocument) -> Result<Self> {
        let duration = ns_to_s(doc.duration_ns);
        let tau = match (doc.kind, doc.tau_ns) {
            (PulseKind::Rectangular, t) => t.map(ns_to_s).unwrap_or(duration),
            (_, Some(t)) => ns_to_s(t),
            (kind, None) => {
                return Err(Error::InvalidParameter {
                    name: "tau_ns",
                    reason: format!("required for {kind} pulses"),
                })
            }
        };
        PulseSpec::new(doc.kind, mhz_to_angular(doc.omega0_mhz), tau, duration)
    }
}

/// Ω(t) in rad/s. Zero outside `[0, T]`.
pub fn envelope(spec: &PulseSpec, t: f64) -> Result<f64> {
    require_finite("t", t).map_err(|_| Error::Domain(format!("time must be finite, got {t}")))?;
    if !(0.0..=spec.duration).contains(&t) {
        return Ok(0.0);
    }
    let x = (t - spec.center()) / spec.tau;
    Ok(spec.omega0 * spec.kind.shape(x))
}

/// Duration `T` at which the envelope at `t = 0` equals `fraction · Ω₀`.
pub fn duration_for_cutoff(kind: PulseKind, tau: f64, fraction: f64) -> Result<f64> {
    require_positive("tau", tau)?;
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidParameter {
            name: "fraction",
            reason: format!("must lie in (0, 1), got {fraction}"),
        });
    }
    let half_width = match kind {
        PulseKind::Rectangular => {
            return Err(Error::UnsupportedKind {
                operation: "duration_for_cutoff",
                kind: kind.to_string(),
            })
        }
        PulseKind::Sech => arcsech(fraction),
        PulseKind::Exponential => (1.0 / fraction).ln(),
        PulseKind::Gaussian => (1.0 / fraction).ln().sqrt(),
        PulseKind::Sech2 => arcsech(fraction.sqrt()),
    };
    Ok(2.0 * tau * half_width)
}

/// Rounds a duration up to an integral number of samples of width `dt`.
pub fn duration_on_grid(duration: f64, dt: f64) -> Result<f64> {
    require_positive("duration", duration)?;
    require_positive("dt", dt)?;
    let n = (duration / dt - 1e-9).ceil().max(1.0);
    Ok(n * dt)
}

fn arcsech(y: f64) -> f64 {
    ((1.0 + (1.0 - y * y).sqrt()) / y).ln()
}

/// Peak Rabi frequency giving the truncated pulse the requested area.
pub fn amplitude_for_area(kind: PulseKind, tau: f64, duration: f64, target_area: f64) -> Result<f64> {
    require_positive("tau", tau)?;
    require_positive("duration", duration)?;
    require_positive("target_area", target_area)?;
    Ok(target_area / normalized_area(kind, tau, duration))
}

/// ∫₀ᵀ Ω(t)/Ω₀ dt by adaptive quadrature over each half of the pulse.
fn normalized_area(kind: PulseKind, tau: f64, duration: f64) -> f64 {
    match kind {
        PulseKind::Rectangular => duration,
        _ => {
            // Symmetric about the centre; the exponential cusp sits on the split point.
            let half = 0.5 * duration / tau;
            2.0 * tau * adaptive_simpson(&|x| kind.shape(x), 0.0, half, 1e-14, 50)
        }
    }
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// Envelope on a uniform backend grid, one value per sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledPulse {
    dt: f64,
    samples: Vec<f64>,
}

impl SampledPulse {
    pub fn new(dt: f64, samples: Vec<f64>) -> Result<Self> {
        require_positive("dt", dt)?;
        if samples.is_empty() {
            return Err(Error::InvalidParameter {
                name: "samples",
                reason: "sampled pulse needs at least one sample".into(),
            });
        }
        if let Some(bad) = samples.iter().find(|s| !(s.is_finite() && **s >= 0.0)) {
            return Err(Error::InvalidParameter {
                name: "samples",
                reason: format!("Rabi frequencies must be finite and >= 0, got {bad}"),
            });
        }
        Ok(Self { dt, samples })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.dt * self.samples.len() as f64
    }

    /// Midpoint-rule area Σ Ωᵢ·dt.
    pub fn area(&self) -> f64 {
        self.samples.iter().sum::<f64>() * self.dt
    }

    /// Two-column CSV `t_ns,omega_mhz`, times at the sample midpoints.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(["t_ns", "omega_mhz"])?;
        for (i, omega) in self.samples.iter().enumerate() {
            let t = (i as f64 + 0.5) * self.dt;
            out.write_record([s_to_ns(t).to_string(), angular_to_mhz(*omega).to_string()])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Midpoint sampling on `N = round(T/dt)` bins. The bin width is stretched to
/// `T/N` so the samples tile `[0, T]` exactly and stay symmetric.
pub fn discretize(spec: &PulseSpec, dt: f64) -> Result<SampledPulse> {
    require_positive("dt", dt)?;
    if dt > spec.duration * (1.0 + 1e-12) {
        return Err(Error::InvalidParameter {
            name: "dt",
            reason: format!(
                "sample spacing {dt:e} s exceeds pulse duration {:e} s",
                spec.duration
            ),
        });
    }
    let n = ((spec.duration / dt).round() as usize).max(1);
    let width = spec.duration / n as f64;
    let samples = (0..n)
        .map(|i| {
            let x = ((i as f64 + 0.5) * width - spec.center()) / spec.tau;
            spec.omega0 * spec.kind.shape(x)
        })
        .collect();
    SampledPulse::new(width, samples)
}
