//! Shared flag groups and value parsers.

use std::f64::consts::PI;
use std::fs::File;
use std::path::PathBuf;

use anyhow::{anyhow, Context};
use clap::Args;
use lineshape::experiment::GridSpec;
use lineshape::pulse::duration_for_cutoff;
use lineshape::units::{ns_to_s, parse_frequency_angular, parse_frequency_hz, BACKEND_DT};
use lineshape::{ModelKind, PulseKind, PulseSpec, RzcForm};

use crate::failure::{Classify, Outcome};

#[derive(Args, Debug, Clone, Default)]
pub struct PulseArgs {
    /// Pulse envelope: rectangular, sech, exponential, gaussian or sech2
    #[arg(long, value_parser = parse_shape)]
    pub shape: Option<PulseKind>,

    /// Width τ in ns; rectangular pulses use it as the duration if --duration-ns is absent
    #[arg(long)]
    pub tau_ns: Option<f64>,

    /// Total pulse length in ns. Smooth pulses default to the --cutoff truncation
    #[arg(long)]
    pub duration_ns: Option<f64>,

    /// Fraction of the peak at which smooth pulses are truncated
    #[arg(long, default_value_t = 1e-3)]
    pub cutoff: f64,

    /// Truncated pulse area, e.g. pi, pi/2, 2pi or a number in rad [default: pi]
    #[arg(long, value_parser = parse_area, conflicts_with = "omega0")]
    pub area: Option<f64>,

    /// Peak Rabi frequency Ω₀/2π instead of an area, e.g. 7.46MHz
    #[arg(long)]
    pub omega0: Option<String>,

    /// Pulse as a JSON document {kind, omega0_mhz, tau_ns, duration_ns}
    #[arg(long, conflicts_with_all = ["shape", "tau_ns", "duration_ns", "area", "omega0"])]
    pub pulse: Option<PathBuf>,
}

impl PulseArgs {
    pub fn is_empty(&self) -> bool {
        self.shape.is_none() && self.pulse.is_none()
    }

    pub fn resolve(&self) -> Outcome<PulseSpec> {
        if let Some(path) = &self.pulse {
            let file = File::open(path)
                .with_context(|| format!("cannot open pulse document {}", path.display()))
                .usage()?;
            return lineshape::io::read_json(file)
                .with_context(|| format!("invalid pulse document {}", path.display()))
                .usage();
        }
        let kind = self
            .shape
            .ok_or_else(|| anyhow!("a pulse is required: give --shape (or --pulse FILE)"))
            .usage()?;
        let tau = self.tau_ns.map(ns_to_s);
        let duration = self.duration_ns.map(ns_to_s);
        let (tau, duration) = match kind {
            PulseKind::Rectangular => {
                let t = duration
                    .or(tau)
                    .ok_or_else(|| anyhow!("rectangular pulses need --duration-ns"))
                    .usage()?;
                (t, t)
            }
            _ => {
                let tau = tau.ok_or_else(|| anyhow!("{kind} pulses need --tau-ns")).usage()?;
                let duration = match duration {
                    Some(d) => d,
                    None => duration_for_cutoff(kind, tau, self.cutoff).usage()?,
                };
                (tau, duration)
            }
        };
        match &self.omega0 {
            Some(text) => {
                let omega0 = parse_frequency_angular(text).usage()?;
                PulseSpec::new(kind, omega0, tau, duration).usage()
            }
            None => PulseSpec::with_area(kind, tau, duration, self.area.unwrap_or(PI)).usage(),
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct RzcArgs {
    /// Area-correction parameter for the RZC models; calibrated against the numerics when absent
    #[arg(long)]
    pub a: Option<f64>,

    /// RZC algebraic form: strict or as_printed
    #[arg(long, default_value = "strict", value_parser = parse_form)]
    pub form: RzcForm,
}

/// Propagator step in ns.
pub fn dt_seconds(dt_ns: Option<f64>) -> Outcome<f64> {
    match dt_ns {
        None => Ok(BACKEND_DT),
        Some(ns) if ns.is_finite() && ns > 0.0 => Ok(ns_to_s(ns)),
        Some(ns) => Err(anyhow!("--dt-ns must be positive, got {ns}")).usage(),
    }
}

pub fn parse_shape(s: &str) -> Result<PulseKind, String> {
    s.parse::<PulseKind>().map_err(|e| e.to_string())
}

pub fn parse_model(s: &str) -> Result<ModelKind, String> {
    s.parse::<ModelKind>().map_err(|e| e.to_string())
}

pub fn parse_form(s: &str) -> Result<RzcForm, String> {
    s.parse::<RzcForm>().map_err(|e| e.to_string())
}

pub fn parse_grid(s: &str) -> Result<GridSpec, String> {
    s.parse::<GridSpec>().map_err(|e| e.to_string())
}

/// Ordinary frequency in Hz; bare numbers are MHz.
pub fn parse_frequency(s: &str) -> Result<f64, String> {
    parse_frequency_hz(s).map_err(|e| e.to_string())
}

/// `pi`, `π`, `pi/2`, `2pi`, `0.5*pi` or a plain number of radians.
pub fn parse_area(s: &str) -> Result<f64, String> {
    let text = s.trim().to_ascii_lowercase().replace('π', "pi");
    let bad = || format!("cannot read pulse area `{s}`");
    let value = match text.split_once("pi") {
        None => text.parse::<f64>().map_err(|_| bad())?,
        Some((coef, rest)) => {
            let coef = coef.trim().trim_end_matches('*').trim();
            let coef = if coef.is_empty() { 1.0 } else { coef.parse::<f64>().map_err(|_| bad())? };
            let rest = rest.trim();
            let div = match rest.strip_prefix('/') {
                Some(d) => d.trim().parse::<f64>().map_err(|_| bad())?,
                None if rest.is_empty() => 1.0,
                None => return Err(bad()),
            };
            coef * PI / div
        }
    };
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(format!("pulse area must be finite and ≥ 0, got `{s}`"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn areas() {
        assert_eq!(parse_area("pi").unwrap(), PI);
        assert_eq!(parse_area("π").unwrap(), PI);
        assert_eq!(parse_area("pi/2").unwrap(), PI / 2.0);
        assert_eq!(parse_area("2pi").unwrap(), 2.0 * PI);
        assert_eq!(parse_area("0.5*pi").unwrap(), 0.5 * PI);
        assert_eq!(parse_area("1.25").unwrap(), 1.25);
        assert!(parse_area("pie").is_err());
        assert!(parse_area("-pi").is_err());
    }

    #[test]
    fn rectangular_takes_either_length() {
        let args = PulseArgs {
            shape: Some(PulseKind::Rectangular),
            duration_ns: Some(21.33),
            cutoff: 1e-3,
            ..Default::default()
        };
        let spec = args.resolve().unwrap();
        assert!((spec.area() - PI).abs() < 1e-12);
        assert_eq!(spec.duration(), ns_to_s(21.33));
    }

    #[test]
    fn smooth_pulse_needs_tau() {
        let args = PulseArgs {
            shape: Some(PulseKind::Sech),
            cutoff: 1e-3,
            ..Default::default()
        };
        assert!(args.resolve().is_err());
        let spec = PulseArgs {
            tau_ns: Some(21.33),
            ..args
        }
        .resolve()
        .unwrap();
        assert!((spec.duration() * 1e9 - 324.25).abs() < 0.01);
    }
}
