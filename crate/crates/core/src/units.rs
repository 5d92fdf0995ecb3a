//! Unit conversions between the internal angular representation and the
//! ordinary-frequency values used for all input and output.
//!
//! Rabi frequencies and detunings are stored in rad/s and times in seconds.
//! Files, flags and reports use f = Ω/2π in MHz (or kHz / Hz) and times in ns.

use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// Backend sample spacing, 2/9 ns.
pub const BACKEND_DT: f64 = 2.0e-9 / 9.0;

/// Default number of shots per measured point.
pub const DEFAULT_SHOTS: u32 = 4096;

pub fn mhz_to_angular(mhz: f64) -> f64 {
    mhz * 1.0e6 * TAU
}

pub fn angular_to_mhz(omega: f64) -> f64 {
    omega / TAU / 1.0e6
}

pub fn hz_to_angular(hz: f64) -> f64 {
    hz * TAU
}

pub fn angular_to_hz(omega: f64) -> f64 {
    omega / TAU
}

pub fn ns_to_s(ns: f64) -> f64 {
    ns * 1.0e-9
}

pub fn s_to_ns(s: f64) -> f64 {
    s * 1.0e9
}

/// Parses an ordinary frequency such as `40MHz`, `200 kHz`, `-1.5e3Hz` or
/// `5.1GHz` and returns it in Hz. A bare number is read as MHz.
pub fn parse_frequency_hz(text: &str) -> Result<f64> {
    let trimmed = text.trim();
    let lower = trimmed.to_ascii_lowercase();
    let (number, scale) = if let Some(n) = lower.strip_suffix("ghz") {
        (n, 1.0e9)
    } else if let Some(n) = lower.strip_suffix("mhz") {
        (n, 1.0e6)
    } else if let Some(n) = lower.strip_suffix("khz") {
        (n, 1.0e3)
    } else if let Some(n) = lower.strip_suffix("hz") {
        (n, 1.0)
    } else {
        (lower.as_str(), 1.0e6)
    };
    let value: f64 = number
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("cannot read frequency `{trimmed}`")))?;
    if !value.is_finite() {
        return Err(Error::Parse(format!("frequency `{trimmed}` is not finite")));
    }
    Ok(value * scale)
}

/// Parses a frequency and converts it straight to rad/s.
pub fn parse_frequency_angular(text: &str) -> Result<f64> {
    parse_frequency_hz(text).map(hz_to_angular)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        let w = mhz_to_angular(23.44);
        assert!((angular_to_mhz(w) - 23.44).abs() < 1e-12);
        assert!((angular_to_hz(hz_to_angular(200e3)) - 200e3).abs() < 1e-9);
        assert!((s_to_ns(ns_to_s(21.33)) - 21.33).abs() < 1e-12);
    }

    #[test]
    fn frequency_suffixes() {
        assert_eq!(parse_frequency_hz("40MHz").unwrap(), 40.0e6);
        assert_eq!(parse_frequency_hz("200 kHz").unwrap(), 200.0e3);
        assert_eq!(parse_frequency_hz("-12.5Hz").unwrap(), -12.5);
        assert_eq!(parse_frequency_hz("5.15754GHz").unwrap(), 5.15754e9);
        assert_eq!(parse_frequency_hz("3").unwrap(), 3.0e6);
        assert!(parse_frequency_hz("fast").is_err());
        assert!(parse_frequency_hz("inf MHz").is_err());
    }

    #[test]
    fn backend_dt_is_two_ninths_ns() {
        assert!((BACKEND_DT * 9.0 - 2.0e-9).abs() < 1e-24);
    }
}
