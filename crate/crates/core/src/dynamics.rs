//! Numerical reference solution of the two-level RWA Schrödinger equation
//!
//! ```text
//! i d/dt [c0, c1]ᵀ = [[0, Ω(t)/2], [Ω(t)/2, Δ]] [c0, c1]ᵀ
//! ```
//!
//! for a piecewise-constant Ω(t) and constant Δ. Each sample is advanced with
//! the closed-form exponential of the constant 2×2 Hamiltonian, so sampled
//! pulses are propagated exactly up to round-off.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::analytic::ModelKind;
use crate::error::{require_finite, require_positive, Error, Result};
use crate::pulse::{discretize, PulseSpec, SampledPulse};

/// Tolerated deviation of |c0|² + |c1|² from one on input.
pub const INPUT_NORM_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateAmplitudes {
    pub c0: Complex64,
    pub c1: Complex64,
}

impl StateAmplitudes {
    pub const GROUND: StateAmplitudes = StateAmplitudes {
        c0: Complex64::new(1.0, 0.0),
        c1: Complex64::new(0.0, 0.0),
    };

    pub fn new(c0: Complex64, c1: Complex64) -> Self {
        Self { c0, c1 }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.c0.norm_sqr() + self.c1.norm_sqr()
    }

    pub fn excited_population(&self) -> f64 {
        self.c1.norm_sqr()
    }
}

/// Applies every sample's propagator in order and returns the final state.
pub fn propagate(pulse: &SampledPulse, delta: f64, initial: StateAmplitudes) -> Result<StateAmplitudes> {
    require_finite("delta", delta)?;
    let norm = initial.norm_sqr();
    if !((norm - 1.0).abs() <= INPUT_NORM_TOL) {
        return Err(Error::NotNormalized(norm));
    }
    let dt = pulse.dt();
    // e^{-iΔdt/2} is common to every step
    let phase = Complex64::from_polar(1.0, -0.5 * delta * dt);
    let mut state = initial;
    for &omega in pulse.samples() {
        state = step(state, omega, delta, dt, phase);
    }
    Ok(state)
}

#[inline]
fn step(s: StateAmplitudes, omega: f64, delta: f64, dt: f64, phase: Complex64) -> StateAmplitudes {
    // H = Δ/2·I + (Ω/2)σx − (Δ/2)σz; U = e^{−iΔdt/2}[cos θ − i sin θ (n·σ)]
    let r = omega.hypot(delta);
    let theta = 0.5 * r * dt;
    let (sin, cos) = theta.sin_cos();
    let (nx, nz) = if r > 0.0 { (omega / r, -delta / r) } else { (0.0, 0.0) };
    let u00 = Complex64::new(cos, -sin * nz);
    let u11 = Complex64::new(cos, sin * nz);
    let u01 = Complex64::new(0.0, -sin * nx);
    StateAmplitudes {
        c0: phase * (u00 * s.c0 + u01 * s.c1),
        c1: phase * (u01 * s.c0 + u11 * s.c1),
    }
}

/// |c1|² after driving the ground state with the sampled pulse.
pub fn transition_probability_sampled(pulse: &SampledPulse, delta: f64) -> Result<f64> {
    let finish = propagate(pulse, delta, StateAmplitudes::GROUND)?;
    Ok(finish.excited_population().min(1.0))
}

pub fn transition_probability_numeric(spec: &PulseSpec, delta: f64, dt: f64) -> Result<f64> {
    let pulse = discretize(spec, dt)?;
    transition_probability_sampled(&pulse, delta)
}

/// Numeric line profile; grid points are evaluated in parallel.
pub fn profile_numeric(spec: &PulseSpec, grid: &[f64], dt: f64) -> Result<LineProfile> {
    check_grid(grid)?;
    let pulse = discretize(spec, dt)?;
    let probabilities = grid
        .par_iter()
        .map(|&delta| transition_probability_sampled(&pulse, delta))
        .collect::<Result<Vec<_>>>()?;
    LineProfile::new(grid.to_vec(), probabilities, Provenance::Numeric)
}

/// `n` evenly spaced detunings from `lo` to `hi` inclusive.
pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    require_finite("lo", lo)?;
    require_finite("hi", hi)?;
    if n < 2 || hi <= lo {
        return Err(Error::InvalidParameter {
            name: "grid",
            reason: format!("need at least two points and lo < hi, got {n} points over [{lo}, {hi}]"),
        });
    }
    let step = (hi - lo) / (n - 1) as f64;
    Ok((0..n)
        .map(|i| if i == n - 1 { hi } else { lo + step * i as f64 })
        .collect())
}

/// Symmetric grid `center ± half_span` with `n` points.
pub fn symmetric_grid(center: f64, half_span: f64, n: usize) -> Result<Vec<f64>> {
    require_positive("half_span", half_span)?;
    let mut grid = uniform_grid(center - half_span, center + half_span, n)?;
    if n % 2 == 1 {
        grid[n / 2] = center;
    }
    // exact mirror images so evenness checks compare identical |Δ|
    for i in 0..n / 2 {
        let offset = 0.5 * ((grid[n - 1 - i] - center) - (grid[i] - center));
        grid[i] = center - offset;
        grid[n - 1 - i] = center + offset;
    }
    Ok(grid)
}

pub(crate) fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter {
            name: "grid",
            reason: "detuning grid is empty".into(),
        });
    }
    if let Some(bad) = grid.iter().find(|d| !d.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "grid",
            reason: format!("detunings must be finite, got {bad}"),
        });
    }
    if let Some(w) = grid.windows(2).find(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter {
            name: "grid",
            reason: format!("detunings must be strictly increasing ({} then {})", w[0], w[1]),
        });
    }
    Ok(())
}

/// Where a line profile came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Numeric,
    Analytic(ModelKind),
    Lorentzian,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Numeric => f.write_str("numeric"),
            Provenance::Lorentzian => f.write_str("lorentzian"),
            Provenance::Analytic(kind) => write!(f, "analytic-{kind}"),
        }
    }
}

impl FromStr for Provenance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "numeric" => Ok(Provenance::Numeric),
            "lorentzian" => Ok(Provenance::Lorentzian),
            other => other
                .strip_prefix("analytic-")
                .ok_or_else(|| Error::Parse(format!("unknown provenance `{other}`")))?
                .parse()
                .map(Provenance::Analytic),
        }
    }
}

impl Serialize for Provenance {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Provenance {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Transition probability sampled on a detuning grid (rad/s).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineProfile {
    detunings: Vec<f64>,
    probabilities: Vec<f64>,
    provenance: Provenance,
}

impl LineProfile {
    pub fn new(detunings: Vec<f64>, probabilities: Vec<f64>, provenance: Provenance) -> Result<Self> {
        check_grid(&detunings)?;
        if detunings.len() != probabilities.len() {
            return Err(Error::GridMismatch(format!(
                "{} detunings but {} probabilities",
                detunings.len(),
                probabilities.len()
            )));
        }
        let upper = match provenance {
            Provenance::Numeric => 1.0,
            _ => 1.0 + 1e-9,
        };
        // Lorentzian curves are fit functions and need not be probabilities.
        if provenance != Provenance::Lorentzian {
            if let Some(p) = probabilities.iter().find(|p| !(0.0..=upper).contains(*p)) {
                return Err(Error::Domain(format!(
                    "{provenance} profile value {p} outside [0, {upper}]"
                )));
            }
        }
        Ok(Self {
            detunings,
            probabilities,
            provenance,
        })
    }

    /// Skips the range check; the grid must already be validated.
    pub(crate) fn unchecked(detunings: Vec<f64>, probabilities: Vec<f64>, provenance: Provenance) -> Self {
        Self {
            detunings,
            probabilities,
            provenance,
        }
    }

    pub fn detunings(&self) -> &[f64] {
        &self.detunings
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn len(&self) -> usize {
        self.detunings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.detunings.is_empty()
    }

    /// Largest pointwise |difference| against another profile on the same grid.
    pub fn max_abs_deviation(&self, other: &LineProfile) -> Result<f64> {
        if self.detunings != other.detunings {
            return Err(Error::GridMismatch("profiles are on different detuning grids".into()));
        }
        Ok(self
            .probabilities
            .iter()
            .zip(&other.probabilities)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulse::PulseKind;
    use crate::units::{mhz_to_angular, BACKEND_DT};
    use std::f64::consts::PI;

    const TAU: f64 = 21.33e-9;

    fn pi_rect() -> PulseSpec {
        let duration = 96.0 * BACKEND_DT;
        PulseSpec::rectangular(PI / duration, duration).unwrap()
    }

    fn rabi(omega0: f64, t: f64, delta: f64) -> f64 {
        let r2 = omega0 * omega0 + delta * delta;
        omega0 * omega0 / r2 * (0.5 * t * r2.sqrt()).sin().powi(2)
    }

    #[test]
    fn resonant_pi_pulse_inverts() {
        let p = transition_probability_numeric(&pi_rect(), 0.0, BACKEND_DT).unwrap();
        assert!((p - 1.0).abs() < 1e-9);
    }

    #[test]
    fn zero_drive_is_identity_up_to_phase() {
        let pulse = SampledPulse::new(BACKEND_DT, vec![0.0; 50]).unwrap();
        for delta in [0.0, 1e8, -3e8] {
            let s = propagate(&pulse, delta, StateAmplitudes::GROUND).unwrap();
            assert!((s.c0.norm_sqr() - 1.0).abs() < 1e-14);
            assert_eq!(s.c1.norm_sqr(), 0.0);
        }
    }

    #[test]
    fn rabi_zero_at_root_three_omega() {
        let spec = pi_rect();
        let p = transition_probability_numeric(&spec, 3f64.sqrt() * spec.omega0(), BACKEND_DT).unwrap();
        assert!(p < 1e-9, "{p}");
    }

    #[test]
    fn unnormalized_input_is_rejected() {
        let pulse = discretize(&pi_rect(), BACKEND_DT).unwrap();
        let bad = StateAmplitudes::new(Complex64::new(1.0, 0.0), Complex64::new(0.01, 0.0));
        assert!(matches!(propagate(&pulse, 0.0, bad), Err(Error::NotNormalized(_))));
        let tiny = StateAmplitudes::new(Complex64::new((1.0 - 1e-8f64).sqrt(), 0.0), Complex64::new(0.0, 0.0));
        assert!(propagate(&pulse, 0.0, tiny).is_ok());
    }

    #[test]
    fn pi_area_pulses_invert_on_resonance() {
        for kind in PulseKind::ALL {
            let spec = PulseSpec::with_cutoff_and_area(kind, TAU, 1e-3, PI).unwrap();
            let p = transition_probability_numeric(&spec, 0.0, BACKEND_DT).unwrap();
            assert!(p >= 0.999, "{kind}: {p}");
        }
    }

    #[test]
    fn sech_matches_rosen_zener_at_one_over_tau() {
        let spec = PulseSpec::with_cutoff_and_area(PulseKind::Sech, TAU, 1e-3, PI).unwrap();
        let p = transition_probability_numeric(&spec, 1.0 / TAU, BACKEND_DT).unwrap();
        let expected = (1.0 / (PI / 2.0).cosh()).powi(2);
        assert!((expected - 0.1588).abs() < 1e-4);
        assert!((p - expected).abs() < 2e-3, "{p} vs {expected}");
    }

    #[test]
    fn exponential_resonance_depends_only_on_area() {
        let spec = PulseSpec::with_cutoff_and_area(PulseKind::Exponential, TAU, 1e-3, PI).unwrap();
        let p = transition_probability_numeric(&spec, 0.0, BACKEND_DT).unwrap();
        let sampled = discretize(&spec, BACKEND_DT).unwrap();
        let expected = (0.5 * sampled.area()).sin().powi(2);
        assert!((p - expected).abs() < 1e-12);
        assert!(p > 0.999_999);
    }

    #[test]
    fn profiles_are_even() {
        let grid = symmetric_grid(0.0, mhz_to_angular(40.0), 41).unwrap();
        for kind in PulseKind::ALL {
            let spec = PulseSpec::with_cutoff_and_area(kind, TAU, 1e-3, PI).unwrap();
            let prof = profile_numeric(&spec, &grid, BACKEND_DT).unwrap();
            let p = prof.probabilities();
            for i in 0..p.len() {
                assert!((p[i] - p[p.len() - 1 - i]).abs() < 1e-9, "{kind} at {i}");
            }
        }
    }

    #[test]
    fn single_point_grid() {
        let spec = PulseSpec::with_cutoff_and_area(PulseKind::Gaussian, TAU, 1e-3, PI).unwrap();
        let prof = profile_numeric(&spec, &[0.0], BACKEND_DT).unwrap();
        assert_eq!(prof.len(), 1);
        assert!(prof.probabilities()[0] >= 0.999);
    }

    #[test]
    fn rectangular_zeros_are_reproduced() {
        let spec = pi_rect();
        let (w, t) = (spec.omega0(), spec.duration());
        // √(Δ² + Ω₀²)·T = 2kπ
        let zeros: Vec<f64> = (1..6)
            .map(|k| ((2.0 * PI * k as f64 / t).powi(2) - w * w).sqrt())
            .collect();
        let prof = profile_numeric(&spec, &zeros, BACKEND_DT).unwrap();
        for (d, p) in zeros.iter().zip(prof.probabilities()) {
            assert!(*p < 1e-6, "Δ = {d}: {p}");
            assert!(rabi(w, t, *d) < 1e-20);
        }
    }

    #[test]
    fn grids() {
        let g = symmetric_grid(0.0, 1.0, 5).unwrap();
        assert_eq!(g, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert!(uniform_grid(1.0, 0.0, 3).is_err());
        assert!(uniform_grid(0.0, 1.0, 1).is_err());
        assert!(check_grid(&[0.0, 0.0]).is_err());
        assert!(check_grid(&[0.0, f64::NAN]).is_err());
    }

    #[test]
    fn provenance_tags() {
        for tag in ["numeric", "lorentzian", "analytic-rabi", "analytic-sech2_rzc"] {
            let p: Provenance = tag.parse().unwrap();
            assert_eq!(p.to_string(), tag);
        }
        assert!("analytic-foo".parse::<Provenance>().is_err());
    }

    #[test]
    fn line_profile_validation() {
        assert!(LineProfile::new(vec![0.0, 1.0], vec![0.5], Provenance::Numeric).is_err());
        assert!(LineProfile::new(vec![0.0], vec![1.0 + 1e-12], Provenance::Numeric).is_err());
        assert!(LineProfile::new(
            vec![0.0],
            vec![1.0 + 1e-12],
            Provenance::Analytic(ModelKind::Rabi)
        )
        .is_ok());
    }
}
