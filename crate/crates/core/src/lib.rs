//! Transition line profiles of a qubit driven by shaped pulses.
//!
//! The crate covers five pulse envelopes (rectangular, sech, exponential,
//! Gaussian, sech²), an exact piecewise-constant propagator used as the
//! numerical reference, closed-form and approximate profile formulas, the
//! calibration of the area-correction parameter, a shot-noise experiment
//! simulator, and least-squares fitting with loss correction and the
//! Lorentzian baseline.

pub mod analytic;
pub mod calibration;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod fit;
pub mod io;
pub mod pulse;
pub mod report;
pub mod special;
pub mod units;

pub use analytic::{ModelKind, ProfileModel, RzcForm, RzcShape};
pub use calibration::{calibrate_a, CalibrationResult};
pub use dynamics::{profile_numeric, propagate, LineProfile, Provenance, StateAmplitudes};
pub use error::{Error, Result};
pub use experiment::{sample_profile, ExperimentConfig};
pub use fit::{DataSet, FitResult};
pub use pulse::{discretize, PulseKind, PulseSpec, SampledPulse};
pub use special::ComplexValue;
