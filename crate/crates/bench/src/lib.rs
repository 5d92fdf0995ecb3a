//! Fixtures shared by the criterion benchmarks.

use std::f64::consts::PI;

use lineshape::dynamics::symmetric_grid;
use lineshape::units::mhz_to_angular;
use lineshape::{PulseKind, PulseSpec};

pub const TAU: f64 = 21.33e-9;

/// π-area pulse truncated at 0.1% of its peak.
pub fn pi_pulse(kind: PulseKind) -> PulseSpec {
    PulseSpec::with_cutoff_and_area(kind, TAU, 1e-3, PI).expect("valid benchmark pulse")
}

/// 101 points over ±40 MHz.
pub fn sweep() -> Vec<f64> {
    symmetric_grid(0.0, mhz_to_angular(40.0), 101).expect("valid benchmark grid")
}
