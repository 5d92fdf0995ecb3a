//! Shot-noise experiment simulator standing in for the hardware backend.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{profile_numeric, symmetric_grid, LineProfile};
use crate::error::{Error, Result};
use crate::fit::{apply_losses, DataSet};
use crate::pulse::PulseSpec;
use crate::units::{hz_to_angular, parse_frequency_hz, BACKEND_DT, DEFAULT_SHOTS};

/// Detuning sweep in ordinary frequency. `span_hz` is the full width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    #[serde(default)]
    pub center_hz: f64,
    pub span_hz: f64,
    pub points: usize,
}

impl GridSpec {
    /// 101 points over ±40 MHz.
    pub const DEFAULT: GridSpec = GridSpec {
        center_hz: 0.0,
        span_hz: 80.0e6,
        points: 101,
    };

    /// Detunings in rad/s.
    pub fn detunings(&self) -> Result<Vec<f64>> {
        if self.points < 2 {
            return Err(Error::InvalidParameter {
                name: "points",
                reason: format!("need at least 2 grid points, got {}", self.points),
            });
        }
        symmetric_grid(hz_to_angular(self.center_hz), hz_to_angular(0.5 * self.span_hz), self.points)
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// Accepts `±40MHz:101` (also `+-40MHz:101`), optionally centred with
/// `±40MHz@1.5MHz:101`, or `LO:HI:N` such as `-10MHz:30MHz:81`. Bare
/// numbers are MHz.
impl FromStr for GridSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| Error::Parse(format!("grid `{s}`: {why} (expected ±SPAN:N or LO:HI:N)"));
        let text = s.trim();
        let (head, count) = text.rsplit_once(':').ok_or_else(|| bad("missing point count"))?;
        let points: usize = count.trim().parse().map_err(|_| bad("point count is not an integer"))?;
        let symmetric = head.strip_prefix('±').or_else(|| head.strip_prefix("+-"));
        let spec = if let Some(rest) = symmetric {
            let (half, center) = match rest.split_once('@') {
                Some((h, c)) => (parse_frequency_hz(h)?, parse_frequency_hz(c)?),
                None => (parse_frequency_hz(rest)?, 0.0),
            };
            GridSpec {
                center_hz: center,
                span_hz: 2.0 * half,
                points,
            }
        } else {
            let (lo, hi) = head.split_once(':').ok_or_else(|| bad("need both ends"))?;
            let (lo, hi) = (parse_frequency_hz(lo)?, parse_frequency_hz(hi)?);
            GridSpec {
                center_hz: 0.5 * (lo + hi),
                span_hz: hi - lo,
                points,
            }
        };
        if !(spec.span_hz > 0.0) {
            return Err(bad("span must be positive"));
        }
        spec.detunings()?;
        Ok(spec)
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mhz = |hz: f64| hz * 1e-6;
        if self.center_hz == 0.0 {
            write!(f, "±{}MHz:{}", mhz(0.5 * self.span_hz), self.points)
        } else {
            write!(f, "±{}MHz@{}MHz:{}", mhz(0.5 * self.span_hz), mhz(self.center_hz), self.points)
        }
    }
}

fn default_shots() -> u32 {
    DEFAULT_SHOTS
}

fn default_dt() -> f64 {
    BACKEND_DT
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub pulse: PulseSpec,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default = "default_shots")]
    pub shots: u32,
    #[serde(default)]
    pub eps0: f64,
    #[serde(default)]
    pub eps1: f64,
    /// True resonance offset, Hz.
    #[serde(default)]
    pub delta0_hz: f64,
    #[serde(default)]
    pub seed: u64,
    /// Propagator step, s.
    #[serde(default = "default_dt")]
    pub dt: f64,
}

impl ExperimentConfig {
    pub fn new(pulse: PulseSpec) -> Self {
        ExperimentConfig {
            pulse,
            grid: GridSpec::DEFAULT,
            shots: DEFAULT_SHOTS,
            eps0: 0.0,
            eps1: 0.0,
            delta0_hz: 0.0,
            seed: 0,
            dt: BACKEND_DT,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.shots == 0 {
            return Err(Error::InvalidParameter {
                name: "shots",
                reason: "must be at least 1".into(),
            });
        }
        if !(self.grid.span_hz.is_finite() && self.grid.span_hz > 0.0) {
            return Err(Error::InvalidParameter {
                name: "span_hz",
                reason: format!("must be finite and > 0, got {}", self.grid.span_hz),
            });
        }
        if !self.delta0_hz.is_finite() || !self.grid.center_hz.is_finite() {
            return Err(Error::InvalidParameter {
                name: "delta0_hz",
                reason: "offsets must be finite".into(),
            });
        }
        // reuses the loss-model domain check
        apply_losses(0.0, self.eps0, self.eps1)?;
        self.grid.detunings()?;
        Ok(())
    }
}

/// Noise-free loss-corrected probabilities on the configured grid: the
/// numerical reference at Δ − Δ₀ passed through the loss model.
pub fn ideal_profile(config: &ExperimentConfig) -> Result<LineProfile> {
    config.validate()?;
    let grid = config.grid.detunings()?;
    let shift = hz_to_angular(config.delta0_hz);
    let shifted: Vec<f64> = grid.iter().map(|d| d - shift).collect();
    let reference = profile_numeric(&config.pulse, &shifted, config.dt)?;
    let p = reference
        .probabilities()
        .iter()
        .map(|p| apply_losses(*p, config.eps0, config.eps1))
        .collect::<Result<Vec<_>>>()?;
    LineProfile::new(grid, p, reference.provenance())
}

/// Draws a shot-sampled dataset from the configuration.
pub fn sample_profile(config: &ExperimentConfig) -> Result<DataSet> {
    let ideal = ideal_profile(config)?;
    sample_from(&ideal, config.shots, config.seed)
}

/// Binomial readout of precomputed probabilities. The stream for point `i`
/// is ChaCha8 keyed by `seed` on stream `i`, so results do not depend on
/// evaluation order.
pub fn sample_from(ideal: &LineProfile, shots: u32, seed: u64) -> Result<DataSet> {
    if shots == 0 {
        return Err(Error::InvalidParameter {
            name: "shots",
            reason: "must be at least 1".into(),
        });
    }
    let n = f64::from(shots);
    let probabilities = ideal
        .probabilities()
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let mut rng = point_rng(seed, i as u64);
            let dist = Binomial::new(u64::from(shots), p.clamp(0.0, 1.0))
                .map_err(|e| Error::Domain(format!("binomial with p = {p}: {e}")))?;
            Ok(dist.sample(&mut rng) as f64 / n)
        })
        .collect::<Result<Vec<_>>>()?;
    DataSet::new(
        ideal.detunings().to_vec(),
        probabilities,
        Some(vec![shots; ideal.len()]),
    )
}

fn point_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
