//! Complex Gamma and complex-order Bessel functions of the first kind.
//!
//! Only the region needed by the exponential-pulse solution is supported:
//! orders near `±(1 + iδ)/2` and small positive real arguments.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexValue = Complex64;

/// Hard cap on series terms before reporting a convergence failure.
pub const BESSEL_MAX_TERMS: usize = 200;

/// Relative size at which a series term is considered negligible.
pub const BESSEL_REL_TOL: f64 = 1e-16;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn require_finite_complex(name: &'static str, z: Complex64) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must have finite components, got {z}"),
        })
    }
}

/// Γ(z) for complex `z`: Lanczos (g = 7, n = 9) with reflection for Re z < ½.
pub fn complex_gamma(z: Complex64) -> Result<Complex64> {
    require_finite_complex("z", z)?;
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round() {
        return Err(Error::GammaPole(z.re));
    }
    Ok(gamma_unchecked(z))
}

fn gamma_unchecked(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        let pi = Complex64::new(PI, 0.0);
        pi / ((pi * z).sin() * gamma_unchecked(1.0 - z))
    } else {
        let z = z - 1.0;
        let mut acc = Complex64::new(LANCZOS_COEFFS[0], 0.0);
        for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
            acc += *c / (z + i as f64);
        }
        let t = z + LANCZOS_G + 0.5;
        (2.0 * PI).sqrt() * t.powc(z + 0.5) * (-t).exp() * acc
    }
}

/// J_ν(x) for complex order and real `x > 0` by the ascending series
/// Σ (−1)ᵏ (x/2)^(ν+2k) / (k! Γ(ν+k+1)).
pub fn bessel_j_complex_order(nu: Complex64, x: f64) -> Result<Complex64> {
    require_finite_complex("nu", nu)?;
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::InvalidParameter {
            name: "x",
            reason: format!("must be finite and > 0, got {x}"),
        });
    }
    let half = 0.5 * x;
    let leading = (nu * half.ln()).exp() / complex_gamma(nu + 1.0)?;
    let ratio = -half * half;
    let mut term = leading;
    let mut sum = leading;
    for k in 1..BESSEL_MAX_TERMS {
        term *= ratio / (k as f64 * (nu + k as f64));
        sum += term;
        if term.norm() < BESSEL_REL_TOL * sum.norm() {
            return Ok(sum);
        }
    }
    Err(Error::BesselConvergence {
        terms: BESSEL_MAX_TERMS,
        order: nu.to_string(),
        x,
    })
}
