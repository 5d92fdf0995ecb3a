//! Loss model and goodness-of-fit measures.

use crate::dynamics::LineProfile;
use crate::error::{Error, Result};

use super::DataSet;

/// Overfitting index above which fits are restarted.
pub const OVERFIT_THRESHOLD: f64 = 0.1;

/// P = ε₀ + (1 − ε₀ − ε₁)·P⁽⁰⁾.
pub fn apply_losses(p0: f64, eps0: f64, eps1: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p0) {
        return Err(Error::Domain(format!("ideal probability {p0} outside [0, 1]")));
    }
    if !(eps0 >= 0.0 && eps1 >= 0.0 && eps0 + eps1 < 1.0) {
        return Err(Error::Domain(format!(
            "loss parameters need ε₀, ε₁ ≥ 0 and ε₀ + ε₁ < 1, got ({eps0}, {eps1})"
        )));
    }
    Ok(losses_unchecked(p0, eps0, eps1))
}

#[inline]
pub(crate) fn losses_unchecked(p0: f64, eps0: f64, eps1: f64) -> f64 {
    eps0 + (1.0 - eps0 - eps1) * p0
}

/// R(Δᵢ) = F(Δᵢ) − P(Δᵢ).
pub fn residuals(fit_curve: &LineProfile, data: &DataSet) -> Result<Vec<f64>> {
    if fit_curve.detunings() != data.detunings() {
        return Err(Error::GridMismatch(format!(
            "fit curve has {} points, dataset has {} (or the detunings differ)",
            fit_curve.len(),
            data.len()
        )));
    }
    Ok(fit_curve
        .probabilities()
        .iter()
        .zip(data.probabilities())
        .map(|(f, p)| f - p)
        .collect())
}

/// Mean absolute residual.
pub fn mae(residuals: &[f64]) -> Result<f64> {
    if residuals.is_empty() {
        return Err(Error::InsufficientData("mean absolute error of an empty residual vector".into()));
    }
    Ok(residuals.iter().map(|r| r.abs()).sum::<f64>() / residuals.len() as f64)
}

/// MAE a correct model would reach from binomial readout alone, using the
/// normal approximation E|X/n − p| ≈ √(2/π)·√(p(1 − p)/n) at each point.
pub fn shot_noise_mae(curve: &[f64], shots: &[u32]) -> Result<f64> {
    if curve.len() != shots.len() {
        return Err(Error::GridMismatch(format!(
            "{} curve values but {} shot counts",
            curve.len(),
            shots.len()
        )));
    }
    let sigma: Vec<f64> = curve
        .iter()
        .zip(shots)
        .map(|(p, n)| {
            let p = p.clamp(0.0, 1.0);
            (2.0 / std::f64::consts::PI).sqrt() * (p * (1.0 - p) / f64::from(*n)).sqrt()
        })
        .collect();
    mae(&sigma)
}

/// Overfitting index: mean |P(Δₖ₊₁) − P(Δₖ)| of the measured values.
pub fn ofi(data: &DataSet) -> Result<f64> {
    let p = data.probabilities();
    if p.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "overfitting index needs at least 2 points, got {}",
            p.len()
        )));
    }
    Ok(p.windows(2).map(|w| (w[1] - w[0]).abs()).sum::<f64>() / (p.len() - 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::lorentzian_profile;
    use crate::dynamics::Provenance;
    use proptest::prelude::*;

    fn dataset(p: Vec<f64>) -> DataSet {
        let d = (0..p.len()).map(|i| i as f64).collect();
        DataSet::new(d, p, None).unwrap()
    }

    #[test]
    fn shot_noise_floor() {
        let sigma = (0.25f64 / 4096.0).sqrt();
        let floor = shot_noise_mae(&[0.5, 0.0, 1.0], &[4096; 3]).unwrap();
        assert!((floor - (2.0 / std::f64::consts::PI).sqrt() * sigma / 3.0).abs() < 1e-15);
        assert!(shot_noise_mae(&[0.5], &[1, 2]).is_err());
    }

    #[test]
    fn loss_endpoints_and_midpoint() {
        assert_eq!(apply_losses(0.0, 0.04, 0.06).unwrap(), 0.04);
        assert!((apply_losses(1.0, 0.04, 0.06).unwrap() - 0.94).abs() < 1e-15);
        assert!((apply_losses(0.5, 0.04, 0.06).unwrap() - 0.49).abs() < 1e-15);
    }

    #[test]
    fn loss_domain() {
        assert!(apply_losses(1.1, 0.0, 0.0).is_err());
        assert!(apply_losses(0.5, -0.01, 0.0).is_err());
        assert!(apply_losses(0.5, 0.5, 0.5).is_err());
    }

    #[test]
    fn residual_examples() {
        let data = dataset(vec![0.1, 0.5, 0.2]);
        let same = LineProfile::new(data.detunings().to_vec(), vec![0.1, 0.5, 0.2], Provenance::Numeric).unwrap();
        assert_eq!(residuals(&same, &data).unwrap(), vec![0.0; 3]);
        let shifted = LineProfile::new(data.detunings().to_vec(), vec![0.11, 0.51, 0.21], Provenance::Numeric).unwrap();
        for r in residuals(&shifted, &data).unwrap() {
            assert!((r - 0.01).abs() < 1e-15);
        }
        let other = LineProfile::new(vec![0.0, 1.0, 3.0], vec![0.1, 0.5, 0.2], Provenance::Numeric).unwrap();
        assert!(matches!(residuals(&other, &data), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn mae_examples() {
        assert_eq!(mae(&[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(mae(&[0.01, -0.01]).unwrap(), 0.01);
        assert!((mae(&[0.003, -0.006, 0.009]).unwrap() - 0.006).abs() < 1e-15);
        assert!(mae(&[]).is_err());
    }

    #[test]
    fn ofi_examples() {
        assert_eq!(ofi(&dataset(vec![0.3; 10])).unwrap(), 0.0);
        let alternating = (0..20).map(|i| (i % 2) as f64).collect();
        assert_eq!(ofi(&dataset(alternating)).unwrap(), 1.0);
        assert!(matches!(ofi(&dataset(vec![0.5])), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn ofi_of_smooth_lorentzian() {
        // 101 points over ±5 half-widths, k = 1 so the half-width is 1
        let grid: Vec<f64> = (0..101).map(|i| -5.0 + 0.1 * i as f64).collect();
        let p: Vec<f64> = grid.iter().map(|d| lorentzian_profile(0.9, 1.0, 0.03, *d)).collect();
        // independent value: the curve rises then falls monotonically, so the
        // summed steps telescope to 2·(peak − edge)
        let expected = 2.0 * (0.93 - lorentzian_profile(0.9, 1.0, 0.03, 5.0)) / 100.0;
        let got = ofi(&DataSet::new(grid, p, None).unwrap()).unwrap();
        assert!((got - expected).abs() < 1e-14);
        assert!(got < 0.05);
    }

    proptest! {
        #[test]
        fn residuals_are_elementwise_differences(values in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 1..40)) {
            let grid: Vec<f64> = (0..values.len()).map(|i| i as f64 * 0.5).collect();
            let f: Vec<f64> = values.iter().map(|v| v.0).collect();
            let p: Vec<f64> = values.iter().map(|v| v.1).collect();
            let curve = LineProfile::new(grid.clone(), f.clone(), Provenance::Numeric).unwrap();
            let data = DataSet::new(grid, p.clone(), None).unwrap();
            let r = residuals(&curve, &data).unwrap();
            for i in 0..r.len() {
                prop_assert_eq!(r[i], f[i] - p[i]);
            }
            let m = mae(&r).unwrap();
            prop_assert!(m >= 0.0);
            prop_assert_eq!(m == 0.0, f == p);
        }

        #[test]
        fn losses_are_affine_and_monotone(p in 0.0f64..1.0, q in 0.0f64..1.0, e0 in 0.0f64..0.45, e1 in 0.0f64..0.45) {
            let (lo, hi) = if p <= q { (p, q) } else { (q, p) };
            prop_assert!(apply_losses(lo, e0, e1).unwrap() <= apply_losses(hi, e0, e1).unwrap());
            let mid = apply_losses(0.5 * (p + q), e0, e1).unwrap();
            let avg = 0.5 * (apply_losses(p, e0, e1).unwrap() + apply_losses(q, e0, e1).unwrap());
            prop_assert!((mid - avg).abs() < 1e-15);
        }

        #[test]
        fn ofi_ignores_constant_offsets(values in prop::collection::vec(0.0f64..0.5, 2..50), c in 0.0f64..0.5) {
            let grid: Vec<f64> = (0..values.len()).map(|i| i as f64).collect();
            let shifted: Vec<f64> = values.iter().map(|v| v + c).collect();
            let a = ofi(&DataSet::new(grid.clone(), values, None).unwrap()).unwrap();
            let b = ofi(&DataSet::new(grid, shifted, None).unwrap()).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}
