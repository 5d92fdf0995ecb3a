//! Levenberg–Marquardt with a central-difference Jacobian.
//!
//! Parameters are scaled by user-supplied typical magnitudes before the
//! damped normal equations are solved, so quantities differing by many
//! orders of magnitude (detunings in rad/s next to dimensionless losses)
//! are handled uniformly.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub const MAX_ITERATIONS: usize = 500;
pub const STEP_TOLERANCE: f64 = 1e-8;
pub const COST_TOLERANCE: f64 = 1e-12;
/// Relative finite-difference step per parameter.
pub const JACOBIAN_STEP: f64 = 1e-6;

const LAMBDA_INITIAL: f64 = 1e-3;
const LAMBDA_MAX: f64 = 1e12;

#[derive(Debug, Clone)]
pub struct LmOutcome {
    pub params: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Cost after every accepted step, starting with the initial cost.
    pub cost_history: Vec<f64>,
}

/// Minimizes ½Σ rᵢ(x)² starting from `x0`.
///
/// `scales` holds a typical magnitude for each parameter; it sets both the
/// internal scaling and the floor of the finite-difference step.
pub fn minimize<F>(residual: F, x0: &[f64], scales: &[f64]) -> Result<LmOutcome>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let n = x0.len();
    assert_eq!(n, scales.len(), "one scale per parameter");
    let mut x = x0.to_vec();
    let mut r = residual(&x)?;
    let mut cost = sum_sq(&r);
    let mut jac = jacobian(&residual, &x, scales, r.len())?;
    let mut lambda = LAMBDA_INITIAL;
    let mut history = vec![cost];
    let mut converged = cost == 0.0;
    let mut iterations = 0;

    while !converged && iterations < MAX_ITERATIONS {
        iterations += 1;
        // scaled Jacobian: J·S, S = diag(scales)
        let js = DMatrix::from_fn(jac.nrows(), n, |i, j| jac[(i, j)] * scales[j]);
        let jtj = js.transpose() * &js;
        let rv = DVector::from_column_slice(&r);
        let grad = js.transpose() * rv;
        let diag_floor = jtj.diagonal().max() * 1e-12 + f64::MIN_POSITIVE;

        let mut accepted = false;
        while lambda <= LAMBDA_MAX {
            let mut damped = jtj.clone();
            for i in 0..n {
                damped[(i, i)] += lambda * jtj[(i, i)].max(diag_floor);
            }
            let Some(step) = damped.lu().solve(&(-&grad)) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = (0..n).map(|i| x[i] + step[i] * scales[i]).collect();
            let trial_r = residual(&trial)?;
            let trial_cost = sum_sq(&trial_r);
            if trial_cost.is_finite() && trial_cost <= cost {
                let scaled_norm = step.norm();
                let scaled_x: f64 = (0..n).map(|i| (x[i] / scales[i]).powi(2)).sum::<f64>().sqrt();
                let rel_step = scaled_norm / (scaled_x + STEP_TOLERANCE);
                let rel_cost = if cost > 0.0 { (cost - trial_cost) / cost } else { 0.0 };
                x = trial;
                r = trial_r;
                cost = trial_cost;
                history.push(cost);
                lambda = (lambda / 3.0).max(1e-12);
                accepted = true;
                if rel_step < STEP_TOLERANCE || rel_cost < COST_TOLERANCE || cost == 0.0 {
                    converged = true;
                }
                break;
            }
            lambda *= 4.0;
        }
        if !accepted {
            // no descent direction left at working precision
            converged = true;
        }
        if !converged || accepted {
            jac = jacobian(&residual, &x, scales, r.len())?;
        }
    }

    Ok(LmOutcome {
        params: x,
        iterations,
        converged,
        cost_history: history,
    })
}

fn sum_sq(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

pub(crate) fn jacobian<F>(residual: &F, x: &[f64], scales: &[f64], rows: usize) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let n = x.len();
    let mut jac = DMatrix::zeros(rows, n);
    let mut probe = x.to_vec();
    for j in 0..n {
        let h = JACOBIAN_STEP * (x[j].abs() + scales[j]);
        probe[j] = x[j] + h;
        let plus = residual(&probe)?;
        probe[j] = x[j] - h;
        let minus = residual(&probe)?;
        probe[j] = x[j];
        if plus.len() != rows || minus.len() != rows {
            return Err(Error::DegenerateFit("residual length changed between evaluations".into()));
        }
        for i in 0..rows {
            jac[(i, j)] = (plus[i] - minus[i]) / (2.0 * h);
        }
    }
    Ok(jac)
}

/// (JᵀJ)⁻¹·s² with s² = Σr²/(N − p) for an N×p Jacobian and its residuals.
pub fn covariance(j: &DMatrix<f64>, residuals: &[f64]) -> Result<DMatrix<f64>> {
    let (rows, p) = (j.nrows(), j.ncols());
    if rows <= p {
        return Err(Error::InsufficientData(format!(
            "{rows} points cannot constrain {p} parameters"
        )));
    }
    let ssr: f64 = residuals[..rows].iter().map(|r| r * r).sum();
    let s2 = ssr / (rows - p) as f64;
    let jtj = j.transpose() * j;
    // invert in a diagonally normalized basis to keep the conditioning sane
    let d: Vec<f64> = (0..p).map(|i| jtj[(i, i)].sqrt()).collect();
    if d.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::DegenerateFit("a parameter does not affect the residuals".into()));
    }
    let normalized = DMatrix::from_fn(p, p, |a, b| jtj[(a, b)] / (d[a] * d[b]));
    let inv = normalized
        .cholesky()
        .ok_or_else(|| Error::DegenerateFit("JᵀJ is singular".into()))?
        .inverse();
    let cov = DMatrix::from_fn(p, p, |a, b| s2 * inv[(a, b)] / (d[a] * d[b]));
    if cov.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateFit("covariance is not finite".into()));
    }
    Ok(cov)
}
