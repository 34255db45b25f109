//! Least-squares line fits in log-log coordinates and a logistic decision
//! boundary fit.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};

/// Result of an ordinary least-squares fit `ln y = slope ln x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Standard deviation of the residuals (`n - 2` degrees of freedom).
    pub residual_std: f64,
    pub points: usize,
}

/// OLS fit of `y` against `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.len() != y.len() {
        return Err(Error::InvalidInput("x and y differ in length".into()));
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::InsufficientData { found: n, needed: 2 });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite data in fit".into()));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::DegenerateFit("all abscissae are equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    let residual_std = if n > 2 { (sse / (nf - 2.0)).sqrt() } else { 0.0 };
    Ok(LineFit {
        slope,
        intercept,
        r_squared,
        residual_std,
        points: n,
    })
}

/// OLS fit of `ln y` against `ln x`. All values must be positive.
pub fn loglog_fit(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.iter().chain(y).any(|&v| v.is_nan() || v <= 0.0) {
        return Err(Error::InvalidInput("log-log fit needs positive data".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    linear_fit(&lx, &ly)
}

/// Logistic model `P(success) = sigmoid(b0 + b1 u + b2 v)` and its
/// probability-1/2 line `v = slope u + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryFit {
    pub coefficients: [f64; 3],
    pub slope: f64,
    pub intercept: f64,
    pub points: usize,
    pub successes: usize,
}

/// Ridge penalty on the standardized non-intercept coefficients.
const LOGISTIC_RIDGE: f64 = 1e-3;

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// Fits the logistic model by Newton iterations on standardized features.
pub fn logistic_boundary(u: &[f64], v: &[f64], success: &[bool]) -> Result<BoundaryFit> {
    let n = u.len();
    if v.len() != n || success.len() != n {
        return Err(Error::InvalidInput("feature and label lengths differ".into()));
    }
    if n < 3 {
        return Err(Error::DegenerateFit(format!("{n} trials cannot determine a boundary")));
    }
    let successes = success.iter().filter(|&&s| s).count();
    if successes == 0 || successes == n {
        return Err(Error::DegenerateFit(format!(
            "all {n} trials {}",
            if successes == 0 { "failed" } else { "succeeded" }
        )));
    }
    let stats = |w: &[f64]| {
        let m = w.iter().sum::<f64>() / n as f64;
        let s = (w.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n as f64).sqrt();
        (m, if s > 0.0 { s } else { 1.0 })
    };
    let (mu, su) = stats(u);
    let (mv, sv) = stats(v);
    let x = DMatrix::from_fn(n, 3, |i, j| match j {
        0 => 1.0,
        1 => (u[i] - mu) / su,
        _ => (v[i] - mv) / sv,
    });
    let y = DVector::from_fn(n, |i, _| if success[i] { 1.0 } else { 0.0 });
    let mut beta = DVector::<f64>::zeros(3);
    let ridge = DMatrix::from_diagonal(&DVector::from_vec(vec![0.0, LOGISTIC_RIDGE, LOGISTIC_RIDGE]));
    for _ in 0..100 {
        let eta = &x * &beta;
        let p = eta.map(sigmoid);
        let w = p.map(|q| (q * (1.0 - q)).max(1e-12));
        let grad = x.transpose() * (&y - &p) - &ridge * &beta;
        let xw = DMatrix::from_fn(n, 3, |i, j| x[(i, j)] * w[i]);
        let hess = x.transpose() * xw + &ridge;
        let step = hess
            .cholesky()
            .ok_or_else(|| Error::DegenerateFit("singular logistic Hessian".into()))?
            .solve(&grad);
        beta += &step;
        if step.amax() < 1e-10 {
            break;
        }
    }
    // back to raw features
    let b1 = beta[1] / su;
    let b2 = beta[2] / sv;
    let b0 = beta[0] - b1 * mu - b2 * mv;
    if !(b2.is_finite() && b2 != 0.0 && b1.is_finite() && b0.is_finite()) {
        return Err(Error::DegenerateFit("outcome does not depend on the second feature".into()));
    }
    Ok(BoundaryFit {
        coefficients: [b0, b1, b2],
        slope: -b1 / b2,
        intercept: -b0 / b2,
        points: n,
        successes,
    })
}
