//! The Matrix Pencil estimator.
//!
//! Noiseless samples `m_k = sum_j a_j z_j^k`, `z_j = exp(2 pi i x_j)`, give a
//! Hankel matrix whose row-shifted halves `H_up` and `H_down` form a pencil
//! `H_down - z H_up` that drops rank exactly at the `z_j`. With noise, both
//! halves are first truncated to rank `d`.

use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, least_squares, principal_arg, truncated_svd, CMatrix, CVector};
use crate::signal::{SpectralSamples, SpikeTrain};

/// Relative floor on the singular values of the truncated `H_down`.
pub const PENCIL_RANK_TOL: f64 = 1e-13;

/// The `(L+1) x (N-L)` Hankel matrix `H[i][j] = m_{i+j}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleHankel {
    matrix: CMatrix,
}

impl SampleHankel {
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// `H_up`: rows `0..L`.
    pub fn upper(&self) -> CMatrix {
        self.matrix.rows(0, self.matrix.nrows() - 1).into_owned()
    }

    /// `H_down`: rows `1..=L`.
    pub fn lower(&self) -> CMatrix {
        self.matrix.rows(1, self.matrix.nrows() - 1).into_owned()
    }
}

pub fn build_hankel(samples: &SpectralSamples, pencil_param: usize) -> Result<SampleHankel> {
    let n = samples.count();
    if pencil_param < 1 || pencil_param + 1 > n {
        return Err(Error::InvalidInput(format!(
            "pencil parameter {pencil_param} outside 1..={} for {n} samples",
            n.saturating_sub(1)
        )));
    }
    let v = &samples.values;
    let matrix = CMatrix::from_fn(pencil_param + 1, n - pencil_param, |i, j| v[i + j]);
    Ok(SampleHankel { matrix })
}

/// `ceil(N / 2)`.
pub fn default_pencil_param(n: usize) -> usize {
    n.div_ceil(2)
}

/// Output of [`mp_recover`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecoveryResult {
    /// Recovered spikes, nodes in `(-1/2, 1/2]`, ascending.
    #[serde(flatten)]
    pub estimate: SpikeTrain,
    #[serde(rename = "L")]
    pub pencil_param: usize,
    /// Leading `d` singular values of `H_up`.
    #[serde(rename = "sigma_A")]
    pub sigma_a: Vec<f64>,
    /// Leading `d` singular values of `H_down`.
    #[serde(rename = "sigma_B")]
    pub sigma_b: Vec<f64>,
    /// Generalized eigenvalues of the reduced pencil, in node order.
    #[serde(skip)]
    pub eigenvalues: Vec<Complex64>,
}

/// Matrix Pencil recovery of a `d`-spike train from `N > 2d` samples with
/// pencil parameter `d + 1 <= L <= N - d`.
pub fn mp_recover(samples: &SpectralSamples, d: usize, pencil_param: usize) -> Result<RecoveryResult> {
    let n = samples.count();
    if d == 0 || n <= 2 * d {
        return Err(Error::InvalidInput(format!("need N > 2d, got N={n}, d={d}")));
    }
    if pencil_param < d + 1 || pencil_param > n - d {
        return Err(Error::InvalidInput(format!(
            "pencil parameter {pencil_param} outside {}..={}",
            d + 1,
            n - d
        )));
    }
    let hankel = build_hankel(samples, pencil_param)?;
    let a = truncated_svd(&hankel.upper(), d)?;
    let b = truncated_svd(&hankel.lower(), d)?;

    let sigma_max = b.sigma[0];
    let sigma_min = b.sigma[d - 1];
    let threshold = PENCIL_RANK_TOL * sigma_max;
    if sigma_min.is_nan() || sigma_min <= threshold {
        return Err(Error::RankDeficiency { value: sigma_min, threshold });
    }

    // A' = U2^H U1 S1 V1^H V2, B' = S2
    let s1 = CMatrix::from_diagonal(&DVector::from_iterator(
        d,
        a.sigma.iter().map(|&s| Complex64::new(s, 0.0)),
    ));
    let a_red = b.u.adjoint() * &a.u * s1 * &a.v_h * b.v_h.adjoint();
    // B'^{-1} A' has eigenvalues 1/z_j for the pencil B' - z A'.
    let mut m = a_red;
    for (i, &s) in b.sigma.iter().enumerate() {
        m.row_mut(i).scale_mut(1.0 / s);
    }
    let inv_z = eigenvalues(m)?;
    let z: Vec<Complex64> = inv_z
        .iter()
        .map(|w| {
            if w.norm() == 0.0 {
                Err(Error::EigenFailure)
            } else {
                Ok(w.inv())
            }
        })
        .collect::<Result<_>>()?;

    let nodes: Vec<f64> = z.iter().map(|&zj| principal_arg(zj) / (2.0 * PI)).collect();
    let vandermonde = CMatrix::from_fn(n, d, |k, j| Complex64::from_polar(1.0, 2.0 * PI * nodes[j] * k as f64));
    let rhs = CVector::from_column_slice(&samples.values);
    let amps = least_squares(&vandermonde, &rhs)?;

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| nodes[i].total_cmp(&nodes[j]));
    for w in order.windows(2) {
        if nodes[w[0]] == nodes[w[1]] {
            return Err(Error::RepeatedRoots(w[0], w[1]));
        }
    }
    let estimate = SpikeTrain::new(
        order.iter().map(|&i| amps[i]).collect(),
        order.iter().map(|&i| nodes[i]).collect(),
    )?;
    Ok(RecoveryResult {
        estimate,
        pencil_param,
        sigma_a: a.sigma,
        sigma_b: b.sigma,
        eigenvalues: order.iter().map(|&i| z[i]).collect(),
    })
}

/// Distance on the unit torus, `min_n |x - y - n|`.
pub fn circular_distance(x: f64, y: f64) -> f64 {
    let t = (x - y).rem_euclid(1.0);
    t.min(1.0 - t)
}

/// Wraps `x` into `(-1/2, 1/2]`.
pub fn wrap_node(x: f64) -> f64 {
    let t = x - x.round();
    if t <= -0.5 {
        t + 1.0
    } else {
        t
    }
}
