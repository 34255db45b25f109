//! The Prony map and Prony's method for the algebraic moment problem
//! `sum_j a_j w_j^k = mu_k`, `k = 0..2d`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{least_squares, polynomial_roots, principal_arg, svd, CMatrix, CVector};
use crate::serde_complex;

/// Relative singular value below which the Hankel matrix is treated as rank
/// deficient.
pub const RANK_TOL: f64 = 1e-10;
/// Relative distance below which two recovered nodes are considered equal.
/// A numerically double root splits by about `sqrt(machine eps)`.
pub const ROOT_TOL: f64 = 1e-6;

/// A solution `(a, w)` of the Prony system, nodes ordered by argument then
/// modulus.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PronySolution {
    #[serde(with = "serde_complex::vec")]
    pub amplitudes: Vec<Complex64>,
    #[serde(with = "serde_complex::vec")]
    pub nodes: Vec<Complex64>,
}

impl PronySolution {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// `PM_k(a, w) = sum_j a_j w_j^k` for `k = 0..count`.
pub fn prony_map(amplitudes: &[Complex64], nodes: &[Complex64], count: usize) -> Vec<Complex64> {
    assert_eq!(amplitudes.len(), nodes.len(), "amplitude/node length mismatch");
    let mut powers: Vec<Complex64> = amplitudes.to_vec();
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        out.push(powers.iter().sum());
        for (p, w) in powers.iter_mut().zip(nodes) {
            *p *= w;
        }
    }
    out
}

/// Monic Prony polynomial `prod_j (z - w_j)`, ascending coefficients.
pub fn prony_polynomial(nodes: &[Complex64]) -> Vec<Complex64> {
    crate::linalg::poly_from_roots(nodes)
}

/// Largest violation of the recurrence `sum_l nu_{k+l} c_l = 0` over all
/// windows of `nu`.
///
/// Panics if `nu` is shorter than the coefficient vector.
pub fn recurrence_residual(nu: &[Complex64], coeffs: &[Complex64]) -> f64 {
    assert!(
        nu.len() >= coeffs.len() && !coeffs.is_empty(),
        "sequence shorter than the recurrence"
    );
    nu.windows(coeffs.len())
        .map(|w| w.iter().zip(coeffs).map(|(v, c)| v * c).sum::<Complex64>().norm())
        .fold(0.0, f64::max)
}

/// Solves the Prony system of order `d` from the `2d` values `mu`.
///
/// The null vector of the `d x (d+1)` Hankel matrix `[mu_{i+j}]` gives the
/// Prony polynomial, its companion eigenvalues give the nodes, and the
/// amplitudes solve the `2d x d` Vandermonde system in the least squares
/// sense.
pub fn prony_solve(mu: &[Complex64], d: usize) -> Result<PronySolution> {
    if d == 0 || mu.len() != 2 * d {
        return Err(Error::InvalidInput(format!(
            "Prony system of order {d} needs {} values, got {}",
            2 * d,
            mu.len()
        )));
    }
    // Pad with a zero row so the SVD returns the full right basis.
    let padded = CMatrix::from_fn(d + 1, d + 1, |i, j| {
        if i < d {
            mu[i + j]
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let svd = svd(&padded)?;
    let top = svd.sigma[0];
    if top == 0.0 {
        return Err(Error::DegenerateSystem(d + 1));
    }
    let null_dim = 1 + svd.sigma[..d].iter().filter(|&&s| s / top < RANK_TOL).count();
    if null_dim != 1 {
        return Err(Error::DegenerateSystem(null_dim));
    }
    let coeffs: Vec<Complex64> = (0..=d).map(|j| svd.v_h[(d, j)].conj()).collect();
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if coeffs[d].norm() <= RANK_TOL * scale {
        return Err(Error::DegenerateSystem(null_dim));
    }

    let roots = polynomial_roots(&coeffs)?;
    let reach = roots.iter().map(|z| z.norm()).fold(1.0, f64::max);
    for i in 0..d {
        for j in i + 1..d {
            if (roots[i] - roots[j]).norm() <= ROOT_TOL * reach {
                return Err(Error::RepeatedRoots(i, j));
            }
        }
    }

    let vandermonde = CMatrix::from_fn(2 * d, d, |k, j| roots[j].powu(k as u32));
    let rhs = CVector::from_column_slice(mu);
    let amps = least_squares(&vandermonde, &rhs)?;

    let mut pairs: Vec<(Complex64, Complex64)> =
        amps.iter().copied().zip(roots.iter().copied()).collect();
    pairs.sort_by(|a, b| {
        principal_arg(a.1)
            .total_cmp(&principal_arg(b.1))
            .then(a.1.norm().total_cmp(&b.1.norm()))
    });
    let (amplitudes, nodes) = pairs.into_iter().unzip();
    Ok(PronySolution { amplitudes, nodes })
}
