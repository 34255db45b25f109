//! Small dense complex linear algebra on top of `nalgebra`.

use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

const SCHUR_EPS: f64 = 1e-15;
const SCHUR_MAX_ITER: usize = 10_000;

/// Principal argument in `(-pi, pi]`.
pub fn principal_arg(z: Complex64) -> f64 {
    let a = z.arg();
    if a <= -std::f64::consts::PI {
        std::f64::consts::PI
    } else {
        a
    }
}

/// Eigenvalues of a square complex matrix via the complex Schur form.
pub fn eigenvalues(m: CMatrix) -> Result<Vec<Complex64>> {
    assert!(m.is_square(), "eigenvalues of a non-square matrix");
    if m.nrows() == 1 {
        return Ok(vec![m[(0, 0)]]);
    }
    let schur = Schur::try_new(m, SCHUR_EPS, SCHUR_MAX_ITER).ok_or(Error::EigenFailure)?;
    let ev = schur.eigenvalues().ok_or(Error::EigenFailure)?;
    if ev.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::EigenFailure);
    }
    Ok(ev.iter().copied().collect())
}

/// Companion matrix of the monic polynomial `z^n + c[n-1] z^{n-1} + ... + c[0]`,
/// given the lower coefficients in ascending order.
pub fn companion(lower: &[Complex64]) -> CMatrix {
    let n = lower.len();
    let mut m = CMatrix::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for (i, c) in lower.iter().enumerate() {
        m[(i, n - 1)] = -c;
    }
    m
}

/// Roots of the polynomial with ascending coefficients `coeffs`, computed as
/// eigenvalues of the companion matrix. The leading coefficient must be
/// nonzero.
pub fn polynomial_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = coeffs.len().checked_sub(1).ok_or_else(|| {
        Error::InvalidInput("polynomial needs at least one coefficient".into())
    })?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let lead = coeffs[n];
    if lead.norm() == 0.0 {
        return Err(Error::InvalidInput("leading coefficient is zero".into()));
    }
    let lower: Vec<Complex64> = coeffs[..n].iter().map(|c| c / lead).collect();
    eigenvalues(companion(&lower))
}

/// Ascending coefficients of the monic polynomial with the given roots.
pub fn poly_from_roots(roots: &[Complex64]) -> Vec<Complex64> {
    let mut c = vec![Complex64::new(1.0, 0.0)];
    for &r in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
        for (i, &ci) in c.iter().enumerate() {
            next[i + 1] += ci;
            next[i] -= ci * r;
        }
        c = next;
    }
    c
}

/// Thin singular value decomposition `m = u diag(sigma) v_h` with `sigma`
/// in descending order.
pub struct Svd {
    pub u: CMatrix,
    pub sigma: Vec<f64>,
    pub v_h: CMatrix,
}

pub fn svd(m: &CMatrix) -> Result<Svd> {
    let f = faer::Mat::<Complex64>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)]);
    let dec = f.thin_svd().map_err(|_| Error::EigenFailure)?;
    let (u, s, v) = (dec.U(), dec.S().column_vector(), dec.V());
    let k = s.nrows();
    let sigma: Vec<f64> = (0..k).map(|i| s[i].re).collect();
    if sigma.iter().any(|x| !x.is_finite()) {
        return Err(Error::EigenFailure);
    }
    Ok(Svd {
        u: CMatrix::from_fn(m.nrows(), k, |i, j| u[(i, j)]),
        sigma,
        v_h: CMatrix::from_fn(k, m.ncols(), |i, j| v[(j, i)].conj()),
    })
}

/// Minimum-norm least squares solution of `a x = b`.
pub fn least_squares(a: &CMatrix, b: &CVector) -> Result<CVector> {
    let Svd { u, sigma, v_h } = svd(a)?;
    let smax = sigma.first().copied().unwrap_or(0.0);
    let cutoff = f64::EPSILON * smax * a.nrows().max(a.ncols()) as f64;
    let mut coef = u.adjoint() * b;
    for (c, &s) in coef.iter_mut().zip(&sigma) {
        *c = if s > cutoff { *c / s } else { Complex64::new(0.0, 0.0) };
    }
    Ok(v_h.adjoint() * coef)
}

/// Singular values in descending order together with the leading `rank`
/// left vectors, the singular values, and the leading `rank` rows of `V^H`.
pub struct TruncatedSvd {
    pub u: CMatrix,
    pub sigma: Vec<f64>,
    pub v_h: CMatrix,
    pub all_sigma: Vec<f64>,
}

pub fn truncated_svd(m: &CMatrix, rank: usize) -> Result<TruncatedSvd> {
    let k = m.nrows().min(m.ncols());
    if rank > k {
        return Err(Error::InvalidInput(format!(
            "rank {rank} exceeds matrix dimension {k}"
        )));
    }
    let full = svd(m)?;
    Ok(TruncatedSvd {
        u: full.u.columns(0, rank).into_owned(),
        sigma: full.sigma[..rank].to_vec(),
        v_h: full.v_h.rows(0, rank).into_owned(),
        all_sigma: full.sigma,
    })
}

/// Induced 1-norm (maximum absolute column sum).
pub fn norm_1(m: &CMatrix) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}
