//! The worst-case perturbation: a signal whose cluster shares the first
//! `2p - 1` centered moments with the original cluster and differs from it by
//! exactly `epsilon` in moment `2p - 1`.
//!
//! Such a signal is spectrally `O(epsilon)`-close to `F` on `[-Omega, Omega]`
//! while its cluster nodes move by `~ epsilon h^{2-2p}` and its amplitudes by
//! `~ epsilon h^{1-2p}`, which is what makes the stability bounds sharp.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fit::{loglog_fit, LineFit};
use crate::prony::prony_solve;
use crate::serde_complex;
use crate::signal::{make_clustered_nodes, ClusterGeometry, SpikeTrain};

/// Perturbed nodes whose normalized imaginary part is below this are
/// treated as real.
pub const IMAG_TOL: f64 = 1e-9;

/// Number of equispaced frequencies used for the spectral deviation.
pub const SPECTRAL_GRID_POINTS: usize = 1001;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorstCaseReport {
    pub perturbed: SpikeTrain,
    pub epsilon: f64,
    /// Cluster center `mu`.
    pub center: f64,
    /// Centered moments `0..2p` of the original cluster.
    #[serde(with = "serde_complex::vec")]
    pub moments: Vec<Complex64>,
    /// Centered moments `0..2p` of the perturbed cluster.
    #[serde(with = "serde_complex::vec")]
    pub perturbed_moments: Vec<Complex64>,
    /// Largest deviation over moments `0..=2p-2`.
    pub moment_match_error: f64,
    /// Real part of the change in moment `2p - 1`.
    pub last_moment_delta: f64,
    pub node_displacement: f64,
    pub amplitude_displacement: f64,
    /// Largest spectral deviation on `[-Omega, Omega]`.
    pub spectral_deviation: f64,
    pub omega: f64,
}

fn check_cluster_input(f: &SpikeTrain, geometry: &ClusterGeometry) -> Result<()> {
    geometry.validate()?;
    if f.len() != geometry.d {
        return Err(Error::InvalidInput(format!(
            "signal has {} spikes, geometry expects d = {}",
            f.len(),
            geometry.d
        )));
    }
    Ok(())
}

fn centered_moments(amplitudes: &[Complex64], nodes: &[f64], center: f64, count: usize) -> Vec<Complex64> {
    (0..count)
        .map(|k| {
            amplitudes
                .iter()
                .zip(nodes)
                .map(|(a, x)| a * (x - center).powi(k as i32))
                .sum()
        })
        .collect()
}

/// Builds the worst-case perturbation of the cluster of `f`.
///
/// The cluster is centered at `mu = (x_kappa + x_{kappa+p-1})/2` and
/// normalized by its half-width before solving the perturbed Prony system, so
/// the solve is well scaled for any cluster size. The spectral deviation is
/// measured on [`SPECTRAL_GRID_POINTS`] frequencies in `[-omega, omega]`.
pub fn worst_case_signal(
    f: &SpikeTrain,
    geometry: &ClusterGeometry,
    epsilon: f64,
    omega: f64,
) -> Result<WorstCaseReport> {
    check_cluster_input(f, geometry)?;
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidInput(format!("epsilon must be non-negative, got {epsilon}")));
    }
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::InvalidInput(format!("Omega must be positive, got {omega}")));
    }
    let p = geometry.p;
    let range = geometry.cluster_range();
    let xs = &f.nodes()[range.clone()];
    let amps = &f.amplitudes()[range.clone()];
    let center = 0.5 * (xs[0] + xs[p - 1]);
    let radius = 0.5 * (xs[p - 1] - xs[0]);
    let moments = centered_moments(amps, xs, center, 2 * p);

    let perturbed = if epsilon == 0.0 {
        f.clone()
    } else {
        let mut g: Vec<Complex64> = centered_moments(amps, &xs.iter().map(|x| (x - center) / radius).collect::<Vec<_>>(), 0.0, 2 * p);
        g[2 * p - 1] += epsilon / radius.powi(2 * p as i32 - 1);
        let sol = prony_solve(&g, p).map_err(|e| Error::EpsilonTooLarge(format!("perturbed Prony system: {e}")))?;
        let mut cluster: Vec<(Complex64, f64)> = Vec::with_capacity(p);
        for (a, z) in sol.amplitudes.iter().zip(&sol.nodes) {
            if z.im.abs() > IMAG_TOL {
                return Err(Error::EpsilonTooLarge(format!(
                    "perturbed node {z} is not real"
                )));
            }
            cluster.push((*a, center + radius * z.re));
        }
        cluster.sort_by(|u, v| u.1.total_cmp(&v.1));
        let mut amplitudes = f.amplitudes().to_vec();
        let mut nodes = f.nodes().to_vec();
        for (k, (a, y)) in range.clone().zip(cluster) {
            amplitudes[k] = a;
            nodes[k] = y;
        }
        SpikeTrain::new(amplitudes, nodes)
            .map_err(|e| Error::EpsilonTooLarge(format!("perturbed nodes collide: {e}")))?
    };

    let ys = &perturbed.nodes()[range.clone()];
    let bs = &perturbed.amplitudes()[range];
    let perturbed_moments = centered_moments(bs, ys, center, 2 * p);
    let moment_match_error = moments[..2 * p - 1]
        .iter()
        .zip(&perturbed_moments)
        .map(|(u, v)| (u - v).norm())
        .fold(0.0, f64::max);
    let last_moment_delta = (perturbed_moments[2 * p - 1] - moments[2 * p - 1]).re;
    let node_displacement = xs.iter().zip(ys).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let amplitude_displacement = amps.iter().zip(bs).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let spectral_deviation = verify_spectral_deviation(f, &perturbed, omega, SPECTRAL_GRID_POINTS)?;

    Ok(WorstCaseReport {
        perturbed,
        epsilon,
        center,
        moments,
        perturbed_moments,
        moment_match_error,
        last_moment_delta,
        node_displacement,
        amplitude_displacement,
        spectral_deviation,
        omega,
    })
}

/// `max |F_eps^(s) - F^(s)|` over `grid_points` equispaced `s` in
/// `[-omega, omega]`.
pub fn verify_spectral_deviation(f: &SpikeTrain, f_eps: &SpikeTrain, omega: f64, grid_points: usize) -> Result<f64> {
    if grid_points < 2 {
        return Err(Error::InvalidInput("spectral grid needs at least 2 points".into()));
    }
    let step = 2.0 * omega / (grid_points - 1) as f64;
    Ok((0..grid_points)
        .map(|i| {
            let s = -omega + i as f64 * step;
            (f_eps.fourier_at(s) - f.fourier_at(s)).norm()
        })
        .fold(0.0, f64::max))
}

/// One row of [`displacement_scaling_probe`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbeRow {
    pub h: f64,
    pub srf: f64,
    pub epsilon: f64,
    /// Node displacement in the original coordinates.
    pub node_displacement: f64,
    pub amplitude_displacement: f64,
    /// `node_displacement * Omega / epsilon`.
    pub node_factor: f64,
    /// `amplitude_displacement / epsilon`.
    pub amplitude_factor: f64,
    pub spectral_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    pub p: usize,
    pub d: usize,
    pub omega: f64,
    pub c: f64,
    pub rows: Vec<ProbeRow>,
    /// Log-log slope of `node_factor` against SRF (absent for one row).
    pub node_fit: Option<LineFit>,
    pub amplitude_fit: Option<LineFit>,
}

/// Runs the worst-case construction over a range of cluster sizes.
///
/// For each `h` the layout of [`make_clustered_nodes`] with amplitudes
/// `(1, -1, 1, ...)` is blown up by `omega`, perturbed with
/// `epsilon = c (Omega tau h)^{2p-1}` and mapped back. The factors
/// `node_disp * Omega / epsilon` and `amp_disp / epsilon` then grow like
/// `SRF^{2p-2}` and `SRF^{2p-1}`.
pub fn displacement_scaling_probe(p: usize, d: usize, h_values: &[f64], omega: f64, c: f64) -> Result<ProbeReport> {
    if h_values.is_empty() {
        return Err(Error::InvalidInput("no cluster sizes given".into()));
    }
    if c.is_nan() || c <= 0.0 {
        return Err(Error::InvalidInput(format!("epsilon constant must be positive, got {c}")));
    }
    let rows = h_values
        .par_iter()
        .map(|&h| {
            let geometry = ClusterGeometry::experiment_layout(p, d, h)?;
            let nodes = make_clustered_nodes(p, d, h)?;
            let amps: Vec<f64> = (0..d).map(|j| if j % 2 == 0 { 1.0 } else { -1.0 }).collect();
            let f = SpikeTrain::from_real(&amps, nodes)?;
            let gap = geometry.min_cluster_gap();
            let epsilon = c * (omega * gap).powi(2 * p as i32 - 1);
            let blown = f.scale(1.0 / omega)?;
            let report = worst_case_signal(&blown, &geometry.scaled(1.0 / omega), epsilon, 1.0)?;
            let node_displacement = report.node_displacement / omega;
            Ok(ProbeRow {
                h,
                srf: 1.0 / (omega * gap),
                epsilon,
                node_displacement,
                amplitude_displacement: report.amplitude_displacement,
                node_factor: node_displacement * omega / epsilon,
                amplitude_factor: report.amplitude_displacement / epsilon,
                spectral_deviation: report.spectral_deviation,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (node_fit, amplitude_fit) = if rows.len() >= 2 {
        let srf: Vec<f64> = rows.iter().map(|r| r.srf).collect();
        let nf: Vec<f64> = rows.iter().map(|r| r.node_factor).collect();
        let af: Vec<f64> = rows.iter().map(|r| r.amplitude_factor).collect();
        (Some(loglog_fit(&srf, &nf)?), Some(loglog_fit(&srf, &af)?))
    } else {
        (None, None)
    };
    Ok(ProbeReport {
        p,
        d,
        omega,
        c,
        rows,
        node_fit,
        amplitude_fit,
    })
}

/// The symmetric two-spike cluster `a = (1, -1)` at `(-h/2, h/2)`.
pub fn symmetric_pair(h: f64) -> Result<(SpikeTrain, ClusterGeometry)> {
    let f = SpikeTrain::from_real(&[1.0, -1.0], vec![-h / 2.0, h / 2.0])?;
    let g = ClusterGeometry::new(2, 2, h, h.max(PI), 1.0, 1.0, 1)?;
    Ok((f, g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_epsilon_is_identity() {
        let (f, g) = symmetric_pair(0.1).unwrap();
        let r = worst_case_signal(&f, &g, 0.0, 2.0).unwrap();
        assert_eq!(r.perturbed, f);
        assert_eq!(r.node_displacement, 0.0);
        assert_eq!(r.spectral_deviation, 0.0);
    }

    #[test]
    fn pair_matches_moments() {
        let (f, g) = symmetric_pair(0.1).unwrap();
        let eps = 1e-7;
        let r = worst_case_signal(&f, &g, eps, 2.0).unwrap();
        assert!(r.moment_match_error < 1e-8 * r.moments.iter().map(|m| m.norm()).fold(1.0, f64::max));
        assert!((r.last_moment_delta - eps).abs() < 1e-8 * eps, "{}", r.last_moment_delta);
        assert!(r.perturbed.nodes().iter().all(|x| x.is_finite()));
        assert!(r.node_displacement > 0.0);
    }

    #[test]
    fn displacement_is_linear_in_epsilon() {
        let (f, g) = symmetric_pair(0.05).unwrap();
        let eps = [1e-8, 1e-7, 1e-6, 1e-5];
        let disp: Vec<f64> = eps
            .iter()
            .map(|&e| worst_case_signal(&f, &g, e, 2.0).unwrap().node_displacement)
            .collect();
        let fit = loglog_fit(&eps, &disp).unwrap();
        assert!((fit.slope - 1.0).abs() < 0.05, "slope {}", fit.slope);
    }

    #[test]
    fn non_cluster_part_untouched() {
        let nodes = make_clustered_nodes(2, 4, 0.05).unwrap();
        let f = SpikeTrain::from_real(&[1.0, -1.0, 1.0, -1.0], nodes).unwrap();
        let g = ClusterGeometry::experiment_layout(2, 4, 0.05).unwrap();
        let r = worst_case_signal(&f, &g, 1e-8, 1.0).unwrap();
        for j in 2..4 {
            assert_eq!(r.perturbed.nodes()[j].to_bits(), f.nodes()[j].to_bits());
            assert_eq!(r.perturbed.amplitudes()[j], f.amplitudes()[j]);
        }
        assert_ne!(r.perturbed.nodes()[0], f.nodes()[0]);
    }

    #[test]
    fn huge_epsilon_is_rejected() {
        let (f, g) = symmetric_pair(0.1).unwrap();
        assert!(matches!(worst_case_signal(&f, &g, 1.0, 1.0), Err(Error::EpsilonTooLarge(_))));
    }

    #[test]
    fn spectral_deviation_of_shift() {
        // phases align at s = Omega, where |F^| = sum |a_j|
        let f = SpikeTrain::from_real(&[1.0, 2.0], vec![0.0, 1.0 / 3.0]).unwrap();
        let delta = 1e-7;
        let omega = 3.0;
        let dev = verify_spectral_deviation(&f, &f.shift(delta), omega, 1001).unwrap();
        assert_abs_diff_eq!(dev, 2.0 * PI * omega * delta * 3.0, epsilon = 1e-3 * dev);
        assert_eq!(verify_spectral_deviation(&f, &f, omega, 2).unwrap(), 0.0);
        assert!(verify_spectral_deviation(&f, &f, omega, 1).is_err());
    }

    #[test]
    fn probe_single_row_has_no_fit() {
        let r = displacement_scaling_probe(2, 3, &[0.1], 4.0, 1e-3).unwrap();
        assert_eq!(r.rows.len(), 1);
        assert!(r.node_fit.is_none() && r.amplitude_fit.is_none());
    }

    #[test]
    fn probe_slopes() {
        for p in [2usize, 3] {
            let hs: Vec<f64> = (0..8).map(|i| 0.2 * 0.6f64.powi(i)).collect();
            let r = displacement_scaling_probe(p, p + 1, &hs, 2.0, 1e-3).unwrap();
            let nf = r.node_fit.unwrap().slope;
            let af = r.amplitude_fit.unwrap().slope;
            let want = (2 * p - 2) as f64;
            assert!((nf - want).abs() < 0.3, "p={p} node slope {nf}");
            assert!((af - want - 1.0).abs() < 0.3, "p={p} amplitude slope {af}");
        }
    }
}
