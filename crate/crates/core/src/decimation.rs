//! Decimation analysis: angular separation of the mapped nodes
//! `z_j(lambda) = exp(2 pi i lambda x_j)`, the sets of blowup factors that
//! keep them separated, and row-norm bounds for the inverse Jacobian of the
//! decimation map.
//!
//! The Jacobian of `(a, x) -> (sum_j a_j z_j^k)_{k < 2d}` factors as the
//! confluent Vandermonde matrix `U_2d(z)` times `diag(I, 2 pi i lambda a_j z_j)`,
//! so the conditioning of the decimated problem is that of `U_2d(z)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::intervals::IntervalSet;
use crate::linalg::{norm_1, principal_arg, CMatrix};
use crate::signal::ClusterGeometry;

/// Outward padding applied to excluded sets before taking complements.
pub const ENDPOINT_PAD: f64 = 1e-12;

/// `|Arg(alpha / beta)|`, in `[0, pi]`.
pub fn angular_distance(alpha: Complex64, beta: Complex64) -> Result<f64> {
    if alpha.norm() == 0.0 || beta.norm() == 0.0 {
        return Err(Error::InvalidInput("angular distance of zero".into()));
    }
    Ok(principal_arg(alpha / beta).abs())
}

/// Angular distance between `exp(2 pi i lambda x)` and `exp(2 pi i lambda y)`.
pub fn mapped_angle(lambda: f64, x: f64, y: f64) -> f64 {
    let t = lambda * (x - y);
    2.0 * PI * (t - t.round()).abs()
}

/// `{lambda in [a, b] : angle(z_j(lambda), z_k(lambda)) <= alpha}` for two
/// nodes at distance `delta`, i.e. `[a, b]` intersected with the windows
/// `l/delta + [-alpha/(2 pi delta), alpha/(2 pi delta)]`.
///
/// Panics unless `delta > 0`, `0 <= alpha <= pi` and `a <= b`.
pub fn sigma_intervals(delta: f64, alpha: f64, interval: (f64, f64)) -> IntervalSet {
    let (a, b) = interval;
    assert!(delta > 0.0 && delta.is_finite(), "node distance must be positive");
    assert!((0.0..=PI).contains(&alpha), "alpha must lie in [0, pi]");
    assert!(a <= b, "empty interval");
    if alpha >= PI {
        return IntervalSet::interval(a, b).expect("a <= b");
    }
    let half = alpha / (2.0 * PI * delta);
    let first = ((a - half) * delta).ceil() as i64;
    let last = ((b + half) * delta).floor() as i64;
    let pieces = (first..=last).filter_map(|l| {
        let centre = l as f64 / delta;
        let lo = a.max(centre - half);
        let hi = b.min(centre + half);
        (lo <= hi).then_some((lo, hi))
    });
    IntervalSet::from_intervals(pieces).expect("windows are valid intervals")
}

/// Bounds on the components of [`sigma_intervals`]:
/// `(floor(|I| delta), floor(|I| delta) + 1, alpha / (pi delta))` for the
/// component count and the maximal component length.
pub fn sigma_component_bounds(delta: f64, alpha: f64, length: f64) -> (usize, usize, f64) {
    let n = (length * delta).floor() as usize;
    (n, n + 1, alpha / (PI * delta))
}

/// `[Omega / (2 (2d - 1)), Omega / (2d - 1)]`.
pub fn blowup_range(d: usize, omega: f64) -> (f64, f64) {
    let m = (2 * d - 1) as f64;
    (omega / (2.0 * m), omega / m)
}

/// Minimal angular separation required of every pair involving a
/// non-cluster node, `1/d^2`.
pub fn non_cluster_angle(d: usize) -> f64 {
    1.0 / (d * d) as f64
}

fn check_nodes(nodes: &[f64], geometry: &ClusterGeometry) -> Result<()> {
    geometry.validate()?;
    if nodes.len() != geometry.d {
        return Err(Error::InvalidInput(format!(
            "{} nodes for a geometry with d = {}",
            nodes.len(),
            geometry.d
        )));
    }
    if nodes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput("nodes must be strictly increasing".into()));
    }
    Ok(())
}

/// The admissible blowup factors: all `lambda` in [`blowup_range`] for which
/// every pair involving a non-cluster node is mapped at least `1/d^2` apart.
///
/// The cluster condition `angle >= 2 pi lambda tau h` holds on the whole range
/// once `Omega h <= (2d - 1)/2`, which is required here. Excluded sets are
/// padded outward by [`ENDPOINT_PAD`] (scaled by the range) before the
/// complement is taken.
pub fn admissible_lambdas(nodes: &[f64], geometry: &ClusterGeometry, omega: f64) -> Result<IntervalSet> {
    check_nodes(nodes, geometry)?;
    let d = geometry.d;
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::InvalidInput(format!("Omega must be positive, got {omega}")));
    }
    if omega * geometry.h > (2 * d - 1) as f64 / 2.0 {
        return Err(Error::InvalidInput(format!(
            "Omega h = {} exceeds (2d - 1)/2",
            omega * geometry.h
        )));
    }
    let (lo, hi) = blowup_range(d, omega);
    let alpha = non_cluster_angle(d);
    let pad = ENDPOINT_PAD * hi.max(1.0);
    let mut excluded = IntervalSet::empty();
    for i in 0..d {
        for j in i + 1..d {
            if geometry.is_cluster_node(i) && geometry.is_cluster_node(j) {
                continue;
            }
            let bad = sigma_intervals(nodes[j] - nodes[i], alpha, (lo, hi));
            excluded = excluded.union(&bad.padded(pad));
        }
    }
    let admissible = excluded.complement_in(lo, hi);
    if admissible.is_empty() {
        return Err(Error::EmptyAdmissibleSet);
    }
    Ok(admissible)
}

/// Direct evaluation of both admissibility conditions at one `lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdmissibilityCheck {
    pub lambda: f64,
    /// Smallest mapped angle over pairs with a non-cluster node.
    pub min_non_cluster_angle: f64,
    /// Smallest ratio `angle / (2 pi lambda tau h)` over cluster pairs.
    pub min_cluster_ratio: f64,
    pub non_cluster_ok: bool,
    pub cluster_ok: bool,
}

impl AdmissibilityCheck {
    pub fn passed(&self) -> bool {
        self.non_cluster_ok && self.cluster_ok
    }
}

pub fn check_admissible(nodes: &[f64], geometry: &ClusterGeometry, lambda: f64) -> Result<AdmissibilityCheck> {
    check_nodes(nodes, geometry)?;
    let d = geometry.d;
    let cluster_bound = 2.0 * PI * lambda * geometry.tau * geometry.h;
    let mut min_nc = f64::INFINITY;
    let mut min_ratio = f64::INFINITY;
    for i in 0..d {
        for j in i + 1..d {
            let angle = mapped_angle(lambda, nodes[j], nodes[i]);
            if geometry.is_cluster_node(i) && geometry.is_cluster_node(j) {
                min_ratio = min_ratio.min(angle / cluster_bound);
            } else {
                min_nc = min_nc.min(angle);
            }
        }
    }
    Ok(AdmissibilityCheck {
        lambda,
        min_non_cluster_angle: min_nc,
        min_cluster_ratio: min_ratio,
        non_cluster_ok: min_nc >= non_cluster_angle(d),
        // equality holds for uniformly spaced clusters
        cluster_ok: min_ratio >= 1.0 - 1e-9,
    })
}

/// `U_2d(z)`: columns `(z_j^k)_k` followed by `(k z_j^{k-1})_k`, `k < 2d`.
pub fn confluent_vandermonde(z: &[Complex64]) -> CMatrix {
    let d = z.len();
    CMatrix::from_fn(2 * d, 2 * d, |k, col| {
        if col < d {
            z[col].powu(k as u32)
        } else if k == 0 {
            Complex64::new(0.0, 0.0)
        } else {
            z[col - d].powu(k as u32 - 1) * k as f64
        }
    })
}

/// Analytic row-norm bounds for `U_2d(z)^{-1} = [A; B]` next to the measured
/// row norms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JacobianBoundReport {
    /// `Delta_j = sum_{l != j} 1 / |z_j - z_l|`.
    pub delta: Vec<f64>,
    /// `Gamma_j = (prod_{l != j} (1 + |z_l|) / |z_j - z_l|)^2`.
    pub gamma: Vec<f64>,
    /// `(1 + 2 (1 + |z_j|) Delta_j) Gamma_j`, bounds the rows of `A`.
    pub amplitude_row_bound: Vec<f64>,
    /// `(1 + |z_j|) Gamma_j`, bounds the rows of `B`.
    pub node_row_bound: Vec<f64>,
    /// Measured l1 norms of the rows of `A`.
    pub amplitude_row_norm: Vec<f64>,
    /// Measured l1 norms of the rows of `B`.
    pub node_row_norm: Vec<f64>,
    /// 1-norm condition number of `U_2d(z)`.
    pub condition_number: f64,
}

impl JacobianBoundReport {
    /// Roundoff allowance for the computed inverse, relative to the bound.
    pub fn roundoff_slack(&self) -> f64 {
        let n = 2 * self.delta.len();
        (n as f64) * f64::EPSILON * self.condition_number
    }

    /// Whether every measured row norm is below its analytic bound.
    pub fn dominated(&self) -> bool {
        let slack = 1.0 + self.roundoff_slack();
        let ok = |norms: &[f64], bounds: &[f64]| norms.iter().zip(bounds).all(|(n, b)| *n <= b * slack);
        ok(&self.amplitude_row_norm, &self.amplitude_row_bound) && ok(&self.node_row_norm, &self.node_row_bound)
    }
}

pub fn gautschi_bounds(z: &[Complex64]) -> Result<JacobianBoundReport> {
    let d = z.len();
    if d == 0 {
        return Err(Error::InvalidInput("no nodes".into()));
    }
    let mut min_gap = f64::INFINITY;
    for i in 0..d {
        for j in i + 1..d {
            min_gap = min_gap.min((z[i] - z[j]).norm());
        }
    }
    if min_gap < 1e-12 {
        return Err(Error::NearCoincidentNodes(min_gap));
    }

    let mut delta = Vec::with_capacity(d);
    let mut gamma = Vec::with_capacity(d);
    for j in 0..d {
        let others = (0..d).filter(|&l| l != j);
        delta.push(others.clone().map(|l| 1.0 / (z[j] - z[l]).norm()).sum::<f64>());
        let prod: f64 = others.map(|l| (1.0 + z[l].norm()) / (z[j] - z[l]).norm()).product();
        gamma.push(prod * prod);
    }
    let amplitude_row_bound = (0..d)
        .map(|j| (1.0 + 2.0 * (1.0 + z[j].norm()) * delta[j]) * gamma[j])
        .collect();
    let node_row_bound = (0..d).map(|j| (1.0 + z[j].norm()) * gamma[j]).collect();

    let u = confluent_vandermonde(z);
    let inv = u
        .clone()
        .lu()
        .try_inverse()
        .ok_or(Error::NearCoincidentNodes(min_gap))?;
    let row_norm = |r: usize| inv.row(r).iter().map(|c| c.norm()).sum::<f64>();
    Ok(JacobianBoundReport {
        delta,
        gamma,
        amplitude_row_bound,
        node_row_bound,
        amplitude_row_norm: (0..d).map(row_norm).collect(),
        node_row_norm: (d..2 * d).map(row_norm).collect(),
        condition_number: norm_1(&u) * norm_1(&inv),
    })
}

/// Predicted error amplification shapes (constants set to one).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionFactors {
    /// Node error per unit noise.
    pub node: f64,
    /// Amplitude error per unit noise.
    pub amplitude: f64,
}

/// Cluster nodes: `(Omega^{-1} (Omega tau h)^{2-2p}, (Omega tau h)^{1-2p})`;
/// other nodes: `(Omega^{-1}, 1)`.
pub fn predicted_condition_numbers(geometry: &ClusterGeometry, omega: f64) -> Vec<ConditionFactors> {
    let inv_srf = omega * geometry.tau * geometry.h;
    let p = geometry.p as i32;
    (0..geometry.d)
        .map(|j| {
            if geometry.is_cluster_node(j) {
                ConditionFactors {
                    node: inv_srf.powi(2 - 2 * p) / omega,
                    amplitude: inv_srf.powi(1 - 2 * p),
                }
            } else {
                ConditionFactors {
                    node: 1.0 / omega,
                    amplitude: 1.0,
                }
            }
        })
        .collect()
}
