//! The spike-train signal model.
//!
//! A [`SpikeTrain`] is `F(x) = sum_j a_j delta(x - x_j)` with complex
//! amplitudes and strictly increasing real nodes. Its Fourier transform is
//! `F^(s) = sum_j a_j exp(-2 pi i s x_j)` and unit-rate samples are taken at
//! `s = -k`, i.e. `m_k = sum_j a_j exp(2 pi i x_j k)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::serde_complex::{from_pairs, to_pairs};

/// Relative tolerance used for the closed inequalities of the cluster
/// definition.
pub const DEFAULT_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpikeTrainJson", into = "SpikeTrainJson")]
pub struct SpikeTrain {
    amplitudes: Vec<Complex64>,
    nodes: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct SpikeTrainJson {
    amplitudes: Vec<[f64; 2]>,
    nodes: Vec<f64>,
}

impl TryFrom<SpikeTrainJson> for SpikeTrain {
    type Error = Error;

    fn try_from(j: SpikeTrainJson) -> Result<Self> {
        SpikeTrain::new(from_pairs(&j.amplitudes), j.nodes)
    }
}

impl From<SpikeTrain> for SpikeTrainJson {
    fn from(f: SpikeTrain) -> Self {
        SpikeTrainJson {
            amplitudes: to_pairs(&f.amplitudes),
            nodes: f.nodes,
        }
    }
}

impl SpikeTrain {
    /// Builds a spike train. Nodes must be finite and strictly increasing.
    pub fn new(amplitudes: Vec<Complex64>, nodes: Vec<f64>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidInput("a spike train needs at least one node".into()));
        }
        if amplitudes.len() != nodes.len() {
            return Err(Error::InvalidInput(format!(
                "{} amplitudes for {} nodes",
                amplitudes.len(),
                nodes.len()
            )));
        }
        if nodes.iter().any(|x| !x.is_finite())
            || amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite())
        {
            return Err(Error::InvalidInput("non-finite parameter".into()));
        }
        if nodes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("nodes must be strictly increasing".into()));
        }
        Ok(Self { amplitudes, nodes })
    }

    /// Builds a spike train from real amplitudes.
    pub fn from_real(amplitudes: &[f64], nodes: Vec<f64>) -> Result<Self> {
        Self::new(amplitudes.iter().map(|&a| Complex64::new(a, 0.0)).collect(), nodes)
    }

    /// Sorts `(amplitude, node)` pairs by node before validating.
    pub fn from_unsorted(mut pairs: Vec<(Complex64, f64)>) -> Result<Self> {
        pairs.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (amplitudes, nodes) = pairs.into_iter().unzip();
        Self::new(amplitudes, nodes)
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Model order `d`.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `max(|a|_inf, |x|_inf)`.
    pub fn norm(&self) -> f64 {
        let a = self.amplitudes.iter().map(|a| a.norm()).fold(0.0, f64::max);
        let x = self.nodes.iter().map(|x| x.abs()).fold(0.0, f64::max);
        a.max(x)
    }

    /// `F^(s) = sum_j a_j exp(-2 pi i s x_j)`.
    pub fn fourier_at(&self, s: f64) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&self.nodes)
            .map(|(a, &x)| a * Complex64::from_polar(1.0, -2.0 * PI * s * x))
            .sum()
    }

    /// Noiseless unit-rate samples `m_k = F^(-k)`, `k = 0..n`.
    pub fn clean_samples(&self, n: usize) -> Vec<Complex64> {
        (0..n).map(|k| self.fourier_at(-(k as f64))).collect()
    }

    /// Algebraic moments `m_k = sum_j a_j x_j^k` for `k = 0..count`.
    pub fn moments(&self, count: usize) -> Vec<Complex64> {
        let mut powers: Vec<f64> = vec![1.0; self.len()];
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            out.push(self.amplitudes.iter().zip(&powers).map(|(a, &p)| a * p).sum());
            for (p, &x) in powers.iter_mut().zip(&self.nodes) {
                *p *= x;
            }
        }
        out
    }

    /// `SH_alpha`: subtracts `alpha` from every node.
    pub fn shift(&self, alpha: f64) -> Self {
        Self {
            amplitudes: self.amplitudes.clone(),
            nodes: self.nodes.iter().map(|x| x - alpha).collect(),
        }
    }

    /// `SC_T`: divides every node by `t > 0`.
    pub fn scale(&self, t: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidInput(format!("scale factor must be positive, got {t}")));
        }
        Ok(Self {
            amplitudes: self.amplitudes.clone(),
            nodes: self.nodes.iter().map(|x| x / t).collect(),
        })
    }

    /// Noisy unit-rate samples with disk noise, deterministic in `seed`.
    pub fn sample_spectrum(&self, n: usize, noise_bound: f64, seed: u64) -> SpectralSamples {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_spectrum_with(n, noise_bound, NoiseModel::Disk, &mut rng)
    }

    /// Noisy unit-rate samples `m_k + n_k`, `|n_k| <= noise_bound`.
    pub fn sample_spectrum_with<R: Rng + ?Sized>(
        &self,
        n: usize,
        noise_bound: f64,
        model: NoiseModel,
        rng: &mut R,
    ) -> SpectralSamples {
        assert!(noise_bound >= 0.0, "noise bound must be non-negative");
        let clean = self.clean_samples(n);
        let mut actual: f64 = 0.0;
        let values = clean
            .into_iter()
            .map(|m| {
                let noise = model.draw(noise_bound, rng);
                let noisy = m + noise;
                actual = actual.max((noisy - m).norm());
                noisy
            })
            .collect();
        SpectralSamples {
            values,
            noise_bound,
            actual_noise: actual,
        }
    }
}

/// Distribution of the bounded additive noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseModel {
    /// `r exp(i theta)` with `r ~ U[0, eps]`, `theta ~ U[0, 2 pi)`.
    #[default]
    Disk,
    /// Real noise `U[-eps, eps]`.
    RealUniform,
}

impl NoiseModel {
    pub fn draw<R: Rng + ?Sized>(self, bound: f64, rng: &mut R) -> Complex64 {
        if bound == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        match self {
            NoiseModel::Disk => {
                let r = rng.gen_range(0.0..=bound);
                let theta = rng.gen_range(0.0..2.0 * PI);
                Complex64::from_polar(r, theta)
            }
            NoiseModel::RealUniform => Complex64::new(rng.gen_range(-bound..=bound), 0.0),
        }
    }
}

impl std::str::FromStr for NoiseModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "disk" => Ok(NoiseModel::Disk),
            "real_uniform" | "real" => Ok(NoiseModel::RealUniform),
            other => Err(Error::InvalidInput(format!("unknown noise model {other:?}"))),
        }
    }
}

impl std::fmt::Display for NoiseModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            NoiseModel::Disk => "disk",
            NoiseModel::RealUniform => "real_uniform",
        })
    }
}

/// `N` equispaced noisy Fourier samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpectralSamplesJson", into = "SpectralSamplesJson")]
pub struct SpectralSamples {
    pub values: Vec<Complex64>,
    /// Requested bound `eps`.
    pub noise_bound: f64,
    /// Measured `max_k |m~_k - m_k|`.
    pub actual_noise: f64,
}

#[derive(Serialize, Deserialize)]
struct SpectralSamplesJson {
    values: Vec<[f64; 2]>,
    #[serde(default)]
    noise_bound: f64,
    #[serde(default)]
    actual_noise: f64,
}

impl TryFrom<SpectralSamplesJson> for SpectralSamples {
    type Error = Error;

    fn try_from(j: SpectralSamplesJson) -> Result<Self> {
        if j.values.is_empty() {
            return Err(Error::InvalidInput("no samples".into()));
        }
        if !(j.noise_bound >= 0.0 && j.actual_noise >= 0.0) {
            return Err(Error::InvalidInput("noise magnitudes must be non-negative".into()));
        }
        Ok(SpectralSamples {
            values: from_pairs(&j.values),
            noise_bound: j.noise_bound,
            actual_noise: j.actual_noise,
        })
    }
}

impl From<SpectralSamples> for SpectralSamplesJson {
    fn from(s: SpectralSamples) -> Self {
        SpectralSamplesJson {
            values: to_pairs(&s.values),
            noise_bound: s.noise_bound,
            actual_noise: s.actual_noise,
        }
    }
}

impl SpectralSamples {
    /// Wraps measured values with unknown noise.
    pub fn from_values(values: Vec<Complex64>) -> Self {
        Self {
            values,
            noise_bound: 0.0,
            actual_noise: 0.0,
        }
    }

    pub fn count(&self) -> usize {
        self.values.len()
    }
}

/// Parameters of a `(p, h, T, tau, eta)`-clustered configuration whose
/// cluster occupies nodes `kappa..kappa+p-1` (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterGeometry {
    pub p: usize,
    pub d: usize,
    pub h: f64,
    #[serde(rename = "T")]
    pub t: f64,
    pub tau: f64,
    pub eta: f64,
    pub kappa: usize,
}

impl ClusterGeometry {
    pub fn new(p: usize, d: usize, h: f64, t: f64, tau: f64, eta: f64, kappa: usize) -> Result<Self> {
        let g = Self { p, d, h, t, tau, eta, kappa };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidInput(format!("cluster geometry: {m}")));
        if self.p < 2 || self.p > self.d {
            return bad("need 2 <= p <= d");
        }
        if !(self.h > 0.0 && self.h <= self.t && self.t.is_finite()) {
            return bad("need 0 < h <= T");
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return bad("need 0 < tau <= 1");
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return bad("need 0 < eta <= 1");
        }
        if self.kappa < 1 || self.kappa + self.p - 1 > self.d {
            return bad("need 1 <= kappa <= d - p + 1");
        }
        Ok(())
    }

    /// The layout parameters used by [`make_clustered_nodes`]:
    /// `T = pi`, `tau = 1/(p-1)`, `eta = (pi - h)/(pi (d-p+1))`, `kappa = 1`.
    pub fn experiment_layout(p: usize, d: usize, h: f64) -> Result<Self> {
        if p < 2 || d < p {
            return Err(Error::InvalidInput("need 2 <= p <= d".into()));
        }
        Self::new(
            p,
            d,
            h,
            PI,
            1.0 / (p - 1) as f64,
            (PI - h) / (PI * (d - p + 1) as f64),
            1,
        )
    }

    /// Geometry after dividing every node by `t`.
    pub fn scaled(&self, t: f64) -> Self {
        Self {
            h: self.h / t,
            t: self.t / t,
            ..*self
        }
    }

    /// 0-based index range of the cluster nodes.
    pub fn cluster_range(&self) -> std::ops::Range<usize> {
        self.kappa - 1..self.kappa - 1 + self.p
    }

    pub fn is_cluster_node(&self, index: usize) -> bool {
        self.cluster_range().contains(&index)
    }

    /// Cluster gap lower bound `tau h`.
    pub fn min_cluster_gap(&self) -> f64 {
        self.tau * self.h
    }

    /// Tightest geometry describing `nodes` with the given cluster position.
    pub fn infer(nodes: &[f64], p: usize, kappa: usize) -> Result<Self> {
        let d = nodes.len();
        if p < 2 || kappa < 1 || kappa + p - 1 > d {
            return Err(Error::InvalidInput("cluster does not fit in the node vector".into()));
        }
        let range = kappa - 1..kappa - 1 + p;
        let mut h: f64 = 0.0;
        let mut min_c = f64::INFINITY;
        let mut t: f64 = 0.0;
        let mut min_nc = f64::INFINITY;
        for i in 0..d {
            for j in i + 1..d {
                let gap = (nodes[j] - nodes[i]).abs();
                if range.contains(&i) && range.contains(&j) {
                    h = h.max(gap);
                    min_c = min_c.min(gap);
                } else {
                    t = t.max(gap);
                    min_nc = min_nc.min(gap);
                }
            }
        }
        let t = t.max(h);
        let eta = if min_nc.is_finite() { min_nc / t } else { 1.0 };
        Self::new(p, d, h, t, min_c / h, eta.min(1.0), kappa)
    }
}

/// Nodes of the clustered layout with `T = pi`, `tau = 1/(p-1)`:
/// `x_j = (j-1) h/(p-1)` for the cluster, then `d-p` nodes spread evenly
/// over the rest of `[0, pi]`.
pub fn make_clustered_nodes(p: usize, d: usize, h: f64) -> Result<Vec<f64>> {
    if p < 2 || d < p {
        return Err(Error::InvalidInput(format!("need 2 <= p <= d, got p={p}, d={d}")));
    }
    if h.is_nan() || h <= 0.0 || h >= PI {
        return Err(Error::InvalidInput(format!("cluster extent must lie in (0, pi), got {h}")));
    }
    let step = h / (p - 1) as f64;
    let mut nodes: Vec<f64> = (0..p).map(|j| j as f64 * step).collect();
    let last = (p - 1) as f64 * step;
    let spread = (PI - last) / (d - p + 1) as f64;
    nodes.extend((1..=d - p).map(|j| last + j as f64 * spread));
    Ok(nodes)
}

/// Checks the clustered-configuration inequalities (closed, with relative
/// tolerance [`DEFAULT_REL_TOL`]).
pub fn validate_cluster(nodes: &[f64], geometry: &ClusterGeometry) -> bool {
    validate_cluster_with_tol(nodes, geometry, DEFAULT_REL_TOL)
}

pub fn validate_cluster_with_tol(nodes: &[f64], g: &ClusterGeometry, rel_tol: f64) -> bool {
    if nodes.len() != g.d || g.validate().is_err() {
        return false;
    }
    let le = |a: f64, b: f64| a <= b + rel_tol * b.abs().max(a.abs());
    let range = g.cluster_range();
    for i in 0..nodes.len() {
        for j in i + 1..nodes.len() {
            let gap = (nodes[j] - nodes[i]).abs();
            let ok = if range.contains(&i) && range.contains(&j) {
                le(g.tau * g.h, gap) && le(gap, g.h)
            } else {
                le(g.eta * g.t, gap) && le(gap, g.t)
            };
            if !ok {
                return false;
            }
        }
    }
    true
}
