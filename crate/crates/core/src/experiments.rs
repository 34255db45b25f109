//! Randomized single experiments and the sweeps built from them: error
//! amplification factors and phase transitions of the Matrix Pencil method on
//! clustered signals.
//!
//! A trial builds the clustered layout with cluster extent `h` (nodes in
//! `[0, pi]`, divided by `2 pi` so that they lie in `[0, 1/2)`), samples `N`
//! Fourier coefficients perturbed either by random bounded noise
//! ([`Scheme::S1`]) or by the worst-case signal ([`Scheme::S2`]), runs
//! [`mp_recover`] with `L = ceil(N/2)` and scores every node. Nodes are
//! numbered from 1, the cluster occupying nodes `1..=p`.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{logistic_boundary, loglog_fit, BoundaryFit, LineFit};
use crate::matrix_pencil::{circular_distance, default_pencil_param, mp_recover};
use crate::signal::{make_clustered_nodes, ClusterGeometry, NoiseModel, SpectralSamples, SpikeTrain};
use crate::worstcase::worst_case_signal;

/// Minimum number of successful points for a slope fit.
pub const MIN_FIT_POINTS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    /// Amplitudes `(i^0, i^1, ...)` and random bounded noise.
    S1,
    /// Amplitudes `(1, -1, 1, ...)` and the worst-case perturbation.
    S2,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::S1 => "S1",
            Scheme::S2 => "S2",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "S1" => Ok(Scheme::S1),
            "S2" => Ok(Scheme::S2),
            _ => Err(Error::InvalidInput(format!("unknown scheme {s:?}, expected S1 or S2"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeClass {
    Cluster,
    NonCluster,
}

impl fmt::Display for NodeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NodeClass::Cluster => "cluster",
            NodeClass::NonCluster => "non_cluster",
        })
    }
}

/// Score of one true node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NodeOutcome {
    /// 1-based node number.
    pub index: usize,
    pub class: NodeClass,
    /// Circular distance to the nearest recovered node (absent when the
    /// estimator failed).
    pub error: Option<f64>,
    pub success: bool,
    /// `error * N / eps0`, only on success.
    pub kx: Option<f64>,
    /// `|a_j - a_MP| / eps0`, only on success.
    pub ka: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentRecord {
    pub scheme: Scheme,
    pub p: usize,
    pub d: usize,
    pub h: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub epsilon_requested: f64,
    /// Measured `max_k |F^(-k) - m~_k|` (NaN if no samples were produced).
    pub epsilon0: f64,
    /// `1 / (N Delta)` with `Delta = h / (2 pi (p - 1))`.
    pub srf: f64,
    pub seed: u64,
    pub nodes: Vec<NodeOutcome>,
    /// Why recovery (or the perturbation) failed, if it did.
    pub failure: Option<String>,
}

impl ExperimentRecord {
    pub fn all_succeeded(&self) -> bool {
        self.nodes.iter().all(|n| n.success)
    }

    /// Success of node `j` (1-based).
    pub fn node_succeeded(&self, j: usize) -> bool {
        self.nodes.get(j.wrapping_sub(1)).is_some_and(|n| n.success)
    }
}

/// Normalized minimal cluster gap `h / (2 pi (p - 1))`.
pub fn cluster_gap(p: usize, h: f64) -> f64 {
    h / (2.0 * PI * (p - 1) as f64)
}

pub fn super_resolution_factor(p: usize, h: f64, n: usize) -> f64 {
    1.0 / (n as f64 * cluster_gap(p, h))
}

/// The test signal of `scheme`, with nodes already in `[0, 1/2)`.
pub fn test_signal(p: usize, d: usize, h: f64, scheme: Scheme) -> Result<SpikeTrain> {
    let nodes: Vec<f64> = make_clustered_nodes(p, d, h)?
        .into_iter()
        .map(|x| x / (2.0 * PI))
        .collect();
    let amplitudes = (0..d)
        .map(|j| match scheme {
            Scheme::S1 => Complex64::i().powu(j as u32),
            Scheme::S2 => Complex64::new(if j % 2 == 0 { 1.0 } else { -1.0 }, 0.0),
        })
        .collect();
    SpikeTrain::new(amplitudes, nodes)
}

/// Parameters of one experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub p: usize,
    pub d: usize,
    pub h: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub epsilon: f64,
    pub scheme: Scheme,
    pub noise: NoiseModel,
    pub seed: u64,
}

impl Trial {
    pub fn new(p: usize, d: usize, h: f64, n: usize, epsilon: f64, scheme: Scheme, seed: u64) -> Self {
        Self {
            p,
            d,
            h,
            n,
            epsilon,
            scheme,
            noise: NoiseModel::default(),
            seed,
        }
    }

    pub fn with_noise(self, noise: NoiseModel) -> Self {
        Self { noise, ..self }
    }

    fn validate(&self) -> Result<()> {
        if self.n <= 2 * self.d {
            return Err(Error::InvalidInput(format!("need N > 2d, got N={} d={}", self.n, self.d)));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidInput(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        Ok(())
    }

    fn perturbed_samples(&self, f: &SpikeTrain) -> Result<SpectralSamples> {
        match self.scheme {
            Scheme::S1 => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                Ok(f.sample_spectrum_with(self.n, self.epsilon, self.noise, &mut rng))
            }
            Scheme::S2 => {
                let nf = self.n as f64;
                let geometry = ClusterGeometry::experiment_layout(self.p, self.d, self.h)?.scaled(2.0 * PI * nf.recip());
                let blown = f.scale(1.0 / nf)?;
                let report = worst_case_signal(&blown, &geometry, self.epsilon, 1.0)?;
                let f_eps = report.perturbed.scale(nf)?;
                let clean = f.clean_samples(self.n);
                let values = f_eps.clean_samples(self.n);
                let actual = clean
                    .iter()
                    .zip(&values)
                    .map(|(a, b)| (a - b).norm())
                    .fold(0.0, f64::max);
                Ok(SpectralSamples {
                    values,
                    noise_bound: self.epsilon,
                    actual_noise: actual,
                })
            }
        }
    }

    /// Runs the experiment. Invalid parameters are errors; a failing
    /// estimator or perturbation yields a record with every node failed.
    pub fn run(&self) -> Result<ExperimentRecord> {
        self.validate()?;
        let f = test_signal(self.p, self.d, self.h, self.scheme)?;
        let srf = super_resolution_factor(self.p, self.h, self.n);
        let failed = |eps0: f64, why: String| ExperimentRecord {
            scheme: self.scheme,
            p: self.p,
            d: self.d,
            h: self.h,
            n: self.n,
            epsilon_requested: self.epsilon,
            epsilon0: eps0,
            srf,
            seed: self.seed,
            nodes: (0..self.d)
                .map(|j| NodeOutcome {
                    index: j + 1,
                    class: self.class_of(j),
                    error: None,
                    success: false,
                    kx: None,
                    ka: None,
                })
                .collect(),
            failure: Some(why),
        };

        let samples = match self.perturbed_samples(&f) {
            Ok(s) => s,
            Err(e @ Error::EpsilonTooLarge(_)) => return Ok(failed(f64::NAN, e.to_string())),
            Err(e) => return Err(e),
        };
        let eps0 = samples.actual_noise;
        let estimate = match mp_recover(&samples, self.d, default_pencil_param(self.n)) {
            Ok(r) => r.estimate,
            Err(e) => return Ok(failed(eps0, e.to_string())),
        };

        let x = f.nodes();
        let a = f.amplitudes();
        let nodes = (0..self.d)
            .map(|j| {
                let (nearest, error) = estimate
                    .nodes()
                    .iter()
                    .map(|&y| circular_distance(x[j], y))
                    .enumerate()
                    .fold((0, f64::INFINITY), |best, (l, e)| if e < best.1 { (l, e) } else { best });
                let separation = (0..self.d)
                    .filter(|&l| l != j)
                    .map(|l| circular_distance(x[l], x[j]))
                    .fold(f64::INFINITY, f64::min);
                let success = error < separation / 3.0;
                NodeOutcome {
                    index: j + 1,
                    class: self.class_of(j),
                    error: Some(error),
                    success,
                    kx: success.then(|| error * self.n as f64 / eps0),
                    ka: success.then(|| (a[j] - estimate.amplitudes()[nearest]).norm() / eps0),
                }
            })
            .collect();
        Ok(ExperimentRecord {
            scheme: self.scheme,
            p: self.p,
            d: self.d,
            h: self.h,
            n: self.n,
            epsilon_requested: self.epsilon,
            epsilon0: eps0,
            srf,
            seed: self.seed,
            nodes,
            failure: None,
        })
    }

    fn class_of(&self, j: usize) -> NodeClass {
        if j < self.p {
            NodeClass::Cluster
        } else {
            NodeClass::NonCluster
        }
    }
}

/// A single experiment with the default noise model.
pub fn single_experiment(
    p: usize,
    d: usize,
    h: f64,
    n: usize,
    epsilon: f64,
    scheme: Scheme,
    seed: u64,
) -> Result<ExperimentRecord> {
    Trial::new(p, d, h, n, epsilon, scheme, seed).run()
}

/// Ranges from which `h`, `N` and `epsilon` are drawn log-uniformly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRanges {
    pub h: (f64, f64),
    #[serde(rename = "N")]
    pub n: (usize, usize),
    pub epsilon: (f64, f64),
}

impl Default for SweepRanges {
    fn default() -> Self {
        Self {
            h: (1e-4, 1e-1),
            n: (16, 512),
            epsilon: (1e-10, 1e-1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub p: usize,
    pub d: usize,
    pub ranges: SweepRanges,
    pub trials: usize,
    pub scheme: Scheme,
    pub noise: NoiseModel,
    pub base_seed: u64,
}

impl SweepConfig {
    pub fn new(p: usize, d: usize, trials: usize, scheme: Scheme, base_seed: u64) -> Self {
        Self {
            p,
            d,
            ranges: SweepRanges::default(),
            trials,
            scheme,
            noise: NoiseModel::default(),
            base_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        if self.p < 2 || self.d < self.p {
            return bad(format!("need 2 <= p <= d, got p={} d={}", self.p, self.d));
        }
        if self.trials == 0 {
            return bad("need at least one trial".into());
        }
        let r = &self.ranges;
        if !(r.h.0 > 0.0 && r.h.0 <= r.h.1 && r.h.1 < PI) {
            return bad(format!("bad h range {:?}", r.h));
        }
        if !(r.n.0 > 2 * self.d && r.n.0 <= r.n.1) {
            return bad(format!("bad N range {:?}: need 2d < N_min <= N_max", r.n));
        }
        if !(r.epsilon.0 > 0.0 && r.epsilon.0 <= r.epsilon.1 && r.epsilon.1.is_finite()) {
            return bad(format!("bad epsilon range {:?}", r.epsilon));
        }
        Ok(())
    }

    /// The parameters of trial `index`, a pure function of the base seed and
    /// the index.
    pub fn trial(&self, index: usize) -> Trial {
        let mut rng = ChaCha8Rng::seed_from_u64(self.base_seed);
        rng.set_stream(index as u64);
        let r = &self.ranges;
        let h = log_uniform(&mut rng, r.h.0, r.h.1);
        let n = (log_uniform(&mut rng, r.n.0 as f64, r.n.1 as f64).round() as usize).clamp(r.n.0, r.n.1);
        let epsilon = log_uniform(&mut rng, r.epsilon.0, r.epsilon.1);
        let seed = rng.gen();
        Trial::new(self.p, self.d, h, n, epsilon, self.scheme, seed).with_noise(self.noise)
    }
}

fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    if lo == hi {
        return lo;
    }
    rng.gen_range(lo.ln()..=hi.ln()).exp().clamp(lo, hi)
}

/// Runs all trials of `config` in parallel; records are in trial order.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<ExperimentRecord>> {
    config.validate()?;
    (0..config.trials)
        .into_par_iter()
        .map(|i| config.trial(i).run())
        .collect()
}

/// The amplification-factor sweep.
pub fn amplification_sweep(config: &SweepConfig) -> Result<Vec<ExperimentRecord>> {
    run_sweep(config)
}

/// Which success indicator the phase boundary is fitted to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuccessTarget {
    AllNodes,
    /// A single node, 1-based.
    Node(usize),
}

impl SuccessTarget {
    pub fn of(&self, record: &ExperimentRecord) -> bool {
        match *self {
            SuccessTarget::AllNodes => record.all_succeeded(),
            SuccessTarget::Node(j) => record.node_succeeded(j),
        }
    }
}

/// Logistic fit of success on `(ln SRF, ln eps_requested)`; the boundary
/// slope is `d ln eps_crit / d ln SRF`.
pub fn fit_phase_boundary(records: &[ExperimentRecord], target: SuccessTarget) -> Result<BoundaryFit> {
    let u: Vec<f64> = records.iter().map(|r| r.srf.ln()).collect();
    let v: Vec<f64> = records.iter().map(|r| r.epsilon_requested.ln()).collect();
    let s: Vec<bool> = records.iter().map(|r| target.of(r)).collect();
    logistic_boundary(&u, &v, &s)
}

pub fn phase_transition_sweep(
    config: &SweepConfig,
    target: SuccessTarget,
) -> Result<(Vec<ExperimentRecord>, BoundaryFit)> {
    if let SuccessTarget::Node(j) = target {
        if j == 0 || j > config.d {
            return Err(Error::InvalidInput(format!("node {j} out of range 1..={}", config.d)));
        }
    }
    let records = run_sweep(config)?;
    let fit = fit_phase_boundary(&records, target)?;
    Ok((records, fit))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Factor {
    Node,
    Amplitude,
}

/// Which nodes contribute points to a fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeSelector {
    Class(NodeClass),
    /// A single node, 1-based.
    Index(usize),
}

impl NodeSelector {
    fn matches(&self, o: &NodeOutcome) -> bool {
        match *self {
            NodeSelector::Class(c) => o.class == c,
            NodeSelector::Index(j) => o.index == j,
        }
    }
}

/// OLS fit of `ln K` against `ln SRF` over the successful selected nodes.
pub fn fit_loglog_slope(records: &[ExperimentRecord], factor: Factor, selector: NodeSelector) -> Result<LineFit> {
    let (x, y): (Vec<f64>, Vec<f64>) = records
        .iter()
        .flat_map(|r| r.nodes.iter().map(move |o| (r.srf, o)))
        .filter(|(_, o)| o.success && selector.matches(o))
        .filter_map(|(srf, o)| {
            let k = match factor {
                Factor::Node => o.kx,
                Factor::Amplitude => o.ka,
            }?;
            (k > 0.0 && k.is_finite()).then_some((srf, k))
        })
        .unzip();
    if x.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientData {
            found: x.len(),
            needed: MIN_FIT_POINTS,
        });
    }
    loglog_fit(&x, &y)
}

/// Slopes of the four amplification-factor families.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AmplificationSummary {
    pub cluster_node: Option<LineFit>,
    pub cluster_amplitude: Option<LineFit>,
    pub non_cluster_node: Option<LineFit>,
    pub non_cluster_amplitude: Option<LineFit>,
}

pub fn summarize_amplification(records: &[ExperimentRecord]) -> AmplificationSummary {
    let fit = |f, c| fit_loglog_slope(records, f, NodeSelector::Class(c)).ok();
    AmplificationSummary {
        cluster_node: fit(Factor::Node, NodeClass::Cluster),
        cluster_amplitude: fit(Factor::Amplitude, NodeClass::Cluster),
        non_cluster_node: fit(Factor::Node, NodeClass::NonCluster),
        non_cluster_amplitude: fit(Factor::Amplitude, NodeClass::NonCluster),
    }
}

/// One output row: a node of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeRow {
    pub scheme: Scheme,
    pub p: usize,
    pub d: usize,
    pub h: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub eps_req: f64,
    pub eps0: f64,
    pub srf: f64,
    pub node_index: usize,
    pub node_class: NodeClass,
    pub e: Option<f64>,
    pub succ: bool,
    #[serde(rename = "Kx")]
    pub kx: Option<f64>,
    #[serde(rename = "Ka")]
    pub ka: Option<f64>,
    pub seed: u64,
}

pub fn node_rows(record: &ExperimentRecord) -> impl Iterator<Item = NodeRow> + '_ {
    record.nodes.iter().map(move |o| NodeRow {
        scheme: record.scheme,
        p: record.p,
        d: record.d,
        h: record.h,
        n: record.n,
        eps_req: record.epsilon_requested,
        eps0: record.epsilon0,
        srf: record.srf,
        node_index: o.index,
        node_class: o.class,
        e: o.error,
        succ: o.success,
        kx: o.kx,
        ka: o.ka,
        seed: record.seed,
    })
}

/// Column order of the CSV output.
pub const CSV_HEADER: &str = "scheme,p,d,h,N,eps_req,eps0,srf,node_index,node_class,e,succ,Kx,Ka,seed";

fn csv_error(e: csv::Error) -> std::io::Error {
    std::io::Error::other(e)
}

/// Writes `# key=value` metadata lines, the header and one row per node.
pub fn write_csv<W: Write>(out: W, records: &[ExperimentRecord], metadata: &[(String, String)]) -> std::io::Result<()> {
    let mut out = out;
    for (k, v) in metadata {
        writeln!(out, "# {k}={v}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        for row in node_rows(r) {
            w.serialize(row).map_err(csv_error)?;
        }
    }
    if records.is_empty() {
        w.write_record(CSV_HEADER.split(',')).map_err(csv_error)?;
    }
    w.flush()
}

/// Writes one JSON object per node row.
pub fn write_json_lines<W: Write>(mut out: W, records: &[ExperimentRecord]) -> std::io::Result<()> {
    for r in records {
        for row in node_rows(r) {
            serde_json::to_writer(&mut out, &row)?;
            out.write_all(b"\n")?;
        }
    }
    out.flush()
}
