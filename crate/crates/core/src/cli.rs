//! The `superres` command line front end.
//!
//! Every parameter can come from a flag, from a config file (`--config`,
//! flat `key = value` lines or a flat JSON object) or from a default, in that
//! order of precedence. The resolved parameters are written into the output
//! (a `config` object in JSON reports, `# key=value` lines in CSV files), so
//! every output can be regenerated from its own header.
//!
//! Exit codes: 0 on success, 1 on I/O errors, 2 on malformed input or
//! arguments, 3 when the estimator or the perturbation fails or the
//! admissible set is empty, 4 when a phase-boundary fit is degenerate.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Display;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::decimation::{
    admissible_lambdas, blowup_range, check_admissible, gautschi_bounds, predicted_condition_numbers,
    AdmissibilityCheck, ConditionFactors, JacobianBoundReport,
};
use crate::error::Error;
use crate::experiments::{
    fit_phase_boundary, run_sweep, summarize_amplification, write_csv, write_json_lines, Scheme, SuccessTarget,
    SweepConfig, SweepRanges,
};
use crate::fit::LineFit;
use crate::intervals::IntervalSet;
use crate::matrix_pencil::{default_pencil_param, mp_recover, RecoveryResult};
use crate::signal::{ClusterGeometry, NoiseModel, SpectralSamples, SpikeTrain};
use crate::worstcase::{worst_case_signal, WorstCaseReport};

pub const EXIT_IO: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_FAILURE: i32 = 3;
pub const EXIT_DEGENERATE_FIT: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "superres", about = "Super-resolution of clustered spike trains", disable_version_flag = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Recover a spike train from spectral samples with the Matrix Pencil method.
    Recover(RecoverArgs),
    /// Run a Monte Carlo sweep and write one CSV row per node and trial.
    Experiment(ExperimentArgs),
    /// Build the worst-case perturbation of a clustered signal.
    Worstcase(WorstcaseArgs),
    /// Compute admissible blowup factors and Jacobian bounds.
    Decimation(DecimationArgs),
    /// Print the version.
    Version,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Config file: `key = value` lines or a flat JSON object.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Random seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file (standard output if absent).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RecoverArgs {
    /// Spectral samples JSON: {"values": [[re, im], ...], ...}.
    #[arg(long, short)]
    pub input: Option<PathBuf>,
    /// Number of spikes.
    #[arg(long, short)]
    pub d: Option<usize>,
    /// Pencil parameter (default ceil(N/2)).
    #[arg(long = "L", short = 'L')]
    pub pencil: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExperimentKind {
    Amplification,
    Phase,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        <Self as ValueEnum>::from_str(s, true)
    }
}

impl Display for OutputFormat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        })
    }
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Amplification factors or phase transition.
    pub kind: ExperimentKind,
    #[arg(long, short)]
    pub p: Option<usize>,
    #[arg(long, short)]
    pub d: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// S1 (random noise) or S2 (worst-case perturbation).
    #[arg(long)]
    pub scheme: Option<Scheme>,
    /// Noise model for S1: disk or real_uniform.
    #[arg(long)]
    pub noise: Option<NoiseModel>,
    #[arg(long)]
    pub h_min: Option<f64>,
    #[arg(long)]
    pub h_max: Option<f64>,
    #[arg(long = "N-min", alias = "n-min")]
    pub n_min: Option<usize>,
    #[arg(long = "N-max", alias = "n-max")]
    pub n_max: Option<usize>,
    #[arg(long)]
    pub eps_min: Option<f64>,
    #[arg(long)]
    pub eps_max: Option<f64>,
    /// Phase transition of a single node (1-based; 0 means all nodes).
    #[arg(long)]
    pub node: Option<usize>,
    /// csv or json (JSON lines).
    #[arg(long)]
    pub format: Option<OutputFormat>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct WorstcaseArgs {
    /// Spike train JSON: {"amplitudes": [[re, im], ...], "nodes": [...]}.
    #[arg(long)]
    pub signal: Option<PathBuf>,
    /// Cluster geometry JSON; inferred from the nodes, `p` and `kappa` if absent.
    #[arg(long)]
    pub geometry: Option<PathBuf>,
    #[arg(long, short)]
    pub p: Option<usize>,
    /// First cluster node (1-based).
    #[arg(long)]
    pub kappa: Option<usize>,
    #[arg(long, short)]
    pub epsilon: Option<f64>,
    /// Half-width of the frequency band for the spectral deviation.
    #[arg(long)]
    pub omega: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct DecimationArgs {
    /// Spike train JSON whose nodes are analysed.
    #[arg(long, conflicts_with = "nodes")]
    pub signal: Option<PathBuf>,
    /// Comma-separated increasing nodes.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub nodes: Option<Vec<f64>>,
    #[arg(long, short)]
    pub p: Option<usize>,
    /// First cluster node (1-based).
    #[arg(long)]
    pub kappa: Option<usize>,
    /// Bandwidth (default (2d - 1)/(2h), the largest allowed).
    #[arg(long)]
    pub omega: Option<f64>,
    /// Number of random blowup factors checked directly.
    #[arg(long)]
    pub lambda_samples: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

/// Errors of the front end, each with its exit code.
#[derive(Debug)]
pub enum CliError {
    Parse(String),
    Io(String),
    Lib(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => EXIT_PARSE,
            CliError::Io(_) => EXIT_IO,
            CliError::Lib(Error::InvalidInput(_)) => EXIT_PARSE,
            CliError::Lib(Error::DegenerateFit(_)) => EXIT_DEGENERATE_FIT,
            CliError::Lib(_) => EXIT_FAILURE,
        }
    }
}

impl Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Parse(m) => write!(f, "parse error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Resolved run parameters, in key order.
pub type RunConfig = BTreeMap<String, String>;

/// Flag, config file and default resolution.
struct Settings {
    file: BTreeMap<String, String>,
    resolved: RunConfig,
}

impl Settings {
    fn load(path: Option<&Path>) -> CliResult<Self> {
        let file = match path {
            Some(p) => parse_config(&read_to_string(p)?)?,
            None => BTreeMap::new(),
        };
        Ok(Self {
            file,
            resolved: BTreeMap::new(),
        })
    }

    fn optional<T>(&mut self, key: &str, flag: Option<T>) -> CliResult<Option<T>>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let value = match flag {
            Some(v) => Some(v),
            None => match self.file.get(key) {
                Some(s) => Some(
                    s.parse::<T>()
                        .map_err(|e| CliError::Parse(format!("config key {key} = {s:?}: {e}")))?,
                ),
                None => None,
            },
        };
        if let Some(v) = &value {
            self.resolved.insert(key.to_string(), v.to_string());
        }
        Ok(value)
    }

    fn with_default<T>(&mut self, key: &str, flag: Option<T>, default: T) -> CliResult<T>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let v = self.optional(key, flag)?.unwrap_or(default);
        self.resolved.insert(key.to_string(), v.to_string());
        Ok(v)
    }

    fn required<T>(&mut self, key: &str, flag: Option<T>) -> CliResult<T>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        self.optional(key, flag)?
            .ok_or_else(|| CliError::Parse(format!("missing required parameter {key}")))
    }

    fn path(&mut self, key: &str, flag: Option<PathBuf>) -> CliResult<Option<PathBuf>> {
        Ok(self.optional::<String>(key, flag.map(|p| p.display().to_string()))?.map(PathBuf::from))
    }

    /// Rejects config keys that no parameter consumed.
    fn finish(mut self, command: &str) -> CliResult<RunConfig> {
        if let Some(k) = self.file.keys().find(|k| !self.resolved.contains_key(*k)) {
            return Err(CliError::Parse(format!("unknown config key {k:?}")));
        }
        self.resolved.insert("command".into(), command.into());
        self.resolved.insert("version".into(), env!("CARGO_PKG_VERSION").into());
        Ok(self.resolved)
    }
}

fn read_to_string(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    serde_json::from_str(&read_to_string(path)?).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

/// Parses a flat config: a JSON object of scalars, or `key = value` lines
/// with `#` comments. Dashes in keys are read as underscores.
pub fn parse_config(text: &str) -> CliResult<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    let norm = |k: &str| k.trim().replace('-', "_");
    if text.trim_start().starts_with('{') {
        let obj: serde_json::Map<String, serde_json::Value> =
            serde_json::from_str(text).map_err(|e| CliError::Parse(format!("config: {e}")))?;
        for (k, v) in obj {
            let s = match v {
                serde_json::Value::String(s) => s,
                serde_json::Value::Number(n) => n.to_string(),
                serde_json::Value::Bool(b) => b.to_string(),
                other => return Err(CliError::Parse(format!("config key {k}: unsupported value {other}"))),
            };
            out.insert(norm(&k), s);
        }
    } else {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Parse(format!("config line {}: expected key = value", i + 1)))?;
            out.insert(norm(k), v.trim().trim_matches('"').to_string());
        }
    }
    Ok(out)
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, bytes).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    config: &'a RunConfig,
    #[serde(flatten)]
    result: &'a T,
}

fn write_report<T: Serialize>(path: Option<&Path>, config: &RunConfig, result: &T) -> CliResult<()> {
    let mut bytes = serde_json::to_vec_pretty(&Report { config, result }).map_err(|e| CliError::Io(e.to_string()))?;
    bytes.push(b'\n');
    write_output(path, &bytes)
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("superres: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: Command) -> CliResult<()> {
    match command {
        Command::Recover(a) => cmd_recover(a),
        Command::Experiment(a) => cmd_experiment(a),
        Command::Worstcase(a) => cmd_worstcase(a),
        Command::Decimation(a) => cmd_decimation(a),
        Command::Version => {
            println!("superres {}", env!("CARGO_PKG_VERSION"));
            Ok(())
        }
    }
}

pub fn cmd_recover(a: RecoverArgs) -> CliResult<()> {
    let mut s = Settings::load(a.common.config.as_deref())?;
    let input = s
        .path("input", a.input)?
        .ok_or_else(|| CliError::Parse("missing required parameter input".into()))?;
    let d: usize = s.required("d", a.d)?;
    let samples: SpectralSamples = read_json(&input)?;
    let l = s.with_default("L", a.pencil, default_pencil_param(samples.count()))?;
    s.with_default("seed", a.common.seed, 0u64)?;
    let output = s.path("output", a.common.output)?;
    let config = s.finish("recover")?;
    let result: RecoveryResult = mp_recover(&samples, d, l)?;
    write_report(output.as_deref(), &config, &result)
}

fn format_fit(fit: &Option<LineFit>) -> String {
    match fit {
        Some(f) => format!("{:.4} (r2 {:.3}, residual sd {:.3}, n {})", f.slope, f.r_squared, f.residual_std, f.points),
        None => "insufficient data".into(),
    }
}

pub fn cmd_experiment(a: ExperimentArgs) -> CliResult<()> {
    let mut s = Settings::load(a.common.config.as_deref())?;
    let defaults = SweepRanges::default();
    let p = s.with_default("p", a.p, 2usize)?;
    let d = s.with_default("d", a.d, if a.kind == ExperimentKind::Phase { 4 } else { 3 })?;
    let trials = s.with_default("trials", a.trials, 500usize)?;
    let scheme = s.with_default("scheme", a.scheme, Scheme::S1)?;
    let noise = s.with_default("noise", a.noise, NoiseModel::default())?;
    let ranges = SweepRanges {
        h: (s.with_default("h_min", a.h_min, defaults.h.0)?, s.with_default("h_max", a.h_max, defaults.h.1)?),
        n: (s.with_default("N_min", a.n_min, defaults.n.0)?, s.with_default("N_max", a.n_max, defaults.n.1)?),
        epsilon: (
            s.with_default("eps_min", a.eps_min, defaults.epsilon.0)?,
            s.with_default("eps_max", a.eps_max, defaults.epsilon.1)?,
        ),
    };
    let node = if a.kind == ExperimentKind::Phase {
        s.with_default("node", a.node, 0usize)?
    } else {
        0
    };
    let seed = s.with_default("seed", a.common.seed, 0u64)?;
    let format = s.with_default("format", a.format, OutputFormat::Csv)?;
    let output = s.path("output", a.common.output)?;
    let kind = match a.kind {
        ExperimentKind::Amplification => "amplification",
        ExperimentKind::Phase => "phase",
    };
    let mut config = s.finish("experiment")?;
    config.insert("kind".into(), kind.into());

    let sweep = SweepConfig {
        p,
        d,
        ranges,
        trials,
        scheme,
        noise,
        base_seed: seed,
    };
    if node > d {
        return Err(Error::InvalidInput(format!("node {node} out of range 1..={d}")).into());
    }
    let records = run_sweep(&sweep)?;

    let mut bytes = Vec::new();
    match format {
        OutputFormat::Csv => {
            let meta: Vec<(String, String)> = config.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
            write_csv(&mut bytes, &records, &meta)?;
        }
        OutputFormat::Json => {
            let mut header = serde_json::to_vec(&serde_json::json!({ "config": &config })).map_err(io::Error::other)?;
            header.push(b'\n');
            bytes.extend(header);
            write_json_lines(&mut bytes, &records)?;
        }
    }
    write_output(output.as_deref(), &bytes)?;

    let mut summary = String::new();
    match a.kind {
        ExperimentKind::Amplification => {
            let sum = summarize_amplification(&records);
            summary += &format!("cluster node factor slope: {}\n", format_fit(&sum.cluster_node));
            summary += &format!("cluster amplitude factor slope: {}\n", format_fit(&sum.cluster_amplitude));
            summary += &format!("non-cluster node factor slope: {}\n", format_fit(&sum.non_cluster_node));
            summary += &format!("non-cluster amplitude factor slope: {}\n", format_fit(&sum.non_cluster_amplitude));
        }
        ExperimentKind::Phase => {
            let target = if node == 0 { SuccessTarget::AllNodes } else { SuccessTarget::Node(node) };
            let fit = fit_phase_boundary(&records, target);
            let fit = match fit {
                Ok(f) => f,
                Err(e) => {
                    print_summary(output.is_some(), &summary);
                    return Err(e.into());
                }
            };
            summary += &format!(
                "boundary slope: {:.4}\nboundary intercept: {:.4}\nsuccesses: {}/{}\n",
                fit.slope, fit.intercept, fit.successes, fit.points
            );
        }
    }
    print_summary(output.is_some(), &summary);
    Ok(())
}

fn print_summary(to_stdout: bool, summary: &str) {
    if to_stdout {
        print!("{summary}");
    } else {
        eprint!("{summary}");
    }
}

pub fn cmd_worstcase(a: WorstcaseArgs) -> CliResult<()> {
    let mut s = Settings::load(a.common.config.as_deref())?;
    let signal_path = s
        .path("signal", a.signal)?
        .ok_or_else(|| CliError::Parse("missing required parameter signal".into()))?;
    let f: SpikeTrain = read_json(&signal_path)?;
    let geometry = match s.path("geometry", a.geometry)? {
        Some(g) => read_json::<ClusterGeometry>(&g)?,
        None => {
            let p = s.required("p", a.p)?;
            let kappa = s.with_default("kappa", a.kappa, 1usize)?;
            ClusterGeometry::infer(f.nodes(), p, kappa)?
        }
    };
    let epsilon: f64 = s.required("epsilon", a.epsilon)?;
    let omega = s.with_default("omega", a.omega, 1.0)?;
    s.with_default("seed", a.common.seed, 0u64)?;
    let output = s.path("output", a.common.output)?;
    let config = s.finish("worstcase")?;
    let report: WorstCaseReport = worst_case_signal(&f, &geometry, epsilon, omega)?;
    write_report(output.as_deref(), &config, &report)
}

#[derive(Debug, Serialize)]
struct LambdaSample {
    #[serde(flatten)]
    check: AdmissibilityCheck,
    in_admissible_set: bool,
}

#[derive(Debug, Serialize)]
struct DecimationReport {
    geometry: ClusterGeometry,
    omega: f64,
    blowup_range: (f64, f64),
    admissible: IntervalSet,
    admissible_measure: f64,
    lambda: f64,
    samples: Vec<LambdaSample>,
    /// Sampled factors where set membership and the direct check disagree.
    disagreements: usize,
    jacobian: JacobianBoundReport,
    predicted: Vec<ConditionFactors>,
}

pub fn cmd_decimation(a: DecimationArgs) -> CliResult<()> {
    let mut s = Settings::load(a.common.config.as_deref())?;
    let nodes: Vec<f64> = match s.path("signal", a.signal)? {
        Some(path) => read_json::<SpikeTrain>(&path)?.nodes().to_vec(),
        None => {
            let list = s
                .optional::<String>("nodes", a.nodes.map(|v| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")))?
                .ok_or_else(|| CliError::Parse("missing required parameter signal or nodes".into()))?;
            list.split(',')
                .map(|t| t.trim().parse::<f64>().map_err(|e| CliError::Parse(format!("nodes: {t:?}: {e}"))))
                .collect::<CliResult<_>>()?
        }
    };
    let p = s.required("p", a.p)?;
    let kappa = s.with_default("kappa", a.kappa, 1usize)?;
    let geometry = ClusterGeometry::infer(&nodes, p, kappa)?;
    let d = geometry.d;
    let omega = s.with_default("omega", a.omega, (2 * d - 1) as f64 / (2.0 * geometry.h))?;
    let count = s.with_default("lambda_samples", a.lambda_samples, 200usize)?;
    let seed = s.with_default("seed", a.common.seed, 0u64)?;
    let output = s.path("output", a.common.output)?;
    let config = s.finish("decimation")?;

    let admissible = admissible_lambdas(&nodes, &geometry, omega)?;
    let range = blowup_range(d, omega);
    let (lo, hi) = admissible.largest().expect("admissible set is non-empty");
    let lambda = 0.5 * (lo + hi);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..count)
        .map(|_| {
            let l = rng.gen_range(range.0..=range.1);
            Ok(LambdaSample {
                check: check_admissible(&nodes, &geometry, l)?,
                in_admissible_set: admissible.contains(l),
            })
        })
        .collect::<crate::error::Result<Vec<_>>>()?;
    let disagreements = samples.iter().filter(|s| s.in_admissible_set != s.check.passed()).count();
    let z: Vec<Complex64> = nodes
        .iter()
        .map(|&x| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * lambda * x))
        .collect();
    let report = DecimationReport {
        geometry,
        omega,
        blowup_range: range,
        admissible_measure: admissible.measure(),
        admissible,
        lambda,
        samples,
        disagreements,
        jacobian: gautschi_bounds(&z)?,
        predicted: predicted_condition_numbers(&geometry, omega),
    };
    write_report(output.as_deref(), &config, &report)
}
