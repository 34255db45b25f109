//! Acceptance checks. Each criterion prints one `PASS`/`FAIL` line; the test
//! fails at the end if any criterion failed.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use superres::decimation::{
    admissible_lambdas, sigma_component_bounds, blowup_range, check_admissible, gautschi_bounds, sigma_intervals,
};
use superres::experiments::{
    amplification_sweep, phase_transition_sweep, Factor, NodeClass, NodeSelector, Scheme, SuccessTarget, SweepConfig,
    SweepRanges,
};
use superres::experiments::fit_loglog_slope;
use superres::fit::loglog_fit;
use superres::matrix_pencil::{circular_distance, default_pencil_param, mp_recover};
use superres::prony::{prony_map, prony_solve};
use superres::signal::{make_clustered_nodes, ClusterGeometry, SpikeTrain};
use superres::worstcase::{displacement_scaling_probe, worst_case_signal};

const SEED: u64 = 1;

struct Verdict {
    id: u32,
    pass: bool,
    detail: String,
    elapsed: Duration,
}

fn report(id: u32, pass: bool, detail: String, start: Instant) -> Verdict {
    let v = Verdict {
        id,
        pass,
        detail,
        elapsed: start.elapsed(),
    };
    println!(
        "{} criterion {}: {} ({:.1}s)",
        if v.pass { "PASS" } else { "FAIL" },
        v.id,
        v.detail,
        v.elapsed.as_secs_f64()
    );
    v
}

fn within(x: f64, (lo, hi): (f64, f64)) -> bool {
    lo <= x && x <= hi
}

/// Random nodes on the circle with all gaps at least `gap`.
fn spread_nodes(rng: &mut ChaCha8Rng, d: usize, gap: f64) -> Vec<f64> {
    let weights: Vec<f64> = (0..d).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let slack = 1.0 - d as f64 * gap;
    let mut x: f64 = rng.gen_range(0.0..1.0);
    let mut nodes = Vec::with_capacity(d);
    for w in weights {
        let t = x - x.round();
        nodes.push(if t <= -0.5 { t + 1.0 } else { t });
        x += gap + slack * w / total;
    }
    nodes.sort_by(f64::total_cmp);
    nodes
}

fn nearest_error(truth: &[f64], est: &[f64], dist: impl Fn(f64, f64) -> f64) -> f64 {
    truth
        .iter()
        .map(|&x| est.iter().map(|&y| dist(x, y)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}

fn exact_recovery() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst_prony = 0.0f64;
    let mut worst_mp = 0.0f64;
    let mut failures = 0;
    for _ in 0..200 {
        let d = rng.gen_range(1..=5);
        let n = rng.gen_range(2 * d + 2..=64);
        let nodes = spread_nodes(&mut rng, d, 2.0 / n as f64);
        let amps: Vec<Complex64> = (0..d)
            .map(|_| Complex64::from_polar(rng.gen_range(0.1..10.0), rng.gen_range(0.0..2.0 * PI)))
            .collect();
        let f = SpikeTrain::new(amps.clone(), nodes.clone()).unwrap();

        let w: Vec<Complex64> = nodes.iter().map(|x| Complex64::from_polar(1.0, 2.0 * PI * x)).collect();
        match prony_solve(&prony_map(&amps, &w, 2 * d), d) {
            Ok(sol) => {
                let est: Vec<f64> = sol.nodes.iter().map(|z| z.arg() / (2.0 * PI)).collect();
                let mut err = nearest_error(&nodes, &est, circular_distance);
                for (a, wj) in amps.iter().zip(&w) {
                    let l = (0..d).min_by(|&i, &k| (sol.nodes[i] - wj).norm().total_cmp(&(sol.nodes[k] - wj).norm())).unwrap();
                    err = err.max((sol.amplitudes[l] - a).norm());
                }
                worst_prony = worst_prony.max(err);
            }
            Err(_) => failures += 1,
        }

        match mp_recover(&f.sample_spectrum(n, 0.0, 0), d, default_pencil_param(n)) {
            Ok(rec) => {
                let mut err = nearest_error(&nodes, rec.estimate.nodes(), circular_distance);
                for (a, b) in amps.iter().zip(rec.estimate.amplitudes()) {
                    err = err.max((a - b).norm());
                }
                worst_mp = worst_mp.max(err);
            }
            Err(_) => failures += 1,
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = failures == 0 && worst_prony < 1e-8 && worst_mp < 1e-8 && elapsed < 10.0;
    report(
        1,
        pass,
        format!("200 signals, max error Prony {worst_prony:.1e}, MP {worst_mp:.1e}, {failures} solver failures"),
        start,
    )
}

fn amplification_config(scheme: Scheme) -> SweepConfig {
    let mut config = SweepConfig::new(2, 3, 500, scheme, SEED);
    config.ranges = SweepRanges {
        h: (1e-4, 1e-2),
        n: (128, 384),
        epsilon: (1e-10, 1e-1),
    };
    config
}

struct AmplificationSlopes {
    cluster_node: superres::fit::LineFit,
    cluster_amplitude: superres::fit::LineFit,
    non_cluster: Vec<(Factor, Result<superres::fit::LineFit, String>)>,
}

fn amplification_slopes(scheme: Scheme) -> AmplificationSlopes {
    let records = amplification_sweep(&amplification_config(scheme)).unwrap();
    let cluster = NodeSelector::Class(NodeClass::Cluster);
    let non_cluster = NodeSelector::Class(NodeClass::NonCluster);
    AmplificationSlopes {
        cluster_node: fit_loglog_slope(&records, Factor::Node, cluster).unwrap(),
        cluster_amplitude: fit_loglog_slope(&records, Factor::Amplitude, cluster).unwrap(),
        non_cluster: [Factor::Node, Factor::Amplitude]
            .into_iter()
            .map(|f| (f, fit_loglog_slope(&records, f, non_cluster).map_err(|e| e.to_string())))
            .collect(),
    }
}

fn amplification_verdict(id: u32, s: &AmplificationSlopes, extra: Option<(bool, String)>, start: Instant) -> Verdict {
    let mut pass = within(s.cluster_node.slope, (1.7, 2.3)) && within(s.cluster_amplitude.slope, (2.7, 3.3));
    let mut detail = format!(
        "cluster Kx slope {:.3} (sd {:.2}), Ka slope {:.3} (sd {:.2})",
        s.cluster_node.slope, s.cluster_node.residual_std, s.cluster_amplitude.slope, s.cluster_amplitude.residual_std
    );
    for (factor, fit) in &s.non_cluster {
        let name = match factor {
            Factor::Node => "Kx",
            Factor::Amplitude => "Ka",
        };
        match fit {
            Ok(fit) => {
                pass &= within(fit.slope, (-0.3, 0.3));
                detail += &format!(", non-cluster {name} slope {:.3} (n={})", fit.slope, fit.points);
            }
            Err(e) => {
                pass = false;
                detail += &format!(", non-cluster {name} fit failed: {e}");
            }
        }
    }
    if let Some((ok, text)) = extra {
        pass &= ok;
        detail += &format!(", {text}");
    }
    report(id, pass, detail, start)
}

fn phase_boundaries() -> Verdict {
    let start = Instant::now();
    let mut pass = true;
    let mut detail = Vec::new();
    for (p, window) in [(2usize, (-3.5, -2.5)), (3, (-5.5, -4.5))] {
        let mut config = SweepConfig::new(p, 4, 2000, Scheme::S1, SEED);
        config.ranges = SweepRanges {
            h: (1e-3, 2e-2),
            n: (32, 128),
            epsilon: (1e-10, 1e-1),
        };
        match phase_transition_sweep(&config, SuccessTarget::AllNodes) {
            Ok((_, fit)) => {
                pass &= within(fit.slope, window);
                detail.push(format!("p={p} slope {:.3} ({}/{} successes)", fit.slope, fit.successes, fit.points));
            }
            Err(e) => {
                pass = false;
                detail.push(format!("p={p} fit failed: {e}"));
            }
        }
    }
    pass &= start.elapsed().as_secs_f64() < 300.0;
    report(4, pass, detail.join(", "), start)
}

fn non_cluster_boundary() -> Verdict {
    let start = Instant::now();
    let mut config = SweepConfig::new(2, 8, 2000, Scheme::S1, SEED);
    config.ranges = SweepRanges {
        h: (1e-3, 2e-2),
        n: (32, 128),
        epsilon: (1e-3, 1e2),
    };
    match phase_transition_sweep(&config, SuccessTarget::Node(6)) {
        Ok((_, fit)) => report(
            5,
            within(fit.slope, (-0.5, 0.5)),
            format!("node 6 slope {:.3} ({}/{} successes)", fit.slope, fit.successes, fit.points),
            start,
        ),
        Err(e) => report(5, false, format!("fit failed: {e}"), start),
    }
}

fn worst_case_witness() -> Verdict {
    let start = Instant::now();
    let mut pass = true;
    let mut detail = Vec::new();

    let mut worst_match = 0.0f64;
    let mut worst_shift = 0.0f64;
    for p in [2usize, 3] {
        for h in [0.3, 0.1, 0.03] {
            let d = p + 1;
            let nodes = make_clustered_nodes(p, d, h).unwrap();
            let amps: Vec<f64> = (0..d).map(|j| if j % 2 == 0 { 1.0 } else { -1.0 }).collect();
            let f = SpikeTrain::from_real(&amps, nodes).unwrap();
            let g = ClusterGeometry::experiment_layout(p, d, h).unwrap();
            let eps = 1e-4 * (h / 2.0).powi(2 * p as i32 - 1);
            let r = worst_case_signal(&f, &g, eps, 1.0).unwrap();
            let scale = r.moments.iter().map(|m| m.norm()).fold(1.0, f64::max);
            worst_match = worst_match.max(r.moment_match_error / scale);
            worst_shift = worst_shift.max((r.last_moment_delta - eps).abs() / eps);
        }
    }
    pass &= worst_match < 1e-8 && worst_shift < 1e-8;
    detail.push(format!("moment mismatch {worst_match:.1e}, last-moment shift error {worst_shift:.1e}"));

    let hs: Vec<f64> = (0..10).map(|i| 0.3 * 0.6f64.powi(i)).collect();
    for p in [2usize, 3] {
        let probe = displacement_scaling_probe(p, p + 1, &hs, 2.0, 1e-3).unwrap();
        let node = probe.node_fit.unwrap().slope;
        let amp = probe.amplitude_fit.unwrap().slope;
        let (tn, ta) = ((2 * p - 2) as f64, (2 * p - 1) as f64);
        pass &= (node - tn).abs() <= 0.3 && (amp - ta).abs() <= 0.3;
        detail.push(format!("p={p} probe slopes {node:.3}/{amp:.3}"));
    }

    let (p, d, h) = (2, 3, 0.05);
    let f = SpikeTrain::from_real(&[1.0, -1.0, 1.0], make_clustered_nodes(p, d, h).unwrap()).unwrap();
    let g = ClusterGeometry::experiment_layout(p, d, h).unwrap();
    let eps: Vec<f64> = (0..13).map(|i| 1e-10 * 10f64.powf(i as f64 / 4.0)).collect();
    let dev: Vec<f64> = eps.iter().map(|&e| worst_case_signal(&f, &g, e, 1.0).unwrap().spectral_deviation).collect();
    let fit = loglog_fit(&eps, &dev).unwrap();
    pass &= (fit.slope - 1.0).abs() <= 0.05;
    detail.push(format!("spectral deviation slope {:.4} over 3 decades", fit.slope));

    report(6, pass, detail.join(", "), start)
}

fn gautschi_dominance() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut checked = 0;
    let mut violations = 0;
    while checked < 500 {
        let d = rng.gen_range(1..=5);
        let z: Vec<Complex64> = (0..d)
            .map(|_| Complex64::from_polar(rng.gen_range(0.5..=2.0), rng.gen_range(0.0..2.0 * PI)))
            .collect();
        if (0..d).any(|i| (i + 1..d).any(|j| (z[i] - z[j]).norm() < 0.05)) {
            continue;
        }
        checked += 1;
        if !gautschi_bounds(&z).unwrap().dominated() {
            violations += 1;
        }
    }
    report(7, violations == 0, format!("{checked} node sets, {violations} bound violations"), start)
}

fn sigma_components() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);

    let (mut below, mut above, mut too_long) = (0, 0, 0);
    let mut example = None;
    for _ in 0..1000 {
        let delta = rng.gen_range(0.05..20.0);
        let alpha = rng.gen_range(0.0..PI);
        let a = rng.gen_range(-10.0..10.0);
        let len = rng.gen_range(0.0..5.0);
        let s = sigma_intervals(delta, alpha, (a, a + len));
        let (lo, hi, max_len) = sigma_component_bounds(delta, alpha, len);
        below += usize::from(s.len() < lo);
        if s.len() > hi {
            above += 1;
            example.get_or_insert((delta, alpha, a, len, s.len(), hi));
        }
        too_long += s
            .components()
            .iter()
            .filter(|(u, v)| v - u > max_len + 1e-14 * (1.0 + a.abs() + len))
            .count();
    }

    let (mut instances, mut disagreements, mut samples) = (0, 0, 0);
    let mut trials = 0;
    while instances < 200 {
        trials += 1;
        let d = rng.gen_range(3..=5);
        let h = rng.gen_range(1e-3..5e-2);
        let mut nodes = vec![0.0, h];
        for _ in 2..d {
            let last = *nodes.last().unwrap();
            nodes.push(last + rng.gen_range(0.05..0.3));
        }
        let geometry = ClusterGeometry::infer(&nodes, 2, 1).unwrap();
        let omega = (2 * d - 1) as f64 / (2.0 * h) * rng.gen_range(0.5..1.0);
        let Ok(set) = admissible_lambdas(&nodes, &geometry, omega) else {
            continue;
        };
        instances += 1;
        let (lo, hi) = blowup_range(d, omega);
        for _ in 0..200 {
            let l = rng.gen_range(lo..=hi);
            samples += 1;
            if set.contains(l) != check_admissible(&nodes, &geometry, l).unwrap().passed() {
                disagreements += 1;
            }
        }
    }

    let pass = below == 0 && above == 0 && too_long == 0 && disagreements == 0;
    let mut detail = format!(
        "1000 sigma instances: {below} below the lower count, {above} above the upper count, {too_long} over-long components; \
         {instances} admissible sets ({trials} drawn), {disagreements}/{samples} lambda disagreements"
    );
    if let Some((delta, alpha, a, len, got, bound)) = example {
        detail += &format!(
            "; e.g. delta={delta:.4} alpha={alpha:.4} I=[{a:.4}, {:.4}] has {got} components > {bound}",
            a + len
        );
    }
    report(8, pass, detail, start)
}

#[test]
fn acceptance() {
    let mut verdicts = vec![exact_recovery()];

    let start = Instant::now();
    let s1 = amplification_slopes(Scheme::S1);
    let s1_time = start.elapsed().as_secs_f64();
    verdicts.push(amplification_verdict(2, &s1, Some((s1_time < 60.0, format!("sweep under 60 s: {}", s1_time < 60.0))), start));

    let start = Instant::now();
    let s2 = amplification_slopes(Scheme::S2);
    let smaller = s2.cluster_node.residual_std < s1.cluster_node.residual_std
        && s2.cluster_amplitude.residual_std < s1.cluster_amplitude.residual_std;
    verdicts.push(amplification_verdict(
        3,
        &s2,
        Some((smaller, format!("cluster residual sd below S1: {smaller}"))),
        start,
    ));

    verdicts.push(phase_boundaries());
    verdicts.push(non_cluster_boundary());
    verdicts.push(worst_case_witness());
    verdicts.push(gautschi_dominance());
    verdicts.push(sigma_components());

    let failed: Vec<u32> = verdicts.iter().filter(|v| !v.pass).map(|v| v.id).collect();
    println!("{} of {} criteria passed", verdicts.len() - failed.len(), verdicts.len());
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
