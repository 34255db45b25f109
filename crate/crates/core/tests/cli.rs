//! End-to-end runs of the `superres` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn superres(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_superres")).args(args).output().expect("binary runs")
}

fn json_stdout(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

#[test]
fn recover_decimated_pair() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "s.json", r#"{"values": [[2,0],[-1,0],[-1,0],[2,0],[-1,0]]}"#);
    let v = json_stdout(&superres(&["recover", "-i", &input, "-d", "2"]));
    let nodes = floats(&v["nodes"]);
    assert!((nodes[0] + 1.0 / 3.0).abs() < 1e-10 && (nodes[1] - 1.0 / 3.0).abs() < 1e-10, "{nodes:?}");
    for a in v["amplitudes"].as_array().unwrap() {
        let a = floats(a);
        assert!((a[0] - 1.0).abs() < 1e-10 && a[1].abs() < 1e-10);
    }
    assert_eq!(v["L"], 3);
    assert_eq!(v["config"]["command"], "recover");
}

#[test]
fn recover_single_spike_writes_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let values: Vec<String> = (0..8)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * 0.2 * k as f64;
            format!("[{},{}]", t.cos(), t.sin())
        })
        .collect();
    let input = write(dir.path(), "s.json", &format!(r#"{{"values": [{}]}}"#, values.join(",")));
    let out_path = dir.path().join("r.json");
    let out = superres(&["recover", "-i", &input, "-d", "1", "-o", out_path.to_str().unwrap()]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&fs::read_to_string(out_path).unwrap()).unwrap();
    assert!((floats(&v["nodes"])[0] - 0.2).abs() < 1e-10);
}

#[test]
fn parse_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", "{not json");
    assert_eq!(superres(&["recover", "-i", &bad, "-d", "2"]).status.code(), Some(2));
    assert_eq!(superres(&["recover", "--bogus"]).status.code(), Some(2));
    assert_eq!(superres(&["frobnicate"]).status.code(), Some(2));
    let cfg = write(dir.path(), "c.toml", "no_such_key = 3\n");
    assert_eq!(superres(&["experiment", "amplification", "--config", &cfg]).status.code(), Some(2));
}

#[test]
fn recover_needs_more_than_2d_samples() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "s.json", r#"{"values": [[2,0],[-1,0],[-1,0],[2,0]]}"#);
    let code = superres(&["recover", "-i", &input, "-d", "2"]).status.code();
    assert_eq!(code, Some(2));
}

#[test]
fn experiment_single_trial_csv() {
    let out = superres(&["experiment", "amplification", "--trials", "1", "-p", "2", "-d", "3", "--seed", "77"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l == "# seed=77"), "{text}");
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[0].starts_with("scheme,p,d,h,N,eps_req,eps0,srf,node_index,node_class,e,succ,Kx,Ka,seed"));
}

#[test]
fn experiment_json_lines() {
    let out = superres(&["experiment", "amplification", "--trials", "2", "--format", "json", "--scheme", "S2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    // a config header followed by one line per node of each trial
    assert_eq!(lines.len(), 1 + 2 * 3);
    assert_eq!(lines[0]["config"]["scheme"], "S2");
    assert!(lines[1..].iter().all(|l| l["scheme"] == "S2"));
}

#[test]
fn phase_with_too_few_trials_is_degenerate() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("p.csv");
    let out = superres(&["experiment", "phase", "--trials", "2", "-o", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    assert!(fs::read_to_string(csv).unwrap().contains("scheme,p,d"));
}

#[test]
fn experiment_output_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "trials = 6\nscheme = \"S1\"\nh-max = 0.01\nseed = 5\n");
    let a = superres(&["experiment", "amplification", "--config", &cfg]);
    let b = superres(&["experiment", "amplification", "--config", &cfg]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.contains("# seed=5") && text.contains("# h_max=0.01"));
    let c = superres(&["experiment", "amplification", "--config", &cfg, "--seed", "6"]);
    assert!(String::from_utf8(c.stdout).unwrap().contains("# seed=6"));
}

#[test]
fn worstcase_zero_epsilon_is_identity() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "f.json", r#"{"amplitudes": [[1,0],[-1,0],[1,0]], "nodes": [0, 0.01, 0.3]}"#);
    let v = json_stdout(&superres(&["worstcase", "--signal", &f, "-p", "2", "-e", "0"]));
    assert_eq!(floats(&v["perturbed"]["nodes"]), vec![0.0, 0.01, 0.3]);
    assert_eq!(v["spectral_deviation"].as_f64().unwrap(), 0.0);
}

#[test]
fn worstcase_small_epsilon_matches_moments() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "f.json", r#"{"amplitudes": [[1,0],[-1,0],[1,0]], "nodes": [0, 0.01, 0.3]}"#);
    let v = json_stdout(&superres(&["worstcase", "--signal", &f, "-p", "2", "-e", "1e-9"]));
    assert!(v["moment_match_error"].as_f64().unwrap() < 1e-12);
    assert!((v["last_moment_delta"].as_f64().unwrap() - 1e-9).abs() < 1e-15);
    assert_eq!(floats(&v["perturbed"]["nodes"])[2], 0.3);
}

#[test]
fn worstcase_epsilon_too_large_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "f.json", r#"{"amplitudes": [[1,0],[-1,0],[1,0]], "nodes": [0, 0.01, 0.3]}"#);
    assert_eq!(superres(&["worstcase", "--signal", &f, "-p", "2", "-e", "1e3"]).status.code(), Some(3));
}

#[test]
fn decimation_of_a_lone_cluster_admits_everything() {
    let v = json_stdout(&superres(&["decimation", "--nodes", "0,0.2", "-p", "2"]));
    let range = floats(&v["blowup_range"]);
    let comps = v["admissible"]["intervals"].as_array().unwrap();
    assert_eq!(comps.len(), 1);
    assert_eq!(floats(&comps[0]), range);
    assert_eq!(v["disagreements"], 0);
}

#[test]
fn decimation_of_clustered_nodes_agrees_with_direct_checks() {
    let v = json_stdout(&superres(&["decimation", "--nodes", "-0.3,0,0.01", "-p", "2", "--kappa", "2"]));
    assert_eq!(v["disagreements"], 0);
    assert!(v["admissible_measure"].as_f64().unwrap() > 0.0);
    assert!(v["jacobian"].is_object());
    assert_eq!(v["samples"].as_array().unwrap().len(), 200);
}

#[test]
fn version_prints_crate_version() {
    let out = superres(&["version"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), format!("superres {}", env!("CARGO_PKG_VERSION")));
}
