//! The worst-case perturbation of a two-node cluster: moments match up to
//! order `2p - 2`, the next one moves by exactly `epsilon`, and the cluster
//! nodes move by far more than `epsilon`.

use superres::signal::{make_clustered_nodes, ClusterGeometry, SpikeTrain};
use superres::worstcase::{displacement_scaling_probe, worst_case_signal};

fn main() {
    let (p, d, h) = (2, 3, 0.05);
    let nodes = make_clustered_nodes(p, d, h).unwrap();
    let f = SpikeTrain::from_real(&[1.0, -1.0, 1.0], nodes).unwrap();
    let geometry = ClusterGeometry::experiment_layout(p, d, h).unwrap();

    for epsilon in [1e-9, 1e-7, 1e-5] {
        let r = worst_case_signal(&f, &geometry, epsilon, 1.0).expect("perturbation");
        println!(
            "eps {epsilon:.0e}: moment mismatch {:.1e}, last moment shift {:.6e}, node shift {:.3e}, amplitude shift {:.3e}, spectral deviation {:.3e}",
            r.moment_match_error, r.last_moment_delta, r.node_displacement, r.amplitude_displacement, r.spectral_deviation
        );
    }
    println!("perturbed signal: {}", serde_json::to_string(&worst_case_signal(&f, &geometry, 1e-5, 1.0).unwrap().perturbed).unwrap());

    let hs: Vec<f64> = (0..10).map(|i| 0.3 * 0.6f64.powi(i)).collect();
    for p in [2, 3] {
        let probe = displacement_scaling_probe(p, p + 1, &hs, 2.0, 1e-3).expect("probe");
        println!(
            "p = {p}: node factor slope {:.3} (expected {}), amplitude factor slope {:.3} (expected {})",
            probe.node_fit.unwrap().slope,
            2 * p - 2,
            probe.amplitude_fit.unwrap().slope,
            2 * p - 1
        );
    }
}
