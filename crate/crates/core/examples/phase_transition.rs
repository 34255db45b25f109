//! Phase transition of Matrix Pencil recovery: the largest noise level at
//! which every node is recovered scales like `SRF^{1-2p}`, while a far
//! non-cluster node has an SRF-independent threshold.
//!
//! ```text
//! cargo run --release --example phase_transition -- [trials] [seed]
//! ```

use superres::experiments::{phase_transition_sweep, Scheme, SuccessTarget, SweepConfig, SweepRanges};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let trials = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(2000);
    let seed = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(1);

    for p in [2usize, 3] {
        let mut config = SweepConfig::new(p, 4, trials, Scheme::S1, seed);
        config.ranges = SweepRanges {
            h: (1e-3, 2e-2),
            n: (32, 128),
            epsilon: (1e-10, 1e-1),
        };
        let (_, fit) = phase_transition_sweep(&config, SuccessTarget::AllNodes).expect("fit");
        println!(
            "d = 4, p = {p}: boundary slope {:.3} (expected {}), {} of {} trials succeeded",
            fit.slope,
            1 - 2 * p as i64,
            fit.successes,
            fit.points
        );
    }

    let mut config = SweepConfig::new(2, 8, trials, Scheme::S1, seed);
    config.ranges = SweepRanges {
        h: (1e-3, 2e-2),
        n: (32, 128),
        epsilon: (1e-3, 1e2),
    };
    let (_, fit) = phase_transition_sweep(&config, SuccessTarget::Node(6)).expect("fit");
    println!(
        "d = 8, p = 2, node 6: boundary slope {:.3} (expected about 0), {} of {} trials succeeded",
        fit.slope, fit.successes, fit.points
    );
}
