//! Matrix Pencil recovery of a two-node cluster from noisy samples: the node
//! error grows quickly as the cluster shrinks below the Rayleigh limit `1/N`.

use num_complex::Complex64;
use superres::matrix_pencil::{circular_distance, default_pencil_param, mp_recover};
use superres::signal::SpikeTrain;

fn main() {
    let n = 64;
    let epsilon = 1e-6;
    println!("N = {n}, noise bound {epsilon:e}");
    println!("{:>10} {:>10} {:>12} {:>12}", "gap", "SRF", "node error", "error*N/eps");
    for k in 0..7 {
        let gap = 0.05 * 0.5f64.powi(k);
        let f = SpikeTrain::new(
            vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(-1.0, 0.0)],
            vec![0.1, 0.1 + gap, 0.35],
        )
        .unwrap();
        let samples = f.sample_spectrum(n, epsilon, 42);
        match mp_recover(&samples, 3, default_pencil_param(n)) {
            Ok(rec) => {
                let err = f
                    .nodes()
                    .iter()
                    .map(|&x| {
                        rec.estimate
                            .nodes()
                            .iter()
                            .map(|&y| circular_distance(x, y))
                            .fold(f64::INFINITY, f64::min)
                    })
                    .fold(0.0, f64::max);
                let srf = 1.0 / (n as f64 * gap);
                println!(
                    "{gap:>10.2e} {srf:>10.2} {err:>12.3e} {:>12.3e}",
                    err * n as f64 / samples.actual_noise
                );
            }
            Err(e) => println!("{gap:>10.2e} recovery failed: {e}"),
        }
    }
}
