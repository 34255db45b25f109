//! Noiseless recovery of a spike train with Prony's method (from `2d`
//! moments) and with the Matrix Pencil method (from `N` Fourier samples).

use num_complex::Complex64;
use superres::matrix_pencil::{default_pencil_param, mp_recover};
use superres::prony::prony_solve;
use superres::signal::SpikeTrain;

fn main() {
    let f = SpikeTrain::new(
        vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 2.0),
            Complex64::new(-0.7, 0.3),
        ],
        vec![-0.31, 0.02, 0.27],
    )
    .expect("valid signal");
    let d = f.len();
    println!("true nodes      {:?}", f.nodes());

    // Prony: the samples m_k are the moments of the nodes z_j = exp(2 pi i x_j).
    let moments = f.clean_samples(2 * d);
    let prony = prony_solve(&moments, d).expect("Prony solve");
    let prony_nodes: Vec<f64> = prony.nodes.iter().map(|z| z.arg() / (2.0 * std::f64::consts::PI)).collect();
    println!("Prony nodes     {prony_nodes:?}");
    println!("Prony amplitudes {:?}", prony.amplitudes);

    let n = 16;
    let samples = f.sample_spectrum(n, 0.0, 0);
    let rec = mp_recover(&samples, d, default_pencil_param(n)).expect("MP recovery");
    println!("MP nodes        {:?}", rec.estimate.nodes());
    println!("MP amplitudes   {:?}", rec.estimate.amplitudes());
    println!("singular values of H_up: {:?}", rec.sigma_a);

    let err = f
        .nodes()
        .iter()
        .zip(rec.estimate.nodes())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    println!("max MP node error {err:.2e}");
}
