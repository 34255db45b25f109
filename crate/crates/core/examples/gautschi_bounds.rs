//! Row-norm bounds for the inverse confluent Vandermonde matrix, compared
//! with the measured norms as two nodes approach each other.

use num_complex::Complex64;
use superres::decimation::gautschi_bounds;

fn main() {
    println!("{:>8} {:>12} {:>12} {:>12} {:>12} {:>10}", "gap", "|A_1|", "bound", "|B_1|", "bound", "cond");
    for k in 0..6 {
        let gap = 0.5 * 0.5f64.powi(k);
        let z = [
            Complex64::from_polar(1.0, 0.0),
            Complex64::from_polar(1.0, gap),
            Complex64::from_polar(1.0, 2.5),
        ];
        let r = gautschi_bounds(&z).expect("distinct nodes");
        println!(
            "{gap:>8.4} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e} {:>10.2e}",
            r.amplitude_row_norm[0], r.amplitude_row_bound[0], r.node_row_norm[0], r.node_row_bound[0], r.condition_number
        );
        assert!(r.dominated());
    }
}
