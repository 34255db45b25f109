//! Admissible blowup factors for a clustered node set: the values of
//! `lambda` for which `exp(2 pi i lambda x_j)` keeps every non-cluster pair
//! well separated on the circle.

use std::f64::consts::PI;

use superres::decimation::{admissible_lambdas, blowup_range, check_admissible, sigma_intervals};
use superres::signal::ClusterGeometry;

fn main() {
    let s = sigma_intervals(1.0, PI / 2.0, (0.0, 1.0));
    println!("lambda in [0, 1] mapping two unit-distance nodes within pi/2: {:?}", s.components());

    let nodes = [-0.004, 0.004, 0.23, 0.41];
    let geometry = ClusterGeometry::infer(&nodes, 2, 1).unwrap();
    let omega = 100.0;
    let (lo, hi) = blowup_range(geometry.d, omega);
    let admissible = admissible_lambdas(&nodes, &geometry, omega).expect("admissible set");
    println!(
        "Omega = {omega}: range [{lo:.3}, {hi:.3}], admissible measure {:.3} in {} pieces",
        admissible.measure(),
        admissible.len()
    );
    for &(a, b) in admissible.components().iter().take(5) {
        println!("  [{a:.4}, {b:.4}]");
    }
    let (a, b) = admissible.largest().unwrap();
    let lambda = 0.5 * (a + b);
    let check = check_admissible(&nodes, &geometry, lambda).unwrap();
    println!(
        "lambda = {lambda:.4}: min non-cluster angle {:.4} (need {:.4}), cluster ratio {:.3}, passed {}",
        check.min_non_cluster_angle,
        1.0 / (geometry.d * geometry.d) as f64,
        check.min_cluster_ratio,
        check.passed()
    );
}
