//! Super-resolution of spike trains with clustered nodes.
//!
//! The crate recovers the amplitudes and positions of a finite sum of
//! Dirac spikes from a few low-frequency Fourier samples, and measures how
//! the recovery error degrades as nodes collide:
//!
//! - [`signal`]: the spike-train model, clustered layouts, sampling and
//!   shift/scale normalization.
//! - [`prony`]: the Prony map, Prony's method and the moment recurrence.
//! - [`matrix_pencil`]: the Matrix Pencil estimator.
//! - [`intervals`] and [`decimation`]: angular separation of mapped nodes,
//!   admissible blowup factors and confluent Vandermonde row-norm bounds.
//! - [`worstcase`]: the worst-case moment perturbation and its witnesses.
//! - [`experiments`]: single experiments, Monte Carlo sweeps, slope and
//!   phase-boundary fits, CSV output.
//! - [`fit`]: log-log least squares and logistic phase boundaries.
//! - [`cli`]: the `superres` command line front end.
//!
//! ```
//! use superres::signal::SpikeTrain;
//! use superres::matrix_pencil::{mp_recover, default_pencil_param};
//! use num_complex::Complex64;
//!
//! let f = SpikeTrain::new(
//!     vec![Complex64::new(1.0, 0.0), Complex64::new(0.5, -0.5)],
//!     vec![-0.21, 0.1],
//! ).unwrap();
//! let samples = f.sample_spectrum(16, 0.0, 0);
//! let rec = mp_recover(&samples, 2, default_pencil_param(16)).unwrap();
//! assert!((rec.estimate.nodes()[0] + 0.21).abs() < 1e-10);
//! ```

pub mod cli;
pub mod decimation;
pub mod error;
pub mod experiments;
pub mod fit;
pub mod intervals;
pub mod linalg;
pub mod matrix_pencil;
pub mod prony;
pub mod signal;
pub mod worstcase;

mod serde_complex;

pub use error::{Error, Result};
pub use num_complex::Complex64;
