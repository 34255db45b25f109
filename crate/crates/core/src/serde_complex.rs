//! Complex numbers on the wire are `[re, im]` pairs.

use num_complex::Complex64;
use serde::{Serialize, Serializer};

pub(crate) fn to_pairs(values: &[Complex64]) -> Vec<[f64; 2]> {
    values.iter().map(|c| [c.re, c.im]).collect()
}

pub(crate) fn from_pairs(pairs: &[[f64; 2]]) -> Vec<Complex64> {
    pairs.iter().map(|p| Complex64::new(p[0], p[1])).collect()
}

pub(crate) mod vec {
    use super::*;

    pub fn serialize<S: Serializer>(values: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        to_pairs(values).serialize(s)
    }
}
