//! Finite unions of disjoint closed intervals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sorted, pairwise disjoint closed intervals `[a_i, b_i]` with
/// `a_i <= b_i < a_{i+1}`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "IntervalSetJson", into = "IntervalSetJson")]
pub struct IntervalSet {
    intervals: Vec<(f64, f64)>,
}

#[derive(Serialize, Deserialize)]
struct IntervalSetJson {
    intervals: Vec<[f64; 2]>,
}

impl TryFrom<IntervalSetJson> for IntervalSet {
    type Error = Error;

    fn try_from(j: IntervalSetJson) -> Result<Self> {
        IntervalSet::from_intervals(j.intervals.into_iter().map(|[a, b]| (a, b)))
    }
}

impl From<IntervalSet> for IntervalSetJson {
    fn from(s: IntervalSet) -> Self {
        IntervalSetJson {
            intervals: s.intervals.into_iter().map(|(a, b)| [a, b]).collect(),
        }
    }
}

impl IntervalSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn interval(a: f64, b: f64) -> Result<Self> {
        Self::from_intervals([(a, b)])
    }

    /// Union of arbitrary closed intervals; overlapping or touching pieces
    /// are merged.
    pub fn from_intervals<I: IntoIterator<Item = (f64, f64)>>(pieces: I) -> Result<Self> {
        let mut v: Vec<(f64, f64)> = pieces.into_iter().collect();
        for &(a, b) in &v {
            if !a.is_finite() || !b.is_finite() || a > b {
                return Err(Error::InvalidInput(format!("bad interval [{a}, {b}]")));
            }
        }
        v.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(v.len());
        for (a, b) in v {
            match merged.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => merged.push((a, b)),
            }
        }
        Ok(Self { intervals: merged })
    }

    pub fn components(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    /// Number of connected components.
    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Lebesgue measure.
    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| b - a).sum()
    }

    pub fn contains(&self, x: f64) -> bool {
        let idx = self.intervals.partition_point(|&(a, _)| a <= x);
        idx > 0 && x <= self.intervals[idx - 1].1
    }

    pub fn union(&self, other: &Self) -> Self {
        Self::from_intervals(self.intervals.iter().chain(&other.intervals).copied())
            .expect("components of valid sets are valid")
    }

    pub fn intersection(&self, other: &Self) -> Self {
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < self.intervals.len() && j < other.intervals.len() {
            let (a1, b1) = self.intervals[i];
            let (a2, b2) = other.intervals[j];
            let lo = a1.max(a2);
            let hi = b1.min(b2);
            if lo <= hi {
                out.push((lo, hi));
            }
            if b1 < b2 {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self { intervals: out }
    }

    /// Closure of `[a, b] \ self`.
    pub fn complement_in(&self, a: f64, b: f64) -> Self {
        let mut out = Vec::new();
        let mut cursor = a;
        for &(lo, hi) in &self.intervals {
            if hi < a {
                continue;
            }
            if lo > b {
                break;
            }
            if lo > cursor {
                out.push((cursor, lo));
            }
            cursor = cursor.max(hi);
        }
        if cursor < b {
            out.push((cursor, b));
        }
        Self { intervals: out }
    }

    /// Widens every component by `eps` on both sides.
    pub fn padded(&self, eps: f64) -> Self {
        Self::from_intervals(self.intervals.iter().map(|&(a, b)| (a - eps, b + eps)))
            .expect("padding keeps intervals valid")
    }

    /// The longest component (the leftmost one on ties).
    pub fn largest(&self) -> Option<(f64, f64)> {
        self.intervals
            .iter()
            .copied()
            .reduce(|best, x| if x.1 - x.0 > best.1 - best.0 { x } else { best })
    }

    pub fn iter(&self) -> impl Iterator<Item = &(f64, f64)> {
        self.intervals.iter()
    }
}
