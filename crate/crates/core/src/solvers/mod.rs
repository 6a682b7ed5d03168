//! Classical minimizers: exhaustive enumeration and simulated annealing.

mod anneal;
pub(crate) mod energy;
mod exact;

use std::collections::BTreeMap;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::poly::Assignment;

pub use anneal::{sample_sa, sample_sa_vars, AnnealSchedule};
pub use exact::{
    enumerate_exact, enumerate_exact_vars, enumerate_lowest, exact_histogram, exact_minimum, DEFAULT_VAR_LIMIT,
};

/// An assignment with its energy in both conventions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sample {
    pub assignment: Assignment,
    #[serde(with = "crate::io::decimal")]
    pub energy_full: BigInt,
    /// `energy_full` minus the polynomial's constant term.
    #[serde(with = "crate::io::decimal")]
    pub energy_paper: BigInt,
    pub occurrences: u64,
}

impl Sample {
    pub(crate) fn new(assignment: Assignment, energy_full: BigInt, offset: &BigInt, occurrences: u64) -> Self {
        let energy_paper = &energy_full - offset;
        Sample {
            assignment,
            energy_full,
            energy_paper,
            occurrences,
        }
    }
}

/// Occurrence counts grouped by paper-convention energy, lowest first.
pub fn histogram(samples: &[Sample]) -> BTreeMap<BigInt, u64> {
    let mut h = BTreeMap::new();
    for s in samples {
        *h.entry(s.energy_paper.clone()).or_insert(0) += s.occurrences;
    }
    h
}
