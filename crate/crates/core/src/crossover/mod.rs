//! Crossover from an approximate regularization solution to an exactly
//! complementary point: LPEC projection, branch NLP solves and the
//! complementarity active-set method.

mod active_set;
mod bnlp;
mod lpec;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use active_set::{
    active_set_method, crossover_driver, solve_with_crossover, ActiveSetOutcome, CrossoverOutcome, CrossoverRow,
};
pub use bnlp::{solve_bnlp, BnlpSolution};
pub use lpec::{proj_lpec, solve_lpec, solve_lpec_enumerate, solve_lpec_relaxed, LpecInstance, LpecSolution};

/// Partition of the complementarity pairs: `x2_i = 0` on `i1`, `x1_i = 0`
/// on `i2`. Both lists are sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Branch {
    pub i1: Vec<usize>,
    pub i2: Vec<usize>,
}

impl Branch {
    /// `in_i1[i]` selects the side of pair `i`.
    pub fn from_flags(in_i1: &[bool]) -> Self {
        let mut b = Branch {
            i1: Vec::new(),
            i2: Vec::new(),
        };
        for (i, &f) in in_i1.iter().enumerate() {
            if f {
                b.i1.push(i)
            } else {
                b.i2.push(i)
            }
        }
        b
    }

    /// Naive identification: `i ∈ i1` iff `x1_i >= x2_i` (ties go to `i1`).
    pub fn naive(x1: &[f64], x2: &[f64]) -> Self {
        let flags: Vec<bool> = x1.iter().zip(x2).map(|(a, b)| a >= b).collect();
        Self::from_flags(&flags)
    }

    pub fn n_cc(&self) -> usize {
        self.i1.len() + self.i2.len()
    }

    /// Disjoint and exhaustive over `0..n_cc`.
    pub fn is_partition(&self, n_cc: usize) -> bool {
        let mut seen = vec![false; n_cc];
        for &i in self.i1.iter().chain(&self.i2) {
            if i >= n_cc || seen[i] {
                return false;
            }
            seen[i] = true;
        }
        seen.into_iter().all(|s| s)
    }

    pub fn in_i1(&self, i: usize) -> bool {
        self.i1.binary_search(&i).is_ok()
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "I1={:?} I2={:?}", self.i1, self.i2)
    }
}
