//! Serial or rayon-backed evaluation with order-preserving results.
//!
//! Every parallel map in the crate goes through [`Execution::map`], which
//! collects results in input order. Reductions are then done serially by the
//! caller so the floating point summation order never depends on scheduling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    Serial,
    #[default]
    Parallel,
}

impl Execution {
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            Execution::Serial => items.iter().map(f).collect(),
            Execution::Parallel => items.par_iter().map(f).collect(),
        }
    }

    pub fn map_range<R, F>(self, len: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        match self {
            Execution::Serial => (0..len).map(f).collect(),
            Execution::Parallel => (0..len).into_par_iter().map(f).collect(),
        }
    }
}
