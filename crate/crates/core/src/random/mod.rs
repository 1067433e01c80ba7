//! Probabilistic construction of balanced graphs: seeded random tables,
//! exact and Monte-Carlo extractor verification, the minimum right-degree
//! check, rejection-sampling search, and the coupon-collector bound that
//! governs the degree condition.

mod combinations;
mod coupon;
mod search;
mod verify;

pub use combinations::{binomial, unrank_combination, Combinations};
pub use coupon::{newman_shepp_bound, simulate_coupon_collector, CouponStats};
pub use search::{
    search_balanced, search_balanced_with, verify_balanced, AttemptDiagnostic, BalancedGraph, SearchConfig,
    SearchFailure, SearchOutcome,
};
pub use verify::{
    stat_distance, verify_extractor_exact, verify_extractor_sampled, verify_min_degree, ReportKind, VerifyReport,
};

use crate::bits::mask;
use crate::error::{capacity, Result};
use crate::graph::{ExtractorGraph, MAX_RIGHT_BITS, MAX_TABLE_BITS, MAX_TABLE_OUTPUT_BITS};
use crate::par::Exec;
use crate::prng;

/// Limits on exhaustive work. Exceeding any of them is a capacity error,
/// never a silent switch to sampling.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    /// Largest number of left subsets an exact extractor check may visit.
    pub max_subsets: u128,
    /// Largest `k - a` whose right side may be enumerated.
    pub max_right_bits: u32,
    pub exec: Exec,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_subsets: 10_000_000, max_right_bits: MAX_RIGHT_BITS, exec: Exec::default() }
    }
}

impl Budget {
    pub fn with_exec(self, exec: Exec) -> Self {
        Budget { exec, ..self }
    }
}

/// Table whose entry `j = x * 2^d + y` is `word(seed, j)` masked to `m`
/// bits (see [`crate::prng`]).
pub fn sample_table(n: u32, d: u32, m: u32, seed: u64) -> Result<ExtractorGraph> {
    if n + d > MAX_TABLE_BITS {
        return Err(capacity(format!("n + d = {} exceeds the table capacity {MAX_TABLE_BITS}", n + d)));
    }
    if m > MAX_TABLE_OUTPUT_BITS {
        return Err(capacity(format!("m = {m} exceeds {MAX_TABLE_OUTPUT_BITS}")));
    }
    let table = (0..1u64 << (n + d)).map(|j| (prng::word(seed, j) & mask(m)) as u32).collect();
    ExtractorGraph::from_table(n, d, m, table)
}
