//! Computable stand-ins for the complexity function. Each oracle yields the
//! sets `B_{n,k} = {x in {0,1}^n : C(x) <= k}` and guarantees, by
//! construction or by checking, that `|B_{n,k}| < 2^{k+1}`.

mod bset;
mod compressor;
mod explicit;
mod toy;

use std::fmt;

use serde::{Serialize, Serializer};

pub use bset::{bset, BSet, BSetHeader, MAX_ENUMERATION_BITS};
pub use compressor::{lz78_code_length, CompressorOracle};
pub use explicit::ExplicitOracle;
pub use toy::{
    enumerate_programs, program_from_binary, run_program, toy_complexity, Op, RunOutcome, ToyOracle, DEFAULT_STEP_BUDGET,
    MAX_PROGRAM_CAP, MAX_STEP_BUDGET,
};

use crate::bits::Bits;
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Complexity {
    Finite(u32),
    Infinite,
}

impl Complexity {
    pub fn at_most(self, k: u32) -> bool {
        matches!(self, Complexity::Finite(c) if c <= k)
    }
}

impl fmt::Display for Complexity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Complexity::Finite(c) => write!(f, "{c}"),
            Complexity::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Complexity {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Complexity::Finite(c) => s.serialize_u32(*c),
            Complexity::Infinite => s.serialize_str("inf"),
        }
    }
}

pub trait ComplexityOracle: Sync {
    fn name(&self) -> &str;

    fn complexity(&self, x: Bits) -> Result<Complexity>;

    /// The members of `B_{n,k}` when the oracle can list them without a
    /// scan over `{0,1}^n`.
    fn members(&self, _n: u32, _k: u32) -> Result<Option<Vec<Bits>>> {
        Ok(None)
    }

    /// Caps and parameters recorded with every set the oracle produces.
    fn caps(&self) -> serde_json::Value {
        serde_json::Value::Null
    }
}

/// `2^{k+1}` saturated to `u128`.
pub(crate) fn count_bound(k: u32) -> u128 {
    if k >= 127 {
        u128::MAX
    } else {
        1u128 << (k + 1)
    }
}
