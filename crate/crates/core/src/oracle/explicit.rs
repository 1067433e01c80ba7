use std::collections::{BTreeMap, BTreeSet};

use serde_json::json;

use super::{count_bound, Complexity, ComplexityOracle};
use crate::bits::Bits;
use crate::error::{Error, Result};

/// Answers from injected sets `(n, k) -> B_{n,k}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExplicitOracle {
    sets: BTreeMap<(u32, u32), BTreeSet<Bits>>,
    monotone: bool,
}

impl ExplicitOracle {
    /// Rejects sets with `2^{k+1}` or more members or members of the wrong
    /// length. When `monotone` is set, `B_{n,k}` must be contained in
    /// `B_{n,k+1}` whenever both are given.
    pub fn new(sets: BTreeMap<(u32, u32), BTreeSet<Bits>>, monotone: bool) -> Result<Self> {
        for (&(n, k), members) in &sets {
            if let Some(x) = members.iter().find(|x| x.len() != n) {
                return Err(Error::Invariant(format!("{x} injected at n = {n}")));
            }
            if members.len() as u128 >= count_bound(k) {
                return Err(Error::Invariant(format!(
                    "{} members at (n, k) = ({n}, {k}) reach 2^{}",
                    members.len(),
                    k + 1
                )));
            }
            if monotone {
                if let Some(next) = sets.get(&(n, k + 1)) {
                    if !members.is_subset(next) {
                        return Err(Error::Invariant(format!("B_({n},{k}) is not contained in B_({n},{})", k + 1)));
                    }
                }
            }
        }
        Ok(ExplicitOracle { sets, monotone })
    }
}

impl ComplexityOracle for ExplicitOracle {
    fn name(&self) -> &str {
        "explicit"
    }

    /// Least `k` whose injected set contains `x`.
    fn complexity(&self, x: Bits) -> Result<Complexity> {
        Ok(self
            .sets
            .range((x.len(), 0)..=(x.len(), u32::MAX))
            .find(|(_, members)| members.contains(&x))
            .map_or(Complexity::Infinite, |(&(_, k), _)| Complexity::Finite(k)))
    }

    /// The injected set itself when present; otherwise every injected string
    /// of length `n` whose complexity is at most `k`.
    fn members(&self, n: u32, k: u32) -> Result<Option<Vec<Bits>>> {
        if let Some(members) = self.sets.get(&(n, k)) {
            return Ok(Some(members.iter().copied().collect()));
        }
        let union: BTreeSet<Bits> = self.sets.range((n, 0)..=(n, k)).flat_map(|(_, m)| m.iter().copied()).collect();
        Ok(Some(union.into_iter().collect()))
    }

    fn caps(&self) -> serde_json::Value {
        json!({ "monotone": self.monotone, "sets": self.sets.len() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(n: u32, xs: &[u64]) -> BTreeSet<Bits> {
        xs.iter().map(|&x| Bits::truncating(x, n)).collect()
    }

    #[test]
    fn passthrough() {
        let o = ExplicitOracle::new(BTreeMap::from([((4, 2), set(4, &[0, 15]))]), false).unwrap();
        assert_eq!(o.members(4, 2).unwrap().unwrap(), vec![Bits::zeros(4), Bits::truncating(15, 4)]);
        assert_eq!(o.complexity(Bits::zeros(4)).unwrap(), Complexity::Finite(2));
        assert_eq!(o.complexity(Bits::truncating(3, 4)).unwrap(), Complexity::Infinite);
    }

    #[test]
    fn counting_boundary() {
        assert!(ExplicitOracle::new(BTreeMap::from([((4, 1), set(4, &[0, 1, 2]))]), false).is_ok());
        assert!(ExplicitOracle::new(BTreeMap::from([((4, 1), set(4, &[0, 1, 2, 3]))]), false).is_err());
    }

    #[test]
    fn monotone_check() {
        let sets = BTreeMap::from([((4, 1), set(4, &[0, 1])), ((4, 2), set(4, &[1, 2]))]);
        assert!(ExplicitOracle::new(sets.clone(), false).is_ok());
        assert!(ExplicitOracle::new(sets, true).is_err());
    }
}
