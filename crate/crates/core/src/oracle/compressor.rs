//! LZ78 code length as a complexity proxy.
//!
//! The code for an `n`-bit string is the Elias gamma code of `n + 1`
//! followed by the LZ78 phrases of the string. The dictionary starts with
//! the empty phrase; each phrase is the longest dictionary entry matching
//! the remaining input plus one more bit, and costs
//! `ceil(log2 |dictionary|) + 1` bits. A final phrase cut short by the end
//! of the input costs its index only. New phrases are added until the
//! dictionary holds `max_dict` entries. The oracle value is the code
//! length minus `offset`, floored at zero.
//!
//! The counting bound is checked for each `(n, k)` by tallying all `2^n`
//! strings; pairs that violate it are refused.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde_json::json;

use super::{count_bound, Complexity, ComplexityOracle, MAX_ENUMERATION_BITS};
use crate::bits::Bits;
use crate::error::{param, Error, Result};
use crate::par::Exec;

fn ceil_log2(v: u64) -> u64 {
    if v <= 1 {
        0
    } else {
        u64::from(64 - (v - 1).leading_zeros())
    }
}

fn elias_gamma_len(v: u64) -> u64 {
    debug_assert!(v >= 1);
    2 * u64::from(63 - v.leading_zeros()) + 1
}

/// Length in bits of the documented code for `x`.
pub fn lz78_code_length(x: Bits, max_dict: usize) -> u64 {
    let mut dict: HashMap<(usize, bool), usize> = HashMap::new();
    let mut size = 1usize;
    let mut total = elias_gamma_len(u64::from(x.len()) + 1);
    let mut node = 0usize;
    let mut open = false;
    for i in 0..x.len() {
        let b = x.bit(i);
        match dict.get(&(node, b)) {
            Some(&next) => {
                node = next;
                open = true;
            }
            None => {
                total += ceil_log2(size as u64) + 1;
                if size < max_dict {
                    dict.insert((node, b), size);
                    size += 1;
                }
                node = 0;
                open = false;
            }
        }
    }
    if open {
        total += ceil_log2(size as u64);
    }
    total
}

#[derive(Clone, Debug)]
pub struct CompressorOracle {
    max_dict: usize,
    offset: u64,
    /// Per length: number of strings with each proxy value.
    histograms: Arc<Mutex<HashMap<u32, Arc<Vec<u64>>>>>,
    exec: Exec,
}

impl CompressorOracle {
    pub fn new(max_dict: usize, offset: u64) -> Result<Self> {
        if max_dict == 0 {
            return Err(param("the dictionary holds at least the empty phrase"));
        }
        Ok(CompressorOracle { max_dict, offset, histograms: Arc::default(), exec: Exec::default() })
    }

    pub fn with_exec(self, exec: Exec) -> Self {
        CompressorOracle { exec, ..self }
    }

    /// Proxy value without the counting check.
    pub fn raw_value(&self, x: Bits) -> u64 {
        lz78_code_length(x, self.max_dict).saturating_sub(self.offset)
    }

    fn histogram(&self, n: u32) -> Result<Arc<Vec<u64>>> {
        if n > MAX_ENUMERATION_BITS {
            return Err(Error::OracleRefusal(format!(
                "counting bound for n = {n} cannot be checked (limit {MAX_ENUMERATION_BITS})"
            )));
        }
        if let Some(h) = self.histograms.lock().expect("poisoned").get(&n) {
            return Ok(h.clone());
        }
        let values = self.exec.map(1usize << n, |x| self.raw_value(Bits::truncating(x as u64, n)));
        let top = values.iter().copied().max().unwrap_or(0) as usize;
        let mut hist = vec![0u64; top + 1];
        for v in values {
            hist[v as usize] += 1;
        }
        let hist = Arc::new(hist);
        self.histograms.lock().expect("poisoned").insert(n, hist.clone());
        Ok(hist)
    }

    /// `|{x in {0,1}^n : value(x) <= k}|`.
    pub fn count(&self, n: u32, k: u32) -> Result<u64> {
        let hist = self.histogram(n)?;
        Ok(hist.iter().take(k as usize + 1).sum())
    }

    /// Ok when `(n, k)` satisfies the counting bound.
    pub fn check_pair(&self, n: u32, k: u32) -> Result<()> {
        let count = self.count(n, k)?;
        if u128::from(count) >= count_bound(k) {
            return Err(Error::OracleRefusal(format!("{count} strings of length {n} have proxy value <= {k}")));
        }
        Ok(())
    }
}

impl ComplexityOracle for CompressorOracle {
    fn name(&self) -> &str {
        "compressor"
    }

    fn complexity(&self, x: Bits) -> Result<Complexity> {
        let v = self.raw_value(x);
        let k = u32::try_from(v).map_err(|_| param("proxy value overflow"))?;
        self.check_pair(x.len(), k)?;
        Ok(Complexity::Finite(k))
    }

    fn members(&self, n: u32, k: u32) -> Result<Option<Vec<Bits>>> {
        self.check_pair(n, k)?;
        let hits = self.exec.map(1usize << n, |x| {
            let x = Bits::truncating(x as u64, n);
            (self.raw_value(x) <= u64::from(k)).then_some(x)
        });
        Ok(Some(hits.into_iter().flatten().collect()))
    }

    fn caps(&self) -> serde_json::Value {
        json!({ "scheme": "lz78-gamma", "max_dict": self.max_dict, "offset": self.offset })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_lengths() {
        assert_eq!(elias_gamma_len(1), 1);
        assert_eq!(elias_gamma_len(2), 3);
        assert_eq!(elias_gamma_len(17), 9);
    }

    #[test]
    fn hand_parse() {
        // 0 | 1 | 00 | 01, gamma(7) has 5 bits.
        let x = Bits::parse_binary("010001").unwrap();
        assert_eq!(lz78_code_length(x, 1 << 20), 5 + 1 + 2 + 3 + 3);
        // A trailing partial phrase costs ceil(log2 5) = 3; gamma(8) has 7 bits.
        let y = Bits::parse_binary("0100010").unwrap();
        assert_eq!(lz78_code_length(y, 1 << 20), 7 + 1 + 2 + 3 + 3 + 3);
        // With a one-entry dictionary every bit is its own phrase.
        assert_eq!(lz78_code_length(x, 1), 5 + 6);
    }

    #[test]
    fn zeros_compress_below_length() {
        for n in [48u32, 64] {
            assert!(lz78_code_length(Bits::zeros(n), 1 << 20) < u64::from(n), "n = {n}");
        }
    }

    #[test]
    fn large_offset_is_refused() {
        let o = CompressorOracle::new(1 << 12, 1000).unwrap();
        assert!(matches!(o.complexity(Bits::zeros(8)), Err(Error::OracleRefusal(_))));
        let honest = CompressorOracle::new(1 << 12, 0).unwrap();
        assert!(honest.complexity(Bits::zeros(8)).is_ok());
    }
}
