use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{count_bound, ComplexityOracle};
use crate::bits::Bits;
use crate::error::{capacity, shape, Error, Result};

/// Largest `n` for which `{0,1}^n` is scanned.
pub const MAX_ENUMERATION_BITS: u32 = 24;

/// Sorted, duplicate-free set of `n`-bit strings standing in for
/// `{x : C(x) <= k}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BSet {
    pub n: u32,
    pub k: u32,
    pub source: String,
    pub caps: serde_json::Value,
    members: Vec<Bits>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BSetHeader {
    pub n: u32,
    pub k: u32,
    pub source: String,
    #[serde(default)]
    pub caps: serde_json::Value,
    pub size: u64,
    /// `floor(log2 size)`, absent for the empty set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<u32>,
}

impl BSet {
    /// A set supplied directly; no counting bound is imposed.
    pub fn explicit(n: u32, k: u32, members: impl IntoIterator<Item = Bits>) -> Result<Self> {
        Self::build(n, k, "explicit".into(), serde_json::Value::Null, members.into_iter().collect())
    }

    fn build(n: u32, k: u32, source: String, caps: serde_json::Value, mut members: Vec<Bits>) -> Result<Self> {
        if let Some(x) = members.iter().find(|x| x.len() != n) {
            return Err(shape(format!("member {x} is not {n} bits long")));
        }
        members.sort_unstable();
        members.dedup();
        Ok(BSet { n, k, source, caps, members })
    }

    pub fn members(&self) -> &[Bits] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, x: Bits) -> bool {
        self.members.binary_search(&x).is_ok()
    }

    /// `floor(log2 |B|)`.
    pub fn s(&self) -> Option<u32> {
        (!self.members.is_empty()).then(|| 63 - (self.members.len() as u64).leading_zeros())
    }

    pub fn header(&self) -> BSetHeader {
        BSetHeader {
            n: self.n,
            k: self.k,
            source: self.source.clone(),
            caps: self.caps.clone(),
            size: self.members.len() as u64,
            s: self.s(),
        }
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        serde_json::to_writer(&mut out, &self.header())?;
        writeln!(out)?;
        for x in &self.members {
            writeln!(out, "{}", x.to_hex())?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(input: R) -> Result<Self> {
        let mut lines = BufReader::new(input).lines();
        let first = lines.next().ok_or_else(|| Error::Format("empty B-set file".into()))??;
        let header: BSetHeader = serde_json::from_str(&first)?;
        let mut members = Vec::new();
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            members.push(Bits::parse_hex(&line, header.n)?);
        }
        let set = Self::build(header.n, header.k, header.source, header.caps, members)?;
        if set.len() as u64 != header.size {
            return Err(Error::Format(format!("header announces {} members, file has {}", header.size, set.len())));
        }
        Ok(set)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        self.write_to(&mut out)?;
        out.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(File::open(path)?)
    }
}

/// `B_{n,k}` of `oracle`, checked against `|B| < 2^{k+1}`.
pub fn bset(n: u32, k: u32, oracle: &dyn ComplexityOracle) -> Result<BSet> {
    let members = match oracle.members(n, k)? {
        Some(m) => m,
        None => {
            if n > MAX_ENUMERATION_BITS {
                return Err(capacity(format!("scanning 2^{n} strings exceeds 2^{MAX_ENUMERATION_BITS}")));
            }
            let mut out = Vec::new();
            for x in 0..1u64 << n {
                let x = Bits::truncating(x, n);
                if oracle.complexity(x)?.at_most(k) {
                    out.push(x);
                }
            }
            out
        }
    };
    let set = BSet::build(n, k, oracle.name().to_string(), oracle.caps(), members)?;
    if set.len() as u128 >= count_bound(k) {
        return Err(Error::Invariant(format!("{} strings from {} at (n, k) = ({n}, {k})", set.len(), oracle.name())));
    }
    Ok(set)
}
