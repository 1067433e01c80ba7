//! Fixed-length bit strings of at most 64 bits.
//!
//! Coordinate `i` of a string is bit `i` of the backing integer, and it is
//! also character `i` of the written binary form: `"1011"` has bits
//! `0, 2, 3` set. The prefix of length `j` is therefore the low `j` bits.
//! The hexadecimal form is the ordinary big-endian rendering of the backing
//! integer, zero-padded to `ceil(len / 4)` digits.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{shape, Result};

pub const MAX_BITS: u32 = 64;

#[inline]
pub fn mask(len: u32) -> u64 {
    if len >= 64 {
        u64::MAX
    } else {
        (1u64 << len) - 1
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bits {
    len: u32,
    value: u64,
}

impl Bits {
    pub fn new(value: u64, len: u32) -> Result<Self> {
        if len > MAX_BITS {
            return Err(shape(format!("bit strings are limited to {MAX_BITS} bits, got {len}")));
        }
        if value & !mask(len) != 0 {
            return Err(shape(format!("value {value:#x} does not fit in {len} bits")));
        }
        Ok(Bits { len, value })
    }

    /// Keeps the low `len` bits of `value`.
    pub fn truncating(value: u64, len: u32) -> Self {
        let len = len.min(MAX_BITS);
        Bits { len, value: value & mask(len) }
    }

    pub fn zeros(len: u32) -> Self {
        Bits::truncating(0, len)
    }

    pub fn unit(i: u32, len: u32) -> Result<Self> {
        if i >= len {
            return Err(shape(format!("unit vector index {i} outside length {len}")));
        }
        Bits::new(1u64 << i, len)
    }

    #[inline]
    pub fn value(self) -> u64 {
        self.value
    }

    #[inline]
    pub fn len(self) -> u32 {
        self.len
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn bit(self, i: u32) -> bool {
        i < self.len && (self.value >> i) & 1 == 1
    }

    pub fn prefix(self, len: u32) -> Result<Self> {
        if len > self.len {
            return Err(shape(format!("prefix of length {len} from a {}-bit string", self.len)));
        }
        Ok(Bits::truncating(self.value, len))
    }

    pub fn xor(self, other: Bits) -> Result<Self> {
        self.expect_len(other.len)?;
        Ok(Bits { len: self.len, value: self.value ^ other.value })
    }

    pub fn expect_len(self, len: u32) -> Result<()> {
        if self.len != len {
            return Err(shape(format!("expected a {len}-bit string, got {} bits", self.len)));
        }
        Ok(())
    }

    pub fn parse_binary(s: &str) -> Result<Self> {
        let s = s.trim();
        let len = u32::try_from(s.len()).map_err(|_| shape("binary string too long"))?;
        if len > MAX_BITS {
            return Err(shape(format!("binary string longer than {MAX_BITS} bits")));
        }
        let mut value = 0u64;
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => value |= 1 << i,
                _ => return Err(shape(format!("invalid binary digit {c:?}"))),
            }
        }
        Ok(Bits { len, value })
    }

    pub fn to_binary(self) -> String {
        (0..self.len).map(|i| if self.bit(i) { '1' } else { '0' }).collect()
    }

    pub fn parse_hex(s: &str, len: u32) -> Result<Self> {
        let s = s.trim();
        let s = s.strip_prefix("0x").unwrap_or(s);
        let value = u64::from_str_radix(s, 16).map_err(|e| shape(format!("bad hex {s:?}: {e}")))?;
        Bits::new(value, len)
    }

    pub fn to_hex(self) -> String {
        let digits = self.len.div_ceil(4).max(1) as usize;
        format!("{:0digits$x}", self.value)
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bits({})", self.to_binary())
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_binary())
    }
}

impl Serialize for Bits {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_binary())
    }
}

impl<'de> Deserialize<'de> for Bits {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Bits::parse_binary(&s).map_err(serde::de::Error::custom)
    }
}
