//! The `BGEX` binary graph format.
//!
//! ```text
//! magic   "BGEX"
//! version u16 LE = 1
//! n, d, m u32 LE each
//! tag     u8: 0 = table, 1 = linear
//! table:  2^{n+d} entries of ceil(m/8) bytes, little-endian, index x * 2^d + y
//! linear: u32 LE length, then the seed-expansion descriptor as UTF-8 JSON
//! ```

use std::path::Path;

use super::{Backend, ExtractorGraph, MAX_TABLE_BITS};
use crate::error::{Error, Result};
use crate::linear::{Descriptor, SeedExpansion};

pub const BGEX_MAGIC: &[u8; 4] = b"BGEX";
pub const BGEX_VERSION: u16 = 1;

const TAG_TABLE: u8 = 0;
const TAG_LINEAR: u8 = 1;
const HEADER_LEN: usize = 4 + 2 + 12 + 1;

fn format_err(msg: impl Into<String>) -> Error {
    Error::Format(msg.into())
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(len).filter(|e| *e <= self.buf.len()).ok_or_else(|| format_err("truncated payload"))?;
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }
}

impl ExtractorGraph {
    /// Bytes per table entry, `ceil(m / 8)`.
    pub fn entry_bytes(&self) -> usize {
        self.m.div_ceil(8) as usize
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut out = Vec::with_capacity(HEADER_LEN);
        out.extend_from_slice(BGEX_MAGIC);
        out.extend_from_slice(&BGEX_VERSION.to_le_bytes());
        for v in [self.n, self.d, self.m] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        match &self.backend {
            Backend::Table(table) => {
                out.push(TAG_TABLE);
                let width = self.entry_bytes();
                out.reserve(table.len() * width);
                for v in table {
                    out.extend_from_slice(&v.to_le_bytes()[..width]);
                }
            }
            Backend::Linear(family) => {
                out.push(TAG_LINEAR);
                let json = serde_json::to_vec(family.expansion().descriptor())?;
                let len = u32::try_from(json.len()).map_err(|_| format_err("descriptor too long"))?;
                out.extend_from_slice(&len.to_le_bytes());
                out.extend_from_slice(&json);
            }
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { buf: bytes, pos: 0 };
        if r.take(4).map_err(|_| format_err("missing magic"))? != BGEX_MAGIC {
            return Err(format_err("bad magic"));
        }
        let version = u16::from_le_bytes(r.take(2)?.try_into().expect("2 bytes"));
        if version != BGEX_VERSION {
            return Err(format_err(format!("unsupported version {version}")));
        }
        let (n, d, m) = (r.u32()?, r.u32()?, r.u32()?);
        let tag = r.take(1)?[0];
        let graph = match tag {
            TAG_TABLE => {
                if n.saturating_add(d) > MAX_TABLE_BITS {
                    return Err(format_err(format!("table with n + d = {} is too large", n.saturating_add(d))));
                }
                let width = (m.div_ceil(8)) as usize;
                if width == 0 || width > 4 {
                    return Err(format_err(format!("unsupported table width m = {m}")));
                }
                let count = 1usize << (n + d);
                let payload = r.take(count * width)?;
                let table = payload
                    .chunks_exact(width)
                    .map(|c| {
                        let mut word = [0u8; 4];
                        word[..width].copy_from_slice(c);
                        u32::from_le_bytes(word)
                    })
                    .collect();
                ExtractorGraph::from_table(n, d, m, table).map_err(|e| format_err(e.to_string()))?
            }
            TAG_LINEAR => {
                let len = r.u32()? as usize;
                let json = r.take(len)?;
                let descriptor: Descriptor = serde_json::from_slice(json).map_err(|e| format_err(format!("descriptor: {e}")))?;
                if descriptor.m() != m {
                    return Err(format_err(format!("descriptor m = {} disagrees with header m = {m}", descriptor.m())));
                }
                let expansion = SeedExpansion::from_descriptor(descriptor, d)?;
                ExtractorGraph::linear(n, d, expansion)?
            }
            other => return Err(format_err(format!("unknown backend tag {other}"))),
        };
        if r.pos != bytes.len() {
            return Err(format_err("trailing bytes after payload"));
        }
        Ok(graph)
    }

    pub fn write_to(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_bytes()?)?;
        Ok(())
    }

    pub fn read_from(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}
