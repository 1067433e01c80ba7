use std::fmt;

use crate::bits::{mask, Bits, MAX_BITS};
use crate::error::{shape, Result};

/// Dense `GF(2)` matrix with at most 64 columns; row `i` is one word whose
/// bit `j` is entry `(i, j)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Gf2Matrix {
    cols: u32,
    rows: Vec<u64>,
}

impl Gf2Matrix {
    pub fn zeros(rows: usize, cols: u32) -> Result<Self> {
        Self::from_rows(vec![0; rows], cols)
    }

    pub fn identity(n: u32) -> Result<Self> {
        Self::from_rows((0..n).map(|i| 1u64 << i).collect(), n)
    }

    pub fn from_rows(rows: Vec<u64>, cols: u32) -> Result<Self> {
        if cols > MAX_BITS {
            return Err(shape(format!("matrices are limited to {MAX_BITS} columns")));
        }
        if let Some(r) = rows.iter().find(|r| **r & !mask(cols) != 0) {
            return Err(shape(format!("row {r:#x} wider than {cols} columns")));
        }
        Ok(Gf2Matrix { cols, rows })
    }

    /// Rows from binary strings (character `j` is column `j`).
    pub fn parse(rows: &[&str]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len() as u32);
        let words = rows
            .iter()
            .map(|r| {
                let b = Bits::parse_binary(r)?;
                b.expect_len(cols)?;
                Ok(b.value())
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(words, cols)
    }

    pub fn rows(&self) -> usize {
        self.rows.len()
    }

    pub fn cols(&self) -> u32 {
        self.cols
    }

    pub fn row(&self, i: usize) -> u64 {
        self.rows[i]
    }

    pub fn row_words(&self) -> &[u64] {
        &self.rows
    }

    pub fn get(&self, i: usize, j: u32) -> bool {
        (self.rows[i] >> j) & 1 == 1
    }

    /// The first `k` rows.
    pub fn truncate_rows(&self, k: usize) -> Result<Self> {
        if k > self.rows.len() {
            return Err(shape(format!("cannot keep {k} of {} rows", self.rows.len())));
        }
        Ok(Gf2Matrix { cols: self.cols, rows: self.rows[..k].to_vec() })
    }

    /// `A x` on raw words; bit `i` of the result is `<row_i, x>`.
    #[inline]
    pub fn mul_raw(&self, x: u64) -> u64 {
        self.rows
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, r)| acc | ((((r & x).count_ones() & 1) as u64) << i))
    }

    pub fn mul_vec(&self, x: Bits) -> Result<Bits> {
        x.expect_len(self.cols)?;
        if self.rows.len() > MAX_BITS as usize {
            return Err(shape("product longer than 64 bits"));
        }
        Ok(Bits::truncating(self.mul_raw(x.value()), self.rows.len() as u32))
    }

    /// Row vector times matrix: XOR of the rows selected by the bits of `h`.
    #[inline]
    pub fn vec_mul_raw(&self, h: u64) -> u64 {
        self.rows
            .iter()
            .enumerate()
            .filter(|(i, _)| *i < 64 && (h >> i) & 1 == 1)
            .fold(0u64, |acc, (_, r)| acc ^ r)
    }

    pub fn rank(&self) -> usize {
        let mut rows = self.rows.clone();
        let mut rank = 0;
        for col in 0..self.cols {
            let bit = 1u64 << col;
            let Some(p) = (rank..rows.len()).find(|&r| rows[r] & bit != 0) else { continue };
            rows.swap(rank, p);
            let pivot = rows[rank];
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && *row & bit != 0 {
                    *row ^= pivot;
                }
            }
            rank += 1;
        }
        rank
    }

    /// One hex word per row, for debugging.
    pub fn to_hex_rows(&self) -> Vec<String> {
        self.rows.iter().map(|r| Bits::truncating(*r, self.cols).to_hex()).collect()
    }
}

impl fmt::Debug for Gf2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Gf2Matrix {}x{} [", self.rows.len(), self.cols)?;
        for r in &self.rows {
            writeln!(f, "  {}", Bits::truncating(*r, self.cols))?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_acts_trivially() {
        let i = Gf2Matrix::identity(5).unwrap();
        for x in 0..32u64 {
            assert_eq!(i.mul_raw(x), x);
        }
        assert_eq!(i.rank(), 5);
    }

    #[test]
    fn rank_of_dependent_rows() {
        let m = Gf2Matrix::parse(&["110", "011", "101"]).unwrap();
        assert_eq!(m.rank(), 2);
        assert_eq!(Gf2Matrix::zeros(3, 4).unwrap().rank(), 0);
    }

    #[test]
    fn vec_mul_selects_rows() {
        let m = Gf2Matrix::parse(&["100", "010", "001"]).unwrap();
        assert_eq!(m.vec_mul_raw(0b101), 0b101);
        assert_eq!(m.vec_mul_raw(0), 0);
    }
}
