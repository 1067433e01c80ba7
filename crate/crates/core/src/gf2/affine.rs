use crate::bits::{Bits, MAX_BITS};
use crate::error::{shape, Error, Result};

use super::Gf2Matrix;

/// Solution set `{x : A x = z}` of a consistent system.
///
/// Elimination scans columns in increasing order, so pivots sit at the
/// lowest possible coordinates and the free coordinates are the rest.
/// Basis vector `j` has a one at free coordinate `free[j]`, zeros at every
/// other free coordinate, and its pivot coordinates forced by the system.
/// The particular solution has every free coordinate zero. Element `i` is
/// the particular solution XOR the basis vectors picked by the bits of `i`,
/// so enumeration order is canonical for a given `A`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineSpace {
    ambient: u32,
    particular: u64,
    basis: Vec<u64>,
    free: Vec<u32>,
}

impl AffineSpace {
    pub fn ambient(&self) -> u32 {
        self.ambient
    }

    pub fn particular(&self) -> Bits {
        Bits::truncating(self.particular, self.ambient)
    }

    pub fn basis(&self) -> Vec<Bits> {
        self.basis.iter().map(|b| Bits::truncating(*b, self.ambient)).collect()
    }

    pub fn free_coordinates(&self) -> &[u32] {
        &self.free
    }

    pub fn dim(&self) -> u32 {
        self.basis.len() as u32
    }

    /// `2^dim`.
    pub fn size(&self) -> u128 {
        1u128 << self.dim()
    }

    #[inline]
    pub(crate) fn element_raw(&self, i: u64) -> u64 {
        let mut x = self.particular;
        let mut bits = i;
        while bits != 0 {
            let j = bits.trailing_zeros() as usize;
            x ^= self.basis[j];
            bits &= bits - 1;
        }
        x
    }

    /// Element `i` for `i < 2^dim`; cost linear in `n` and `log i`.
    pub fn element(&self, i: u64) -> Result<Bits> {
        if (i as u128) >= self.size() {
            return Err(Error::Index { index: i as u128, len: self.size() });
        }
        Ok(Bits::truncating(self.element_raw(i), self.ambient))
    }

    /// Membership via the free coordinates: the unique index is read off
    /// `x` at `free`, then the element at that index is compared.
    pub fn contains(&self, x: Bits) -> bool {
        if x.len() != self.ambient {
            return false;
        }
        let index = self
            .free
            .iter()
            .enumerate()
            .fold(0u64, |acc, (j, &f)| acc | (((x.value() >> f) & 1) << j));
        self.element_raw(index) == x.value()
    }

    pub fn iter(&self) -> impl Iterator<Item = Bits> + '_ {
        assert!(self.dim() < 64, "space too large to iterate");
        (0..(1u64 << self.dim())).map(|i| Bits::truncating(self.element_raw(i), self.ambient))
    }
}

/// Solves `A x = z` over `GF(2)`; `Ok(None)` when the system is
/// inconsistent.
pub fn solve_affine(a: &Gf2Matrix, z: Bits) -> Result<Option<AffineSpace>> {
    let n = a.cols();
    if a.rows() > MAX_BITS as usize {
        return Err(shape("systems are limited to 64 equations"));
    }
    z.expect_len(a.rows() as u32)?;

    let mut rows: Vec<(u64, bool)> = a.row_words().iter().enumerate().map(|(i, r)| (*r, z.bit(i as u32))).collect();
    let mut pivots: Vec<u32> = Vec::new();
    let mut rank = 0usize;
    for col in 0..n {
        let bit = 1u64 << col;
        let Some(p) = (rank..rows.len()).find(|&r| rows[r].0 & bit != 0) else { continue };
        rows.swap(rank, p);
        let pivot = rows[rank];
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row.0 & bit != 0 {
                row.0 ^= pivot.0;
                row.1 ^= pivot.1;
            }
        }
        pivots.push(col);
        rank += 1;
    }
    if rows[rank..].iter().any(|(_, rhs)| *rhs) {
        return Ok(None);
    }

    let mut particular = 0u64;
    for (r, &col) in pivots.iter().enumerate() {
        if rows[r].1 {
            particular |= 1 << col;
        }
    }
    let free: Vec<u32> = (0..n).filter(|c| !pivots.contains(c)).collect();
    let basis = free
        .iter()
        .map(|&f| {
            let mut v = 1u64 << f;
            for (r, &col) in pivots.iter().enumerate() {
                if (rows[r].0 >> f) & 1 == 1 {
                    v |= 1 << col;
                }
            }
            v
        })
        .collect();
    Ok(Some(AffineSpace { ambient: n, particular, basis, free }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(s: &str) -> Bits {
        Bits::parse_binary(s).unwrap()
    }

    #[test]
    fn unique_solution() {
        let a = Gf2Matrix::identity(3).unwrap();
        let space = solve_affine(&a, b("101")).unwrap().unwrap();
        assert_eq!(space.particular(), b("101"));
        assert_eq!(space.dim(), 0);
    }

    #[test]
    fn one_free_variable() {
        let a = Gf2Matrix::parse(&["100", "010"]).unwrap();
        let space = solve_affine(&a, b("10")).unwrap().unwrap();
        assert_eq!(space.dim(), 1);
        assert_eq!(space.element(0).unwrap(), b("100"));
        assert_eq!(space.element(1).unwrap(), b("101"));
        assert!(space.element(2).is_err());
        assert!(space.contains(b("101")));
        assert!(!space.contains(b("110")));
    }

    #[test]
    fn inconsistent_system_is_empty() {
        let a = Gf2Matrix::parse(&["110", "110"]).unwrap();
        assert!(solve_affine(&a, b("10")).unwrap().is_none());
        assert!(solve_affine(&a, b("11")).unwrap().is_some());
    }

    #[test]
    fn rhs_length_checked() {
        let a = Gf2Matrix::identity(3).unwrap();
        assert!(solve_affine(&a, b("10")).is_err());
    }
}
