use crate::bits::{Bits, MAX_BITS};
use crate::error::{shape, Result};

use super::{Field2s, Gf2Matrix};

/// Splits `x` into `ceil(n / s)` coefficients of `s` bits, low chunk first.
fn coefficients(field: &Field2s, x: u64, n: u32) -> impl DoubleEndedIterator<Item = u64> + '_ {
    let s = field.degree();
    let chunks = n.div_ceil(s);
    (0..chunks).map(move |j| {
        let shift = j * s;
        if shift >= 64 {
            0
        } else {
            (x >> shift) & field.mask()
        }
    })
}

#[inline]
pub(crate) fn rs_eval_raw(field: &Field2s, x: u64, n: u32, v: u64) -> u64 {
    coefficients(field, x, n).rev().fold(0u64, |acc, c| field.add(field.mul(acc, v), c))
}

/// `p_x(v)`, where `p_x` has the `s`-bit chunks of `x` as coefficients
/// (chunk 0, the low bits, is the constant term). Evaluated by Horner's rule.
pub fn rs_eval(field: &Field2s, x: Bits, v: u64) -> Result<u64> {
    if v > field.mask() {
        return Err(shape(format!("{v:#x} is not an element of GF(2^{})", field.degree())));
    }
    Ok(rs_eval_raw(field, x.value(), x.len(), v))
}

/// The `s x n` matrix `A_v` with `A_v x = p_x(v)`; column `j` is
/// `p_{e_j}(v)`.
pub fn eval_matrix(field: &Field2s, n: u32, v: u64) -> Result<Gf2Matrix> {
    if n > MAX_BITS {
        return Err(shape(format!("n = {n} exceeds {MAX_BITS}")));
    }
    if v > field.mask() {
        return Err(shape(format!("{v:#x} is not an element of GF(2^{})", field.degree())));
    }
    let s = field.degree();
    let mut rows = vec![0u64; s as usize];
    for j in 0..n {
        let col = rs_eval_raw(field, 1u64 << j, n, v);
        for (r, row) in rows.iter_mut().enumerate() {
            if (col >> r) & 1 == 1 {
                *row |= 1 << j;
            }
        }
    }
    Gf2Matrix::from_rows(rows, n)
}

/// The `m x n` matrix whose row `i` is `h_i A_{g_i}`, so that bit `i` of
/// the product with `x` is the inner product `<h_i, p_x(g_i)>`.
pub fn row_assemble(field: &Field2s, n: u32, pairs: &[(u64, u64)], m: usize) -> Result<Gf2Matrix> {
    if pairs.len() != m {
        return Err(shape(format!("expected {m} (g, h) pairs, got {}", pairs.len())));
    }
    let mut rows = Vec::with_capacity(m);
    for &(g, h) in pairs {
        if h > field.mask() {
            return Err(shape(format!("h = {h:#x} wider than {} bits", field.degree())));
        }
        let a_v = eval_matrix(field, n, g)?;
        rows.push(a_v.vec_mul_raw(h));
    }
    Gf2Matrix::from_rows(rows, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_polynomial_and_constant_term() {
        let f = Field2s::new(4).unwrap();
        let zero = Bits::zeros(12);
        for v in 0..16 {
            assert_eq!(rs_eval(&f, zero, v).unwrap(), 0);
        }
        let x = Bits::new(0xabc, 12).unwrap();
        assert_eq!(rs_eval(&f, x, 0).unwrap(), 0xc);
    }

    #[test]
    fn zero_point_matrix_selects_constant_chunk() {
        let f = Field2s::new(4).unwrap();
        let a = eval_matrix(&f, 12, 0).unwrap();
        assert_eq!(a.row_words(), &[0b1, 0b10, 0b100, 0b1000]);
    }

    #[test]
    fn columns_are_unit_evaluations() {
        let f = Field2s::new(3).unwrap();
        let a = eval_matrix(&f, 8, 5).unwrap();
        for j in 0..8 {
            let col = rs_eval(&f, Bits::unit(j, 8).unwrap(), 5).unwrap();
            let from_matrix: u64 = (0..3).map(|r| (a.get(r, j) as u64) << r).sum();
            assert_eq!(col, from_matrix);
        }
    }

    #[test]
    fn degenerate_assemblies() {
        let f = Field2s::new(4).unwrap();
        let zero = row_assemble(&f, 12, &[(3, 0), (7, 0)], 2).unwrap();
        assert_eq!(zero.row_words(), &[0, 0]);
        // h = e_1, g = 0: every row reads bit 0 of the constant chunk.
        let fixed = row_assemble(&f, 12, &[(0, 1), (0, 1), (0, 1)], 3).unwrap();
        assert_eq!(fixed.row_words(), &[1, 1, 1]);
        assert!(row_assemble(&f, 12, &[(0, 1)], 2).is_err());
    }
}
