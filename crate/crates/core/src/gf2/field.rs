use crate::error::{param, Result};

pub const MAX_FIELD_DEGREE: u32 = 32;

/// Numerically least irreducible polynomial of each degree `s = 1..=32`,
/// bit `i` holding the coefficient of `x^i`. Index `s - 1`.
///
/// Degree 1 uses `x` itself, so `GF(2)` multiplication is the ordinary
/// product of bits.
pub const IRREDUCIBLE_MODULI: [u64; 32] = [
    0x2,
    0x7,
    0xb,
    0x13,
    0x25,
    0x43,
    0x83,
    0x11b,
    0x203,
    0x409,
    0x805,
    0x1009,
    0x201b,
    0x4021,
    0x8003,
    0x1_002b,
    0x2_0009,
    0x4_0009,
    0x8_0027,
    0x10_0009,
    0x20_0005,
    0x40_0003,
    0x80_0021,
    0x100_001b,
    0x200_0009,
    0x400_001b,
    0x800_0027,
    0x1000_0003,
    0x2000_0005,
    0x4000_0003,
    0x8000_0009,
    0x1_0000_008d,
];

fn degree(p: u64) -> i32 {
    63 - p.leading_zeros() as i32
}

/// Remainder of carry-less division.
pub(crate) fn poly_rem(mut a: u64, b: u64) -> u64 {
    let db = degree(b);
    while a != 0 && degree(a) >= db {
        a ^= b << (degree(a) - db);
    }
    a
}

/// Exhaustive divisor check over all polynomials of degree `1..=deg/2`.
pub(crate) fn is_irreducible(p: u64) -> bool {
    let s = degree(p);
    if s < 1 {
        return false;
    }
    let half = (s / 2) as u32;
    (2u64..(1u64 << (half + 1))).all(|q| poly_rem(p, q) != 0)
}

/// The field `GF(2^s)`; elements are the integers `0 .. 2^s`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Field2s {
    s: u32,
    modulus: u64,
}

impl Field2s {
    pub fn new(s: u32) -> Result<Self> {
        if !(1..=MAX_FIELD_DEGREE).contains(&s) {
            return Err(param(format!("field degree must be in 1..={MAX_FIELD_DEGREE}, got {s}")));
        }
        let modulus = IRREDUCIBLE_MODULI[s as usize - 1];
        debug_assert!(is_irreducible(modulus));
        Ok(Field2s { s, modulus })
    }

    /// Same as [`Field2s::new`] but re-runs the exhaustive irreducibility
    /// check on the modulus.
    pub fn new_checked(s: u32) -> Result<Self> {
        let f = Field2s::new(s)?;
        if !is_irreducible(f.modulus) {
            return Err(param(format!("modulus {:#x} is reducible", f.modulus)));
        }
        Ok(f)
    }

    pub fn degree(&self) -> u32 {
        self.s
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn order(&self) -> u64 {
        1u64 << self.s
    }

    #[inline]
    pub fn mask(&self) -> u64 {
        crate::bits::mask(self.s)
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        a ^ b
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        let (mut a, mut b) = (a & self.mask(), b & self.mask());
        let top = 1u64 << self.s;
        let mut acc = 0u64;
        while b != 0 {
            if b & 1 == 1 {
                acc ^= a;
            }
            b >>= 1;
            a <<= 1;
            if a & top != 0 {
                a ^= self.modulus;
            }
        }
        acc
    }

    pub fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1u64;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via `a^(2^s - 2)`; `None` for zero.
    pub fn inv(&self, a: u64) -> Option<u64> {
        let a = a & self.mask();
        (a != 0).then(|| self.pow(a, self.order() - 2))
    }
}
