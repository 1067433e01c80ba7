//! Exact rationals and square roots of rationals.
//!
//! `δ = ε^{1/2}` is irrational for most `ε` (the acceptance setting uses
//! `ε = 1/2`), so `δ` is kept as a [`Surd`] and every comparison against it is
//! decided exactly by squaring both non-negative sides.

use std::cmp::Ordering;
use std::fmt;

use num_integer::Roots;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{param, Result};

pub type Rational = Ratio<i128>;

pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || param(format!("cannot parse rational {s:?}"));
    match s.split_once('/') {
        Some((num, den)) => {
            let num: i128 = num.trim().parse().map_err(|_| bad())?;
            let den: i128 = den.trim().parse().map_err(|_| bad())?;
            if den == 0 {
                return Err(param("zero denominator"));
            }
            Ok(Rational::new(num, den))
        }
        None => {
            if let Ok(v) = s.parse::<i128>() {
                return Ok(Rational::from_integer(v));
            }
            // Finite decimal such as 0.25.
            let (int, frac) = s.split_once('.').ok_or_else(bad)?;
            if frac.is_empty() || frac.len() > 30 || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            let den = 10i128.pow(frac.len() as u32);
            let neg = int.trim_start().starts_with('-');
            let int: i128 = if int.is_empty() || int == "-" { 0 } else { int.parse().map_err(|_| bad())? };
            let frac: i128 = frac.parse().map_err(|_| bad())?;
            let mag = int.abs() * den + frac;
            Ok(Rational::new(if neg { -mag } else { mag }, den))
        }
    }
}

pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn exact_sqrt(v: i128) -> Option<i128> {
    if v < 0 {
        return None;
    }
    let root = v.sqrt();
    (root * root == v).then_some(root)
}

/// `sqrt(square)` for a non-negative rational `square`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Surd {
    square: Rational,
}

impl Surd {
    pub fn sqrt_of(square: Rational) -> Result<Self> {
        if square.is_negative() {
            return Err(param("square root of a negative rational"));
        }
        Ok(Surd { square })
    }

    pub fn from_rational(r: Rational) -> Result<Self> {
        if r.is_negative() {
            return Err(param("surds are non-negative"));
        }
        Ok(Surd { square: r * r })
    }

    pub fn square(&self) -> Rational {
        self.square
    }

    /// The value as a rational, when `square` is a perfect square.
    pub fn exact(&self) -> Option<Rational> {
        let num = exact_sqrt(*self.square.numer())?;
        let den = exact_sqrt(*self.square.denom())?;
        Some(Rational::new(num, den))
    }

    /// `c * self` for non-negative rational `c`.
    pub fn scale(&self, c: Rational) -> Result<Self> {
        if c.is_negative() {
            return Err(param("surds scale by non-negative factors only"));
        }
        Ok(Surd { square: self.square * c * c })
    }

    pub fn to_f64(&self) -> f64 {
        to_f64(&self.square).sqrt()
    }

    pub fn cmp_rational(&self, q: &Rational) -> Ordering {
        if q.is_negative() {
            return Ordering::Greater;
        }
        self.square.cmp(&(q * q))
    }

    pub fn le(&self, q: &Rational) -> bool {
        self.cmp_rational(q) != Ordering::Greater
    }

    pub fn ge(&self, q: &Rational) -> bool {
        self.cmp_rational(q) != Ordering::Less
    }

    pub fn is_zero(&self) -> bool {
        self.square.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.square.is_one()
    }
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.exact() {
            Some(r) => f.write_str(&format_rational(&r)),
            None => write!(f, "sqrt({})", format_rational(&self.square)),
        }
    }
}

impl fmt::Debug for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Surd({self})")
    }
}

impl Serialize for Surd {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

/// Serde adapter writing rationals as `"p/q"` strings.
pub mod serde_str {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

pub mod serde_opt_str {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match r {
            Some(r) => s.serialize_some(&format_rational(r)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Rational>, D::Error> {
        let s = Option::<String>::deserialize(d)?;
        s.map(|s| parse_rational(&s).map_err(serde::de::Error::custom)).transpose()
    }
}
