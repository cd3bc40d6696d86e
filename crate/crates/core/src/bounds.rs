//! Exact bound ratios.
//!
//! The right-hand sides of the incidence and energy bounds carry fractional
//! powers. Each such term is written as `(radicand)^(1/k)` for an exact
//! rational radicand and evaluated as a rational *lower* bound accurate to
//! `10^-ROOT_DIGITS`, so every stored ratio `lhs / rhs` is an exact rational
//! that upper-bounds the true ratio.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

/// Decimal digits kept when flooring a root.
pub const ROOT_DIGITS: u32 = 9;

/// Exact rational, serialized as `"num/den"` (denominator always printed).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Exact(pub BigRational);

impl Exact {
    pub fn new(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Self {
        Exact(BigRational::new(num.into(), den.into()))
    }

    pub fn integer(n: impl Into<BigInt>) -> Self {
        Exact(BigRational::from_integer(n.into()))
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Parses `num/den` or a bare integer.
    pub fn parse(text: &str) -> Option<Self> {
        let t = text.trim();
        let (n, d) = t.split_once('/').unwrap_or((t, "1"));
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        Some(Exact(BigRational::new(n, d)))
    }
}

impl fmt::Display for Exact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl Serialize for Exact {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// An exact value plus its advisory decimal rendering.
#[derive(Clone, PartialEq, Debug, Serialize)]
pub struct Measured {
    pub exact: Exact,
    pub decimal: f64,
}

impl From<Exact> for Measured {
    fn from(exact: Exact) -> Self {
        let decimal = round_decimal(exact.to_f64());
        Measured { exact, decimal }
    }
}

impl From<BigRational> for Measured {
    fn from(r: BigRational) -> Self {
        Exact(r).into()
    }
}

/// Fixes the advisory decimal at nine places so output is byte-stable.
fn round_decimal(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    (x * 1e9).round() / 1e9
}

/// Rational lower bound of `radicand^(1/k)`, within `10^-ROOT_DIGITS`.
pub fn root_lower(radicand: &BigRational, k: u32) -> BigRational {
    assert!(k >= 1);
    assert!(!radicand.is_negative(), "root of a negative radicand");
    if radicand.is_zero() {
        return BigRational::zero();
    }
    let num = radicand.numer().magnitude();
    let den = radicand.denom().magnitude();
    // (n/d)^(1/k) = (n·d^(k-1))^(1/k) / d
    let scale = BigUint::from(10u32).pow(ROOT_DIGITS);
    let inner = num * den.pow(k - 1) * scale.pow(k);
    let root = inner.nth_root(k);
    BigRational::new(BigInt::from(root), BigInt::from(den * scale))
}

/// Exact comparison of `radicand^(1/k)` against a nonnegative rational.
pub fn root_cmp(radicand: &BigRational, k: u32, value: &BigRational) -> Ordering {
    radicand.cmp(&pow(value, k))
}

pub fn pow(x: &BigRational, k: u32) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..k {
        acc *= x;
    }
    acc
}

pub fn int(n: u64) -> BigRational {
    BigRational::from_integer(n.into())
}

/// `lhs / rhs`, or `None` when `rhs` is zero.
pub fn ratio(lhs: &BigRational, rhs: &BigRational) -> Option<BigRational> {
    (!rhs.is_zero()).then(|| lhs / rhs)
}
