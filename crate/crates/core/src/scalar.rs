//! Exact scalar arithmetic.
//!
//! Two backends sit behind the [`Field`] / [`Scalar`] pair: the prime field
//! `F_p` for odd primes `p < 2^63` (residues in a `u64`, products through
//! `u128`), and the rationals backed by arbitrary-precision integers. Every
//! element is stored in canonical form, so structural equality and hashing
//! coincide with field equality.

use std::fmt::{self, Debug, Display};
use std::hash::Hash;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Which field a computation runs over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FieldSpec {
    Prime(u64),
    Rational,
}

impl FieldSpec {
    pub fn characteristic(&self) -> u64 {
        match self {
            FieldSpec::Prime(p) => *p,
            FieldSpec::Rational => 0,
        }
    }

    /// Rejects even, composite or oversized moduli.
    pub fn validate(&self) -> Result<()> {
        match *self {
            FieldSpec::Prime(p) if !(3..1 << 63).contains(&p) || !is_prime(p) => {
                Err(Error::InvalidModulus(p))
            }
            _ => Ok(()),
        }
    }
}

impl Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldSpec::Prime(p) => write!(f, "Fp:{p}"),
            FieldSpec::Rational => f.write_str("Q"),
        }
    }
}

impl FromStr for FieldSpec {
    type Err = Error;

    /// Accepts `Q`, `QQ`, `rational`, `Fp:101`, `F101` and `p=101`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let lower = t.to_ascii_lowercase();
        if matches!(lower.as_str(), "q" | "qq" | "rational" | "rationals") {
            return Ok(FieldSpec::Rational);
        }
        let digits = lower
            .strip_prefix("fp:")
            .or_else(|| lower.strip_prefix("f_"))
            .or_else(|| lower.strip_prefix("p="))
            .or_else(|| lower.strip_prefix('f'))
            .ok_or_else(|| Error::InvalidFieldSpec(t.to_string()))?;
        let p: u64 = digits
            .parse()
            .map_err(|_| Error::InvalidFieldSpec(t.to_string()))?;
        let spec = FieldSpec::Prime(p);
        spec.validate()?;
        Ok(spec)
    }
}

impl Serialize for FieldSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// A field element in canonical form.
pub trait Scalar:
    Clone + Eq + Ord + Hash + Debug + Display + Send + Sync + 'static
{
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    fn inv(&self) -> Result<Self>;
    fn is_zero(&self) -> bool;
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;

    fn is_one(&self) -> bool {
        *self == self.one_like()
    }

    fn div(&self, rhs: &Self) -> Result<Self> {
        Ok(self.mul(&rhs.inv()?))
    }

    /// `(numerator, denominator)` for a rational whose parts fit in `i64`.
    fn small_fraction(&self) -> Option<(i64, i64)> {
        None
    }
}

/// Construction context for a backend's scalars.
pub trait Field: Clone + Debug + Send + Sync + 'static {
    type Elem: Scalar;

    fn spec(&self) -> FieldSpec;
    fn from_i64(&self, v: i64) -> Self::Elem;
    fn from_bigint(&self, v: &BigInt) -> Self::Elem;
    /// Parses a decimal integer or `num/den`.
    fn parse(&self, text: &str) -> Result<Self::Elem>;

    fn zero(&self) -> Self::Elem {
        self.from_i64(0)
    }

    fn one(&self) -> Self::Elem {
        self.from_i64(1)
    }

    fn characteristic(&self) -> u64 {
        self.spec().characteristic()
    }
}

/// Inverse of a nonzero scalar.
pub fn field_inv<S: Scalar>(x: &S) -> Result<S> {
    x.inv()
}

/// Parses `text` into a canonical scalar of `field`.
pub fn parse_scalar<F: Field>(text: &str, field: &F) -> Result<F::Elem> {
    field.parse(text)
}

fn split_fraction(text: &str) -> Result<(BigInt, BigInt)> {
    let t = text.trim();
    let bad = || Error::Parse(t.to_string());
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    if num.is_empty() || den.is_empty() {
        return Err(bad());
    }
    let num = BigInt::from_str(num).map_err(|_| bad())?;
    let den = BigInt::from_str(den).map_err(|_| bad())?;
    if den.is_zero() {
        return Err(Error::ZeroDenominator(t.to_string()));
    }
    Ok((num, den))
}

// ---------------------------------------------------------------------------
// Prime field

/// Residue modulo an odd prime, always in `[0, p)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fp {
    value: u64,
    modulus: u64,
}

impl Fp {
    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }
}

impl Debug for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl Display for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl Scalar for Fp {
    #[inline]
    fn add(&self, rhs: &Self) -> Self {
        debug_assert_eq!(self.modulus, rhs.modulus);
        let s = self.value as u128 + rhs.value as u128;
        let p = self.modulus as u128;
        Fp {
            value: if s >= p { (s - p) as u64 } else { s as u64 },
            modulus: self.modulus,
        }
    }

    #[inline]
    fn sub(&self, rhs: &Self) -> Self {
        debug_assert_eq!(self.modulus, rhs.modulus);
        let value = if self.value >= rhs.value {
            self.value - rhs.value
        } else {
            self.modulus - (rhs.value - self.value)
        };
        Fp { value, modulus: self.modulus }
    }

    #[inline]
    fn mul(&self, rhs: &Self) -> Self {
        debug_assert_eq!(self.modulus, rhs.modulus);
        Fp {
            value: mul_mod(self.value, rhs.value, self.modulus),
            modulus: self.modulus,
        }
    }

    #[inline]
    fn neg(&self) -> Self {
        Fp {
            value: if self.value == 0 { 0 } else { self.modulus - self.value },
            modulus: self.modulus,
        }
    }

    fn inv(&self) -> Result<Self> {
        if self.value == 0 {
            return Err(Error::ZeroInverse);
        }
        // extended Euclid on (value, p)
        let (mut r0, mut r1) = (self.modulus as i128, self.value as i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        debug_assert_eq!(r0, 1);
        Ok(Fp {
            value: t0.rem_euclid(self.modulus as i128) as u64,
            modulus: self.modulus,
        })
    }

    #[inline]
    fn is_zero(&self) -> bool {
        self.value == 0
    }

    fn zero_like(&self) -> Self {
        Fp { value: 0, modulus: self.modulus }
    }

    fn one_like(&self) -> Self {
        Fp { value: 1, modulus: self.modulus }
    }

    fn is_one(&self) -> bool {
        self.value == 1
    }
}

#[inline]
fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1u64 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for b in BASES {
        if n.is_multiple_of(b) {
            return n == b;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// `F_p` for an odd prime `p < 2^63`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self> {
        FieldSpec::Prime(p).validate()?;
        Ok(PrimeField { p })
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    /// Residue of `v` (taken mod p).
    pub fn elem(&self, v: u64) -> Fp {
        Fp { value: v % self.p, modulus: self.p }
    }
}

impl Field for PrimeField {
    type Elem = Fp;

    fn spec(&self) -> FieldSpec {
        FieldSpec::Prime(self.p)
    }

    fn from_i64(&self, v: i64) -> Fp {
        Fp {
            value: (v as i128).rem_euclid(self.p as i128) as u64,
            modulus: self.p,
        }
    }

    fn from_bigint(&self, v: &BigInt) -> Fp {
        let r = v.mod_floor(&BigInt::from(self.p));
        Fp {
            value: r.to_u64().expect("residue fits in u64"),
            modulus: self.p,
        }
    }

    fn parse(&self, text: &str) -> Result<Fp> {
        let (num, den) = split_fraction(text)?;
        let den = self.from_bigint(&den);
        if den.is_zero() {
            return Err(Error::NotInField {
                text: text.trim().to_string(),
                modulus: self.p,
            });
        }
        Ok(self.from_bigint(&num).mul(&den.inv()?))
    }
}

// ---------------------------------------------------------------------------
// Rationals

/// Reduced fraction with positive denominator.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::ZeroDenominator(format!("{num}/{den}")));
        }
        Ok(Rational(BigRational::new(num.into(), den.into())))
    }

    pub fn as_ratio(&self) -> &BigRational {
        &self.0
    }

    pub fn into_ratio(self) -> BigRational {
        self.0
    }

    pub fn from_ratio(r: BigRational) -> Self {
        Rational(r)
    }
}

impl Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Scalar for Rational {
    fn add(&self, rhs: &Self) -> Self {
        Rational(&self.0 + &rhs.0)
    }

    fn sub(&self, rhs: &Self) -> Self {
        Rational(&self.0 - &rhs.0)
    }

    fn mul(&self, rhs: &Self) -> Self {
        Rational(&self.0 * &rhs.0)
    }

    fn neg(&self) -> Self {
        Rational(-&self.0)
    }

    fn inv(&self) -> Result<Self> {
        if self.0.is_zero() {
            return Err(Error::ZeroInverse);
        }
        Ok(Rational(self.0.recip()))
    }

    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    fn zero_like(&self) -> Self {
        Rational(BigRational::zero())
    }

    fn one_like(&self) -> Self {
        Rational(BigRational::one())
    }

    fn is_one(&self) -> bool {
        self.0.is_one()
    }

    fn small_fraction(&self) -> Option<(i64, i64)> {
        Some((self.0.numer().to_i64()?, self.0.denom().to_i64()?))
    }
}

/// The field of rational numbers.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct RationalField;

impl Field for RationalField {
    type Elem = Rational;

    fn spec(&self) -> FieldSpec {
        FieldSpec::Rational
    }

    fn from_i64(&self, v: i64) -> Rational {
        Rational(BigRational::from_integer(v.into()))
    }

    fn from_bigint(&self, v: &BigInt) -> Rational {
        Rational(BigRational::from_integer(v.clone()))
    }

    fn parse(&self, text: &str) -> Result<Rational> {
        let (num, den) = split_fraction(text)?;
        Ok(Rational(BigRational::new(num, den)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_examples() {
        let q = RationalField;
        assert_eq!(field_inv(&q.one()).unwrap(), q.one());
        let f5 = PrimeField::new(5).unwrap();
        assert_eq!(field_inv(&f5.from_i64(2)).unwrap(), f5.from_i64(3));
        let x = q.parse("-3/4").unwrap();
        assert_eq!(field_inv(&x).unwrap(), q.parse("-4/3").unwrap());
        assert_eq!(field_inv(&q.zero()), Err(Error::ZeroInverse));
        assert_eq!(field_inv(&f5.zero()), Err(Error::ZeroInverse));
    }

    #[test]
    fn parse_examples() {
        let f5 = PrimeField::new(5).unwrap();
        assert_eq!(parse_scalar("7", &f5).unwrap().value(), 2);
        assert_eq!(parse_scalar("-1", &f5).unwrap().value(), 4);
        assert_eq!(parse_scalar("1/2", &f5).unwrap().value(), 3);
        assert!(parse_scalar("0", &RationalField).unwrap().is_zero());
        assert!(matches!(
            parse_scalar("3/0", &RationalField),
            Err(Error::ZeroDenominator(_))
        ));
        assert!(matches!(
            parse_scalar("3/0", &f5),
            Err(Error::ZeroDenominator(_))
        ));
        assert!(matches!(parse_scalar("1/10", &f5), Err(Error::NotInField { .. })));
        assert!(matches!(parse_scalar("abc", &f5), Err(Error::Parse(_))));
        assert!(matches!(parse_scalar("1/", &RationalField), Err(Error::Parse(_))));
        assert_eq!(
            parse_scalar("6/-4", &RationalField).unwrap().to_string(),
            "-3/2"
        );
    }

    #[test]
    fn modulus_validation() {
        assert!(PrimeField::new(2).is_err());
        assert!(PrimeField::new(9).is_err());
        assert!(PrimeField::new(101).is_ok());
        assert!(PrimeField::new((1 << 61) - 1).is_ok());
        assert!(PrimeField::new(1 << 63 | 1).is_err());
    }

    #[test]
    fn field_spec_text() {
        assert_eq!("Q".parse::<FieldSpec>().unwrap(), FieldSpec::Rational);
        assert_eq!("Fp:101".parse::<FieldSpec>().unwrap(), FieldSpec::Prime(101));
        assert_eq!("F1009".parse::<FieldSpec>().unwrap(), FieldSpec::Prime(1009));
        assert!("Fp:100".parse::<FieldSpec>().is_err());
        assert!("Z".parse::<FieldSpec>().is_err());
        assert_eq!(FieldSpec::Prime(7).to_string(), "Fp:7");
    }

    #[test]
    fn primality_matches_trial_division() {
        let trial = |n: u64| n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d));
        for n in 0..5000u64 {
            assert_eq!(is_prime(n), trial(n), "n = {n}");
        }
        assert!(is_prime(2_305_843_009_213_693_951));
        assert!(!is_prime(3_215_031_751));
    }

    #[test]
    fn large_modulus_products_do_not_overflow() {
        let f = PrimeField::new((1 << 61) - 1).unwrap();
        let a = f.from_i64(-1);
        assert_eq!(a.mul(&a), f.one());
        assert_eq!(a.mul(&a.inv().unwrap()), f.one());
    }
}
