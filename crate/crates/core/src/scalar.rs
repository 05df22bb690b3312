//! Arithmetic modes.
//!
//! Every law in the crate is generic over [`Scalar`], implemented for exact
//! big rationals ([`Rational`]) and for `f64`. A computation runs in one mode
//! throughout; identities that hold as rational functions of the parameters
//! are checked bit-for-bit in rational mode.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub trait Scalar:
    Clone + Debug + Display + PartialOrd + Num + std::ops::Neg<Output = Self> + Send + Sync + 'static
{
    /// True when arithmetic is exact.
    const EXACT: bool;
    const MODE: &'static str;

    fn from_int(n: i64) -> Self;

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_int(num) / Self::from_int(den)
    }

    fn to_f64(&self) -> f64;

    /// Exact for rationals, rounded for floats.
    fn from_rational(r: &Rational) -> Self;

    /// Lossy import of a float. Exact mode refuses, since silently rationalising
    /// a float would defeat the point of that mode.
    fn from_f64(x: f64) -> Result<Self>;

    fn abs_diff(&self, other: &Self) -> f64 {
        (self.clone() - other.clone()).to_f64().abs()
    }

    /// Equality in the mode's own sense: exact equality for rationals,
    /// absolute tolerance for floats.
    fn close_to(&self, other: &Self, tol: f64) -> bool;
}

impl Scalar for Rational {
    const EXACT: bool = true;
    const MODE: &'static str = "exact";

    fn from_int(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn from_f64(_x: f64) -> Result<Self> {
        Err(Error::RequiresFloat("importing a float value"))
    }

    fn close_to(&self, other: &Self, _tol: f64) -> bool {
        self == other
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;
    const MODE: &'static str = "float";

    fn from_int(n: i64) -> Self {
        n as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn from_rational(r: &Rational) -> Self {
        Scalar::to_f64(r)
    }

    fn from_f64(x: f64) -> Result<Self> {
        Ok(x)
    }

    fn close_to(&self, other: &Self, tol: f64) -> bool {
        (self - other).abs() <= tol
    }
}

/// Rising factorial `(x)_k = x (x+1) ... (x+k-1)`.
pub fn rising<S: Scalar>(x: &S, k: usize) -> S {
    let mut acc = S::one();
    let mut term = x.clone();
    for _ in 0..k {
        acc = acc * term.clone();
        term = term + S::one();
    }
    acc
}

pub fn binomial_u128(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

pub fn binomial<S: Scalar>(n: usize, k: usize) -> S {
    let b = binomial_u128(n, k);
    S::from_int(i64::try_from(b).expect("binomial coefficient overflows i64"))
}

pub fn factorial<S: Scalar>(n: usize) -> S {
    (1..=n).fold(S::one(), |acc, i| acc * S::from_int(i as i64))
}

pub fn is_negative<S: Scalar>(x: &S) -> bool {
    *x < S::zero()
}

pub fn is_positive<S: Scalar>(x: &S) -> bool {
    *x > S::zero()
}

pub fn pow<S: Scalar>(x: &S, k: usize) -> S {
    (0..k).fold(S::one(), |acc, _| acc * x.clone())
}

/// A parameter value read from text: `"p/q"` or an integer stays exact,
/// anything with a decimal point or exponent forces float mode.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamValue {
    Exact(Rational),
    Float(f64),
}

impl ParamValue {
    pub fn is_exact(&self) -> bool {
        matches!(self, ParamValue::Exact(_))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            ParamValue::Exact(r) => Scalar::to_f64(r),
            ParamValue::Float(x) => *x,
        }
    }

    /// The value in the mode of `S`; a decimal cannot enter exact mode.
    pub fn to_scalar<S: Scalar>(&self) -> Result<S> {
        match self {
            ParamValue::Exact(r) => Ok(S::from_rational(r)),
            ParamValue::Float(x) => S::from_f64(*x),
        }
    }

    pub fn to_rational(&self) -> Result<Rational> {
        match self {
            ParamValue::Exact(r) => Ok(r.clone()),
            ParamValue::Float(_) => Err(Error::RequiresFloat("decimal parameter")),
        }
    }
}

impl FromStr for ParamValue {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::Parse("empty parameter".into()));
        }
        if let Some((num, den)) = s.split_once('/') {
            let num = BigInt::from_str_radix(num.trim(), 10).map_err(|e| Error::Parse(format!("{s}: {e}")))?;
            let den = BigInt::from_str_radix(den.trim(), 10).map_err(|e| Error::Parse(format!("{s}: {e}")))?;
            if den.is_zero() {
                return Err(Error::Parse(format!("{s}: zero denominator")));
            }
            return Ok(ParamValue::Exact(BigRational::new(num, den)));
        }
        if let Ok(i) = BigInt::from_str_radix(s, 10) {
            return Ok(ParamValue::Exact(BigRational::from_integer(i)));
        }
        s.parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .map(ParamValue::Float)
            .ok_or_else(|| Error::Parse(format!("not a number: {s}")))
    }
}

/// `p/q` rendering used by the record formats (integers print without `/1`).
pub fn format_exact(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn format_scalar<S: Scalar>(x: &S) -> String {
    // Rational's Display already prints "p/q" or "p".
    if S::EXACT {
        x.to_string()
    } else {
        format!("{:.17e}", x.to_f64())
    }
}
