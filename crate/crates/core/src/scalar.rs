//! Scalar fields the geometry is computed over.
//!
//! Everything above this module is generic over [`Scalar`]. Two fields are
//! provided: arbitrary-precision rationals (exact zero tests) and `f64`
//! (zero tests against a [`Tolerance`]).

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::expr::{EvalError, Func};

pub type Rational = BigRational;

/// Arithmetic mode of a computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Exact,
    Float,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Exact => f.write_str("exact"),
            Mode::Float => f.write_str("float"),
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(Mode::Exact),
            "float" => Ok(Mode::Float),
            other => Err(format!("unknown mode `{other}` (expected exact|float)")),
        }
    }
}

/// Float zero test: `|v| <= abs + rel * scale`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub const fn new(abs: f64, rel: f64) -> Self {
        Self { abs, rel }
    }

    #[inline]
    pub fn threshold(&self, scale: f64) -> f64 {
        self.abs + self.rel * scale
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::new(1e-12, 1e-9)
    }
}

pub trait Scalar:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
{
    const MODE: Mode;

    fn from_rational(r: &Rational) -> Self;

    fn from_i64(v: i64) -> Self {
        Self::from_rational(&Rational::from_integer(BigInt::from(v)))
    }

    fn to_f64(&self) -> f64;

    fn magnitude(&self) -> f64 {
        self.to_f64().abs()
    }

    /// Zero test. Exact scalars ignore `scale` and `tol`.
    fn is_negligible(&self, scale: f64, tol: &Tolerance) -> bool;

    /// Elementary function of a single argument; exact scalars only succeed
    /// when the value is itself rational.
    fn apply(func: Func, arg: &Self) -> Result<Self, EvalError>;
}

impl Scalar for Rational {
    const MODE: Mode = Mode::Exact;

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn is_negligible(&self, _scale: f64, _tol: &Tolerance) -> bool {
        self.is_zero()
    }

    fn apply(func: Func, arg: &Self) -> Result<Self, EvalError> {
        match func {
            Func::Exp if arg.is_zero() => Ok(Rational::one()),
            Func::Sin if arg.is_zero() => Ok(Rational::zero()),
            Func::Cos if arg.is_zero() => Ok(Rational::one()),
            Func::Ln if !arg.is_positive() => Err(EvalError::LogDomain),
            Func::Ln if arg.is_one() => Ok(Rational::zero()),
            Func::Sqrt if arg.is_negative() => Err(EvalError::SqrtDomain),
            Func::Sqrt => exact_sqrt(arg).ok_or(EvalError::Transcendental(func)),
            _ => Err(EvalError::Transcendental(func)),
        }
    }
}

fn exact_sqrt(r: &Rational) -> Option<Rational> {
    let root = |v: &BigInt| {
        let s = v.sqrt();
        (&s * &s == *v).then_some(s)
    };
    Some(Rational::new(root(r.numer())?, root(r.denom())?))
}

impl Scalar for f64 {
    const MODE: Mode = Mode::Float;

    fn from_rational(r: &Rational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn is_negligible(&self, scale: f64, tol: &Tolerance) -> bool {
        self.abs() <= tol.threshold(scale)
    }

    fn apply(func: Func, arg: &Self) -> Result<Self, EvalError> {
        let v = match func {
            Func::Exp => arg.exp(),
            Func::Ln if *arg <= 0.0 => return Err(EvalError::LogDomain),
            Func::Ln => arg.ln(),
            Func::Sin => arg.sin(),
            Func::Cos => arg.cos(),
            Func::Sqrt if *arg < 0.0 => return Err(EvalError::SqrtDomain),
            Func::Sqrt => arg.sqrt(),
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite)
        }
    }
}

/// Parses `"3"`, `"-3/4"` or `"0.125"` into an exact rational.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let num = parse_rational(num)?;
        let den = parse_rational(den)?;
        return (!den.is_zero()).then(|| num / den);
    }
    let (negative, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.strip_prefix('+').unwrap_or(text)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = digits.parse().ok()?;
    let denom = num_traits::pow(BigInt::from(10), frac_part.len());
    let value = Rational::new(numer, denom);
    Some(if negative { -value } else { value })
}
