//! Closed-form scalar expressions in the base coordinates `x1..xn`.
//!
//! Variables are 0-based internally (`Var(0)` prints as `x1`).

mod parser;

use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::scalar::{Mode, Rational, Scalar};

pub use parser::ParseError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Func {
    Exp,
    Ln,
    Sin,
    Cos,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "exp" => Func::Exp,
            "ln" | "log" => Func::Ln,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("logarithm of a non-positive value")]
    LogDomain,
    #[error("square root of a negative value")]
    SqrtDomain,
    #[error("transcendental value of {} cannot be represented exactly", .0.name())]
    Transcendental(Func),
    #[error("non-finite value")]
    NonFinite,
    #[error("variable x{index} is outside the point's {len} coordinates")]
    MissingCoordinate { index: usize, len: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(Rational),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn parse(text: &str, n: usize) -> Result<Expr, ParseError> {
        parser::parse(text, n)
    }

    pub fn constant(c: Rational) -> Expr {
        Expr::Const(c)
    }

    pub fn integer(v: i64) -> Expr {
        Expr::Const(Rational::from_integer(v.into()))
    }

    pub fn zero() -> Expr {
        Expr::integer(0)
    }

    pub fn one() -> Expr {
        Expr::integer(1)
    }

    pub fn var(index: usize) -> Expr {
        Expr::Var(index)
    }

    pub fn as_const(&self) -> Option<&Rational> {
        match self {
            Expr::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const().is_some_and(Zero::is_zero)
    }

    fn is_one(&self) -> bool {
        self.as_const().is_some_and(One::is_one)
    }

    // Constructors below fold constants and drop neutral elements.

    pub fn add(a: Expr, b: Expr) -> Expr {
        match (a, b) {
            (Expr::Const(x), Expr::Const(y)) => Expr::Const(x + y),
            (a, b) if a.is_zero() => b,
            (a, b) if b.is_zero() => a,
            (a, b) => Expr::Add(Box::new(a), Box::new(b)),
        }
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        match (a, b) {
            (Expr::Const(x), Expr::Const(y)) => Expr::Const(x - y),
            (a, b) if b.is_zero() => a,
            (a, b) if a.is_zero() => Expr::neg(b),
            (a, b) => Expr::Sub(Box::new(a), Box::new(b)),
        }
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        match (a, b) {
            (Expr::Const(x), Expr::Const(y)) => Expr::Const(x * y),
            (a, b) if a.is_zero() || b.is_zero() => Expr::zero(),
            (a, b) if a.is_one() => b,
            (a, b) if b.is_one() => a,
            (a, b) => Expr::Mul(Box::new(a), Box::new(b)),
        }
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        match (a, b) {
            (Expr::Const(x), Expr::Const(y)) if !y.is_zero() => Expr::Const(x / y),
            (a, b) if a.is_zero() && !b.is_zero() => Expr::zero(),
            (a, b) if b.is_one() => a,
            (a, b) => Expr::Div(Box::new(a), Box::new(b)),
        }
    }

    pub fn neg(a: Expr) -> Expr {
        match a {
            Expr::Const(x) => Expr::Const(-x),
            Expr::Neg(inner) => *inner,
            a => Expr::Neg(Box::new(a)),
        }
    }

    pub fn pow(base: Expr, exp: i32) -> Expr {
        match (base, exp) {
            (_, 0) => Expr::one(),
            (b, 1) => b,
            (Expr::Const(c), e) if !(c.is_zero() && e < 0) => Expr::Const(rational_powi(&c, e)),
            (b, e) => Expr::Pow(Box::new(b), e),
        }
    }

    pub fn call(func: Func, arg: Expr) -> Expr {
        if let Expr::Const(c) = &arg {
            if let Ok(v) = Rational::apply(func, c) {
                return Expr::Const(v);
            }
        }
        Expr::Call(func, Box::new(arg))
    }

    /// Largest variable index used, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Const(_) => None,
            Expr::Var(i) => Some(*i),
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.max_var(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.max_var().max(b.max_var())
            }
        }
    }

    pub fn eval<S: Scalar>(&self, x: &[S]) -> Result<S, EvalError> {
        Ok(match self {
            Expr::Const(c) => S::from_rational(c),
            Expr::Var(i) => x
                .get(*i)
                .cloned()
                .ok_or(EvalError::MissingCoordinate { index: i + 1, len: x.len() })?,
            Expr::Neg(a) => -a.eval(x)?,
            Expr::Add(a, b) => a.eval(x)? + b.eval(x)?,
            Expr::Sub(a, b) => a.eval(x)? - b.eval(x)?,
            Expr::Mul(a, b) => a.eval(x)? * b.eval(x)?,
            Expr::Div(a, b) => {
                let den = b.eval(x)?;
                if den.is_zero() {
                    return Err(EvalError::DivisionByZero);
                }
                a.eval(x)? / den
            }
            Expr::Pow(a, e) => powi(a.eval(x)?, *e)?,
            Expr::Call(f, a) => S::apply(*f, &a.eval(x)?)?,
        })
    }

    /// Evaluates at a rational point in the requested mode, returning the
    /// value as `f64` for display.
    pub fn eval_mode(&self, x: &[Rational], mode: Mode) -> Result<f64, EvalError> {
        match mode {
            Mode::Exact => self.eval::<Rational>(x).map(|v| v.to_f64()),
            Mode::Float => {
                let xf: Vec<f64> = x.iter().map(f64::from_rational).collect();
                self.eval::<f64>(&xf)
            }
        }
    }

    /// Symbolic partial derivative with respect to variable `i` (0-based).
    pub fn diff(&self, i: usize) -> Expr {
        match self {
            Expr::Const(_) => Expr::zero(),
            Expr::Var(j) => Expr::integer((*j == i) as i64),
            Expr::Neg(a) => Expr::neg(a.diff(i)),
            Expr::Add(a, b) => Expr::add(a.diff(i), b.diff(i)),
            Expr::Sub(a, b) => Expr::sub(a.diff(i), b.diff(i)),
            Expr::Mul(a, b) => Expr::add(
                Expr::mul(a.diff(i), (**b).clone()),
                Expr::mul((**a).clone(), b.diff(i)),
            ),
            Expr::Div(a, b) => {
                // (a'b - ab') / b^2
                let num = Expr::sub(
                    Expr::mul(a.diff(i), (**b).clone()),
                    Expr::mul((**a).clone(), b.diff(i)),
                );
                Expr::div(num, Expr::pow((**b).clone(), 2))
            }
            Expr::Pow(a, e) => Expr::mul(
                Expr::mul(Expr::integer(*e as i64), Expr::pow((**a).clone(), e - 1)),
                a.diff(i),
            ),
            Expr::Call(f, a) => {
                let inner = a.diff(i);
                if inner.is_zero() {
                    return Expr::zero();
                }
                let arg = (**a).clone();
                let outer = match f {
                    Func::Exp => Expr::call(Func::Exp, arg),
                    Func::Ln => Expr::div(Expr::one(), arg),
                    Func::Sin => Expr::call(Func::Cos, arg),
                    Func::Cos => Expr::neg(Expr::call(Func::Sin, arg)),
                    Func::Sqrt => Expr::div(
                        Expr::one(),
                        Expr::mul(Expr::integer(2), Expr::call(Func::Sqrt, arg)),
                    ),
                };
                Expr::mul(outer, inner)
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Const(c) if c.is_negative() => 3,
            Expr::Const(c) if !c.is_integer() => 2,
            Expr::Pow(..) => 4,
            _ => 5,
        }
    }
}

fn rational_powi(c: &Rational, e: i32) -> Rational {
    let p = num_traits::pow(c.clone(), e.unsigned_abs() as usize);
    if e < 0 {
        p.recip()
    } else {
        p
    }
}

fn powi<S: Scalar>(base: S, e: i32) -> Result<S, EvalError> {
    if e < 0 && base.is_zero() {
        return Err(EvalError::DivisionByZero);
    }
    let mut acc = S::one();
    let mut sq = base;
    let mut k = e.unsigned_abs();
    while k > 0 {
        if k & 1 == 1 {
            acc = acc * sq.clone();
        }
        k >>= 1;
        if k > 0 {
            sq = sq.clone() * sq;
        }
    }
    Ok(if e < 0 { S::one() / acc } else { acc })
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Operands are wrapped whenever their precedence is below what the
        // parent requires; right operands of `-` and `/` also at equal level.
        let wrap = |f: &mut fmt::Formatter<'_>, e: &Expr, min: u8| {
            if e.precedence() < min {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        };
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var(i) => write!(f, "x{}", i + 1),
            Expr::Neg(a) => {
                f.write_str("-")?;
                wrap(f, a, 3)
            }
            Expr::Add(a, b) => {
                wrap(f, a, 1)?;
                f.write_str(" + ")?;
                wrap(f, b, 2)
            }
            Expr::Sub(a, b) => {
                wrap(f, a, 1)?;
                f.write_str(" - ")?;
                wrap(f, b, 2)
            }
            Expr::Mul(a, b) => {
                wrap(f, a, 2)?;
                f.write_str("*")?;
                wrap(f, b, 3)
            }
            Expr::Div(a, b) => {
                wrap(f, a, 2)?;
                f.write_str("/")?;
                wrap(f, b, 4)
            }
            Expr::Pow(a, e) => {
                wrap(f, a, 5)?;
                if *e < 0 {
                    write!(f, "^({e})")
                } else {
                    write!(f, "^{e}")
                }
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}
