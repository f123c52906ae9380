//! Differential geometry of m-th root Finsler metrics `F = T^{1/m}` computed
//! in the ring of rational functions of the fiber coordinates.
//!
//! The algebra is generic over [`Scalar`]: [`Rational`] gives exact zero
//! tests (and therefore exact classification), `f64` works everywhere
//! including base points where coefficients take transcendental values.

pub mod classify;
pub mod decomp;
pub mod error;
pub mod expr;
pub mod finsler;
pub mod geodesics;
pub mod linalg;
pub mod poly;
pub mod scalar;

pub use error::{Error, Result};
pub use expr::Expr;
pub use poly::{Monomial, Poly, RationalFn};
pub use scalar::{Mode, Rational, Scalar, Tolerance};

pub type ExactPoly = Poly<Rational>;
pub type FloatPoly = Poly<f64>;
pub type ExactRationalFn = RationalFn<Rational>;
pub type FloatRationalFn = RationalFn<f64>;
pub type ExactPointContext = finsler::PointContext<Rational>;
pub type FloatPointContext = finsler::PointContext<f64>;
