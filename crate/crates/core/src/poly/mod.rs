//! Exact multivariate polynomials and rational functions in `y1..yn`.

mod monomial;
mod polynomial;
mod rational_fn;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use monomial::Monomial;
pub use polynomial::Poly;
pub use rational_fn::RationalFn;

use crate::linalg;
use crate::scalar::{Rational, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PolyError {
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("rational function with zero denominator")]
    ZeroDenominator,
    #[error("could not find a non-degenerate sample grid after {0} attempts")]
    DegenerateSamples(usize),
    #[error("division and interpolation routes disagree on polynomiality")]
    RouteDisagreement,
}

/// Maximum number of resampling attempts for random probe points.
pub const MAX_SAMPLE_ATTEMPTS: usize = 100;

/// Relative agreement required between an interpolated polynomial and the
/// rational function at check points (float mode only).
pub const INTERPOLATION_REL_TOL: f64 = 1e-6;

/// Random rational probe point with small nonzero numerators and
/// denominators, so that coordinate hyperplanes are avoided.
pub fn random_point<S: Scalar>(rng: &mut ChaCha8Rng, n: usize) -> Vec<S> {
    (0..n)
        .map(|_| {
            let mut num: i64 = rng.gen_range(1..=9);
            if rng.gen_bool(0.5) {
                num = -num;
            }
            let den: i64 = rng.gen_range(1..=4);
            S::from_rational(&Rational::new(num.into(), den.into()))
        })
        .collect()
}

/// Samples a point at which `f` is regular.
pub fn regular_point<S: Scalar>(f: &[&RationalFn<S>], rng: &mut ChaCha8Rng, n: usize) -> Result<Vec<S>, PolyError> {
    for _ in 0..MAX_SAMPLE_ATTEMPTS {
        let y = random_point(rng, n);
        if f.iter().all(|g| g.eval(&y).is_some()) {
            return Ok(y);
        }
    }
    Err(PolyError::DegenerateSamples(MAX_SAMPLE_ATTEMPTS))
}

fn close<S: Scalar>(a: &S, b: &S) -> bool {
    if S::MODE == crate::Mode::Exact {
        a == b
    } else {
        let (a, b) = (a.to_f64(), b.to_f64());
        (a - b).abs() <= INTERPOLATION_REL_TOL * a.abs().max(b.abs()).max(1.0)
    }
}

/// Interpolation route of the polynomiality test: fits a polynomial of
/// degree ≤ `max_deg` through a full monomial sample grid and accepts it iff
/// it reproduces `f` at 10 further random points.
pub fn interpolate_polynomial<S: Scalar>(
    f: &RationalFn<S>,
    max_deg: u32,
    rng: &mut ChaCha8Rng,
) -> Result<Option<Poly<S>>, PolyError> {
    let n = f.nvars();
    let tol = f.numerator().tolerance();
    let basis = Monomial::all_up_to_degree(n, max_deg);
    let eval_basis = |y: &[S]| -> Vec<S> {
        basis.iter().map(|m| Poly::monomial(m.clone(), S::one()).eval(y)).collect()
    };
    for _ in 0..MAX_SAMPLE_ATTEMPTS {
        let mut rows = Vec::with_capacity(basis.len());
        let mut rhs = Vec::with_capacity(basis.len());
        for _ in 0..basis.len() {
            let y = regular_point(&[f], rng, n)?;
            rhs.push(f.eval(&y).expect("regular point"));
            rows.push(eval_basis(&y));
        }
        let Some(coeffs) = linalg::solve(rows, rhs, &tol) else {
            continue;
        };
        let p = Poly::from_terms(n, basis.iter().cloned().zip(coeffs)).with_tolerance(tol);
        for _ in 0..10 {
            let y = regular_point(&[f], rng, n)?;
            if !close(&f.eval(&y).expect("regular point"), &p.eval(&y)) {
                return Ok(None);
            }
        }
        return Ok(Some(p));
    }
    Err(PolyError::DegenerateSamples(MAX_SAMPLE_ATTEMPTS))
}

/// `Some(p)` iff `f ≡ p` with `deg p ≤ max_deg`.
///
/// Decided by exact division of the numerator by the denominator factors,
/// and confirmed by [`interpolate_polynomial`]; a disagreement between the
/// two routes is reported as an error.
pub fn as_polynomial<S: Scalar>(
    f: &RationalFn<S>,
    max_deg: u32,
    rng: &mut ChaCha8Rng,
) -> Result<Option<Poly<S>>, PolyError> {
    let by_division = f
        .polynomial_quotient()?
        .filter(|p| p.total_degree().is_none_or(|d| d <= max_deg));
    let by_interpolation = interpolate_polynomial(f, max_deg, rng)?;
    match (&by_division, &by_interpolation) {
        (Some(_), Some(_)) | (None, None) => Ok(by_division),
        _ => Err(PolyError::RouteDisagreement),
    }
}
