use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::Monomial;
use crate::scalar::{Scalar, Tolerance};

/// Sparse multivariate polynomial in the fiber variables `y1..yn`.
///
/// Terms are kept in a graded-lex ordered map; the last entry is the leading
/// term. No zero coefficient is ever stored: exact scalars drop exact zeros,
/// floats drop anything under the tolerance relative to the operands of the
/// operation that produced it.
#[derive(Debug, Clone)]
pub struct Poly<S> {
    nvars: usize,
    terms: BTreeMap<Monomial, S>,
    tol: Tolerance,
}

impl<S: Scalar> PartialEq for Poly<S> {
    fn eq(&self, other: &Self) -> bool {
        self.nvars == other.nvars && self.terms == other.terms
    }
}

impl<S: Scalar> Poly<S> {
    pub fn zero(nvars: usize) -> Self {
        Self { nvars, terms: BTreeMap::new(), tol: Tolerance::default() }
    }

    pub fn constant(nvars: usize, c: S) -> Self {
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(Monomial::one(nvars), c);
        }
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, S::one())
    }

    /// The coordinate `y^(index+1)`.
    pub fn var(nvars: usize, index: usize) -> Self {
        let mut p = Self::zero(nvars);
        p.terms.insert(Monomial::var(nvars, index), S::one());
        p
    }

    pub fn monomial(m: Monomial, c: S) -> Self {
        let mut p = Self::zero(m.nvars());
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Monomial, S)>) -> Self {
        let mut p = Self::zero(nvars);
        let mut scale = 0.0_f64;
        for (m, c) in terms {
            debug_assert_eq!(m.nvars(), nvars);
            if S::MODE == crate::Mode::Float {
                scale = scale.max(c.magnitude());
            }
            p.accumulate(m, c);
        }
        p.cleanup(scale);
        p
    }

    pub fn with_tolerance(mut self, tol: Tolerance) -> Self {
        self.tol = tol;
        self
    }

    pub fn tolerance(&self) -> Tolerance {
        self.tol
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &S)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Option<&S> {
        self.terms.get(m)
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degrees = self.terms.keys().map(Monomial::degree);
        match degrees.next() {
            Some(d) => degrees.all(|e| e == d),
            None => true,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.total_degree().is_none_or(|d| d == 0)
    }

    /// Value of the constant term.
    pub fn constant_term(&self) -> S {
        self.terms.get(&Monomial::one(self.nvars)).cloned().unwrap_or_else(S::zero)
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &S)> {
        self.terms.iter().next_back()
    }

    /// Largest coefficient magnitude (0 for the zero polynomial).
    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(Scalar::magnitude).fold(0.0, f64::max)
    }

    fn float_scale(&self) -> f64 {
        if S::MODE == crate::Mode::Float {
            self.max_abs()
        } else {
            0.0
        }
    }

    fn accumulate(&mut self, m: Monomial, c: S) {
        match self.terms.get_mut(&m) {
            Some(v) => *v = v.clone() + c,
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    fn cleanup(&mut self, scale: f64) {
        let tol = self.tol;
        self.terms.retain(|_, c| !c.is_negligible(scale, &tol));
    }

    pub fn scale(&self, c: &S) -> Self {
        let scale = self.float_scale() * c.magnitude();
        let mut out = Self { nvars: self.nvars, terms: BTreeMap::new(), tol: self.tol };
        for (m, v) in &self.terms {
            out.terms.insert(m.clone(), v.clone() * c.clone());
        }
        out.cleanup(scale);
        out
    }

    pub fn mul_monomial(&self, m: &Monomial, c: &S) -> Self {
        let scale = self.float_scale() * c.magnitude();
        let mut out = Self { nvars: self.nvars, terms: BTreeMap::new(), tol: self.tol };
        for (k, v) in &self.terms {
            out.terms.insert(k.mul(m), v.clone() * c.clone());
        }
        out.cleanup(scale);
        out
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one(self.nvars).with_tolerance(self.tol);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Partial derivative with respect to `y^(index+1)`.
    pub fn diff_y(&self, index: usize) -> Self {
        let mut out = Self { nvars: self.nvars, terms: BTreeMap::new(), tol: self.tol };
        for (m, c) in &self.terms {
            if let Some((lowered, e)) = m.lower(index) {
                out.terms.insert(lowered, c.clone() * S::from_i64(e as i64));
            }
        }
        out
    }

    pub fn eval(&self, y: &[S]) -> S {
        debug_assert_eq!(y.len(), self.nvars);
        let mut acc = S::zero();
        for (m, c) in &self.terms {
            let mut term = c.clone();
            for (v, &e) in y.iter().zip(m.exponents()) {
                for _ in 0..e {
                    term = term * v.clone();
                }
            }
            acc = acc + term;
        }
        acc
    }

    /// Sum of |c·y^α| over terms, the natural scale for a float zero test of
    /// `self.eval(y)`.
    pub fn eval_abs(&self, y: &[S]) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                m.exponents()
                    .iter()
                    .zip(y)
                    .fold(c.magnitude(), |acc, (&e, v)| acc * v.magnitude().powi(e as i32))
            })
            .sum()
    }

    /// `Σ_l y^l · p_l`, transvection of a table of polynomials by `y`.
    pub fn transvect(parts: &[Poly<S>]) -> Self {
        let nvars = parts.first().map_or(0, Poly::nvars);
        let mut acc = Self::zero(nvars);
        for (l, p) in parts.iter().enumerate() {
            acc = &acc + &p.mul_monomial(&Monomial::var(nvars, l), &S::one());
        }
        acc
    }

    /// Exact division: returns `Some(r)` iff `self = r·q`.
    ///
    /// Single-divisor division in graded-lex order leaves a zero remainder
    /// exactly when `q` divides `self`; the first leading term of the running
    /// remainder not divisible by `lt(q)` proves non-divisibility.
    pub fn exact_divide(&self, q: &Poly<S>) -> Result<Option<Poly<S>>, super::PolyError> {
        let (lm_q, lc_q) = q.leading_term().ok_or(super::PolyError::DivisionByZero)?;
        let (lm_q, lc_q) = (lm_q.clone(), lc_q.clone());
        let base_scale = self.float_scale();
        let q_scale = q.float_scale();
        let mut rem = self.clone();
        let mut quot = Self::zero(self.nvars).with_tolerance(self.tol);
        while let Some((lm, lc)) = rem.leading_term() {
            if !lm_q.divides(lm) {
                return Ok(None);
            }
            let shift = lm.div(&lm_q);
            let c = lc.clone() / lc_q.clone();
            let lm = lm.clone();
            let scale = base_scale.max(q_scale * c.magnitude());
            for (m, v) in &q.terms {
                rem.accumulate(m.mul(&shift), -(v.clone() * c.clone()));
            }
            // The leading term cancels by construction.
            rem.terms.remove(&lm);
            rem.cleanup(scale);
            quot.terms.insert(shift, c);
        }
        Ok(Some(quot))
    }

    /// Homogeneous component of the given degree.
    pub fn homogeneous_part(&self, degree: u32) -> Self {
        Self {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() == degree)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
            tol: self.tol,
        }
    }

    /// Applies `f` coefficient-wise into another scalar field.
    pub fn map_coefficients<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Poly<T> {
        Poly::from_terms(self.nvars, self.terms.iter().map(|(m, c)| (m.clone(), f(c))))
            .with_tolerance(self.tol)
    }

    fn combine(&self, other: &Self, negate: bool) -> Self {
        assert_eq!(self.nvars, other.nvars, "variable count mismatch");
        let scale = self.float_scale().max(other.float_scale());
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.accumulate(m.clone(), if negate { -c.clone() } else { c.clone() });
        }
        out.cleanup(scale);
        out
    }

    fn product(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars, "variable count mismatch");
        let scale = self.float_scale() * other.float_scale();
        let mut out = Self { nvars: self.nvars, terms: BTreeMap::new(), tol: self.tol };
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.accumulate(ma.mul(mb), ca.clone() * cb.clone());
            }
        }
        out.cleanup(scale);
        out
    }
}

impl<S: Scalar> Add for &Poly<S> {
    type Output = Poly<S>;
    fn add(self, rhs: &Poly<S>) -> Poly<S> {
        self.combine(rhs, false)
    }
}

impl<S: Scalar> Sub for &Poly<S> {
    type Output = Poly<S>;
    fn sub(self, rhs: &Poly<S>) -> Poly<S> {
        self.combine(rhs, true)
    }
}

impl<S: Scalar> Mul for &Poly<S> {
    type Output = Poly<S>;
    fn mul(self, rhs: &Poly<S>) -> Poly<S> {
        self.product(rhs)
    }
}

impl<S: Scalar> Neg for &Poly<S> {
    type Output = Poly<S>;
    fn neg(self) -> Poly<S> {
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
            tol: self.tol,
        }
    }
}

macro_rules! by_value {
    ($trait:ident, $method:ident) => {
        impl<S: Scalar> $trait for Poly<S> {
            type Output = Poly<S>;
            fn $method(self, rhs: Poly<S>) -> Poly<S> {
                (&self).$method(&rhs)
            }
        }
    };
}

by_value!(Add, add);
by_value!(Sub, sub);
by_value!(Mul, mul);

impl<S: Scalar> Neg for Poly<S> {
    type Output = Poly<S>;
    fn neg(self) -> Poly<S> {
        -&self
    }
}

impl<S: Scalar> fmt::Display for Poly<S> {
    /// Canonical form: descending graded-lex order, unit coefficients elided.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let negative = c.to_f64() < 0.0;
            let abs = if negative { -c.clone() } else { c.clone() };
            match (k, negative) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let is_one = abs.is_one();
            if m.degree() == 0 {
                write!(f, "{abs}")?;
            } else if is_one {
                write!(f, "{m}")?;
            } else {
                write!(f, "{abs}*{m}")?;
            }
        }
        Ok(())
    }
}
