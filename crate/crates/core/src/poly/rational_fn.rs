use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::{Poly, PolyError};
use crate::scalar::Scalar;

/// Quotient of polynomials with the denominator kept as a product of
/// factor powers `Π f_k^{e_k}`.
///
/// No GCDs are taken. Factors are shared structurally: adding two fractions
/// whose denominators contain the same factor polynomial raises it to the
/// larger exponent instead of multiplying it in twice, which keeps the
/// derivatives of `adj/det` expressions at denominators `det^k`.
#[derive(Debug, Clone)]
pub struct RationalFn<S> {
    num: Poly<S>,
    den: Vec<(Poly<S>, u32)>,
}

impl<S: Scalar> RationalFn<S> {
    pub fn from_poly(p: Poly<S>) -> Self {
        Self { num: p, den: Vec::new() }
    }

    pub fn zero(nvars: usize) -> Self {
        Self::from_poly(Poly::zero(nvars))
    }

    /// `num / den`.
    pub fn new(num: Poly<S>, den: Poly<S>) -> Result<Self, PolyError> {
        Self::with_factors(num, vec![(den, 1)])
    }

    pub fn with_factors(mut num: Poly<S>, factors: Vec<(Poly<S>, u32)>) -> Result<Self, PolyError> {
        let mut den: Vec<(Poly<S>, u32)> = Vec::new();
        for (f, e) in factors {
            if e == 0 {
                continue;
            }
            if f.is_zero() {
                return Err(PolyError::ZeroDenominator);
            }
            if f.is_constant() {
                let c = f.constant_term();
                for _ in 0..e {
                    num = num.scale(&(S::one() / c.clone()));
                }
                continue;
            }
            match den.iter_mut().find(|(g, _)| *g == f) {
                Some((_, k)) => *k += e,
                None => den.push((f, e)),
            }
        }
        Ok(Self { num, den })
    }

    pub fn numerator(&self) -> &Poly<S> {
        &self.num
    }

    pub fn factors(&self) -> &[(Poly<S>, u32)] {
        &self.den
    }

    pub fn nvars(&self) -> usize {
        self.num.nvars()
    }

    /// Expanded denominator.
    pub fn denominator(&self) -> Poly<S> {
        let mut acc = Poly::one(self.nvars()).with_tolerance(self.num.tolerance());
        for (f, e) in &self.den {
            acc = &acc * &f.pow(*e);
        }
        acc
    }

    /// `P/Q ≡ 0 ⟺ P ≡ 0`.
    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Equality by cross-multiplication.
    pub fn equivalent(&self, other: &Self) -> bool {
        (self - other).is_zero()
    }

    pub fn is_polynomial_form(&self) -> bool {
        self.den.is_empty()
    }

    pub fn scale(&self, c: &S) -> Self {
        Self { num: self.num.scale(c), den: self.den.clone() }
    }

    pub fn mul_poly(&self, p: &Poly<S>) -> Self {
        Self { num: &self.num * p, den: self.den.clone() }
    }

    pub fn div_poly(&self, p: &Poly<S>) -> Result<Self, PolyError> {
        let mut factors = self.den.clone();
        factors.push((p.clone(), 1));
        Self::with_factors(self.num.clone(), factors)
    }

    /// Brings both operands over the least common factor list.
    fn align(&self, other: &Self) -> (Poly<S>, Poly<S>, Vec<(Poly<S>, u32)>) {
        let mut den = self.den.clone();
        for (f, e) in &other.den {
            match den.iter_mut().find(|(g, _)| g == f) {
                Some((_, k)) => *k = (*k).max(*e),
                None => den.push((f.clone(), *e)),
            }
        }
        let lift = |r: &Self| {
            let mut num = r.num.clone();
            for (f, e) in &den {
                let have = r.den.iter().find(|(g, _)| g == f).map_or(0, |(_, k)| *k);
                if *e > have {
                    num = &num * &f.pow(e - have);
                }
            }
            num
        };
        (lift(self), lift(other), den)
    }

    /// Quotient rule over the factored denominator:
    /// `∂(P/Πf^e) = (P'·Πf − P·Σ e_k f_k' Π_{l≠k} f_l) / Πf^{e+1}`.
    pub fn diff_y(&self, index: usize) -> Self {
        if self.den.is_empty() {
            return Self::from_poly(self.num.diff_y(index));
        }
        let product = |skip: Option<usize>| {
            let mut acc = Poly::one(self.nvars()).with_tolerance(self.num.tolerance());
            for (k, (f, _)) in self.den.iter().enumerate() {
                if Some(k) != skip {
                    acc = &acc * f;
                }
            }
            acc
        };
        let mut num = &self.num.diff_y(index) * &product(None);
        for (k, (f, e)) in self.den.iter().enumerate() {
            let df = f.diff_y(index);
            if df.is_zero() {
                continue;
            }
            let term = &(&self.num * &df) * &product(Some(k));
            num = &num - &term.scale(&S::from_i64(*e as i64));
        }
        Self { num, den: self.den.iter().map(|(f, e)| (f.clone(), e + 1)).collect() }
    }

    /// Value at `y`, or `None` where the denominator vanishes.
    pub fn eval(&self, y: &[S]) -> Option<S> {
        let mut den = S::one();
        for (f, e) in &self.den {
            let v = f.eval(y);
            if v.is_negligible(f.eval_abs(y), &f.tolerance()) {
                return None;
            }
            for _ in 0..*e {
                den = den * v.clone();
            }
        }
        Some(self.num.eval(y) / den)
    }

    /// Division route of the polynomiality test: `Some(p)` iff the
    /// numerator is divisible by every factor power.
    pub fn polynomial_quotient(&self) -> Result<Option<Poly<S>>, PolyError> {
        let mut num = self.num.clone();
        for (f, e) in &self.den {
            for _ in 0..*e {
                match num.exact_divide(f)? {
                    Some(q) => num = q,
                    None => return Ok(None),
                }
            }
        }
        Ok(Some(num))
    }

    /// Cancels every factor occurrence that divides the numerator exactly.
    pub fn reduce(&self) -> Self {
        let mut num = self.num.clone();
        let mut den = Vec::new();
        for (f, e) in &self.den {
            let mut left = *e;
            while left > 0 {
                match num.exact_divide(f) {
                    Ok(Some(q)) => {
                        num = q;
                        left -= 1;
                    }
                    _ => break,
                }
            }
            if left > 0 {
                den.push((f.clone(), left));
            }
        }
        Self { num, den }
    }
}

impl<S: Scalar> Add for &RationalFn<S> {
    type Output = RationalFn<S>;
    fn add(self, rhs: &RationalFn<S>) -> RationalFn<S> {
        let (a, b, den) = self.align(rhs);
        RationalFn { num: &a + &b, den }
    }
}

impl<S: Scalar> Sub for &RationalFn<S> {
    type Output = RationalFn<S>;
    fn sub(self, rhs: &RationalFn<S>) -> RationalFn<S> {
        let (a, b, den) = self.align(rhs);
        RationalFn { num: &a - &b, den }
    }
}

impl<S: Scalar> Mul for &RationalFn<S> {
    type Output = RationalFn<S>;
    fn mul(self, rhs: &RationalFn<S>) -> RationalFn<S> {
        let mut den = self.den.clone();
        for (f, e) in &rhs.den {
            match den.iter_mut().find(|(g, _)| g == f) {
                Some((_, k)) => *k += e,
                None => den.push((f.clone(), *e)),
            }
        }
        RationalFn { num: &self.num * &rhs.num, den }
    }
}

impl<S: Scalar> Neg for &RationalFn<S> {
    type Output = RationalFn<S>;
    fn neg(self) -> RationalFn<S> {
        RationalFn { num: -&self.num, den: self.den.clone() }
    }
}

impl<S: Scalar> fmt::Display for RationalFn<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_empty() || self.num.is_zero() {
            return write!(f, "{}", self.num);
        }
        write!(f, "({}) / (", self.num)?;
        for (k, (g, e)) in self.den.iter().enumerate() {
            if k > 0 {
                f.write_str(" * ")?;
            }
            match e {
                1 => write!(f, "({g})")?,
                e => write!(f, "({g})^{e}")?,
            }
        }
        f.write_str(")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use num_traits::One;

    type P = Poly<Rational>;
    type R = RationalFn<Rational>;

    fn y(i: usize) -> P {
        P::var(2, i)
    }

    #[test]
    fn shared_denominator_addition() {
        let a = R::new(y(0), y(1)).unwrap();
        let b = R::new(P::one(2), y(1)).unwrap();
        let sum = &a + &b;
        assert_eq!(sum.factors().len(), 1);
        let expected = R::new(&y(0) + &P::one(2), y(1)).unwrap();
        assert!(sum.equivalent(&expected));
    }

    #[test]
    fn cross_multiplied_zero_test() {
        let one = P::one(2);
        let f = R::new(&(&y(0) * &y(0)) - &one, &y(0) - &one).unwrap();
        let g = R::from_poly(&y(0) + &one);
        assert!((&f - &g).is_zero());
    }

    #[test]
    fn quotient_rule() {
        let f = R::new(y(0), y(1)).unwrap();
        let d = f.diff_y(1);
        let expected = R::new(-&y(0), &y(1) * &y(1)).unwrap();
        assert!(d.equivalent(&expected));
    }

    #[test]
    fn constant_denominators_fold() {
        let two = P::constant(2, Rational::from_integer(2.into()));
        let f = R::new(y(0), two).unwrap();
        assert!(f.is_polynomial_form());
        assert_eq!(f.numerator().coefficient(&super::super::Monomial::var(2, 0)), Some(&(Rational::one() / Rational::from_integer(2.into()))));
        assert!(R::new(y(0), P::zero(2)).is_err());
    }

    #[test]
    fn reduce_cancels_divisible_factors() {
        let f = R::new(&(&y(0) * &y(0)) * &y(0), y(0)).unwrap();
        let r = f.reduce();
        assert!(r.is_polynomial_form());
        assert_eq!(r.numerator(), &(&y(0) * &y(0)));
    }
}
