use std::collections::BTreeMap;

use crate::expr::Expr;
use crate::poly::{Monomial, Poly};
use crate::scalar::{Scalar, Tolerance};
use crate::{Error, Result};

/// Sorted, 0-based multi-index of a symmetric coefficient.
pub type MultiIndex = Vec<usize>;

/// `T = a_{i1..im}(x) y^{i1}..y^{im}` with `a` fully symmetric.
///
/// Only one representative per sorted multi-index is stored; the expansion
/// of `T` multiplies it by the number of distinct index permutations.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSpec {
    n: usize,
    m: usize,
    coeffs: BTreeMap<MultiIndex, Expr>,
}

impl MetricSpec {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if !(2..=4).contains(&n) {
            return Err(Error::InvalidSpec(format!("dimension {n} not in 2..=4")));
        }
        if m < 2 {
            return Err(Error::InvalidSpec(format!("degree {m} must be at least 2")));
        }
        Ok(Self { n, m, coeffs: BTreeMap::new() })
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.m
    }

    fn key(&self, index: &[usize]) -> Result<MultiIndex> {
        if index.len() != self.m {
            return Err(Error::InvalidSpec(format!(
                "multi-index of length {} for a degree-{} metric",
                index.len(),
                self.m
            )));
        }
        if let Some(&bad) = index.iter().find(|&&i| i >= self.n) {
            return Err(Error::InvalidSpec(format!("index {} out of range 1..{}", bad + 1, self.n)));
        }
        let mut key = index.to_vec();
        key.sort_unstable();
        Ok(key)
    }

    /// Sets `a_{index}` (0-based, any order). A second assignment to the same
    /// sorted multi-index is rejected.
    pub fn insert(&mut self, index: &[usize], e: Expr) -> Result<()> {
        let key = self.key(index)?;
        if let Some(v) = e.max_var() {
            if v >= self.n {
                return Err(Error::InvalidSpec(format!("coefficient uses x{} in dimension {}", v + 1, self.n)));
            }
        }
        if self.coeffs.contains_key(&key) {
            let shown: Vec<String> = key.iter().map(|i| (i + 1).to_string()).collect();
            return Err(Error::InvalidSpec(format!("duplicate coefficient a_{}", shown.join(""))));
        }
        if !e.is_zero() {
            self.coeffs.insert(key, e);
        }
        Ok(())
    }

    pub fn with(mut self, index: &[usize], e: Expr) -> Result<Self> {
        self.insert(index, e)?;
        Ok(self)
    }

    /// Coefficient lookup, invariant under permutation of `index`.
    pub fn coefficient(&self, index: &[usize]) -> Option<&Expr> {
        let mut key = index.to_vec();
        key.sort_unstable();
        self.coeffs.get(&key)
    }

    pub fn coefficients(&self) -> impl Iterator<Item = (&MultiIndex, &Expr)> {
        self.coeffs.iter()
    }

    /// Number of distinct orderings of a sorted multi-index.
    pub fn multiplicity(index: &[usize]) -> u64 {
        let fact = |k: usize| (1..=k as u64).product::<u64>();
        let mut runs = Vec::new();
        let mut i = 0;
        while i < index.len() {
            let j = index[i..].iter().take_while(|&&v| v == index[i]).count();
            runs.push(j);
            i += j;
        }
        fact(index.len()) / runs.into_iter().map(fact).product::<u64>()
    }

    fn monomial(&self, index: &[usize]) -> Monomial {
        let mut e = vec![0u16; self.n];
        for &i in index {
            e[i] += 1;
        }
        Monomial::from_exponents(e)
    }

    /// Symbolic x-derivatives of every coefficient, computed once.
    pub fn compile(&self) -> CompiledMetric {
        let n = self.n;
        let mut first = BTreeMap::new();
        let mut second = BTreeMap::new();
        for (k, e) in &self.coeffs {
            let d1: Vec<Expr> = (0..n).map(|l| e.diff(l)).collect();
            let d2: Vec<Vec<Expr>> = (0..n).map(|l| (0..n).map(|s| d1[l].diff(s)).collect()).collect();
            first.insert(k.clone(), d1);
            second.insert(k.clone(), d2);
        }
        CompiledMetric { spec: self.clone(), first, second }
    }
}

/// A metric together with the symbolic first and second x-derivatives of its
/// coefficients.
#[derive(Debug, Clone)]
pub struct CompiledMetric {
    spec: MetricSpec,
    first: BTreeMap<MultiIndex, Vec<Expr>>,
    second: BTreeMap<MultiIndex, Vec<Vec<Expr>>>,
}

impl CompiledMetric {
    pub fn spec(&self) -> &MetricSpec {
        &self.spec
    }

    pub fn dimension(&self) -> usize {
        self.spec.n
    }

    pub fn degree(&self) -> usize {
        self.spec.m
    }

    pub fn first_derivatives(&self, index: &[usize]) -> Option<&[Expr]> {
        self.first.get(index).map(Vec::as_slice)
    }

    pub fn second_derivatives(&self, index: &[usize]) -> Option<&[Vec<Expr>]> {
        self.second.get(index).map(Vec::as_slice)
    }

    /// Evaluates everything at `x0`.
    pub fn at<S: Scalar>(&self, x0: &[S], tol: Tolerance) -> Result<PointContext<S>> {
        PointContext::build(self, x0, tol, true)
    }

    /// Values and first derivatives only (enough for the spray).
    pub fn at_first_order<S: Scalar>(&self, x0: &[S], tol: Tolerance) -> Result<PointContext<S>> {
        PointContext::build(self, x0, tol, false)
    }
}

/// Coefficient values and x-derivatives at one base point.
#[derive(Debug, Clone)]
pub struct PointContext<S> {
    n: usize,
    m: usize,
    x0: Vec<S>,
    monomials: BTreeMap<MultiIndex, (Monomial, S)>,
    values: BTreeMap<MultiIndex, S>,
    first: BTreeMap<MultiIndex, Vec<S>>,
    second: Option<BTreeMap<MultiIndex, Vec<Vec<S>>>>,
    tol: Tolerance,
}

impl<S: Scalar> PointContext<S> {
    fn build(metric: &CompiledMetric, x0: &[S], tol: Tolerance, with_second: bool) -> Result<Self> {
        let spec = &metric.spec;
        if x0.len() != spec.n {
            return Err(Error::InvalidSpec(format!(
                "base point has {} coordinates, metric dimension is {}",
                x0.len(),
                spec.n
            )));
        }
        let mut monomials = BTreeMap::new();
        let mut values = BTreeMap::new();
        let mut first = BTreeMap::new();
        let mut second = BTreeMap::new();
        for (k, e) in &spec.coeffs {
            let count = S::from_i64(MetricSpec::multiplicity(k) as i64);
            monomials.insert(k.clone(), (spec.monomial(k), count));
            values.insert(k.clone(), e.eval(x0)?);
            let d1 = &metric.first[k];
            first.insert(k.clone(), d1.iter().map(|d| d.eval(x0)).collect::<Result<Vec<S>, _>>()?);
            if with_second {
                let d2 = &metric.second[k];
                let rows = d2
                    .iter()
                    .map(|row| row.iter().map(|d| d.eval(x0)).collect::<Result<Vec<S>, _>>())
                    .collect::<Result<Vec<_>, _>>()?;
                second.insert(k.clone(), rows);
            }
        }
        Ok(Self {
            n: spec.n,
            m: spec.m,
            x0: x0.to_vec(),
            monomials,
            values,
            first,
            second: with_second.then_some(second),
            tol,
        })
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.m
    }

    pub fn point(&self) -> &[S] {
        &self.x0
    }

    pub fn tolerance(&self) -> Tolerance {
        self.tol
    }

    pub fn value(&self, index: &[usize]) -> S {
        let mut key = index.to_vec();
        key.sort_unstable();
        self.values.get(&key).cloned().unwrap_or_else(S::zero)
    }

    pub fn first_derivative(&self, index: &[usize], l: usize) -> S {
        let mut key = index.to_vec();
        key.sort_unstable();
        self.first.get(&key).map_or_else(S::zero, |d| d[l].clone())
    }

    pub fn second_derivative(&self, index: &[usize], l: usize, s: usize) -> Option<S> {
        let mut key = index.to_vec();
        key.sort_unstable();
        let table = self.second.as_ref()?;
        Some(table.get(&key).map_or_else(S::zero, |d| d[l][s].clone()))
    }

    fn assemble(&self, value: impl Fn(&MultiIndex) -> S) -> Poly<S> {
        let terms = self.monomials.iter().map(|(k, (mono, count))| (mono.clone(), count.clone() * value(k)));
        Poly::from_terms(self.n, terms).with_tolerance(self.tol)
    }

    /// `T(x0, y)`.
    pub fn t(&self) -> Poly<S> {
        self.assemble(|k| self.values[k].clone())
    }

    /// `∂T/∂x^l (x0, y)`.
    pub fn t_x(&self, l: usize) -> Poly<S> {
        self.assemble(|k| self.first[k][l].clone())
    }

    /// `∂²T/∂x^l∂x^s (x0, y)`; `None` for first-order contexts.
    pub fn t_xx(&self, l: usize, s: usize) -> Option<Poly<S>> {
        let second = self.second.as_ref()?;
        Some(self.assemble(|k| second[k][l][s].clone()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    #[test]
    fn multiplicities() {
        assert_eq!(MetricSpec::multiplicity(&[0, 1, 2]), 6);
        assert_eq!(MetricSpec::multiplicity(&[0, 0, 2]), 3);
        assert_eq!(MetricSpec::multiplicity(&[1, 1, 1]), 1);
        assert_eq!(MetricSpec::multiplicity(&[0, 1]), 2);
    }

    #[test]
    fn lookup_is_permutation_invariant() {
        let spec = MetricSpec::new(3, 3).unwrap().with(&[2, 0, 1], Expr::integer(5)).unwrap();
        for idx in [[0, 1, 2], [1, 2, 0], [2, 1, 0]] {
            assert_eq!(spec.coefficient(&idx), Some(&Expr::integer(5)));
        }
        let mut spec = spec;
        assert!(spec.insert(&[1, 0, 2], Expr::one()).is_err());
        assert!(spec.insert(&[0, 3, 1], Expr::one()).is_err());
        assert!(spec.insert(&[0, 1], Expr::one()).is_err());
        assert!(MetricSpec::new(5, 3).is_err());
        assert!(MetricSpec::new(3, 1).is_err());
    }

    #[test]
    fn berwald_moor_polynomial() {
        // a_123 = 1/6 so that T = y1 y2 y3.
        let spec = MetricSpec::new(3, 3)
            .unwrap()
            .with(&[0, 1, 2], Expr::parse("1/6", 3).unwrap())
            .unwrap();
        let ctx = spec.compile().at::<Rational>(&vec![Rational::from_integer(0.into()); 3], Tolerance::default()).unwrap();
        let t = ctx.t();
        assert_eq!(t.to_string(), "y1*y2*y3");
        assert!(ctx.t_x(0).is_zero());
    }

    #[test]
    fn second_derivatives_match_finite_differences() {
        let spec = MetricSpec::new(2, 2)
            .unwrap()
            .with(&[0, 0], Expr::parse("exp(x1*x2)", 2).unwrap())
            .unwrap();
        let compiled = spec.compile();
        let x = [0.3, -0.4];
        let ctx = compiled.at::<f64>(&x, Tolerance::default()).unwrap();
        let h = 1e-4;
        let f = |a: f64, b: f64| (a * b).exp();
        let fd = (f(x[0] + h, x[1] + h) - f(x[0] + h, x[1] - h) - f(x[0] - h, x[1] + h) + f(x[0] - h, x[1] - h))
            / (4.0 * h * h);
        let got = ctx.second_derivative(&[0, 0], 0, 1).unwrap();
        assert!((got - fd).abs() < 1e-6);
        assert!(compiled.at_first_order::<f64>(&x, Tolerance::default()).unwrap().t_xx(0, 1).is_none());
    }
}
