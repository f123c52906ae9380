//! Small dense linear algebra: cofactor determinants/adjugates over any
//! commutative ring, Gauss-Jordan over a scalar field.

use crate::expr::Expr;
use crate::poly::Poly;
use crate::scalar::{Scalar, Tolerance};

pub trait Ring: Clone {
    fn ring_zero(&self) -> Self;
    fn ring_add(&self, other: &Self) -> Self;
    fn ring_sub(&self, other: &Self) -> Self;
    fn ring_mul(&self, other: &Self) -> Self;
    fn ring_is_zero(&self) -> bool;
}

impl<S: Scalar> Ring for Poly<S> {
    fn ring_zero(&self) -> Self {
        Poly::zero(self.nvars()).with_tolerance(self.tolerance())
    }
    fn ring_add(&self, other: &Self) -> Self {
        self + other
    }
    fn ring_sub(&self, other: &Self) -> Self {
        self - other
    }
    fn ring_mul(&self, other: &Self) -> Self {
        self * other
    }
    fn ring_is_zero(&self) -> bool {
        self.is_zero()
    }
}

impl Ring for Expr {
    fn ring_zero(&self) -> Self {
        Expr::zero()
    }
    fn ring_add(&self, other: &Self) -> Self {
        Expr::add(self.clone(), other.clone())
    }
    fn ring_sub(&self, other: &Self) -> Self {
        Expr::sub(self.clone(), other.clone())
    }
    fn ring_mul(&self, other: &Self) -> Self {
        Expr::mul(self.clone(), other.clone())
    }
    fn ring_is_zero(&self) -> bool {
        self.is_zero()
    }
}

fn minor<R: Clone>(m: &[Vec<R>], row: usize, col: usize) -> Vec<Vec<R>> {
    m.iter()
        .enumerate()
        .filter(|(i, _)| *i != row)
        .map(|(_, r)| r.iter().enumerate().filter(|(j, _)| *j != col).map(|(_, v)| v.clone()).collect())
        .collect()
}

/// Laplace expansion along the first row. Intended for n ≤ 5.
pub fn determinant<R: Ring>(m: &[Vec<R>]) -> R {
    let n = m.len();
    assert!(n > 0 && m.iter().all(|r| r.len() == n), "square matrix required");
    match n {
        1 => m[0][0].clone(),
        2 => m[0][0].ring_mul(&m[1][1]).ring_sub(&m[0][1].ring_mul(&m[1][0])),
        _ => {
            let mut acc = m[0][0].ring_zero();
            for j in 0..n {
                if m[0][j].ring_is_zero() {
                    continue;
                }
                let term = m[0][j].ring_mul(&determinant(&minor(m, 0, j)));
                acc = if j % 2 == 0 { acc.ring_add(&term) } else { acc.ring_sub(&term) };
            }
            acc
        }
    }
}

/// Classical adjoint: `adj[i][j] = (-1)^{i+j} det(minor(j, i))`.
pub fn adjugate<R: Ring>(m: &[Vec<R>]) -> Vec<Vec<R>> {
    let n = m.len();
    assert!(n >= 2, "adjugate needs at least a 2x2 matrix");
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let d = determinant(&minor(m, j, i));
                    if (i + j) % 2 == 0 {
                        d
                    } else {
                        d.ring_zero().ring_sub(&d)
                    }
                })
                .collect()
        })
        .collect()
}

fn pivot_ok<S: Scalar>(v: &S, scale: f64, tol: &Tolerance) -> bool {
    !v.is_negligible(scale, tol)
}

/// Solves `a · X = b` for a square `a` and several right-hand sides.
/// Returns `None` when `a` is singular (to tolerance in float mode).
pub fn solve_many<S: Scalar>(mut a: Vec<Vec<S>>, mut b: Vec<Vec<S>>, tol: &Tolerance) -> Option<Vec<Vec<S>>> {
    let n = a.len();
    let scale = a.iter().flatten().map(Scalar::magnitude).fold(0.0, f64::max);
    for col in 0..n {
        let pivot = if S::MODE == crate::Mode::Exact {
            (col..n).find(|&r| !a[r][col].is_zero())
        } else {
            (col..n).max_by(|&r, &s| a[r][col].magnitude().total_cmp(&a[s][col].magnitude()))
        }?;
        if !pivot_ok(&a[pivot][col], scale, tol) {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = S::one() / a[col][col].clone();
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone() * inv.clone();
            for c in col..n {
                let v = a[col][c].clone() * factor.clone();
                a[r][c] = a[r][c].clone() - v;
            }
            for k in 0..b[r].len() {
                let v = b[col][k].clone() * factor.clone();
                b[r][k] = b[r][k].clone() - v;
            }
        }
    }
    for (r, row) in b.iter_mut().enumerate() {
        for v in row.iter_mut() {
            *v = v.clone() / a[r][r].clone();
        }
    }
    Some(b)
}

pub fn solve<S: Scalar>(a: Vec<Vec<S>>, b: Vec<S>, tol: &Tolerance) -> Option<Vec<S>> {
    let rhs = b.into_iter().map(|v| vec![v]).collect();
    solve_many(a, rhs, tol).map(|x| x.into_iter().map(|mut r| r.remove(0)).collect())
}

pub fn invert<S: Scalar>(a: &[Vec<S>], tol: &Tolerance) -> Option<Vec<Vec<S>>> {
    let n = a.len();
    let identity = (0..n)
        .map(|i| (0..n).map(|j| if i == j { S::one() } else { S::zero() }).collect())
        .collect();
    solve_many(a.to_vec(), identity, tol)
}
