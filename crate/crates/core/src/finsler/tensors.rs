use nalgebra::DMatrix;

use super::PointContext;
use crate::linalg;
use crate::poly::{Poly, RationalFn};
use crate::scalar::Scalar;
use crate::{Error, Result};

/// `T` with its y-derivatives up to third order and the x-derivatives of
/// each, all at the context's base point.
#[derive(Debug, Clone)]
pub struct FundamentalTensors<S> {
    pub n: usize,
    pub m: usize,
    pub t: Poly<S>,
    /// `T_i`
    pub grad: Vec<Poly<S>>,
    /// `T_ij`
    pub hessian: Vec<Vec<Poly<S>>>,
    /// `T_ijk`
    pub third: Vec<Vec<Vec<Poly<S>>>>,
    /// `T_{,l}`
    pub t_x: Vec<Poly<S>>,
    /// `grad_x[h][l] = T_{h,l}`
    pub grad_x: Vec<Vec<Poly<S>>>,
    /// `hessian_x[h][j][l] = T_{hj,l}`
    pub hessian_x: Vec<Vec<Vec<Poly<S>>>>,
    /// `third_x[i][j][k][l] = T_{ijk,l}`
    pub third_x: Vec<Vec<Vec<Vec<Poly<S>>>>>,
}

fn derivatives<S: Scalar>(p: &Poly<S>, n: usize) -> (Vec<Poly<S>>, Vec<Vec<Poly<S>>>, Vec<Vec<Vec<Poly<S>>>>) {
    let d1: Vec<Poly<S>> = (0..n).map(|i| p.diff_y(i)).collect();
    let d2: Vec<Vec<Poly<S>>> = d1.iter().map(|g| (0..n).map(|j| g.diff_y(j)).collect()).collect();
    let d3 = d2
        .iter()
        .map(|row| row.iter().map(|h| (0..n).map(|k| h.diff_y(k)).collect()).collect())
        .collect();
    (d1, d2, d3)
}

/// Builds `T`, `T_i`, `T_ij`, `T_ijk` and their x-derivatives at the point.
pub fn fundamental_t<S: Scalar>(ctx: &PointContext<S>) -> FundamentalTensors<S> {
    let n = ctx.dimension();
    let t = ctx.t();
    let (grad, hessian, third) = derivatives(&t, n);
    let t_x: Vec<Poly<S>> = (0..n).map(|l| ctx.t_x(l)).collect();
    let per_l: Vec<_> = t_x.iter().map(|p| derivatives(p, n)).collect();
    let grad_x = (0..n).map(|h| (0..n).map(|l| per_l[l].0[h].clone()).collect()).collect();
    let hessian_x = (0..n)
        .map(|h| (0..n).map(|j| (0..n).map(|l| per_l[l].1[h][j].clone()).collect()).collect())
        .collect();
    let third_x = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).map(|k| (0..n).map(|l| per_l[l].2[i][j][k].clone()).collect()).collect())
                .collect()
        })
        .collect();
    FundamentalTensors { n, m: ctx.degree(), t, grad, hessian, third, t_x, grad_x, hessian_x, third_x }
}

/// `T^{ij} = adj[T_ij] / det[T_ij]`.
#[derive(Debug, Clone)]
pub struct InverseHessian<S> {
    pub det: Poly<S>,
    pub adjugate: Vec<Vec<Poly<S>>>,
}

impl<S: Scalar> InverseHessian<S> {
    pub fn entry(&self, i: usize, j: usize) -> RationalFn<S> {
        RationalFn::new(self.adjugate[i][j].clone(), self.det.clone()).expect("nonzero determinant")
    }

    /// `Σ_j T_ij adj_jk = δ_ik det`, i.e. `Σ_j T_ij T^{jk} = δ_i^k` after
    /// cross-multiplication.
    pub fn satisfies_identity(&self, hessian: &[Vec<Poly<S>>]) -> bool {
        let n = hessian.len();
        (0..n).all(|i| {
            (0..n).all(|k| {
                let mut acc = Poly::zero(self.det.nvars()).with_tolerance(self.det.tolerance());
                for j in 0..n {
                    acc = &acc + &(&hessian[i][j] * &self.adjugate[j][k]);
                }
                if i == k {
                    acc = &acc - &self.det;
                }
                acc.is_zero()
            })
        })
    }

    /// Numeric `T^{ij}(y)`; `None` where `det` vanishes.
    pub fn eval(&self, y: &[S]) -> Option<Vec<Vec<S>>> {
        let d = self.det.eval(y);
        if d.is_negligible(self.det.eval_abs(y), &self.det.tolerance()) {
            return None;
        }
        Some(
            self.adjugate
                .iter()
                .map(|row| row.iter().map(|a| a.eval(y) / d.clone()).collect())
                .collect(),
        )
    }
}

pub fn hessian_inverse<S: Scalar>(tensors: &FundamentalTensors<S>) -> Result<InverseHessian<S>> {
    let det = linalg::determinant(&tensors.hessian);
    if det.is_zero() {
        return Err(Error::DegenerateHessian);
    }
    Ok(InverseHessian { adjugate: linalg::adjugate(&tensors.hessian), det })
}

/// Numeric values of `T`, `T_i`, `T_ij`, `T_ijk` at `y`.
struct Jet {
    t: f64,
    d1: Vec<f64>,
    d2: Vec<Vec<f64>>,
    d3: Vec<Vec<Vec<f64>>>,
}

fn jet(tensors: &FundamentalTensors<f64>, y: &[f64]) -> Result<Jet> {
    let t = tensors.t.eval(y);
    if t <= 0.0 {
        return Err(Error::Degenerate(format!("T(y) = {t} is not positive at the probe point")));
    }
    Ok(Jet {
        t,
        d1: tensors.grad.iter().map(|p| p.eval(y)).collect(),
        d2: tensors.hessian.iter().map(|r| r.iter().map(|p| p.eval(y)).collect()).collect(),
        d3: tensors
            .third
            .iter()
            .map(|r| r.iter().map(|c| c.iter().map(|p| p.eval(y)).collect()).collect())
            .collect(),
    })
}

/// `g_ij = ½ ∂²(T^{2/m})/∂y^i∂y^j`, evaluated analytically from `T` and its
/// derivatives at `y` (float mode).
pub fn finsler_metric(tensors: &FundamentalTensors<f64>, y: &[f64]) -> Result<Vec<Vec<f64>>> {
    let j = jet(tensors, y)?;
    let p = 2.0 / tensors.m as f64;
    let n = tensors.n;
    Ok((0..n)
        .map(|a| {
            (0..n)
                .map(|b| {
                    0.5 * (p * (p - 1.0) * j.t.powf(p - 2.0) * j.d1[a] * j.d1[b]
                        + p * j.t.powf(p - 1.0) * j.d2[a][b])
                })
                .collect()
        })
        .collect())
}

/// Cartan tensor `C_ijk = ½ ∂g_ij/∂y^k` at `y` (float mode).
pub fn cartan_tensor(tensors: &FundamentalTensors<f64>, y: &[f64]) -> Result<Vec<Vec<Vec<f64>>>> {
    let j = jet(tensors, y)?;
    let p = 2.0 / tensors.m as f64;
    let n = tensors.n;
    let t = j.t;
    let mut c = vec![vec![vec![0.0; n]; n]; n];
    for a in 0..n {
        for b in 0..n {
            for k in 0..n {
                let v = p * (p - 1.0) * (p - 2.0) * t.powf(p - 3.0) * j.d1[a] * j.d1[b] * j.d1[k]
                    + p * (p - 1.0)
                        * t.powf(p - 2.0)
                        * (j.d2[a][k] * j.d1[b] + j.d1[a] * j.d2[b][k] + j.d2[a][b] * j.d1[k])
                    + p * t.powf(p - 1.0) * j.d3[a][b][k];
                c[a][b][k] = 0.25 * v;
            }
        }
    }
    Ok(c)
}

fn to_matrix(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let n = rows.len();
    DMatrix::from_fn(n, n, |i, j| rows[i][j])
}

fn from_matrix(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

/// `g^{ij} = T^{-2/m}/(m-1) · (T m(m-1) T^{ij} + (m-2) y^i y^j)` (float mode).
pub fn finsler_metric_inverse(
    tensors: &FundamentalTensors<f64>,
    inverse: &InverseHessian<f64>,
    y: &[f64],
) -> Result<Vec<Vec<f64>>> {
    let t = tensors.t.eval(y);
    if t <= 0.0 {
        return Err(Error::Degenerate(format!("T(y) = {t} is not positive at the probe point")));
    }
    let tij = inverse
        .eval(y)
        .ok_or_else(|| Error::Degenerate("det[T_ij] vanishes at the probe point".into()))?;
    let m = tensors.m as f64;
    let factor = t.powf(-2.0 / m) / (m - 1.0);
    let n = tensors.n;
    Ok((0..n)
        .map(|i| (0..n).map(|j| factor * (t * m * (m - 1.0) * tij[i][j] + (m - 2.0) * y[i] * y[j])).collect())
        .collect())
}

/// Inverse Hessian rebuilt from the Finsler metric,
/// `T^{ij} = ((m-1) g^{ij} - (m-2) l^i l^j) / (m(m-1) F^{m-2})`, with
/// `g^{ij}` from a numeric inversion of `g_ij` (float cross-check).
pub fn inverse_hessian_via_metric(tensors: &FundamentalTensors<f64>, y: &[f64]) -> Result<Vec<Vec<f64>>> {
    let g = finsler_metric(tensors, y)?;
    let g_inv = to_matrix(&g)
        .try_inverse()
        .ok_or_else(|| Error::Singular("Finsler metric g_ij at the probe point".into()))?;
    let g_inv = from_matrix(&g_inv);
    let m = tensors.m as f64;
    let f = tensors.t.eval(y).powf(1.0 / m);
    let n = tensors.n;
    let scale = 1.0 / (m * (m - 1.0) * f.powf(m - 2.0));
    Ok((0..n)
        .map(|i| {
            (0..n)
                .map(|j| scale * ((m - 1.0) * g_inv[i][j] - (m - 2.0) * (y[i] / f) * (y[j] / f)))
                .collect()
        })
        .collect())
}

/// Numeric inverse of a float matrix.
pub fn invert_numeric(rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    to_matrix(rows)
        .try_inverse()
        .map(|m| from_matrix(&m))
        .ok_or_else(|| Error::Singular("matrix is not invertible".into()))
}

/// Max |entry| of `Σ_j T_ij(y) T^{jk}(y) − δ_i^k` for the adjugate inverse.
pub fn identity_residual(tensors: &FundamentalTensors<f64>, inverse: &InverseHessian<f64>, y: &[f64]) -> Option<f64> {
    let tij = inverse.eval(y)?;
    let h: Vec<Vec<f64>> = tensors.hessian.iter().map(|r| r.iter().map(|p| p.eval(y)).collect()).collect();
    let n = tensors.n;
    let mut worst = 0.0_f64;
    for i in 0..n {
        for k in 0..n {
            let s: f64 = (0..n).map(|j| h[i][j] * tij[j][k]).sum();
            worst = worst.max((s - if i == k { 1.0 } else { 0.0 }).abs());
        }
    }
    Some(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;
    use crate::finsler::MetricSpec;
    use crate::scalar::{Rational, Tolerance};

    fn bm() -> FundamentalTensors<Rational> {
        let spec = MetricSpec::new(3, 3).unwrap().with(&[0, 1, 2], Expr::parse("1/6", 3).unwrap()).unwrap();
        let ctx = spec.compile().at::<Rational>(&vec![Rational::from_integer(0.into()); 3], Tolerance::default()).unwrap();
        fundamental_t(&ctx)
    }

    #[test]
    fn berwald_moor_hessian() {
        let t = bm();
        assert_eq!(t.hessian[0][1].to_string(), "y3");
        assert_eq!(t.third[0][1][2].to_string(), "1");
        let inv = hessian_inverse(&t).unwrap();
        assert_eq!(inv.det.to_string(), "2*y1*y2*y3");
        assert!(inv.satisfies_identity(&t.hessian));
    }

    #[test]
    fn degenerate_hessian_is_reported() {
        // T = y1^3 has rank-one Hessian.
        let spec = MetricSpec::new(2, 3).unwrap().with(&[0, 0, 0], Expr::one()).unwrap();
        let ctx = spec.compile().at::<Rational>(&vec![Rational::from_integer(0.into()); 2], Tolerance::default()).unwrap();
        assert!(matches!(hessian_inverse(&fundamental_t(&ctx)), Err(Error::DegenerateHessian)));
    }
}
