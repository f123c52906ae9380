use super::{FundamentalTensors, InverseHessian};
use crate::poly::{Poly, RationalFn};
use crate::scalar::Scalar;

/// Canonical spray, nonlinear connection and Berwald coefficients at a point.
#[derive(Debug, Clone)]
pub struct SprayData<S> {
    /// `G^i`
    pub g: Vec<RationalFn<S>>,
    /// `n[i][j] = N^i_j = ∂G^i/∂y^j`
    pub n: Vec<Vec<RationalFn<S>>>,
    /// `gjk[i][j][k] = G^i_jk = ∂N^i_j/∂y^k`
    pub gjk: Vec<Vec<Vec<RationalFn<S>>>>,
}

/// Horizontal and vertical coefficients of the canonical metrical
/// connection of the Hessian `T_ij`.
#[derive(Debug, Clone)]
pub struct MetricalCoefficients<S> {
    /// `l[i][j][k] = L^i_jk`
    pub l: Vec<Vec<Vec<RationalFn<S>>>>,
    /// `tjk[i][j][k] = T^i_jk = ½ T^{ih} T_hjk`
    pub tjk: Vec<Vec<Vec<RationalFn<S>>>>,
}

/// `P_h = T_{h,k} y^k − T_{,h}`, so that `2G^i = T^{ih} P_h`.
pub fn geodesic_forcing<S: Scalar>(t: &FundamentalTensors<S>) -> Vec<Poly<S>> {
    (0..t.n).map(|h| &Poly::transvect(&t.grad_x[h]) - &t.t_x[h]).collect()
}

pub fn spray<S: Scalar>(t: &FundamentalTensors<S>, inv: &InverseHessian<S>) -> SprayData<S> {
    let n = t.n;
    let forcing = geodesic_forcing(t);
    let half = S::one() / S::from_i64(2);
    let g: Vec<RationalFn<S>> = (0..n)
        .map(|i| {
            let mut num = Poly::zero(n).with_tolerance(t.t.tolerance());
            for (h, p) in forcing.iter().enumerate() {
                num = &num + &(&inv.adjugate[i][h] * p);
            }
            RationalFn::new(num.scale(&half), inv.det.clone()).expect("nonzero determinant")
        })
        .collect();
    let nl: Vec<Vec<RationalFn<S>>> = g.iter().map(|gi| (0..n).map(|j| gi.diff_y(j)).collect()).collect();
    let gjk = nl
        .iter()
        .map(|row| row.iter().map(|nij| (0..n).map(|k| nij.diff_y(k)).collect()).collect())
        .collect();
    SprayData { g, n: nl, gjk }
}

/// The nonlinear connection written out term by term,
/// `N^i_j = ½{ ∂_j T^{ih} (T_{h,k}y^k − T_{,h}) + T^{ih}(T_{hj,k}y^k + T_{h,j} − T_{j,h}) }`,
/// independent of differentiating `G^i`.
pub fn nonlinear_connection_expanded<S: Scalar>(t: &FundamentalTensors<S>, inv: &InverseHessian<S>) -> Vec<Vec<RationalFn<S>>> {
    let n = t.n;
    let forcing = geodesic_forcing(t);
    let half = S::one() / S::from_i64(2);
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut acc = RationalFn::zero(n);
                    for h in 0..n {
                        let tih = inv.entry(i, h);
                        let first = tih.diff_y(j).mul_poly(&forcing[h]);
                        let bracket = &(&Poly::transvect(&t.hessian_x[h][j]) + &t.grad_x[h][j]) - &t.grad_x[j][h];
                        let second = tih.mul_poly(&bracket);
                        acc = &acc + &(&first + &second);
                    }
                    acc.scale(&half)
                })
                .collect()
        })
        .collect()
}

/// `δf/δx^l = ∂f/∂x^l − N^r_l ∂f/∂y^r` for a polynomial `f` with known
/// x-derivatives `f_x`.
pub fn delta_derivative<S: Scalar>(f: &Poly<S>, f_x: &[Poly<S>], spray: &SprayData<S>, l: usize) -> RationalFn<S> {
    let mut acc = RationalFn::from_poly(f_x[l].clone());
    for r in 0..f.nvars() {
        let df = f.diff_y(r);
        if !df.is_zero() {
            acc = &acc - &spray.n[r][l].mul_poly(&df);
        }
    }
    acc
}

pub fn cgamma_coeffs<S: Scalar>(t: &FundamentalTensors<S>, inv: &InverseHessian<S>, spray: &SprayData<S>) -> MetricalCoefficients<S> {
    let n = t.n;
    let half = S::one() / S::from_i64(2);
    // delta[h][j][k] = δT_hj/δx^k
    let delta: Vec<Vec<Vec<RationalFn<S>>>> = (0..n)
        .map(|h| {
            (0..n)
                .map(|j| (0..n).map(|k| delta_derivative(&t.hessian[h][j], &t.hessian_x[h][j], spray, k)).collect())
                .collect()
        })
        .collect();
    let over_det = |acc: RationalFn<S>| acc.div_poly(&inv.det).expect("nonzero determinant").scale(&half);
    let l = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    (0..n)
                        .map(|k| {
                            let mut acc = RationalFn::zero(n);
                            for h in 0..n {
                                let christoffel = &(&delta[h][j][k] + &delta[h][k][j]) - &delta[j][k][h];
                                acc = &acc + &christoffel.mul_poly(&inv.adjugate[i][h]);
                            }
                            over_det(acc)
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let tjk = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    (0..n)
                        .map(|k| {
                            let mut num = Poly::zero(n).with_tolerance(t.t.tolerance());
                            for h in 0..n {
                                num = &num + &(&inv.adjugate[i][h] * &t.third[h][j][k]);
                            }
                            over_det(RationalFn::from_poly(num))
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    MetricalCoefficients { l, tjk }
}

/// `T_{ijk|l}` with respect to the canonical metrical connection, and its
/// transvection `T_{ijk|0} = T_{ijk|l} y^l`.
#[derive(Debug, Clone)]
pub struct CovariantThird<S> {
    /// `full[i][j][k][l]`
    pub full: Vec<Vec<Vec<Vec<RationalFn<S>>>>>,
    /// `transvected[i][j][k]`
    pub transvected: Vec<Vec<Vec<RationalFn<S>>>>,
}

/// `T_{ijk|l} = δ_l T_ijk − L^h_il T_hjk − L^h_jl T_ihk − L^h_kl T_ijh`.
///
/// For cubic metrics `T_ijk` depends on x only and `δ_l T_ijk = ∂_l T_ijk`.
pub fn h_cov_deriv_t3<S: Scalar>(
    t: &FundamentalTensors<S>,
    conn: &MetricalCoefficients<S>,
    spray: &SprayData<S>,
) -> CovariantThird<S> {
    let n = t.n;
    let head = |i: usize, j: usize, k: usize, l: usize| {
        if t.m == 3 {
            RationalFn::from_poly(t.third_x[i][j][k][l].clone())
        } else {
            delta_derivative(&t.third[i][j][k], &t.third_x[i][j][k], spray, l)
        }
    };
    let mut full = vec![vec![vec![Vec::with_capacity(n); n]; n]; n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut acc = head(i, j, k, l);
                    for h in 0..n {
                        acc = &acc - &conn.l[h][i][l].mul_poly(&t.third[h][j][k]);
                        acc = &acc - &conn.l[h][j][l].mul_poly(&t.third[i][h][k]);
                        acc = &acc - &conn.l[h][k][l].mul_poly(&t.third[i][j][h]);
                    }
                    full[i][j][k].push(acc);
                }
            }
        }
    }
    let transvected = full
        .iter()
        .map(|a| {
            a.iter()
                .map(|b| {
                    b.iter()
                        .map(|c| {
                            c.iter().enumerate().fold(RationalFn::zero(n), |acc, (l, v)| {
                                &acc + &v.mul_poly(&Poly::var(n, l))
                            })
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    CovariantThird { full, transvected }
}
