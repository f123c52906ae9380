//! Decomposable cubic metrics `T = a·b` with `a = γ_ij y^i y^j` and
//! `b = b_i y^i` of unit `γ`-norm.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::classify::Witness;
use crate::expr::{EvalError, Expr, Func};
use crate::finsler::{MetricSpec, PointGeometry};
use crate::linalg;
use crate::poly::{self, Poly, RationalFn};
use crate::scalar::{Mode, Rational, Scalar, Tolerance};
use crate::{Error, Result};

const PROBE_SEED: u64 = 0xdec0_0b1e;

#[derive(Debug, Clone, PartialEq)]
pub struct DecompSpec {
    n: usize,
    gamma: Vec<Vec<Expr>>,
    b: Vec<Expr>,
}

impl DecompSpec {
    /// `gamma` must be a symmetric `n × n` table and `b` have `n` entries.
    pub fn new(gamma: Vec<Vec<Expr>>, b: Vec<Expr>) -> Result<Self> {
        let n = b.len();
        if !(2..=4).contains(&n) {
            return Err(Error::InvalidSpec(format!("dimension {n} not in 2..=4")));
        }
        if gamma.len() != n || gamma.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidSpec(format!("gamma must be {n}x{n}")));
        }
        for i in 0..n {
            for j in i + 1..n {
                if gamma[i][j] != gamma[j][i] {
                    return Err(Error::InvalidSpec(format!("gamma is not symmetric at ({}, {})", i + 1, j + 1)));
                }
            }
        }
        let uses = gamma.iter().flatten().chain(&b).filter_map(Expr::max_var).max();
        if let Some(v) = uses.filter(|&v| v >= n) {
            return Err(Error::InvalidSpec(format!("expression uses x{} in dimension {n}", v + 1)));
        }
        Ok(Self { n, gamma, b })
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn gamma(&self) -> &[Vec<Expr>] {
        &self.gamma
    }

    pub fn b(&self) -> &[Expr] {
        &self.b
    }

    /// The cubic with `a_ijk = (γ_ij b_k + γ_jk b_i + γ_ki b_j) / 3`.
    pub fn to_metric_spec(&self) -> MetricSpec {
        let n = self.n;
        let mut spec = MetricSpec::new(n, 3).expect("dimension checked");
        let third = Expr::constant(Rational::new(1.into(), 3.into()));
        for i in 0..n {
            for j in i..n {
                for k in j..n {
                    let g = &self.gamma;
                    let b = &self.b;
                    let sum = Expr::add(
                        Expr::add(Expr::mul(g[i][j].clone(), b[k].clone()), Expr::mul(g[j][k].clone(), b[i].clone())),
                        Expr::mul(g[k][i].clone(), b[j].clone()),
                    );
                    spec.insert(&[i, j, k], Expr::mul(third.clone(), sum)).expect("sorted, unique indices");
                }
            }
        }
        spec
    }

    /// `γ^{ij} b_i b_j` as a symbolic expression.
    pub fn norm_sq_expr(&self) -> Expr {
        let det = linalg::determinant(&self.gamma);
        let adj = linalg::adjugate(&self.gamma);
        let mut acc = Expr::zero();
        for i in 0..self.n {
            for j in 0..self.n {
                acc = Expr::add(acc, Expr::mul(adj[i][j].clone(), Expr::mul(self.b[i].clone(), self.b[j].clone())));
            }
        }
        Expr::div(acc, det)
    }

    /// The same `γ` with `b` replaced by `b / ‖b‖`.
    pub fn normalized(&self) -> Self {
        let norm = Expr::call(Func::Sqrt, self.norm_sq_expr());
        let b = self.b.iter().map(|bi| Expr::div(bi.clone(), norm.clone())).collect();
        Self { n: self.n, gamma: self.gamma.clone(), b }
    }

    /// `‖b‖²` at `x0`, or an error unless it equals 1 within tolerance.
    pub fn check_unit_norm<S: Scalar>(&self, x0: &[S], tol: Tolerance) -> Result<()> {
        let v: S = self.norm_sq_expr().eval(x0)?;
        let diff = v.clone() - S::one();
        if diff.is_negligible(1.0, &tol) {
            Ok(())
        } else {
            Err(Error::NotUnitNorm { norm_sq: v.to_f64() })
        }
    }
}

/// Levi-Civita data of `γ` at one base point.
#[derive(Debug, Clone)]
pub struct LeviCivitaData<S> {
    pub n: usize,
    pub tol: Tolerance,
    /// `γ_ij(x0)`
    pub gamma: Vec<Vec<S>>,
    /// `gamma_x[i][j][k] = ∂_k γ_ij(x0)`
    pub gamma_x: Vec<Vec<Vec<S>>>,
    /// `γ^{ij}(x0)`
    pub gamma_inv: Vec<Vec<S>>,
    /// `christoffel[i][j][k] = γ^i_jk`
    pub christoffel: Vec<Vec<Vec<S>>>,
    /// `b_i(x0)`
    pub b: Vec<S>,
    /// `b_x[i][j] = ∂_j b_i(x0)`
    pub b_x: Vec<Vec<S>>,
    /// `b^i = γ^{ij} b_j`
    pub b_up: Vec<S>,
    /// `nabla_b[i][j] = ∇_i b_j = ∂_i b_j − γ^h_ji b_h`
    pub nabla_b: Vec<Vec<S>>,
    /// Riemannian `2G^i = γ^i_jk y^j y^k`.
    pub spray2: Vec<Poly<S>>,
}

pub fn christoffel<S: Scalar>(spec: &DecompSpec, x0: &[S], tol: Tolerance) -> Result<LeviCivitaData<S>> {
    let n = spec.n;
    let eval = |e: &Expr| e.eval::<S>(x0).map_err(Error::from);
    let gamma: Vec<Vec<S>> = spec.gamma.iter().map(|r| r.iter().map(eval).collect()).collect::<Result<_>>()?;
    let gamma_x: Vec<Vec<Vec<S>>> = spec
        .gamma
        .iter()
        .map(|r| r.iter().map(|e| (0..n).map(|k| eval(&e.diff(k))).collect()).collect())
        .collect::<Result<_>>()?;
    let b: Vec<S> = spec.b.iter().map(eval).collect::<Result<_>>()?;
    let b_x: Vec<Vec<S>> = spec.b.iter().map(|e| (0..n).map(|j| eval(&e.diff(j))).collect()).collect::<Result<_>>()?;
    let gamma_inv = linalg::invert(&gamma, &tol).ok_or_else(|| Error::Singular("gamma is singular".into()))?;

    let half = S::one() / S::from_i64(2);
    let christoffel: Vec<Vec<Vec<S>>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    (0..n)
                        .map(|k| {
                            let mut acc = S::zero();
                            for h in 0..n {
                                let bracket = gamma_x[h][k][j].clone() + gamma_x[h][j][k].clone() - gamma_x[j][k][h].clone();
                                acc = acc + gamma_inv[i][h].clone() * bracket;
                            }
                            acc * half.clone()
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let b_up: Vec<S> =
        (0..n).map(|i| (0..n).fold(S::zero(), |acc, j| acc + gamma_inv[i][j].clone() * b[j].clone())).collect();
    let nabla_b: Vec<Vec<S>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    (0..n).fold(b_x[j][i].clone(), |acc, h| acc - christoffel[h][j][i].clone() * b[h].clone())
                })
                .collect()
        })
        .collect();
    let spray2 = (0..n)
        .map(|i| {
            let mut p = Poly::zero(n).with_tolerance(tol);
            for j in 0..n {
                for k in 0..n {
                    p = &p + &(&Poly::var(n, j) * &Poly::var(n, k)).scale(&christoffel[i][j][k]);
                }
            }
            p
        })
        .collect();
    Ok(LeviCivitaData { n, tol, gamma, gamma_x, gamma_inv, christoffel, b, b_x, b_up, nabla_b, spray2 })
}

impl<S: Scalar> LeviCivitaData<S> {
    fn lin(&self, coeffs: &[S]) -> Poly<S> {
        let mut p = Poly::zero(self.n).with_tolerance(self.tol);
        for (i, c) in coeffs.iter().enumerate() {
            p = &p + &Poly::var(self.n, i).scale(c);
        }
        p
    }

    fn quad(&self, coeffs: &[Vec<S>]) -> Poly<S> {
        let mut p = Poly::zero(self.n).with_tolerance(self.tol);
        for i in 0..self.n {
            for j in 0..self.n {
                p = &p + &(&Poly::var(self.n, i) * &Poly::var(self.n, j)).scale(&coeffs[i][j]);
            }
        }
        p
    }

    /// `a = γ_ij y^i y^j`
    pub fn a(&self) -> Poly<S> {
        self.quad(&self.gamma)
    }

    /// `b = b_i y^i`
    pub fn b_poly(&self) -> Poly<S> {
        self.lin(&self.b)
    }

    /// `∇_0 b = ∇_i b_j y^i y^j`
    pub fn nabla0_b(&self) -> Poly<S> {
        self.quad(&self.nabla_b)
    }

    /// `∂_k a` and `∂_k b` as polynomials in `y`.
    fn a_x(&self) -> Vec<Poly<S>> {
        (0..self.n)
            .map(|k| {
                let c: Vec<Vec<S>> =
                    (0..self.n).map(|i| (0..self.n).map(|j| self.gamma_x[i][j][k].clone()).collect()).collect();
                self.quad(&c)
            })
            .collect()
    }

    fn b_x_polys(&self) -> Vec<Poly<S>> {
        (0..self.n)
            .map(|j| {
                let c: Vec<S> = (0..self.n).map(|i| self.b_x[i][j].clone()).collect();
                self.lin(&c)
            })
            .collect()
    }

    /// `N^r_j = γ^r_jk y^k`
    fn connection(&self) -> Vec<Vec<Poly<S>>> {
        (0..self.n).map(|r| (0..self.n).map(|j| self.lin(&self.christoffel[r][j])).collect()).collect()
    }

    /// `∂_k γ_ij − γ^h_ik γ_hj − γ^h_jk γ_ih`, all entries.
    pub fn metric_compatibility_residuals(&self) -> Vec<S> {
        let n = self.n;
        let mut out = Vec::with_capacity(n * n * n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut r = self.gamma_x[i][j][k].clone();
                    for h in 0..n {
                        r = r - self.christoffel[h][i][k].clone() * self.gamma[h][j].clone();
                        r = r - self.christoffel[h][j][k].clone() * self.gamma[i][h].clone();
                    }
                    out.push(r);
                }
            }
        }
        out
    }

    /// `b^i ∇_j b_i` for each `j`.
    pub fn b_nabla_b(&self) -> Vec<S> {
        (0..self.n)
            .map(|j| (0..self.n).fold(S::zero(), |acc, i| acc + self.b_up[i].clone() * self.nabla_b[j][i].clone()))
            .collect()
    }

    pub fn is_parallel(&self) -> bool {
        let scale = self.b_x.iter().flatten().chain(&self.b).map(Scalar::magnitude).fold(0.0, f64::max);
        self.nabla_b.iter().flatten().all(|v| v.is_negligible(scale, &self.tol))
    }

    /// `r_j(S) = S_{|j} − y^r ∂_{y^j}(S_{|r})` with `S_{|j} = ∂_j S − N^r_j ∂_{y^r} S`
    /// for the Levi-Civita connection; `s_x[j] = ∂_j S`.
    pub fn r_operator(&self, s: &Poly<S>, s_x: &[Poly<S>]) -> Vec<Poly<S>> {
        let n = self.n;
        let conn = self.connection();
        let bar: Vec<Poly<S>> = (0..n)
            .map(|j| {
                let mut acc = s_x[j].clone();
                for (r, row) in conn.iter().enumerate() {
                    acc = &acc - &(&row[j] * &s.diff_y(r));
                }
                acc
            })
            .collect();
        (0..n)
            .map(|j| {
                let mut acc = bar[j].clone();
                for (r, br) in bar.iter().enumerate() {
                    acc = &acc - &(&Poly::var(n, r) * &br.diff_y(j));
                }
                acc
            })
            .collect()
    }

    /// `r_j(b)` through the general operator.
    pub fn r_b(&self) -> Vec<Poly<S>> {
        self.r_operator(&self.b_poly(), &self.b_x_polys())
    }

    /// `(∇_j b_r − ∇_r b_j) y^r`
    pub fn r_b_closed(&self) -> Vec<Poly<S>> {
        (0..self.n)
            .map(|j| {
                let c: Vec<S> =
                    (0..self.n).map(|r| self.nabla_b[j][r].clone() - self.nabla_b[r][j].clone()).collect();
                self.lin(&c)
            })
            .collect()
    }

    /// `r_j(T)` through the general operator with `T = a·b`.
    pub fn r_t(&self) -> Vec<Poly<S>> {
        let (a, b) = (self.a(), self.b_poly());
        let a_x = self.a_x();
        let b_x = self.b_x_polys();
        let t_x: Vec<Poly<S>> = (0..self.n).map(|k| &(&a_x[k] * &b) + &(&a * &b_x[k])).collect();
        self.r_operator(&(&a * &b), &t_x)
    }

    /// `a·r_j(b) − a_{·j} ∇_0 b`
    pub fn r_t_closed(&self) -> Vec<Poly<S>> {
        let a = self.a();
        let nabla0 = self.nabla0_b();
        self.r_b_closed().iter().enumerate().map(|(j, rb)| &(&a * rb) - &(&a.diff_y(j) * &nabla0)).collect()
    }
}

/// `Δ = 4b² − a` and the closed form
/// `T^{ij} = (Δγ^{ij} − 2b b^i y^j − 2b b^j y^i + a b^i b^j + y^i y^j) / (2bΔ)`.
pub fn delta_and_inverse<S: Scalar>(lc: &LeviCivitaData<S>) -> Result<(Poly<S>, Vec<Vec<RationalFn<S>>>)> {
    let n = lc.n;
    let (a, b) = (lc.a(), lc.b_poly());
    let delta = &b.pow(2).scale(&S::from_i64(4)) - &a;
    if delta.is_zero() {
        return Err(Error::Degenerate("Delta = 4b^2 - a vanishes identically".into()));
    }
    let two = S::from_i64(2);
    let half = S::one() / two.clone();
    let y = |i: usize| Poly::<S>::var(n, i);
    let inv = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut num = Poly::constant(n, lc.gamma_inv[i][j].clone()).with_tolerance(lc.tol);
                    num = &num * &delta;
                    num = &num - &(&b * &y(j)).scale(&(two.clone() * lc.b_up[i].clone()));
                    num = &num - &(&b * &y(i)).scale(&(two.clone() * lc.b_up[j].clone()));
                    num = &num + &a.scale(&(lc.b_up[i].clone() * lc.b_up[j].clone()));
                    num = &num + &(&y(i) * &y(j));
                    RationalFn::with_factors(num.scale(&half), vec![(b.clone(), 1), (delta.clone(), 1)])
                        .map_err(Error::from)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((delta, inv))
}

/// `B^i` from `2B^i = −T^{ij} r_j(T)` on the closed-form inverse.
pub fn spray_difference<S: Scalar>(lc: &LeviCivitaData<S>, inverse: &[Vec<RationalFn<S>>]) -> Vec<RationalFn<S>> {
    let rt = lc.r_t();
    let half = S::one() / S::from_i64(2);
    inverse
        .iter()
        .map(|row| {
            let acc = row.iter().zip(&rt).fold(RationalFn::zero(lc.n), |acc, (tij, r)| &acc + &tij.mul_poly(r));
            (-&acc).scale(&half)
        })
        .collect()
}

/// Outcome of dividing `2b·b^j r_j(b) + ∇_0 b` by `Δ`.
#[derive(Debug, Clone, PartialEq)]
pub enum FDiagnostic {
    /// Constant quotient `f`, with the consistency residuals it implies.
    Factorization {
        f: String,
        f_is_zero: bool,
        /// `∇_0 b + a f ≡ 0`
        term2_holds: bool,
        /// `b^j r_j(b) − 2b f ≡ 0`
        br_holds: bool,
        /// `b^i ∇_i b_r − c b_r f = 0` for all `r`, with `c = 2`.
        term1_coeff2_holds: bool,
        /// Same with `c = 3`.
        term1_coeff3_holds: bool,
    },
    NoFactorization,
}

pub fn f_diagnostic<S: Scalar>(lc: &LeviCivitaData<S>, delta: &Poly<S>) -> Result<FDiagnostic> {
    let n = lc.n;
    let b = lc.b_poly();
    let rb = lc.r_b_closed();
    let b_rb = rb.iter().enumerate().fold(Poly::zero(n).with_tolerance(lc.tol), |acc, (j, r)| {
        &acc + &r.scale(&lc.b_up[j])
    });
    let nabla0 = lc.nabla0_b();
    let target = &(&b * &b_rb).scale(&S::from_i64(2)) + &nabla0;
    let quotient = match target.exact_divide(delta)? {
        Some(q) if q.is_constant() => q.constant_term(),
        _ => return Ok(FDiagnostic::NoFactorization),
    };
    let f = quotient;
    let term2 = &nabla0 + &lc.a().scale(&f);
    let br = &b_rb - &b.scale(&(S::from_i64(2) * f.clone()));
    let scale = lc.nabla_b.iter().flatten().chain(&lc.b).map(Scalar::magnitude).fold(0.0, f64::max);
    let term1 = |c: i64| {
        (0..n).all(|r| {
            let lhs = (0..n).fold(S::zero(), |acc, i| acc + lc.b_up[i].clone() * lc.nabla_b[i][r].clone());
            (lhs - S::from_i64(c) * lc.b[r].clone() * f.clone()).is_negligible(scale, &lc.tol)
        })
    };
    Ok(FDiagnostic::Factorization {
        f: Poly::constant(n, f.clone()).to_string(),
        f_is_zero: f.is_negligible(scale, &lc.tol),
        term2_holds: term2.is_zero(),
        br_holds: br.is_zero(),
        term1_coeff2_holds: term1(2),
        term1_coeff3_holds: term1(3),
    })
}

/// Exact identities expected of every unit-norm decomposable metric.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityChecks {
    /// `Σ_j T_ij T^{jk} = δ_i^k` for the adjugate inverse.
    pub inverse_identity: bool,
    /// Closed-form `T^{ij}` equals the adjugate inverse.
    pub closed_form_inverse: bool,
    /// `Δ` divides `det[T_ij]`.
    pub det_divisible_by_delta: bool,
    /// `y^j r_j(b) = 0`
    pub y_r_b: bool,
    /// `b^i ∇_j b_i = 0`
    pub b_nabla_b: bool,
    /// `T^{ij} b_j = (2b b^i − y^i) / (2Δ)`
    pub t_inv_b: bool,
    /// `T^{ij} a_{·j} = (2b y^i − b^i a) / Δ`
    pub t_inv_a: bool,
    /// General `r_j(b)` equals `(∇_j b_r − ∇_r b_j) y^r`.
    pub r_b_closed: bool,
    /// General `r_j(T)` equals `a r_j(b) − a_{·j} ∇_0 b`.
    pub r_t_closed: bool,
    /// `∇γ = 0`
    pub metric_compatible: bool,
}

impl IdentityChecks {
    pub fn all(&self) -> bool {
        self.inverse_identity
            && self.closed_form_inverse
            && self.det_divisible_by_delta
            && self.y_r_b
            && self.b_nabla_b
            && self.t_inv_b
            && self.t_inv_a
            && self.r_b_closed
            && self.r_t_closed
            && self.metric_compatible
    }

    fn failures(&self) -> Vec<&'static str> {
        let named = [
            (self.inverse_identity, "inverse_identity"),
            (self.closed_form_inverse, "closed_form_inverse"),
            (self.det_divisible_by_delta, "det_divisible_by_delta"),
            (self.y_r_b, "y_r_b"),
            (self.b_nabla_b, "b_nabla_b"),
            (self.t_inv_b, "t_inv_b"),
            (self.t_inv_a, "t_inv_a"),
            (self.r_b_closed, "r_b_closed"),
            (self.r_t_closed, "r_t_closed"),
            (self.metric_compatible, "metric_compatible"),
        ];
        named.iter().filter(|(ok, _)| !ok).map(|(_, name)| *name).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecompPointReport {
    pub point: Vec<Rational>,
    pub mode: Mode,
    pub fell_back: bool,
    /// The Finsler spray of `T = a·b` is polynomial of degree ≤ 2.
    pub p1_berwald: bool,
    /// `∇_i b_j = 0` for all `i, j`.
    pub p2_parallel: bool,
    /// `B^i ≡ 0`; computed only when both predicates hold.
    pub b_vanishes: Option<bool>,
    /// The two computations of `B^i` agree.
    pub spray_paths_agree: bool,
    pub identities: IdentityChecks,
    pub f_diagnostic: FDiagnostic,
    /// `∇_i b_j` at the point, row-major.
    pub nabla_b: Vec<Vec<String>>,
    /// `Δ`
    pub delta: String,
    /// Non-polynomial `Ḡ^i` when P1 fails.
    pub witness: Option<Witness>,
}

fn fmt_scalar<S: Scalar>(n: usize, v: &S) -> String {
    Poly::constant(n, v.clone()).to_string()
}

/// Every check of the decomposition at one point in scalar field `S`.
pub fn theorem_check_point<S: Scalar>(spec: &DecompSpec, x0: &[Rational], tol: Tolerance) -> Result<DecompPointReport> {
    let n = spec.n;
    let xs: Vec<S> = x0.iter().map(S::from_rational).collect();
    spec.check_unit_norm(&xs, tol)?;
    let lc = christoffel(spec, &xs, tol)?;
    let (delta, closed) = delta_and_inverse(&lc)?;

    let metric = spec.to_metric_spec().compile();
    let ctx = metric.at::<S>(&xs, tol)?;
    let geom = PointGeometry::new(&ctx)?;
    let adj = &geom.inverse;

    let (a, b) = (lc.a(), lc.b_poly());
    let y = |i: usize| Poly::<S>::var(n, i);
    let two = S::from_i64(2);

    let closed_form_inverse = (0..n).all(|i| (0..n).all(|j| closed[i][j].equivalent(&adj.entry(i, j))));
    let det_divisible_by_delta = adj.det.exact_divide(&delta)?.is_some();
    let rb = lc.r_b();
    let y_r_b = rb.iter().enumerate().fold(Poly::zero(n).with_tolerance(tol), |acc, (j, r)| &acc + &(&y(j) * r)).is_zero();
    let b_nabla_b = {
        let scale = lc.nabla_b.iter().flatten().map(Scalar::magnitude).fold(1.0, f64::max);
        lc.b_nabla_b().iter().all(|v| v.is_negligible(scale, &tol))
    };
    let t_inv_b = (0..n).all(|i| {
        let lhs = (0..n).fold(RationalFn::zero(n), |acc, j| &acc + &closed[i][j].scale(&lc.b[j]));
        let num = &b.scale(&(two.clone() * lc.b_up[i].clone())) - &y(i);
        let rhs = RationalFn::new(num, delta.scale(&two)).expect("nonzero Delta");
        lhs.equivalent(&rhs)
    });
    let t_inv_a = (0..n).all(|i| {
        let lhs = (0..n).fold(RationalFn::zero(n), |acc, j| &acc + &closed[i][j].mul_poly(&a.diff_y(j)));
        let num = &(&b * &y(i)).scale(&two) - &a.scale(&lc.b_up[i]);
        let rhs = RationalFn::new(num, delta.clone()).expect("nonzero Delta");
        lhs.equivalent(&rhs)
    });
    let r_b_closed = rb.iter().zip(lc.r_b_closed()).all(|(g, c)| (g - &c).is_zero());
    let r_t_closed = lc.r_t().iter().zip(lc.r_t_closed()).all(|(g, c)| (g - &c).is_zero());
    let metric_compatible = {
        let scale = lc.gamma_x.iter().flatten().flatten().chain(lc.gamma.iter().flatten()).map(Scalar::magnitude);
        let scale = scale.fold(1.0, f64::max);
        lc.metric_compatibility_residuals().iter().all(|v| v.is_negligible(scale, &tol))
    };
    let identities = IdentityChecks {
        inverse_identity: adj.satisfies_identity(&geom.tensors.hessian),
        closed_form_inverse,
        det_divisible_by_delta,
        y_r_b,
        b_nabla_b,
        t_inv_b,
        t_inv_a,
        r_b_closed,
        r_t_closed,
        metric_compatible,
    };

    let b_lemma = spray_difference(&lc, &closed);
    let spray_paths_agree = (0..n).all(|i| {
        let riemannian = RationalFn::from_poly(lc.spray2[i].scale(&(S::one() / two.clone())));
        (&geom.spray.g[i] - &riemannian).equivalent(&b_lemma[i])
    });

    let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED);
    let mut witness = None;
    for (i, g) in geom.spray.g.iter().enumerate() {
        if poly::as_polynomial(g, 2, &mut rng)?.is_none() {
            witness = Some(Witness::from_residual(&[i], g.numerator()));
            break;
        }
    }
    let p1_berwald = witness.is_none();
    let p2_parallel = lc.is_parallel();
    let b_vanishes = (p1_berwald && p2_parallel).then(|| b_lemma.iter().all(RationalFn::is_zero));

    let at = || x0.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ");
    if p1_berwald != p2_parallel {
        return Err(Error::InvariantViolation(format!(
            "Berwald (P1 = {p1_berwald}) and parallel b (P2 = {p2_parallel}) disagree at ({})",
            at()
        )));
    }
    if b_vanishes == Some(false) {
        return Err(Error::InvariantViolation(format!("B^i does not vanish for parallel b at ({})", at())));
    }
    if !identities.all() || !spray_paths_agree {
        let mut failed = identities.failures();
        if !spray_paths_agree {
            failed.push("spray_paths_agree");
        }
        return Err(Error::InvariantViolation(format!("identities failed at ({}): {}", at(), failed.join(", "))));
    }

    Ok(DecompPointReport {
        point: x0.to_vec(),
        mode: S::MODE,
        fell_back: false,
        p1_berwald,
        p2_parallel,
        b_vanishes,
        spray_paths_agree,
        identities,
        f_diagnostic: f_diagnostic(&lc, &delta)?,
        nabla_b: lc.nabla_b.iter().map(|r| r.iter().map(|v| fmt_scalar(n, v)).collect()).collect(),
        delta: delta.to_string(),
        witness,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum DecompOutcome {
    Checked(DecompPointReport),
    Degenerate { point: Vec<Rational>, reason: String },
}

impl DecompOutcome {
    pub fn report(&self) -> Option<&DecompPointReport> {
        match self {
            DecompOutcome::Checked(r) => Some(r),
            DecompOutcome::Degenerate { .. } => None,
        }
    }
}

/// [`theorem_check_point`] with exact-to-float fallback; degenerate points
/// become per-point outcomes, unit-norm failures and invariant violations
/// propagate.
pub fn theorem_check_at(spec: &DecompSpec, x0: &[Rational], mode: Mode, tol: Tolerance) -> Result<DecompOutcome> {
    let attempt = match mode {
        Mode::Exact => match theorem_check_point::<Rational>(spec, x0, tol) {
            Err(Error::Eval(EvalError::Transcendental(_))) => theorem_check_point::<f64>(spec, x0, tol).map(|mut r| {
                r.fell_back = true;
                r
            }),
            other => other,
        },
        Mode::Float => theorem_check_point::<f64>(spec, x0, tol),
    };
    match attempt {
        Ok(r) => Ok(DecompOutcome::Checked(r)),
        Err(e @ (Error::DegenerateHessian | Error::Degenerate(_) | Error::Singular(_) | Error::Eval(_))) => {
            Ok(DecompOutcome::Degenerate { point: x0.to_vec(), reason: e.to_string() })
        }
        Err(e) => Err(e),
    }
}

/// Concurrent [`theorem_check_at`] over all points, in input order.
pub fn theorem_check(spec: &DecompSpec, points: &[Vec<Rational>], mode: Mode, tol: Tolerance) -> Result<Vec<DecompOutcome>> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = points.iter().map(|p| scope.spawn(move || theorem_check_at(spec, p, mode, tol))).collect();
        handles.into_iter().map(|h| h.join().expect("decomposition thread panicked")).collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(texts: &[&[&str]], b: &[&str]) -> DecompSpec {
        let n = b.len();
        let gamma = texts.iter().map(|r| r.iter().map(|t| Expr::parse(t, n).unwrap()).collect()).collect();
        DecompSpec::new(gamma, b.iter().map(|t| Expr::parse(t, n).unwrap()).collect()).unwrap()
    }

    fn origin(n: usize) -> Vec<Rational> {
        vec![Rational::from_integer(0.into()); n]
    }

    #[test]
    fn flat_delta_matches_hand_substitution() {
        let spec = parse(&[&["1", "0", "0"], &["0", "1", "0"], &["0", "0", "1"]], &["1", "0", "0"]);
        let lc = christoffel::<Rational>(&spec, &origin(3), Tolerance::default()).unwrap();
        let (delta, _) = delta_and_inverse(&lc).unwrap();
        assert_eq!(delta.to_string(), "3*y1^2 - y2^2 - y3^2");
        let r = theorem_check_point::<Rational>(&spec, &origin(3), Tolerance::default()).unwrap();
        assert!(r.p1_berwald && r.p2_parallel && r.b_vanishes == Some(true));
        assert!(matches!(r.f_diagnostic, FDiagnostic::Factorization { f_is_zero: true, .. }));
    }

    #[test]
    fn rotating_b_is_not_berwald() {
        let spec = parse(&[&["1", "0", "0"], &["0", "1", "0"], &["0", "0", "1"]], &["cos(x3)", "sin(x3)", "0"]);
        let lc = christoffel::<Rational>(&spec, &origin(3), Tolerance::default()).unwrap();
        let rb: Vec<String> = lc.r_b().iter().map(ToString::to_string).collect();
        assert_eq!(rb, ["0", "-y3", "y2"]);
        assert_eq!(lc.nabla0_b().to_string(), "y2*y3");
        let r = theorem_check_point::<Rational>(&spec, &origin(3), Tolerance::default()).unwrap();
        assert!(!r.p1_berwald && !r.p2_parallel);
        assert_eq!(r.f_diagnostic, FDiagnostic::NoFactorization);
        assert!(r.witness.is_some());
    }

    #[test]
    fn diagonal_christoffel_matches_hand_formula() {
        let spec = parse(&[&["1", "0"], &["0", "x1^2"]], &["1", "0"]);
        let x0 = vec![Rational::from_integer(2.into()), Rational::from_integer(0.into())];
        let lc = christoffel::<Rational>(&spec, &x0, Tolerance::default()).unwrap();
        assert_eq!(lc.christoffel[1][0][1], Rational::new(1.into(), 2.into()));
        assert_eq!(lc.christoffel[0][1][1], Rational::from_integer((-2).into()));
    }

    #[test]
    fn unit_norm_is_enforced_unless_normalized() {
        let spec = parse(&[&["1", "0"], &["0", "1"]], &["2", "0"]);
        let err = theorem_check_at(&spec, &origin(2), Mode::Exact, Tolerance::default()).unwrap_err();
        assert!(matches!(err, Error::NotUnitNorm { .. }));
        let out = theorem_check_at(&spec.normalized(), &origin(2), Mode::Exact, Tolerance::default()).unwrap();
        assert!(out.report().unwrap().p1_berwald);
    }
}
