//! Riemannian / Berwald / Landsberg verdicts at a finite set of base points.
//!
//! A metric is classified per point; the verdict for the metric is the
//! conjunction over the points supplied.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::expr::EvalError;
use crate::finsler::{self, CompiledMetric, CovariantThird, PointGeometry};
use crate::poly::{self, Poly, RationalFn};
use crate::scalar::{Mode, Rational, Scalar, Tolerance};
use crate::{Error, Result};

const PROBE_SEED: u64 = 0x5eed_cafe;

/// Relative size below which a float Cartan tensor counts as zero.
pub const CARTAN_REL_TOL: f64 = 1e-8;

/// Evidence for a negative verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    /// 1-based index tuple of the offending component.
    pub indices: Vec<usize>,
    /// Leading term of the nonzero residual numerator.
    pub leading_term: String,
    /// The whole residual numerator.
    pub residual: String,
}

impl Witness {
    pub(crate) fn from_residual<S: Scalar>(indices: &[usize], residual: &Poly<S>) -> Self {
        let leading_term = residual
            .leading_term()
            .map(|(m, c)| Poly::monomial(m.clone(), c.clone()).to_string())
            .unwrap_or_else(|| "0".into());
        Self { indices: indices.iter().map(|i| i + 1).collect(), leading_term, residual: residual.to_string() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub holds: bool,
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerwaldVerdict {
    pub holds: bool,
    /// Every `G^i` is a polynomial of degree ≤ 2 in `y`.
    pub spray_polynomial: bool,
    /// Every `∂G^i_jk/∂y^l` vanishes identically.
    pub coefficients_y_independent: bool,
    /// `G^i` as polynomials when the spray is polynomial.
    pub spray: Option<Vec<String>>,
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointReport {
    pub point: Vec<Rational>,
    pub mode: Mode,
    /// Exact mode was requested but a coefficient took a transcendental value.
    pub fell_back: bool,
    pub riemannian: bool,
    pub berwald: BerwaldVerdict,
    pub landsberg: Verdict,
    /// For cubic metrics: `∂_l T^B_{ijk|0} = T^B_{ijk|l}` with Berwald
    /// coefficients, the step behind Landsberg ⇒ Berwald.
    pub mechanism_verified: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PointOutcome {
    Classified(PointReport),
    Degenerate { point: Vec<Rational>, reason: String },
}

impl PointOutcome {
    pub fn report(&self) -> Option<&PointReport> {
        match self {
            PointOutcome::Classified(r) => Some(r),
            PointOutcome::Degenerate { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationReport {
    pub dimension: usize,
    pub degree: usize,
    pub requested_mode: Mode,
    pub points: Vec<PointOutcome>,
}

impl ClassificationReport {
    fn all(&self, f: impl Fn(&PointReport) -> bool) -> Option<bool> {
        let reports: Vec<&PointReport> = self.points.iter().filter_map(PointOutcome::report).collect();
        (!reports.is_empty()).then(|| reports.into_iter().all(f))
    }

    pub fn riemannian(&self) -> Option<bool> {
        self.all(|r| r.riemannian)
    }

    pub fn berwald(&self) -> Option<bool> {
        self.all(|r| r.berwald.holds)
    }

    pub fn landsberg(&self) -> Option<bool> {
        self.all(|r| r.landsberg.holds)
    }

    pub fn has_degenerate_points(&self) -> bool {
        self.points.iter().any(|p| matches!(p, PointOutcome::Degenerate { .. }))
    }
}

/// `m = 2`, or the Cartan tensor vanishes at sampled directions (float).
pub fn is_riemannian(metric: &CompiledMetric, x0: &[f64], tol: Tolerance) -> Result<bool> {
    if metric.degree() == 2 {
        return Ok(true);
    }
    let ctx = metric.at_first_order::<f64>(x0, tol)?;
    let tensors = finsler::fundamental_t(&ctx);
    let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED);
    let mut probes = 0;
    for _ in 0..poly::MAX_SAMPLE_ATTEMPTS {
        let mut y: Vec<f64> = poly::random_point(&mut rng, metric.dimension());
        let t = tensors.t.eval(&y);
        if t == 0.0 {
            continue;
        }
        if t < 0.0 {
            if metric.degree().is_multiple_of(2) {
                continue;
            }
            y.iter_mut().for_each(|v| *v = -*v);
        }
        let g = finsler::finsler_metric(&tensors, &y)?;
        let c = finsler::cartan_tensor(&tensors, &y)?;
        let g_scale = g.iter().flatten().fold(0.0_f64, |a, v| a.max(v.abs()));
        let y_scale = y.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        let c_max = c.iter().flatten().flatten().fold(0.0_f64, |a, v| a.max(v.abs()));
        if c_max > CARTAN_REL_TOL * g_scale / y_scale {
            return Ok(false);
        }
        probes += 1;
        if probes == 3 {
            return Ok(true);
        }
    }
    Err(Error::Degenerate("no direction with T(y) > 0 found".into()))
}

fn sorted_triples(n: usize) -> impl Iterator<Item = (usize, usize, usize)> {
    (0..n).flat_map(move |i| (i..n).flat_map(move |j| (j..n).map(move |k| (i, j, k))))
}

/// Both Berwald criteria; they must agree.
pub fn is_berwald<S: Scalar>(geom: &PointGeometry<S>, rng: &mut ChaCha8Rng) -> Result<BerwaldVerdict> {
    let n = geom.tensors.n;
    let mut spray = Vec::with_capacity(n);
    let mut spray_witness = None;
    for (i, g) in geom.spray.g.iter().enumerate() {
        match poly::as_polynomial(g, 2, rng)? {
            Some(p) => spray.push(p),
            None => {
                spray_witness.get_or_insert_with(|| Witness::from_residual(&[i], g.numerator()));
            }
        }
    }
    let spray_polynomial = spray.len() == n;

    let mut tensor_witness = None;
    'outer: for i in 0..n {
        for j in 0..n {
            for k in j..n {
                for l in 0..n {
                    let d = geom.spray.gjk[i][j][k].diff_y(l);
                    if !d.is_zero() {
                        tensor_witness = Some(Witness::from_residual(&[i, j, k, l], d.numerator()));
                        break 'outer;
                    }
                }
            }
        }
    }
    let coefficients_y_independent = tensor_witness.is_none();
    if spray_polynomial != coefficients_y_independent {
        return Err(Error::InvariantViolation(format!(
            "Berwald criteria disagree: spray polynomial = {spray_polynomial}, \
             dG^i_jk/dy = 0 is {coefficients_y_independent}"
        )));
    }
    Ok(BerwaldVerdict {
        holds: spray_polynomial,
        spray_polynomial,
        coefficients_y_independent,
        spray: spray_polynomial.then(|| spray.iter().map(ToString::to_string).collect()),
        witness: tensor_witness.or(spray_witness),
    })
}

/// `T_{ijk|0} ≡ 0` for every sorted `(i, j, k)`.
pub fn is_landsberg<S: Scalar>(cov: &CovariantThird<S>) -> Verdict {
    let n = cov.transvected.len();
    for (i, j, k) in sorted_triples(n) {
        let r = &cov.transvected[i][j][k];
        if !r.is_zero() {
            return Verdict { holds: false, witness: Some(Witness::from_residual(&[i, j, k], r.numerator())) };
        }
    }
    Verdict { holds: true, witness: None }
}

/// Checks, for a cubic metric, that differentiating
/// `T_{ijk,l}y^l − N^h_i T_hjk − N^h_j T_ihk − N^h_k T_ijh` by `y^l` yields
/// `T_{ijk,l} − G^h_il T_hjk − G^h_jl T_ihk − G^h_kl T_ijh`.
pub fn landsberg_implies_berwald_mechanism<S: Scalar>(geom: &PointGeometry<S>) -> Result<bool> {
    let t = &geom.tensors;
    if t.m != 3 {
        return Err(Error::Precondition(format!("Landsberg => Berwald is only established for m = 3, got m = {}", t.m)));
    }
    let n = t.n;
    let nl = &geom.spray.n;
    let gjk = &geom.spray.gjk;
    for (i, j, k) in sorted_triples(n) {
        let mut transvected = RationalFn::from_poly(Poly::transvect(&t.third_x[i][j][k]));
        for h in 0..n {
            transvected = &transvected - &nl[h][i].mul_poly(&t.third[h][j][k]);
            transvected = &transvected - &nl[h][j].mul_poly(&t.third[i][h][k]);
            transvected = &transvected - &nl[h][k].mul_poly(&t.third[i][j][h]);
        }
        for l in 0..n {
            let mut direct = RationalFn::from_poly(t.third_x[i][j][k][l].clone());
            for h in 0..n {
                direct = &direct - &gjk[h][i][l].mul_poly(&t.third[h][j][k]);
                direct = &direct - &gjk[h][j][l].mul_poly(&t.third[i][h][k]);
                direct = &direct - &gjk[h][k][l].mul_poly(&t.third[i][j][h]);
            }
            if !transvected.diff_y(l).equivalent(&direct) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Full classification at one point in scalar field `S`.
pub fn classify_point<S: Scalar>(metric: &CompiledMetric, x0: &[Rational], tol: Tolerance) -> Result<PointReport> {
    let xs: Vec<S> = x0.iter().map(S::from_rational).collect();
    let ctx = metric.at::<S>(&xs, tol)?;
    let geom = PointGeometry::new(&ctx)?;
    let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED);
    let berwald = is_berwald(&geom, &mut rng)?;
    let metrical = geom.metrical();
    let cov = finsler::h_cov_deriv_t3(&geom.tensors, &metrical, &geom.spray);
    let landsberg = is_landsberg(&cov);
    let xf: Vec<f64> = x0.iter().map(f64::from_rational).collect();
    let riemannian = is_riemannian(metric, &xf, tol)?;
    let mechanism_verified = if metric.degree() == 3 { Some(landsberg_implies_berwald_mechanism(&geom)?) } else { None };

    let report = PointReport {
        point: x0.to_vec(),
        mode: S::MODE,
        fell_back: false,
        riemannian,
        berwald,
        landsberg,
        mechanism_verified,
    };
    check_report_invariants(&report, metric.degree())?;
    Ok(report)
}

/// Inclusions every report must satisfy; violations are implementation bugs.
pub fn check_report_invariants(report: &PointReport, degree: usize) -> Result<()> {
    let at = || format!("{:?}", report.point.iter().map(ToString::to_string).collect::<Vec<_>>());
    if report.riemannian && !report.berwald.holds {
        return Err(Error::InvariantViolation(format!("Riemannian but not Berwald at {}", at())));
    }
    if report.berwald.holds && !report.landsberg.holds {
        return Err(Error::InvariantViolation(format!("Berwald but not Landsberg at {}", at())));
    }
    if degree == 3 && report.landsberg.holds && !report.berwald.holds {
        return Err(Error::InvariantViolation(format!("cubic Landsberg but not Berwald at {}", at())));
    }
    if report.mechanism_verified == Some(false) {
        return Err(Error::InvariantViolation(format!("y-derivative of T_ijk|0 mismatch at {}", at())));
    }
    Ok(())
}

/// Classifies at one point, falling back from exact to float arithmetic when
/// a coefficient is not rational there. Degenerate Hessians are reported as
/// a per-point outcome; invariant violations propagate as errors.
pub fn classify_at(metric: &CompiledMetric, x0: &[Rational], mode: Mode, tol: Tolerance) -> Result<PointOutcome> {
    let attempt = match mode {
        Mode::Exact => match classify_point::<Rational>(metric, x0, tol) {
            Err(Error::Eval(EvalError::Transcendental(_))) => {
                classify_point::<f64>(metric, x0, tol).map(|mut r| {
                    r.fell_back = true;
                    r
                })
            }
            other => other,
        },
        Mode::Float => classify_point::<f64>(metric, x0, tol),
    };
    match attempt {
        Ok(r) => Ok(PointOutcome::Classified(r)),
        Err(e @ (Error::DegenerateHessian | Error::Degenerate(_) | Error::Eval(_))) => {
            Ok(PointOutcome::Degenerate { point: x0.to_vec(), reason: e.to_string() })
        }
        Err(e) => Err(e),
    }
}

/// Classifies at every point concurrently; results keep the input order.
pub fn classify(metric: &CompiledMetric, points: &[Vec<Rational>], mode: Mode, tol: Tolerance) -> Result<ClassificationReport> {
    let outcomes: Vec<Result<PointOutcome>> = std::thread::scope(|scope| {
        let handles: Vec<_> = points.iter().map(|p| scope.spawn(move || classify_at(metric, p, mode, tol))).collect();
        handles.into_iter().map(|h| h.join().expect("classification thread panicked")).collect()
    });
    Ok(ClassificationReport {
        dimension: metric.dimension(),
        degree: metric.degree(),
        requested_mode: mode,
        points: outcomes.into_iter().collect::<Result<_>>()?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finsler::MetricSpec;

    fn point(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&c| Rational::from_integer(c.into())).collect()
    }

    fn conformal_bm() -> CompiledMetric {
        MetricSpec::new(3, 3)
            .unwrap()
            .with(&[0, 1, 2], Expr::parse("exp(x1)", 3).unwrap())
            .unwrap()
            .compile()
    }

    use crate::Expr;

    #[test]
    fn conformal_berwald_moor_is_berwald_not_riemannian() {
        let report = classify_point::<Rational>(&conformal_bm(), &point(&[0, 0, 0]), Tolerance::default()).unwrap();
        assert!(report.berwald.holds && report.landsberg.holds && !report.riemannian);
        assert_eq!(report.berwald.spray.as_deref(), Some(&["1/2*y1^2".to_string(), "0".into(), "0".into()][..]));
        assert_eq!(report.mechanism_verified, Some(true));
    }

    #[test]
    fn transcendental_point_falls_back_to_float() {
        let out = classify_at(&conformal_bm(), &point(&[1, 0, 0]), Mode::Exact, Tolerance::default()).unwrap();
        let r = out.report().unwrap();
        assert!(r.fell_back && r.mode == Mode::Float && r.berwald.holds);
    }

    #[test]
    fn x_dependent_cubic_yields_witness() {
        let metric = MetricSpec::new(2, 3)
            .unwrap()
            .with(&[0, 0, 1], Expr::integer(1))
            .unwrap()
            .with(&[0, 1, 1], Expr::parse("x1", 2).unwrap())
            .unwrap()
            .compile();
        let r = classify_point::<Rational>(&metric, &point(&[1, 0]), Tolerance::default()).unwrap();
        assert!(!r.berwald.holds && !r.landsberg.holds);
        let w = r.berwald.witness.unwrap();
        assert_eq!(w.indices.len(), 4);
        assert!(w.indices.iter().all(|&i| (1..=2).contains(&i)));
        assert!(r.landsberg.witness.is_some());
    }

    #[test]
    fn quadratic_is_riemannian() {
        let metric = MetricSpec::new(2, 2)
            .unwrap()
            .with(&[0, 0], Expr::integer(1))
            .unwrap()
            .with(&[1, 1], Expr::parse("1 + x1^2", 2).unwrap())
            .unwrap()
            .compile();
        let report = classify(&metric, &[point(&[0, 0]), point(&[1, 2])], Mode::Exact, Tolerance::default()).unwrap();
        assert_eq!(report.riemannian(), Some(true));
        assert_eq!(report.berwald(), Some(true));
    }

    #[test]
    fn degenerate_hessian_is_reported_per_point() {
        let metric = MetricSpec::new(2, 3).unwrap().with(&[0, 0, 0], Expr::integer(1)).unwrap().compile();
        let out = classify_at(&metric, &point(&[0, 0]), Mode::Exact, Tolerance::default()).unwrap();
        assert!(matches!(out, PointOutcome::Degenerate { .. }));
    }
}
