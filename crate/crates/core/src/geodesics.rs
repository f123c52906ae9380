//! Fixed-step RK4 integration of the geodesic equation
//! `ẋ = y`, `ẏ = −2G(x, y)`.

use std::io::{self, Write};

use crate::decomp::{self, DecompSpec};
use crate::expr::Expr;
use crate::finsler::{self, CompiledMetric};
use crate::linalg;
use crate::scalar::{Mode, Rational, Tolerance};
use crate::{Error, Result};

/// Number of times a failed step is split in half before giving up.
pub const MAX_HALVINGS: u32 = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// `(x, y)` at each sample.
    pub states: Vec<(Vec<f64>, Vec<f64>)>,
    pub dt: f64,
    pub integrator: &'static str,
}

impl Trajectory {
    pub fn dimension(&self) -> usize {
        self.states.first().map_or(0, |(x, _)| x.len())
    }

    pub fn last(&self) -> &(Vec<f64>, Vec<f64>) {
        self.states.last().expect("trajectory has an initial state")
    }

    /// Largest max-norm distance between corresponding states.
    pub fn max_deviation(&self, other: &Trajectory) -> f64 {
        self.states
            .iter()
            .zip(&other.states)
            .flat_map(|((x1, y1), (x2, y2))| x1.iter().zip(x2).chain(y1.iter().zip(y2)).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max)
    }
}

/// `2G^i(x, y)` from the metric, solving `T_ij z^j = T_{i,k}y^k − T_{,i}`.
pub fn finsler_acceleration(metric: &CompiledMetric, x: &[f64], y: &[f64], tol: Tolerance) -> Result<Vec<f64>> {
    let ctx = metric.at_first_order::<f64>(x, tol)?;
    let tensors = finsler::fundamental_t(&ctx);
    let forcing: Vec<f64> = finsler::geodesic_forcing(&tensors).iter().map(|p| p.eval(y)).collect();
    let hessian: Vec<Vec<f64>> = tensors.hessian.iter().map(|row| row.iter().map(|p| p.eval(y)).collect()).collect();
    linalg::solve(hessian, forcing, &tol).ok_or_else(|| Error::Degenerate(format!("Hessian singular at x = {x:?}, y = {y:?}")))
}

/// `F = T^{1/m}`; requires `T > 0`.
pub fn fundamental_function(metric: &CompiledMetric, x: &[f64], y: &[f64], tol: Tolerance) -> Result<f64> {
    let t = metric.at_first_order::<f64>(x, tol)?.t().eval(y);
    if t > 0.0 {
        Ok(t.powf(1.0 / metric.degree() as f64))
    } else {
        Err(Error::Degenerate(format!("T = {t} is not positive at x = {x:?}, y = {y:?}")))
    }
}

/// Riemannian spray `2G^i = γ^i_jk y^j y^k` from a symbolic metric table.
#[derive(Debug, Clone)]
pub struct ChristoffelSpray {
    gamma: Vec<Vec<Expr>>,
    gamma_x: Vec<Vec<Vec<Expr>>>,
}

impl ChristoffelSpray {
    pub fn new(gamma: Vec<Vec<Expr>>) -> Self {
        let n = gamma.len();
        let gamma_x = gamma.iter().map(|r| r.iter().map(|e| (0..n).map(|k| e.diff(k)).collect()).collect()).collect();
        Self { gamma, gamma_x }
    }

    pub fn acceleration(&self, x: &[f64], y: &[f64], tol: Tolerance) -> Result<Vec<f64>> {
        let n = self.gamma.len();
        let g: Vec<Vec<f64>> = self.gamma.iter().map(|r| r.iter().map(|e| e.eval(x)).collect()).collect::<Result<_, _>>()?;
        let gx: Vec<Vec<Vec<f64>>> = self
            .gamma_x
            .iter()
            .map(|r| r.iter().map(|d| d.iter().map(|e| e.eval(x)).collect()).collect())
            .collect::<Result<_, _>>()?;
        // lowered[h] = γ_hjk y^j y^k with the first-kind symbols
        let lowered: Vec<f64> = (0..n)
            .map(|h| {
                let mut acc = 0.0;
                for j in 0..n {
                    for k in 0..n {
                        acc += 0.5 * (gx[h][k][j] + gx[h][j][k] - gx[j][k][h]) * y[j] * y[k];
                    }
                }
                acc
            })
            .collect();
        linalg::solve(g, lowered, &tol).ok_or_else(|| Error::Singular(format!("gamma singular at x = {x:?}")))
    }
}

type State = (Vec<f64>, Vec<f64>);

fn rk4_step(accel: &dyn Fn(&[f64], &[f64]) -> Result<Vec<f64>>, s: &State, h: f64) -> Result<State> {
    let deriv = |x: &[f64], y: &[f64]| -> Result<State> {
        let a = accel(x, y)?;
        Ok((y.to_vec(), a.into_iter().map(|v| -v).collect()))
    };
    let shift = |s: &State, d: &State, c: f64| -> State {
        (
            s.0.iter().zip(&d.0).map(|(a, b)| a + c * b).collect(),
            s.1.iter().zip(&d.1).map(|(a, b)| a + c * b).collect(),
        )
    };
    let k1 = deriv(&s.0, &s.1)?;
    let s2 = shift(s, &k1, h / 2.0);
    let k2 = deriv(&s2.0, &s2.1)?;
    let s3 = shift(s, &k2, h / 2.0);
    let k3 = deriv(&s3.0, &s3.1)?;
    let s4 = shift(s, &k3, h);
    let k4 = deriv(&s4.0, &s4.1)?;
    let combine = |a: &[f64], b: &[f64], c: &[f64], d: &[f64], base: &[f64]| -> Vec<f64> {
        (0..base.len()).map(|i| base[i] + h / 6.0 * (a[i] + 2.0 * b[i] + 2.0 * c[i] + d[i])).collect()
    };
    let next = (combine(&k1.0, &k2.0, &k3.0, &k4.0, &s.0), combine(&k1.1, &k2.1, &k3.1, &k4.1, &s.1));
    if next.0.iter().chain(&next.1).all(|v| v.is_finite()) {
        Ok(next)
    } else {
        Err(Error::Degenerate("non-finite state".into()))
    }
}

fn step_with_halving(
    accel: &dyn Fn(&[f64], &[f64]) -> Result<Vec<f64>>,
    s: &State,
    h: f64,
    depth: u32,
) -> Result<State> {
    match rk4_step(accel, s, h) {
        Ok(next) => Ok(next),
        Err(e) if depth == MAX_HALVINGS => Err(e),
        Err(_) => {
            let mid = step_with_halving(accel, s, h / 2.0, depth + 1)?;
            step_with_halving(accel, &mid, h / 2.0, depth + 1)
        }
    }
}

/// Integrates `ẏ = −accel(x, y)` for `steps` steps of size `dt`.
pub fn integrate_with(
    accel: impl Fn(&[f64], &[f64]) -> Result<Vec<f64>>,
    x0: &[f64],
    y0: &[f64],
    dt: f64,
    steps: usize,
) -> Result<Trajectory> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Precondition(format!("dt must be positive, got {dt}")));
    }
    if x0.len() != y0.len() {
        return Err(Error::Precondition(format!("x0 has {} entries but y0 has {}", x0.len(), y0.len())));
    }
    let mut state: State = (x0.to_vec(), y0.to_vec());
    let mut times = vec![0.0];
    let mut states = vec![state.clone()];
    for k in 0..steps {
        let t = k as f64 * dt;
        state = step_with_halving(&accel, &state, dt, 0)
            .map_err(|e| Error::StepRejected { t, reason: e.to_string() })?;
        times.push((k + 1) as f64 * dt);
        states.push(state.clone());
    }
    Ok(Trajectory { times, states, dt, integrator: "rk4" })
}

/// Geodesic of the m-th root metric.
pub fn integrate(metric: &CompiledMetric, x0: &[f64], y0: &[f64], dt: f64, steps: usize, tol: Tolerance) -> Result<Trajectory> {
    if x0.len() != metric.dimension() {
        return Err(Error::Precondition(format!("x0 has {} entries in dimension {}", x0.len(), metric.dimension())));
    }
    integrate_with(|x, y| finsler_acceleration(metric, x, y, tol), x0, y0, dt, steps)
}

/// `max_k |F(x_k, y_k) − F(x_0, y_0)|`
pub fn invariant_drift(traj: &Trajectory, metric: &CompiledMetric, tol: Tolerance) -> Result<f64> {
    let values = traj
        .states
        .iter()
        .map(|(x, y)| fundamental_function(metric, x, y, tol))
        .collect::<Result<Vec<f64>>>()?;
    Ok(values.iter().map(|f| (f - values[0]).abs()).fold(0.0, f64::max))
}

/// Writes `t, x^1..x^n, y^1..y^n, F` rows, comma separated, with a header.
/// `F` is `nan` where `T ≤ 0`.
pub fn write_table(traj: &Trajectory, metric: &CompiledMetric, tol: Tolerance, mut out: impl Write) -> io::Result<()> {
    let n = traj.dimension();
    let mut header = vec!["t".to_string()];
    header.extend((1..=n).map(|i| format!("x{i}")));
    header.extend((1..=n).map(|i| format!("y{i}")));
    header.push("F".into());
    writeln!(out, "{}", header.join(","))?;
    for (t, (x, y)) in traj.times.iter().zip(&traj.states) {
        let f = fundamental_function(metric, x, y, tol).unwrap_or(f64::NAN);
        let row: Vec<String> = std::iter::once(*t).chain(x.iter().copied()).chain(y.iter().copied()).chain([f]).map(|v| format!("{v:.15e}")).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

/// Finsler and Riemannian trajectories of a decomposable metric from the
/// same initial data.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub finsler: Trajectory,
    pub riemannian: Trajectory,
    pub max_deviation: f64,
}

/// Requires the metric to be Berwald with parallel `b` at `x0`.
pub fn compare_riemannian(
    spec: &DecompSpec,
    x0: &[Rational],
    y0: &[f64],
    dt: f64,
    steps: usize,
    mode: Mode,
    tol: Tolerance,
) -> Result<Comparison> {
    let outcome = decomp::theorem_check_at(spec, x0, mode, tol)?;
    match outcome.report() {
        Some(r) if r.p1_berwald && r.p2_parallel => {}
        Some(_) => {
            return Err(Error::Precondition("metric is not Berwald with parallel b at the start point".into()));
        }
        None => return Err(Error::Precondition("start point is degenerate".into())),
    }
    let xf: Vec<f64> = x0.iter().map(|v| crate::Scalar::to_f64(v)).collect();
    let metric = spec.to_metric_spec().compile();
    let finsler = integrate(&metric, &xf, y0, dt, steps, tol)?;
    let christoffel = ChristoffelSpray::new(spec.gamma().to_vec());
    let riemannian = integrate_with(|x, y| christoffel.acceleration(x, y, tol), &xf, y0, dt, steps)?;
    let max_deviation = finsler.max_deviation(&riemannian);
    Ok(Comparison { finsler, riemannian, max_deviation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finsler::MetricSpec;

    fn bm() -> CompiledMetric {
        MetricSpec::new(3, 3).unwrap().with(&[0, 1, 2], Expr::parse("exp(x1)", 3).unwrap()).unwrap().compile()
    }

    #[test]
    fn constant_cubic_gives_straight_lines() {
        let metric = MetricSpec::new(3, 3).unwrap().with(&[0, 1, 2], Expr::integer(1)).unwrap().compile();
        let traj = integrate(&metric, &[0.0, 0.0, 0.0], &[1.0, 2.0, 3.0], 0.1, 10, Tolerance::default()).unwrap();
        let (x, y) = traj.last();
        for (i, v) in [1.0, 2.0, 3.0].iter().enumerate() {
            assert!((x[i] - v).abs() < 1e-12 && (y[i] - v).abs() < 1e-12);
        }
        assert!(invariant_drift(&traj, &metric, Tolerance::default()).unwrap() < 1e-12);
    }

    #[test]
    fn conformal_berwald_moor_matches_closed_form() {
        let traj = integrate(&bm(), &[0.0, 0.0, 0.0], &[1.0, 1.0, 1.0], 1e-3, 1000, Tolerance::default()).unwrap();
        let (x, y) = traj.last();
        assert!((y[0] - 0.5).abs() < 1e-10);
        assert!((x[0] - 2f64.ln()).abs() < 1e-10);
        assert!((y[1] - 1.0).abs() < 1e-12);
        let drift = invariant_drift(&traj, &bm(), Tolerance::default()).unwrap();
        assert!(drift < 1e-6, "drift {drift}");
    }

    #[test]
    fn nonpositive_dt_is_rejected() {
        assert!(matches!(integrate(&bm(), &[0.0; 3], &[1.0; 3], 0.0, 1, Tolerance::default()), Err(Error::Precondition(_))));
    }

    #[test]
    fn degenerate_hessian_stops_integration() {
        let metric = MetricSpec::new(2, 3).unwrap().with(&[0, 0, 0], Expr::integer(1)).unwrap().compile();
        let err = integrate(&metric, &[0.0, 0.0], &[1.0, 1.0], 0.1, 3, Tolerance::default()).unwrap_err();
        assert!(matches!(err, Error::StepRejected { t, .. } if t == 0.0));
    }
}
