#![allow(dead_code)]

use finsler_core::decomp::DecompSpec;
use finsler_core::finsler::MetricSpec;
use finsler_core::poly::Poly;
use finsler_core::{linalg, Expr, Rational, Tolerance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn q(num: i64, den: i64) -> Rational {
    Rational::new(num.into(), den.into())
}

pub fn pt(v: &[(i64, i64)]) -> Vec<Rational> {
    v.iter().map(|&(a, b)| q(a, b)).collect()
}

pub fn ints(v: &[i64]) -> Vec<Rational> {
    v.iter().map(|&a| q(a, 1)).collect()
}

pub fn to_f64(v: &[Rational]) -> Vec<f64> {
    use finsler_core::Scalar;
    v.iter().map(Scalar::to_f64).collect()
}

fn e(text: &str, n: usize) -> Expr {
    Expr::parse(text, n).unwrap_or_else(|err| panic!("{text}: {err}"))
}

pub struct MthRootFixture {
    pub name: &'static str,
    pub spec: MetricSpec,
    pub points: Vec<Vec<Rational>>,
}

fn mth(name: &'static str, n: usize, m: usize, coeffs: &[(&[usize], &str)], points: Vec<Vec<Rational>>) -> MthRootFixture {
    let mut spec = MetricSpec::new(n, m).unwrap();
    for (idx, text) in coeffs {
        let zero_based: Vec<usize> = idx.iter().map(|i| i - 1).collect();
        spec.insert(&zero_based, e(text, n)).unwrap();
    }
    MthRootFixture { name, spec, points }
}

pub fn berwald_moor() -> MthRootFixture {
    mth("berwald-moor", 3, 3, &[(&[1, 2, 3], "1")], vec![ints(&[0, 0, 0]), ints(&[1, -2, 3])])
}

pub fn conformal_berwald_moor() -> MthRootFixture {
    mth(
        "conformal-berwald-moor",
        3,
        3,
        &[(&[1, 2, 3], "exp(x1)")],
        vec![ints(&[0, 0, 0]), ints(&[0, 1, 2]), ints(&[1, 0, 0]), ints(&[-1, 2, 3]), pt(&[(1, 2), (1, 3), (-2, 1)])],
    )
}

/// Cubic fixtures with invertible Hessian used across the suites.
pub fn cubic_fixtures() -> Vec<MthRootFixture> {
    vec![
        berwald_moor(),
        conformal_berwald_moor(),
        mth("cubic-2d-x-dependent", 2, 3, &[(&[1, 1, 2], "1"), (&[1, 2, 2], "x1")], vec![ints(&[1, 0]), ints(&[2, -1])]),
        mth(
            "cubic-2d-mixed",
            2,
            3,
            &[(&[1, 1, 1], "1 + x2^2"), (&[1, 2, 2], "x1 - 2"), (&[2, 2, 2], "1/3")],
            vec![ints(&[0, 0]), pt(&[(1, 2), (3, 1)])],
        ),
        mth(
            "cubic-3d-polynomial-coefficients",
            3,
            3,
            &[(&[1, 2, 3], "1 + x1*x2"), (&[1, 1, 1], "x3"), (&[2, 2, 3], "2")],
            vec![ints(&[0, 0, 1]), ints(&[1, 2, -1])],
        ),
    ]
}

/// Quadratic (Riemannian) fixtures with curved metrics.
pub fn quadratic_fixtures() -> Vec<MthRootFixture> {
    vec![
        mth("quadratic-warped", 2, 2, &[(&[1, 1], "1"), (&[2, 2], "1 + x1^2")], vec![ints(&[0, 0]), ints(&[1, 2])]),
        mth(
            "quadratic-stereographic-sphere",
            2,
            2,
            &[(&[1, 1], "4/(1 + x1^2 + x2^2)^2"), (&[2, 2], "4/(1 + x1^2 + x2^2)^2")],
            vec![ints(&[0, 0]), pt(&[(1, 2), (-1, 3)])],
        ),
        mth(
            "quadratic-3d-off-diagonal",
            3,
            2,
            &[(&[1, 1], "2 + x2^2"), (&[1, 2], "x1/2"), (&[2, 2], "3"), (&[3, 3], "1 + x3^2"), (&[1, 3], "x2*x3/4")],
            vec![ints(&[0, 0, 0]), pt(&[(1, 1), (-1, 2), (1, 3)])],
        ),
    ]
}

/// Symmetric `γ` from upper-triangle rows given as text.
fn gamma_table(n: usize, entries: &[(usize, usize, &str)]) -> Vec<Vec<Expr>> {
    let mut g = vec![vec![Expr::zero(); n]; n];
    for &(i, j, text) in entries {
        g[i - 1][j - 1] = e(text, n);
        g[j - 1][i - 1] = e(text, n);
    }
    g
}

pub struct DecompFixture {
    pub name: String,
    pub spec: DecompSpec,
    pub points: Vec<Vec<Rational>>,
    /// Expected `∇b = 0` at every listed point.
    pub parallel: bool,
}

fn decomp(name: &str, n: usize, gamma: &[(usize, usize, &str)], b: &[&str], points: Vec<Vec<Rational>>, parallel: bool) -> DecompFixture {
    let spec = DecompSpec::new(gamma_table(n, gamma), b.iter().map(|t| e(t, n)).collect()).unwrap();
    DecompFixture { name: name.into(), spec, points, parallel }
}

pub fn flat_decomp() -> DecompFixture {
    decomp("flat", 3, &[(1, 1, "1"), (2, 2, "1"), (3, 3, "1")], &["1", "0", "0"], vec![ints(&[0, 0, 0]), ints(&[1, 2, 3])], true)
}

pub fn rotating_decomp() -> DecompFixture {
    decomp(
        "rotating-b",
        3,
        &[(1, 1, "1"), (2, 2, "1"), (3, 3, "1")],
        &["cos(x3)", "sin(x3)", "0"],
        vec![ints(&[0, 0, 0]), pt(&[(1, 1), (0, 1), (1, 2)])],
        false,
    )
}

pub fn product_decomp() -> DecompFixture {
    decomp(
        "product-curved-parallel",
        3,
        &[(1, 1, "1"), (2, 2, "1"), (3, 3, "1 + x2^2")],
        &["1", "0", "0"],
        vec![ints(&[0, 0, 0]), ints(&[1, 2, -1])],
        true,
    )
}

/// Named, hand-built decomposable fixtures.
pub fn decomp_fixtures() -> Vec<DecompFixture> {
    let id3: &[(usize, usize, &str)] = &[(1, 1, "1"), (2, 2, "1"), (3, 3, "1")];
    vec![
        flat_decomp(),
        decomp("oblique-constant", 3, id3, &["3/5", "4/5", "0"], vec![ints(&[0, 0, 0]), ints(&[2, 1, 0])], true),
        product_decomp(),
        decomp("product-2d", 2, &[(1, 1, "1"), (2, 2, "1 + x2^2")], &["1", "0"], vec![ints(&[0, 0]), ints(&[3, 1])], true),
        rotating_decomp(),
        decomp(
            "rotating-b-rational",
            3,
            id3,
            &["(1 - x3^2)/(1 + x3^2)", "2*x3/(1 + x3^2)", "0"],
            vec![ints(&[0, 0, 0]), ints(&[1, 0, 1]), pt(&[(0, 1), (2, 1), (-1, 2)])],
            false,
        ),
        decomp("warped-2d", 2, &[(1, 1, "1"), (2, 2, "1 + x1^2")], &["1", "0"], vec![ints(&[1, 0]), ints(&[-2, 3])], false),
        decomp(
            "conformal-rational",
            3,
            &[(1, 1, "(1 + x1^2)^2"), (2, 2, "(1 + x1^2)^2"), (3, 3, "(1 + x1^2)^2")],
            &["1 + x1^2", "0", "0"],
            vec![ints(&[1, 0, 0]), pt(&[(1, 2), (1, 1), (0, 1)])],
            false,
        ),
        decomp(
            "conformal-exponential",
            3,
            &[(1, 1, "exp(2*x1)"), (2, 2, "exp(2*x1)"), (3, 3, "exp(2*x1)")],
            &["exp(x1)", "0", "0"],
            vec![ints(&[0, 0, 0]), ints(&[1, 1, 1])],
            false,
        ),
    ]
}

fn random_int(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> i64 {
    rng.gen_range(lo..=hi)
}

/// Unit vectors with rational entries from Pythagorean-like parameters.
fn stereographic(t: &str) -> [String; 2] {
    [format!("(1 - ({t})^2)/(1 + ({t})^2)"), format!("2*({t})/(1 + ({t})^2)")]
}

/// `γ = L Lᵀ`, `b = L e` with `|e| = 1`, so `γ^{ij} b_i b_j = 1` identically.
/// `L` is lower triangular with positive diagonal.
fn cholesky_family(rng: &mut ChaCha8Rng, n: usize, curved: bool, index: usize) -> DecompFixture {
    let var = |rng: &mut ChaCha8Rng| format!("x{}", random_int(rng, 1, n as i64));
    let mut l = vec![vec![String::from("0"); n]; n];
    for i in 0..n {
        for j in 0..=i {
            let c = random_int(rng, if i == j { 1 } else { -2 }, 3);
            l[i][j] = if curved && rng.gen_bool(0.6) {
                let v = var(rng);
                if i == j {
                    format!("{c} + {v}^2")
                } else {
                    format!("{c} + {}*{v}", random_int(rng, -2, 2))
                }
            } else {
                c.to_string()
            };
        }
    }
    let t = if curved { format!("{}*{} + {}", random_int(rng, 1, 2), var(rng), random_int(rng, 0, 2)) } else { format!("{}", random_int(rng, 0, 3)) };
    let [c, s] = stereographic(&t);
    let mut unit = vec![c, s];
    unit.resize(n, "0".into());
    let mut gamma = Vec::new();
    let mut g_text = vec![vec![String::new(); n]; n];
    for i in 0..n {
        for j in i..n {
            let terms: Vec<String> = (0..=i.min(j)).map(|k| format!("({})*({})", l[i][k], l[j][k])).collect();
            g_text[i][j] = terms.join(" + ");
        }
    }
    for i in 0..n {
        for j in i..n {
            gamma.push((i + 1, j + 1, g_text[i][j].as_str()));
        }
    }
    let b: Vec<String> = (0..n)
        .map(|i| (0..=i).map(|k| format!("({})*({})", l[i][k], unit[k])).collect::<Vec<_>>().join(" + "))
        .collect();
    let b_refs: Vec<&str> = b.iter().map(String::as_str).collect();
    let points = (0..2).map(|_| (0..n).map(|_| q(random_int(rng, -2, 2), random_int(rng, 1, 2))).collect()).collect();
    let kind = if curved { "curved" } else { "constant" };
    decomp(&format!("random-{kind}-{index}"), n, &gamma, &b_refs, points, !curved)
}

/// Randomized unit-norm families: constant `γ` (parallel `b`) and
/// x-dependent `γ` with x-dependent `b`.
pub fn random_decomp_fixtures(seed: u64, per_family: usize) -> Vec<DecompFixture> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for i in 0..per_family {
        let n = if i % 2 == 0 { 2 } else { 3 };
        out.push(cholesky_family(&mut rng, n, false, i));
        out.push(cholesky_family(&mut rng, n, true, i));
    }
    out
}

/// Random cubic: each coefficient `c0 + c1*x_r` or zero.
pub fn random_cubic(rng: &mut ChaCha8Rng) -> MetricSpec {
    let n = rng.gen_range(2..=3);
    let mut spec = MetricSpec::new(n, 3).unwrap();
    for i in 0..n {
        for j in i..n {
            for k in j..n {
                if rng.gen_bool(0.4) {
                    continue;
                }
                let c0 = random_int(rng, -3, 3);
                let c1 = random_int(rng, -2, 2);
                let r = random_int(rng, 1, n as i64);
                spec.insert(&[i, j, k], e(&format!("{c0} + {c1}*x{r}"), n)).unwrap();
            }
        }
    }
    spec
}

/// Riemannian `2G^i = Γ^i_jk y^j y^k` computed directly from `γ_ij = a_ij`.
pub fn christoffel_oracle(spec: &MetricSpec, x0: &[Rational]) -> Vec<Poly<Rational>> {
    let n = spec.dimension();
    let coeff = |i: usize, j: usize| spec.coefficient(&[i, j]).cloned().unwrap_or_else(Expr::zero);
    let g: Vec<Vec<Rational>> = (0..n).map(|i| (0..n).map(|j| coeff(i, j).eval(x0).unwrap()).collect()).collect();
    let dg = |i: usize, j: usize, k: usize| -> Rational { coeff(i, j).diff(k).eval(x0).unwrap() };
    let g_inv = linalg::invert(&g, &Tolerance::default()).unwrap();
    (0..n)
        .map(|i| {
            let mut p = Poly::zero(n);
            for j in 0..n {
                for k in 0..n {
                    let mut c = Rational::from_integer(0.into());
                    for h in 0..n {
                        c += g_inv[i][h].clone() * (dg(h, j, k) + dg(h, k, j) - dg(j, k, h)) / Rational::from_integer(2.into());
                    }
                    p = &p + &(&Poly::var(n, j) * &Poly::var(n, k)).scale(&c);
                }
            }
            p
        })
        .collect()
}

