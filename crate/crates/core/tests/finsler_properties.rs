mod common;

use common::*;
use finsler_core::finsler::{self, MetricSpec, PointGeometry};
use finsler_core::poly::{self, Poly};
use finsler_core::{Rational, Scalar, Tolerance};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn exact_geometry(spec: &MetricSpec, x0: &[Rational]) -> PointGeometry<Rational> {
    let ctx = spec.compile().at::<Rational>(x0, Tolerance::default()).unwrap();
    PointGeometry::new(&ctx).unwrap()
}

#[test]
fn quadratic_spray_equals_christoffel_spray() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for fx in quadratic_fixtures() {
        for p in &fx.points {
            let geom = exact_geometry(&fx.spec, p);
            let oracle = christoffel_oracle(&fx.spec, p);
            for (i, g) in geom.spray.g.iter().enumerate() {
                let poly = poly::as_polynomial(g, 2, &mut rng).unwrap().expect("polynomial spray");
                assert_eq!(poly.scale(&Rational::from_integer(2.into())), oracle[i], "{} at {p:?}", fx.name);
            }
        }
    }
}

#[test]
fn inverse_hessian_identity_holds_exactly() {
    for fx in cubic_fixtures().into_iter().chain(quadratic_fixtures()) {
        for p in &fx.points {
            let Ok(ctx) = fx.spec.compile().at::<Rational>(p, Tolerance::default()) else { continue };
            let tensors = finsler::fundamental_t(&ctx);
            let inv = finsler::hessian_inverse(&tensors).unwrap();
            assert!(inv.satisfies_identity(&tensors.hessian), "{} at {p:?}", fx.name);
        }
    }
}

#[test]
fn float_inverse_agrees_with_metric_based_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let fx = berwald_moor();
    let ctx = fx.spec.compile().at::<f64>(&[0.5, -1.0, 2.0], Tolerance::default()).unwrap();
    let tensors = finsler::fundamental_t(&ctx);
    let inv = finsler::hessian_inverse(&tensors).unwrap();
    let mut checked = 0;
    while checked < 20 {
        let y: Vec<f64> = poly::random_point(&mut rng, 3);
        if tensors.t.eval(&y) <= 0.0 {
            continue;
        }
        let adj = inv.eval(&y).unwrap();
        let via_g = finsler::inverse_hessian_via_metric(&tensors, &y).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((adj[i][j] - via_g[i][j]).abs() < 1e-9 * (1.0 + adj[i][j].abs()));
            }
        }
        let g = finsler::finsler_metric(&tensors, &y).unwrap();
        let g_inv = finsler::finsler_metric_inverse(&tensors, &inv, &y).unwrap();
        let numeric = finsler::invert_numeric(&g).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((g_inv[i][j] - numeric[i][j]).abs() < 1e-9 * (1.0 + numeric[i][j].abs()));
            }
        }
        checked += 1;
    }
}

#[test]
fn euler_identities_and_spray_homogeneity() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for fx in cubic_fixtures().into_iter().chain(quadratic_fixtures()) {
        let p = &fx.points[0];
        let Ok(ctx) = fx.spec.compile().at::<Rational>(p, Tolerance::default()) else { continue };
        let geom = PointGeometry::new(&ctx).unwrap();
        let t = &geom.tensors;
        let n = t.n;
        let m = Rational::from_integer((t.m as i64).into());
        let y_dot = |parts: &[Poly<Rational>]| Poly::transvect(parts);
        assert_eq!(y_dot(&t.grad), t.t.scale(&m));
        for i in 0..n {
            assert_eq!(y_dot(&t.hessian[i]), t.grad[i].scale(&(m.clone() - Rational::from_integer(1.into()))));
        }
        let y: Vec<Rational> = poly::regular_point(&geom.spray.g.iter().collect::<Vec<_>>(), &mut rng, n).unwrap();
        for lambda in [2, 3, -1] {
            let l = Rational::from_integer(lambda.into());
            let ly: Vec<Rational> = y.iter().map(|v| v * &l).collect();
            for g in &geom.spray.g {
                assert_eq!(g.eval(&ly).unwrap(), g.eval(&y).unwrap() * &l * &l, "{}", fx.name);
            }
        }
    }
}

#[test]
fn expanded_connection_matches_spray_derivative() {
    for fx in cubic_fixtures() {
        let p = &fx.points[0];
        let Ok(ctx) = fx.spec.compile().at::<Rational>(p, Tolerance::default()) else { continue };
        let geom = PointGeometry::new(&ctx).unwrap();
        let expanded = finsler::nonlinear_connection_expanded(&geom.tensors, &geom.inverse);
        for i in 0..geom.tensors.n {
            for j in 0..geom.tensors.n {
                assert!(expanded[i][j].equivalent(&geom.spray.n[i][j]), "{} N^{i}_{j}", fx.name);
            }
        }
    }
}

#[test]
fn float_and_exact_sprays_agree_numerically() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for fx in cubic_fixtures() {
        let p = &fx.points[0];
        let compiled = fx.spec.compile();
        let Ok(exact) = compiled.at::<Rational>(p, Tolerance::default()) else { continue };
        let exact = PointGeometry::new(&exact).unwrap();
        let float = PointGeometry::new(&compiled.at::<f64>(&to_f64(p), Tolerance::default()).unwrap()).unwrap();
        let y: Vec<Rational> = poly::regular_point(&exact.spray.g.iter().collect::<Vec<_>>(), &mut rng, p.len()).unwrap();
        let yf = to_f64(&y);
        for (ge, gf) in exact.spray.g.iter().zip(&float.spray.g) {
            let a = ge.eval(&y).unwrap().to_f64();
            let b = gf.eval(&yf).unwrap();
            assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()), "{}: {a} vs {b}", fx.name);
        }
    }
}

#[test]
fn second_x_derivatives_match_finite_differences() {
    let fx = conformal_berwald_moor();
    let compiled = fx.spec.compile();
    let x = [0.3, -0.2, 0.7];
    let ctx = compiled.at::<f64>(&x, Tolerance::default()).unwrap();
    let h = 1e-4;
    let shifted = |d: f64| {
        let mut xs = x;
        xs[0] += d;
        compiled.at::<f64>(&xs, Tolerance::default()).unwrap().first_derivative(&[0, 1, 2], 0)
    };
    let fd = (shifted(h) - shifted(-h)) / (2.0 * h);
    let exact = ctx.second_derivative(&[0, 1, 2], 0, 0).unwrap();
    assert!((fd - exact).abs() < 1e-6 * exact.abs());
    let first_only = compiled.at_first_order::<f64>(&x, Tolerance::default()).unwrap();
    assert!(first_only.second_derivative(&[0, 1, 2], 0, 0).is_none());
}
