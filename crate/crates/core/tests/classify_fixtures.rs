mod common;

use common::*;
use finsler_core::classify::{self, PointOutcome};
use finsler_core::{Mode, Tolerance};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn conformal_berwald_moor_is_berwald_at_every_point() {
    let fx = conformal_berwald_moor();
    let report = classify::classify(&fx.spec.compile(), &fx.points, Mode::Exact, Tolerance::default()).unwrap();
    assert_eq!(report.berwald(), Some(true));
    assert_eq!(report.landsberg(), Some(true));
    assert_eq!(report.riemannian(), Some(false));
    let fell_back = report.points.iter().filter(|p| p.report().unwrap().fell_back).count();
    assert_eq!(fell_back, 3);
}

#[test]
fn decomposable_verdicts_follow_parallelism() {
    for fx in decomp_fixtures() {
        let metric = fx.spec.to_metric_spec().compile();
        let report = classify::classify(&metric, &fx.points, Mode::Exact, Tolerance::default()).unwrap();
        assert_eq!(report.berwald(), Some(fx.parallel), "{}", fx.name);
        assert_eq!(report.landsberg(), Some(fx.parallel), "{}", fx.name);
        if !fx.parallel {
            let w = report.points[0].report().unwrap().berwald.witness.clone().unwrap();
            assert!(!w.leading_term.is_empty() && w.leading_term != "0");
        }
    }
}

#[test]
fn exact_and_float_verdicts_agree() {
    for fx in cubic_fixtures().into_iter().chain(quadratic_fixtures()) {
        let metric = fx.spec.compile();
        let exact = classify::classify(&metric, &fx.points, Mode::Exact, Tolerance::default()).unwrap();
        let float = classify::classify(&metric, &fx.points, Mode::Float, Tolerance::default()).unwrap();
        assert_eq!(exact.berwald(), float.berwald(), "{}", fx.name);
        assert_eq!(exact.landsberg(), float.landsberg(), "{}", fx.name);
        assert_eq!(exact.riemannian(), float.riemannian(), "{}", fx.name);
    }
}

#[test]
fn random_cubics_respect_the_inclusions() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut classified = 0;
    let mut berwald = 0;
    while classified < 50 {
        let spec = random_cubic(&mut rng);
        let n = spec.dimension();
        let point = ints(&vec![1; n]);
        match classify::classify_at(&spec.compile(), &point, Mode::Exact, Tolerance::default()).unwrap() {
            PointOutcome::Classified(r) => {
                classified += 1;
                berwald += r.berwald.holds as usize;
                assert_eq!(r.berwald.holds, r.landsberg.holds);
                assert_eq!(r.mechanism_verified, Some(true));
            }
            PointOutcome::Degenerate { .. } => {}
        }
    }
    assert!(berwald < 50, "fuzz produced only Berwald metrics");
}
