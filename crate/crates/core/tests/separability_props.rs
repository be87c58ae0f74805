//! Separability-check properties: the closed-form curvature identity under
//! the Levi-Civita equations, agreement of the two diagonal-curvature
//! routes, and the behavior of the checks on canonical-family webs.

use kemweb::chart::{CheckConfig, Point};
use kemweb::corpus;
use kemweb::separability::{
    check_diagonal_curvature, check_levi_civita, check_mixed_log_partials, is_kem_candidate,
};

fn cfg() -> CheckConfig {
    CheckConfig::default()
}

/// On metrics satisfying the Levi-Civita equations, R_jiik equals
/// (3/4) e_i H_i^2 d2_jk log H_i^2 pointwise. Both diagonal-curvature
/// routes therefore agree.
#[test]
fn rjiik_proportionality_under_separability() {
    let cfg = cfg();
    for seed in 0..5u64 {
        for instance in [
            corpus::random_irreducible(3, seed, &cfg).unwrap(),
            corpus::random_warped(seed, &cfg).unwrap(),
            corpus::random_irregular(seed, &cfg).unwrap(),
        ] {
            let m = instance.web.to_metric(&cfg).unwrap();
            assert!(check_levi_civita(&m, &cfg).unwrap().pass);
            let n = m.dim();
            let points = m.sample(&cfg).unwrap();
            for p in points.iter().take(10) {
                for i in 0..n {
                    for j in 0..n {
                        for k in 0..n {
                            if i == j || j == k || i == k {
                                continue;
                            }
                            let closed = m.rjiik_closed_form(p, i, j, k).unwrap();
                            let hi2 = m.hi2(i).evaluate(p).unwrap();
                            let sep =
                                0.75 * m.sign(i) * hi2 * m.d2log(i, j, k).evaluate(p).unwrap();
                            let scale = 1.0 + closed.abs().max(sep.abs());
                            assert!(
                                (closed - sep).abs() <= 1e-8 * scale,
                                "seed {seed} ({}): R_jiik {closed} vs (3/4)eH^2 d2log {sep}",
                                instance.family
                            );
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn canonical_webs_pass_all_checks() {
    let cfg = cfg();
    for seed in 0..10u64 {
        for instance in [
            corpus::random_irreducible(3, seed, &cfg).unwrap(),
            corpus::random_product(seed, &cfg).unwrap(),
            corpus::random_warped(seed, &cfg).unwrap(),
            corpus::random_irregular(seed, &cfg).unwrap(),
        ] {
            let m = instance.web.to_metric(&cfg).unwrap();
            let lc = check_levi_civita(&m, &cfg).unwrap();
            assert!(
                lc.pass,
                "{} seed {seed}: levi-civita max {}",
                instance.family, lc.max_normalized
            );
            let dc = check_diagonal_curvature(&m, &cfg).unwrap();
            assert!(
                dc.pass,
                "{} seed {seed}: diagonal curvature max {}",
                instance.family, dc.max_normalized
            );
            let ml = check_mixed_log_partials(&m, &cfg).unwrap();
            assert!(ml.pass);
            assert!(is_kem_candidate(&m, &cfg).unwrap());
            if instance.web.dim() >= 3 {
                let rr = instance.web.residuals_remain(&cfg).unwrap();
                assert!(
                    rr.pass && rr.max_normalized < 1e-8,
                    "{} seed {seed}: remain max {}",
                    instance.family,
                    rr.max_normalized
                );
            }
        }
    }
}

/// The two checkers agree in pass/fail on the failing example too, and the
/// mixed-partial residual is exactly 1 for H_3^2 = exp(x1 x2).
#[test]
fn exp_coupling_flagged_by_both_routes() {
    let cfg = cfg();
    let c = kemweb::chart::coords(&["x1", "x2", "x3"]);
    let b = kemweb::chart::ChartBox::new(vec![(0.5, 1.5); 3]).unwrap();
    let gii = vec![
        kemweb::Expr::one(),
        kemweb::Expr::one(),
        kemweb::Expr::exp(kemweb::Expr::var(&c[0]) * kemweb::Expr::var(&c[1])),
    ];
    let m = kemweb::OrthogonalMetric::new(c, b, gii, &cfg).unwrap();
    let dc = check_diagonal_curvature(&m, &cfg).unwrap();
    let ml = check_mixed_log_partials(&m, &cfg).unwrap();
    assert!(!dc.pass && !ml.pass);
    let t = ml
        .tuples
        .iter()
        .find(|t| t.indices == vec![2, 0, 1])
        .unwrap();
    assert!((t.max_raw - 1.0).abs() < 1e-12);
    // pointwise, R_jiik and the closed form track the same violation
    let p = Point(vec![1.0, 1.2, 0.7]);
    let r = m.rjiik_closed_form(&p, 2, 0, 1).unwrap();
    let assembled = m.riemann(&p, 0, 2, 2, 1).unwrap();
    assert!((r - assembled).abs() <= 1e-9 * (1.0 + r.abs()));
    assert!(r.abs() > 1e-2);
}
