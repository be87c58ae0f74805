//! Concircular-tensor properties over randomized concircular data: the
//! built tensor satisfies the defining equation against the induced metric,
//! the checker is not degenerate (a perturbed covector fails), and the
//! tensor's eigenspaces agree with the classification's block structure.

use kemweb::canonical::sckt_metric;
use kemweb::chart::CheckConfig;
use kemweb::classify::classify;
use kemweb::concircular::{
    alpha_from_trace, build_ct, verify_concircular, verify_concircular_with_alpha,
};
use kemweb::corpus::random_sckt;
use kemweb::expr::Expr;

fn cfg() -> CheckConfig {
    CheckConfig::default()
}

#[test]
fn random_sckt_instances_verify_concircular() {
    let cfg = cfg();
    for seed in 0..20u64 {
        let data = random_sckt(seed, &cfg).unwrap();
        let web = sckt_metric(&data, &cfg).unwrap();
        let m = web.to_metric(&cfg).unwrap();
        let ct = build_ct(&data, &cfg).unwrap();
        let l = ct.to_covariant(&m).unwrap();
        let rep = verify_concircular(&l, &m, &cfg).unwrap();
        assert!(
            rep.pass && rep.max_normalized < 1e-8,
            "seed {seed}: max residual {} (normalized {})",
            rep.max_raw,
            rep.max_normalized
        );
    }
}

#[test]
fn perturbed_alpha_fails_on_every_instance() {
    let cfg = cfg();
    for seed in 0..5u64 {
        let data = random_sckt(seed, &cfg).unwrap();
        let web = sckt_metric(&data, &cfg).unwrap();
        let m = web.to_metric(&cfg).unwrap();
        let ct = build_ct(&data, &cfg).unwrap();
        let l = ct.to_covariant(&m).unwrap();
        let mut alpha = alpha_from_trace(&l, &m);
        for k in 0..alpha.components.len() {
            let mut shifted = alpha.components.clone();
            shifted[k] = shifted[k].clone() + Expr::constant(1e-3);
            alpha.components = shifted.clone();
            let rep = verify_concircular_with_alpha(&l, &m, &alpha, &cfg).unwrap();
            assert!(!rep.pass, "seed {seed}: shift on component {k} passed");
            alpha = alpha_from_trace(&l, &m);
        }
    }
}

#[test]
fn eigenspaces_match_classification_blocks() {
    let cfg = cfg();
    for seed in 0..20u64 {
        let data = random_sckt(seed, &cfg).unwrap();
        let web = sckt_metric(&data, &cfg).unwrap();
        let ct = build_ct(&data, &cfg).unwrap();
        let tree = classify(&web, &cfg).unwrap();
        assert_eq!(
            ct.eigenspace_partition(),
            tree.root.eigenstructure_partition(),
            "seed {seed}"
        );
    }
}

#[test]
fn tensor_is_nontrivial_at_the_center() {
    let cfg = cfg();
    for seed in 0..20u64 {
        let data = random_sckt(seed, &cfg).unwrap();
        let web = sckt_metric(&data, &cfg).unwrap();
        let ct = build_ct(&data, &cfg).unwrap();
        let center = web.chart_box().center();
        let values: Vec<f64> = (0..web.dim())
            .map(|i| ct.eigenvalue(i).evaluate(&center).unwrap())
            .collect();
        let spread = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - values.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(spread > 1e-6, "seed {seed}: eigenvalues {values:?}");
    }
}
