use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use kemweb::chart::{CheckConfig, Point};
use kemweb::classify::classify;
use kemweb::concircular::{verify_concircular, SymTensorField};
use kemweb::corpus;
use kemweb::dsl::parse_metric_file;

fn cfg() -> CheckConfig {
    CheckConfig::default()
}

fn bench_expr(c: &mut Criterion) {
    let cfg = cfg();
    let w = corpus::spherical_e3_web(&cfg).unwrap();
    let m = w.to_metric(&cfg).unwrap();
    let g_phi = m.component(2).clone();
    let p = Point(vec![2.0, 0.7, 0.5]);
    c.bench_function("expr_evaluate_spherical_gphi", |b| {
        b.iter(|| g_phi.evaluate(black_box(&p)).unwrap())
    });
    let r = m.coords()[0].clone();
    c.bench_function("expr_differentiate_spherical_gphi", |b| {
        b.iter(|| black_box(&g_phi).differentiate(&r))
    });
}

fn bench_curvature(c: &mut Criterion) {
    let cfg = cfg();
    let m = corpus::random_orthogonal_metric(4, 1, &cfg).unwrap();
    let p = Point(vec![1.5, 1.2, 1.7, 1.3]);
    // warm the cached Christoffel and derivative expressions
    let _ = m.riemann(&p, 0, 1, 0, 1).unwrap();
    c.bench_function("christoffel_table_n4", |b| {
        b.iter(|| m.christoffel(black_box(&p)).unwrap())
    });
    c.bench_function("riemann_component_n4", |b| {
        let table = m.christoffel(&p).unwrap();
        b.iter(|| {
            m.riemann_with_table(black_box(&p), &table, 0, 1, 1, 2)
                .unwrap()
        })
    });
    c.bench_function("rjiik_closed_form_n4", |b| {
        b.iter(|| m.rjiik_closed_form(black_box(&p), 1, 0, 2).unwrap())
    });
}

fn bench_checks(c: &mut Criterion) {
    let cfg = cfg();
    let w = corpus::random_warped(3, &cfg).unwrap().web;
    c.bench_function("residuals_remain_warped", |b| {
        b.iter(|| w.residuals_remain(black_box(&cfg)).unwrap())
    });
    c.bench_function("classify_warped", |b| {
        b.iter(|| classify(black_box(&w), &cfg).unwrap())
    });
    let data = corpus::random_sckt(5, &cfg).unwrap();
    let web = kemweb::canonical::sckt_metric(&data, &cfg).unwrap();
    let m = web.to_metric(&cfg).unwrap();
    let ct = kemweb::concircular::build_ct(&data, &cfg).unwrap();
    let l = ct.to_covariant(&m).unwrap();
    c.bench_function("verify_concircular_sckt", |b| {
        b.iter(|| verify_concircular(black_box(&l), &m, &cfg).unwrap())
    });
    let g = SymTensorField::from_diagonal((0..m.dim()).map(|i| m.component(i).clone()).collect());
    c.bench_function("verify_killing_metric", |b| {
        b.iter(|| kemweb::concircular::verify_killing(black_box(&g), &m, &cfg).unwrap())
    });
}

fn bench_parser(c: &mut Criterion) {
    let text = corpus::builtin("spherical-e3").unwrap();
    c.bench_function("parse_spherical_file", |b| {
        b.iter(|| parse_metric_file(black_box(&text)).unwrap())
    });
    let coords = kemweb::chart::coords(&["r", "theta"]);
    c.bench_function("parse_expression", |b| {
        b.iter(|| {
            kemweb::dsl::parse_expr(
                black_box("r^2 * sin(theta)^2 + cosh(r) / (1 + theta^2)"),
                &coords,
            )
            .unwrap()
        })
    });
}

criterion_group!(benches, bench_expr, bench_curvature, bench_checks, bench_parser);
criterion_main!(benches);
