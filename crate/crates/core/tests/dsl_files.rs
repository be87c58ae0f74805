//! File-format behavior over the built-in corpus: parse/print idempotence,
//! mode conversions, and the spherical sigma file against the raw metric.

use kemweb::chart::CheckConfig;
use kemweb::corpus;
use kemweb::dsl::{parse_metric_file, MetricBody};
use kemweb::expr::Expr;

fn cfg() -> CheckConfig {
    CheckConfig::default()
}

#[test]
fn corpus_files_reparse_identically() {
    for name in corpus::builtin_names() {
        let text = corpus::builtin(&name).unwrap();
        let file = parse_metric_file(&text).unwrap();
        let printed = file.to_string();
        let refile = parse_metric_file(&printed)
            .unwrap_or_else(|e| panic!("{name}: reparse failed: {e}\n{printed}"));
        assert_eq!(printed, refile.to_string(), "{name}: print not idempotent");
    }
}

#[test]
fn sigma_spherical_validates_against_raw_spherical() {
    let file = parse_metric_file(&corpus::builtin("spherical-e3").unwrap()).unwrap();
    let w = file.to_web(&cfg()).unwrap();
    // the raw spherical metric on the same chart
    let raw_text = "\
dim 3
coords r theta phi
domain r 1 3
domain theta 0.3 1.2
domain phi 0.2 1
sign r +
sign theta +
sign phi +
mode raw
gii r : 1
gii theta : r^2
gii phi : r^2 * sin(theta)^2
";
    let raw = parse_metric_file(raw_text).unwrap().to_metric(&cfg()).unwrap();
    assert!(w.validate_form(&raw, &cfg()).unwrap());
    // and a euclidean metric does not match
    let eu_text = raw_text
        .replace("gii theta : r^2", "gii theta : 1")
        .replace("gii phi : r^2 * sin(theta)^2", "gii phi : 1");
    let eu = parse_metric_file(&eu_text).unwrap().to_metric(&cfg()).unwrap();
    assert!(!w.validate_form(&eu, &cfg()).unwrap());
}

#[test]
fn warped_mode_assembles_the_product_metric() {
    let text = "\
dim 3
coords r theta phi
domain r 1 3
domain theta 0.3 1.2
domain phi 0.2 1
sign r +
sign theta +
sign phi +
mode warped
base coords r
gii r : 1
endbase
fiber rho = r coords theta phi
gii theta : 1
gii phi : sin(theta)^2
endfiber
";
    let file = parse_metric_file(text).unwrap();
    let w = file.to_warped_structure(&cfg()).unwrap();
    assert_eq!(w.base_dim(), 1);
    assert_eq!(w.fibers().len(), 1);
    let m = file.to_metric(&cfg()).unwrap();
    let p = kemweb::chart::Point(vec![2.0, 0.7, 0.5]);
    assert!((m.component(1).evaluate(&p).unwrap() - 4.0).abs() < 1e-12);
    // round-trips through printing as well
    let printed = file.to_string();
    let refile = parse_metric_file(&printed).unwrap();
    assert_eq!(printed, refile.to_string());
    assert!(matches!(refile.body, MetricBody::Warped(_)));
}

#[test]
fn family_mode_reorders_to_declared_coordinates() {
    // declare coordinates in an order different from the constructor layout
    let text = "\
dim 3
coords y r z
domain y 0.2 1
domain r 0.5 1.5
domain z 0.2 1
sign y +
sign r +
sign z +
mode family
family irregular
base r : 1
block sigma1 = r^2 coords y
phi y : 1
endblock
block sigma1 = exp(r) coords z
phi z : 1
endblock
";
    let file = parse_metric_file(text).unwrap();
    let w = file.to_web(&cfg()).unwrap();
    assert_eq!(
        w.coords().iter().map(|c| c.name.as_str()).collect::<Vec<_>>(),
        ["y", "r", "z"]
    );
    let m = w.to_metric(&cfg()).unwrap();
    let p = kemweb::chart::Point(vec![0.5, 1.0, 0.5]);
    // g_yy = r^2 at r = 1, g_rr = 1, g_zz = exp(r)
    assert!((m.component(0).evaluate(&p).unwrap() - 1.0).abs() < 1e-12);
    assert!((m.component(1).evaluate(&p).unwrap() - 1.0).abs() < 1e-12);
    assert!((m.component(2).evaluate(&p).unwrap() - 1.0f64.exp()).abs() < 1e-12);
}

#[test]
fn declared_sign_must_match_raw_component() {
    let text = "\
dim 2
coords t x
domain t 0.5 1.5
domain x 0.5 1.5
sign t +
sign x +
mode raw
gii t : -1
gii x : 1
";
    // g_tt < 0 but declared +
    assert!(parse_metric_file(text)
        .unwrap()
        .to_metric(&cfg())
        .is_err());
    let fixed = text.replace("sign t +", "sign t -");
    let m = parse_metric_file(&fixed).unwrap().to_metric(&cfg()).unwrap();
    assert_eq!(m.sign(0), -1.0);
    // H_t^2 = e g = 1
    let p = kemweb::chart::Point(vec![1.0, 1.0]);
    assert_eq!(m.hi2(0).evaluate(&p).unwrap(), 1.0);
    let _ = Expr::one();
}
