//! End-to-end CLI behavior: exit-code contract, JSON shape, determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn kemweb() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kemweb"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    kemweb()
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn kemweb")
}

fn tempdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("kemweb-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const BAD_LC: &str = "\
dim 2
coords x1 x2
domain x1 1 2
domain x2 1 2
sign x1 +
sign x2 +
mode raw
gii x1 : 1
gii x2 : 1 + x1 * x2^2
";

#[test]
fn example_check_classify_happy_path() {
    let dir = tempdir("happy");
    let out = run_in(&dir, &["example", "spherical-e3"]);
    assert!(out.status.success(), "{out:?}");
    assert!(dir.join("spherical-e3.web").exists());

    let out = run_in(&dir, &["check", "spherical-e3.web"]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");

    let out = run_in(&dir, &["classify", "spherical-e3.web", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("\"kind\":\"irregular_m1\""));
    assert!(stdout.contains("\"base\":\"r\""));
    assert!(stdout.contains("\"concircular_compatible\":true"));
}

#[test]
fn euclidean_classifies_as_product() {
    let dir = tempdir("euclid");
    assert!(run_in(&dir, &["example", "euclidean-3"]).status.success());
    let out = run_in(&dir, &["classify", "euclidean-3.web", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("\"kind\":\"product\""));
}

#[test]
fn failing_check_exits_one_with_condition_named() {
    let dir = tempdir("fail");
    write(&dir, "bad.web", BAD_LC);
    let out = run_in(&dir, &["check", "bad.web"]);
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("levi_civita: FAIL"), "{stdout}");
}

#[test]
fn malformed_file_exits_two() {
    let dir = tempdir("parse");
    write(&dir, "bad.web", "dim 2\ncoords x y\nnot a line\n");
    let out = run_in(&dir, &["check", "bad.web"]);
    assert_eq!(out.status.code(), Some(2));
    // unknown example name is a usage error too
    let out = run_in(&dir, &["example", "no-such-thing"]);
    assert_eq!(out.status.code(), Some(2));
    // classify refuses raw files
    write(
        &dir,
        "raw.web",
        "dim 2\ncoords x y\ndomain x 1 2\ndomain y 1 2\nsign x +\nsign y +\nmode raw\ngii x : 1\ngii y : 1\n",
    );
    let out = run_in(&dir, &["classify", "raw.web"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn out_of_domain_point_exits_three() {
    let dir = tempdir("domain");
    assert!(run_in(&dir, &["example", "sphere-s2"]).status.success());
    let out = run_in(
        &dir,
        &["curvature", "sphere-s2.web", "--point", "theta=9,phi=0.5"],
    );
    assert_eq!(out.status.code(), Some(3), "{out:?}");
}

#[test]
fn remain_violating_web_exits_one_with_residual_table() {
    let dir = tempdir("violate");
    // chain web: sigma_12 = x1, sigma_32 = x3 violates the residual system
    write(
        &dir,
        "chain.web",
        "\
dim 3
coords x1 x2 x3
domain x1 1 2
domain x2 1 2
domain x3 1 2
sign x1 +
sign x2 +
sign x3 +
mode sigma
phi x1 : 1
phi x2 : 1
phi x3 : 1
sigma x1 x2 : x1
sigma x3 x2 : x3
",
    );
    let out = run_in(&dir, &["classify", "chain.web"]);
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("remain system: FAIL"), "{stdout}");
    assert!(stdout.contains("triple [0, 1, 2]"), "{stdout}");
}

#[test]
fn json_output_is_byte_identical_across_runs() {
    let dir = tempdir("determinism");
    for name in ["spherical-e3", "warped-demo", "irregular-demo", "sphere-s2"] {
        assert!(run_in(&dir, &["example", name]).status.success());
    }
    let invocations: Vec<Vec<&str>> = vec![
        vec!["check", "spherical-e3.web", "--json"],
        vec!["check", "spherical-e3.web", "--json", "--seed", "9"],
        vec!["classify", "warped-demo.web", "--json"],
        vec!["classify", "irregular-demo.web", "--json"],
        vec!["curvature", "sphere-s2.web", "--json"],
        vec![
            "verify-ct",
            "spherical-e3.web",
            "--l",
            "r r = -r^2",
            "--json",
        ],
        vec!["example", "elliptic-e2", "--json"],
    ];
    for args in invocations {
        let a = run_in(&dir, &args);
        let b = run_in(&dir, &args);
        assert_eq!(a.status.code(), b.status.code(), "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?} output differs across runs");
        assert!(!a.stdout.is_empty());
        // stdout is pure JSON
        let s = String::from_utf8(a.stdout).unwrap();
        assert!(s.starts_with('{') && s.ends_with("}\n"), "{args:?}: {s}");
    }
    // different seeds change the sample set but not validity
    let a = run_in(&dir, &["check", "spherical-e3.web", "--json", "--seed", "1"]);
    let b = run_in(&dir, &["check", "spherical-e3.web", "--json", "--seed", "2"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(b.status.code(), Some(0));
}

#[test]
fn verify_ct_killing_and_usage() {
    let dir = tempdir("killing");
    assert!(run_in(&dir, &["example", "spherical-e3"]).status.success());
    // K = g is a Killing tensor
    let out = run_in(
        &dir,
        &[
            "verify-ct",
            "spherical-e3.web",
            "--k",
            "r r = 1",
            "--k",
            "theta theta = r^2",
            "--k",
            "phi phi = r^2 * sin(theta)^2",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    // no components at all: usage error
    let out = run_in(&dir, &["verify-ct", "spherical-e3.web"]);
    assert_eq!(out.status.code(), Some(2));
    // K = diag(x, 0) on flat space is not Killing
    write(
        &dir,
        "flat.web",
        "dim 2\ncoords x y\ndomain x 0.5 2\ndomain y 0.5 2\nsign x +\nsign y +\nmode raw\ngii x : 1\ngii y : 1\n",
    );
    let out = run_in(&dir, &["verify-ct", "flat.web", "--k", "x x = x"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn construct_emits_parseable_sigma_file() {
    let dir = tempdir("construct");
    assert!(run_in(&dir, &["example", "elliptic-e2"]).status.success());
    let out = run_in(
        &dir,
        &["construct", "elliptic-e2.web", "--out", "elliptic-sigma.web"],
    );
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let out = run_in(&dir, &["check", "elliptic-sigma.web"]);
    assert_eq!(out.status.code(), Some(0));
    let out = run_in(&dir, &["classify", "elliptic-sigma.web", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("\"kind\":\"irreducible\""));
}

#[test]
fn samples_below_minimum_is_usage_error() {
    let dir = tempdir("samples");
    assert!(run_in(&dir, &["example", "sphere-s2"]).status.success());
    let out = run_in(&dir, &["check", "sphere-s2.web", "--samples", "3"]);
    assert_eq!(out.status.code(), Some(2));
}
