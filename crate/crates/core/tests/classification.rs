//! Classification round trips over the canonical families and the
//! connectivity theorems witnessed on generated webs.

use kemweb::chart::{coords, ChartBox, CheckConfig};
use kemweb::classify::{classify, connecting_set, equivalence_classes, strong_set, ClassificationNode};
use kemweb::corpus;
use kemweb::expr::Expr;
use kemweb::web::SigmaWeb;
use kemweb::Error;

fn cfg() -> CheckConfig {
    CheckConfig::default()
}

#[test]
fn euclidean_web_classifies_as_product_of_leaves() {
    let c = coords(&["x", "y", "z"]);
    let b = ChartBox::new(vec![(0.5, 2.0); 3]).unwrap();
    let w = SigmaWeb::new(
        c,
        b,
        vec![1.0; 3],
        vec![Expr::one(), Expr::one(), Expr::one()],
        vec![vec![Expr::zero(); 3]; 3],
        &cfg(),
    )
    .unwrap();
    let tree = classify(&w, &cfg()).unwrap();
    match &tree.root {
        ClassificationNode::Product { children } => {
            assert_eq!(children.len(), 3);
            assert!(children
                .iter()
                .all(|c| matches!(c, ClassificationNode::Leaf { .. })));
        }
        other => panic!("expected product, got {}", other.kind()),
    }
}

#[test]
fn spherical_classifies_as_irregular_with_concircular_form() {
    let w = corpus::spherical_e3_web(&cfg()).unwrap();
    let tree = classify(&w, &cfg()).unwrap();
    match &tree.root {
        ClassificationNode::IrregularM1 {
            base,
            blocks,
            concircular_compatible,
        } => {
            assert_eq!(base.name, "r");
            assert!(*concircular_compatible);
            assert_eq!(blocks.len(), 1);
            // the block function is r^2 (up to the recorded constant shift)
            let p = kemweb::chart::Point(vec![1.5]);
            let v = blocks[0].sigma1.evaluate(&p).unwrap();
            assert!((v - 2.25).abs() < 1e-12);
            // the 2-sphere block is an irreducible 2-web
            match &blocks[0].child {
                ClassificationNode::Irreducible { coords } => {
                    let names: Vec<_> = coords.iter().map(|c| c.name.as_str()).collect();
                    assert_eq!(names, ["theta", "phi"]);
                }
                other => panic!("expected irreducible block, got {}", other.kind()),
            }
        }
        other => panic!("expected irregular_m1, got {}", other.kind()),
    }
}

#[test]
fn warped_demo_classifies_with_two_blocks() {
    let file = kemweb::dsl::parse_metric_file(&corpus::builtin("warped-demo").unwrap()).unwrap();
    let w = file.to_web(&cfg()).unwrap();
    let tree = classify(&w, &cfg()).unwrap();
    match &tree.root {
        ClassificationNode::WarpedProduct { base, blocks } => {
            let names: Vec<_> = base.iter().map(|c| c.name.as_str()).collect();
            assert_eq!(names, ["x1", "x2"]);
            assert_eq!(blocks.len(), 2);
            assert!((blocks[0].e - 5.0).abs() < 1e-9);
            assert!((blocks[1].e - 7.0).abs() < 1e-9);
        }
        other => panic!("expected warped_product, got {}", other.kind()),
    }
}

#[test]
fn irregular_demo_is_not_concircular_compatible() {
    let file =
        kemweb::dsl::parse_metric_file(&corpus::builtin("irregular-demo").unwrap()).unwrap();
    let w = file.to_web(&cfg()).unwrap();
    let tree = classify(&w, &cfg()).unwrap();
    match &tree.root {
        ClassificationNode::IrregularM1 {
            concircular_compatible,
            blocks,
            ..
        } => {
            assert!(!concircular_compatible);
            assert_eq!(blocks.len(), 2);
        }
        other => panic!("expected irregular_m1, got {}", other.kind()),
    }
}

#[test]
fn round_trip_all_families_over_seeds() {
    let cfg = cfg();
    for seed in 0..20u64 {
        for (instance, what) in [
            (corpus::random_irreducible(3, seed, &cfg), "irreducible-3"),
            (corpus::random_irreducible(4, seed, &cfg), "irreducible-4"),
            (corpus::random_product(seed, &cfg), "product"),
            (corpus::random_warped(seed, &cfg), "warped"),
            (corpus::random_irregular(seed, &cfg), "irregular"),
        ] {
            let instance = instance.unwrap_or_else(|e| panic!("{what} seed {seed}: {e}"));
            let tree = classify(&instance.web, &cfg)
                .unwrap_or_else(|e| panic!("{what} seed {seed}: {e}"));
            assert_eq!(
                tree.root.kind(),
                instance.family,
                "{what} seed {seed}: got {}",
                tree.root.kind()
            );
            assert_eq!(
                tree.root.block_partition(),
                instance.partition,
                "{what} seed {seed}: wrong partition"
            );
        }
    }
}

#[test]
fn transitivity_holds_on_valid_webs_and_fails_on_violating_one() {
    let cfg = cfg();
    // every generated valid web has a raw relation that is already transitive
    for seed in 0..10u64 {
        for instance in [
            corpus::random_irreducible(3, seed, &cfg).unwrap(),
            corpus::random_product(seed, &cfg).unwrap(),
            corpus::random_warped(seed, &cfg).unwrap(),
            corpus::random_irregular(seed, &cfg).unwrap(),
        ] {
            if instance.web.dim() < 3 {
                continue;
            }
            assert!(instance.web.residuals_remain(&cfg).unwrap().pass);
            let d = instance.web.dependency_pattern(&cfg.constancy()).unwrap();
            let (rel, _) = equivalence_classes(&d);
            assert!(!rel.closure_applied, "closure needed for a valid web");
        }
    }

    // chain web sigma_12 = x1, sigma_32 = x3: 1~2, 2~3, but not 1~3
    let c = coords(&["x1", "x2", "x3"]);
    let b = ChartBox::new(vec![(1.0, 2.0); 3]).unwrap();
    let mut sigma = vec![vec![Expr::zero(); 3]; 3];
    sigma[0][1] = Expr::var(&c[0]);
    sigma[2][1] = Expr::var(&c[2]);
    let w = SigmaWeb::new(
        c,
        b,
        vec![1.0; 3],
        vec![Expr::one(), Expr::one(), Expr::one()],
        sigma,
        &cfg,
    )
    .unwrap();
    let rep = w.residuals_remain(&cfg).unwrap();
    assert!(!rep.pass, "the chain web must violate the remain system");
    let d = w.dependency_pattern(&cfg.constancy()).unwrap();
    let (rel, classes) = equivalence_classes(&d);
    assert!(rel.closure_applied, "the chain web needs transitive closure");
    assert_eq!(classes, vec![vec![0, 1, 2]]);
    // and classify refuses it
    assert!(matches!(
        classify(&w, &cfg),
        Err(Error::ResidualViolation(_))
    ));
}

#[test]
fn connected_webs_have_connecting_coordinates_inside_strong_set() {
    let cfg = cfg();
    for seed in 0..10u64 {
        for instance in [
            corpus::random_irreducible(3, seed, &cfg).unwrap(),
            corpus::random_irreducible(4, seed, &cfg).unwrap(),
            corpus::random_warped(seed, &cfg).unwrap(),
            corpus::random_irregular(seed, &cfg).unwrap(),
        ] {
            let w = &instance.web;
            if w.dim() < 3 {
                continue;
            }
            assert!(w.residuals_remain(&cfg).unwrap().pass);
            let d = w.dependency_pattern(&cfg.constancy()).unwrap();
            let (_, classes) = equivalence_classes(&d);
            if classes.len() != 1 {
                continue; // the theorem concerns connected webs
            }
            let m = connecting_set(&d);
            let s = strong_set(&d);
            assert!(!m.is_empty(), "connected web without connecting coordinate");
            assert!(m.iter().all(|i| s.contains(i)), "M not inside S");
        }
    }
}

#[test]
fn label_permutation_permutes_the_tree() {
    let cfg = cfg();
    let cases: Vec<SigmaWeb> = vec![
        corpus::spherical_e3_web(&cfg).unwrap(),
        corpus::random_warped(7, &cfg).unwrap().web,
        corpus::random_product(3, &cfg).unwrap().web,
    ];
    for w in cases {
        let tree = classify(&w, &cfg).unwrap();
        let n = w.dim();
        // a fixed nontrivial permutation: rotate the coordinates
        let perm: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
        let permuted = w.restrict(&perm, &cfg).unwrap();
        let tree_p = classify(&permuted, &cfg).unwrap();
        assert_eq!(tree.root.kind(), tree_p.root.kind());
        assert_eq!(tree.root.block_partition(), tree_p.root.block_partition());
    }
}

#[test]
fn inconsistent_web_is_reported() {
    // weakly-connected coordinates with no connecting coordinate: satisfies
    // remain trivially at the sampled tolerance? It cannot (the theorems);
    // here we force the shape and expect InconsistentWeb or ResidualViolation.
    let c = coords(&["a", "b", "k"]);
    let b = ChartBox::new(vec![(1.0, 2.0); 3]).unwrap();
    let mut sigma = vec![vec![Expr::zero(); 3]; 3];
    // k depends into a and b, nothing else: a ~ b weakly through k, but
    // k itself lacks sigma_k{a,b}' for... k has both, so k IS connecting.
    // remove k's dependence on a instead: then no connecting coordinate.
    sigma[2][0] = Expr::var(&c[2]);
    sigma[2][1] = Expr::var(&c[2]);
    sigma[0][1] = Expr::var(&c[0]);
    let w = SigmaWeb::new(
        c,
        b,
        vec![1.0; 3],
        vec![Expr::one(), Expr::one(), Expr::one()],
        sigma,
        &cfg(),
    )
    .unwrap();
    // D: k->a, k->b, a->b. M = {k?}: needs D[k][a] and D[k][b]: true -> k in M.
    // That's consistent; tweak: drop sigma_ka so M is empty.
    let c2 = coords(&["a", "b", "k"]);
    let b2 = ChartBox::new(vec![(1.0, 2.0); 3]).unwrap();
    let mut sigma2 = vec![vec![Expr::zero(); 3]; 3];
    sigma2[2][1] = Expr::var(&c2[2]); // k -> b only
    sigma2[0][1] = Expr::var(&c2[0]); // a -> b
    sigma2[1][0] = Expr::var(&c2[1]); // b -> a
    let w2 = SigmaWeb::new(
        c2,
        b2,
        vec![1.0; 3],
        vec![Expr::one(), Expr::one(), Expr::one()],
        sigma2,
        &cfg(),
    )
    .unwrap();
    // Either the residual system flags these, or classification reports the
    // structural inconsistency; both are correct rejections.
    for web in [w, w2] {
        match classify(&web, &cfg()) {
            Err(Error::ResidualViolation(_)) | Err(Error::InconsistentWeb(_)) => {}
            Ok(tree) => {
                // if it classified, the web was actually consistent; make sure
                // the residual system agreed
                assert!(web.residuals_remain(&cfg()).unwrap().pass);
                let _ = tree;
            }
            Err(e) => panic!("unexpected error: {e}"),
        }
    }
}
