//! Built-in example files and seeded random instance generators.
//!
//! The .web texts here are the source of truth for the CLI `example`
//! command; the generators produce randomized canonical-family instances
//! for tests and benchmarks. Everything is deterministic given the seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::canonical::{
    irregular_metric, line_web, sckt_metric, BlockSpec, IrregularBase, IrregularBlockSpec,
    SCKTData, SimpleCoordSpec,
};
use crate::chart::{ChartBox, CheckConfig, CoordId};
use crate::error::Result;
use crate::expr::Expr;
use crate::metric::OrthogonalMetric;
use crate::web::SigmaWeb;

pub const EUCLIDEAN_PREFIX: &str = "euclidean-";

const SPHERICAL_E3: &str = "\
# flat E^3 in spherical coordinates, as a sigma web
dim 3
coords r theta phi
domain r 1 3
domain theta 0.3 1.2
domain phi 0.2 1
sign r +
sign theta +
sign phi +
mode sigma
phi r : r^(-4)
phi theta : sin(theta)^(-2)
phi phi : 1
sigma r theta : r^2
sigma r phi : r^2
sigma theta phi : sin(theta)^2
";

const ELLIPTIC_E2: &str = "\
# elliptic coordinates on the euclidean plane: an irreducible web
dim 2
coords u v
domain u 0.5 1.5
domain v 0.2 1
sign u +
sign v +
mode family
family irreducible
simple u : cosh(u)^2 ; 1
simple v : cos(v)^2 ; -1
";

const SPHERE_S2: &str = "\
# unit 2-sphere
dim 2
coords theta phi
domain theta 0.3 1.2
domain phi 0.2 1
sign theta +
sign phi +
mode raw
gii theta : 1
gii phi : sin(theta)^2
";

const WARPED_DEMO: &str = "\
# warped product with a 2-dimensional base and two 1-dimensional blocks
dim 4
coords x1 x2 x3 x4
domain x1 2 3
domain x2 0.5 1.5
domain x3 0.2 1
domain x4 0.2 1
sign x1 +
sign x2 +
sign x3 +
sign x4 +
mode family
family warped
simple x1 : x1 ; 1
simple x2 : x2 ; -1
block e = 5 coords x3
phi x3 : 1
endblock
block e = 7 coords x4
phi x4 : 1
endblock
";

const IRREGULAR_DEMO: &str = "\
# irregular m = 1 web whose block functions are not affinely dependent
dim 3
coords r y z
domain r 0.5 1.5
domain y 0.2 1
domain z 0.2 1
sign r +
sign y +
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

/// Names accepted by `builtin`, with `euclidean-N` for 2 <= N <= 6.
pub fn builtin_names() -> Vec<String> {
    let mut names = vec![
        "spherical-e3".to_string(),
        "elliptic-e2".to_string(),
        "sphere-s2".to_string(),
        "warped-demo".to_string(),
        "irregular-demo".to_string(),
    ];
    for n in 2..=6 {
        names.push(format!("euclidean-{n}"));
    }
    names.sort();
    names
}

/// The .web text of a built-in example, if the name is known.
pub fn builtin(name: &str) -> Option<String> {
    match name {
        "spherical-e3" => return Some(SPHERICAL_E3.to_string()),
        "elliptic-e2" => return Some(ELLIPTIC_E2.to_string()),
        "sphere-s2" => return Some(SPHERE_S2.to_string()),
        "warped-demo" => return Some(WARPED_DEMO.to_string()),
        "irregular-demo" => return Some(IRREGULAR_DEMO.to_string()),
        _ => {}
    }
    let n: usize = name.strip_prefix(EUCLIDEAN_PREFIX)?.parse().ok()?;
    if !(2..=6).contains(&n) {
        return None;
    }
    let mut text = String::from("# flat space in cartesian coordinates\n");
    text.push_str(&format!("dim {n}\ncoords"));
    for i in 1..=n {
        text.push_str(&format!(" x{i}"));
    }
    text.push('\n');
    for i in 1..=n {
        text.push_str(&format!("domain x{i} 0.5 2\n"));
    }
    for i in 1..=n {
        text.push_str(&format!("sign x{i} +\n"));
    }
    text.push_str("mode sigma\n");
    for i in 1..=n {
        text.push_str(&format!("phi x{i} : 1\n"));
    }
    Some(text)
}

/// The spherical web as a domain object.
pub fn spherical_e3_web(cfg: &CheckConfig) -> Result<SigmaWeb> {
    crate::dsl::parse_metric_file(SPHERICAL_E3)?.to_web(cfg)
}

// ---------------------------------------------------------------------------
// random generators

/// A smooth univariate function with values in c + amp * [0, span] on [1, 2],
/// always non-constant. Returned together with its value span.
fn random_univariate(rng: &mut ChaCha8Rng, var: &CoordId, c: f64, amp: f64) -> Expr {
    let x = Expr::var(var);
    let base = Expr::constant(c);
    match rng.gen_range(0..5u8) {
        0 => base + Expr::constant(amp) * x,
        1 => base + Expr::constant(amp * 0.3) * Expr::powi(x, 2),
        2 => base + Expr::constant(amp) * Expr::sin(x),
        3 => base + Expr::constant(amp) * Expr::cosh(x - Expr::constant(1.5)),
        _ => base + Expr::constant(amp * 0.4) * Expr::exp(Expr::constant(0.5) * x),
    }
}

/// A strictly positive smooth univariate function on [1, 2].
fn random_positive(rng: &mut ChaCha8Rng, var: &CoordId) -> Expr {
    let x = Expr::var(var);
    match rng.gen_range(0..4u8) {
        0 => Expr::one() + Expr::constant(rng.gen_range(0.1..0.4)) * Expr::sin(x),
        1 => Expr::constant(rng.gen_range(1.0..2.0)) + Expr::constant(0.5) * x,
        2 => Expr::exp(Expr::constant(rng.gen_range(0.1..0.4)) * x),
        _ => Expr::one() + Expr::constant(rng.gen_range(0.05..0.3)) * Expr::powi(x, 2),
    }
}

/// Simple-part data with sigma ranges separated in decreasing order and the
/// alternating Phi signs that keep every H_a^2 positive.
pub fn random_simple_part(rng: &mut ChaCha8Rng, names: &[&str]) -> Vec<SimpleCoordSpec> {
    let m = names.len();
    names
        .iter()
        .enumerate()
        .map(|(a, name)| {
            let var = CoordId::new(0, name.to_string());
            // values stay within [level, level + ~6] and levels are 10 apart
            let level = 10.0 * (m - a) as f64;
            let amp = rng.gen_range(0.5..1.4);
            let sigma = random_univariate(rng, &var, level, amp);
            let mut phi = random_positive(rng, &var);
            if a % 2 == 1 {
                phi = Expr::neg(phi);
            }
            SimpleCoordSpec::new(name.to_string(), (1.0, 2.0), sigma, phi, 1.0)
        })
        .collect()
}

/// A random 1- or 2-coordinate block web (a line or an irreducible pair).
pub fn random_block_web(
    rng: &mut ChaCha8Rng,
    names: &[&str],
    cfg: &CheckConfig,
) -> Result<SigmaWeb> {
    match names.len() {
        1 => {
            let var = CoordId::new(0, names[0].to_string());
            line_web(
                names[0],
                (1.0, 2.0),
                random_positive(rng, &var),
                1.0,
                cfg,
            )
        }
        2 => {
            let simple = random_simple_part(rng, names);
            crate::canonical::irreducible_metric(simple, cfg)
        }
        _ => {
            let simple = random_simple_part(rng, names);
            crate::canonical::irreducible_metric(simple, cfg)
        }
    }
}

/// The family a generated instance belongs to, with the block partition the
/// classifier is expected to recover (sorted name sets; the base counts as a
/// part of its own for warped and irregular instances).
#[derive(Debug, Clone)]
pub struct FamilyInstance {
    pub web: SigmaWeb,
    pub family: &'static str,
    pub partition: Vec<Vec<String>>,
}

fn sorted_partition(mut parts: Vec<Vec<String>>) -> Vec<Vec<String>> {
    for p in &mut parts {
        p.sort();
    }
    parts.sort();
    parts
}

/// Random irreducible web on n coordinates.
pub fn random_irreducible(n: usize, seed: u64, cfg: &CheckConfig) -> Result<FamilyInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    let simple = random_simple_part(&mut rng, &refs);
    let web = crate::canonical::irreducible_metric(simple, cfg)?;
    Ok(FamilyInstance {
        web,
        family: "irreducible",
        partition: sorted_partition(vec![names]),
    })
}

/// Random product of 2..=3 small blocks.
pub fn random_product(seed: u64, cfg: &CheckConfig) -> Result<FamilyInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_blocks = rng.gen_range(2..=3usize);
    let mut webs = Vec::with_capacity(n_blocks);
    let mut partition = Vec::with_capacity(n_blocks);
    let mut next = 1usize;
    for _ in 0..n_blocks {
        let size = rng.gen_range(1..=2usize);
        let names: Vec<String> = (0..size).map(|k| format!("x{}", next + k)).collect();
        next += size;
        let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        webs.push(random_block_web(&mut rng, &refs, cfg)?);
        partition.push(names);
    }
    let web = crate::canonical::product_metric(&webs, cfg)?;
    Ok(FamilyInstance {
        web,
        family: "product",
        partition: sorted_partition(partition),
    })
}

/// Random warped product: m in 2..=3 connecting coordinates and 1..=2
/// blocks with well-separated constants.
pub fn random_warped(seed: u64, cfg: &CheckConfig) -> Result<FamilyInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = rng.gen_range(2..=3usize);
    let simple_names: Vec<String> = (1..=m).map(|i| format!("x{i}")).collect();
    let refs: Vec<&str> = simple_names.iter().map(|s| s.as_str()).collect();
    let simple = random_simple_part(&mut rng, &refs);
    let n_blocks = rng.gen_range(1..=2usize);
    let mut blocks = Vec::with_capacity(n_blocks);
    let mut partition = vec![simple_names.clone()];
    let mut next = m + 1;
    for b in 0..n_blocks {
        let size = rng.gen_range(1..=2usize);
        let names: Vec<String> = (0..size).map(|k| format!("x{}", next + k)).collect();
        next += size;
        let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        // sigma values stay below 10m + 6, so these constants are safely out
        // of range and pairwise distinct
        let e = 10.0 * m as f64 + 20.0 + 15.0 * b as f64 + rng.gen_range(0.0..5.0);
        blocks.push(BlockSpec {
            e,
            web: random_block_web(&mut rng, &refs, cfg)?,
        });
        partition.push(names);
    }
    let web = crate::canonical::warped_product_metric(simple, blocks, cfg)?;
    Ok(FamilyInstance {
        web,
        family: "warped_product",
        partition: sorted_partition(partition),
    })
}

/// Random irregular web: one base coordinate and 1..=2 blocks with
/// independently chosen (generically non-affinely-dependent) functions.
pub fn random_irregular(seed: u64, cfg: &CheckConfig) -> Result<FamilyInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base_var = CoordId::new(0, "r".to_string());
    let base = IrregularBase {
        name: "r".into(),
        interval: (1.0, 2.0),
        phi: random_positive(&mut rng, &base_var),
        sign: 1.0,
    };
    let n_blocks = rng.gen_range(1..=2usize);
    let mut blocks = Vec::with_capacity(n_blocks);
    let mut partition = vec![vec!["r".to_string()]];
    let mut next = 1usize;
    for b in 0..n_blocks {
        // keep the total dimension >= 3: at n = 2 every web collapses to
        // the irreducible/product base case
        let size = if n_blocks == 1 && b == 0 {
            2
        } else {
            rng.gen_range(1..=2usize)
        };
        let names: Vec<String> = (0..size).map(|k| format!("y{}", next + k)).collect();
        next += size;
        let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        let amp = rng.gen_range(0.5..1.5);
        let sigma1 = random_univariate(&mut rng, &base_var, 1.0, amp);
        blocks.push(IrregularBlockSpec {
            sigma1,
            web: random_block_web(&mut rng, &refs, cfg)?,
        });
        partition.push(names);
    }
    let web = irregular_metric(base, blocks, cfg)?;
    Ok(FamilyInstance {
        web,
        family: "irregular_m1",
        partition: sorted_partition(partition),
    })
}

/// Random concircular data with n <= 5: m in 1..=3 simple coordinates and
/// 0..=2 blocks (at least one block when m = 1 so the web stays connected
/// beyond the base, and at least two parts overall so the tensor is
/// non-trivial).
pub fn random_sckt(seed: u64, cfg: &CheckConfig) -> Result<SCKTData> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = rng.gen_range(1..=3usize);
    let simple_names: Vec<String> = (1..=m).map(|i| format!("x{i}")).collect();
    let refs: Vec<&str> = simple_names.iter().map(|s| s.as_str()).collect();
    let simple = random_simple_part(&mut rng, &refs);
    let max_blocks = (5 - m).min(2);
    let min_blocks = if m == 1 { 1 } else { 0 };
    let n_blocks = rng.gen_range(min_blocks..=max_blocks.max(min_blocks));
    let mut blocks = Vec::with_capacity(n_blocks);
    let mut next = m + 1;
    for b in 0..n_blocks {
        let size = rng.gen_range(1..=(5 - m - (n_blocks - 1 - b)).min(2).max(1));
        let names: Vec<String> = (0..size).map(|k| format!("x{}", next + k)).collect();
        next += size;
        let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        let e = 10.0 * m as f64 + 20.0 + 15.0 * b as f64 + rng.gen_range(0.0..5.0);
        blocks.push(BlockSpec {
            e,
            web: random_block_web(&mut rng, &refs, cfg)?,
        });
    }
    let data = SCKTData { simple, blocks };
    let _ = sckt_metric(&data, cfg)?; // validate
    Ok(data)
}

/// A random orthogonal metric that is NOT generally separable: products of
/// univariate pieces plus small cross-coordinate couplings. Positive
/// components on [1, 2]^n.
pub fn random_orthogonal_metric(
    n: usize,
    seed: u64,
    cfg: &CheckConfig,
) -> Result<OrthogonalMetric> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    let coords: Vec<CoordId> = names
        .iter()
        .enumerate()
        .map(|(i, s)| CoordId::new(i, s.clone()))
        .collect();
    let box_ = ChartBox::new(vec![(1.0, 2.0); n])?;
    let mut gii = Vec::with_capacity(n);
    for i in 0..n {
        let mut g = Expr::constant(rng.gen_range(1.0..2.0))
            + Expr::constant(rng.gen_range(0.2..0.8)) * Expr::powi(Expr::var(&coords[i]), 2);
        for j in 0..n {
            if j != i && rng.gen_bool(0.6) {
                let c = rng.gen_range(-0.08..0.08);
                g = g + Expr::constant(c) * Expr::var(&coords[i]) * Expr::var(&coords[j]);
            }
        }
        if rng.gen_bool(0.5) {
            g = g * Expr::exp(
                Expr::constant(rng.gen_range(0.05..0.2)) * Expr::var(&coords[(i + 1) % n]),
            );
        }
        gii.push(g);
    }
    OrthogonalMetric::new(coords, box_, gii, cfg)
}

/// A random warped-product structure: 1- or 2-dimensional flat-chart base,
/// 1..=2 fibers of dimension 1..=2 with positive warping functions.
pub fn random_warped_structure(
    seed: u64,
    cfg: &CheckConfig,
) -> Result<crate::constcurv::WarpedProductStructure> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d0 = rng.gen_range(1..=2usize);
    let base_names: Vec<String> = (1..=d0).map(|i| format!("t{i}")).collect();
    let base_coords: Vec<CoordId> = base_names
        .iter()
        .enumerate()
        .map(|(i, s)| CoordId::new(i, s.clone()))
        .collect();
    let base_gii: Vec<Expr> = (0..d0)
        .map(|i| {
            if rng.gen_bool(0.5) {
                Expr::one()
            } else {
                Expr::one() + Expr::constant(rng.gen_range(0.1..0.5))
                    * Expr::powi(Expr::var(&base_coords[i]), 2)
            }
        })
        .collect();
    let base = OrthogonalMetric::new(
        base_coords.clone(),
        ChartBox::new(vec![(0.5, 2.0); d0])?,
        base_gii,
        cfg,
    )?;
    let n_fibers = rng.gen_range(1..=2usize);
    let mut fibers = Vec::with_capacity(n_fibers);
    for f in 0..n_fibers {
        let rho = match rng.gen_range(0..3u8) {
            0 => Expr::constant(rng.gen_range(1.5..3.0))
                + Expr::constant(rng.gen_range(0.2..0.6)) * Expr::var(&base_coords[0]),
            1 => Expr::constant(rng.gen_range(2.0..3.0))
                + Expr::sin(Expr::var(&base_coords[0])),
            _ => Expr::exp(Expr::constant(rng.gen_range(0.1..0.4)) * Expr::var(&base_coords[0])),
        };
        let fdim = rng.gen_range(1..=2usize);
        let fiber_names: Vec<String> = (0..fdim).map(|k| format!("y{}{}", f + 1, k + 1)).collect();
        let fiber_coords: Vec<CoordId> = fiber_names
            .iter()
            .enumerate()
            .map(|(i, s)| CoordId::new(i, s.clone()))
            .collect();
        let fiber_gii: Vec<Expr> = (0..fdim)
            .map(|i| {
                if i == 1 {
                    Expr::powi(Expr::sin(Expr::var(&fiber_coords[0])), 2)
                } else {
                    Expr::one()
                }
            })
            .collect();
        let metric = OrthogonalMetric::new(
            fiber_coords,
            ChartBox::new(vec![(0.3, 1.2); fdim])?,
            fiber_gii,
            cfg,
        )?;
        fibers.push(crate::constcurv::Fiber { rho, metric });
    }
    crate::constcurv::WarpedProductStructure::new(base, fibers, cfg)
}
