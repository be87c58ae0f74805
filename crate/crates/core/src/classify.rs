//! The coordinate-connectivity relation and the recursive classification of
//! a separable web into the four canonical families: irreducible, product,
//! warped product, and the irregular single-connecting-coordinate form.

use crate::chart::{ChartBox, CheckConfig, CoordId};
use crate::error::{Error, Result};
use crate::expr::{is_identically_zero, Expr};
use crate::web::{DependencyPattern, ResidualReport, SigmaWeb};

/// Two distinct coordinates are connected when sigma_ij' != 0, or
/// sigma_ji' != 0, or some third coordinate k has sigma_ki' != 0 and
/// sigma_kj' != 0; every coordinate is connected to itself.
pub fn connected(d: &DependencyPattern, i: usize, j: usize) -> bool {
    if i == j {
        return true;
    }
    if d.get(i, j) || d.get(j, i) {
        return true;
    }
    (0..d.dim()).any(|k| k != i && k != j && d.get(k, i) && d.get(k, j))
}

/// The connectivity relation after transitive closure. For webs satisfying
/// the residual system the raw relation is already transitive and
/// `closure_applied` stays false.
#[derive(Debug, Clone)]
pub struct ConnectionRelation {
    n: usize,
    closed: Vec<bool>,
    pub closure_applied: bool,
}

impl ConnectionRelation {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.closed[i * self.n + j]
    }
}

/// Build the relation from `connected`, close it transitively, and read off
/// the partition into equivalence classes (sorted by least member).
pub fn equivalence_classes(d: &DependencyPattern) -> (ConnectionRelation, Vec<Vec<usize>>) {
    let n = d.dim();
    let mut c = vec![false; n * n];
    for i in 0..n {
        for j in 0..n {
            c[i * n + j] = connected(d, i, j);
        }
    }
    let mut closed = c.clone();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if closed[i * n + k] && closed[k * n + j] {
                    closed[i * n + j] = true;
                }
            }
        }
    }
    let closure_applied = closed != c;
    let mut seen = vec![false; n];
    let mut classes = Vec::new();
    for i in 0..n {
        if seen[i] {
            continue;
        }
        let mut class = Vec::new();
        for j in 0..n {
            if closed[i * n + j] {
                seen[j] = true;
                class.push(j);
            }
        }
        classes.push(class);
    }
    (
        ConnectionRelation {
            n,
            closed,
            closure_applied,
        },
        classes,
    )
}

/// M: coordinates i with sigma_ij' != 0 for every j != i.
pub fn connecting_set(d: &DependencyPattern) -> Vec<usize> {
    let n = d.dim();
    (0..n)
        .filter(|&i| (0..n).all(|j| j == i || d.get(i, j)))
        .collect()
}

/// S: coordinates strongly connected to every other coordinate. Contains M.
pub fn strong_set(d: &DependencyPattern) -> Vec<usize> {
    let n = d.dim();
    (0..n)
        .filter(|&i| (0..n).all(|j| j == i || d.get(i, j) || d.get(j, i)))
        .collect()
}

/// One node of the classification tree. Child coordinate sets partition the
/// parent's coordinates.
#[derive(Debug, Clone)]
pub enum ClassificationNode {
    Irreducible {
        coords: Vec<CoordId>,
    },
    Product {
        children: Vec<ClassificationNode>,
    },
    WarpedProduct {
        base: Vec<CoordId>,
        blocks: Vec<WarpedBlock>,
    },
    IrregularM1 {
        base: CoordId,
        blocks: Vec<IrregularBlock>,
        concircular_compatible: bool,
    },
    Leaf {
        coords: Vec<CoordId>,
    },
}

#[derive(Debug, Clone)]
pub struct WarpedBlock {
    pub e: f64,
    pub child: ClassificationNode,
}

#[derive(Debug, Clone)]
pub struct IrregularBlock {
    /// The block function sigma_1^I, written over the base coordinate alone.
    pub sigma1: Expr,
    pub child: ClassificationNode,
}

impl ClassificationNode {
    pub fn kind(&self) -> &'static str {
        match self {
            ClassificationNode::Irreducible { .. } => "irreducible",
            ClassificationNode::Product { .. } => "product",
            ClassificationNode::WarpedProduct { .. } => "warped_product",
            ClassificationNode::IrregularM1 { .. } => "irregular_m1",
            ClassificationNode::Leaf { .. } => "leaf",
        }
    }

    /// All coordinate names under this node, sorted.
    pub fn coord_names(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_names(&mut out);
        out.sort();
        out
    }

    fn collect_names(&self, out: &mut Vec<String>) {
        match self {
            ClassificationNode::Irreducible { coords } | ClassificationNode::Leaf { coords } => {
                out.extend(coords.iter().map(|c| c.name.clone()));
            }
            ClassificationNode::Product { children } => {
                for ch in children {
                    ch.collect_names(out);
                }
            }
            ClassificationNode::WarpedProduct { base, blocks } => {
                out.extend(base.iter().map(|c| c.name.clone()));
                for b in blocks {
                    b.child.collect_names(out);
                }
            }
            ClassificationNode::IrregularM1 { base, blocks, .. } => {
                out.push(base.name.clone());
                for b in blocks {
                    b.child.collect_names(out);
                }
            }
        }
    }

    /// Partition by eigenspace structure: simple (irreducible and base)
    /// coordinates are singleton eigenspaces, constant-eigenvalue blocks
    /// stay whole. Comparable with a concircular tensor's eigenspaces.
    pub fn eigenstructure_partition(&self) -> Vec<Vec<String>> {
        let mut parts: Vec<Vec<String>> = match self {
            ClassificationNode::Irreducible { coords } => {
                coords.iter().map(|c| vec![c.name.clone()]).collect()
            }
            ClassificationNode::Leaf { coords } => {
                vec![coords.iter().map(|c| c.name.clone()).collect()]
            }
            ClassificationNode::Product { children } => children
                .iter()
                .flat_map(|c| c.eigenstructure_partition())
                .collect(),
            ClassificationNode::WarpedProduct { base, blocks } => {
                let mut v: Vec<Vec<String>> =
                    base.iter().map(|c| vec![c.name.clone()]).collect();
                v.extend(blocks.iter().map(|b| b.child.coord_names()));
                v
            }
            ClassificationNode::IrregularM1 { base, blocks, .. } => {
                let mut v = vec![vec![base.name.clone()]];
                v.extend(blocks.iter().map(|b| b.child.coord_names()));
                v
            }
        };
        for p in &mut parts {
            p.sort();
        }
        parts.sort();
        parts
    }

    /// Top-level block partition as sorted name sets (the base counts as a
    /// block of its own for warped and irregular nodes).
    pub fn block_partition(&self) -> Vec<Vec<String>> {
        let mut parts: Vec<Vec<String>> = match self {
            ClassificationNode::Irreducible { coords } | ClassificationNode::Leaf { coords } => {
                return vec![coords.iter().map(|c| c.name.clone()).collect()]
            }
            ClassificationNode::Product { children } => {
                children.iter().map(|c| c.coord_names()).collect()
            }
            ClassificationNode::WarpedProduct { base, blocks } => {
                let mut v = vec![base.iter().map(|c| c.name.clone()).collect::<Vec<_>>()];
                v.extend(blocks.iter().map(|b| b.child.coord_names()));
                v
            }
            ClassificationNode::IrregularM1 { base, blocks, .. } => {
                let mut v = vec![vec![base.name.clone()]];
                v.extend(blocks.iter().map(|b| b.child.coord_names()));
                v
            }
        };
        for p in &mut parts {
            p.sort();
        }
        parts.sort();
        parts
    }
}

/// Residual diagnostics recorded at one recursion level.
#[derive(Debug, Clone)]
pub struct NodeDiagnostic {
    pub path: String,
    pub residuals: Option<ResidualReport>,
}

/// The classification result: a recursive family tree plus the residual
/// reports gathered on the way down.
#[derive(Debug, Clone)]
pub struct ClassificationTree {
    pub root: ClassificationNode,
    pub diagnostics: Vec<NodeDiagnostic>,
}

/// True iff all block functions are pairwise affinely dependent: the ratio
/// of derivatives (sigma_1^I)'/(sigma_1^J)' is constant on the base box.
/// The criterion that distinguishes irregular metrics carrying a concircular
/// tensor (the e - sigma form) from genuinely irregular ones.
pub fn detect_concircular_form(
    sigma1s: &[Expr],
    base_box: &ChartBox,
    cfg: &CheckConfig,
) -> Result<bool> {
    if base_box.dim() != 1 {
        return Err(Error::InvalidInput(
            "detect_concircular_form expects a 1-dimensional base box".into(),
        ));
    }
    if sigma1s.is_empty() {
        return Err(Error::InvalidInput(
            "detect_concircular_form needs at least one block".into(),
        ));
    }
    let base = CoordId::new(0, "x");
    for (a, sa) in sigma1s.iter().enumerate() {
        for sb in sigma1s.iter().skip(a + 1) {
            let ratio = sa.differentiate(&base) / sb.differentiate(&base);
            let deriv = ratio.differentiate(&base);
            if !is_identically_zero(&deriv, base_box, &cfg.constancy())? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Classify a web into the canonical families. The web must satisfy the
/// residual system (checked at every recursion level with n >= 3).
pub fn classify(w: &SigmaWeb, cfg: &CheckConfig) -> Result<ClassificationTree> {
    let mut diagnostics = Vec::new();
    let root = classify_level(w, cfg, "root", &mut diagnostics)?;
    Ok(ClassificationTree { root, diagnostics })
}

fn classify_level(
    w: &SigmaWeb,
    cfg: &CheckConfig,
    path: &str,
    diagnostics: &mut Vec<NodeDiagnostic>,
) -> Result<ClassificationNode> {
    let n = w.dim();
    if n == 1 {
        return Ok(ClassificationNode::Leaf {
            coords: w.coords().to_vec(),
        });
    }
    if n == 2 {
        let d = w.dependency_pattern(&cfg.constancy())?;
        diagnostics.push(NodeDiagnostic {
            path: path.to_string(),
            residuals: None,
        });
        if d.get(0, 1) || d.get(1, 0) {
            return Ok(ClassificationNode::Irreducible {
                coords: w.coords().to_vec(),
            });
        }
        return Ok(ClassificationNode::Product {
            children: w
                .coords()
                .iter()
                .map(|c| ClassificationNode::Leaf {
                    coords: vec![c.clone()],
                })
                .collect(),
        });
    }

    let report = w.residuals_remain(cfg)?;
    let pass = report.pass;
    let max = report.max_normalized;
    diagnostics.push(NodeDiagnostic {
        path: path.to_string(),
        residuals: Some(report),
    });
    if !pass {
        return Err(Error::ResidualViolation(format!(
            "remain equations violated at {path}: max normalized residual {max:e} > {:e}",
            cfg.tol
        )));
    }

    let d = w.dependency_pattern(&cfg.constancy())?;
    let (_, classes) = equivalence_classes(&d);

    if classes.len() > 1 {
        let mut children = Vec::with_capacity(classes.len());
        for (idx, class) in classes.iter().enumerate() {
            children.push(recurse_block(w, class, cfg, path, idx, diagnostics)?);
        }
        return Ok(ClassificationNode::Product { children });
    }

    let m = connecting_set(&d);
    if m.is_empty() {
        return Err(Error::InconsistentWeb(format!(
            "coordinates at {path} are connected but no connecting coordinate exists; \
             a genuine solution of the residual system cannot do this"
        )));
    }
    if m.len() == n {
        return Ok(ClassificationNode::Irreducible {
            coords: w.coords().to_vec(),
        });
    }

    let complement: Vec<usize> = (0..n).filter(|i| !m.contains(i)).collect();
    if m.len() >= 2 {
        // Warped product: partition the complement by the constant e read
        // off sigma_{alpha a}.
        let mut evals = Vec::with_capacity(complement.len());
        for &alpha in &complement {
            evals.push((alpha, read_block_constant(w, alpha, &m, cfg)?));
        }
        evals.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
        let mut groups: Vec<(f64, Vec<usize>)> = Vec::new();
        for (alpha, e) in evals {
            match groups.last_mut() {
                Some((e0, members)) if (e - *e0).abs() <= cfg.tol * (1.0 + e0.abs()) => {
                    members.push(alpha);
                }
                _ => groups.push((e, vec![alpha])),
            }
        }
        let mut blocks = Vec::with_capacity(groups.len());
        for (idx, (e, mut members)) in groups.into_iter().enumerate() {
            members.sort();
            let child = recurse_block(w, &members, cfg, path, idx, diagnostics)?;
            blocks.push(WarpedBlock { e, child });
        }
        return Ok(ClassificationNode::WarpedProduct {
            base: m.iter().map(|&a| w.coords()[a].clone()).collect(),
            blocks,
        });
    }

    // |M| = 1: the irregular family. Blocks are the connected components of
    // the dependency pattern restricted to the complement.
    let base = m[0];
    let sub = d.restrict(&complement);
    let (_, sub_classes) = equivalence_classes(&sub);
    let base_id = CoordId::new(0, w.coords()[base].name.clone());
    let base_box = w.chart_box().restrict(&[base]);
    let mut blocks = Vec::new();
    let mut sigma1s = Vec::new();
    for (idx, class) in sub_classes.iter().enumerate() {
        let members: Vec<usize> = class.iter().map(|&c| complement[c]).collect();
        let rep = members[0];
        let sigma1 = block_function(w, base, rep, &base_id)?;
        let child = recurse_block(w, &members, cfg, path, idx, diagnostics)?;
        sigma1s.push(sigma1.clone());
        blocks.push(IrregularBlock { sigma1, child });
    }
    let concircular_compatible = detect_concircular_form(&sigma1s, &base_box, cfg)?;
    Ok(ClassificationNode::IrregularM1 {
        base: w.coords()[base].clone(),
        blocks,
        concircular_compatible,
    })
}

/// The constant e_alpha = sigma_{alpha a}, which must agree over all a in M.
fn read_block_constant(
    w: &SigmaWeb,
    alpha: usize,
    m: &[usize],
    cfg: &CheckConfig,
) -> Result<f64> {
    let center = w.chart_box().center();
    let mut values = Vec::with_capacity(m.len());
    for &a in m {
        let s = w.sigma(alpha, a);
        if crate::expr::depends_on(s, &w.coords()[alpha], w.chart_box(), &cfg.constancy())? {
            return Err(Error::ResidualViolation(format!(
                "sigma_{}{} must be constant for a warped-product web",
                w.coords()[alpha].name, w.coords()[a].name
            )));
        }
        values.push(s.evaluate(&center)?);
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    for v in &values {
        if (v - mean).abs() > cfg.tol * (1.0 + mean.abs()) {
            return Err(Error::ResidualViolation(format!(
                "block constants for {} disagree across the connecting coordinates",
                w.coords()[alpha].name
            )));
        }
    }
    Ok(mean)
}

/// sigma_1^I: the pair factor between the base and a block representative,
/// as a function of the base coordinate alone.
fn block_function(
    w: &SigmaWeb,
    base: usize,
    rep: usize,
    base_id: &CoordId,
) -> Result<Expr> {
    let center = w.chart_box().center();
    let shift = w.sigma(rep, base).evaluate(&center)?;
    let f = w.sigma(base, rep).clone() + Expr::constant(shift);
    let mut map: Vec<Option<CoordId>> = vec![None; w.dim()];
    map[base] = Some(base_id.clone());
    f.reindex(&map)
}

fn recurse_block(
    w: &SigmaWeb,
    members: &[usize],
    cfg: &CheckConfig,
    path: &str,
    idx: usize,
    diagnostics: &mut Vec<NodeDiagnostic>,
) -> Result<ClassificationNode> {
    if members.len() == 1 {
        return Ok(ClassificationNode::Leaf {
            coords: vec![w.coords()[members[0]].clone()],
        });
    }
    let sub = w.restrict(members, cfg)?;
    let sub_path = format!("{path}.{idx}");
    classify_level(&sub, cfg, &sub_path, diagnostics)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pattern(n: usize, entries: &[(usize, usize)]) -> DependencyPattern {
        let mut d = vec![false; n * n];
        for &(i, j) in entries {
            d[i * n + j] = true;
        }
        DependencyPattern::from_matrix(n, d)
    }

    #[test]
    fn connectivity_definition() {
        let none = pattern(3, &[]);
        assert!(!connected(&none, 0, 1));
        assert!(connected(&none, 1, 1));
        // weak connection through k
        let weak = pattern(3, &[(2, 0), (2, 1)]);
        assert!(connected(&weak, 0, 1));
        assert!(!weak.get(0, 1) && !weak.get(1, 0));
        // strong connection
        let strong = pattern(3, &[(0, 1)]);
        assert!(connected(&strong, 0, 1));
    }

    #[test]
    fn classes_for_disconnected_patterns() {
        let none = pattern(3, &[]);
        let (rel, classes) = equivalence_classes(&none);
        assert!(!rel.closure_applied);
        assert_eq!(classes, vec![vec![0], vec![1], vec![2]]);

        let blockdiag = pattern(4, &[(0, 1), (1, 0), (2, 3), (3, 2)]);
        let (_, classes) = equivalence_classes(&blockdiag);
        assert_eq!(classes, vec![vec![0, 1], vec![2, 3]]);
    }

    #[test]
    fn spherical_pattern_is_one_class_with_base_r() {
        // r depends into theta and phi, theta into phi
        let d = pattern(3, &[(0, 1), (0, 2), (1, 2)]);
        let (rel, classes) = equivalence_classes(&d);
        assert!(!rel.closure_applied);
        assert_eq!(classes, vec![vec![0, 1, 2]]);
        assert_eq!(connecting_set(&d), vec![0]);
        // strong connection is symmetric (either direction suffices), so
        // theta and phi are strongly connected to everything through r
        assert_eq!(strong_set(&d), vec![0, 1, 2]);
    }

    #[test]
    fn irreducible_pattern_has_full_connecting_set() {
        let mut entries = Vec::new();
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    entries.push((i, j));
                }
            }
        }
        let d = pattern(3, &entries);
        assert_eq!(connecting_set(&d), vec![0, 1, 2]);
        assert_eq!(strong_set(&d), vec![0, 1, 2]);
        let all_false = pattern(3, &[]);
        assert!(connecting_set(&all_false).is_empty());
        assert!(strong_set(&all_false).is_empty());
    }

    #[test]
    fn chain_pattern_needs_closure() {
        // 1~2 strong, 2~3 strong, but 1 and 3 unrelated: not transitive,
        // which only happens for webs violating the residual system.
        let d = pattern(3, &[(0, 1), (2, 1)]);
        assert!(connected(&d, 0, 1));
        assert!(connected(&d, 1, 2));
        assert!(!connected(&d, 0, 2));
        let (rel, classes) = equivalence_classes(&d);
        assert!(rel.closure_applied);
        assert_eq!(classes, vec![vec![0, 1, 2]]);
    }

    #[test]
    fn connecting_set_is_inside_strong_set() {
        // exhaustive over all 3x3 off-diagonal patterns
        for mask in 0u32..64 {
            let entries: Vec<(usize, usize)> = [(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)]
                .iter()
                .enumerate()
                .filter(|(b, _)| mask & (1 << b) != 0)
                .map(|(_, &e)| e)
                .collect();
            let d = pattern(3, &entries);
            let m = connecting_set(&d);
            let s = strong_set(&d);
            assert!(m.iter().all(|i| s.contains(i)), "M not in S for {mask}");
        }
    }
}
