//! The sigma-decomposition of a separable web:
//!
//!   H_i^2 = Phi_i(x_i) * prod_{j != i} (sigma_ij(x_i) + sigma_ji(x_j))
//!
//! the scale-factor form forced by separability plus diagonal curvature.
//! A pair factor F_ij = sigma_ij + sigma_ji is one shared object appearing
//! in both H_i^2 and H_j^2.
//!
//! Canonical gauge: a pair whose factor is constant on the box is stored as
//! sigma_ij = sigma_ji = 0 with the constant folded into the Phi functions;
//! such a pair is simply absent from the product. In the residual system the
//! absent factor is replaced by 1, not 0 — the factor was divided out of the
//! equations, and a literal zero would annihilate terms that must survive.

use crate::chart::{sample_points, ChartBox, CheckConfig, CoordId, Point};
use crate::error::{Error, Result};
use crate::expr::{depends_on, Expr};
use crate::metric::OrthogonalMetric;

/// A separable web in sigma form.
#[derive(Debug, Clone)]
pub struct SigmaWeb {
    coords: Vec<CoordId>,
    box_: ChartBox,
    signs: Vec<f64>,
    phi: Vec<Expr>,
    sigma: Vec<Expr>, // flattened n*n, diagonal entries are the zero constant
}

/// D[i][j] = true iff sigma_ij actually depends on x_i (sampled constancy
/// test on the exact derivative). The diagonal is unused.
#[derive(Debug, Clone, PartialEq)]
pub struct DependencyPattern {
    n: usize,
    d: Vec<bool>,
}

impl DependencyPattern {
    pub fn from_matrix(n: usize, d: Vec<bool>) -> Self {
        assert_eq!(d.len(), n * n);
        DependencyPattern { n, d }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.d[i * self.n + j]
    }

    /// Restriction to a subset of coordinates, reindexed in `keep` order.
    pub fn restrict(&self, keep: &[usize]) -> DependencyPattern {
        let m = keep.len();
        let mut d = vec![false; m * m];
        for (a, &i) in keep.iter().enumerate() {
            for (b, &j) in keep.iter().enumerate() {
                d[a * m + b] = self.get(i, j);
            }
        }
        DependencyPattern { n: m, d }
    }
}

/// Max residuals of one unordered coordinate triple.
#[derive(Debug, Clone)]
pub struct TripleResiduals {
    pub indices: [usize; 3],
    /// remain equation centered at indices[0], [1], [2] respectively.
    pub remain: [ResidualStat; 3],
    pub det: ResidualStat,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ResidualStat {
    pub max_raw: f64,
    pub max_normalized: f64,
}

impl ResidualStat {
    fn record(&mut self, terms: &[f64]) {
        let sum: f64 = terms.iter().sum();
        let scale = terms.iter().fold(0.0_f64, |m, t| m.max(t.abs()));
        self.max_raw = self.max_raw.max(sum.abs());
        self.max_normalized = self.max_normalized.max(sum.abs() / (1.0 + scale));
    }
}

/// Residuals of the remain system and its determinant condition, the
/// equations that drive the classification.
#[derive(Debug, Clone)]
pub struct ResidualReport {
    pub triples: Vec<TripleResiduals>,
    pub samples_used: usize,
    pub tolerance: f64,
    pub max_raw: f64,
    pub max_normalized: f64,
    pub pass: bool,
}

impl SigmaWeb {
    /// Build a web from per-coordinate Phi and the ordered sigma matrix.
    /// `sigma[i][j]` must be univariate in x_i; entries left as the zero
    /// constant mark absorbed (absent) pair factors.
    pub fn new(
        coords: Vec<CoordId>,
        box_: ChartBox,
        signs: Vec<f64>,
        phi: Vec<Expr>,
        sigma: Vec<Vec<Expr>>,
        cfg: &CheckConfig,
    ) -> Result<Self> {
        let n = coords.len();
        if n == 0 || box_.dim() != n || signs.len() != n || phi.len() != n || sigma.len() != n {
            return Err(Error::InvalidInput(
                "sigma web needs matching coords/box/signs/phi/sigma sizes".into(),
            ));
        }
        for s in &signs {
            if s.abs() != 1.0 {
                return Err(Error::InvalidInput("signs must be +1 or -1".into()));
            }
        }
        for (i, p) in phi.iter().enumerate() {
            if p.is_zero_const() {
                return Err(Error::VanishingFactor(format!(
                    "Phi_{} is identically zero",
                    coords[i].name
                )));
            }
            if p.vars().iter().any(|&v| v != i) {
                return Err(Error::InvalidInput(format!(
                    "Phi_{} must depend on x_{} only",
                    coords[i].name, coords[i].name
                )));
            }
        }
        let mut flat = Vec::with_capacity(n * n);
        for (i, row) in sigma.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidInput("sigma matrix must be n x n".into()));
            }
            for (j, s) in row.iter().enumerate() {
                if i == j && !s.is_zero_const() {
                    return Err(Error::InvalidInput(
                        "diagonal sigma entries must be zero".into(),
                    ));
                }
                if s.vars().iter().any(|&v| v != i) {
                    return Err(Error::InvalidInput(format!(
                        "sigma_{}{} must depend on x_{} only",
                        coords[i].name, coords[j].name, coords[i].name
                    )));
                }
                flat.push(s.clone());
            }
        }
        let web = SigmaWeb {
            coords,
            box_,
            signs,
            phi,
            sigma: flat,
        };
        web.validate_on_box(cfg)?;
        Ok(web)
    }

    /// Nonvanishing of Phi and of every present pair factor, and positivity
    /// of H_i^2, across the sampled box.
    fn validate_on_box(&self, cfg: &CheckConfig) -> Result<()> {
        let n = self.dim();
        let mut problem: Option<Error> = None;
        sample_points(&self.box_, cfg, |p| {
            for i in 0..n {
                let phi_v = match self.phi[i].evaluate(p) {
                    Ok(v) => v,
                    Err(_) => return false,
                };
                if phi_v == 0.0 {
                    if problem.is_none() {
                        problem = Some(Error::VanishingFactor(format!(
                            "Phi_{} vanishes on the box",
                            self.coords[i].name
                        )));
                    }
                    return true;
                }
                for j in (i + 1)..n {
                    if !self.pair_present(i, j) {
                        continue;
                    }
                    match self.pair_factor(i, j).evaluate(p) {
                        Ok(v) if v != 0.0 => {}
                        Ok(_) => {
                            if problem.is_none() {
                                problem = Some(Error::VanishingFactor(format!(
                                    "pair factor F_{}{} vanishes on the box",
                                    self.coords[i].name, self.coords[j].name
                                )));
                            }
                            return true;
                        }
                        Err(_) => return false,
                    }
                }
                match self.hi2_expr(i).evaluate(p) {
                    Ok(v) if v > 0.0 => {}
                    Ok(_) => {
                        if problem.is_none() {
                            problem = Some(Error::InvalidInput(format!(
                                "H_{}^2 is not positive on the box; fix the Phi signs",
                                self.coords[i].name
                            )));
                        }
                        return true;
                    }
                    Err(_) => return false,
                }
            }
            true
        })?;
        match problem {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[CoordId] {
        &self.coords
    }

    pub fn chart_box(&self) -> &ChartBox {
        &self.box_
    }

    pub fn signs(&self) -> &[f64] {
        &self.signs
    }

    pub fn phi(&self, i: usize) -> &Expr {
        &self.phi[i]
    }

    pub fn sigma(&self, i: usize, j: usize) -> &Expr {
        &self.sigma[i * self.dim() + j]
    }

    /// A pair is present unless both sigmas are the literal zero constant
    /// (the canonical-gauge encoding of an absorbed constant factor).
    pub fn pair_present(&self, i: usize, j: usize) -> bool {
        !(self.sigma(i, j).is_zero_const() && self.sigma(j, i).is_zero_const())
    }

    /// F_ij = sigma_ij + sigma_ji (equal to F_ji by construction).
    pub fn pair_factor(&self, i: usize, j: usize) -> Expr {
        self.sigma(i, j).clone() + self.sigma(j, i).clone()
    }

    /// H_i^2 = Phi_i * prod over present pairs.
    pub fn hi2_expr(&self, i: usize) -> Expr {
        let mut h = self.phi[i].clone();
        for j in 0..self.dim() {
            if j != i && self.pair_present(i, j) {
                h = h * self.pair_factor(i, j);
            }
        }
        h
    }

    /// sigma_ij' (derivative in its own variable x_i).
    pub fn sigma_prime(&self, i: usize, j: usize) -> Expr {
        self.sigma(i, j).differentiate(&self.coords[i])
    }

    /// Assemble the metric g_ii = e_i H_i^2 on the web's box.
    pub fn to_metric(&self, cfg: &CheckConfig) -> Result<OrthogonalMetric> {
        let gii: Vec<Expr> = (0..self.dim())
            .map(|i| Expr::constant(self.signs[i]) * self.hi2_expr(i))
            .collect();
        OrthogonalMetric::new(self.coords.clone(), self.box_.clone(), gii, cfg)
    }

    /// The sigma' dependency matrix, decided by the sampled constancy test.
    /// Callers interested in structure pass the constancy tolerance
    /// (`cfg.constancy()`), which is what `classify` does.
    pub fn dependency_pattern(&self, cfg: &CheckConfig) -> Result<DependencyPattern> {
        let n = self.dim();
        let mut d = vec![false; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    d[i * n + j] = depends_on(self.sigma(i, j), &self.coords[i], &self.box_, cfg)?;
                }
            }
        }
        Ok(DependencyPattern { n, d })
    }

    /// Points of the box where every Phi, sigma and pair factor evaluates
    /// and the web invariants hold numerically.
    pub fn sample(&self, cfg: &CheckConfig) -> Result<Vec<Point>> {
        let n = self.dim();
        sample_points(&self.box_, cfg, |p| {
            for i in 0..n {
                match self.phi[i].evaluate(p) {
                    Ok(v) if v != 0.0 => {}
                    _ => return false,
                }
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    if self.sigma(i, j).evaluate(p).is_err() {
                        return false;
                    }
                    if j > i && self.pair_present(i, j) {
                        match self.pair_factor(i, j).evaluate(p) {
                            Ok(v) if v != 0.0 => {}
                            _ => return false,
                        }
                    }
                }
            }
            true
        })
    }

    /// Residuals of the remain system over every unordered triple: the three
    /// centered equations
    ///
    ///   s_ji s_ki F_jk - s_ji s_kj F_ki - s_ki s_jk F_ij = 0  (center i)
    ///
    /// and the determinant condition s_ij s_jk s_ki + s_ji s_kj s_ik = 0,
    /// where s_ab = sigma_ab' and absent pair factors enter as 1.
    pub fn residuals_remain(&self, cfg: &CheckConfig) -> Result<ResidualReport> {
        let n = self.dim();
        if n < 3 {
            return Err(Error::InvalidInput("residuals_remain needs n >= 3".into()));
        }
        let prime = |i: usize, j: usize| self.sigma_prime(i, j);
        let factor = |i: usize, j: usize| {
            if self.pair_present(i, j) {
                self.pair_factor(i, j)
            } else {
                Expr::one()
            }
        };
        // terms of the remain equation centered at i over {j, k}
        let centered = |i: usize, j: usize, k: usize| {
            [
                prime(j, i) * prime(k, i) * factor(j, k),
                Expr::neg(prime(j, i) * prime(k, j) * factor(k, i)),
                Expr::neg(prime(k, i) * prime(j, k) * factor(i, j)),
            ]
        };
        struct TripleExprs {
            indices: [usize; 3],
            remain: [[Expr; 3]; 3],
            det: [Expr; 2],
        }
        let mut exprs = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                for k in (j + 1)..n {
                    exprs.push(TripleExprs {
                        indices: [i, j, k],
                        remain: [centered(i, j, k), centered(j, k, i), centered(k, i, j)],
                        det: [
                            prime(i, j) * prime(j, k) * prime(k, i),
                            prime(j, i) * prime(k, j) * prime(i, k),
                        ],
                    });
                }
            }
        }
        let points = self.sample(cfg)?;
        let mut stats: Vec<([ResidualStat; 3], ResidualStat)> =
            vec![Default::default(); exprs.len()];
        let used = crate::separability::over_samples(&points, |p| {
            for (t, te) in exprs.iter().enumerate() {
                for c in 0..3 {
                    let terms = [
                        te.remain[c][0].evaluate(p)?,
                        te.remain[c][1].evaluate(p)?,
                        te.remain[c][2].evaluate(p)?,
                    ];
                    stats[t].0[c].record(&terms);
                }
                let det_terms = [te.det[0].evaluate(p)?, te.det[1].evaluate(p)?];
                stats[t].1.record(&det_terms);
            }
            Ok(())
        })?;
        let triples: Vec<TripleResiduals> = exprs
            .iter()
            .zip(stats)
            .map(|(te, (remain, det))| TripleResiduals {
                indices: te.indices,
                remain,
                det,
            })
            .collect();
        let mut max_raw = 0.0_f64;
        let mut max_normalized = 0.0_f64;
        for t in &triples {
            for r in t.remain.iter().chain(std::iter::once(&t.det)) {
                max_raw = max_raw.max(r.max_raw);
                max_normalized = max_normalized.max(r.max_normalized);
            }
        }
        Ok(ResidualReport {
            triples,
            samples_used: used,
            tolerance: cfg.tol,
            max_raw,
            max_normalized,
            pass: max_normalized <= cfg.tol,
        })
    }

    /// True iff the web reproduces `m` componentwise up to positive constant
    /// factors (any gauge) at the sampled points.
    pub fn validate_form(&self, m: &OrthogonalMetric, cfg: &CheckConfig) -> Result<bool> {
        let n = self.dim();
        if m.dim() != n || m.chart_box() != &self.box_ {
            return Err(Error::InvalidInput(
                "validate_form needs the same dimension and box".into(),
            ));
        }
        let points = sample_points(&self.box_, cfg, |p| {
            self.sample_valid_at(p) && m.valid_at(p)
        })?;
        for i in 0..n {
            let gw = Expr::constant(self.signs[i]) * self.hi2_expr(i);
            let mut first: Option<f64> = None;
            for p in &points {
                let num = m.component(i).evaluate(p)?;
                let den = gw.evaluate(p)?;
                if den == 0.0 {
                    return Err(Error::SingularEvaluation(format!(
                        "web component {i} vanishes at a sample point"
                    )));
                }
                let ratio = num / den;
                match first {
                    None => {
                        if ratio <= 0.0 {
                            return Ok(false);
                        }
                        first = Some(ratio);
                    }
                    Some(r0) => {
                        if (ratio - r0).abs() > cfg.tol * (1.0 + r0.abs()) {
                            return Ok(false);
                        }
                    }
                }
            }
        }
        Ok(true)
    }

    fn sample_valid_at(&self, p: &Point) -> bool {
        let n = self.dim();
        for i in 0..n {
            match self.phi[i].evaluate(p) {
                Ok(v) if v != 0.0 => {}
                _ => return false,
            }
            for j in (i + 1)..n {
                if self.pair_present(i, j) {
                    match self.pair_factor(i, j).evaluate(p) {
                        Ok(v) if v != 0.0 => {}
                        _ => return false,
                    }
                }
            }
        }
        true
    }

    /// Pull back to the coordinates in `keep` (in the given order): the
    /// dropped coordinates are frozen at the box center and their pair
    /// factors folded into the Phi functions.
    pub fn restrict(&self, keep: &[usize], cfg: &CheckConfig) -> Result<SigmaWeb> {
        let n = self.dim();
        if keep.is_empty() || keep.iter().any(|&i| i >= n) {
            return Err(Error::InvalidInput("restrict needs valid coordinates".into()));
        }
        let center = self.box_.center();
        let mut map: Vec<Option<CoordId>> = vec![None; n];
        let mut new_coords = Vec::with_capacity(keep.len());
        for (new_idx, &old) in keep.iter().enumerate() {
            let id = CoordId::new(new_idx, self.coords[old].name.clone());
            map[old] = Some(id.clone());
            new_coords.push(id);
        }
        let mut phi = Vec::with_capacity(keep.len());
        let mut sigma = vec![vec![Expr::zero(); keep.len()]; keep.len()];
        for (a, &i) in keep.iter().enumerate() {
            let mut p = self.phi[i].clone();
            for j in 0..n {
                if j == i || map[j].is_some() || !self.pair_present(i, j) {
                    continue;
                }
                let frozen = self.sigma(j, i).evaluate(&center)?;
                p = p * (self.sigma(i, j).clone() + Expr::constant(frozen));
            }
            phi.push(p.reindex(&map)?);
            for (b, &j) in keep.iter().enumerate() {
                if a != b {
                    sigma[a][b] = self.sigma(i, j).reindex(&map)?;
                }
            }
        }
        let signs = keep.iter().map(|&i| self.signs[i]).collect();
        SigmaWeb::new(
            new_coords,
            self.box_.restrict(keep),
            signs,
            phi,
            sigma,
            cfg,
        )
    }
}
