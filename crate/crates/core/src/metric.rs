//! Orthogonal (diagonal) pseudo-Riemannian metrics: Christoffel symbols,
//! the Riemann tensor by general assembly, Eisenhart's closed form for
//! R_jiik, sectional curvature, and constant-curvature estimation.
//!
//! Conventions. The curvature operator is R(X,Y)Z = [nabla_X, nabla_Y]Z -
//! nabla_[X,Y] Z, with coordinate components
//!
//!   R^a_bcd = d_c Gamma^a_db - d_d Gamma^a_cb
//!           + Gamma^a_cf Gamma^f_db - Gamma^a_df Gamma^f_cb,
//!
//! and the fully covariant component R_abcd = g_ae R^e_bcd, i.e. R_abcd =
//! <R(d_c, d_d) d_b, d_a>. In this ordering R_jiik reproduces Eisenhart's
//! closed form for orthogonal metrics, and the sectional curvature of the
//! plane (d_i, d_j) is R_ijij / (g_ii g_jj - g_ij^2).
//!
//! All curvature derivatives are exact: Christoffel entries are built as
//! expressions and differentiated symbolically. Finite differences appear
//! only in test oracles.

use std::sync::OnceLock;

use crate::chart::{sample_points, ChartBox, CheckConfig, CoordId, Point};
use crate::error::{Error, Result};
use crate::expr::Expr;

/// Diagonal metric g = diag(e_1 H_1^2, ..., e_n H_n^2) on a chart box.
/// The signs e_i are read off at the box center and checked to be constant
/// on the sampled box at construction.
#[derive(Debug, Clone)]
pub struct OrthogonalMetric {
    coords: Vec<CoordId>,
    box_: ChartBox,
    gii: Vec<Expr>,
    signs: Vec<f64>,
    hi2: Vec<Expr>,
    dlog: Vec<Expr>,
    d2log: OnceLock<Vec<Expr>>,
    gamma: OnceLock<Vec<Expr>>,
    dgamma: OnceLock<Vec<Expr>>,
}

/// Christoffel symbols of the second kind at one point; symmetric in the
/// lower pair, and zero for three distinct indices on orthogonal metrics.
#[derive(Debug, Clone)]
pub struct ChristoffelTable {
    n: usize,
    values: Vec<f64>,
}

impl ChristoffelTable {
    /// Gamma^i_{jk}.
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[(i * self.n + j) * self.n + k]
    }

    pub fn dim(&self) -> usize {
        self.n
    }
}

impl OrthogonalMetric {
    pub fn new(
        coords: Vec<CoordId>,
        box_: ChartBox,
        gii: Vec<Expr>,
        cfg: &CheckConfig,
    ) -> Result<Self> {
        let n = coords.len();
        if n == 0 || gii.len() != n || box_.dim() != n {
            return Err(Error::InvalidInput(format!(
                "metric needs matching coords/box/components, got {}/{}/{}",
                n,
                box_.dim(),
                gii.len()
            )));
        }
        let center = box_.center();
        let mut signs = Vec::with_capacity(n);
        for (i, g) in gii.iter().enumerate() {
            let v = g.evaluate(&center)?;
            if v == 0.0 {
                return Err(Error::VanishingFactor(format!(
                    "g_{0}{0} vanishes at the box center",
                    coords[i].name
                )));
            }
            signs.push(v.signum());
        }
        // Signature must be constant across the sampled box.
        let mut bad: Option<String> = None;
        sample_points(&box_, cfg, |p| {
            for (i, g) in gii.iter().enumerate() {
                match g.evaluate(p) {
                    Ok(v) if v != 0.0 => {
                        if v.signum() != signs[i] && bad.is_none() {
                            bad = Some(format!(
                                "g_{0}{0} changes sign on the box",
                                coords[i].name
                            ));
                        }
                    }
                    _ => return false,
                }
            }
            true
        })?;
        if let Some(msg) = bad {
            return Err(Error::InvalidInput(msg));
        }
        let hi2: Vec<Expr> = gii
            .iter()
            .zip(&signs)
            .map(|(g, &e)| Expr::constant(e) * g.clone())
            .collect();
        let mut dlog = Vec::with_capacity(n * n);
        for h in &hi2 {
            let lh = Expr::log(h.clone());
            for c in &coords {
                dlog.push(lh.differentiate(c));
            }
        }
        Ok(OrthogonalMetric {
            coords,
            box_,
            gii,
            signs,
            hi2,
            dlog,
            d2log: OnceLock::new(),
            gamma: OnceLock::new(),
            dgamma: OnceLock::new(),
        })
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

    pub fn component(&self, i: usize) -> &Expr {
        &self.gii[i]
    }

    pub fn sign(&self, i: usize) -> f64 {
        self.signs[i]
    }

    /// H_i^2 = e_i g_ii, positive on the box.
    pub fn hi2(&self, i: usize) -> &Expr {
        &self.hi2[i]
    }

    /// d_j log H_i^2.
    pub fn dlog(&self, i: usize, j: usize) -> &Expr {
        &self.dlog[i * self.dim() + j]
    }

    /// d_k d_j log H_i^2.
    pub fn d2log(&self, i: usize, j: usize, k: usize) -> &Expr {
        let n = self.dim();
        let table = self.d2log.get_or_init(|| {
            let mut v = Vec::with_capacity(n * n * n);
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        v.push(self.dlog[i * n + j].differentiate(&self.coords[k]));
                    }
                }
            }
            v
        });
        &table[(i * n + j) * n + k]
    }

    /// True at points where every metric component evaluates, is nonzero,
    /// and keeps the sign read at the box center.
    pub fn valid_at(&self, p: &Point) -> bool {
        self.gii.iter().zip(&self.signs).all(|(g, &e)| {
            matches!(g.evaluate(p), Ok(v) if v != 0.0 && v.signum() == e)
        })
    }

    /// Sample points of the box at which the metric is regular.
    pub fn sample(&self, cfg: &CheckConfig) -> Result<Vec<Point>> {
        sample_points(&self.box_, cfg, |p| self.valid_at(p))
    }

    fn gamma_exprs(&self) -> &[Expr] {
        let n = self.dim();
        self.gamma.get_or_init(|| {
            let mut v = vec![Expr::zero(); n * n * n];
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let e = if i == j && j == k {
                            // Gamma^i_ii = 1/2 d_i log H_i^2
                            Expr::constant(0.5) * self.dlog[i * n + i].clone()
                        } else if i == j {
                            // Gamma^i_ik = 1/2 d_k log H_i^2
                            Expr::constant(0.5) * self.dlog[i * n + k].clone()
                        } else if i == k {
                            Expr::constant(0.5) * self.dlog[i * n + j].clone()
                        } else if j == k {
                            // Gamma^i_jj = -1/2 e_i e_j d_i H_j^2 / H_i^2
                            Expr::constant(-0.5 * self.signs[i] * self.signs[j])
                                * (self.hi2[j].differentiate(&self.coords[i])
                                    / self.hi2[i].clone())
                        } else {
                            Expr::zero()
                        };
                        v[(i * n + j) * n + k] = e;
                    }
                }
            }
            v
        })
    }

    fn dgamma_exprs(&self) -> &[Expr] {
        let n = self.dim();
        self.dgamma.get_or_init(|| {
            let gamma = self.gamma_exprs();
            let mut v = Vec::with_capacity(n * n * n * n);
            for l in 0..n {
                for e in gamma.iter() {
                    v.push(e.differentiate(&self.coords[l]));
                }
            }
            v
        })
    }

    /// Evaluate all Christoffel symbols at a point.
    ///
    /// Gamma^i_ij = 1/2 d_j log|g_ii|, Gamma^i_jj = -1/2 e_i e_j d_i H_j^2 /
    /// H_i^2, Gamma^i_ii = 1/2 d_i log|g_ii|, zero for three distinct indices.
    pub fn christoffel(&self, p: &Point) -> Result<ChristoffelTable> {
        let n = self.dim();
        let exprs = self.gamma_exprs();
        let mut values = Vec::with_capacity(n * n * n);
        for e in exprs {
            values.push(e.evaluate(p)?);
        }
        Ok(ChristoffelTable { n, values })
    }

    /// Fully covariant Riemann component R_abcd at a point, by assembling
    /// exact derivatives of the Christoffel expressions.
    pub fn riemann(&self, p: &Point, a: usize, b: usize, c: usize, d: usize) -> Result<f64> {
        let table = self.christoffel(p)?;
        self.riemann_with_table(p, &table, a, b, c, d)
    }

    /// Same as [`riemann`](Self::riemann) but reusing a Christoffel table
    /// already evaluated at `p`.
    pub fn riemann_with_table(
        &self,
        p: &Point,
        table: &ChristoffelTable,
        a: usize,
        b: usize,
        c: usize,
        d: usize,
    ) -> Result<f64> {
        let n = self.dim();
        if c == d {
            return Ok(0.0);
        }
        let dg = self.dgamma_exprs();
        let idx = |l: usize, i: usize, j: usize, k: usize| ((l * n + i) * n + j) * n + k;
        // R^a_bcd = d_c Gamma^a_db - d_d Gamma^a_cb + sum_f (G^a_cf G^f_db - G^a_df G^f_cb)
        let mut r = dg[idx(c, a, d, b)].evaluate(p)? - dg[idx(d, a, c, b)].evaluate(p)?;
        for f in 0..n {
            r += table.get(a, c, f) * table.get(f, d, b) - table.get(a, d, f) * table.get(f, c, b);
        }
        Ok(self.gii[a].evaluate(p)? * r)
    }

    /// Eisenhart's closed form for R_jiik (i, j, k distinct):
    ///
    /// (e_i H_i^2 / 4) [ 2 d2_jk log H_i^2 + d_j log H_i^2 d_k log H_i^2
    ///   - d_j log H_i^2 d_k log H_j^2 - d_k log H_i^2 d_j log H_k^2 ].
    pub fn rjiik_closed_form(
        &self,
        p: &Point,
        i: usize,
        j: usize,
        k: usize,
    ) -> Result<f64> {
        let (_, terms) = self.rjiik_terms(p, i, j, k)?;
        Ok(terms.iter().sum())
    }

    /// The four additive terms of the closed form, plus the H_i^2 prefactor,
    /// for residual normalization.
    pub(crate) fn rjiik_terms(
        &self,
        p: &Point,
        i: usize,
        j: usize,
        k: usize,
    ) -> Result<(f64, [f64; 4])> {
        if i == j || j == k || i == k {
            return Err(Error::InvalidInput(
                "rjiik_closed_form needs three distinct indices".into(),
            ));
        }
        let pref = 0.25 * self.signs[i] * self.hi2[i].evaluate(p)?;
        let lij = self.dlog(i, j).evaluate(p)?;
        let lik = self.dlog(i, k).evaluate(p)?;
        let ljk = self.dlog(j, k).evaluate(p)?;
        let lkj = self.dlog(k, j).evaluate(p)?;
        let mixed = self.d2log(i, j, k).evaluate(p)?;
        let terms = [
            pref * 2.0 * mixed,
            pref * lij * lik,
            -pref * lij * ljk,
            -pref * lik * lkj,
        ];
        Ok((pref, terms))
    }

    /// Sectional curvature K(X, Y) = <R(X,Y)Y, X> / ||X ^ Y||^2 of the
    /// 2-plane spanned by X and Y at p.
    pub fn sectional_curvature(&self, p: &Point, x: &[f64], y: &[f64]) -> Result<f64> {
        let n = self.dim();
        if x.len() != n || y.len() != n {
            return Err(Error::InvalidInput(
                "sectional_curvature vectors must match the dimension".into(),
            ));
        }
        let g: Vec<f64> = self
            .gii
            .iter()
            .map(|e| e.evaluate(p))
            .collect::<Result<_>>()?;
        let xx: f64 = (0..n).map(|i| g[i] * x[i] * x[i]).sum();
        let yy: f64 = (0..n).map(|i| g[i] * y[i] * y[i]).sum();
        let xy: f64 = (0..n).map(|i| g[i] * x[i] * y[i]).sum();
        let denom = xx * yy - xy * xy;
        let scale = xx.abs() * yy.abs() + xy * xy;
        if denom.abs() <= 1e-12 * (1.0 + scale) {
            return Err(Error::DegeneratePlane);
        }
        let table = self.christoffel(p)?;
        let mut num = 0.0;
        for a in 0..n {
            if x[a] == 0.0 {
                continue;
            }
            for b in 0..n {
                if y[b] == 0.0 {
                    continue;
                }
                for c in 0..n {
                    if x[c] == 0.0 {
                        continue;
                    }
                    for d in 0..n {
                        if y[d] == 0.0 {
                            continue;
                        }
                        let r = self.riemann_with_table(p, &table, a, b, c, d)?;
                        num += r * x[a] * y[b] * x[c] * y[d];
                    }
                }
            }
        }
        Ok(num / denom)
    }

    /// If R_ijkl = kappa (g_ik g_jl - g_il g_jk) holds within `tol` at every
    /// supplied point for a single kappa, return it; otherwise `None`.
    /// kappa is fitted from the first component that is distinguishably
    /// nonzero, or taken as 0 when everything vanishes.
    pub fn constant_curvature_estimate(
        &self,
        points: &[Point],
        tol: f64,
    ) -> Result<Option<f64>> {
        let n = self.dim();
        if points.len() < 2 {
            return Err(Error::InvalidInput(
                "constant_curvature_estimate needs at least 2 points".into(),
            ));
        }
        if n < 2 {
            return Ok(Some(0.0));
        }
        let mut kappa: Option<f64> = None;
        // Fit from the first sectional-type component that stands out.
        'fit: for p in points {
            let table = self.christoffel(p)?;
            let g: Vec<f64> = self
                .gii
                .iter()
                .map(|e| e.evaluate(p))
                .collect::<Result<_>>()?;
            let scale = g.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            for i in 0..n {
                for j in (i + 1)..n {
                    let r = self.riemann_with_table(p, &table, i, j, i, j)?;
                    if r.abs() > tol * (1.0 + scale * scale) {
                        kappa = Some(r / (g[i] * g[j]));
                        break 'fit;
                    }
                }
            }
        }
        let kappa = kappa.unwrap_or(0.0);
        // Residual check on the full antisymmetric basis.
        for p in points {
            let table = self.christoffel(p)?;
            let g: Vec<f64> = self
                .gii
                .iter()
                .map(|e| e.evaluate(p))
                .collect::<Result<_>>()?;
            let scale = g.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            let norm = 1.0 + scale * scale * (1.0 + kappa.abs());
            for i in 0..n {
                for j in (i + 1)..n {
                    for k in 0..n {
                        for l in (k + 1)..n {
                            if (k, l) < (i, j) {
                                continue;
                            }
                            let r = self.riemann_with_table(p, &table, i, j, k, l)?;
                            let gik = if i == k { g[i] } else { 0.0 };
                            let gjl = if j == l { g[j] } else { 0.0 };
                            let gil = if i == l { g[i] } else { 0.0 };
                            let gjk = if j == k { g[j] } else { 0.0 };
                            let model = kappa * (gik * gjl - gil * gjk);
                            if (r - model).abs() > tol * norm {
                                return Ok(None);
                            }
                        }
                    }
                }
            }
        }
        Ok(Some(kappa))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::coords;
    use std::f64::consts::{FRAC_PI_3, FRAC_PI_4};

    fn euclidean3() -> OrthogonalMetric {
        let c = coords(&["x", "y", "z"]);
        let b = ChartBox::new(vec![(0.5, 2.0); 3]).unwrap();
        OrthogonalMetric::new(
            c,
            b,
            vec![Expr::one(), Expr::one(), Expr::one()],
            &CheckConfig::default(),
        )
        .unwrap()
    }

    fn spherical3() -> OrthogonalMetric {
        let c = coords(&["r", "theta", "phi"]);
        let b = ChartBox::new(vec![(1.0, 3.0), (0.3, 1.2), (0.2, 1.0)]).unwrap();
        let r = Expr::var(&c[0]);
        let theta = Expr::var(&c[1]);
        let r2 = Expr::powi(r, 2);
        let gii = vec![
            Expr::one(),
            r2.clone(),
            r2 * Expr::powi(Expr::sin(theta), 2),
        ];
        OrthogonalMetric::new(c, b, gii, &CheckConfig::default()).unwrap()
    }

    fn sphere2() -> OrthogonalMetric {
        let c = coords(&["theta", "phi"]);
        let b = ChartBox::new(vec![(0.3, 1.2), (0.2, 1.0)]).unwrap();
        let gii = vec![Expr::one(), Expr::powi(Expr::sin(Expr::var(&c[0])), 2)];
        OrthogonalMetric::new(c, b, gii, &CheckConfig::default()).unwrap()
    }

    #[test]
    fn euclidean_christoffels_vanish() {
        let m = euclidean3();
        let t = m.christoffel(&Point(vec![1.0, 1.5, 0.7])).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    assert_eq!(t.get(i, j, k), 0.0);
                }
            }
        }
    }

    #[test]
    fn spherical_christoffel_examples() {
        let m = spherical3();
        let p = Point(vec![2.0, FRAC_PI_3, 1.0]);
        let t = m.christoffel(&p).unwrap();
        // Gamma^theta_{r theta} = 1/r
        assert!((t.get(1, 0, 1) - 0.5).abs() < 1e-12);
        assert!((t.get(1, 1, 0) - 0.5).abs() < 1e-12);
        // orthogonal metric: all-distinct entries vanish
        assert_eq!(t.get(0, 1, 2), 0.0);
    }

    #[test]
    fn s2_christoffel_and_riemann() {
        let m = sphere2();
        let p = Point(vec![FRAC_PI_4, 0.5]);
        let t = m.christoffel(&p).unwrap();
        // Gamma^theta_{phi phi} = -sin cos = -1/2 at pi/4
        assert!((t.get(0, 1, 1) + 0.5).abs() < 1e-12);
        // R_theta phi theta phi = sin^2 theta
        let r = m.riemann(&p, 0, 1, 0, 1).unwrap();
        assert!((r - 0.5).abs() < 1e-10);
    }

    #[test]
    fn flat_space_riemann_vanishes() {
        let m = spherical3();
        let p = Point(vec![2.0, FRAC_PI_3, 1.0]);
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    for d in 0..3 {
                        let r = m.riemann(&p, a, b, c, d).unwrap();
                        assert!(
                            r.abs() < 1e-10,
                            "R_{a}{b}{c}{d} = {r} should vanish in flat space"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn closed_form_agrees_with_assembly_on_perturbed_metric() {
        let c = coords(&["r", "theta", "phi"]);
        let b = ChartBox::new(vec![(1.0, 2.0), (0.4, 1.2), (0.3, 0.9)]).unwrap();
        let r = Expr::var(&c[0]);
        let theta = Expr::var(&c[1]);
        let phi = Expr::var(&c[2]);
        let gii = vec![
            Expr::one(),
            Expr::powi(r.clone(), 2)
                + Expr::constant(0.1) * theta.clone() * phi.clone(),
            Expr::powi(r, 2) * Expr::powi(Expr::sin(theta), 2),
        ];
        let m = OrthogonalMetric::new(c, b, gii, &CheckConfig::default()).unwrap();
        let p = Point(vec![1.5, 0.7, 0.5]);
        let closed = m.rjiik_closed_form(&p, 1, 0, 2).unwrap();
        assert!(closed.abs() > 1e-4, "perturbation must show up, got {closed}");
        let assembled = m.riemann(&p, 0, 1, 1, 2).unwrap();
        assert!(
            (closed - assembled).abs() <= 1e-9 * (1.0 + closed.abs().max(assembled.abs())),
            "closed {closed} vs assembled {assembled}"
        );
    }

    #[test]
    fn sectional_curvature_of_sphere_and_plane() {
        let m = sphere2();
        let p = Point(vec![FRAC_PI_4, 0.5]);
        let k = m
            .sectional_curvature(&p, &[1.0, 0.0], &[0.0, 1.0])
            .unwrap();
        assert!((k - 1.0).abs() < 1e-10);
        // homogeneity of the quotient
        let k2 = m
            .sectional_curvature(&p, &[2.0, 0.0], &[0.0, 3.0])
            .unwrap();
        assert!((k - k2).abs() < 1e-12);
        // degenerate plane
        assert!(matches!(
            m.sectional_curvature(&p, &[1.0, 0.0], &[2.0, 0.0]),
            Err(Error::DegeneratePlane)
        ));

        let e = euclidean3();
        let pe = Point(vec![1.0, 1.0, 1.0]);
        let ke = e
            .sectional_curvature(&pe, &[1.0, 0.3, 0.0], &[0.2, 1.0, 0.5])
            .unwrap();
        assert!(ke.abs() < 1e-12);
    }

    #[test]
    fn curvature_estimates_for_known_spaces() {
        let cfg = CheckConfig::default();
        let e = euclidean3();
        let pts = e.sample(&cfg).unwrap();
        assert_eq!(e.constant_curvature_estimate(&pts, 1e-9).unwrap(), Some(0.0));

        let s = sphere2();
        let pts = s.sample(&cfg).unwrap();
        let k = s.constant_curvature_estimate(&pts, 1e-9).unwrap().unwrap();
        assert!((k - 1.0).abs() < 1e-9);

        let sph = spherical3();
        let pts = sph.sample(&cfg).unwrap();
        let k = sph
            .constant_curvature_estimate(&pts, 1e-9)
            .unwrap()
            .unwrap();
        assert!(k.abs() < 1e-9);

        // spoiled spherical: H_phi^2 = r^2 sin^2 + 0.2 is not constant curvature
        let c = coords(&["r", "theta", "phi"]);
        let b = ChartBox::new(vec![(1.0, 3.0), (0.3, 1.2), (0.2, 1.0)]).unwrap();
        let r = Expr::var(&c[0]);
        let theta = Expr::var(&c[1]);
        let gii = vec![
            Expr::one(),
            Expr::powi(r.clone(), 2),
            Expr::powi(r, 2) * Expr::powi(Expr::sin(theta), 2) + Expr::constant(0.2),
        ];
        let bad = OrthogonalMetric::new(c, b, gii, &cfg).unwrap();
        let pts = bad.sample(&cfg).unwrap();
        assert_eq!(bad.constant_curvature_estimate(&pts, 1e-9).unwrap(), None);
    }

    #[test]
    fn metric_compatibility_of_christoffels() {
        // nabla_k g_ij = d_k g_ij - Gamma^l_ki g_lj - Gamma^l_kj g_il = 0
        let m = spherical3();
        let cfg = CheckConfig::default();
        let pts = m.sample(&cfg).unwrap();
        let n = m.dim();
        for p in pts.iter().take(10) {
            let t = m.christoffel(p).unwrap();
            let g: Vec<f64> = (0..n).map(|i| m.component(i).evaluate(p).unwrap()).collect();
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        let dkg = if i == j {
                            m.component(i)
                                .differentiate(&m.coords()[k])
                                .evaluate(p)
                                .unwrap()
                        } else {
                            0.0
                        };
                        let mut r = dkg;
                        r -= t.get(i, k, j) * g[i];
                        r -= t.get(j, k, i) * g[j];
                        assert!(r.abs() <= 1e-10 * (1.0 + g[i].abs().max(g[j].abs())));
                    }
                }
            }
        }
    }

    #[test]
    fn signature_change_is_rejected() {
        let c = coords(&["x", "y"]);
        let b = ChartBox::new(vec![(-1.0, 1.0), (0.5, 1.5)]).unwrap();
        // x changes sign on the box
        let gii = vec![Expr::var(&c[0]), Expr::one()];
        assert!(OrthogonalMetric::new(c, b, gii, &CheckConfig::default()).is_err());
    }
}
