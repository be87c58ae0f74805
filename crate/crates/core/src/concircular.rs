//! The canonical concircular tensor induced by SCKT data,
//!
//!   L = sum_{a in M} sigma_a d_a (x) dx_a + sum_I e_I sum_{i in I} d_i (x) dx_i,
//!
//! and sampled verification of the concircular equation
//! nabla_k L_ij = alpha_(i g_j)k and the Killing equation nabla_(i K_jk) = 0.
//!
//! The covector alpha is never supplied: contracting the concircular
//! equation with the inverse metric gives alpha_k = d_k (tr L), so the
//! checker computes it and verifies the residual — existence by
//! construction.

use crate::canonical::{sckt_layout, SCKTData};
use crate::chart::{CheckConfig, CoordId, Point};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::metric::OrthogonalMetric;
use crate::separability::{over_samples, ConditionReport, ResidualAccumulator};

/// The canonical concircular tensor in mixed form: simple eigenfunctions
/// sigma_a on M and constant eigenvalues e_I on the blocks.
#[derive(Debug, Clone)]
pub struct ConcircularTensor {
    coords: Vec<CoordId>,
    /// (coordinate index, eigenfunction) for a in M
    simple: Vec<(usize, Expr)>,
    /// (e_I, block member indices)
    blocks: Vec<(f64, Vec<usize>)>,
}

impl ConcircularTensor {
    pub fn coords(&self) -> &[CoordId] {
        &self.coords
    }

    pub fn simple_part(&self) -> &[(usize, Expr)] {
        &self.simple
    }

    pub fn blocks(&self) -> &[(f64, Vec<usize>)] {
        &self.blocks
    }

    /// Eigenvalue of the coordinate direction i, as an expression.
    pub fn eigenvalue(&self, i: usize) -> Expr {
        for (a, s) in &self.simple {
            if *a == i {
                return s.clone();
            }
        }
        for (e, members) in &self.blocks {
            if members.contains(&i) {
                return Expr::constant(*e);
            }
        }
        unreachable!("coordinate {i} not covered by the tensor partition")
    }

    /// Block partition as sorted name sets: singletons for M, one set per
    /// block. Comparable with the classification's block partition.
    pub fn eigenspace_partition(&self) -> Vec<Vec<String>> {
        let mut parts: Vec<Vec<String>> = Vec::new();
        for (a, _) in &self.simple {
            parts.push(vec![self.coords[*a].name.clone()]);
        }
        for (_, members) in &self.blocks {
            let mut p: Vec<String> = members
                .iter()
                .map(|&i| self.coords[i].name.clone())
                .collect();
            p.sort();
            parts.push(p);
        }
        parts.sort();
        parts
    }

    /// Covariant components L_ij = diag(sigma_a g_aa; e_I g_ii) against a
    /// metric on the same chart.
    pub fn to_covariant(&self, m: &OrthogonalMetric) -> Result<SymTensorField> {
        if m.dim() != self.coords.len() {
            return Err(Error::InvalidInput(
                "tensor and metric dimensions differ".into(),
            ));
        }
        let diag: Vec<Expr> = (0..m.dim())
            .map(|i| self.eigenvalue(i) * m.component(i).clone())
            .collect();
        Ok(SymTensorField::from_diagonal(diag))
    }
}

/// Build the canonical concircular tensor from SCKT data. Fails with
/// `TrivialTensor` when the result would be a constant multiple of the
/// metric (no simple part and a single block).
pub fn build_ct(d: &SCKTData, cfg: &CheckConfig) -> Result<ConcircularTensor> {
    let layout = sckt_layout(d, cfg)?;
    if d.simple.is_empty() && d.blocks.len() <= 1 {
        return Err(Error::TrivialTensor);
    }
    Ok(ConcircularTensor {
        coords: layout.coords,
        simple: layout.sigmas.into_iter().enumerate().collect(),
        blocks: layout.blocks,
    })
}

/// A symmetric 2-tensor field with expression components; symmetry is
/// enforced by storing the upper triangle once.
#[derive(Debug, Clone)]
pub struct SymTensorField {
    n: usize,
    upper: Vec<Expr>, // (i, j) with i <= j, row-major over the triangle
}

impl SymTensorField {
    pub fn from_diagonal(diag: Vec<Expr>) -> Self {
        let n = diag.len();
        let mut upper = Vec::with_capacity(n * (n + 1) / 2);
        for (i, d) in diag.into_iter().enumerate() {
            upper.push(d);
            for _ in (i + 1)..n {
                upper.push(Expr::zero());
            }
        }
        SymTensorField { n, upper }
    }

    /// Build from an arbitrary component function; entries below the
    /// diagonal are ignored in favor of their mirror images.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Expr) -> Self {
        let mut upper = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                upper.push(f(i, j));
            }
        }
        SymTensorField { n, upper }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn tri_index(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        i * self.n - i * (i + 1) / 2 + j
    }

    pub fn get(&self, i: usize, j: usize) -> &Expr {
        &self.upper[self.tri_index(i, j)]
    }
}

/// nabla_k T_ij = d_k T_ij - Gamma^l_ki T_lj - Gamma^l_kj T_il evaluated at
/// one point; returned as values[k][i][j].
pub fn covariant_derivative(
    t: &SymTensorField,
    m: &OrthogonalMetric,
    p: &Point,
) -> Result<Vec<Vec<Vec<f64>>>> {
    let derivs = TensorDerivs::new(t, m);
    derivs.at(p)
}

/// Cached exact partials of a tensor field, reused across sample points.
struct TensorDerivs<'a> {
    t: &'a SymTensorField,
    m: &'a OrthogonalMetric,
    dt: Vec<Expr>, // [k][triangle]
}

impl<'a> TensorDerivs<'a> {
    fn new(t: &'a SymTensorField, m: &'a OrthogonalMetric) -> Self {
        let mut dt = Vec::with_capacity(m.dim() * t.upper.len());
        for k in 0..m.dim() {
            for e in &t.upper {
                dt.push(e.differentiate(&m.coords()[k]));
            }
        }
        TensorDerivs { t, m, dt }
    }

    fn partial(&self, k: usize, i: usize, j: usize) -> &Expr {
        &self.dt[k * self.t.upper.len() + self.t.tri_index(i, j)]
    }

    fn at(&self, p: &Point) -> Result<Vec<Vec<Vec<f64>>>> {
        let n = self.m.dim();
        let gamma = self.m.christoffel(p)?;
        let tv = self.values_at(p)?;
        let mut out = vec![vec![vec![0.0; n]; n]; n];
        let mut terms = Vec::new();
        for k in 0..n {
            for i in 0..n {
                for j in i..n {
                    terms.clear();
                    self.nabla_terms(&gamma, &tv, p, k, i, j, &mut terms)?;
                    let v: f64 = terms.iter().sum();
                    out[k][i][j] = v;
                    out[k][j][i] = v;
                }
            }
        }
        Ok(out)
    }

    fn values_at(&self, p: &Point) -> Result<Vec<Vec<f64>>> {
        let n = self.m.dim();
        let mut tv = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                tv[i][j] = self.t.get(i, j).evaluate(p)?;
            }
        }
        Ok(tv)
    }

    /// The additive pieces of nabla_k T_ij: the raw partial and every
    /// Christoffel contraction separately, so that residual normalization
    /// sees the true magnitudes entering the cancellation.
    fn nabla_terms(
        &self,
        gamma: &crate::metric::ChristoffelTable,
        tv: &[Vec<f64>],
        p: &Point,
        k: usize,
        i: usize,
        j: usize,
        out: &mut Vec<f64>,
    ) -> Result<()> {
        let n = self.m.dim();
        out.push(self.partial(k, i, j).evaluate(p)?);
        for l in 0..n {
            out.push(-gamma.get(l, k, i) * tv[l][j]);
            out.push(-gamma.get(l, k, j) * tv[i][l]);
        }
        Ok(())
    }
}

/// A covector field with expression components.
#[derive(Debug, Clone)]
pub struct Covector {
    pub components: Vec<Expr>,
}

/// alpha_k = d_k (g^{ij} L_ij): the only covector that can witness the
/// concircular equation, obtained by tracing it.
pub fn alpha_from_trace(l: &SymTensorField, m: &OrthogonalMetric) -> Covector {
    let n = m.dim();
    let mut trace = Expr::zero();
    for i in 0..n {
        trace = trace + l.get(i, i).clone() / m.component(i).clone();
    }
    let components = (0..n)
        .map(|k| trace.differentiate(&m.coords()[k]))
        .collect();
    Covector { components }
}

/// Residuals of nabla_k L_ij - (alpha_i g_jk + alpha_j g_ik)/2 with alpha
/// computed from the trace, over all (k, i <= j) at the sampled points.
pub fn verify_concircular(
    l: &SymTensorField,
    m: &OrthogonalMetric,
    cfg: &CheckConfig,
) -> Result<ConditionReport> {
    let alpha = alpha_from_trace(l, m);
    verify_concircular_with_alpha(l, m, &alpha, cfg)
}

/// The concircular residual against an explicitly supplied covector. The
/// main entry point computes alpha itself; this variant exists so that a
/// perturbed alpha can be shown to break the check (a guard against a
/// degenerate always-pass checker).
pub fn verify_concircular_with_alpha(
    l: &SymTensorField,
    m: &OrthogonalMetric,
    alpha: &Covector,
    cfg: &CheckConfig,
) -> Result<ConditionReport> {
    let n = m.dim();
    if l.dim() != n || alpha.components.len() != n {
        return Err(Error::InvalidInput(
            "tensor, covector and metric dimensions differ".into(),
        ));
    }
    let derivs = TensorDerivs::new(l, m);
    let mut indices = Vec::new();
    for k in 0..n {
        for i in 0..n {
            for j in i..n {
                indices.push(vec![k, i, j]);
            }
        }
    }
    let tuples = indices.clone();
    let mut acc = ResidualAccumulator::new(indices);
    let points = m.sample(cfg)?;
    let mut terms = Vec::new();
    let used = over_samples(&points, |p| {
        let gamma = m.christoffel(p)?;
        let tv = derivs.values_at(p)?;
        let a: Vec<f64> = alpha
            .components
            .iter()
            .map(|e| e.evaluate(p))
            .collect::<Result<_>>()?;
        let g: Vec<f64> = (0..n)
            .map(|i| m.component(i).evaluate(p))
            .collect::<Result<_>>()?;
        for (t, idx) in tuples.iter().enumerate() {
            let (k, i, j) = (idx[0], idx[1], idx[2]);
            let gjk = if j == k { g[j] } else { 0.0 };
            let gik = if i == k { g[i] } else { 0.0 };
            terms.clear();
            derivs.nabla_terms(&gamma, &tv, p, k, i, j, &mut terms)?;
            terms.push(-0.5 * a[i] * gjk);
            terms.push(-0.5 * a[j] * gik);
            acc.record(t, &terms);
        }
        Ok(())
    })?;
    Ok(ConditionReport::from_tuples(
        "concircular",
        acc.finish(),
        used,
        cfg.tol,
    ))
}

/// Residuals of the Killing equation as the cyclic symmetrization
/// (nabla_i K_jk + nabla_j K_ki + nabla_k K_ij)/3 over i <= j <= k.
pub fn verify_killing(
    k_field: &SymTensorField,
    m: &OrthogonalMetric,
    cfg: &CheckConfig,
) -> Result<ConditionReport> {
    let n = m.dim();
    if k_field.dim() != n {
        return Err(Error::InvalidInput(
            "tensor and metric dimensions differ".into(),
        ));
    }
    let derivs = TensorDerivs::new(k_field, m);
    let mut indices = Vec::new();
    for i in 0..n {
        for j in i..n {
            for k in j..n {
                indices.push(vec![i, j, k]);
            }
        }
    }
    let tuples = indices.clone();
    let mut acc = ResidualAccumulator::new(indices);
    let points = m.sample(cfg)?;
    let mut terms = Vec::new();
    let used = over_samples(&points, |p| {
        let gamma = m.christoffel(p)?;
        let tv = derivs.values_at(p)?;
        for (t, idx) in tuples.iter().enumerate() {
            let (i, j, k) = (idx[0], idx[1], idx[2]);
            terms.clear();
            derivs.nabla_terms(&gamma, &tv, p, i, j, k, &mut terms)?;
            derivs.nabla_terms(&gamma, &tv, p, j, k, i, &mut terms)?;
            derivs.nabla_terms(&gamma, &tv, p, k, i, j, &mut terms)?;
            for v in terms.iter_mut() {
                *v /= 3.0;
            }
            acc.record(t, &terms);
        }
        Ok(())
    })?;
    Ok(ConditionReport::from_tuples(
        "killing",
        acc.finish(),
        used,
        cfg.tol,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::{BlockSpec, SimpleCoordSpec};
    use crate::chart::{coords, ChartBox};

    fn cfg() -> CheckConfig {
        CheckConfig::default()
    }

    fn spherical_metric() -> OrthogonalMetric {
        let c = coords(&["r", "theta", "phi"]);
        let b = ChartBox::new(vec![(1.0, 3.0), (0.3, 1.2), (0.2, 1.0)]).unwrap();
        let r2 = Expr::powi(Expr::var(&c[0]), 2);
        OrthogonalMetric::new(
            c.clone(),
            b,
            vec![
                Expr::one(),
                r2.clone(),
                r2 * Expr::powi(Expr::sin(Expr::var(&c[1])), 2),
            ],
            &cfg(),
        )
        .unwrap()
    }

    fn spherical_l(m: &OrthogonalMetric) -> SymTensorField {
        // L = -r^2 dr (x) dr in covariant form
        let r = Expr::var(&m.coords()[0]);
        SymTensorField::from_diagonal(vec![
            Expr::neg(Expr::powi(r, 2)),
            Expr::zero(),
            Expr::zero(),
        ])
    }

    #[test]
    fn covariant_derivative_examples() {
        let m = spherical_metric();
        // metric compatibility: nabla g = 0
        let g = SymTensorField::from_diagonal(
            (0..3).map(|i| m.component(i).clone()).collect(),
        );
        let p = Point(vec![1.5, 0.7, 0.5]);
        let nabla = covariant_derivative(&g, &m, &p).unwrap();
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    assert!(nabla[k][i][j].abs() < 1e-12);
                }
            }
        }
        // nabla_r L_rr = -2r
        let l = spherical_l(&m);
        let nabla = covariant_derivative(&l, &m, &p).unwrap();
        assert!((nabla[0][0][0] + 3.0).abs() < 1e-12);
    }

    #[test]
    fn alpha_is_the_trace_differential() {
        let m = spherical_metric();
        let l = spherical_l(&m);
        let alpha = alpha_from_trace(&l, &m);
        let p = Point(vec![1.5, 0.7, 0.5]);
        assert!((alpha.components[0].evaluate(&p).unwrap() + 3.0).abs() < 1e-12);
        assert!(alpha.components[1].evaluate(&p).unwrap().abs() < 1e-12);
        assert!(alpha.components[2].evaluate(&p).unwrap().abs() < 1e-12);
        // L = c g has constant trace, so alpha = 0
        let cg = SymTensorField::from_diagonal(
            (0..3)
                .map(|i| Expr::constant(2.5) * m.component(i).clone())
                .collect(),
        );
        let alpha = alpha_from_trace(&cg, &m);
        for a in &alpha.components {
            assert!(a.evaluate(&p).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn spherical_tensor_is_concircular() {
        let m = spherical_metric();
        let l = spherical_l(&m);
        let rep = verify_concircular(&l, &m, &cfg()).unwrap();
        assert!(rep.pass, "max residual {}", rep.max_raw);
        assert!(rep.max_raw < 1e-10);
    }

    #[test]
    fn wrong_power_is_not_concircular() {
        // L = diag(x^3 g_11, 0) on E^2 fails
        let c = coords(&["x", "y"]);
        let b = ChartBox::new(vec![(0.5, 2.0), (0.5, 2.0)]).unwrap();
        let m = OrthogonalMetric::new(
            c.clone(),
            b,
            vec![Expr::one(), Expr::one()],
            &cfg(),
        )
        .unwrap();
        let l = SymTensorField::from_diagonal(vec![
            Expr::powi(Expr::var(&c[0]), 3),
            Expr::zero(),
        ]);
        let rep = verify_concircular(&l, &m, &cfg()).unwrap();
        assert!(!rep.pass);
    }

    #[test]
    fn perturbed_alpha_fails() {
        let m = spherical_metric();
        let l = spherical_l(&m);
        let mut alpha = alpha_from_trace(&l, &m);
        alpha.components[0] = alpha.components[0].clone() + Expr::constant(1e-3);
        let rep = verify_concircular_with_alpha(&l, &m, &alpha, &cfg()).unwrap();
        assert!(!rep.pass);
    }

    #[test]
    fn metric_is_killing_and_linear_diag_is_not() {
        let m = spherical_metric();
        let g = SymTensorField::from_diagonal(
            (0..3).map(|i| m.component(i).clone()).collect(),
        );
        assert!(verify_killing(&g, &m, &cfg()).unwrap().pass);

        let c = coords(&["x", "y"]);
        let b = ChartBox::new(vec![(0.5, 2.0), (0.5, 2.0)]).unwrap();
        let e2 = OrthogonalMetric::new(
            c.clone(),
            b,
            vec![Expr::one(), Expr::one()],
            &cfg(),
        )
        .unwrap();
        // K = c g + constant-coefficient tensor is Killing on flat space
        let k_ok = SymTensorField::from_fn(2, |i, j| {
            let c0 = Expr::constant(if i == j { 2.0 } else { 0.7 });
            if i == j {
                c0 + Expr::constant(3.0)
            } else {
                c0
            }
        });
        assert!(verify_killing(&k_ok, &e2, &cfg()).unwrap().pass);
        // K = diag(x, 0): nabla_x K_xx = 1
        let k_bad = SymTensorField::from_diagonal(vec![Expr::var(&c[0]), Expr::zero()]);
        let rep = verify_killing(&k_bad, &e2, &cfg()).unwrap();
        assert!(!rep.pass);
        let xxx = rep.tuples.iter().find(|t| t.indices == vec![0, 0, 0]).unwrap();
        assert!((xxx.max_raw - 1.0).abs() < 1e-12);
    }

    #[test]
    fn build_ct_from_spherical_data_and_triviality() {
        let theta = CoordId::new(0, "theta");
        let s2 = crate::web::SigmaWeb::new(
            vec![theta.clone(), CoordId::new(1, "phi")],
            ChartBox::new(vec![(0.3, 1.2), (0.2, 1.0)]).unwrap(),
            vec![1.0, 1.0],
            vec![
                Expr::powi(Expr::sin(Expr::var(&theta)), -2),
                Expr::one(),
            ],
            vec![
                vec![Expr::zero(), Expr::powi(Expr::sin(Expr::var(&theta)), 2)],
                vec![Expr::zero(), Expr::zero()],
            ],
            &cfg(),
        )
        .unwrap();
        let data = SCKTData {
            simple: vec![SimpleCoordSpec::new(
                "r",
                (1.0, 3.0),
                Expr::neg(Expr::powi(Expr::var(&CoordId::new(0, "r")), 2)),
                Expr::one(),
                1.0,
            )],
            blocks: vec![BlockSpec {
                e: 0.0,
                web: s2.clone(),
            }],
        };
        let ct = build_ct(&data, &cfg()).unwrap();
        assert_eq!(ct.simple_part().len(), 1);
        assert_eq!(ct.blocks().len(), 1);
        let w = crate::canonical::sckt_metric(&data, &cfg()).unwrap();
        let m = w.to_metric(&cfg()).unwrap();
        let l = ct.to_covariant(&m).unwrap();
        let rep = verify_concircular(&l, &m, &cfg()).unwrap();
        assert!(rep.pass, "max residual {}", rep.max_raw);

        // single block, no simple part: constant multiple of the metric
        let trivial = SCKTData {
            simple: vec![],
            blocks: vec![BlockSpec { e: 2.0, web: s2 }],
        };
        assert!(matches!(
            build_ct(&trivial, &cfg()),
            Err(Error::TrivialTensor)
        ));
    }
}
