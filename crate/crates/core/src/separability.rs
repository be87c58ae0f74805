//! Sampled decision procedures for orthogonal separability (the Levi-Civita
//! equations) and the diagonal-curvature condition.
//!
//! Residual normalization: every residual is divided by (1 + max |additive
//! term|) before the tolerance comparison, so the checks are invariant under
//! global rescaling of the metric and do not produce spurious failures on
//! large-magnitude charts. Reports carry both the raw and the normalized
//! maxima.

use crate::chart::{CheckConfig, Point};
use crate::error::{Error, Result};
use crate::metric::OrthogonalMetric;

/// Outcome of one sampled condition check.
#[derive(Debug, Clone)]
pub struct ConditionReport {
    pub condition: String,
    pub tuples: Vec<TupleResidual>,
    pub samples_used: usize,
    pub tolerance: f64,
    pub max_raw: f64,
    pub max_normalized: f64,
    pub pass: bool,
}

/// Max residual of one index tuple across the sampled points.
#[derive(Debug, Clone)]
pub struct TupleResidual {
    pub indices: Vec<usize>,
    pub max_raw: f64,
    pub max_normalized: f64,
}

impl ConditionReport {
    pub(crate) fn from_tuples(
        condition: impl Into<String>,
        tuples: Vec<TupleResidual>,
        samples_used: usize,
        tolerance: f64,
    ) -> Self {
        let max_raw = tuples.iter().fold(0.0_f64, |m, t| m.max(t.max_raw));
        let max_normalized = tuples.iter().fold(0.0_f64, |m, t| m.max(t.max_normalized));
        ConditionReport {
            condition: condition.into(),
            tuples,
            samples_used,
            tolerance,
            max_raw,
            max_normalized,
            pass: max_normalized <= tolerance,
        }
    }

    /// A check with nothing to test (e.g. diagonal curvature at n = 2).
    pub(crate) fn vacuous(condition: impl Into<String>, tolerance: f64) -> Self {
        ConditionReport {
            condition: condition.into(),
            tuples: Vec::new(),
            samples_used: 0,
            tolerance,
            max_raw: 0.0,
            max_normalized: 0.0,
            pass: true,
        }
    }
}

/// Accumulates per-tuple maxima over sample points, with the (1 + max|term|)
/// normalization applied term-wise at each point.
pub(crate) struct ResidualAccumulator {
    pub indices: Vec<Vec<usize>>,
    raw: Vec<f64>,
    normalized: Vec<f64>,
}

impl ResidualAccumulator {
    pub fn new(indices: Vec<Vec<usize>>) -> Self {
        let k = indices.len();
        ResidualAccumulator {
            indices,
            raw: vec![0.0; k],
            normalized: vec![0.0; k],
        }
    }

    pub fn record(&mut self, tuple: usize, terms: &[f64]) {
        let sum: f64 = terms.iter().sum();
        let scale = terms.iter().fold(0.0_f64, |m, t| m.max(t.abs()));
        let raw = sum.abs();
        self.raw[tuple] = self.raw[tuple].max(raw);
        self.normalized[tuple] = self.normalized[tuple].max(raw / (1.0 + scale));
    }

    pub fn finish(self) -> Vec<TupleResidual> {
        self.indices
            .into_iter()
            .zip(self.raw)
            .zip(self.normalized)
            .map(|((indices, max_raw), max_normalized)| TupleResidual {
                indices,
                max_raw,
                max_normalized,
            })
            .collect()
    }
}

/// Run `eval` over the sampled points, skipping points where it hits a
/// singular evaluation. Fails with `InsufficientSamples` when fewer than
/// half of the points survive.
pub(crate) fn over_samples(
    points: &[Point],
    mut eval: impl FnMut(&Point) -> Result<()>,
) -> Result<usize> {
    let mut used = 0usize;
    for p in points {
        match eval(p) {
            Ok(()) => used += 1,
            Err(Error::SingularEvaluation(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    if used * 2 < points.len() || used == 0 {
        return Err(Error::InsufficientSamples {
            requested: points.len(),
            valid: used,
        });
    }
    Ok(used)
}

/// Levi-Civita separability equations: the pair condition
/// d2_ij log H_i^2 + d_j log H_i^2 d_i log H_j^2 = 0 over all ordered pairs,
/// and for n >= 3 the triple condition
/// d2_jk log H_i^2 - d_j log H_i^2 d_k log H_i^2 + d_j log H_i^2 d_k log H_j^2
///   + d_k log H_i^2 d_j log H_k^2 = 0 over all ordered distinct triples.
pub fn check_levi_civita(m: &OrthogonalMetric, cfg: &CheckConfig) -> Result<ConditionReport> {
    let n = m.dim();
    if n < 2 {
        return Err(Error::InvalidInput("check_levi_civita needs n >= 2".into()));
    }
    let mut indices = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                indices.push(vec![i, j]);
            }
        }
    }
    let pairs_end = indices.len();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if i != j && j != k && i != k {
                    indices.push(vec![i, j, k]);
                }
            }
        }
    }
    let tuples = indices.clone();
    let mut acc = ResidualAccumulator::new(indices);
    let points = m.sample(cfg)?;
    let used = over_samples(&points, |p| {
        for (t, idx) in tuples.iter().enumerate() {
            if t < pairs_end {
                let (i, j) = (idx[0], idx[1]);
                let t1 = m.d2log(i, i, j).evaluate(p)?;
                let t2 = m.dlog(i, j).evaluate(p)? * m.dlog(j, i).evaluate(p)?;
                acc.record(t, &[t1, t2]);
            } else {
                let (i, j, k) = (idx[0], idx[1], idx[2]);
                let lij = m.dlog(i, j).evaluate(p)?;
                let lik = m.dlog(i, k).evaluate(p)?;
                let t1 = m.d2log(i, j, k).evaluate(p)?;
                let t2 = -lij * lik;
                let t3 = lij * m.dlog(j, k).evaluate(p)?;
                let t4 = lik * m.dlog(k, j).evaluate(p)?;
                acc.record(t, &[t1, t2, t3, t4]);
            }
        }
        Ok(())
    })?;
    Ok(ConditionReport::from_tuples(
        "levi_civita",
        acc.finish(),
        used,
        cfg.tol,
    ))
}

/// Diagonal curvature: |R_jiik| = 0 for all distinct (i, j, k), evaluated
/// through the closed form. Vacuously true for n = 2.
pub fn check_diagonal_curvature(
    m: &OrthogonalMetric,
    cfg: &CheckConfig,
) -> Result<ConditionReport> {
    let n = m.dim();
    if n < 2 {
        return Err(Error::InvalidInput(
            "check_diagonal_curvature needs n >= 2".into(),
        ));
    }
    if n == 2 {
        return Ok(ConditionReport::vacuous("diagonal_curvature", cfg.tol));
    }
    let mut indices = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if i != j && j != k && i != k {
                    indices.push(vec![i, j, k]);
                }
            }
        }
    }
    let tuples = indices.clone();
    let mut acc = ResidualAccumulator::new(indices);
    let points = m.sample(cfg)?;
    let used = over_samples(&points, |p| {
        for (t, idx) in tuples.iter().enumerate() {
            let (_, terms) = m.rjiik_terms(p, idx[0], idx[1], idx[2])?;
            acc.record(t, &terms);
        }
        Ok(())
    })?;
    Ok(ConditionReport::from_tuples(
        "diagonal_curvature",
        acc.finish(),
        used,
        cfg.tol,
    ))
}

/// The reduction of diagonal curvature under separability:
/// d2 log H_i^2 / dx_j dx_k = 0 for distinct (i, j, k).
pub fn check_mixed_log_partials(
    m: &OrthogonalMetric,
    cfg: &CheckConfig,
) -> Result<ConditionReport> {
    let n = m.dim();
    if n < 2 {
        return Err(Error::InvalidInput(
            "check_mixed_log_partials needs n >= 2".into(),
        ));
    }
    if n == 2 {
        return Ok(ConditionReport::vacuous("mixed_log_partials", cfg.tol));
    }
    let mut indices = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if i != j && j != k && i != k {
                    indices.push(vec![i, j, k]);
                }
            }
        }
    }
    let tuples = indices.clone();
    let mut acc = ResidualAccumulator::new(indices);
    let points = m.sample(cfg)?;
    let used = over_samples(&points, |p| {
        for (t, idx) in tuples.iter().enumerate() {
            let v = m.d2log(idx[0], idx[1], idx[2]).evaluate(p)?;
            acc.record(t, &[v]);
        }
        Ok(())
    })?;
    Ok(ConditionReport::from_tuples(
        "mixed_log_partials",
        acc.finish(),
        used,
        cfg.tol,
    ))
}

/// True iff both the Levi-Civita equations and the diagonal-curvature
/// condition pass: the necessary conditions for KEM coordinates.
pub fn is_kem_candidate(m: &OrthogonalMetric, cfg: &CheckConfig) -> Result<bool> {
    Ok(check_levi_civita(m, cfg)?.pass && check_diagonal_curvature(m, cfg)?.pass)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::{coords, ChartBox};
    use crate::expr::Expr;

    fn metric(names: &[&str], intervals: Vec<(f64, f64)>, gii: Vec<Expr>) -> OrthogonalMetric {
        OrthogonalMetric::new(
            coords(names),
            ChartBox::new(intervals).unwrap(),
            gii,
            &CheckConfig::default(),
        )
        .unwrap()
    }

    fn elliptic_e2() -> OrthogonalMetric {
        let c = coords(&["u", "v"]);
        let h = Expr::powi(Expr::cosh(Expr::var(&c[0])), 2)
            - Expr::powi(Expr::cos(Expr::var(&c[1])), 2);
        metric(
            &["u", "v"],
            vec![(0.5, 1.5), (0.2, 1.0)],
            vec![h.clone(), h],
        )
    }

    #[test]
    fn euclidean_passes_everything() {
        let m = metric(
            &["x", "y", "z"],
            vec![(0.5, 2.0); 3],
            vec![Expr::one(), Expr::one(), Expr::one()],
        );
        let cfg = CheckConfig::default();
        let lc = check_levi_civita(&m, &cfg).unwrap();
        assert!(lc.pass);
        assert_eq!(lc.max_raw, 0.0);
        assert!(check_diagonal_curvature(&m, &cfg).unwrap().pass);
        assert!(check_mixed_log_partials(&m, &cfg).unwrap().pass);
        assert!(is_kem_candidate(&m, &cfg).unwrap());
    }

    #[test]
    fn elliptic_coordinates_separate() {
        let m = elliptic_e2();
        let cfg = CheckConfig::default();
        let lc = check_levi_civita(&m, &cfg).unwrap();
        assert!(lc.pass, "max residual {}", lc.max_raw);
        assert!(lc.max_raw < 1e-10);
        // n = 2: diagonal curvature is vacuous
        let dc = check_diagonal_curvature(&m, &cfg).unwrap();
        assert!(dc.pass && dc.tuples.is_empty());
        assert!(is_kem_candidate(&m, &cfg).unwrap());
    }

    #[test]
    fn coupled_component_fails_levi_civita() {
        let c = coords(&["x1", "x2"]);
        let m = metric(
            &["x1", "x2"],
            vec![(1.0, 2.0), (1.0, 2.0)],
            vec![
                Expr::one(),
                Expr::one() + Expr::var(&c[0]) * Expr::powi(Expr::var(&c[1]), 2),
            ],
        );
        let cfg = CheckConfig::default();
        let lc = check_levi_civita(&m, &cfg).unwrap();
        assert!(!lc.pass);
        assert!(lc.max_normalized > 1e-3);
        assert!(!is_kem_candidate(&m, &cfg).unwrap());
    }

    #[test]
    fn exp_coupling_fails_diagonal_curvature_with_unit_mixed_partial() {
        let c = coords(&["x1", "x2", "x3"]);
        let m = metric(
            &["x1", "x2", "x3"],
            vec![(0.5, 1.5); 3],
            vec![
                Expr::one(),
                Expr::one(),
                Expr::exp(Expr::var(&c[0]) * Expr::var(&c[1])),
            ],
        );
        let cfg = CheckConfig::default();
        let dc = check_diagonal_curvature(&m, &cfg).unwrap();
        assert!(!dc.pass);
        let ml = check_mixed_log_partials(&m, &cfg).unwrap();
        assert!(!ml.pass);
        // d2 log H_3^2 / dx1 dx2 = 1 exactly
        let bad = ml
            .tuples
            .iter()
            .find(|t| t.indices == vec![2, 0, 1])
            .unwrap();
        assert!((bad.max_raw - 1.0).abs() < 1e-12);
    }

    #[test]
    fn spherical_passes_diagonal_curvature() {
        let c = coords(&["r", "theta", "phi"]);
        let r2 = Expr::powi(Expr::var(&c[0]), 2);
        let m = metric(
            &["r", "theta", "phi"],
            vec![(1.0, 3.0), (0.3, 1.2), (0.2, 1.0)],
            vec![
                Expr::one(),
                r2.clone(),
                r2 * Expr::powi(Expr::sin(Expr::var(&c[1])), 2),
            ],
        );
        let cfg = CheckConfig::default();
        assert!(check_diagonal_curvature(&m, &cfg).unwrap().pass);
        assert!(is_kem_candidate(&m, &cfg).unwrap());
    }

    #[test]
    fn rescaling_leaves_residuals_unchanged() {
        let c = coords(&["x1", "x2"]);
        let gii = vec![
            Expr::one(),
            Expr::one() + Expr::var(&c[0]) * Expr::powi(Expr::var(&c[1]), 2),
        ];
        let scaled: Vec<Expr> = gii
            .iter()
            .map(|g| Expr::constant(1e6) * g.clone())
            .collect();
        let cfg = CheckConfig::default();
        let m1 = metric(&["x1", "x2"], vec![(1.0, 2.0); 2], gii);
        let m2 = metric(&["x1", "x2"], vec![(1.0, 2.0); 2], scaled);
        let r1 = check_levi_civita(&m1, &cfg).unwrap();
        let r2 = check_levi_civita(&m2, &cfg).unwrap();
        // log-based conditions are exactly scale invariant
        assert!((r1.max_raw - r2.max_raw).abs() <= 1e-12 * (1.0 + r1.max_raw));
    }
}
