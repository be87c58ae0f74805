//! Warped-product curvature: the sectional-curvature formulas for
//! g = g_base + sum_i rho_i^2 g_i with warping functions over the base,
//! the constant-curvature conditions they imply, and the one-dimensional
//! base computation showing that constant-curvature warped products carry
//! concircular structure ((sigma_i'/sigma_k')' = 0 with sigma_i = rho_i^2).

use crate::chart::{ChartBox, CheckConfig, CoordId, Point};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::metric::OrthogonalMetric;
use crate::separability::{over_samples, ConditionReport, ResidualAccumulator, TupleResidual};

/// One fiber of a warped product: its own metric and a positive warping
/// function over the base coordinates.
#[derive(Debug, Clone)]
pub struct Fiber {
    pub rho: Expr,
    pub metric: OrthogonalMetric,
}

/// A warped product g = g_base + sum_i rho_i^2 g_i, assembled on the
/// combined chart (base coordinates first, then the fibers in order).
#[derive(Debug)]
pub struct WarpedProductStructure {
    base: OrthogonalMetric,
    fibers: Vec<Fiber>,
    assembled: OrthogonalMetric,
    /// global coordinate ranges: [0, base_dim) then one range per fiber
    fiber_offsets: Vec<usize>,
}

impl WarpedProductStructure {
    pub fn new(base: OrthogonalMetric, fibers: Vec<Fiber>, cfg: &CheckConfig) -> Result<Self> {
        if fibers.is_empty() {
            return Err(Error::InvalidInput(
                "a warped product needs at least one fiber".into(),
            ));
        }
        let d0 = base.dim();
        for (i, f) in fibers.iter().enumerate() {
            if f.rho.vars().iter().any(|&v| v >= d0) {
                return Err(Error::InvalidInput(format!(
                    "warping function {i} must depend on base coordinates only"
                )));
            }
        }
        let mut names: Vec<String> = base.coords().iter().map(|c| c.name.clone()).collect();
        let mut intervals: Vec<(f64, f64)> =
            (0..d0).map(|i| base.chart_box().interval(i)).collect();
        let mut fiber_offsets = Vec::with_capacity(fibers.len());
        let mut offset = d0;
        for f in &fibers {
            fiber_offsets.push(offset);
            for c in f.metric.coords() {
                names.push(c.name.clone());
            }
            for i in 0..f.metric.dim() {
                intervals.push(f.metric.chart_box().interval(i));
            }
            offset += f.metric.dim();
        }
        {
            let mut sorted = names.clone();
            sorted.sort();
            sorted.dedup();
            if sorted.len() != names.len() {
                return Err(Error::InvalidInput(
                    "coordinate names must be unique across base and fibers".into(),
                ));
            }
        }
        let coords: Vec<CoordId> = names
            .iter()
            .enumerate()
            .map(|(i, n)| CoordId::new(i, n.clone()))
            .collect();
        let box_ = ChartBox::new(intervals)?;
        // rho_i > 0 on the sampled base box
        let base_pts = base.sample(cfg)?;
        for (i, f) in fibers.iter().enumerate() {
            for p in &base_pts {
                if f.rho.evaluate(p)? <= 0.0 {
                    return Err(Error::InvalidInput(format!(
                        "warping function {i} must be positive on the base box"
                    )));
                }
            }
        }
        let mut gii: Vec<Expr> = (0..d0).map(|i| base.component(i).clone()).collect();
        for (f, &off) in fibers.iter().zip(&fiber_offsets) {
            let rho2 = Expr::powi(f.rho.clone(), 2);
            let mut map: Vec<Option<CoordId>> = vec![None; f.metric.dim()];
            for local in 0..f.metric.dim() {
                map[local] = Some(coords[off + local].clone());
            }
            for local in 0..f.metric.dim() {
                gii.push(rho2.clone() * f.metric.component(local).reindex(&map)?);
            }
        }
        let assembled = OrthogonalMetric::new(coords, box_, gii, cfg)?;
        Ok(WarpedProductStructure {
            base,
            fibers,
            assembled,
            fiber_offsets,
        })
    }

    pub fn base(&self) -> &OrthogonalMetric {
        &self.base
    }

    pub fn base_dim(&self) -> usize {
        self.base.dim()
    }

    pub fn fibers(&self) -> &[Fiber] {
        &self.fibers
    }

    /// The assembled metric on the combined chart.
    pub fn assembled(&self) -> &OrthogonalMetric {
        &self.assembled
    }

    /// Global coordinate indices of fiber `i`.
    pub fn fiber_range(&self, i: usize) -> std::ops::Range<usize> {
        let start = self.fiber_offsets[i];
        start..start + self.fibers[i].metric.dim()
    }

    fn base_point(&self, p: &Point) -> Point {
        Point(p.0[..self.base.dim()].to_vec())
    }

    fn fiber_point(&self, i: usize, p: &Point) -> Point {
        Point(p.0[self.fiber_range(i)].to_vec())
    }

    /// ||grad rho_i||^2 on the base at p.
    fn grad_norm2(&self, i: usize, p: &Point) -> Result<f64> {
        let mut s = 0.0;
        for c in 0..self.base.dim() {
            let d = self.fibers[i]
                .rho
                .differentiate(&self.assembled.coords()[c])
                .evaluate(p)?;
            let g = self.base.component(c).evaluate(p)?;
            s += d * d / g;
        }
        Ok(s)
    }

    /// <grad log rho_i, grad log rho_k> on the base at p.
    fn grad_log_inner(&self, i: usize, k: usize, p: &Point) -> Result<f64> {
        let ri = self.fibers[i].rho.evaluate(p)?;
        let rk = self.fibers[k].rho.evaluate(p)?;
        let mut s = 0.0;
        for c in 0..self.base.dim() {
            let di = self.fibers[i]
                .rho
                .differentiate(&self.assembled.coords()[c])
                .evaluate(p)?;
            let dk = self.fibers[k]
                .rho
                .differentiate(&self.assembled.coords()[c])
                .evaluate(p)?;
            let g = self.base.component(c).evaluate(p)?;
            s += (di / ri) * (dk / rk) / g;
        }
        Ok(s)
    }
}

/// Hessian S^f_ij = d_i d_j f - Gamma^k_ij d_k f at a point.
pub fn hessian(f: &Expr, m: &OrthogonalMetric, p: &Point) -> Result<Vec<Vec<f64>>> {
    let n = m.dim();
    let gamma = m.christoffel(p)?;
    let df: Vec<f64> = (0..n)
        .map(|k| f.differentiate(&m.coords()[k]).evaluate(p))
        .collect::<Result<_>>()?;
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        let di = f.differentiate(&m.coords()[i]);
        for j in i..n {
            let mut v = di.differentiate(&m.coords()[j]).evaluate(p)?;
            for k in 0..n {
                v -= gamma.get(k, i, j) * df[k];
            }
            out[i][j] = v;
            out[j][i] = v;
        }
    }
    Ok(out)
}

/// The mean curvature normal of fiber `i`: the contravariant gradient of
/// -log rho_i, expressed on the assembled chart (nonzero along the base).
pub fn mean_curvature_normal(
    w: &WarpedProductStructure,
    fiber: usize,
    p: &Point,
) -> Result<Vec<f64>> {
    let n = w.assembled.dim();
    let rho = &w.fibers[fiber].rho;
    let r = rho.evaluate(p)?;
    if r <= 0.0 {
        return Err(Error::SingularEvaluation(
            "warping function not positive at the point".into(),
        ));
    }
    let mut out = vec![0.0; n];
    for c in 0..w.base.dim() {
        let d = rho.differentiate(&w.assembled.coords()[c]).evaluate(p)?;
        let g = w.base.component(c).evaluate(p)?;
        out[c] = -(d / r) / g;
    }
    Ok(out)
}

/// Compare the warped-product sectional-curvature formulas against the
/// general Riemann assembly on the assembled metric:
/// base-base planes match the base curvature; base-fiber planes match
/// -S^rho(X,X)/(rho ||X||^2); planes across two fibers match -<H_i, H_k>;
/// planes inside one fiber match (K_fiber - ||grad rho||^2)/rho^2.
/// Degenerate planes are skipped and counted.
pub fn check_warped_curvature_formulas(
    w: &WarpedProductStructure,
    cfg: &CheckConfig,
) -> Result<ConditionReport> {
    let d0 = w.base.dim();
    let n = w.assembled.dim();
    let nf = w.fibers.len();
    let mut indices: Vec<Vec<usize>> = Vec::new();
    let mut kinds: Vec<u8> = Vec::new();
    for a in 0..d0 {
        for b in (a + 1)..d0 {
            indices.push(vec![a, b]);
            kinds.push(1);
        }
    }
    for a in 0..d0 {
        for v in d0..n {
            indices.push(vec![a, v]);
            kinds.push(2);
        }
    }
    for i in 0..nf {
        for k in (i + 1)..nf {
            for u in w.fiber_range(i) {
                for v in w.fiber_range(k) {
                    indices.push(vec![u, v]);
                    kinds.push(7);
                }
            }
        }
    }
    for i in 0..nf {
        let r = w.fiber_range(i);
        for u in r.clone() {
            for v in r.clone() {
                if u < v {
                    indices.push(vec![u, v]);
                    kinds.push(9);
                }
            }
        }
    }
    let tuples = indices.clone();
    let mut acc = ResidualAccumulator::new(indices);
    let mut degenerate = 0usize;
    let points = w.assembled.sample(cfg)?;
    let used = over_samples(&points, |p| {
        let mut basis_x = vec![0.0; n];
        let mut basis_y = vec![0.0; n];
        for (t, (idx, kind)) in tuples.iter().zip(&kinds).enumerate() {
            let (a, b) = (idx[0], idx[1]);
            basis_x.iter_mut().for_each(|v| *v = 0.0);
            basis_y.iter_mut().for_each(|v| *v = 0.0);
            basis_x[a] = 1.0;
            basis_y[b] = 1.0;
            let direct = match w.assembled.sectional_curvature(p, &basis_x, &basis_y) {
                Ok(v) => v,
                Err(Error::DegeneratePlane) => {
                    degenerate += 1;
                    continue;
                }
                Err(e) => return Err(e),
            };
            let formula = match kind {
                1 => {
                    let bp = w.base_point(p);
                    let mut x = vec![0.0; d0];
                    let mut y = vec![0.0; d0];
                    x[a] = 1.0;
                    y[b] = 1.0;
                    match w.base.sectional_curvature(&bp, &x, &y) {
                        Ok(v) => v,
                        Err(Error::DegeneratePlane) => {
                            degenerate += 1;
                            continue;
                        }
                        Err(e) => return Err(e),
                    }
                }
                2 => {
                    let fi = fiber_of(w, b);
                    let s = hessian(&w.fibers[fi].rho, &w.assembled, p)?;
                    let rho = w.fibers[fi].rho.evaluate(p)?;
                    let gaa = w.base.component(a).evaluate(p)?;
                    -s[a][a] / (rho * gaa)
                }
                7 => {
                    let fi = fiber_of(w, a);
                    let fk = fiber_of(w, b);
                    -w.grad_log_inner(fi, fk, p)?
                }
                _ => {
                    let fi = fiber_of(w, a);
                    let fp = w.fiber_point(fi, p);
                    let off = w.fiber_offsets[fi];
                    let fdim = w.fibers[fi].metric.dim();
                    let mut x = vec![0.0; fdim];
                    let mut y = vec![0.0; fdim];
                    x[a - off] = 1.0;
                    y[b - off] = 1.0;
                    let kf = match w.fibers[fi].metric.sectional_curvature(&fp, &x, &y) {
                        Ok(v) => v,
                        Err(Error::DegeneratePlane) => {
                            degenerate += 1;
                            continue;
                        }
                        Err(e) => return Err(e),
                    };
                    let rho = w.fibers[fi].rho.evaluate(p)?;
                    (kf - w.grad_norm2(fi, p)?) / (rho * rho)
                }
            };
            acc.record(t, &[direct, -formula]);
        }
        Ok(())
    })?;
    let mut report =
        ConditionReport::from_tuples("warped_curvature_formulas", acc.finish(), used, cfg.tol);
    if degenerate > 0 {
        report.condition = format!("warped_curvature_formulas (skipped {degenerate} degenerate)");
    }
    Ok(report)
}

fn fiber_of(w: &WarpedProductStructure, global: usize) -> usize {
    (0..w.fibers.len())
        .find(|&i| w.fiber_range(i).contains(&global))
        .expect("global index inside some fiber")
}

/// The conditions a warped product must satisfy when the ambient space has
/// constant curvature kappa: S^{rho_i}(X,Y) + kappa rho_i <X,Y> = 0 on the
/// base, <grad log rho_i, grad log rho_k> = -kappa across fibers, and
/// constancy of the implied fiber curvature kappa_i = kappa rho_i^2 +
/// ||grad rho_i||^2.
pub fn check_constant_curvature_conditions(
    w: &WarpedProductStructure,
    kappa: f64,
    cfg: &CheckConfig,
) -> Result<ConditionReport> {
    let d0 = w.base.dim();
    let nf = w.fibers.len();
    let mut indices: Vec<Vec<usize>> = Vec::new();
    let mut kinds: Vec<u8> = Vec::new();
    for i in 0..nf {
        for a in 0..d0 {
            for b in a..d0 {
                indices.push(vec![i, a, b]);
                kinds.push(2);
            }
        }
    }
    for i in 0..nf {
        for k in (i + 1)..nf {
            indices.push(vec![i, k]);
            kinds.push(7);
        }
    }
    let fiber_kappa_start = indices.len();
    for i in 0..nf {
        indices.push(vec![i]);
        kinds.push(0);
    }
    let tuples = indices.clone();
    let mut acc = ResidualAccumulator::new(indices);
    let mut kappa_ranges: Vec<(f64, f64)> = vec![(f64::INFINITY, f64::NEG_INFINITY); nf];
    let points = w.assembled.sample(cfg)?;
    let used = over_samples(&points, |p| {
        for (t, (idx, kind)) in tuples.iter().zip(&kinds).enumerate() {
            match kind {
                2 => {
                    let (i, a, b) = (idx[0], idx[1], idx[2]);
                    let s = hessian(&w.fibers[i].rho, &w.assembled, p)?;
                    let rho = w.fibers[i].rho.evaluate(p)?;
                    let gab = if a == b {
                        w.base.component(a).evaluate(p)?
                    } else {
                        0.0
                    };
                    acc.record(t, &[s[a][b], kappa * rho * gab]);
                }
                7 => {
                    let (i, k) = (idx[0], idx[1]);
                    acc.record(t, &[w.grad_log_inner(i, k, p)?, kappa]);
                }
                _ => {
                    let i = idx[0];
                    let rho = w.fibers[i].rho.evaluate(p)?;
                    let ki = kappa * rho * rho + w.grad_norm2(i, p)?;
                    let r = &mut kappa_ranges[i];
                    r.0 = r.0.min(ki);
                    r.1 = r.1.max(ki);
                }
            }
        }
        Ok(())
    })?;
    let mut tuples_out = acc.finish();
    for (i, r) in kappa_ranges.iter().enumerate() {
        let spread = if r.1 >= r.0 { r.1 - r.0 } else { 0.0 };
        let scale = r.0.abs().max(r.1.abs());
        tuples_out[fiber_kappa_start + i] = TupleResidual {
            indices: vec![i],
            max_raw: spread,
            max_normalized: spread / (1.0 + scale),
        };
    }
    Ok(ConditionReport::from_tuples(
        "constant_curvature_conditions",
        tuples_out,
        used,
        cfg.tol,
    ))
}

/// Report of the one-dimensional-base computation, carrying the omega that
/// was supplied or fitted and the three residual families separately.
#[derive(Debug, Clone)]
pub struct KemBase1Report {
    pub omega: f64,
    /// d1^2 rho_i + omega rho_i, per fiber.
    pub second_deriv: ConditionReport,
    /// (d1 log rho_i)(d1 log rho_k) + omega, per fiber pair.
    pub cross: ConditionReport,
    /// (sigma_i'/sigma_k')' with sigma = rho^2, per ordered fiber pair.
    pub sigma_ratio: ConditionReport,
}

impl KemBase1Report {
    pub fn pass(&self) -> bool {
        self.second_deriv.pass && self.cross.pass && self.sigma_ratio.pass
    }
}

/// For a warped product with a one-dimensional base (g_base = eps dx_1^2,
/// |g_11| = 1): checks d1^2 rho_i + omega rho_i = 0, the cross terms
/// (d1 log rho_i)(d1 log rho_k) + omega = 0, and the concircular-form
/// witness (sigma_i'/sigma_k')' = 0 with sigma_i = rho_i^2. omega = kappa
/// eps is fitted by least squares from the second-derivative equation when
/// not supplied.
pub fn kem_base1_check(
    w: &WarpedProductStructure,
    omega: Option<f64>,
    cfg: &CheckConfig,
) -> Result<KemBase1Report> {
    if w.base.dim() != 1 {
        return Err(Error::InvalidInput(
            "kem_base1_check needs a one-dimensional base".into(),
        ));
    }
    let x1 = &w.assembled.coords()[0];
    let points = w.assembled.sample(cfg)?;
    // the computation is written in the unit parametrization of the base
    for p in &points {
        let g = w.base.component(0).evaluate(p)?;
        if (g.abs() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(
                "kem_base1_check expects a unit base metric (|g_11| = 1)".into(),
            ));
        }
    }
    let nf = w.fibers.len();
    let d2rho: Vec<Expr> = w
        .fibers
        .iter()
        .map(|f| f.rho.differentiate(x1).differentiate(x1))
        .collect();
    let omega = match omega {
        Some(v) => v,
        None => {
            // least squares over rho'' = -omega rho
            let mut num = 0.0;
            let mut den = 0.0;
            for p in &points {
                for (f, d2) in w.fibers.iter().zip(&d2rho) {
                    let rho = f.rho.evaluate(p)?;
                    num += d2.evaluate(p)? * rho;
                    den += rho * rho;
                }
            }
            -num / den
        }
    };

    let second_idx: Vec<Vec<usize>> = (0..nf).map(|i| vec![i]).collect();
    let mut cross_idx: Vec<Vec<usize>> = Vec::new();
    for i in 0..nf {
        for k in (i + 1)..nf {
            cross_idx.push(vec![i, k]);
        }
    }
    // ratio condition (sigma_i'/sigma_k')' = 0, whenever sigma_k' does not
    // vanish identically; evaluated with singular points skipped
    let sigma_primes: Vec<Expr> = w
        .fibers
        .iter()
        .map(|f| Expr::powi(f.rho.clone(), 2).differentiate(x1))
        .collect();
    let mut ratio_idx: Vec<Vec<usize>> = Vec::new();
    let mut ratio_exprs: Vec<Expr> = Vec::new();
    for i in 0..nf {
        for k in 0..nf {
            if i != k && !sigma_primes[k].is_zero_const() {
                let ratio = sigma_primes[i].clone() / sigma_primes[k].clone();
                ratio_exprs.push(ratio.differentiate(x1));
                ratio_idx.push(vec![i, k]);
            }
        }
    }
    let mut second_acc = ResidualAccumulator::new(second_idx);
    let mut cross_acc = ResidualAccumulator::new(cross_idx.clone());
    let mut ratio_acc = ResidualAccumulator::new(ratio_idx);
    let mut ratio_skips = vec![0usize; ratio_exprs.len()];
    let used = over_samples(&points, |p| {
        for i in 0..nf {
            let rho = w.fibers[i].rho.evaluate(p)?;
            second_acc.record(i, &[d2rho[i].evaluate(p)?, omega * rho]);
        }
        for (t, idx) in cross_idx.iter().enumerate() {
            let (i, k) = (idx[0], idx[1]);
            let li =
                w.fibers[i].rho.differentiate(x1).evaluate(p)? / w.fibers[i].rho.evaluate(p)?;
            let lk =
                w.fibers[k].rho.differentiate(x1).evaluate(p)? / w.fibers[k].rho.evaluate(p)?;
            cross_acc.record(t, &[li * lk, omega]);
        }
        for (t, e) in ratio_exprs.iter().enumerate() {
            match e.evaluate(p) {
                Ok(v) => ratio_acc.record(t, &[v]),
                Err(Error::SingularEvaluation(_)) => ratio_skips[t] += 1,
                Err(err) => return Err(err),
            }
        }
        Ok(())
    })?;
    if let Some(&skips) = ratio_skips.iter().max() {
        if skips * 2 > points.len() {
            return Err(Error::InsufficientSamples {
                requested: points.len(),
                valid: points.len().saturating_sub(skips),
            });
        }
    }
    Ok(KemBase1Report {
        omega,
        second_deriv: ConditionReport::from_tuples(
            "kem_base1_second_deriv",
            second_acc.finish(),
            used,
            cfg.tol,
        ),
        cross: ConditionReport::from_tuples("kem_base1_cross", cross_acc.finish(), used, cfg.tol),
        sigma_ratio: ConditionReport::from_tuples(
            "kem_base1_sigma_ratio",
            ratio_acc.finish(),
            used,
            cfg.tol,
        ),
    })
}
