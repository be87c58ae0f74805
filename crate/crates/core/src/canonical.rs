//! Constructors for the canonical separable families — irreducible, product,
//! warped product, irregular — and for the general metric induced by
//! concircular data:
//!
//!   g = sum_a Phi_a prod_{b != a} (sigma_a - sigma_b) dx_a^2
//!     + sum_I ( prod_a (e_I - sigma_a) ) g^I.
//!
//! Outputs are sigma webs in canonical gauge. The simple-part Phi arguments
//! follow the displayed form above, i.e. H_a^2 = Phi_a prod (sigma_a -
//! sigma_b) exactly; the constructor absorbs the sign bookkeeping and the
//! (e_I - sigma_a) factors into the stored Phi functions.

use crate::chart::{halton_point, ChartBox, CheckConfig, CoordId};
use crate::error::{Error, Result};
use crate::expr::{depends_on, Expr};
use crate::web::SigmaWeb;

/// One connecting coordinate of the simple part, described on its own
/// 1-dimensional chart (variable index 0).
#[derive(Debug, Clone)]
pub struct SimpleCoordSpec {
    pub name: String,
    pub interval: (f64, f64),
    pub sigma: Expr,
    pub phi: Expr,
    pub sign: f64,
}

impl SimpleCoordSpec {
    pub fn new(
        name: impl Into<String>,
        interval: (f64, f64),
        sigma: Expr,
        phi: Expr,
        sign: f64,
    ) -> Self {
        SimpleCoordSpec {
            name: name.into(),
            interval,
            sigma,
            phi,
            sign,
        }
    }
}

/// A constant-eigenvalue block: the constant e_I and the block's own web.
#[derive(Debug, Clone)]
pub struct BlockSpec {
    pub e: f64,
    pub web: SigmaWeb,
}

/// Data inducing a canonical concircular tensor: simple eigenfunctions
/// sigma_a on M and constant-eigenvalue blocks with pairwise distinct e_I.
#[derive(Debug, Clone)]
pub struct SCKTData {
    pub simple: Vec<SimpleCoordSpec>,
    pub blocks: Vec<BlockSpec>,
}

/// The global chart layout shared by `sckt_metric` and the concircular
/// tensor builder: simple coordinates first, then the blocks in order.
pub(crate) struct ScktLayout {
    pub coords: Vec<CoordId>,
    pub box_: ChartBox,
    /// sigma_a reindexed to the global chart, one per simple coordinate.
    pub sigmas: Vec<Expr>,
    /// (e_I, global indices of the block members)
    pub blocks: Vec<(f64, Vec<usize>)>,
    /// sampled value range of each sigma_a on its interval
    pub ranges: Vec<(f64, f64)>,
}

fn sampled_range(e: &Expr, interval: (f64, f64), samples: usize) -> Result<(f64, f64)> {
    let box1 = ChartBox::new(vec![interval])?;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for idx in 1..=(samples as u64) {
        let v = e.evaluate(&halton_point(&box1, idx))?;
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let c = e.evaluate(&box1.center())?;
    Ok((lo.min(c), hi.max(c)))
}

pub(crate) fn sckt_layout(d: &SCKTData, cfg: &CheckConfig) -> Result<ScktLayout> {
    let m = d.simple.len();
    if m == 0 && d.blocks.is_empty() {
        return Err(Error::InvalidInput("sckt data is empty".into()));
    }
    let mut names: Vec<String> = d.simple.iter().map(|s| s.name.clone()).collect();
    let mut intervals: Vec<(f64, f64)> = d.simple.iter().map(|s| s.interval).collect();
    let mut blocks = Vec::with_capacity(d.blocks.len());
    let mut offset = m;
    for b in &d.blocks {
        let ids: Vec<usize> = (offset..offset + b.web.dim()).collect();
        for c in b.web.coords() {
            names.push(c.name.clone());
        }
        for i in 0..b.web.dim() {
            intervals.push(b.web.chart_box().interval(i));
        }
        offset += b.web.dim();
        blocks.push((b.e, ids));
    }
    {
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != names.len() {
            return Err(Error::InvalidInput(
                "coordinate names must be unique across the simple part and the blocks".into(),
            ));
        }
    }
    let coords: Vec<CoordId> = names
        .iter()
        .enumerate()
        .map(|(i, n)| CoordId::new(i, n.clone()))
        .collect();
    let box_ = ChartBox::new(intervals)?;

    // sigma_a must be non-constant; ranges strictly decreasing so that every
    // sigma_a - sigma_b and e_I - sigma_a keeps a fixed sign on the box.
    let mut sigmas = Vec::with_capacity(m);
    let mut ranges = Vec::with_capacity(m);
    for (a, s) in d.simple.iter().enumerate() {
        let local = CoordId::new(0, s.name.clone());
        let box1 = ChartBox::new(vec![s.interval])?;
        if !depends_on(&s.sigma, &local, &box1, &cfg.constancy())? {
            return Err(Error::InvalidInput(format!(
                "sigma_{} must be non-constant",
                s.name
            )));
        }
        ranges.push(sampled_range(&s.sigma, s.interval, cfg.samples)?);
        let mut map: Vec<Option<CoordId>> = vec![None];
        map[0] = Some(coords[a].clone());
        sigmas.push(s.sigma.reindex(&map)?);
    }
    for a in 1..m {
        if !(ranges[a - 1].0 > ranges[a].1) {
            return Err(Error::InvalidInput(format!(
                "sigma functions must be strictly separated in decreasing order: \
                 range of sigma_{} [{:.6}, {:.6}] does not lie above sigma_{} [{:.6}, {:.6}]",
                d.simple[a - 1].name,
                ranges[a - 1].0,
                ranges[a - 1].1,
                d.simple[a].name,
                ranges[a].0,
                ranges[a].1
            )));
        }
    }
    for (bi, b) in d.blocks.iter().enumerate() {
        for (bj, b2) in d.blocks.iter().enumerate() {
            if bi < bj && (b.e - b2.e).abs() <= cfg.tol * (1.0 + b.e.abs()) {
                return Err(Error::DuplicateE(b.e));
            }
        }
        for (a, r) in ranges.iter().enumerate() {
            if b.e >= r.0 && b.e <= r.1 {
                return Err(Error::VanishingFactor(format!(
                    "e = {} meets the range of sigma_{}",
                    b.e, d.simple[a].name
                )));
            }
        }
    }
    Ok(ScktLayout {
        coords,
        box_,
        sigmas,
        blocks,
        ranges,
    })
}

/// Assemble the web induced by concircular data. Degenerates to the product
/// family when the simple part is empty, to the irreducible family when
/// there are no blocks, and covers the warped-product and m = 1 forms
/// otherwise.
pub fn sckt_metric(d: &SCKTData, cfg: &CheckConfig) -> Result<SigmaWeb> {
    let layout = sckt_layout(d, cfg)?;
    let m = d.simple.len();
    let n = layout.coords.len();
    let mut sigma = vec![vec![Expr::zero(); n]; n];
    let mut phi = vec![Expr::zero(); n];
    let mut signs = vec![0.0; n];

    // simple-simple pairs: F_ab = sigma_a - sigma_b for a < b
    for a in 0..m {
        for b in 0..m {
            if a < b {
                sigma[a][b] = layout.sigmas[a].clone();
            } else if a > b {
                sigma[a][b] = Expr::neg(layout.sigmas[a].clone());
            }
        }
    }
    // simple-block pairs: F_{a alpha} = e_I - sigma_a
    for (e, members) in &layout.blocks {
        for &alpha in members {
            for a in 0..m {
                sigma[a][alpha] = Expr::neg(layout.sigmas[a].clone());
                sigma[alpha][a] = Expr::constant(*e);
            }
        }
    }
    // block-internal sigmas and phis, reindexed into the global chart
    for ((e, members), spec) in layout.blocks.iter().zip(&d.blocks) {
        let mut map: Vec<Option<CoordId>> = vec![None; spec.web.dim()];
        for (local, &global) in members.iter().enumerate() {
            map[local] = Some(layout.coords[global].clone());
        }
        // the block scale prod_a (e_I - sigma_a) has a fixed sign on the box;
        // a negative scale flips the block's effective signature
        let mut scale_sign = 1.0;
        for r in &layout.ranges {
            scale_sign *= if *e > r.1 { 1.0 } else { -1.0 };
        }
        for (local, &global) in members.iter().enumerate() {
            let mut p = spec.web.phi(local).reindex(&map)?;
            let mut s = spec.web.signs()[local];
            if scale_sign < 0.0 {
                p = Expr::neg(p);
                s = -s;
            }
            phi[global] = p;
            signs[global] = s;
            for (local2, &global2) in members.iter().enumerate() {
                if local != local2 {
                    sigma[global][global2] = spec.web.sigma(local, local2).reindex(&map)?;
                }
            }
        }
    }
    // simple-part phis: paper form divided by the absorbed block factors,
    // with the pair-ordering sign fix
    for (a, spec) in d.simple.iter().enumerate() {
        let mut map: Vec<Option<CoordId>> = vec![None];
        map[0] = Some(layout.coords[a].clone());
        let mut p = spec.phi.reindex(&map)?;
        if a % 2 == 1 {
            p = Expr::neg(p);
        }
        for (e, members) in &layout.blocks {
            let factor = Expr::powi(
                Expr::constant(*e) - layout.sigmas[a].clone(),
                members.len() as i32,
            );
            p = p / factor;
        }
        phi[a] = p;
        signs[a] = spec.sign;
    }

    SigmaWeb::new(layout.coords, layout.box_, signs, phi, sigma, cfg)
}

/// Eisenhart's irreducible family: H_a^2 = Phi_a prod_{b != a} (sigma_a -
/// sigma_b). The sigma ranges must be strictly separated in the given order
/// and the Phi signs chosen so every H_a^2 is positive.
pub fn irreducible_metric(simple: Vec<SimpleCoordSpec>, cfg: &CheckConfig) -> Result<SigmaWeb> {
    if simple.len() < 2 {
        return Err(Error::InvalidInput(
            "irreducible_metric needs at least two coordinates".into(),
        ));
    }
    sckt_metric(
        &SCKTData {
            simple,
            blocks: Vec::new(),
        },
        cfg,
    )
}

/// Product of webs on disjoint coordinates: all cross-pair sigmas are zero.
pub fn product_metric(blocks: &[SigmaWeb], cfg: &CheckConfig) -> Result<SigmaWeb> {
    if blocks.is_empty() {
        return Err(Error::InvalidInput("product_metric needs blocks".into()));
    }
    let mut names = Vec::new();
    let mut intervals = Vec::new();
    let mut signs = Vec::new();
    for b in blocks {
        for c in b.coords() {
            names.push(c.name.clone());
        }
        for i in 0..b.dim() {
            intervals.push(b.chart_box().interval(i));
            signs.push(b.signs()[i]);
        }
    }
    {
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != names.len() {
            return Err(Error::InvalidInput(
                "product blocks must use distinct coordinate names".into(),
            ));
        }
    }
    let n = names.len();
    let coords: Vec<CoordId> = names
        .iter()
        .enumerate()
        .map(|(i, n)| CoordId::new(i, n.clone()))
        .collect();
    let mut sigma = vec![vec![Expr::zero(); n]; n];
    let mut phi = vec![Expr::zero(); n];
    let mut offset = 0;
    for b in blocks {
        let mut map: Vec<Option<CoordId>> = vec![None; b.dim()];
        for local in 0..b.dim() {
            map[local] = Some(coords[offset + local].clone());
        }
        for local in 0..b.dim() {
            phi[offset + local] = b.phi(local).reindex(&map)?;
            for local2 in 0..b.dim() {
                if local != local2 {
                    sigma[offset + local][offset + local2] =
                        b.sigma(local, local2).reindex(&map)?;
                }
            }
        }
        offset += b.dim();
    }
    SigmaWeb::new(coords, ChartBox::new(intervals)?, signs, phi, sigma, cfg)
}

/// The warped-product family: simple part of size m >= 2 plus at least one
/// block, H_a^2 = Phi_a prod_{b <= m} (sigma_a - sigma_b) and block scale
/// prod_a (e_I - sigma_a).
pub fn warped_product_metric(
    simple: Vec<SimpleCoordSpec>,
    blocks: Vec<BlockSpec>,
    cfg: &CheckConfig,
) -> Result<SigmaWeb> {
    if simple.len() < 2 {
        return Err(Error::InvalidInput(
            "warped_product_metric needs m >= 2 connecting coordinates".into(),
        ));
    }
    if blocks.is_empty() {
        return Err(Error::InvalidInput(
            "warped_product_metric needs at least one block".into(),
        ));
    }
    sckt_metric(&SCKTData { simple, blocks }, cfg)
}

/// The base coordinate of an irregular metric.
#[derive(Debug, Clone)]
pub struct IrregularBase {
    pub name: String,
    pub interval: (f64, f64),
    pub phi: Expr,
    pub sign: f64,
}

/// One block of an irregular metric: the block function sigma_1^I (over the
/// base's 1-dimensional chart) and the block web.
#[derive(Debug, Clone)]
pub struct IrregularBlockSpec {
    pub sigma1: Expr,
    pub web: SigmaWeb,
}

/// The irregular m = 1 family: g = Phi_1 dx_1^2 + sum_I sigma_1^I g^I with
/// each sigma_1^I non-constant and of fixed sign on the base interval.
/// Unlike the warped family the block functions are arbitrary, so the result
/// need not admit a concircular tensor.
pub fn irregular_metric(
    base: IrregularBase,
    blocks: Vec<IrregularBlockSpec>,
    cfg: &CheckConfig,
) -> Result<SigmaWeb> {
    if blocks.is_empty() {
        return Err(Error::InvalidInput("irregular_metric needs blocks".into()));
    }
    let local = CoordId::new(0, base.name.clone());
    let box1 = ChartBox::new(vec![base.interval])?;
    let mut block_signs = Vec::with_capacity(blocks.len());
    for (i, b) in blocks.iter().enumerate() {
        if !depends_on(&b.sigma1, &local, &box1, &cfg.constancy())? {
            return Err(Error::InvalidInput(format!(
                "block function {i} must be non-constant on the base interval"
            )));
        }
        let (lo, hi) = sampled_range(&b.sigma1, base.interval, cfg.samples)?;
        if lo <= 0.0 && hi >= 0.0 {
            return Err(Error::VanishingFactor(format!(
                "block function {i} changes sign or vanishes on the base interval"
            )));
        }
        block_signs.push(if lo > 0.0 { 1.0 } else { -1.0 });
    }

    let mut names = vec![base.name.clone()];
    let mut intervals = vec![base.interval];
    for b in &blocks {
        for c in b.web.coords() {
            names.push(c.name.clone());
        }
        for i in 0..b.web.dim() {
            intervals.push(b.web.chart_box().interval(i));
        }
    }
    {
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != names.len() {
            return Err(Error::InvalidInput(
                "coordinate names must be unique across the base and the blocks".into(),
            ));
        }
    }
    let n = names.len();
    let coords: Vec<CoordId> = names
        .iter()
        .enumerate()
        .map(|(i, n)| CoordId::new(i, n.clone()))
        .collect();
    let mut sigma = vec![vec![Expr::zero(); n]; n];
    let mut phi = vec![Expr::zero(); n];
    let mut signs = vec![0.0; n];

    let base_map: Vec<Option<CoordId>> = vec![Some(coords[0].clone())];
    let mut phi1 = base.phi.reindex(&base_map)?;
    signs[0] = base.sign;

    let mut offset = 1;
    for (bi, b) in blocks.iter().enumerate() {
        let sigma1 = b.sigma1.reindex(&base_map)?;
        let members: Vec<usize> = (offset..offset + b.web.dim()).collect();
        phi1 = phi1 / Expr::powi(sigma1.clone(), members.len() as i32);
        let mut map: Vec<Option<CoordId>> = vec![None; b.web.dim()];
        for (local, &global) in members.iter().enumerate() {
            map[local] = Some(coords[global].clone());
        }
        for (local, &global) in members.iter().enumerate() {
            sigma[0][global] = sigma1.clone();
            let mut p = b.web.phi(local).reindex(&map)?;
            let mut s = b.web.signs()[local];
            if block_signs[bi] < 0.0 {
                p = Expr::neg(p);
                s = -s;
            }
            phi[global] = p;
            signs[global] = s;
            for (local2, &global2) in members.iter().enumerate() {
                if local != local2 {
                    sigma[global][global2] = b.web.sigma(local, local2).reindex(&map)?;
                }
            }
        }
        offset += b.web.dim();
    }
    phi[0] = phi1;
    SigmaWeb::new(coords, ChartBox::new(intervals)?, signs, phi, sigma, cfg)
}

/// A one-coordinate web: the building block for product and block inputs.
pub fn line_web(
    name: impl Into<String>,
    interval: (f64, f64),
    phi: Expr,
    sign: f64,
    cfg: &CheckConfig,
) -> Result<SigmaWeb> {
    let name = name.into();
    let coords = vec![CoordId::new(0, name)];
    SigmaWeb::new(
        coords,
        ChartBox::new(vec![interval])?,
        vec![sign],
        vec![phi],
        vec![vec![Expr::zero()]],
        cfg,
    )
}
