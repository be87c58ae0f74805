//! Coordinate charts, sample boxes and the deterministic point sampler.
//!
//! Every sampled decision in the library (constancy tests, condition checks,
//! curvature estimates) draws its points from the Halton low-discrepancy
//! sequence over a [`ChartBox`], so identical inputs plus an identical seed
//! always produce identical results.

use crate::error::{Error, Result};

/// A named coordinate of a chart. The index is the position in the chart's
/// coordinate list and is what expressions and points are keyed on.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CoordId {
    pub index: usize,
    pub name: String,
}

impl CoordId {
    pub fn new(index: usize, name: impl Into<String>) -> Self {
        CoordId {
            index,
            name: name.into(),
        }
    }
}

impl std::fmt::Display for CoordId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.name)
    }
}

/// Build a coordinate list from names. Names must be distinct.
pub fn coords(names: &[&str]) -> Vec<CoordId> {
    names
        .iter()
        .enumerate()
        .map(|(i, n)| CoordId::new(i, *n))
        .collect()
}

/// Per-coordinate closed intervals with nonempty interior; the sampling
/// domain for every box-based decision.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartBox {
    intervals: Vec<(f64, f64)>,
}

impl ChartBox {
    pub fn new(intervals: Vec<(f64, f64)>) -> Result<Self> {
        for (i, &(lo, hi)) in intervals.iter().enumerate() {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "box interval {i} must satisfy lo < hi, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(ChartBox { intervals })
    }

    pub fn dim(&self) -> usize {
        self.intervals.len()
    }

    pub fn interval(&self, i: usize) -> (f64, f64) {
        self.intervals[i]
    }

    pub fn center(&self) -> Point {
        Point(
            self.intervals
                .iter()
                .map(|&(lo, hi)| 0.5 * (lo + hi))
                .collect(),
        )
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.0.len() == self.dim()
            && p.0
                .iter()
                .zip(&self.intervals)
                .all(|(&x, &(lo, hi))| x >= lo && x <= hi)
    }

    /// The sub-box spanned by the given coordinate indices, in that order.
    pub fn restrict(&self, keep: &[usize]) -> ChartBox {
        ChartBox {
            intervals: keep.iter().map(|&i| self.intervals[i]).collect(),
        }
    }
}

/// A concrete evaluation point: one real value per coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(pub Vec<f64>);

impl Point {
    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

impl std::ops::Index<usize> for Point {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Knobs shared by every sampled check: sample count, tolerance, and the
/// seed that offsets the Halton sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckConfig {
    pub samples: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            samples: 50,
            tol: 1e-8,
            seed: 0,
        }
    }
}

/// Tolerance used when deciding whether a sampled derivative is identically
/// zero (sigma' = 0 decisions). Deliberately much tighter than the condition
/// tolerance: exact identities evaluate near machine epsilon while genuine
/// dependence shows up many orders of magnitude above this.
pub const CONSTANCY_TOL: f64 = 1e-12;

impl CheckConfig {
    pub fn new(samples: usize, tol: f64, seed: u64) -> Self {
        CheckConfig { samples, tol, seed }
    }

    /// The same sampling plan with the constancy tolerance.
    pub fn constancy(&self) -> Self {
        CheckConfig {
            tol: CONSTANCY_TOL,
            ..*self
        }
    }
}

const HALTON_PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Radical-inverse of `index` in the given base (van der Corput).
fn radical_inverse(base: u64, mut index: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut x = 0.0;
    while index > 0 {
        x += f * (index % base) as f64;
        index /= base;
        f *= inv;
    }
    x
}

/// The `index`-th Halton point mapped into the box. Index 0 is reserved
/// (it maps to the box corner), so callers start at 1.
pub fn halton_point(box_: &ChartBox, index: u64) -> Point {
    Point(
        (0..box_.dim())
            .map(|d| {
                let (lo, hi) = box_.interval(d);
                let u = radical_inverse(HALTON_PRIMES[d % HALTON_PRIMES.len()], index);
                lo + (hi - lo) * u
            })
            .collect(),
    )
}

/// Collect `cfg.samples` points accepted by `valid`, drawing from the Halton
/// sequence offset by the seed. Rejected (singular) points are replaced by
/// later sequence points; once the rejections exceed the requested count the
/// draw is abandoned with `InsufficientSamples`.
pub fn sample_points(
    box_: &ChartBox,
    cfg: &CheckConfig,
    mut valid: impl FnMut(&Point) -> bool,
) -> Result<Vec<Point>> {
    let mut points = Vec::with_capacity(cfg.samples);
    let mut skipped = 0usize;
    let mut index = 1 + cfg.seed.wrapping_mul(0x9e37_79b9);
    while points.len() < cfg.samples {
        if skipped > cfg.samples {
            return Err(Error::InsufficientSamples {
                requested: cfg.samples,
                valid: points.len(),
            });
        }
        let p = halton_point(box_, index);
        index = index.wrapping_add(1);
        if valid(&p) {
            points.push(p);
        } else {
            skipped += 1;
        }
    }
    Ok(points)
}
