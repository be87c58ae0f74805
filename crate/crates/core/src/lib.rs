//! Symbolic-numeric machinery for orthogonal separable webs with diagonal
//! curvature: a small exact-differentiation expression kernel, curvature of
//! diagonal metrics, the Levi-Civita and diagonal-curvature checks, the
//! sigma-decomposition of separable webs, their classification into the
//! canonical families, concircular/Killing tensor verification, and the
//! warped-product constant-curvature conditions.

pub mod canonical;
pub mod chart;
pub mod classify;
pub mod concircular;
pub mod constcurv;
pub mod corpus;
pub mod dsl;
pub mod error;
pub mod expr;
pub mod json;
pub mod metric;
pub mod report;
pub mod separability;
pub mod web;

pub use chart::{coords, ChartBox, CheckConfig, CoordId, Point};
pub use error::{Error, Result};
pub use expr::Expr;
pub use metric::OrthogonalMetric;
pub use web::SigmaWeb;
