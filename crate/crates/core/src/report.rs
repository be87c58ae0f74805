//! Report assembly and serialization. JSON output is versioned
//! ("schema": "kemweb/1"), has a stable field order, prints floats with 17
//! significant digits, and is byte-identical for identical inputs and seeds.

use sha2::{Digest, Sha256};

use crate::classify::{ClassificationNode, ClassificationTree};
use crate::json::JsonValue;
use crate::separability::ConditionReport;
use crate::web::ResidualReport;

pub const SCHEMA: &str = "kemweb/1";

/// Everything a CLI run wants to tell the caller.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub command: String,
    pub input_digest: String,
    pub samples: usize,
    pub tol: f64,
    pub seed: u64,
    pub conditions: Vec<ConditionReport>,
    pub residuals: Option<ResidualReport>,
    pub classification: Option<ClassificationTree>,
    pub curvature: Option<CurvatureSummary>,
    pub pass: Option<bool>,
}

/// Pointwise curvature data for the `curvature` command.
#[derive(Debug, Clone, Default)]
pub struct CurvatureSummary {
    pub coord_names: Vec<String>,
    pub point: Vec<f64>,
    /// nonzero Gamma^i_{jk} with j <= k
    pub christoffel: Vec<(usize, usize, usize, f64)>,
    /// independent nonzero R_ijkl (i < j, k < l, (i,j) <= (k,l))
    pub riemann: Vec<(usize, usize, usize, usize, f64)>,
    /// sectional curvatures of the coordinate planes
    pub sectional: Vec<(usize, usize, f64)>,
    pub kappa: Option<f64>,
}

/// Hex SHA-256 of the input text, recorded in every report.
pub fn input_digest(text: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    let out = hasher.finalize();
    out.iter().map(|b| format!("{b:02x}")).collect()
}

fn condition_json(c: &ConditionReport) -> JsonValue {
    let tuples = c
        .tuples
        .iter()
        .map(|t| {
            JsonValue::obj()
                .with(
                    "indices",
                    JsonValue::Arr(t.indices.iter().map(|&i| JsonValue::Int(i as i64)).collect()),
                )
                .with("max_raw", JsonValue::Num(t.max_raw))
                .with("max_normalized", JsonValue::Num(t.max_normalized))
        })
        .collect();
    JsonValue::obj()
        .with("condition", JsonValue::str(&c.condition))
        .with("pass", JsonValue::Bool(c.pass))
        .with("max_raw", JsonValue::Num(c.max_raw))
        .with("max_normalized", JsonValue::Num(c.max_normalized))
        .with("samples_used", JsonValue::Int(c.samples_used as i64))
        .with("tolerance", JsonValue::Num(c.tolerance))
        .with("tuples", JsonValue::Arr(tuples))
}

fn residuals_json(r: &ResidualReport) -> JsonValue {
    let triples = r
        .triples
        .iter()
        .map(|t| {
            let stat = |s: &crate::web::ResidualStat| {
                JsonValue::obj()
                    .with("max_raw", JsonValue::Num(s.max_raw))
                    .with("max_normalized", JsonValue::Num(s.max_normalized))
            };
            JsonValue::obj()
                .with(
                    "indices",
                    JsonValue::Arr(t.indices.iter().map(|&i| JsonValue::Int(i as i64)).collect()),
                )
                .with("remain_a", stat(&t.remain[0]))
                .with("remain_b", stat(&t.remain[1]))
                .with("remain_c", stat(&t.remain[2]))
                .with("det", stat(&t.det))
        })
        .collect();
    JsonValue::obj()
        .with("pass", JsonValue::Bool(r.pass))
        .with("max_raw", JsonValue::Num(r.max_raw))
        .with("max_normalized", JsonValue::Num(r.max_normalized))
        .with("samples_used", JsonValue::Int(r.samples_used as i64))
        .with("tolerance", JsonValue::Num(r.tolerance))
        .with("triples", JsonValue::Arr(triples))
}

fn node_json(node: &ClassificationNode) -> JsonValue {
    let names = |coords: &[crate::chart::CoordId]| {
        JsonValue::Arr(coords.iter().map(|c| JsonValue::str(&c.name)).collect())
    };
    match node {
        ClassificationNode::Irreducible { coords } => JsonValue::obj()
            .with("kind", JsonValue::str("irreducible"))
            .with("coords", names(coords)),
        ClassificationNode::Leaf { coords } => JsonValue::obj()
            .with("kind", JsonValue::str("leaf"))
            .with("coords", names(coords)),
        ClassificationNode::Product { children } => JsonValue::obj()
            .with("kind", JsonValue::str("product"))
            .with(
                "children",
                JsonValue::Arr(children.iter().map(node_json).collect()),
            ),
        ClassificationNode::WarpedProduct { base, blocks } => JsonValue::obj()
            .with("kind", JsonValue::str("warped_product"))
            .with("base", names(base))
            .with(
                "blocks",
                JsonValue::Arr(
                    blocks
                        .iter()
                        .map(|b| {
                            JsonValue::obj()
                                .with("e", JsonValue::Num(b.e))
                                .with("child", node_json(&b.child))
                        })
                        .collect(),
                ),
            ),
        ClassificationNode::IrregularM1 {
            base,
            blocks,
            concircular_compatible,
        } => JsonValue::obj()
            .with("kind", JsonValue::str("irregular_m1"))
            .with("base", JsonValue::str(&base.name))
            .with(
                "concircular_compatible",
                JsonValue::Bool(*concircular_compatible),
            )
            .with(
                "blocks",
                JsonValue::Arr(
                    blocks
                        .iter()
                        .map(|b| {
                            JsonValue::obj()
                                .with("sigma1", JsonValue::str(b.sigma1.to_string()))
                                .with("child", node_json(&b.child))
                        })
                        .collect(),
                ),
            ),
    }
}

fn classification_json(t: &ClassificationTree) -> JsonValue {
    let diag = t
        .diagnostics
        .iter()
        .map(|d| {
            JsonValue::obj()
                .with("path", JsonValue::str(&d.path))
                .with(
                    "residuals",
                    match &d.residuals {
                        Some(r) => residuals_json(r),
                        None => JsonValue::Null,
                    },
                )
        })
        .collect();
    JsonValue::obj()
        .with("tree", node_json(&t.root))
        .with("diagnostics", JsonValue::Arr(diag))
}

fn curvature_json(c: &CurvatureSummary) -> JsonValue {
    JsonValue::obj()
        .with(
            "coords",
            JsonValue::Arr(c.coord_names.iter().map(JsonValue::str).collect()),
        )
        .with(
            "point",
            JsonValue::Arr(c.point.iter().map(|&v| JsonValue::Num(v)).collect()),
        )
        .with(
            "christoffel",
            JsonValue::Arr(
                c.christoffel
                    .iter()
                    .map(|&(i, j, k, v)| {
                        JsonValue::obj()
                            .with(
                                "indices",
                                JsonValue::Arr(vec![
                                    JsonValue::Int(i as i64),
                                    JsonValue::Int(j as i64),
                                    JsonValue::Int(k as i64),
                                ]),
                            )
                            .with("value", JsonValue::Num(v))
                    })
                    .collect(),
            ),
        )
        .with(
            "riemann",
            JsonValue::Arr(
                c.riemann
                    .iter()
                    .map(|&(i, j, k, l, v)| {
                        JsonValue::obj()
                            .with(
                                "indices",
                                JsonValue::Arr(vec![
                                    JsonValue::Int(i as i64),
                                    JsonValue::Int(j as i64),
                                    JsonValue::Int(k as i64),
                                    JsonValue::Int(l as i64),
                                ]),
                            )
                            .with("value", JsonValue::Num(v))
                    })
                    .collect(),
            ),
        )
        .with(
            "sectional",
            JsonValue::Arr(
                c.sectional
                    .iter()
                    .map(|&(i, j, v)| {
                        JsonValue::obj()
                            .with(
                                "plane",
                                JsonValue::Arr(vec![
                                    JsonValue::Int(i as i64),
                                    JsonValue::Int(j as i64),
                                ]),
                            )
                            .with("value", JsonValue::Num(v))
                    })
                    .collect(),
            ),
        )
        .with(
            "constant_curvature",
            match c.kappa {
                Some(k) => JsonValue::Num(k),
                None => JsonValue::Null,
            },
        )
}

impl Report {
    pub fn to_json(&self) -> JsonValue {
        let mut root = JsonValue::obj()
            .with("schema", JsonValue::str(SCHEMA))
            .with("version", JsonValue::str(env!("CARGO_PKG_VERSION")))
            .with("command", JsonValue::str(&self.command))
            .with("input_digest", JsonValue::str(&self.input_digest))
            .with("samples", JsonValue::Int(self.samples as i64))
            .with("tol", JsonValue::Num(self.tol))
            .with("seed", JsonValue::Int(self.seed as i64));
        match self.pass {
            Some(p) => root.push("pass", JsonValue::Bool(p)),
            None => root.push("pass", JsonValue::Null),
        }
        root.push(
            "conditions",
            JsonValue::Arr(self.conditions.iter().map(condition_json).collect()),
        );
        root.push(
            "residuals",
            match &self.residuals {
                Some(r) => residuals_json(r),
                None => JsonValue::Null,
            },
        );
        root.push(
            "classification",
            match &self.classification {
                Some(t) => classification_json(t),
                None => JsonValue::Null,
            },
        );
        root.push(
            "curvature",
            match &self.curvature {
                Some(c) => curvature_json(c),
                None => JsonValue::Null,
            },
        );
        root
    }

    /// Byte output in the requested format; JSON ends with a newline.
    pub fn emit(&self, json: bool) -> String {
        if json {
            let mut s = self.to_json().emit();
            s.push('\n');
            return s;
        }
        self.emit_text()
    }

    fn emit_text(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "kemweb {} (samples={} tol={:e} seed={})",
            self.command, self.samples, self.tol, self.seed
        );
        let _ = writeln!(out, "input sha256: {}", self.input_digest);
        for c in &self.conditions {
            let _ = writeln!(
                out,
                "condition {}: {} (max residual {:.3e}, normalized {:.3e}, {} samples)",
                c.condition,
                if c.pass { "PASS" } else { "FAIL" },
                c.max_raw,
                c.max_normalized,
                c.samples_used
            );
            if !c.pass {
                for t in &c.tuples {
                    if t.max_normalized > c.tolerance {
                        let _ = writeln!(
                            out,
                            "  tuple {:?}: raw {:.3e}, normalized {:.3e}",
                            t.indices, t.max_raw, t.max_normalized
                        );
                    }
                }
            }
        }
        if let Some(r) = &self.residuals {
            let _ = writeln!(
                out,
                "remain system: {} (max residual {:.3e}, normalized {:.3e}, {} samples)",
                if r.pass { "PASS" } else { "FAIL" },
                r.max_raw,
                r.max_normalized,
                r.samples_used
            );
            if !r.pass {
                for t in &r.triples {
                    let worst = t
                        .remain
                        .iter()
                        .chain(std::iter::once(&t.det))
                        .fold(0.0_f64, |m, s| m.max(s.max_normalized));
                    if worst > r.tolerance {
                        let _ = writeln!(
                            out,
                            "  triple {:?}: A {:.3e} B {:.3e} C {:.3e} det {:.3e}",
                            t.indices,
                            t.remain[0].max_normalized,
                            t.remain[1].max_normalized,
                            t.remain[2].max_normalized,
                            t.det.max_normalized
                        );
                    }
                }
            }
        }
        if let Some(t) = &self.classification {
            let _ = writeln!(out, "classification:");
            write_node(&mut out, &t.root, 1);
        }
        if let Some(c) = &self.curvature {
            let point: Vec<String> = c
                .coord_names
                .iter()
                .zip(&c.point)
                .map(|(n, v)| format!("{n}={v}"))
                .collect();
            let _ = writeln!(out, "point: {}", point.join(", "));
            let _ = writeln!(out, "christoffel symbols (nonzero, i;jk):");
            for &(i, j, k, v) in &c.christoffel {
                let _ = writeln!(
                    out,
                    "  Gamma^{}_{{{} {}}} = {v:.12e}",
                    c.coord_names[i], c.coord_names[j], c.coord_names[k]
                );
            }
            let _ = writeln!(out, "riemann components (independent, nonzero):");
            for &(i, j, k, l, v) in &c.riemann {
                let _ = writeln!(
                    out,
                    "  R_{{{} {} {} {}}} = {v:.12e}",
                    c.coord_names[i], c.coord_names[j], c.coord_names[k], c.coord_names[l]
                );
            }
            let _ = writeln!(out, "sectional curvatures of coordinate planes:");
            for &(i, j, v) in &c.sectional {
                let _ = writeln!(
                    out,
                    "  K({}, {}) = {v:.12e}",
                    c.coord_names[i], c.coord_names[j]
                );
            }
            match c.kappa {
                Some(k) => {
                    let _ = writeln!(out, "constant curvature estimate: kappa = {k:.12e}");
                }
                None => {
                    let _ = writeln!(out, "constant curvature estimate: not constant");
                }
            }
        }
        if let Some(p) = self.pass {
            let _ = writeln!(out, "overall: {}", if p { "PASS" } else { "FAIL" });
        }
        out
    }
}

fn write_node(out: &mut String, node: &ClassificationNode, depth: usize) {
    use std::fmt::Write;
    let pad = "  ".repeat(depth);
    match node {
        ClassificationNode::Irreducible { coords } => {
            let names: Vec<_> = coords.iter().map(|c| c.name.as_str()).collect();
            let _ = writeln!(out, "{pad}irreducible [{}]", names.join(" "));
        }
        ClassificationNode::Leaf { coords } => {
            let names: Vec<_> = coords.iter().map(|c| c.name.as_str()).collect();
            let _ = writeln!(out, "{pad}leaf [{}]", names.join(" "));
        }
        ClassificationNode::Product { children } => {
            let _ = writeln!(out, "{pad}product");
            for ch in children {
                write_node(out, ch, depth + 1);
            }
        }
        ClassificationNode::WarpedProduct { base, blocks } => {
            let names: Vec<_> = base.iter().map(|c| c.name.as_str()).collect();
            let _ = writeln!(out, "{pad}warped product, base [{}]", names.join(" "));
            for b in blocks {
                let _ = writeln!(out, "{pad}  block e = {}", b.e);
                write_node(out, &b.child, depth + 2);
            }
        }
        ClassificationNode::IrregularM1 {
            base,
            blocks,
            concircular_compatible,
        } => {
            let _ = writeln!(
                out,
                "{pad}irregular (m = 1), base {}, concircular_compatible = {}",
                base.name, concircular_compatible
            );
            for b in blocks {
                let _ = writeln!(out, "{pad}  block sigma1 = {}", b.sigma1);
                write_node(out, &b.child, depth + 2);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_is_stable() {
        let d = input_digest("dim 2\n");
        assert_eq!(d.len(), 64);
        assert_eq!(d, input_digest("dim 2\n"));
        assert_ne!(d, input_digest("dim 3\n"));
    }

    #[test]
    fn empty_report_has_version_envelope() {
        let r = Report {
            command: "check".into(),
            ..Default::default()
        };
        let s = r.emit(true);
        assert!(s.starts_with("{\"schema\":\"kemweb/1\",\"version\":"));
        assert!(s.ends_with("}\n"));
        assert_eq!(s, r.emit(true));
    }
}
