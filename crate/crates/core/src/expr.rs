//! Minimal symbolic expression kernel.
//!
//! Expressions are immutable trees shared through `Arc`, so they are cheap to
//! clone and safe to use from multiple threads. The kernel does exactly three
//! things: build, differentiate exactly, and evaluate at a point. There is no
//! general simplifier — only constant folding and the `x+0` / `x*0` / `x*1`
//! eliminations — because every downstream decision is evaluation-based.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::chart::{sample_points, ChartBox, CheckConfig, CoordId, Point};
use crate::error::{Error, Result};

/// Unary functions available to expressions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Tanh,
    Exp,
    Log,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "tanh" => Func::Tanh,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }
}

#[derive(Debug, PartialEq)]
enum Node {
    Const(f64),
    Var(CoordId),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Pow(Expr, Expr),
    Neg(Expr),
    Ap(Func, Expr),
}

/// A symbolic expression over named coordinates.
#[derive(Clone)]
pub struct Expr(Arc<Node>);

impl std::fmt::Debug for Expr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self}")
    }
}

/// Structural equality; constants compare by bit pattern so that printing
/// and reparsing round-trips exactly.
impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        match (&*self.0, &*other.0) {
            (Node::Const(a), Node::Const(b)) => a.to_bits() == b.to_bits(),
            (a, b) => a == b,
        }
    }
}

impl Expr {
    pub fn constant(c: f64) -> Expr {
        Expr(Arc::new(Node::Const(c)))
    }

    pub fn zero() -> Expr {
        Expr::constant(0.0)
    }

    pub fn one() -> Expr {
        Expr::constant(1.0)
    }

    pub fn var(id: &CoordId) -> Expr {
        Expr(Arc::new(Node::Var(id.clone())))
    }

    fn as_const(&self) -> Option<f64> {
        match &*self.0 {
            Node::Const(c) => Some(*c),
            _ => None,
        }
    }

    /// True when the node is the literal constant 0 (structural test only).
    pub fn is_zero_const(&self) -> bool {
        matches!(self.as_const(), Some(c) if c == 0.0)
    }

    fn is_one_const(&self) -> bool {
        matches!(self.as_const(), Some(c) if c == 1.0)
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
            return Expr::constant(x + y);
        }
        if a.is_zero_const() {
            return b;
        }
        if b.is_zero_const() {
            return a;
        }
        Expr(Arc::new(Node::Add(a, b)))
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
            return Expr::constant(x - y);
        }
        if b.is_zero_const() {
            return a;
        }
        if a.is_zero_const() {
            return Expr::neg(b);
        }
        Expr(Arc::new(Node::Sub(a, b)))
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
            return Expr::constant(x * y);
        }
        if a.is_zero_const() || b.is_zero_const() {
            return Expr::zero();
        }
        if a.is_one_const() {
            return b;
        }
        if b.is_one_const() {
            return a;
        }
        Expr(Arc::new(Node::Mul(a, b)))
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
            if y != 0.0 {
                return Expr::constant(x / y);
            }
        }
        if b.is_one_const() {
            return a;
        }
        Expr(Arc::new(Node::Div(a, b)))
    }

    pub fn neg(a: Expr) -> Expr {
        if let Some(x) = a.as_const() {
            return Expr::constant(-x);
        }
        Expr(Arc::new(Node::Neg(a)))
    }

    pub fn pow(base: Expr, exponent: Expr) -> Expr {
        if exponent.is_one_const() {
            return base;
        }
        if let Some(e) = exponent.as_const() {
            if e == 0.0 {
                return Expr::one();
            }
            if let Some(b) = base.as_const() {
                let v = b.powf(e);
                if v.is_finite() {
                    return Expr::constant(v);
                }
            }
        }
        Expr(Arc::new(Node::Pow(base, exponent)))
    }

    pub fn powi(base: Expr, n: i32) -> Expr {
        Expr::pow(base, Expr::constant(n as f64))
    }

    pub fn apply(f: Func, a: Expr) -> Expr {
        Expr(Arc::new(Node::Ap(f, a)))
    }

    pub fn sin(a: Expr) -> Expr {
        Expr::apply(Func::Sin, a)
    }
    pub fn cos(a: Expr) -> Expr {
        Expr::apply(Func::Cos, a)
    }
    pub fn tan(a: Expr) -> Expr {
        Expr::apply(Func::Tan, a)
    }
    pub fn sinh(a: Expr) -> Expr {
        Expr::apply(Func::Sinh, a)
    }
    pub fn cosh(a: Expr) -> Expr {
        Expr::apply(Func::Cosh, a)
    }
    pub fn tanh(a: Expr) -> Expr {
        Expr::apply(Func::Tanh, a)
    }
    pub fn exp(a: Expr) -> Expr {
        Expr::apply(Func::Exp, a)
    }
    pub fn log(a: Expr) -> Expr {
        Expr::apply(Func::Log, a)
    }
    pub fn sqrt(a: Expr) -> Expr {
        Expr::apply(Func::Sqrt, a)
    }

    /// Indices of all coordinates appearing in the tree.
    pub fn vars(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<usize>) {
        match &*self.0 {
            Node::Const(_) => {}
            Node::Var(id) => {
                out.insert(id.index);
            }
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b)
            | Node::Pow(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Node::Neg(a) | Node::Ap(_, a) => a.collect_vars(out),
        }
    }

    pub fn contains_var(&self, index: usize) -> bool {
        match &*self.0 {
            Node::Const(_) => false,
            Node::Var(id) => id.index == index,
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b)
            | Node::Pow(a, b) => a.contains_var(index) || b.contains_var(index),
            Node::Neg(a) | Node::Ap(_, a) => a.contains_var(index),
        }
    }

    /// Exact partial derivative with respect to the coordinate `v`.
    /// Differentiating an expression that does not contain `v` yields the
    /// zero constant.
    pub fn differentiate(&self, v: &CoordId) -> Expr {
        if !self.contains_var(v.index) {
            return Expr::zero();
        }
        match &*self.0 {
            Node::Const(_) => Expr::zero(),
            Node::Var(id) => {
                if id.index == v.index {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Node::Add(a, b) => Expr::add(a.differentiate(v), b.differentiate(v)),
            Node::Sub(a, b) => Expr::sub(a.differentiate(v), b.differentiate(v)),
            Node::Mul(a, b) => Expr::add(
                Expr::mul(a.differentiate(v), b.clone()),
                Expr::mul(a.clone(), b.differentiate(v)),
            ),
            Node::Div(a, b) => {
                // (a/b)' = a'/b - a b'/b^2
                let da = a.differentiate(v);
                let db = b.differentiate(v);
                Expr::sub(
                    Expr::div(da, b.clone()),
                    Expr::div(Expr::mul(a.clone(), db), Expr::powi(b.clone(), 2)),
                )
            }
            Node::Pow(base, exponent) => {
                let db = base.differentiate(v);
                if let Some(c) = exponent.as_const() {
                    // c * base^(c-1) * base'
                    return Expr::mul(
                        Expr::mul(
                            Expr::constant(c),
                            Expr::pow(base.clone(), Expr::constant(c - 1.0)),
                        ),
                        db,
                    );
                }
                // base^exp * (exp' log base + exp base'/base)
                let de = exponent.differentiate(v);
                Expr::mul(
                    self.clone(),
                    Expr::add(
                        Expr::mul(de, Expr::log(base.clone())),
                        Expr::mul(exponent.clone(), Expr::div(db, base.clone())),
                    ),
                )
            }
            Node::Neg(a) => Expr::neg(a.differentiate(v)),
            Node::Ap(f, a) => {
                let da = a.differentiate(v);
                let outer = match f {
                    Func::Sin => Expr::cos(a.clone()),
                    Func::Cos => Expr::neg(Expr::sin(a.clone())),
                    // tan' = 1 + tan^2 keeps the derivative inside the node set
                    Func::Tan => Expr::add(Expr::one(), Expr::powi(Expr::tan(a.clone()), 2)),
                    Func::Sinh => Expr::cosh(a.clone()),
                    Func::Cosh => Expr::sinh(a.clone()),
                    Func::Tanh => Expr::sub(Expr::one(), Expr::powi(Expr::tanh(a.clone()), 2)),
                    Func::Exp => self.clone(),
                    Func::Log => return Expr::div(da, a.clone()),
                    Func::Sqrt => {
                        return Expr::div(
                            da,
                            Expr::mul(Expr::constant(2.0), Expr::sqrt(a.clone())),
                        )
                    }
                };
                Expr::mul(outer, da)
            }
        }
    }

    /// Evaluate at a point. Singular sub-expressions (division by zero, log
    /// of a non-positive value, sqrt of a negative, fractional power of a
    /// negative base, or any non-finite intermediate) raise
    /// `SingularEvaluation`.
    pub fn evaluate(&self, p: &Point) -> Result<f64> {
        let v = self.eval_inner(p)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::SingularEvaluation(format!(
                "non-finite value {v} in `{self}`"
            )))
        }
    }

    fn eval_inner(&self, p: &Point) -> Result<f64> {
        match &*self.0 {
            Node::Const(c) => Ok(*c),
            Node::Var(id) => {
                if id.index < p.dim() {
                    Ok(p[id.index])
                } else {
                    Err(Error::InvalidInput(format!(
                        "point of dimension {} cannot bind coordinate `{}` (index {})",
                        p.dim(),
                        id.name,
                        id.index
                    )))
                }
            }
            Node::Add(a, b) => Ok(a.eval_inner(p)? + b.eval_inner(p)?),
            Node::Sub(a, b) => Ok(a.eval_inner(p)? - b.eval_inner(p)?),
            Node::Mul(a, b) => Ok(a.eval_inner(p)? * b.eval_inner(p)?),
            Node::Div(a, b) => {
                let den = b.eval_inner(p)?;
                if den == 0.0 {
                    return Err(Error::SingularEvaluation(format!(
                        "division by zero in `{self}`"
                    )));
                }
                Ok(a.eval_inner(p)? / den)
            }
            Node::Pow(base, exponent) => {
                let b = base.eval_inner(p)?;
                let e = exponent.eval_inner(p)?;
                if b < 0.0 && e.fract() != 0.0 {
                    return Err(Error::SingularEvaluation(format!(
                        "fractional power of negative base in `{self}`"
                    )));
                }
                if b == 0.0 && e < 0.0 {
                    return Err(Error::SingularEvaluation(format!(
                        "negative power of zero in `{self}`"
                    )));
                }
                Ok(b.powf(e))
            }
            Node::Neg(a) => Ok(-a.eval_inner(p)?),
            Node::Ap(f, a) => {
                let x = a.eval_inner(p)?;
                match f {
                    Func::Sin => Ok(x.sin()),
                    Func::Cos => Ok(x.cos()),
                    Func::Tan => Ok(x.tan()),
                    Func::Sinh => Ok(x.sinh()),
                    Func::Cosh => Ok(x.cosh()),
                    Func::Tanh => Ok(x.tanh()),
                    Func::Exp => Ok(x.exp()),
                    Func::Log => {
                        if x <= 0.0 {
                            Err(Error::SingularEvaluation(format!(
                                "log of non-positive value {x}"
                            )))
                        } else {
                            Ok(x.ln())
                        }
                    }
                    Func::Sqrt => {
                        if x < 0.0 {
                            Err(Error::SingularEvaluation(format!(
                                "sqrt of negative value {x}"
                            )))
                        } else {
                            Ok(x.sqrt())
                        }
                    }
                }
            }
        }
    }

    /// Replace the coordinate with the given index by a constant value.
    pub fn substitute(&self, index: usize, value: f64) -> Expr {
        if !self.contains_var(index) {
            return self.clone();
        }
        match &*self.0 {
            Node::Const(_) => self.clone(),
            Node::Var(id) => {
                if id.index == index {
                    Expr::constant(value)
                } else {
                    self.clone()
                }
            }
            Node::Add(a, b) => Expr::add(a.substitute(index, value), b.substitute(index, value)),
            Node::Sub(a, b) => Expr::sub(a.substitute(index, value), b.substitute(index, value)),
            Node::Mul(a, b) => Expr::mul(a.substitute(index, value), b.substitute(index, value)),
            Node::Div(a, b) => Expr::div(a.substitute(index, value), b.substitute(index, value)),
            Node::Pow(a, b) => Expr::pow(a.substitute(index, value), b.substitute(index, value)),
            Node::Neg(a) => Expr::neg(a.substitute(index, value)),
            Node::Ap(f, a) => Expr::apply(*f, a.substitute(index, value)),
        }
    }

    /// Rebuild the tree with coordinates renumbered/renamed through `map`,
    /// where `map[old_index]` is the replacement id. Coordinates without a
    /// replacement are an error (they must be substituted away first).
    pub fn reindex(&self, map: &[Option<CoordId>]) -> Result<Expr> {
        match &*self.0 {
            Node::Const(_) => Ok(self.clone()),
            Node::Var(id) => match map.get(id.index).and_then(|m| m.as_ref()) {
                Some(new_id) => Ok(Expr::var(new_id)),
                None => Err(Error::InvalidInput(format!(
                    "coordinate `{}` has no image under the reindexing map",
                    id.name
                ))),
            },
            Node::Add(a, b) => Ok(Expr::add(a.reindex(map)?, b.reindex(map)?)),
            Node::Sub(a, b) => Ok(Expr::sub(a.reindex(map)?, b.reindex(map)?)),
            Node::Mul(a, b) => Ok(Expr::mul(a.reindex(map)?, b.reindex(map)?)),
            Node::Div(a, b) => Ok(Expr::div(a.reindex(map)?, b.reindex(map)?)),
            Node::Pow(a, b) => Ok(Expr::pow(a.reindex(map)?, b.reindex(map)?)),
            Node::Neg(a) => Ok(Expr::neg(a.reindex(map)?)),
            Node::Ap(f, a) => Ok(Expr::apply(*f, a.reindex(map)?)),
        }
    }
}

/// True iff the expression is zero at every sampled point, to `cfg.tol`
/// scaled by the expression's largest sampled magnitude. Points where the
/// expression is singular are skipped and replaced from the sequence, up to
/// the sampler's retry cap.
pub fn is_identically_zero(e: &Expr, box_: &ChartBox, cfg: &CheckConfig) -> Result<bool> {
    if cfg.samples < 1 || cfg.tol <= 0.0 {
        return Err(Error::InvalidInput(
            "is_identically_zero needs samples >= 1 and tol > 0".into(),
        ));
    }
    if let Some(c) = e.as_const() {
        return Ok(c == 0.0);
    }
    let mut values = Vec::with_capacity(cfg.samples);
    sample_points(box_, cfg, |p| match e.evaluate(p) {
        Ok(v) => {
            values.push(v.abs());
            true
        }
        Err(_) => false,
    })?;
    let max = values.iter().cloned().fold(0.0_f64, f64::max);
    let threshold = cfg.tol * (1.0 + max);
    Ok(values.iter().all(|&v| v <= threshold))
}

/// True iff `e` actually depends on the coordinate `v`: its exact derivative
/// is not identically zero under the sampled constancy test.
pub fn depends_on(e: &Expr, v: &CoordId, box_: &ChartBox, cfg: &CheckConfig) -> Result<bool> {
    let d = e.differentiate(v);
    if d.is_zero_const() {
        return Ok(false);
    }
    Ok(!is_identically_zero(&d, box_, cfg)?)
}

// Operator sugar so expression-building code reads like the formulas.
impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::add(self, rhs)
    }
}
impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::sub(self, rhs)
    }
}
impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::mul(self, rhs)
    }
}
impl std::ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::div(self, rhs)
    }
}
impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

// Printing with the parser's precedence: ^ (right) > unary - > * / > + -.
// `parse(print(e))` reconstructs the tree exactly.

fn prec(e: &Expr) -> u8 {
    match &*e.0 {
        Node::Add(..) | Node::Sub(..) => 1,
        Node::Mul(..) | Node::Div(..) => 2,
        Node::Neg(..) => 3,
        Node::Pow(..) => 4,
        Node::Const(c) if *c < 0.0 => 3, // prints with a leading minus
        _ => 5,
    }
}

fn fmt_at(e: &Expr, parent: u8, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
    let mine = prec(e);
    if mine < parent {
        write!(f, "(")?;
        fmt_inner(e, f)?;
        write!(f, ")")
    } else {
        fmt_inner(e, f)
    }
}

fn fmt_inner(e: &Expr, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
    match &*e.0 {
        Node::Const(c) => write!(f, "{c}"),
        Node::Var(id) => write!(f, "{}", id.name),
        Node::Add(a, b) => {
            fmt_at(a, 1, f)?;
            write!(f, " + ")?;
            fmt_at(b, 2, f)
        }
        Node::Sub(a, b) => {
            fmt_at(a, 1, f)?;
            write!(f, " - ")?;
            fmt_at(b, 2, f)
        }
        Node::Mul(a, b) => {
            fmt_at(a, 2, f)?;
            write!(f, " * ")?;
            fmt_at(b, 3, f)
        }
        Node::Div(a, b) => {
            fmt_at(a, 2, f)?;
            write!(f, " / ")?;
            fmt_at(b, 3, f)
        }
        Node::Neg(a) => {
            write!(f, "-")?;
            fmt_at(a, 3, f)
        }
        Node::Pow(a, b) => {
            fmt_at(a, 5, f)?;
            write!(f, "^")?;
            // right-associative: an equal-precedence exponent needs no parens
            fmt_at(b, 4, f)
        }
        Node::Ap(func, a) => {
            write!(f, "{}(", func.name())?;
            fmt_inner(a, f)?;
            write!(f, ")")
        }
    }
}

impl std::fmt::Display for Expr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fmt_at(self, 0, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::coords;

    fn xy() -> (Vec<CoordId>, ChartBox) {
        let c = coords(&["x", "y"]);
        let b = ChartBox::new(vec![(0.5, 2.0), (0.5, 2.0)]).unwrap();
        (c, b)
    }

    #[test]
    fn power_rule() {
        let (c, _) = xy();
        let e = Expr::powi(Expr::var(&c[0]), 2);
        let d = e.differentiate(&c[0]);
        let v = d.evaluate(&Point(vec![3.0, 0.0])).unwrap();
        assert_eq!(v, 6.0);
    }

    #[test]
    fn cosh_squared_derivative_vanishes_at_zero() {
        let c = coords(&["u"]);
        let e = Expr::powi(Expr::cosh(Expr::var(&c[0])), 2);
        let d = e.differentiate(&c[0]);
        assert_eq!(d.evaluate(&Point(vec![0.0])).unwrap(), 0.0);
    }

    #[test]
    fn sin_squared_derivative_matches_finite_difference() {
        let c = coords(&["t"]);
        let e = Expr::powi(Expr::sin(Expr::var(&c[0])), 2);
        let d = e.differentiate(&c[0]);
        let t = std::f64::consts::FRAC_PI_4;
        let exact = d.evaluate(&Point(vec![t])).unwrap();
        assert!((exact - 1.0).abs() < 1e-12);
        let h = 1e-5;
        let fd = (e.evaluate(&Point(vec![t + h])).unwrap()
            - e.evaluate(&Point(vec![t - h])).unwrap())
            / (2.0 * h);
        assert!((exact - fd).abs() < 1e-8);
    }

    #[test]
    fn evaluation_examples() {
        let (c, _) = xy();
        let e = Expr::var(&c[0]) * Expr::var(&c[1]) + Expr::one();
        assert_eq!(e.evaluate(&Point(vec![2.0, 3.0])).unwrap(), 7.0);

        let lg = Expr::log(Expr::var(&c[0]));
        assert!(matches!(
            lg.evaluate(&Point(vec![0.0, 0.0])),
            Err(Error::SingularEvaluation(_))
        ));

        // degenerate point of the elliptic factor
        let u = coords(&["u", "v"]);
        let e = Expr::powi(Expr::cosh(Expr::var(&u[0])), 2)
            - Expr::powi(Expr::cos(Expr::var(&u[1])), 2);
        assert_eq!(e.evaluate(&Point(vec![0.0, 0.0])).unwrap(), 0.0);
    }

    #[test]
    fn depends_on_decisions() {
        let (c, b) = xy();
        let cfg = CheckConfig::default().constancy();
        // x + 0*y collapses structurally; y never appears
        let e = Expr::var(&c[0]) + Expr::zero() * Expr::var(&c[1]);
        assert!(!depends_on(&e, &c[1], &b, &cfg).unwrap());
        assert!(depends_on(&Expr::powi(Expr::var(&c[0]), 2), &c[0], &b, &cfg).unwrap());
        // unsimplified pythagorean identity
        let t = coords(&["t"]);
        let tb = ChartBox::new(vec![(0.1, 3.0)]).unwrap();
        let pyth = Expr::powi(Expr::sin(Expr::var(&t[0])), 2)
            + Expr::powi(Expr::cos(Expr::var(&t[0])), 2);
        assert!(!depends_on(&pyth, &t[0], &tb, &cfg).unwrap());
    }

    #[test]
    fn identically_zero_scaled_tolerance() {
        let c = coords(&["x"]);
        let b = ChartBox::new(vec![(1.0, 2.0)]).unwrap();
        let cfg = CheckConfig::new(50, 1e-9, 0);
        let tiny_slope = Expr::constant(1e-6) * Expr::var(&c[0]);
        assert!(!is_identically_zero(&tiny_slope, &b, &cfg).unwrap());
        assert!(is_identically_zero(&Expr::zero(), &b, &cfg).unwrap());
        let x_minus_x = Expr::var(&c[0]) - Expr::var(&c[0]);
        assert!(is_identically_zero(&x_minus_x, &b, &cfg).unwrap());
    }

    #[test]
    fn mixed_partials_commute() {
        let (c, b) = xy();
        let e = Expr::exp(Expr::var(&c[0]) * Expr::var(&c[1]))
            + Expr::sin(Expr::var(&c[0])) * Expr::powi(Expr::var(&c[1]), 3);
        let dxy = e.differentiate(&c[0]).differentiate(&c[1]);
        let dyx = e.differentiate(&c[1]).differentiate(&c[0]);
        for i in 1..20 {
            let p = crate::chart::halton_point(&b, i);
            let a = dxy.evaluate(&p).unwrap();
            let bv = dyx.evaluate(&p).unwrap();
            assert!((a - bv).abs() <= 1e-10 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn print_parse_precedence() {
        let (c, _) = xy();
        let x = Expr::var(&c[0]);
        let y = Expr::var(&c[1]);
        let e = (x.clone() + y.clone()) * Expr::powi(x.clone(), 2) - -y.clone();
        let printed = format!("{e}");
        assert_eq!(printed, "(x + y) * x^2 - -y");
    }
}
