//! The .web file format: a line-oriented description of an orthogonal
//! metric with a recursive-descent expression sub-parser.
//!
//! Header lines (any order, before `mode`):
//!   dim N
//!   coords x y z
//!   domain x 0.5 1.5
//!   sign x +
//!
//! Body (exactly one mode):
//!   mode raw      — `gii x : <expr>` per coordinate
//!   mode sigma    — `phi x : <expr>` per coordinate, `sigma x y : <expr>`
//!                   for pair factors (omitted sigmas are the zero constant)
//!   mode family   — `family irreducible|product|warped|irregular|sckt`,
//!                   `simple x : <sigma> ; <phi>`, `base x : <phi>`, and
//!                   `block [e = C | sigma1 = <expr>] coords y z` ...
//!                   `endblock` sections with phi/sigma lines inside
//!   mode warped   — `base coords x` / `endbase` and
//!                   `fiber rho = <expr> coords y z` / `endfiber` sections
//!                   with gii lines inside
//!
//! `#` starts a comment. Expression grammar: infix with precedence
//! `^` (right-assoc) > unary `-` > `*` `/` > `+` `-`, parentheses, function
//! application `name(expr)`, decimal and scientific literals, identifiers
//! restricted to declared coordinate names.

use std::collections::BTreeMap;

use crate::canonical::{
    self, BlockSpec, IrregularBase, IrregularBlockSpec, SCKTData, SimpleCoordSpec,
};
use crate::chart::{ChartBox, CheckConfig, CoordId, Point};
use crate::constcurv::{Fiber, WarpedProductStructure};
use crate::error::{Error, ParseError, Result};
use crate::expr::{Expr, Func};
use crate::metric::OrthogonalMetric;
use crate::web::SigmaWeb;

/// A parsed .web file.
#[derive(Debug, Clone)]
pub struct MetricFile {
    pub coords: Vec<CoordId>,
    pub box_: ChartBox,
    pub signs: Vec<f64>,
    pub body: MetricBody,
}

#[derive(Debug, Clone)]
pub enum MetricBody {
    Raw { gii: Vec<Expr> },
    Sigma { phi: Vec<Expr>, sigma: Vec<Vec<Expr>> },
    Family(FamilyFileSpec),
    Warped(WarpedFileSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    Irreducible,
    Product,
    Warped,
    Irregular,
    Sckt,
}

impl FamilyKind {
    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::Irreducible => "irreducible",
            FamilyKind::Product => "product",
            FamilyKind::Warped => "warped",
            FamilyKind::Irregular => "irregular",
            FamilyKind::Sckt => "sckt",
        }
    }
}

/// Family-mode body: constructor inputs in the declared coordinate space.
#[derive(Debug, Clone)]
pub struct FamilyFileSpec {
    pub kind: FamilyKind,
    /// (coordinate, sigma, phi) for the simple part
    pub simple: Vec<(usize, Expr, Expr)>,
    /// irregular base: (coordinate, phi)
    pub base: Option<(usize, Expr)>,
    pub blocks: Vec<FileBlock>,
}

#[derive(Debug, Clone)]
pub struct FileBlock {
    pub e: Option<f64>,
    pub sigma1: Option<Expr>,
    pub coords: Vec<usize>,
    pub phi: Vec<(usize, Expr)>,
    pub sigma: Vec<(usize, usize, Expr)>,
}

/// Warped-mode body: a base section and fiber sections with raw components.
#[derive(Debug, Clone)]
pub struct WarpedFileSpec {
    pub base_coords: Vec<usize>,
    pub base_gii: Vec<(usize, Expr)>,
    pub fibers: Vec<FileFiber>,
}

#[derive(Debug, Clone)]
pub struct FileFiber {
    pub rho: Expr,
    pub coords: Vec<usize>,
    pub gii: Vec<(usize, Expr)>,
}

const MODES: [&str; 4] = ["raw", "sigma", "family", "warped"];
const FAMILIES: [&str; 5] = ["irreducible", "product", "warped", "irregular", "sckt"];

fn err(line: usize, col: usize, message: impl Into<String>, expected: &[&str]) -> Error {
    Error::Parse(ParseError {
        line,
        col,
        message: message.into(),
        expected: expected.iter().map(|s| s.to_string()).collect(),
    })
}

// ---------------------------------------------------------------------------
// expression parser

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Semi,
}

struct Lexer;

impl Lexer {
    /// Tokenize `src`, reporting columns relative to `col0` (1-based).
    fn run(src: &str, line: usize, col0: usize) -> Result<Vec<(Tok, usize)>> {
        let mut out = Vec::new();
        let bytes = src.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            let c = bytes[i] as char;
            let col = col0 + i;
            match c {
                ' ' | '\t' => i += 1,
                '+' => {
                    out.push((Tok::Plus, col));
                    i += 1;
                }
                '-' => {
                    out.push((Tok::Minus, col));
                    i += 1;
                }
                '*' => {
                    out.push((Tok::Star, col));
                    i += 1;
                }
                '/' => {
                    out.push((Tok::Slash, col));
                    i += 1;
                }
                '^' => {
                    out.push((Tok::Caret, col));
                    i += 1;
                }
                '(' => {
                    out.push((Tok::LParen, col));
                    i += 1;
                }
                ')' => {
                    out.push((Tok::RParen, col));
                    i += 1;
                }
                ';' => {
                    out.push((Tok::Semi, col));
                    i += 1;
                }
                '0'..='9' | '.' => {
                    let start = i;
                    while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                        i += 1;
                    }
                    if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                        let mut j = i + 1;
                        if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                            j += 1;
                        }
                        if j < bytes.len() && bytes[j].is_ascii_digit() {
                            i = j;
                            while i < bytes.len() && bytes[i].is_ascii_digit() {
                                i += 1;
                            }
                        }
                    }
                    let text = &src[start..i];
                    let v: f64 = text.parse().map_err(|_| {
                        err(line, col, format!("malformed number `{text}`"), &["number"])
                    })?;
                    out.push((Tok::Num(v), col));
                }
                c if c.is_ascii_alphabetic() || c == '_' => {
                    let start = i;
                    while i < bytes.len()
                        && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
                    {
                        i += 1;
                    }
                    out.push((Tok::Ident(src[start..i].to_string()), col));
                }
                c => {
                    return Err(err(
                        line,
                        col,
                        format!("unexpected character `{c}`"),
                        &["number", "identifier", "operator", "("],
                    ))
                }
            }
        }
        Ok(out)
    }
}

struct ExprParser<'a> {
    toks: &'a [(Tok, usize)],
    pos: usize,
    line: usize,
    end_col: usize,
    names: &'a BTreeMap<String, CoordId>,
}

impl<'a> ExprParser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn col(&self) -> usize {
        self.toks
            .get(self.pos)
            .map(|(_, c)| *c)
            .unwrap_or(self.end_col)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    lhs = lhs + self.term()?;
                }
                Some(Tok::Minus) => {
                    self.bump();
                    lhs = lhs - self.term()?;
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    lhs = lhs * self.unary()?;
                }
                Some(Tok::Slash) => {
                    self.bump();
                    lhs = lhs / self.unary()?;
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if matches!(self.peek(), Some(Tok::Minus)) {
            self.bump();
            return Ok(-self.unary()?);
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if matches!(self.peek(), Some(Tok::Caret)) {
            self.bump();
            let exponent = self.unary()?;
            return Ok(Expr::pow(base, exponent));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let col = self.col();
        match self.bump() {
            Some(Tok::Num(v)) => Ok(Expr::constant(v)),
            Some(Tok::LParen) => {
                let e = self.expr()?;
                match self.bump() {
                    Some(Tok::RParen) => Ok(e),
                    _ => Err(err(self.line, self.col(), "unclosed parenthesis", &[")"])),
                }
            }
            Some(Tok::Ident(name)) => {
                if matches!(self.peek(), Some(Tok::LParen)) {
                    let f = Func::from_name(&name).ok_or_else(|| {
                        err(
                            self.line,
                            col,
                            format!("unknown function `{name}`"),
                            &[
                                "sin", "cos", "tan", "sinh", "cosh", "tanh", "exp", "log",
                                "sqrt",
                            ],
                        )
                    })?;
                    self.bump();
                    let arg = self.expr()?;
                    match self.bump() {
                        Some(Tok::RParen) => Ok(Expr::apply(f, arg)),
                        _ => Err(err(self.line, self.col(), "unclosed function call", &[")"])),
                    }
                } else {
                    match self.names.get(&name) {
                        Some(id) => Ok(Expr::var(id)),
                        None => Err(Error::UndeclaredCoordinate {
                            name,
                            line: self.line,
                        }),
                    }
                }
            }
            other => Err(err(
                self.line,
                col,
                match other {
                    Some(t) => format!("unexpected token {t:?}"),
                    None => "unexpected end of expression".to_string(),
                },
                &["number", "identifier", "(", "-"],
            )),
        }
    }
}

fn parse_expr_tokens(
    toks: &[(Tok, usize)],
    line: usize,
    end_col: usize,
    names: &BTreeMap<String, CoordId>,
) -> Result<Expr> {
    let mut p = ExprParser {
        toks,
        pos: 0,
        line,
        end_col,
        names,
    };
    let e = p.expr()?;
    if p.pos != toks.len() {
        return Err(err(
            line,
            p.col(),
            "trailing tokens after expression",
            &["end of line", "operator"],
        ));
    }
    Ok(e)
}

/// Parse one expression over the given coordinates (used for tensor
/// components supplied on the CLI).
pub fn parse_expr(src: &str, coords: &[CoordId]) -> Result<Expr> {
    let names: BTreeMap<String, CoordId> =
        coords.iter().map(|c| (c.name.clone(), c.clone())).collect();
    let toks = Lexer::run(src, 1, 1)?;
    parse_expr_tokens(&toks, 1, src.len() + 1, &names)
}

// ---------------------------------------------------------------------------
// file parser

struct HeaderState {
    dim: Option<usize>,
    coords: Option<Vec<String>>,
    domains: BTreeMap<String, (f64, f64)>,
    signs: BTreeMap<String, f64>,
}

/// Parse a .web file.
pub fn parse_metric_file(text: &str) -> Result<MetricFile> {
    let mut header = HeaderState {
        dim: None,
        coords: None,
        domains: BTreeMap::new(),
        signs: BTreeMap::new(),
    };
    let mut mode: Option<(String, usize)> = None;
    let mut body_lines: Vec<(usize, String)> = Vec::new();
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let content = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        };
        let content = content.trim();
        if content.is_empty() {
            continue;
        }
        let keyword = content.split_whitespace().next().unwrap();
        match keyword {
            "dim" | "coords" | "domain" | "sign" => {
                if let Some((_, mline)) = &mode {
                    return Err(Error::MixedMode {
                        detail: format!(
                            "header line `{keyword}` after the mode declaration on line {mline}"
                        ),
                        line: line_no,
                    });
                }
                parse_header_line(&mut header, keyword, content, line_no)?;
            }
            "mode" => {
                if let Some((m, mline)) = &mode {
                    return Err(Error::MixedMode {
                        detail: format!("mode already declared as `{m}` on line {mline}"),
                        line: line_no,
                    });
                }
                let rest = content[4..].trim();
                if !MODES.contains(&rest) {
                    return Err(err(
                        line_no,
                        6,
                        format!("unknown mode `{rest}`"),
                        &MODES,
                    ));
                }
                mode = Some((rest.to_string(), line_no));
            }
            _ => {
                if mode.is_none() {
                    return Err(Error::MixedMode {
                        detail: format!("body line `{keyword}` before any mode declaration"),
                        line: line_no,
                    });
                }
                body_lines.push((line_no, content.to_string()));
            }
        }
    }

    let (mode, mode_line) = mode.ok_or_else(|| {
        err(
            last_line,
            1,
            "missing mode declaration",
            &["mode raw", "mode sigma", "mode family", "mode warped"],
        )
    })?;
    let names = header.coords.clone().ok_or_else(|| {
        err(mode_line, 1, "missing coords declaration", &["coords"])
    })?;
    if let Some(d) = header.dim {
        if d != names.len() {
            return Err(err(
                mode_line,
                1,
                format!("dim {d} does not match {} coordinates", names.len()),
                &["matching dim and coords"],
            ));
        }
    }
    let mut intervals = Vec::with_capacity(names.len());
    let mut signs = Vec::with_capacity(names.len());
    for n in &names {
        let dom = header.domains.get(n).ok_or_else(|| {
            err(
                last_line,
                1,
                format!("missing domain for coordinate `{n}`"),
                &[&format!("domain {n} <lo> <hi>")],
            )
        })?;
        intervals.push(*dom);
        let s = header.signs.get(n).ok_or_else(|| {
            err(
                last_line,
                1,
                format!("missing sign for coordinate `{n}`"),
                &[&format!("sign {n} +")],
            )
        })?;
        signs.push(*s);
    }
    let coords: Vec<CoordId> = names
        .iter()
        .enumerate()
        .map(|(i, n)| CoordId::new(i, n.clone()))
        .collect();
    let name_map: BTreeMap<String, CoordId> =
        coords.iter().map(|c| (c.name.clone(), c.clone())).collect();
    let box_ = ChartBox::new(intervals)?;

    let body = match mode.as_str() {
        "raw" => parse_raw_body(&body_lines, &coords, &name_map)?,
        "sigma" => parse_sigma_body(&body_lines, &coords, &name_map)?,
        "family" => parse_family_body(&body_lines, &coords, &name_map, mode_line)?,
        _ => parse_warped_body(&body_lines, &coords, &name_map, mode_line)?,
    };
    Ok(MetricFile {
        coords,
        box_,
        signs,
        body,
    })
}

fn parse_header_line(
    header: &mut HeaderState,
    keyword: &str,
    content: &str,
    line: usize,
) -> Result<()> {
    let words: Vec<&str> = content.split_whitespace().collect();
    match keyword {
        "dim" => {
            if header.dim.is_some() {
                return Err(Error::DuplicateDeclaration {
                    name: "dim".into(),
                    line,
                });
            }
            if words.len() != 2 {
                return Err(err(line, 1, "dim needs one integer", &["dim <n>"]));
            }
            let d: usize = words[1]
                .parse()
                .map_err(|_| err(line, 5, "dim must be a positive integer", &["integer"]))?;
            if d == 0 {
                return Err(err(line, 5, "dim must be positive", &["integer >= 1"]));
            }
            header.dim = Some(d);
        }
        "coords" => {
            if header.coords.is_some() {
                return Err(Error::DuplicateDeclaration {
                    name: "coords".into(),
                    line,
                });
            }
            if words.len() < 2 {
                return Err(err(line, 1, "coords needs names", &["coords <names...>"]));
            }
            let names: Vec<String> = words[1..].iter().map(|s| s.to_string()).collect();
            for n in &names {
                if !n.chars().next().map(|c| c.is_ascii_alphabetic() || c == '_').unwrap_or(false)
                    || !n.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
                {
                    return Err(err(
                        line,
                        1,
                        format!("invalid coordinate name `{n}`"),
                        &["identifier"],
                    ));
                }
                if Func::from_name(n).is_some() || n == "coords" {
                    return Err(err(
                        line,
                        1,
                        format!("coordinate name `{n}` is reserved"),
                        &["non-reserved identifier"],
                    ));
                }
            }
            let mut sorted = names.clone();
            sorted.sort();
            sorted.dedup();
            if sorted.len() != names.len() {
                return Err(Error::DuplicateDeclaration {
                    name: "coordinate".into(),
                    line,
                });
            }
            header.coords = Some(names);
        }
        "domain" => {
            if words.len() != 4 {
                return Err(err(
                    line,
                    1,
                    "domain needs a name and two numbers",
                    &["domain <name> <lo> <hi>"],
                ));
            }
            let lo: f64 = words[2]
                .parse()
                .map_err(|_| err(line, 1, "malformed domain bound", &["number"]))?;
            let hi: f64 = words[3]
                .parse()
                .map_err(|_| err(line, 1, "malformed domain bound", &["number"]))?;
            if header
                .domains
                .insert(words[1].to_string(), (lo, hi))
                .is_some()
            {
                return Err(Error::DuplicateDeclaration {
                    name: words[1].to_string(),
                    line,
                });
            }
        }
        _ => {
            if words.len() != 3 || !(words[2] == "+" || words[2] == "-") {
                return Err(err(
                    line,
                    1,
                    "sign needs a name and + or -",
                    &["sign <name> +", "sign <name> -"],
                ));
            }
            let s = if words[2] == "+" { 1.0 } else { -1.0 };
            if header.signs.insert(words[1].to_string(), s).is_some() {
                return Err(Error::DuplicateDeclaration {
                    name: words[1].to_string(),
                    line,
                });
            }
        }
    }
    Ok(())
}

/// `keyword name [name] : expr` — returns the names and the expression.
fn parse_component_line<'a>(
    content: &'a str,
    line: usize,
    n_names: usize,
    name_map: &BTreeMap<String, CoordId>,
) -> Result<(Vec<usize>, Expr)> {
    let colon = content.find(':').ok_or_else(|| {
        err(line, content.len() + 1, "missing `:`", &[":"])
    })?;
    let head: Vec<&str> = content[..colon].split_whitespace().collect();
    if head.len() != n_names + 1 {
        return Err(err(
            line,
            1,
            format!("expected {n_names} coordinate name(s) before `:`"),
            &["<keyword> <coords...> : <expr>"],
        ));
    }
    let mut ids = Vec::with_capacity(n_names);
    for w in &head[1..] {
        let id = name_map
            .get(*w)
            .ok_or_else(|| Error::UndeclaredCoordinate {
                name: w.to_string(),
                line,
            })?;
        ids.push(id.index);
    }
    let expr_src = &content[colon + 1..];
    let toks = Lexer::run(expr_src, line, colon + 2)?;
    if toks.is_empty() {
        return Err(err(line, colon + 2, "missing expression", &["expression"]));
    }
    let e = parse_expr_tokens(&toks, line, content.len() + 1, name_map)?;
    Ok((ids, e))
}

fn parse_raw_body(
    lines: &[(usize, String)],
    coords: &[CoordId],
    name_map: &BTreeMap<String, CoordId>,
) -> Result<MetricBody> {
    let n = coords.len();
    let mut gii: Vec<Option<(Expr, usize)>> = vec![None; n];
    for (line, content) in lines {
        let keyword = content.split_whitespace().next().unwrap();
        if keyword != "gii" {
            return Err(Error::MixedMode {
                detail: format!("`{keyword}` is not a raw-mode line"),
                line: *line,
            });
        }
        let (ids, e) = parse_component_line(content, *line, 1, name_map)?;
        if gii[ids[0]].is_some() {
            return Err(Error::DuplicateDeclaration {
                name: format!("gii {}", coords[ids[0]].name),
                line: *line,
            });
        }
        gii[ids[0]] = Some((e, *line));
    }
    let mut out = Vec::with_capacity(n);
    for (i, g) in gii.into_iter().enumerate() {
        match g {
            Some((e, _)) => out.push(e),
            None => {
                return Err(err(
                    lines.last().map(|(l, _)| *l).unwrap_or(1),
                    1,
                    format!("missing gii line for `{}`", coords[i].name),
                    &[&format!("gii {} : <expr>", coords[i].name)],
                ))
            }
        }
    }
    Ok(MetricBody::Raw { gii: out })
}

fn parse_sigma_body(
    lines: &[(usize, String)],
    coords: &[CoordId],
    name_map: &BTreeMap<String, CoordId>,
) -> Result<MetricBody> {
    let n = coords.len();
    let mut phi: Vec<Option<Expr>> = vec![None; n];
    let mut sigma: Vec<Vec<Option<Expr>>> = vec![vec![None; n]; n];
    for (line, content) in lines {
        let keyword = content.split_whitespace().next().unwrap();
        match keyword {
            "phi" => {
                let (ids, e) = parse_component_line(content, *line, 1, name_map)?;
                if phi[ids[0]].is_some() {
                    return Err(Error::DuplicateDeclaration {
                        name: format!("phi {}", coords[ids[0]].name),
                        line: *line,
                    });
                }
                phi[ids[0]] = Some(e);
            }
            "sigma" => {
                let (ids, e) = parse_component_line(content, *line, 2, name_map)?;
                let (i, j) = (ids[0], ids[1]);
                if i == j {
                    return Err(err(
                        *line,
                        1,
                        "sigma needs two distinct coordinates",
                        &["sigma <i> <j> : <expr>"],
                    ));
                }
                if sigma[i][j].is_some() {
                    return Err(Error::DuplicateDeclaration {
                        name: format!("sigma {} {}", coords[i].name, coords[j].name),
                        line: *line,
                    });
                }
                sigma[i][j] = Some(e);
            }
            _ => {
                return Err(Error::MixedMode {
                    detail: format!("`{keyword}` is not a sigma-mode line"),
                    line: *line,
                })
            }
        }
    }
    let mut phi_out = Vec::with_capacity(n);
    for (i, p) in phi.into_iter().enumerate() {
        match p {
            Some(e) => phi_out.push(e),
            None => {
                return Err(err(
                    lines.last().map(|(l, _)| *l).unwrap_or(1),
                    1,
                    format!("missing phi line for `{}`", coords[i].name),
                    &[&format!("phi {} : <expr>", coords[i].name)],
                ))
            }
        }
    }
    let sigma_out: Vec<Vec<Expr>> = sigma
        .into_iter()
        .map(|row| row.into_iter().map(|s| s.unwrap_or_else(Expr::zero)).collect())
        .collect();
    Ok(MetricBody::Sigma {
        phi: phi_out,
        sigma: sigma_out,
    })
}

/// Find the standalone word `coords` in a block/fiber header.
fn find_coords_word(content: &str) -> Option<usize> {
    let bytes = content.as_bytes();
    let mut search = 0;
    while let Some(rel) = content[search..].find("coords") {
        let at = search + rel;
        let before_ok = at == 0 || bytes[at - 1].is_ascii_whitespace();
        let end = at + "coords".len();
        let after_ok = end == bytes.len() || bytes[end].is_ascii_whitespace();
        if before_ok && after_ok {
            return Some(at);
        }
        search = end;
    }
    None
}

fn parse_name_list(
    src: &str,
    line: usize,
    name_map: &BTreeMap<String, CoordId>,
) -> Result<Vec<usize>> {
    let words: Vec<&str> = src.split_whitespace().collect();
    if words.is_empty() {
        return Err(err(line, 1, "expected coordinate names", &["<names...>"]));
    }
    let mut out = Vec::with_capacity(words.len());
    for w in words {
        let id = name_map.get(w).ok_or_else(|| Error::UndeclaredCoordinate {
            name: w.to_string(),
            line,
        })?;
        if out.contains(&id.index) {
            return Err(Error::DuplicateDeclaration {
                name: w.to_string(),
                line,
            });
        }
        out.push(id.index);
    }
    Ok(out)
}

fn parse_family_body(
    lines: &[(usize, String)],
    coords: &[CoordId],
    name_map: &BTreeMap<String, CoordId>,
    mode_line: usize,
) -> Result<MetricBody> {
    let mut kind: Option<FamilyKind> = None;
    let mut simple: Vec<(usize, Expr, Expr)> = Vec::new();
    let mut base: Option<(usize, Expr)> = None;
    let mut blocks: Vec<FileBlock> = Vec::new();
    let mut open_block: Option<(FileBlock, usize)> = None;

    for (line, content) in lines {
        let keyword = content.split_whitespace().next().unwrap();
        if keyword == "endblock" {
            match open_block.take() {
                Some((b, _)) => {
                    blocks.push(b);
                    continue;
                }
                None => {
                    return Err(Error::MixedMode {
                        detail: "endblock without an open block".into(),
                        line: *line,
                    })
                }
            }
        }
        if let Some((block, _)) = &mut open_block {
            match keyword {
                "phi" => {
                    let (ids, e) = parse_component_line(content, *line, 1, name_map)?;
                    if !block.coords.contains(&ids[0]) {
                        return Err(err(
                            *line,
                            1,
                            format!("`{}` is not a member of this block", coords[ids[0]].name),
                            &["block member"],
                        ));
                    }
                    if block.phi.iter().any(|(i, _)| *i == ids[0]) {
                        return Err(Error::DuplicateDeclaration {
                            name: format!("phi {}", coords[ids[0]].name),
                            line: *line,
                        });
                    }
                    block.phi.push((ids[0], e));
                }
                "sigma" => {
                    let (ids, e) = parse_component_line(content, *line, 2, name_map)?;
                    if !block.coords.contains(&ids[0]) || !block.coords.contains(&ids[1]) {
                        return Err(err(
                            *line,
                            1,
                            "sigma inside a block must relate block members",
                            &["block members"],
                        ));
                    }
                    if block.sigma.iter().any(|(i, j, _)| *i == ids[0] && *j == ids[1]) {
                        return Err(Error::DuplicateDeclaration {
                            name: format!(
                                "sigma {} {}",
                                coords[ids[0]].name, coords[ids[1]].name
                            ),
                            line: *line,
                        });
                    }
                    block.sigma.push((ids[0], ids[1], e));
                }
                _ => {
                    return Err(Error::MixedMode {
                        detail: format!("`{keyword}` is not valid inside a block"),
                        line: *line,
                    })
                }
            }
            continue;
        }
        match keyword {
            "family" => {
                if kind.is_some() {
                    return Err(Error::DuplicateDeclaration {
                        name: "family".into(),
                        line: *line,
                    });
                }
                let rest = content[6..].trim();
                kind = Some(match rest {
                    "irreducible" => FamilyKind::Irreducible,
                    "product" => FamilyKind::Product,
                    "warped" => FamilyKind::Warped,
                    "irregular" => FamilyKind::Irregular,
                    "sckt" => FamilyKind::Sckt,
                    _ => {
                        return Err(err(
                            *line,
                            8,
                            format!("unknown family `{rest}`"),
                            &FAMILIES,
                        ))
                    }
                });
            }
            "simple" => {
                // simple x : <sigma> ; <phi>
                let colon = content.find(':').ok_or_else(|| {
                    err(*line, content.len() + 1, "missing `:`", &[":"])
                })?;
                let head: Vec<&str> = content[..colon].split_whitespace().collect();
                if head.len() != 2 {
                    return Err(err(
                        *line,
                        1,
                        "simple needs one coordinate name",
                        &["simple <coord> : <sigma> ; <phi>"],
                    ));
                }
                let id = name_map
                    .get(head[1])
                    .ok_or_else(|| Error::UndeclaredCoordinate {
                        name: head[1].to_string(),
                        line: *line,
                    })?;
                if simple.iter().any(|(i, _, _)| *i == id.index) {
                    return Err(Error::DuplicateDeclaration {
                        name: format!("simple {}", head[1]),
                        line: *line,
                    });
                }
                let toks = Lexer::run(&content[colon + 1..], *line, colon + 2)?;
                let semi = toks
                    .iter()
                    .position(|(t, _)| *t == Tok::Semi)
                    .ok_or_else(|| {
                        err(*line, content.len() + 1, "missing `;` between sigma and phi", &[";"])
                    })?;
                let sigma = parse_expr_tokens(&toks[..semi], *line, content.len() + 1, name_map)?;
                let phi =
                    parse_expr_tokens(&toks[semi + 1..], *line, content.len() + 1, name_map)?;
                simple.push((id.index, sigma, phi));
            }
            "base" => {
                let (ids, e) = parse_component_line(content, *line, 1, name_map)?;
                if base.is_some() {
                    return Err(Error::DuplicateDeclaration {
                        name: "base".into(),
                        line: *line,
                    });
                }
                base = Some((ids[0], e));
            }
            "block" => {
                let rest = content[5..].trim();
                let rest_offset = content.len() - rest.len();
                let coords_at = find_coords_word(rest).ok_or_else(|| {
                    err(*line, content.len() + 1, "block header needs `coords`", &["coords"])
                })?;
                let head = rest[..coords_at].trim();
                let members = parse_name_list(
                    &rest[coords_at + "coords".len()..],
                    *line,
                    name_map,
                )?;
                let (mut e, mut sigma1) = (None, None);
                if !head.is_empty() {
                    let eq = head.find('=').ok_or_else(|| {
                        err(*line, 7, "block header needs `e = <num>` or `sigma1 = <expr>`",
                            &["e = <num>", "sigma1 = <expr>", "coords"])
                    })?;
                    let key = head[..eq].trim();
                    let val = &head[eq + 1..];
                    let toks = Lexer::run(val, *line, rest_offset + eq + 2)?;
                    match key {
                        "e" => {
                            let expr =
                                parse_expr_tokens(&toks, *line, content.len() + 1, name_map)?;
                            let v = expr.evaluate(&Point(vec![])).map_err(|_| {
                                err(*line, 7, "block constant e must be a number", &["number"])
                            })?;
                            e = Some(v);
                        }
                        "sigma1" => {
                            sigma1 = Some(parse_expr_tokens(
                                &toks,
                                *line,
                                content.len() + 1,
                                name_map,
                            )?);
                        }
                        _ => {
                            return Err(err(
                                *line,
                                7,
                                format!("unknown block attribute `{key}`"),
                                &["e", "sigma1"],
                            ))
                        }
                    }
                }
                open_block = Some((
                    FileBlock {
                        e,
                        sigma1,
                        coords: members,
                        phi: Vec::new(),
                        sigma: Vec::new(),
                    },
                    *line,
                ));
            }
            _ => {
                return Err(Error::MixedMode {
                    detail: format!("`{keyword}` is not a family-mode line"),
                    line: *line,
                })
            }
        }
    }
    if let Some((_, line)) = open_block {
        return Err(err(line, 1, "unterminated block", &["endblock"]));
    }
    let kind = kind.ok_or_else(|| {
        err(
            mode_line,
            1,
            "family mode needs a family line",
            &["family <irreducible|product|warped|irregular|sckt>"],
        )
    })?;
    Ok(MetricBody::Family(FamilyFileSpec {
        kind,
        simple,
        base,
        blocks,
    }))
}

fn parse_warped_body(
    lines: &[(usize, String)],
    coords: &[CoordId],
    name_map: &BTreeMap<String, CoordId>,
    mode_line: usize,
) -> Result<MetricBody> {
    enum Section {
        None,
        Base,
        Fiber(FileFiber),
    }
    let mut base_coords: Option<Vec<usize>> = None;
    let mut base_gii: Vec<(usize, Expr)> = Vec::new();
    let mut fibers: Vec<FileFiber> = Vec::new();
    let mut section = Section::None;

    for (line, content) in lines {
        let keyword = content.split_whitespace().next().unwrap();
        let bad_here = |kw: &str| Error::MixedMode {
            detail: format!("`{kw}` is not valid here in warped mode"),
            line: *line,
        };
        match keyword {
            "base" => {
                if !matches!(section, Section::None) {
                    return Err(bad_here(keyword));
                }
                if base_coords.is_some() {
                    return Err(Error::DuplicateDeclaration {
                        name: "base".into(),
                        line: *line,
                    });
                }
                let rest = content[4..].trim();
                let coords_at = find_coords_word(rest).ok_or_else(|| {
                    err(*line, 6, "base section needs `coords`", &["base coords <names...>"])
                })?;
                base_coords = Some(parse_name_list(
                    &rest[coords_at + "coords".len()..],
                    *line,
                    name_map,
                )?);
                section = Section::Base;
            }
            "fiber" => {
                if !matches!(section, Section::None) {
                    return Err(bad_here(keyword));
                }
                let rest = content[5..].trim();
                let coords_at = find_coords_word(rest).ok_or_else(|| {
                    err(*line, 7, "fiber section needs `coords`",
                        &["fiber rho = <expr> coords <names...>"])
                })?;
                let head = rest[..coords_at].trim();
                let eq = head.find('=').ok_or_else(|| {
                    err(*line, 7, "fiber needs `rho = <expr>`", &["rho = <expr>"])
                })?;
                if head[..eq].trim() != "rho" {
                    return Err(err(*line, 7, "fiber attribute must be rho", &["rho"]));
                }
                let toks = Lexer::run(&head[eq + 1..], *line, 8)?;
                let rho = parse_expr_tokens(&toks, *line, content.len() + 1, name_map)?;
                let members = parse_name_list(
                    &rest[coords_at + "coords".len()..],
                    *line,
                    name_map,
                )?;
                section = Section::Fiber(FileFiber {
                    rho,
                    coords: members,
                    gii: Vec::new(),
                });
            }
            "endbase" => {
                if !matches!(section, Section::Base) {
                    return Err(bad_here(keyword));
                }
                section = Section::None;
            }
            "endfiber" => {
                if !matches!(section, Section::Fiber(_)) {
                    return Err(bad_here(keyword));
                }
                if let Section::Fiber(f) = std::mem::replace(&mut section, Section::None) {
                    fibers.push(f);
                }
            }
            "gii" => {
                let (ids, e) = parse_component_line(content, *line, 1, name_map)?;
                let target = match &mut section {
                    Section::Base => &mut base_gii,
                    Section::Fiber(f) => &mut f.gii,
                    Section::None => return Err(bad_here(keyword)),
                };
                if target.iter().any(|(i, _)| *i == ids[0]) {
                    return Err(Error::DuplicateDeclaration {
                        name: format!("gii {}", coords[ids[0]].name),
                        line: *line,
                    });
                }
                target.push((ids[0], e));
            }
            _ => return Err(bad_here(keyword)),
        }
    }
    if matches!(section, Section::Base) {
        return Err(err(mode_line, 1, "unterminated base section", &["endbase"]));
    }
    if matches!(section, Section::Fiber(_)) {
        return Err(err(mode_line, 1, "unterminated fiber section", &["endfiber"]));
    }
    let base_coords = base_coords.ok_or_else(|| {
        err(mode_line, 1, "warped mode needs a base section", &["base coords <names...>"])
    })?;
    Ok(MetricBody::Warped(WarpedFileSpec {
        base_coords,
        base_gii,
        fibers,
    }))
}

// ---------------------------------------------------------------------------
// conversions to domain objects

impl MetricFile {
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn mode(&self) -> &'static str {
        match &self.body {
            MetricBody::Raw { .. } => "raw",
            MetricBody::Sigma { .. } => "sigma",
            MetricBody::Family(_) => "family",
            MetricBody::Warped(_) => "warped",
        }
    }

    /// Build the orthogonal metric described by the file (any mode).
    pub fn to_metric(&self, cfg: &CheckConfig) -> Result<OrthogonalMetric> {
        match &self.body {
            MetricBody::Raw { gii } => {
                let m = OrthogonalMetric::new(
                    self.coords.clone(),
                    self.box_.clone(),
                    gii.clone(),
                    cfg,
                )?;
                for i in 0..self.dim() {
                    if m.sign(i) != self.signs[i] {
                        return Err(Error::InvalidInput(format!(
                            "declared sign of `{}` disagrees with g_ii at the box center",
                            self.coords[i].name
                        )));
                    }
                }
                Ok(m)
            }
            MetricBody::Sigma { .. } | MetricBody::Family(_) => {
                self.to_web(cfg)?.to_metric(cfg)
            }
            MetricBody::Warped(_) => Ok(self.to_warped_structure(cfg)?.assembled().clone()),
        }
    }

    /// Build the sigma web (sigma or family mode).
    pub fn to_web(&self, cfg: &CheckConfig) -> Result<SigmaWeb> {
        match &self.body {
            MetricBody::Sigma { phi, sigma } => SigmaWeb::new(
                self.coords.clone(),
                self.box_.clone(),
                self.signs.clone(),
                phi.clone(),
                sigma.clone(),
                cfg,
            ),
            MetricBody::Family(spec) => self.family_to_web(spec, cfg),
            _ => Err(Error::InvalidInput(format!(
                "{} mode has no sigma decomposition",
                self.mode()
            ))),
        }
    }

    /// Build the warped-product structure (warped mode).
    pub fn to_warped_structure(&self, cfg: &CheckConfig) -> Result<WarpedProductStructure> {
        let spec = match &self.body {
            MetricBody::Warped(s) => s,
            _ => {
                return Err(Error::InvalidInput(format!(
                    "{} mode is not a warped-product description",
                    self.mode()
                )))
            }
        };
        // base must be the declared prefix, fibers contiguous after it
        let mut expected = spec.base_coords.clone();
        for f in &spec.fibers {
            expected.extend(&f.coords);
        }
        let in_order: Vec<usize> = (0..self.dim()).collect();
        if expected != in_order {
            return Err(Error::InvalidInput(
                "warped sections must cover the declared coordinates in order \
                 (base first, then the fibers)"
                    .into(),
            ));
        }
        let base = self.sub_metric(&spec.base_coords, &spec.base_gii, cfg)?;
        let mut fibers = Vec::with_capacity(spec.fibers.len());
        for f in &spec.fibers {
            for v in f.rho.vars() {
                if !spec.base_coords.contains(&v) {
                    return Err(Error::InvalidInput(
                        "rho must depend on base coordinates only".into(),
                    ));
                }
            }
            fibers.push(Fiber {
                rho: f.rho.clone(),
                metric: self.sub_metric(&f.coords, &f.gii, cfg)?,
            });
        }
        WarpedProductStructure::new(base, fibers, cfg)
    }

    fn sub_metric(
        &self,
        members: &[usize],
        gii: &[(usize, Expr)],
        cfg: &CheckConfig,
    ) -> Result<OrthogonalMetric> {
        let mut map: Vec<Option<CoordId>> = vec![None; self.dim()];
        let mut coords = Vec::with_capacity(members.len());
        for (local, &global) in members.iter().enumerate() {
            let id = CoordId::new(local, self.coords[global].name.clone());
            map[global] = Some(id.clone());
            coords.push(id);
        }
        let mut comps: Vec<Option<Expr>> = vec![None; members.len()];
        for (global, e) in gii {
            let local = members.iter().position(|m| m == global).ok_or_else(|| {
                Error::InvalidInput(format!(
                    "gii for `{}` does not belong to this section",
                    self.coords[*global].name
                ))
            })?;
            for v in e.vars() {
                if !members.contains(&v) {
                    return Err(Error::InvalidInput(format!(
                        "gii for `{}` may only use this section's coordinates",
                        self.coords[*global].name
                    )));
                }
            }
            comps[local] = Some(e.reindex(&map)?);
        }
        let mut out = Vec::with_capacity(members.len());
        for (local, c) in comps.into_iter().enumerate() {
            out.push(c.ok_or_else(|| {
                Error::InvalidInput(format!(
                    "missing gii line for `{}`",
                    coords[local].name
                ))
            })?);
        }
        OrthogonalMetric::new(coords, self.box_.restrict(members), out, cfg)
    }

    fn block_web(&self, block: &FileBlock, cfg: &CheckConfig) -> Result<SigmaWeb> {
        let members = &block.coords;
        let mut map: Vec<Option<CoordId>> = vec![None; self.dim()];
        let mut coords = Vec::with_capacity(members.len());
        for (local, &global) in members.iter().enumerate() {
            let id = CoordId::new(local, self.coords[global].name.clone());
            map[global] = Some(id.clone());
            coords.push(id);
        }
        let n = members.len();
        let mut phi: Vec<Option<Expr>> = vec![None; n];
        for (global, e) in &block.phi {
            let local = members.iter().position(|m| m == global).unwrap();
            phi[local] = Some(e.reindex(&map)?);
        }
        let mut phi_out = Vec::with_capacity(n);
        for (local, p) in phi.into_iter().enumerate() {
            phi_out.push(p.ok_or_else(|| {
                Error::InvalidInput(format!(
                    "missing phi line for block coordinate `{}`",
                    coords[local].name
                ))
            })?);
        }
        let mut sigma = vec![vec![Expr::zero(); n]; n];
        for (gi, gj, e) in &block.sigma {
            let li = members.iter().position(|m| m == gi).unwrap();
            let lj = members.iter().position(|m| m == gj).unwrap();
            sigma[li][lj] = e.reindex(&map)?;
        }
        let signs: Vec<f64> = members.iter().map(|&g| self.signs[g]).collect();
        SigmaWeb::new(
            coords,
            self.box_.restrict(members),
            signs,
            phi_out,
            sigma,
            cfg,
        )
    }

    fn family_to_web(&self, spec: &FamilyFileSpec, cfg: &CheckConfig) -> Result<SigmaWeb> {
        // coverage check
        let mut covered = vec![false; self.dim()];
        for (i, _, _) in &spec.simple {
            covered[*i] = true;
        }
        if let Some((b, _)) = &spec.base {
            covered[*b] = true;
        }
        for b in &spec.blocks {
            for &c in &b.coords {
                if covered[c] {
                    return Err(Error::InvalidInput(format!(
                        "coordinate `{}` appears in more than one part",
                        self.coords[c].name
                    )));
                }
                covered[c] = true;
            }
        }
        if let Some(missing) = covered.iter().position(|c| !c) {
            return Err(Error::InvalidInput(format!(
                "coordinate `{}` is not covered by the family description",
                self.coords[missing].name
            )));
        }

        let own_chart = |idx: usize, e: &Expr| -> Result<Expr> {
            for v in e.vars() {
                if v != idx {
                    return Err(Error::InvalidInput(format!(
                        "expression for `{}` must be univariate in it",
                        self.coords[idx].name
                    )));
                }
            }
            let mut map: Vec<Option<CoordId>> = vec![None; self.dim()];
            map[idx] = Some(CoordId::new(0, self.coords[idx].name.clone()));
            e.reindex(&map)
        };

        let simple_specs = |spec: &FamilyFileSpec| -> Result<Vec<SimpleCoordSpec>> {
            spec.simple
                .iter()
                .map(|(i, sigma, phi)| {
                    Ok(SimpleCoordSpec::new(
                        self.coords[*i].name.clone(),
                        self.box_.interval(*i),
                        own_chart(*i, sigma)?,
                        own_chart(*i, phi)?,
                        self.signs[*i],
                    ))
                })
                .collect()
        };

        let constructed = match spec.kind {
            FamilyKind::Irreducible => {
                if !spec.blocks.is_empty() || spec.base.is_some() {
                    return Err(Error::InvalidInput(
                        "irreducible family takes only simple lines".into(),
                    ));
                }
                canonical::irreducible_metric(simple_specs(spec)?, cfg)?
            }
            FamilyKind::Product => {
                if !spec.simple.is_empty() || spec.base.is_some() {
                    return Err(Error::InvalidInput(
                        "product family takes only blocks".into(),
                    ));
                }
                let webs: Vec<SigmaWeb> = spec
                    .blocks
                    .iter()
                    .map(|b| {
                        if b.e.is_some() || b.sigma1.is_some() {
                            return Err(Error::InvalidInput(
                                "product blocks take no e or sigma1".into(),
                            ));
                        }
                        self.block_web(b, cfg)
                    })
                    .collect::<Result<_>>()?;
                canonical::product_metric(&webs, cfg)?
            }
            FamilyKind::Warped | FamilyKind::Sckt => {
                if spec.base.is_some() {
                    return Err(Error::InvalidInput(
                        "warped/sckt families take simple lines, not base".into(),
                    ));
                }
                let blocks: Vec<BlockSpec> = spec
                    .blocks
                    .iter()
                    .map(|b| {
                        let e = b.e.ok_or_else(|| {
                            Error::InvalidInput(
                                "warped/sckt blocks need `e = <num>`".into(),
                            )
                        })?;
                        Ok(BlockSpec {
                            e,
                            web: self.block_web(b, cfg)?,
                        })
                    })
                    .collect::<Result<_>>()?;
                let data = SCKTData {
                    simple: simple_specs(spec)?,
                    blocks,
                };
                if spec.kind == FamilyKind::Warped {
                    canonical::warped_product_metric(data.simple, data.blocks, cfg)?
                } else {
                    canonical::sckt_metric(&data, cfg)?
                }
            }
            FamilyKind::Irregular => {
                let (b, phi) = spec.base.as_ref().ok_or_else(|| {
                    Error::InvalidInput("irregular family needs a base line".into())
                })?;
                if !spec.simple.is_empty() {
                    return Err(Error::InvalidInput(
                        "irregular family takes base, not simple lines".into(),
                    ));
                }
                let base = IrregularBase {
                    name: self.coords[*b].name.clone(),
                    interval: self.box_.interval(*b),
                    phi: own_chart(*b, phi)?,
                    sign: self.signs[*b],
                };
                let blocks: Vec<IrregularBlockSpec> = spec
                    .blocks
                    .iter()
                    .map(|blk| {
                        let sigma1 = blk.sigma1.as_ref().ok_or_else(|| {
                            Error::InvalidInput(
                                "irregular blocks need `sigma1 = <expr>`".into(),
                            )
                        })?;
                        Ok(IrregularBlockSpec {
                            sigma1: own_chart(*b, sigma1)?,
                            web: self.block_web(blk, cfg)?,
                        })
                    })
                    .collect::<Result<_>>()?;
                canonical::irregular_metric(base, blocks, cfg)?
            }
        };
        // permute the constructor layout back to the declared coordinate order
        let perm: Vec<usize> = self
            .coords
            .iter()
            .map(|c| {
                constructed
                    .coords()
                    .iter()
                    .position(|cc| cc.name == c.name)
                    .expect("constructor output covers the declared coordinates")
            })
            .collect();
        constructed.restrict(&perm, cfg)
    }
}

/// Parse `x=1.5,y=0.2` into a point over the declared coordinates.
pub fn parse_point(src: &str, coords: &[CoordId]) -> Result<Point> {
    let mut values: Vec<Option<f64>> = vec![None; coords.len()];
    for part in src.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let eq = part.find('=').ok_or_else(|| {
            Error::InvalidInput(format!("point component `{part}` needs name=value"))
        })?;
        let name = part[..eq].trim();
        let value: f64 = part[eq + 1..]
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("malformed number in `{part}`")))?;
        let idx = coords
            .iter()
            .position(|c| c.name == name)
            .ok_or_else(|| Error::UndeclaredCoordinate {
                name: name.to_string(),
                line: 0,
            })?;
        if values[idx].is_some() {
            return Err(Error::InvalidInput(format!(
                "coordinate `{name}` given twice in the point"
            )));
        }
        values[idx] = Some(value);
    }
    let mut out = Vec::with_capacity(coords.len());
    for (i, v) in values.into_iter().enumerate() {
        out.push(v.ok_or_else(|| {
            Error::InvalidInput(format!("point is missing coordinate `{}`", coords[i].name))
        })?);
    }
    Ok(Point(out))
}

// ---------------------------------------------------------------------------
// canonical re-emission

impl std::fmt::Display for MetricFile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "dim {}", self.dim())?;
        write!(f, "coords")?;
        for c in &self.coords {
            write!(f, " {}", c.name)?;
        }
        writeln!(f)?;
        for (i, c) in self.coords.iter().enumerate() {
            let (lo, hi) = self.box_.interval(i);
            writeln!(f, "domain {} {} {}", c.name, lo, hi)?;
        }
        for (i, c) in self.coords.iter().enumerate() {
            writeln!(
                f,
                "sign {} {}",
                c.name,
                if self.signs[i] > 0.0 { "+" } else { "-" }
            )?;
        }
        match &self.body {
            MetricBody::Raw { gii } => {
                writeln!(f, "mode raw")?;
                for (i, g) in gii.iter().enumerate() {
                    writeln!(f, "gii {} : {}", self.coords[i].name, g)?;
                }
            }
            MetricBody::Sigma { phi, sigma } => {
                writeln!(f, "mode sigma")?;
                for (i, p) in phi.iter().enumerate() {
                    writeln!(f, "phi {} : {}", self.coords[i].name, p)?;
                }
                for (i, row) in sigma.iter().enumerate() {
                    for (j, s) in row.iter().enumerate() {
                        if i != j && !s.is_zero_const() {
                            writeln!(
                                f,
                                "sigma {} {} : {}",
                                self.coords[i].name, self.coords[j].name, s
                            )?;
                        }
                    }
                }
            }
            MetricBody::Family(spec) => {
                writeln!(f, "mode family")?;
                writeln!(f, "family {}", spec.kind.name())?;
                for (i, sigma, phi) in &spec.simple {
                    writeln!(f, "simple {} : {} ; {}", self.coords[*i].name, sigma, phi)?;
                }
                if let Some((b, phi)) = &spec.base {
                    writeln!(f, "base {} : {}", self.coords[*b].name, phi)?;
                }
                for blk in &spec.blocks {
                    write!(f, "block")?;
                    if let Some(e) = blk.e {
                        write!(f, " e = {e}")?;
                    }
                    if let Some(s1) = &blk.sigma1 {
                        write!(f, " sigma1 = {s1}")?;
                    }
                    write!(f, " coords")?;
                    for &c in &blk.coords {
                        write!(f, " {}", self.coords[c].name)?;
                    }
                    writeln!(f)?;
                    for (i, p) in &blk.phi {
                        writeln!(f, "phi {} : {}", self.coords[*i].name, p)?;
                    }
                    for (i, j, s) in &blk.sigma {
                        writeln!(
                            f,
                            "sigma {} {} : {}",
                            self.coords[*i].name, self.coords[*j].name, s
                        )?;
                    }
                    writeln!(f, "endblock")?;
                }
            }
            MetricBody::Warped(spec) => {
                writeln!(f, "mode warped")?;
                write!(f, "base coords")?;
                for &c in &spec.base_coords {
                    write!(f, " {}", self.coords[c].name)?;
                }
                writeln!(f)?;
                for (i, g) in &spec.base_gii {
                    writeln!(f, "gii {} : {}", self.coords[*i].name, g)?;
                }
                writeln!(f, "endbase")?;
                for fb in &spec.fibers {
                    write!(f, "fiber rho = {} coords", fb.rho)?;
                    for &c in &fb.coords {
                        write!(f, " {}", self.coords[c].name)?;
                    }
                    writeln!(f)?;
                    for (i, g) in &fb.gii {
                        writeln!(f, "gii {} : {}", self.coords[*i].name, g)?;
                    }
                    writeln!(f, "endfiber")?;
                }
            }
        }
        Ok(())
    }
}
