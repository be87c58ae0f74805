//! Command-line frontend: check separability conditions, classify webs,
//! verify concircular/Killing tensors, query curvature, and emit example
//! files.
//!
//! Exit codes: 0 success / all checks pass; 1 a check failed (condition,
//! residual system, tensor verification); 2 parse or usage errors; 3
//! numeric failures (insufficient samples, singular or out-of-domain
//! points).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use kemweb::chart::CheckConfig;
use kemweb::classify::classify;
use kemweb::concircular::{verify_concircular, verify_killing, SymTensorField};
use kemweb::corpus;
use kemweb::dsl::{parse_expr, parse_metric_file, parse_point, MetricBody, MetricFile};
use kemweb::error::Error;
use kemweb::expr::Expr;
use kemweb::json::JsonValue;
use kemweb::report::{input_digest, CurvatureSummary, Report, SCHEMA};
use kemweb::separability::{check_diagonal_curvature, check_levi_civita};

#[derive(Parser)]
#[command(
    name = "kemweb",
    version,
    about = "Separable-web checking, classification and tensor verification for orthogonal metrics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct NumericArgs {
    /// Sample points per decision (>= 4)
    #[arg(long, default_value_t = 50)]
    samples: usize,
    /// Residual tolerance (> 0)
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Seed offsetting the deterministic sample sequence
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Emit the JSON report on stdout
    #[arg(long)]
    json: bool,
}

impl NumericArgs {
    fn config(&self) -> Result<CheckConfig, Error> {
        if self.samples < 4 {
            return Err(Error::InvalidInput("--samples must be at least 4".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidInput("--tol must be positive".into()));
        }
        Ok(CheckConfig::new(self.samples, self.tol, self.seed))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check the Levi-Civita equations and the diagonal-curvature condition
    Check {
        file: PathBuf,
        #[command(flatten)]
        numeric: NumericArgs,
    },
    /// Classify a sigma- or family-mode web into the canonical families
    Classify {
        file: PathBuf,
        #[command(flatten)]
        numeric: NumericArgs,
    },
    /// Verify concircular (--l) and/or Killing (--k) tensor components
    #[command(name = "verify-ct")]
    VerifyCt {
        file: PathBuf,
        /// Concircular tensor component, e.g. --l "r r = -r^2" (repeatable)
        #[arg(long = "l", value_name = "I J = EXPR")]
        l_components: Vec<String>,
        /// Killing tensor component, e.g. --k "r r = 1" (repeatable)
        #[arg(long = "k", value_name = "I J = EXPR")]
        k_components: Vec<String>,
        #[command(flatten)]
        numeric: NumericArgs,
    },
    /// Christoffel symbols, Riemann components, sectional and constant
    /// curvature at a point (default: the box center)
    Curvature {
        file: PathBuf,
        /// Evaluation point, e.g. --point "r=2,theta=0.7"
        #[arg(long)]
        point: Option<String>,
        #[command(flatten)]
        numeric: NumericArgs,
    },
    /// Write a built-in example .web file
    Example {
        /// One of: euclidean-N (2..6), spherical-e3, elliptic-e2, sphere-s2,
        /// warped-demo, irregular-demo
        name: String,
        /// Output path (default: <name>.web)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Emit a JSON summary on stdout
        #[arg(long)]
        json: bool,
    },
    /// Build the web described by a family-mode file and print it in sigma
    /// mode
    Construct {
        file: PathBuf,
        /// Output path (default: stdout)
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        numeric: NumericArgs,
    },
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::Parse(_)
        | Error::UndeclaredCoordinate { .. }
        | Error::DuplicateDeclaration { .. }
        | Error::MixedMode { .. }
        | Error::VanishingFactor(_)
        | Error::DuplicateE(_)
        | Error::TrivialTensor
        | Error::InvalidInput(_) => 2,
        Error::InsufficientSamples { .. }
        | Error::SingularEvaluation(_)
        | Error::DegeneratePlane => 3,
        Error::ResidualViolation(_) | Error::InconsistentWeb(_) => 1,
    }
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(exit_code_for(e))
}

fn load_file(path: &PathBuf) -> Result<(MetricFile, String), Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    let file = parse_metric_file(&text)?;
    Ok((file, text))
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Check { file, numeric } => cmd_check(&file, &numeric),
        Command::Classify { file, numeric } => cmd_classify(&file, &numeric),
        Command::VerifyCt {
            file,
            l_components,
            k_components,
            numeric,
        } => cmd_verify_ct(&file, &l_components, &k_components, &numeric),
        Command::Curvature {
            file,
            point,
            numeric,
        } => cmd_curvature(&file, point.as_deref(), &numeric),
        Command::Example { name, out, json } => cmd_example(&name, out, json),
        Command::Construct { file, out, numeric } => cmd_construct(&file, out, &numeric),
    }
}

fn base_report(command: &str, text: &str, cfg: &CheckConfig) -> Report {
    Report {
        command: command.into(),
        input_digest: input_digest(text),
        samples: cfg.samples,
        tol: cfg.tol,
        seed: cfg.seed,
        ..Default::default()
    }
}

fn cmd_check(path: &PathBuf, numeric: &NumericArgs) -> ExitCode {
    let cfg = match numeric.config() {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    let (file, text) = match load_file(path) {
        Ok(v) => v,
        Err(e) => return fail(&e),
    };
    let mut report = base_report("check", &text, &cfg);
    let run = |report: &mut Report| -> Result<bool, Error> {
        let m = file.to_metric(&cfg)?;
        let lc = check_levi_civita(&m, &cfg)?;
        let dc = check_diagonal_curvature(&m, &cfg)?;
        let pass = lc.pass && dc.pass;
        report.conditions.push(lc);
        report.conditions.push(dc);
        report.pass = Some(pass);
        Ok(pass)
    };
    match run(&mut report) {
        Ok(pass) => {
            print!("{}", report.emit(numeric.json));
            if pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => fail(&e),
    }
}

fn cmd_classify(path: &PathBuf, numeric: &NumericArgs) -> ExitCode {
    let cfg = match numeric.config() {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    let (file, text) = match load_file(path) {
        Ok(v) => v,
        Err(e) => return fail(&e),
    };
    if !matches!(file.body, MetricBody::Sigma { .. } | MetricBody::Family(_)) {
        return fail(&Error::InvalidInput(format!(
            "classify needs a sigma- or family-mode file, got {} mode",
            file.mode()
        )));
    }
    let mut report = base_report("classify", &text, &cfg);
    let web = match file.to_web(&cfg) {
        Ok(w) => w,
        Err(e) => return fail(&e),
    };
    if web.dim() >= 3 {
        match web.residuals_remain(&cfg) {
            Ok(r) => {
                let pass = r.pass;
                report.residuals = Some(r);
                if !pass {
                    report.pass = Some(false);
                    print!("{}", report.emit(numeric.json));
                    eprintln!("error: the web violates the residual system");
                    return ExitCode::from(1);
                }
            }
            Err(e) => return fail(&e),
        }
    }
    match classify(&web, &cfg) {
        Ok(tree) => {
            report.classification = Some(tree);
            report.pass = Some(true);
            print!("{}", report.emit(numeric.json));
            ExitCode::SUCCESS
        }
        Err(e @ (Error::ResidualViolation(_) | Error::InconsistentWeb(_))) => {
            report.pass = Some(false);
            print!("{}", report.emit(numeric.json));
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(e) => fail(&e),
    }
}

fn parse_components(specs: &[String], file: &MetricFile) -> Result<SymTensorField, Error> {
    let n = file.dim();
    let mut entries: Vec<Vec<Option<Expr>>> = vec![vec![None; n]; n];
    for spec in specs {
        let eq = spec.find('=').ok_or_else(|| {
            Error::InvalidInput(format!("component `{spec}` needs the form `i j = expr`"))
        })?;
        let head: Vec<&str> = spec[..eq].split_whitespace().collect();
        if head.len() != 2 {
            return Err(Error::InvalidInput(format!(
                "component `{spec}` needs two coordinate names before `=`"
            )));
        }
        let mut idx = [0usize; 2];
        for (slot, name) in head.iter().enumerate() {
            idx[slot] = file
                .coords
                .iter()
                .position(|c| c.name == *name)
                .ok_or_else(|| Error::UndeclaredCoordinate {
                    name: name.to_string(),
                    line: 0,
                })?;
        }
        let e = parse_expr(&spec[eq + 1..], &file.coords)?;
        let (i, j) = (idx[0].min(idx[1]), idx[0].max(idx[1]));
        if entries[i][j].is_some() {
            return Err(Error::InvalidInput(format!(
                "component ({} {}) given twice",
                head[0], head[1]
            )));
        }
        entries[i][j] = Some(e);
    }
    Ok(SymTensorField::from_fn(n, |i, j| {
        entries[i][j].clone().unwrap_or_else(Expr::zero)
    }))
}

fn cmd_verify_ct(
    path: &PathBuf,
    l_components: &[String],
    k_components: &[String],
    numeric: &NumericArgs,
) -> ExitCode {
    let cfg = match numeric.config() {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    if l_components.is_empty() && k_components.is_empty() {
        return fail(&Error::InvalidInput(
            "verify-ct needs at least one --l or --k component".into(),
        ));
    }
    let (file, text) = match load_file(path) {
        Ok(v) => v,
        Err(e) => return fail(&e),
    };
    let mut report = base_report("verify-ct", &text, &cfg);
    let run = |report: &mut Report| -> Result<bool, Error> {
        let m = file.to_metric(&cfg)?;
        let mut pass = true;
        if !l_components.is_empty() {
            let l = parse_components(l_components, &file)?;
            let rep = verify_concircular(&l, &m, &cfg)?;
            pass &= rep.pass;
            report.conditions.push(rep);
        }
        if !k_components.is_empty() {
            let k = parse_components(k_components, &file)?;
            let rep = verify_killing(&k, &m, &cfg)?;
            pass &= rep.pass;
            report.conditions.push(rep);
        }
        report.pass = Some(pass);
        Ok(pass)
    };
    match run(&mut report) {
        Ok(pass) => {
            print!("{}", report.emit(numeric.json));
            if pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => fail(&e),
    }
}

fn cmd_curvature(path: &PathBuf, point: Option<&str>, numeric: &NumericArgs) -> ExitCode {
    let cfg = match numeric.config() {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    let (file, text) = match load_file(path) {
        Ok(v) => v,
        Err(e) => return fail(&e),
    };
    let mut report = base_report("curvature", &text, &cfg);
    let run = |report: &mut Report| -> Result<(), Error> {
        let m = file.to_metric(&cfg)?;
        let p = match point {
            Some(src) => parse_point(src, &file.coords)?,
            None => file.box_.center(),
        };
        if !file.box_.contains(&p) {
            return Err(Error::SingularEvaluation(
                "the requested point lies outside the declared domain".into(),
            ));
        }
        let n = m.dim();
        let table = m.christoffel(&p)?;
        let mut gmax = 0.0_f64;
        for i in 0..n {
            gmax = gmax.max(m.component(i).evaluate(&p)?.abs());
        }
        let display_tol = 1e-12 * (1.0 + gmax);
        let mut christoffel = Vec::new();
        for i in 0..n {
            for j in 0..n {
                for k in j..n {
                    let v = table.get(i, j, k);
                    if v.abs() > display_tol {
                        christoffel.push((i, j, k, v));
                    }
                }
            }
        }
        let mut riemann = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                for k in 0..n {
                    for l in (k + 1)..n {
                        if (k, l) < (i, j) {
                            continue;
                        }
                        let v = m.riemann_with_table(&p, &table, i, j, k, l)?;
                        if v.abs() > display_tol {
                            riemann.push((i, j, k, l, v));
                        }
                    }
                }
            }
        }
        let mut sectional = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let mut x = vec![0.0; n];
                let mut y = vec![0.0; n];
                x[i] = 1.0;
                y[j] = 1.0;
                match m.sectional_curvature(&p, &x, &y) {
                    Ok(v) => sectional.push((i, j, v)),
                    Err(Error::DegeneratePlane) => continue,
                    Err(e) => return Err(e),
                }
            }
        }
        let kappa = m.constant_curvature_estimate(&m.sample(&cfg)?, cfg.tol)?;
        report.curvature = Some(CurvatureSummary {
            coord_names: file.coords.iter().map(|c| c.name.clone()).collect(),
            point: p.0.clone(),
            christoffel,
            riemann,
            sectional,
            kappa,
        });
        report.pass = Some(true);
        Ok(())
    };
    match run(&mut report) {
        Ok(()) => {
            print!("{}", report.emit(numeric.json));
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}

fn cmd_example(name: &str, out: Option<PathBuf>, json: bool) -> ExitCode {
    let text = match corpus::builtin(name) {
        Some(t) => t,
        None => {
            eprintln!(
                "error: unknown example `{name}`; available: {}",
                corpus::builtin_names().join(", ")
            );
            return ExitCode::from(2);
        }
    };
    let path = out.unwrap_or_else(|| PathBuf::from(format!("{name}.web")));
    if let Err(e) = std::fs::write(&path, &text) {
        eprintln!("error: cannot write {}: {e}", path.display());
        return ExitCode::from(2);
    }
    if json {
        let v = JsonValue::obj()
            .with("schema", JsonValue::str(SCHEMA))
            .with("version", JsonValue::str(env!("CARGO_PKG_VERSION")))
            .with("command", JsonValue::str("example"))
            .with("example", JsonValue::str(name))
            .with("written", JsonValue::str(path.display().to_string()))
            .with("input_digest", JsonValue::str(input_digest(&text)));
        println!("{}", v.emit());
    } else {
        println!("wrote {}", path.display());
    }
    ExitCode::SUCCESS
}

fn cmd_construct(path: &PathBuf, out: Option<PathBuf>, numeric: &NumericArgs) -> ExitCode {
    let cfg = match numeric.config() {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    let (file, _) = match load_file(path) {
        Ok(v) => v,
        Err(e) => return fail(&e),
    };
    let web = match file.to_web(&cfg) {
        Ok(w) => w,
        Err(e) => return fail(&e),
    };
    let n = web.dim();
    let sigma: Vec<Vec<Expr>> = (0..n)
        .map(|i| (0..n).map(|j| web.sigma(i, j).clone()).collect())
        .collect();
    let emitted = MetricFile {
        coords: web.coords().to_vec(),
        box_: web.chart_box().clone(),
        signs: web.signs().to_vec(),
        body: MetricBody::Sigma {
            phi: (0..n).map(|i| web.phi(i).clone()).collect(),
            sigma,
        },
    };
    let text = emitted.to_string();
    match out {
        Some(p) => {
            if let Err(e) = std::fs::write(&p, &text) {
                eprintln!("error: cannot write {}: {e}", p.display());
                return ExitCode::from(2);
            }
            println!("wrote {}", p.display());
        }
        None => print!("{text}"),
    }
    ExitCode::SUCCESS
}
