//! Command-line front end.

use std::fmt::Write as _;
use std::path::Path;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::alignment::{boost_order, AlignmentReport, Tolerances};
use crate::bilinear::{bracket_monomial, QuotientVector};
use crate::catalog::{self, CatalogEntry};
use crate::congruence::{kappa_rho, CongruenceReport};
use crate::error::{Error, Result};
use crate::geometry::TensorFieldExpr;
use crate::jet::JetTensor;
use crate::metric_ir::{parse_metric, MetricSpec, Point};
use crate::tensor::Variance;
use crate::verify::diagnose::{diagnose, Diagnosis};
use crate::verify::subjects::Site;
use crate::verify::{self, Fixture, Points, Suite, SuiteResult, ALL_SUITES};

/// `println!` that stops quietly when stdout is closed (e.g. piped to `head`).
macro_rules! out {
    ($($t:tt)*) => {{
        use std::io::Write as _;
        if writeln!(std::io::stdout().lock(), $($t)*).is_err() {
            std::process::exit(0);
        }
    }};
}

fn suite_help() -> String {
    let mut s = String::from("Suites and the checks they record:\n");
    for suite in ALL_SUITES {
        let _ = writeln!(s, "\n  {}", suite.name());
        for (anchor, what) in suite.anchors() {
            let _ = writeln!(s, "    {anchor:<44} {what}");
        }
    }
    s.push_str("\nExit codes: 0 pass, 1 check failure, 2 usage error, 3 domain or singularity error.");
    s
}

#[derive(Debug, Parser)]
#[command(name = "nullkit", version, about = "Boost orders, null congruences and bilinear-map identities on Lorentzian metrics")]
#[command(after_long_help = suite_help())]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Catalog name or path to a metric file.
    #[arg(long, global = true)]
    pub metric: Option<String>,
    /// Evaluation point as `name=value,...` (values decimal or p/q).
    #[arg(long, global = true)]
    pub point: Option<String>,
    /// Null field as comma-separated contravariant components.
    #[arg(long, global = true, conflicts_with = "k_lower", allow_hyphen_values = true)]
    pub k: Option<String>,
    /// Null field given by its covariant components.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub k_lower: Option<String>,
    /// Use the catalog's designated field (the default for catalog metrics).
    #[arg(long, global = true)]
    pub catalog_k: bool,
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol_abs: f64,
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol_rel: f64,
    #[arg(long, global = true, default_value_t = 7)]
    pub seed: u64,
    /// Number of sampled points for `verify` (center included).
    #[arg(long, global = true)]
    pub points: Option<usize>,
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Boost orders of Rm, Ric, S, C and nabla^m Rm with respect to k.
    Classify,
    /// Optical scalars and the congruence label of k.
    Congruence,
    /// Evaluate <T|k|Q> for a frame monomial Q.
    Bracket {
        /// Rm, Ric, S, C or nabla^m Rm written as nabla1-Rm, nabla2-Rm, nabla3-Rm.
        #[arg(long = "T")]
        t: String,
        /// Frame indices of Q, e.g. 0,2 (0 = k, 1 = l, j >= 2 = m_j).
        #[arg(long = "Q")]
        q: String,
    },
    /// Run a certification suite, or `all`.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
    },
    /// Which theorem applies at the point, and whether the measured congruence agrees.
    Diagnose {
        /// Derivative depth N.
        #[arg(long, default_value_t = 3)]
        order: usize,
    },
    /// Built-in metrics.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
}

#[derive(Debug, Subcommand)]
pub enum CatalogAction {
    List,
    Show { name: String },
}

/// Exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Usage(_)
        | Error::UnknownMetric(_)
        | Error::UnknownSuite(_)
        | Error::Syntax { .. }
        | Error::UnknownIdentifier { .. }
        | Error::NonIntegerExponent { .. }
        | Error::MetricFile { .. }
        | Error::ConflictingAssignment { .. }
        | Error::DimensionMismatch { .. }
        | Error::RankMismatch { .. }
        | Error::BracketDomain { .. }
        | Error::Io(_) => 2,
        _ => 3,
    }
}

enum Source {
    Catalog(&'static CatalogEntry),
    File { path: String, spec: MetricSpec },
}

impl Source {
    fn load(name: &str) -> Result<Source> {
        if let Ok(e) = catalog::get(name) {
            return Ok(Source::Catalog(e));
        }
        if Path::new(name).is_file() {
            let text = std::fs::read_to_string(name).map_err(|e| Error::Io(format!("{name}: {e}")))?;
            return Ok(Source::File {
                path: name.to_string(),
                spec: parse_metric(&text)?,
            });
        }
        Err(Error::UnknownMetric(name.to_string()))
    }

    fn metric(&self) -> &MetricSpec {
        match self {
            Source::Catalog(e) => e.metric(),
            Source::File { spec, .. } => spec,
        }
    }
}

/// Accepts common spellings of angular coordinate names.
fn alias(name: &str, coords: &[String]) -> String {
    let table = [("θ", "th"), ("theta", "th"), ("φ", "ph"), ("phi", "ph")];
    if coords.iter().any(|c| c == name) {
        return name.to_string();
    }
    table
        .iter()
        .find(|(a, b)| *a == name && coords.iter().any(|c| c == b))
        .map_or(name.to_string(), |(_, b)| b.to_string())
}

fn parse_point(text: &str, coords: &[String]) -> Result<Point> {
    let norm: Vec<String> = text
        .split(',')
        .map(|part| match part.split_once('=') {
            Some((n, v)) => format!("{}={}", alias(n.trim(), coords), v.trim()),
            None => part.to_string(),
        })
        .collect();
    Point::parse(&norm.join(","), coords)
}

struct Ctx {
    source: Source,
    g: Global,
}

impl Ctx {
    fn new(g: Global) -> Result<Ctx> {
        let name = g
            .metric
            .clone()
            .ok_or_else(|| Error::Usage("--metric is required".into()))?;
        if g.tol_abs <= 0.0 || g.tol_rel <= 0.0 {
            return Err(Error::Usage("tolerances must be positive".into()));
        }
        Ok(Ctx {
            source: Source::load(&name)?,
            g,
        })
    }

    fn tol(&self) -> Tolerances {
        Tolerances {
            abs: self.g.tol_abs,
            rel: self.g.tol_rel,
        }
    }

    fn point(&self) -> Result<Option<Point>> {
        self.g
            .point
            .as_deref()
            .map(|p| parse_point(p, self.source.metric().coords()))
            .transpose()
    }

    fn point_or_center(&self) -> Result<Point> {
        match (self.point()?, &self.source) {
            (Some(p), _) => Ok(p),
            (None, Source::Catalog(e)) => Ok(e.center_point()),
            (None, Source::File { .. }) => Err(Error::Usage("--point is required for a metric file".into())),
        }
    }

    /// The null field. A `--k` that is null only as a covector is read as one.
    fn field(&self, p: &Point) -> Result<TensorFieldExpr> {
        let m = self.source.metric();
        if let Some(text) = &self.g.k_lower {
            return TensorFieldExpr::parse_vector(text, m, Variance::Down);
        }
        match (&self.g.k, &self.source) {
            (Some(text), _) => {
                let up = TensorFieldExpr::parse_vector(text, m, Variance::Up)?;
                let at = m.at(p)?;
                let v = up.eval(p)?;
                let v = v.components();
                let scale = v.iter().fold(0.0f64, |a, x| a.max(x.abs())).powi(2) * (1.0 + at.g.max_abs());
                let thr = self.tol().threshold(scale);
                let as_up = at.dot(v, v).abs();
                let as_down = at.dot(&at.raise(v), &at.raise(v)).abs();
                if as_up > thr && as_down <= thr {
                    eprintln!("note: --k is null only as a covector; reading it as --k-lower");
                    return TensorFieldExpr::parse_vector(text, m, Variance::Down);
                }
                Ok(up)
            }
            (None, Source::Catalog(e)) => e.k_field(),
            (None, Source::File { .. }) => Err(Error::Usage("--k or --k-lower is required for a metric file".into())),
        }
    }

    fn fixture(&self, k: TensorFieldExpr) -> Fixture<'_> {
        match &self.source {
            Source::Catalog(e) => Fixture {
                name: e.name.to_string(),
                metric: e.metric(),
                k,
                entry: Some(*e),
            },
            Source::File { path, spec } => Fixture {
                name: path.clone(),
                metric: spec,
                k,
                entry: None,
            },
        }
    }

    fn site(&self) -> Result<(Site, Point)> {
        let p = self.point_or_center()?;
        let fx = self.fixture(self.field(&p)?);
        Ok((Site::at(&fx, &p)?, p))
    }
}

#[derive(Debug, Serialize)]
struct Classified {
    tensor: String,
    report: AlignmentReport,
}

fn tensor_by_name(site: &Site, name: &str) -> Result<JetTensor> {
    let geo = &site.geo;
    let t = match name {
        "Rm" => geo.riemann.clone(),
        "Ric" => geo.ricci.clone(),
        "S" => geo.tracefree_ricci.clone(),
        "C" => geo.weyl.clone(),
        other => {
            let m = other
                .strip_prefix("nabla")
                .and_then(|r| r.strip_suffix("-Rm"))
                .and_then(|d| d.parse::<usize>().ok())
                .filter(|m| (1..=3).contains(m))
                .ok_or_else(|| Error::Usage(format!("unknown tensor `{other}`; use Rm, Ric, S, C, nabla1-Rm, nabla2-Rm or nabla3-Rm")))?;
            geo.nabla_riemann(m)?.clone()
        }
    };
    Ok(t)
}

const CLASSIFIED: [&str; 7] = ["Rm", "Ric", "S", "C", "nabla1-Rm", "nabla2-Rm", "nabla3-Rm"];

fn classify(ctx: &Ctx) -> Result<Vec<Classified>> {
    let (site, _) = ctx.site()?;
    CLASSIFIED
        .iter()
        .map(|name| {
            let t = tensor_by_name(&site, name)?.value();
            Ok(Classified {
                tensor: name.to_string(),
                report: boost_order(&t, &site.f, &site.geo.at, ctx.tol())?,
            })
        })
        .collect()
}

fn print_json<T: Serialize>(v: &T) -> Result<()> {
    let s = serde_json::to_string_pretty(v).map_err(|e| Error::Io(e.to_string()))?;
    out!("{s}");
    Ok(())
}

fn human_suite(r: &SuiteResult) {
    out!(
        "{} on {}: {:?} (pass {}, fail {}, skipped {}, marginal {})",
        r.suite, r.metric, r.status, r.tally.pass, r.tally.fail, r.tally.skipped, r.tally.skipped_marginal
    );
    for c in &r.checks {
        if c.outcome == verify::Outcome::Fail {
            out!("  FAIL {} [{}] point {}: residual {:.3e} > {:.1e}", c.anchor, c.subject, c.point, c.residual, c.budget);
        }
    }
    for n in &r.notes {
        out!("  note: {n}");
    }
}

fn human_diagnosis(d: &Diagnosis) {
    out!("{} at {:?} (dimension {})", d.metric, d.point, d.dim);
    out!("  d_N lower bounds: {:?}", d.d);
    out!("  uniform type D residual of {{S, nabla S}}: {:.3e}", d.type_d_residual);
    for r in &d.routes {
        let measured = match r.measured {
            Some(true) => format!("measured: {}", r.prediction.as_str()),
            Some(false) => format!("measured: NOT {}", r.prediction.as_str()),
            None => String::new(),
        };
        out!("  {:<30} {:<9} predicts {:<15} {measured}", r.name, r.gate.status.as_str(), r.prediction.as_str());
        if r.gate.status != verify::Hypothesis::Fails {
            for c in &r.gate.conditions {
                out!("      {c}");
            }
        }
    }
    out!("  congruence: {}", d.congruence.label.as_str());
    for m in &d.mismatches {
        out!("  mismatch: {m}");
    }
    out!("  verdict: {}", d.verdict.as_str());
}

fn congruence(ctx: &Ctx) -> Result<CongruenceReport> {
    let (site, _) = ctx.site()?;
    kappa_rho(&site.geo, &site.k, &site.f, ctx.tol().threshold(1.0))
}

fn bracket(ctx: &Ctx, t: &str, q: &str) -> Result<(bool, QuotientVector)> {
    let (site, _) = ctx.site()?;
    let n = site.dim();
    let alpha: Vec<usize> = q
        .split(',')
        .map(|s| s.trim().parse::<usize>().ok().filter(|&a| a < n))
        .collect::<Option<_>>()
        .ok_or_else(|| Error::Usage(format!("--Q must list frame indices below {n}")))?;
    let tv = tensor_by_name(&site, t)?.value();
    let zero = tv.max_abs() <= ctx.tol().threshold(0.0);
    Ok((zero, bracket_monomial(&tv, &site.f, &alpha, &site.geo.at, ctx.tol())?))
}

fn run_verify(ctx: &Ctx, suite: &str) -> Result<Vec<SuiteResult>> {
    let points = match ctx.point()? {
        Some(p) => Points::Given(vec![p]),
        None => Points::Sampled(ctx.g.points),
    };
    let p0 = ctx.point_or_center()?;
    let fx = ctx.fixture(ctx.field(&p0)?);
    if suite == "all" {
        verify::run_all(&fx, ctx.g.seed, &points)
    } else {
        Ok(vec![verify::run_suite(Suite::from_name(suite)?, &fx, ctx.g.seed, &points)?])
    }
}

/// Runs a parsed command and returns the exit code.
pub fn run(cli: Cli) -> Result<i32> {
    let json = cli.global.json;
    if let Command::Catalog { action } = &cli.command {
        match action {
            CatalogAction::List => {
                if json {
                    print_json(&catalog::all())?;
                } else {
                    for e in catalog::all() {
                        out!("{:<14} {}", e.name, e.description);
                    }
                }
            }
            CatalogAction::Show { name } => {
                let e = catalog::get(name)?;
                if json {
                    print_json(e)?;
                } else {
                    out!("{}: {}", e.name, e.description);
                    out!("k = ({})", e.k);
                    out!("center = {}", e.center_point().display_with(e.metric().coords()));
                    print!("{}", e.metric_file());
                    for r in &e.reference {
                        out!("reference: {:?} ({})", r.property, r.source);
                    }
                }
            }
        }
        return Ok(0);
    }
    let ctx = Ctx::new(cli.global)?;
    match cli.command {
        Command::Classify => {
            let out = classify(&ctx)?;
            if json {
                print_json(&out)?;
            } else {
                for c in &out {
                    let bo = c.report.bo.map_or("-".into(), |b| b.to_string());
                    out!("{:<10} bo = {:<3} {}", c.tensor, bo, c.report.label.as_str());
                }
            }
        }
        Command::Congruence => {
            let r = congruence(&ctx)?;
            if json {
                print_json(&r)?;
            } else {
                out!("{}", r.label.as_str());
                out!("  geodesic {} twist-free {} shear-free {} expansion-free {}", r.flags.geodesic, r.flags.twist_free, r.flags.shear_free, r.flags.expansion_free);
                out!("  theta {:.6e}  kappa {:?}", r.theta, r.kappa);
                if r.marginal {
                    out!("  note: a deciding quantity is within a factor 10 of the tolerance");
                }
            }
        }
        Command::Bracket { t, q } => {
            let (zero, v) = bracket(&ctx, &t, &q)?;
            if json {
                print_json(&v)?;
            } else if zero {
                out!("zero tensor, skipped");
            } else {
                out!("{:?}", v.components);
            }
        }
        Command::Verify { suite } => {
            let out = run_verify(&ctx, &suite)?;
            if json {
                print_json(&out)?;
            } else {
                out.iter().for_each(human_suite);
            }
            if out.iter().any(|r| !r.passed()) {
                return Ok(1);
            }
        }
        Command::Diagnose { order } => {
            let p = ctx.point_or_center()?;
            let fx = ctx.fixture(ctx.field(&p)?);
            let d = diagnose(&fx, &p, order, ctx.tol())?;
            if json {
                print_json(&d)?;
            } else {
                human_diagnosis(&d);
            }
            if d.verdict == crate::verify::diagnose::Verdict::Inconsistent {
                return Ok(1);
            }
        }
        Command::Catalog { .. } => unreachable!("handled above"),
    }
    Ok(0)
}
