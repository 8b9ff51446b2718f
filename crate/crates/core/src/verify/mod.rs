//! Numerical certification suites. Each check measures its hypotheses at
//! the point first and is only asserted when they hold.

mod confflat;
pub mod diagnose;
mod factor;
mod kundt_on_k;
mod props;
pub mod subjects;
pub mod surject;
mod tachyon;
mod typed;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::catalog::CatalogEntry;
use crate::error::{Error, Result};
use crate::geometry::TensorFieldExpr;
use crate::metric_ir::{MetricSpec, Point};


/// Budget for displayed-equation residuals.
pub const IDENTITY_BUDGET: f64 = 1e-8;
/// Budget for the vanishing of `κ` and `ρ` in conclusions.
pub const CONCLUSION_BUDGET: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Hypothesis {
    Holds,
    Marginal,
    Fails,
}

impl Hypothesis {
    pub fn as_str(self) -> &'static str {
        match self {
            Hypothesis::Holds => "holds",
            Hypothesis::Marginal => "marginal",
            Hypothesis::Fails => "fails",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Pass,
    Fail,
    Skipped,
    SkippedMarginal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SuiteStatus {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub anchor: &'static str,
    pub subject: String,
    pub point: usize,
    pub hypothesis: Hypothesis,
    pub conditions: Vec<String>,
    pub residual: f64,
    pub budget: f64,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Tally {
    pub pass: usize,
    pub fail: usize,
    pub skipped: usize,
    pub skipped_marginal: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteResult {
    pub suite: &'static str,
    pub metric: String,
    pub seed: u64,
    pub points: Vec<Vec<f64>>,
    pub status: SuiteStatus,
    pub tally: Tally,
    pub notes: Vec<String>,
    pub checks: Vec<CheckRecord>,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.status != SuiteStatus::Fail
    }

    pub fn anchor_outcomes(&self, anchor: &str) -> impl Iterator<Item = &CheckRecord> {
        let anchor = anchor.to_string();
        self.checks.iter().filter(move |c| c.anchor == anchor)
    }

    /// Largest residual among asserted checks of `anchor`.
    pub fn worst(&self, anchor: &str) -> Option<f64> {
        self.anchor_outcomes(anchor)
            .filter(|c| matches!(c.outcome, Outcome::Pass | Outcome::Fail))
            .map(|c| c.residual)
            .reduce(f64::max)
    }
}

/// Conjunction of measured hypotheses.
#[derive(Debug, Clone, Serialize)]
pub struct Gate {
    pub status: Hypothesis,
    pub conditions: Vec<String>,
}

impl Default for Gate {
    fn default() -> Self {
        Gate {
            status: Hypothesis::Holds,
            conditions: Vec::new(),
        }
    }
}

impl Gate {
    pub fn with(mut self, (status, text): (Hypothesis, String)) -> Gate {
        self.status = self.status.max(status);
        self.conditions.push(text);
        self
    }

    pub fn holds(&self) -> bool {
        self.status == Hypothesis::Holds
    }
}

/// Collects check records for one suite run.
#[derive(Debug, Default)]
pub struct Recorder {
    pub checks: Vec<CheckRecord>,
    pub notes: Vec<String>,
    point: usize,
    synthetic: Vec<String>,
}

impl Recorder {
    pub fn at_point(&mut self, i: usize) {
        self.point = i;
    }

    pub fn note(&mut self, s: impl Into<String>) {
        let s = s.into();
        if !self.notes.contains(&s) {
            self.notes.push(s);
        }
    }

    /// Marks a subject built to satisfy the hypotheses. Its checks count
    /// toward failure but cannot make the suite pass on their own.
    pub fn synthetic(&mut self, subject: &str) {
        if !self.synthetic.iter().any(|s| s == subject) {
            self.synthetic.push(subject.to_string());
        }
    }

    pub fn record(&mut self, anchor: &'static str, subject: &str, gate: &Gate, residual: f64, budget: f64) {
        let outcome = match gate.status {
            Hypothesis::Holds if residual <= budget => Outcome::Pass,
            Hypothesis::Holds => Outcome::Fail,
            Hypothesis::Marginal => Outcome::SkippedMarginal,
            Hypothesis::Fails => Outcome::Skipped,
        };
        // Skipped checks carry no residual claim.
        let residual = if matches!(outcome, Outcome::Pass | Outcome::Fail) {
            residual
        } else {
            0.0
        };
        self.checks.push(CheckRecord {
            anchor,
            subject: subject.to_string(),
            point: self.point,
            hypothesis: gate.status,
            conditions: gate.conditions.clone(),
            residual,
            budget,
            outcome,
        });
    }

    fn finish(self, suite: &'static str, metric: &str, seed: u64, points: &[Point]) -> SuiteResult {
        let mut tally = Tally::default();
        for c in &self.checks {
            match c.outcome {
                Outcome::Pass => tally.pass += 1,
                Outcome::Fail => tally.fail += 1,
                Outcome::Skipped => tally.skipped += 1,
                Outcome::SkippedMarginal => tally.skipped_marginal += 1,
            }
        }
        let genuine_pass = self
            .checks
            .iter()
            .any(|c| c.outcome == Outcome::Pass && !self.synthetic.contains(&c.subject));
        let status = if tally.fail > 0 {
            SuiteStatus::Fail
        } else if genuine_pass {
            SuiteStatus::Pass
        } else {
            SuiteStatus::NotApplicable
        };
        let mut notes = self.notes;
        if status == SuiteStatus::NotApplicable {
            if tally.pass > 0 {
                notes.push(format!(
                    "not applicable on this metric: hypotheses hold only for synthetic subjects ({}), whose {} checks passed",
                    self.synthetic.join(", "),
                    tally.pass
                ));
            } else {
                notes.push("not applicable on this metric: no check had its hypotheses hold".into());
            }
        }
        SuiteResult {
            suite,
            metric: metric.to_string(),
            seed,
            points: points.iter().map(|p| p.values.clone()).collect(),
            status,
            tally,
            notes,
            checks: self.checks,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Factorization,
    KundtOnK,
    KIII,
    RicIII,
    RicN,
    WeylIII,
    WeylN,
    Surjectivity,
    ConformallyFlat,
    TypeDStructure,
}

pub const ALL_SUITES: [Suite; 10] = [
    Suite::Factorization,
    Suite::KundtOnK,
    Suite::KIII,
    Suite::RicIII,
    Suite::RicN,
    Suite::WeylIII,
    Suite::WeylN,
    Suite::Surjectivity,
    Suite::ConformallyFlat,
    Suite::TypeDStructure,
];

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Factorization => "factorization",
            Suite::KundtOnK => "kundt-on-k",
            Suite::KIII => "k-III",
            Suite::RicIII => "Ric-III",
            Suite::RicN => "Ric-N",
            Suite::WeylIII => "Weyl-III",
            Suite::WeylN => "Weyl-N",
            Suite::Surjectivity => "surjectivity",
            Suite::ConformallyFlat => "conformally-flat",
            Suite::TypeDStructure => "type-D-structure",
        }
    }

    pub fn from_name(s: &str) -> Result<Suite> {
        ALL_SUITES
            .iter()
            .copied()
            .find(|x| x.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownSuite(s.to_string()))
    }

    /// Anchors this suite emits, with what each one checks.
    pub fn anchors(self) -> &'static [(&'static str, &'static str)] {
        match self {
            Suite::Factorization => factor::ANCHORS,
            Suite::KundtOnK => kundt_on_k::ANCHORS,
            Suite::KIII => props::K_III,
            Suite::RicIII => props::RIC_III,
            Suite::RicN => props::RIC_N,
            Suite::WeylIII => props::WEYL_III,
            Suite::WeylN => props::WEYL_N,
            Suite::Surjectivity => surject::ANCHORS,
            Suite::ConformallyFlat => confflat::ANCHORS,
            Suite::TypeDStructure => typed::ANCHORS,
        }
    }

    fn default_points(self) -> usize {
        match self {
            Suite::Factorization => 20,
            Suite::Surjectivity => 1,
            _ => 4,
        }
    }
}

/// Every identity and conclusion the suites exercise.
pub fn manifest() -> Vec<&'static str> {
    ALL_SUITES
        .iter()
        .flat_map(|s| s.anchors().iter().map(|a| a.0))
        .collect()
}

/// A metric with a designated null field.
pub struct Fixture<'a> {
    pub name: String,
    pub metric: &'a MetricSpec,
    pub k: TensorFieldExpr,
    pub entry: Option<&'a CatalogEntry>,
}

impl<'a> Fixture<'a> {
    pub fn from_entry(entry: &'a CatalogEntry) -> Result<Fixture<'a>> {
        Ok(Fixture {
            name: entry.name.to_string(),
            metric: entry.metric(),
            k: entry.k_field()?,
            entry: Some(entry),
        })
    }
}

/// Where a suite is evaluated.
#[derive(Debug, Clone)]
pub enum Points {
    /// Box center plus seeded samples; `None` uses the suite default count.
    Sampled(Option<usize>),
    Given(Vec<Point>),
}

/// The box center followed by seeded uniform samples.
pub fn sample_points(entry: &CatalogEntry, seed: u64, count: usize) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![entry.center_point()];
    while out.len() < count.max(1) {
        out.push(entry.sample_point(&mut rng));
    }
    out
}

pub fn run_suite(suite: Suite, fx: &Fixture, seed: u64, points: &Points) -> Result<SuiteResult> {
    let pts = match (points, fx.entry) {
        (Points::Given(p), _) => p.clone(),
        (Points::Sampled(n), Some(e)) => sample_points(e, seed, n.unwrap_or(suite.default_points())),
        (Points::Sampled(_), None) => return Err(Error::Usage("a point is required for metrics outside the catalog".into())),
    };
    let mut rec = Recorder::default();
    for (i, p) in pts.iter().enumerate() {
        rec.at_point(i);
        match suite {
            Suite::Factorization => factor::run(fx, p, seed, &mut rec)?,
            Suite::KundtOnK => kundt_on_k::run(fx, p, &mut rec)?,
            Suite::KIII => props::run_k_iii(fx, p, &mut rec)?,
            Suite::RicIII => props::run_ric_iii(fx, p, &mut rec)?,
            Suite::RicN => props::run_ric_n(fx, p, &mut rec)?,
            Suite::WeylIII => props::run_weyl_iii(fx, p, &mut rec)?,
            Suite::WeylN => props::run_weyl_n(fx, p, &mut rec)?,
            Suite::Surjectivity => surject::run(fx, p, &mut rec)?,
            Suite::ConformallyFlat => confflat::run(fx, p, &mut rec)?,
            Suite::TypeDStructure => typed::run(fx, p, &mut rec)?,
        }
    }
    Ok(rec.finish(suite.name(), &fx.name, seed, &pts))
}

/// Runs every suite in registry order.
pub fn run_all(fx: &Fixture, seed: u64, points: &Points) -> Result<Vec<SuiteResult>> {
    ALL_SUITES.iter().map(|&s| run_suite(s, fx, seed, points)).collect()
}
