//! End-to-end acceptance run. Prints one line per criterion and exits
//! non-zero if any fails.

mod common;

use std::collections::BTreeMap;
use std::process::Command;
use std::time::{Duration, Instant};

use common::*;
use nullkit::alignment::Tolerances;
use nullkit::bilinear::{bracket, bracket_monomial, monomial_tensor};
use nullkit::catalog::{self, field_at};
use nullkit::congruence::{kappa_rho, kundt_frame_norm, kundt_tensor_residual, CongruenceLabel, CONGRUENCE_TOL};
use nullkit::frames::JetFrame;
use nullkit::geometry::{plebanski, weyl_like_residual};
use nullkit::metric_ir::Point;
use nullkit::tensor::{TensorValue, Variance};
use nullkit::verify::diagnose::{diagnose, Verdict};
use nullkit::verify::surject::surjectivity_check;
use nullkit::verify::{manifest, run_suite, Fixture, Outcome, Points, SuiteResult, SuiteStatus, ALL_SUITES};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 7;
const NODE_CAP: usize = 1_000_000;

struct Report {
    lines: Vec<(String, bool, String)>,
}

impl Report {
    fn line(&mut self, id: &str, ok: bool, detail: impl Into<String>) {
        let detail = detail.into();
        println!("{:<34} {}  {}", id, if ok { "PASS" } else { "FAIL" }, detail);
        self.lines.push((id.to_string(), ok, detail));
    }
}

fn tol() -> Tolerances {
    Tolerances::default()
}

/// Every suite on every catalog metric, with per-suite wall time.
fn sweep() -> (Vec<SuiteResult>, BTreeMap<&'static str, Duration>) {
    let mut out = Vec::new();
    let mut time = BTreeMap::new();
    for e in catalog::all() {
        let fx = Fixture::from_entry(e).expect("fixture");
        for &s in &ALL_SUITES {
            let t0 = Instant::now();
            let r = run_suite(s, &fx, SEED, &Points::Sampled(None)).unwrap_or_else(|err| panic!("{} on {}: {err}", s.name(), e.name));
            *time.entry(s.name()).or_insert(Duration::ZERO) += t0.elapsed();
            out.push(r);
        }
    }
    (out, time)
}

fn find<'a>(all: &'a [SuiteResult], suite: &str, metric: &str) -> &'a SuiteResult {
    all.iter().find(|r| r.suite == suite && r.metric == metric).expect("suite ran")
}

fn asserted(r: &SuiteResult) -> impl Iterator<Item = &nullkit::verify::CheckRecord> {
    r.checks.iter().filter(|c| matches!(c.outcome, Outcome::Pass | Outcome::Fail))
}

fn worst(rs: &[&SuiteResult]) -> f64 {
    rs.iter().flat_map(|r| asserted(r)).map(|c| c.residual).fold(0.0, f64::max)
}

fn criterion_1(rep: &mut Report, all: &[SuiteResult], took: Duration) {
    let rs: Vec<&SuiteResult> = all.iter().filter(|r| r.suite == "factorization").collect();
    let fails: usize = rs.iter().map(|r| r.tally.fail).sum();
    let passes: usize = rs.iter().map(|r| r.tally.pass).sum();
    let w = worst(&rs);
    let points = rs.iter().all(|r| r.points.len() == 20);
    let ok = fails == 0 && passes > 0 && w <= 1e-8 && points && took.as_secs_f64() <= 30.0;
    rep.line(
        "1 factorization",
        ok,
        format!("{} metrics x 20 points, {passes} checks, worst {w:.1e}, {:.1} s", rs.len(), took.as_secs_f64()),
    );
}

fn criterion_2(rep: &mut Report, rng: &mut ChaCha8Rng) {
    let mut worst = 0.0f64;
    let mut count = 0;
    while count < 500 {
        let n = rng.gen_range(3..=5);
        let rank = rng.gen_range(1..=4);
        let s = rng.gen_range(-(rank as i32)..rank as i32);
        let (m, f) = random_frame(rng, n);
        let t = tensor_of_order(rng, &f, &m, rank, s);
        let ws = words(n, rank, |bw| bw >= s + 1);
        let alpha = &ws[rng.gen_range(0..ws.len())];
        let a = bracket_monomial(&t, &f, alpha, &m, tol()).expect("closed form");
        let b = bracket(&t, &f, &monomial_tensor(&f, alpha), &m, tol()).expect("definition");
        worst = worst.max(a.max_diff(&b));
        count += 1;
    }
    rep.line("2 closed form vs definition", worst <= 1e-12, format!("500 pairs, max diff {worst:.1e}"));
}

fn criterion_3(rep: &mut Report, rng: &mut ChaCha8Rng) {
    let mut zero = 0.0f64;
    for _ in 0..200 {
        let n = rng.gen_range(3..=5);
        let rank = rng.gen_range(2..=4);
        let s = rng.gen_range(-(rank as i32)..=rank as i32 - 2);
        let (m, f) = random_frame(rng, n);
        let t = tensor_of_order(rng, &f, &m, rank, s);
        let q = random_tensor(rng, &f, &m, rank, |bw| bw <= -s - 2);
        zero = zero.max(bracket(&t, &f, &q, &m, tol()).expect("in domain").norm());
    }
    let mut lind = 0.0f64;
    for _ in 0..200 {
        let n = rng.gen_range(3..=5);
        let rank = rng.gen_range(1..=4);
        let s = rng.gen_range(-(rank as i32)..rank as i32);
        let (m, f) = random_frame(rng, n);
        let t = tensor_of_order(rng, &f, &m, rank, s);
        let q = random_tensor(rng, &f, &m, rank, |bw| bw <= -s - 1);
        let z: Vec<f64> = (0..n - 2).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let f2 = f.null_rotation(&z).expect("rotation");
        let a = bracket(&t, &f, &q, &m, tol()).expect("in domain");
        let b = bracket(&t, &f2, &q, &m, tol()).expect("in domain");
        lind = lind.max(a.max_diff(&b));
    }
    rep.line(
        "3 zero property, l-independence",
        zero <= 1e-10 && lind <= 1e-10,
        format!("200 + 200 constructions, max |<T|k|Q>| {zero:.1e}, max l-change {lind:.1e}"),
    );
}

fn criterion_4(rep: &mut Report, rng: &mut ChaCha8Rng) {
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.gen_range(3..=5);
        let (m, f) = random_frame(rng, n);
        let (s, lambda, sij) = s_with_null_eigendirection(rng, &f, &m);
        for i in 2..n {
            let a = bracket_monomial(&s, &f, &[0, i], &m, tol()).expect("closed form");
            let b = bracket(&s, &f, &monomial_tensor(&f, &[0, i]), &m, tol()).expect("definition");
            for j in 2..n {
                let want = if i == j { lambda } else { 0.0 } - sij[(i - 2, j - 2)];
                worst = worst.max((a.components[j - 2] - want).abs()).max((b.components[j - 2] - want).abs());
            }
        }
    }
    rep.line("4 map-S identity", worst <= 1e-12, format!("100 random S, max residual {worst:.1e}"));
}

fn criterion_5(rep: &mut Report, all: &[SuiteResult]) {
    let pp = find(all, "surjectivity", "ppwave4");
    let pp_formula = pp.anchor_outcomes("surjectivity/formula").all(|c| c.outcome == Outcome::Pass);
    let pp_worst = pp.worst("surjectivity/formula").unwrap_or(f64::INFINITY);

    let rs: Vec<&SuiteResult> = all.iter().filter(|r| r.suite == "surjectivity").collect();
    let mut synth = BTreeMap::new();
    for r in &rs {
        for c in r.anchor_outcomes("surjectivity/synthetic-formula") {
            if matches!(c.outcome, Outcome::Pass | Outcome::Fail) {
                let e = synth.entry(c.subject.clone()).or_insert((0usize, 0.0f64));
                e.0 += usize::from(c.outcome == Outcome::Pass);
                e.1 = e.1.max(c.residual);
            }
        }
    }
    let fails: usize = rs.iter().map(|r| r.tally.fail).sum();
    let covered = (-2..=1).all(|s| synth.get(&format!("C truncated at {s}")).is_some_and(|e| e.0 > 0));
    let synth_worst = synth.values().map(|e| e.1).fold(0.0, f64::max);

    // Schwarzschild at r = 3: Psi_2 = -M/r^3.
    let e = catalog::get("schwarzschild").unwrap();
    let (geo, k) = field_at(e, &Point::new(vec![0.0, 3.0, 1.2, 0.0]), 1).unwrap();
    let f = JetFrame::complete(&k, &geo.g, &geo.at, None).unwrap().value();
    let c = surjectivity_check(&geo.weyl.value(), &f, &geo.at, 0).unwrap();
    let oracle = -1.0 / 27.0;
    let psi_err = (c.psi.re - oracle).abs().max(c.psi.im.abs());

    let ok = pp_formula && pp_worst <= 1e-9 && covered && synth_worst <= 1e-9 && fails == 0 && psi_err <= 1e-8 && c.residual <= 1e-9;
    rep.line(
        "5 surjectivity formula",
        ok,
        format!(
            "pp-wave s=-2 {pp_worst:.1e}, synthetic s=-2..1 worst {synth_worst:.1e}, Schwarzschild Psi_2 = {:.12} (err {psi_err:.1e}), bracket {:.1e}",
            c.psi.re, c.residual
        ),
    );
}

fn criterion_6(rep: &mut Report) {
    let mut ok = true;
    let mut detail = Vec::new();

    let e = catalog::get("ppwave4").unwrap();
    let (geo, k) = field_at(e, &e.center_point(), 1).unwrap();
    let f = JetFrame::complete(&k, &geo.g, &geo.at, None).unwrap().value();
    let r = kappa_rho(&geo, &k, &f, CONGRUENCE_TOL).unwrap();
    let kr = r.kappa.iter().chain(r.rho.iter().flatten()).fold(0.0f64, |m, x| m.max(x.abs()));
    ok &= r.label == CongruenceLabel::Kundt && kr <= 1e-12;
    detail.push(format!("ppwave4 {} |kappa|,|rho| {kr:.1e}", r.label.as_str()));

    let e = catalog::get("schwarzschild").unwrap();
    let (geo, k) = field_at(e, &e.center_point(), 1).unwrap();
    let f = JetFrame::complete(&k, &geo.g, &geo.at, None).unwrap().value();
    let r = kappa_rho(&geo, &k, &f, CONGRUENCE_TOL).unwrap();
    let so = r.sigma.iter().chain(r.omega.iter()).flatten().fold(0.0f64, |m, x| m.max(x.abs()));
    ok &= r.label == CongruenceLabel::RobinsonTrautman && so <= 1e-10 && r.theta.abs() > 1e-3;
    detail.push(format!("schwarzschild {} sigma,omega {so:.1e} theta {:.3}", r.label.as_str(), r.theta));

    let mut agree = 0;
    for e in catalog::all() {
        let (geo, k) = field_at(e, &e.center_point(), 1).unwrap();
        let f = JetFrame::complete(&k, &geo.g, &geo.at, None).unwrap().value();
        let r = kappa_rho(&geo, &k, &f, CONGRUENCE_TOL).unwrap();
        let norm = kundt_frame_norm(&kundt_tensor_residual(&geo, &k).unwrap(), &f, &geo.at).unwrap();
        let kr = r.kappa.iter().chain(r.rho.iter().flatten()).fold(0.0f64, |m, x| m.max(x.abs()));
        let same = (norm - kr).abs() <= 1e-10 * (1.0 + kr) && (norm <= r.tol) == r.flags.kundt;
        if same {
            agree += 1;
        } else {
            ok = false;
            detail.push(format!("{}: Kundt tensor {norm:.2e} vs flags {:?}", e.name, r.flags.kundt));
        }
    }
    detail.push(format!("Kundt tensor agrees with flags on {agree}/{}", catalog::all().len()));
    rep.line("6 congruence ground truths", ok, detail.join("; "));
}

fn criterion_7(rep: &mut Report, all: &[SuiteResult]) {
    const SUITES: [&str; 5] = ["k-III", "Ric-III", "Ric-N", "Weyl-III", "Weyl-N"];
    let rs: Vec<&SuiteResult> = all.iter().filter(|r| SUITES.contains(&r.suite)).collect();
    let fails: usize = rs.iter().map(|r| r.tally.fail).sum();
    let mut identity = 0.0f64;
    let mut conclusion = 0.0f64;
    for r in &rs {
        for c in asserted(r) {
            if c.anchor.ends_with("/geodesic") || c.anchor.ends_with("/kundt") {
                conclusion = conclusion.max(c.residual);
            } else {
                identity = identity.max(c.residual);
            }
        }
    }
    let passing: Vec<String> = rs
        .iter()
        .filter(|r| r.status == SuiteStatus::Pass && r.suite != "k-III")
        .map(|r| format!("{}/{}", r.suite, r.metric))
        .collect();
    let schw_na = SUITES[1..].iter().all(|s| find(all, s, "schwarzschild").status == SuiteStatus::NotApplicable);
    let ok = fails == 0 && identity <= 1e-8 && conclusion <= 1e-9 && schw_na && !passing.is_empty();
    rep.line(
        "7 proposition suites",
        ok,
        format!(
            "identities {identity:.1e}, conclusions {conclusion:.1e}, pass on [{}], Schwarzschild III/N not applicable: {schw_na}",
            passing.join(", ")
        ),
    );
}

fn criterion_8(rep: &mut Report, rng: &mut ChaCha8Rng) {
    let mut sym = 0.0f64;
    for _ in 0..100 {
        let (m, _) = random_metric(rng, 4);
        let s = random_tracefree(rng, &m);
        let p = plebanski(&s, &m).unwrap().all_down(&m).unwrap();
        sym = sym.max(weyl_like_residual(&p, &m));
    }
    let mut tach = 0.0f64;
    for _ in 0..100 {
        let (m, ainv) = random_metric(rng, 4);
        let w: Vec<f64> = (0..4).map(|i| if i == 0 { rng.gen_range(-0.5..0.5) } else { rng.gen_range(-1.0..1.0) }).collect();
        let v: Vec<f64> = (ainv * nalgebra::DVector::from_vec(w)).iter().copied().collect();
        let norm = m.dot(&v, &v).sqrt();
        let u: Vec<f64> = m.lower(&v).iter().map(|x| x / norm).collect();
        let lambda = rng.gen_range(-2.0..2.0);
        let g = m.matrix();
        let s = nalgebra::DMatrix::from_fn(4, 4, |a, b| lambda * (u[a] * u[b] - (g[(a, b)] - u[a] * u[b]) / 3.0));
        let p = plebanski(&TensorValue::from_matrix(&s, [Variance::Down; 2]), &m).unwrap();
        tach = tach.max(p.max_abs());
    }
    rep.line(
        "8 Plebanski tensor",
        sym <= 1e-10 && tach <= 1e-12,
        format!("symmetry/trace {sym:.1e} on 100 S, |P| {tach:.1e} on 100 tachyonic S"),
    );
}

fn criterion_9(rep: &mut Report, all: &[SuiteResult]) {
    let r = find(all, "conformally-flat", "warped4");
    let w = |a: &str| r.worst(a).unwrap_or(f64::INFINITY);
    let bianchi = w("conformally-flat/bianchi");
    let m2 = w("conformally-flat/m2id");
    let cid = w("conformally-flat/cid");
    let end = w("conformally-flat/einstein-endpoint");
    let typed = w("conformally-flat/uniform-type-d");
    let d3 = r.notes.iter().filter(|n| n.starts_with("d_3 lower bound")).all(|n| n.starts_with("d_3 lower bound 1 "))
        && r.notes.iter().any(|n| n.starts_with("d_3 lower bound"));
    let ok = r.status == SuiteStatus::Pass && bianchi <= 1e-9 && m2 <= 1e-9 && cid <= 1e-9 && end <= 1e-8 && typed <= 1e-10 && d3;
    rep.line(
        "9 conformally flat on warped4",
        ok,
        format!("bianchi {bianchi:.1e}, nabla m2 {m2:.1e}, nabla theta ^ m2 {cid:.1e}, endpoint {end:.1e}, type D {typed:.1e}, d_3 = 1: {d3}"),
    );
}

fn criterion_10(rep: &mut Report) {
    let e = catalog::get("ds2r2").unwrap();
    let fx = Fixture::from_entry(e).unwrap();
    let d = diagnose(&fx, &e.center_point(), 3, tol()).unwrap();
    let route = d.routes.iter().find(|r| r.name == "ricci-generic");
    let fired = route.is_some_and(|r| r.gate.holds() && r.measured == Some(true));
    let ok = d.verdict == Verdict::Consistent && d.d.first() == Some(&(d.dim - 2)) && d.congruence.flags.kundt && fired;
    rep.line(
        "10 generic type II route",
        ok,
        format!("ds2r2: d_1 = {:?}, Kundt {}, verdict {}", d.d.first(), d.congruence.flags.kundt, d.verdict.as_str()),
    );
}

fn criterion_11(rep: &mut Report) {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_nullkit"))
            .args(["verify", "--metric", "ppwave4", "--suite", "all", "--seed", "7", "--json"])
            .output()
            .expect("binary runs")
    };
    let (a, b) = (run(), run());
    let ok = a.status.success() && b.status.success() && !a.stdout.is_empty() && a.stdout == b.stdout;
    rep.line("11 determinism", ok, format!("two runs, {} bytes each, identical: {}", a.stdout.len(), a.stdout == b.stdout));
}

fn node_cap(rep: &mut Report) {
    let counts: Vec<(&str, usize)> = catalog::all()
        .iter()
        .map(|e| (e.name, e.metric().derivative_node_count().expect("derivatives")))
        .collect();
    let (name, max) = counts.iter().copied().max_by_key(|c| c.1).unwrap();
    rep.line("node cap", max < NODE_CAP, format!("largest derivative table {max} nodes ({name}), cap {NODE_CAP}"));
}

fn coverage(rep: &mut Report, all: &[SuiteResult]) {
    let missing: Vec<&str> = manifest()
        .into_iter()
        .filter(|a| !all.iter().any(|r| r.anchor_outcomes(a).any(|c| c.outcome == Outcome::Pass)))
        .collect();
    rep.line(
        "anchor coverage",
        missing.is_empty(),
        format!("{} anchors, never exercised: [{}]", manifest().len(), missing.join(", ")),
    );
}

fn main() {
    let start = Instant::now();
    let mut rep = Report { lines: Vec::new() };
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);

    node_cap(&mut rep);
    let (all, time) = sweep();
    criterion_1(&mut rep, &all, time["factorization"]);
    criterion_2(&mut rep, &mut rng);
    criterion_3(&mut rep, &mut rng);
    criterion_4(&mut rep, &mut rng);
    criterion_5(&mut rep, &all);
    criterion_6(&mut rep);
    criterion_7(&mut rep, &all);
    criterion_8(&mut rep, &mut rng);
    criterion_9(&mut rep, &all);
    criterion_10(&mut rep);
    criterion_11(&mut rep);
    coverage(&mut rep, &all);

    let secs = start.elapsed().as_secs_f64();
    rep.line("runtime", secs <= 120.0, format!("{secs:.1} s"));

    let failed: Vec<&str> = rep.lines.iter().filter(|l| !l.1).map(|l| l.0.as_str()).collect();
    if failed.is_empty() {
        println!("acceptance: all {} criteria pass", rep.lines.len());
    } else {
        println!("acceptance: FAILED {}", failed.join(", "));
        std::process::exit(1);
    }
}
