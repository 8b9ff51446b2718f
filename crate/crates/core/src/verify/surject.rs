//! In dimension four the bracket of a Weyl-like tensor with `bo = s` hits
//! `Ψ_{2−s} π(m)` on a single monomial, so its image is all of `c⊥/c`.

use crate::alignment::{boost_order_of_components, truncate_boost_order, AlignmentReport, Tolerances};
use crate::bilinear::{bracket_unchecked, monomial_tensor};
use crate::error::{Error, Result};
use crate::frames::{contract_complex, frame_components, np_frame, Complex, CVector, NullFrame};
use crate::geometry::weyl_like_residual;
use crate::metric_ir::Point;
use crate::tensor::{MetricAtPoint, TensorValue};

use super::subjects::{grade, Site};
use super::{Fixture, Gate, Hypothesis, Recorder, IDENTITY_BUDGET};

pub(super) const ANCHORS: &[(&str, &str)] = &[
    ("surjectivity/formula", "<W|k|Q_s> = (s+3) Psi_(2-s) pi(m) for the Weyl tensor, bo(C) = s"),
    ("surjectivity/synthetic-formula", "<W|k|Q_s> = (s+3) Psi_(2-s) pi(m) for boost-truncated Weyl tensors, s = -2..1"),
    ("surjectivity/truncation-weyl-like", "boost-weight truncation of a Weyl tensor is Weyl-like"),
    ("surjectivity/tracefree-frame", "W_a0b1 + W_a1b0 + W_amb(mbar) + W_a(mbar)bm = 0"),
    ("surjectivity/span", "<W|k|Q_s> and its conjugate span c-perp / c when Psi_(2-s) != 0"),
];

/// Budget for the bracket formula, relative to `1 + |Ψ_{2−s}|`.
pub const FORMULA_BUDGET: f64 = 1e-9;
const WEYL_LIKE_BUDGET: f64 = 1e-10;

/// Null rotation about `l` used to misalign `k` before truncating.
const TILT: [f64; 2] = [0.6, -0.35];

/// Outcome of the bracket formula for one tensor and one `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurjectivityCheck {
    pub s: i32,
    pub psi: Complex,
    /// `⟨W|k|Q_s⟩` in the basis `π(m₂), π(m₃)`.
    pub bracket: [Complex; 2],
    pub expected: [Complex; 2],
    /// `max |bracket − expected| / (1 + |Ψ_{2−s}|)`.
    pub residual: f64,
    /// Real rank of the image of `Q_s` and its conjugate.
    pub span_rank: usize,
}

/// Frame labels and weights of `k, l, m, m̄`; `m = (m₂ − i m₃)/√2`.
fn expand(v: char) -> Vec<(usize, Complex)> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match v {
        'k' => vec![(0, Complex::real(1.0))],
        'l' => vec![(1, Complex::real(1.0))],
        'm' => vec![(2, Complex::real(h)), (3, Complex::new(0.0, -h))],
        _ => vec![(2, Complex::real(h)), (3, Complex::new(0.0, h))],
    }
}

/// `Q_s` as words in `k, l, m, M = m̄`.
fn q_word(s: i32) -> Result<&'static str> {
    Ok(match s {
        -2 => "lMmM",
        -1 => "kmlM",
        0 => "kmmM",
        1 => "kmkm",
        _ => {
            return Err(Error::Domain {
                expr: format!("s = {s}"),
                reason: "Q_s is defined for -2 <= s <= 1".into(),
            })
        }
    })
}

/// Real and imaginary parts of `Q_s` as contravariant tensors.
pub fn q_tensor(f: &NullFrame, s: i32) -> Result<(TensorValue, TensorValue)> {
    let word: Vec<char> = q_word(s)?.chars().collect();
    let n = f.dim();
    let mut terms: Vec<(Vec<usize>, Complex)> = vec![(Vec::new(), Complex::real(1.0))];
    for c in word {
        let mut next = Vec::new();
        for (alpha, w) in &terms {
            for (lab, x) in expand(c) {
                let mut a = alpha.clone();
                a.push(lab);
                next.push((a, *w * x));
            }
        }
        terms = next;
    }
    let zero = || TensorValue::zeros(n, vec![crate::tensor::Variance::Up; 4]);
    let (mut re, mut im) = (zero(), zero());
    for (alpha, w) in terms {
        let mono = monomial_tensor(f, &alpha);
        re = re.add(&mono.scale(w.re))?;
        im = im.add(&mono.scale(w.im))?;
    }
    Ok((re, im))
}

/// Bracket of `W` against `Q_s` from the defining formula, compared with
/// `(s+3) Ψ_{2−s} π(m)`.
pub fn surjectivity_check(w: &TensorValue, f: &NullFrame, m: &MetricAtPoint, s: i32) -> Result<SurjectivityCheck> {
    let nf = np_frame(f)?;
    let wd = w.all_down(m)?;
    let psi = crate::alignment::np_scalars(&wd, &nf, m)?.psi[(2 - s) as usize];
    let (qr, qi) = q_tensor(f, s)?;
    let br = bracket_unchecked(&wd, f, &qr, m)?.components;
    let bi = bracket_unchecked(&wd, f, &qi, m)?.components;
    let bracket = [Complex::new(br[0], bi[0]), Complex::new(br[1], bi[1])];
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let c = psi.scale(f64::from(s + 3));
    let expected = [c * Complex::real(h), c * Complex::new(0.0, -h)];
    let residual = (0..2).map(|j| (bracket[j] - expected[j]).abs()).fold(0.0, f64::max) / (1.0 + psi.abs());
    let rows = vec![br.clone(), bi.clone()];
    let scale = br.iter().chain(&bi).fold(0.0f64, |a, x| a.max(x.abs()));
    let (basis, _) = crate::bilinear::span_basis(&rows, 2, 1e-10 * (1.0 + scale));
    Ok(SurjectivityCheck {
        s,
        psi,
        bracket,
        expected,
        residual,
        span_rank: basis.len(),
    })
}

/// Largest violation of the frame form of the trace condition, relative to
/// `1 + ‖W‖∞`.
pub fn tracefree_frame_residual(w: &TensorValue, f: &NullFrame, m: &MetricAtPoint) -> Result<f64> {
    let nf = np_frame(f)?;
    let wd = w.all_down(m)?;
    let v: [&CVector; 4] = [&nf.k, &nf.l, &nf.m, &nf.mbar];
    let mut worst = 0.0f64;
    for a in v {
        for b in v {
            let t = contract_complex(&wd, &[a, &nf.k, b, &nf.l])
                + contract_complex(&wd, &[a, &nf.l, b, &nf.k])
                + contract_complex(&wd, &[a, &nf.m, b, &nf.mbar])
                + contract_complex(&wd, &[a, &nf.mbar, b, &nf.m]);
            worst = worst.max(t.abs());
        }
    }
    Ok(worst / (1.0 + wd.max_abs()))
}

/// Null rotation about `l`: `k` moves, `l` stays.
pub fn rotate_about_l(f: &NullFrame, z: &[f64]) -> Result<NullFrame> {
    let mut swapped = f.clone();
    swapped.vectors.swap(0, 1);
    let mut r = swapped.null_rotation(z)?;
    r.vectors.swap(0, 1);
    Ok(r)
}

/// `W` with `k` tilted by a null rotation about `l`, then truncated to the
/// boost-weight parts `≤ s` in the tilted frame.
pub fn synthetic_weyl(w: &TensorValue, f: &NullFrame, m: &MetricAtPoint, s: i32) -> Result<(TensorValue, NullFrame)> {
    let ft = rotate_about_l(f, &TILT)?;
    Ok((truncate_boost_order(w, &ft, m, s)?, ft))
}

/// Hypothesis `bo = s` with the leading weight clearly present.
fn genuine_bo(w: &TensorValue, f: &NullFrame, m: &MetricAtPoint, s: i32, tol: Tolerances, what: &str) -> Result<(Hypothesis, String, AlignmentReport)> {
    let rep = boost_order_of_components(&frame_components(w, f, m)?, tol);
    let thr = tol.threshold(rep.norm);
    let above = rep.weights.iter().filter(|e| e.b > s).fold(0.0f64, |a, e| a.max(e.max_abs));
    let at_s = rep.weights.iter().find(|e| e.b == s).map_or(0.0, |e| e.max_abs);
    let status = grade(above, thr, false).max(grade(at_s, thr, true));
    let bo = rep.bo.map_or("none".to_string(), |b| b.to_string());
    Ok((status, format!("bo({what}) = {s}: {} (measured {bo})", status.as_str()), rep))
}

fn dim_gate(n: usize) -> Gate {
    let st = if n == 4 { Hypothesis::Holds } else { Hypothesis::Fails };
    Gate::default().with((st, format!("dimension 4: {} (n = {n})", st.as_str())))
}

fn psi_gate(c: &SurjectivityCheck, tol: Tolerances, scale: f64) -> (Hypothesis, String) {
    let st = grade(c.psi.abs(), tol.threshold(scale), true);
    (st, format!("Psi_{} != 0: {}", 2 - c.s, st.as_str()))
}

fn check_one(rec: &mut Recorder, w: &TensorValue, f: &NullFrame, m: &MetricAtPoint, s: i32, base: Gate, formula: &'static str, name: &str) -> Result<()> {
    let tol = Tolerances::default();
    let (st, text, rep) = genuine_bo(w, f, m, s, tol, name)?;
    let gate = base.with((st, text));
    let wl = weyl_like_residual(&w.all_down(m)?, m);
    let wl_st = if wl <= 1e-9 { Hypothesis::Holds } else { Hypothesis::Fails };
    let gate = gate.with((wl_st, format!("{name} Weyl-like: {}", wl_st.as_str())));
    if !gate.holds() {
        rec.record(formula, name, &gate, 0.0, FORMULA_BUDGET);
        rec.record("surjectivity/tracefree-frame", name, &gate, 0.0, IDENTITY_BUDGET);
        rec.record("surjectivity/span", name, &gate, 0.0, 0.0);
        return Ok(());
    }
    let c = surjectivity_check(w, f, m, s)?;
    rec.record(formula, name, &gate, c.residual, FORMULA_BUDGET);
    rec.record("surjectivity/tracefree-frame", name, &gate, tracefree_frame_residual(w, f, m)?, IDENTITY_BUDGET);
    let span_gate = gate.with(psi_gate(&c, tol, rep.norm));
    rec.record("surjectivity/span", name, &span_gate, (2 - c.span_rank) as f64, 0.0);
    Ok(())
}

pub(super) fn run(fx: &Fixture, p: &Point, rec: &mut Recorder) -> Result<()> {
    let site = Site::at(fx, p)?;
    let m = &site.geo.at;
    let n = site.dim();
    let base = dim_gate(n);
    let c = site.geo.weyl.value();
    let nonzero = if c.max_abs() > 1e-10 { Hypothesis::Holds } else { Hypothesis::Fails };
    let base = base.with((nonzero, format!("C non-zero: {}", nonzero.as_str())));
    if !base.holds() {
        rec.record("surjectivity/formula", "C", &base, 0.0, FORMULA_BUDGET);
        rec.record("surjectivity/synthetic-formula", "C truncated", &base, 0.0, FORMULA_BUDGET);
        rec.record("surjectivity/truncation-weyl-like", "C truncated", &base, 0.0, WEYL_LIKE_BUDGET);
        rec.record("surjectivity/tracefree-frame", "C", &base, 0.0, IDENTITY_BUDGET);
        rec.record("surjectivity/span", "C", &base, 0.0, 0.0);
        return Ok(());
    }
    let bo = boost_order_of_components(&frame_components(&c, &site.f, m)?, Tolerances::default()).bo;
    let s = bo.unwrap_or(-3).clamp(-2, 1);
    check_one(rec, &c, &site.f, m, s, base.clone(), "surjectivity/formula", "C")?;
    for s in -2..=1 {
        let (w, ft) = synthetic_weyl(&c, &site.f, m, s)?;
        let name = format!("C truncated at {s}");
        let res = weyl_like_residual(&w.all_down(m)?, m);
        rec.record("surjectivity/truncation-weyl-like", &name, &base, res, WEYL_LIKE_BUDGET);
        check_one(rec, &w, &ft, m, s, base.clone(), "surjectivity/synthetic-formula", &name)?;
    }
    Ok(())
}

