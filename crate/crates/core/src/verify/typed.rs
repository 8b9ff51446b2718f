//! `S = λ(u u − h/3)`: the structure of `∇u` and the three cases for `u̇`.

use crate::alignment::Tolerances;
use crate::bilinear::{k_subspace, GeneratorPolicy};
use crate::error::Result;
use crate::frames::frame_components;
use crate::geometry::plebanski;
use crate::metric_ir::Point;

use super::confflat::negative_weight;
use super::subjects::{grade, Site, Subject};
use super::tachyon::Tachyon;
use super::{Fixture, Gate, Hypothesis, Recorder, IDENTITY_BUDGET};

const TYPE_D_BUDGET: f64 = 1e-10;

pub(super) const ANCHORS: &[(&str, &str)] = &[
    ("type-d-structure/tachyonic-form", "S = lambda (u u - h/3) with u unit spacelike"),
    ("type-d-structure/nabla-u", "nabla_b u_a = u-dot_a u_b + theta h_ab"),
    ("type-d-structure/lambda-gradient", "h_a^b nabla_b lambda = lambda u-dot_a = (1/4) h_a^b nabla_b R"),
    ("type-d-structure/case-1-d2", "u-dot spacelike, k orthogonal to u and u-dot: d_2 = 2"),
    ("type-d-structure/case-3-type-d", "u-dot = 0: {S, nabla S} uniformly of type D for k orthogonal to u"),
];

#[derive(Debug, Clone, Copy, PartialEq)]
enum Acceleration {
    Spacelike,
    Null,
    Zero,
    Timelike,
}

impl Acceleration {
    fn case(self) -> &'static str {
        match self {
            Acceleration::Spacelike => "case (1): u-dot spacelike",
            Acceleration::Null => "case (2): u-dot null and non-zero",
            Acceleration::Zero => "case (3): u-dot = 0",
            Acceleration::Timelike => "u-dot timelike: no null direction c with S special, outside cases (1)-(3)",
        }
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn skip_all(rec: &mut Recorder, gate: &Gate) {
    for (a, _) in ANCHORS {
        rec.record(a, "S", gate, 0.0, IDENTITY_BUDGET);
    }
}

pub(super) fn run(fx: &Fixture, p: &Point, rec: &mut Recorder) -> Result<()> {
    let tol = Tolerances::default();
    let site = Site::at(fx, p)?;
    let geo = &site.geo;
    let at = &geo.at;
    let n = site.dim();
    if n != 4 {
        let gate = Gate::default().with((Hypothesis::Fails, format!("dimension 4 (n = {n}): fails")));
        skip_all(rec, &gate);
        return Ok(());
    }
    let sv = geo.tracefree_ricci.value();
    let s_norm = sv.max_abs();
    let s_st = grade(s_norm, tol.threshold(0.0), true);
    let mut gate = Gate::default().with((s_st, format!("S != 0: {}", s_st.as_str())));
    let pl = plebanski(&sv, at)?.max_abs();
    let p_st = grade(pl, tol.threshold(s_norm * s_norm), false);
    gate = gate.with((p_st, format!("P = 0: {}", p_st.as_str())));
    let tach = if gate.holds() { Tachyon::at(geo)? } else { None };
    let Some(t) = tach else {
        let gate = gate.with((Hypothesis::Fails, "S of the form lambda (u u - h/3): fails".into()));
        skip_all(rec, &gate);
        return Ok(());
    };

    let u = t.u_value();
    let up = at.raise(&u);
    let lam = t.lambda.value();
    let mut form = (at.dot(&up, &up) - 1.0).abs();
    for a in 0..4 {
        for b in 0..4 {
            let h = at.g.get(&[a, b]) - u[a] * u[b];
            form = form.max((sv.get(&[a, b]) - lam * (u[a] * u[b] - h / 3.0)).abs());
        }
    }
    rec.record("type-d-structure/tachyonic-form", "S", &gate, form / (1.0 + s_norm), IDENTITY_BUDGET);

    // The structure of ∇u comes from the conformally flat Bianchi identity.
    let rm_scale = geo.riemann.value().max_abs();
    let c_max = geo.weyl.value().max_abs();
    let c_st = grade(c_max, tol.threshold(rm_scale), false);
    let gate = gate.with((c_st, format!("C = 0: {}", c_st.as_str())));
    rec.record("type-d-structure/nabla-u", "u", &gate, t.structure_residual(geo), IDENTITY_BUDGET);

    let ud = t.udot(geo);
    let dl = t.lambda.gradient();
    let dr = geo.scalar.gradient();
    let proj = |w: &[f64]| -> Vec<f64> {
        let along: f64 = (0..4).map(|b| up[b] * w[b]).sum();
        (0..4).map(|a| w[a] - u[a] * along).collect()
    };
    let (hl, hr) = (proj(&dl), proj(&dr));
    let mut grad = 0.0f64;
    for a in 0..4 {
        grad = grad.max((hl[a] - lam * ud[a]).abs()).max((lam * ud[a] - 0.25 * hr[a]).abs());
    }
    let g_scale = 1.0 + max_abs(&hl) + max_abs(&hr) + lam.abs() * max_abs(&ud);
    rec.record("type-d-structure/lambda-gradient", "lambda", &gate, grad / g_scale, IDENTITY_BUDGET);

    // Classify u-dot.
    let du_scale = t.du.value().max_abs();
    let thr = tol.threshold(du_scale);
    let ud_norm = max_abs(&ud);
    let sq = at.dot(&at.raise(&ud), &at.raise(&ud));
    let acc = if grade(ud_norm, thr, false) == Hypothesis::Holds {
        Acceleration::Zero
    } else if sq.abs() <= thr * ud_norm {
        Acceleration::Null
    } else if sq > 0.0 {
        Acceleration::Spacelike
    } else {
        Acceleration::Timelike
    };
    rec.note(format!("{} at point {}", acc.case(), rec.point));

    let k = site.f.k();
    let ku = at.dot(&up, k).abs();
    let ku_st = grade(ku, tol.threshold(1.0), false);
    let gate_k = gate.clone().with((ku_st, format!("k orthogonal to u: {}", ku_st.as_str())));

    let ks = k_subspace(geo, &site.f, 2, GeneratorPolicy::CurvatureBasic, tol)?;
    rec.note(format!("d_2 lower bound {} at point {}", ks.d, rec.point));
    let kud = at.dot(&at.raise(&ud), k).abs();
    let kud_st = grade(kud, tol.threshold(ud_norm), false);
    let g1 = gate_k
        .clone()
        .with(held(acc == Acceleration::Spacelike, "u-dot spacelike"))
        .with((kud_st, format!("k orthogonal to u-dot: {}", kud_st.as_str())));
    rec.record("type-d-structure/case-1-d2", "k", &g1, (ks.d as f64 - 2.0).abs(), 0.0);

    // Case (3): pick l orthogonal to u by a null rotation about k.
    let g3 = gate_k.with(held(acc == Acceleration::Zero, "u-dot = 0"));
    let mut type_d = 0.0;
    if g3.holds() {
        let mu: Vec<f64> = (2..4).map(|j| at.dot(&up, site.f.m(j))).collect();
        let m2: f64 = mu.iter().map(|x| x * x).sum();
        let lu = at.dot(&up, site.f.l());
        let z: Vec<f64> = mu.iter().map(|x| -lu * x / m2).collect();
        let f = site.f.null_rotation(&z)?;
        let ssub = Subject::new(&site, "S", geo.tracefree_ricci.clone(), 1)?;
        let sf = frame_components(&sv, &f, at)?;
        let dsf = frame_components(&ssub.jets[1].value(), &f, at)?;
        type_d = negative_weight(&sf).max(negative_weight(&dsf));
    }
    rec.record("type-d-structure/case-3-type-d", "S, nabla S", &g3, type_d, TYPE_D_BUDGET);
    Ok(())
}

fn held(ok: bool, text: &str) -> (Hypothesis, String) {
    let st = if ok { Hypothesis::Holds } else { Hypothesis::Fails };
    (st, format!("{text}: {}", st.as_str()))
}
