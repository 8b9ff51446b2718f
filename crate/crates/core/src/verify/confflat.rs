//! Conformally flat metrics with `bo(S) = 0` and `d_3 = 1`: the frame
//! relations behind the Kundt / warped-product dichotomy.

use nalgebra::DMatrix;

use crate::alignment::{boost_weight, Tolerances};
use crate::bilinear::{bracket_closed_form, k_subspace, GeneratorPolicy};
use crate::error::{Error, Result};
use crate::frames::{frame_components, NullFrame};
use crate::metric_ir::Point;
use crate::tensor::{multi_indices, TensorValue};

use super::subjects::{bound, grade, Site, Subject};
use super::tachyon::Tachyon;
use super::{Fixture, Gate, Hypothesis, Recorder, CONCLUSION_BUDGET, IDENTITY_BUDGET};

const DEPTH: usize = 3;
const TYPE_D_BUDGET: f64 = 1e-10;

pub(super) const ANCHORS: &[(&str, &str)] = &[
    ("conformally-flat/bianchi", "nabla_[a S_b]c + (1/12) nabla_[a R g_b]c = 0"),
    ("conformally-flat/gauge", "frame with pi(m2) spanning K_3 and S_12 = 0"),
    ("conformally-flat/s-bracket", "<S|k|k m3>_3 = S_01 - S_33 = 0 and <S|k|k m2>_3 = -S_23 = 0"),
    ("conformally-flat/dsrel-expansion", "<nabla S|k|Q>_3 equals the listed component sums"),
    ("conformally-flat/dsrel-vanishing", "<nabla S|k|Q>_3 = 0 for the nine listed Q"),
    ("conformally-flat/dsrel-333", "nabla_3 S_33 = nabla_1 S_03 = nabla_0 S_13 = nabla_3 S_01 = 0"),
    ("conformally-flat/s13rel", "nabla_X S_33 - nabla_X S_01 = 3 S_13 nabla_X k_3 = 0 for X in c-perp"),
    ("conformally-flat/ddsrel-expansion", "<nabla nabla S|k|Q>_3 equals the listed component sums"),
    ("conformally-flat/ddsrel", "second-derivative sums = (nabla S)(nabla k) products = 0, twelve relations"),
    ("conformally-flat/s11rel", "nabla_X S_13 = S_11 nabla_X k_3 for X = k, m2, m3"),
    ("conformally-flat/case-i-kundt", "{S, nabla S} not uniformly of type D implies kappa = rho = 0"),
    ("conformally-flat/uniform-type-d", "P = 0 and u-dot = 0 imply {S, nabla S} uniformly of type D"),
    ("conformally-flat/m2rel", "nabla_2 (m2)_3 = 0 and nabla_1 (m2)_0 = nabla_0 (m2)_1 = nabla_3 (m2)_3"),
    ("conformally-flat/m2id", "nabla m2 = theta h with h = g - m2 m2"),
    ("conformally-flat/cid", "nabla theta ^ m2 = 0"),
    ("conformally-flat/endeq", "<Rm|k|k l k m3>_3 = R_0101 - R_3103 = 0"),
    ("conformally-flat/einstein-endpoint", "hat R_01 - hat R_33 = R_1001 + R_3031 - 2 R_0313 = 0"),
];

/// `<∇S|k|Q>_3` words and the displayed sums, as `(coef, ∇S index)`.
const DSREL: &[(&[usize], &[(f64, [usize; 3])])] = &[
    (&[0, 3, 3], &[(-1.0, [3, 3, 3]), (2.0, [0, 1, 3])]),
    (&[3, 0, 3], &[(-1.0, [3, 3, 3]), (1.0, [1, 0, 3]), (1.0, [3, 0, 1])]),
    (&[1, 0, 0], &[(-2.0, [1, 0, 3])]),
    (&[0, 0, 1], &[(-1.0, [3, 0, 1]), (-1.0, [0, 1, 3])]),
    (&[0, 2, 3], &[(-1.0, [3, 2, 3]), (1.0, [0, 2, 1])]),
    (&[2, 0, 3], &[(-1.0, [2, 3, 3]), (1.0, [2, 0, 1])]),
    (&[3, 0, 2], &[(-1.0, [3, 3, 2]), (1.0, [1, 0, 2])]),
    (&[0, 2, 2], &[(-1.0, [3, 2, 2])]),
    (&[2, 2, 0], &[(-1.0, [2, 2, 3])]),
];

/// One second-derivative relation: optional bracket word, the sum over
/// `∇∇S` components, and `c · ∇S[x] · ∇k[y]`.
struct DdsRel {
    word: Option<[usize; 4]>,
    sum: &'static [(f64, [usize; 4])],
    coef: f64,
    ds: [usize; 3],
    dk: [usize; 2],
}

const DDSREL: &[DdsRel] = &[
    DdsRel {
        word: Some([3, 3, 0, 3]),
        sum: &[(-1.0, [3, 3, 3, 3]), (1.0, [1, 3, 0, 3]), (1.0, [3, 1, 0, 3]), (1.0, [3, 3, 0, 1])],
        coef: -3.0,
        ds: [3, 1, 3],
        dk: [3, 3],
    },
    DdsRel {
        word: Some([2, 3, 0, 3]),
        sum: &[(-1.0, [2, 3, 3, 3]), (1.0, [2, 1, 0, 3]), (1.0, [2, 3, 0, 1])],
        coef: -3.0,
        ds: [3, 1, 3],
        dk: [2, 3],
    },
    DdsRel {
        word: None,
        sum: &[(-1.0, [0, 3, 3, 3]), (1.0, [0, 3, 0, 1])],
        coef: -3.0,
        ds: [3, 1, 3],
        dk: [0, 3],
    },
    DdsRel {
        word: Some([3, 2, 0, 3]),
        sum: &[(-1.0, [3, 2, 3, 3]), (1.0, [1, 2, 0, 3]), (1.0, [3, 2, 0, 1])],
        coef: -3.0,
        ds: [2, 1, 3],
        dk: [3, 3],
    },
    DdsRel {
        word: Some([2, 2, 0, 3]),
        sum: &[(-1.0, [2, 2, 3, 3]), (1.0, [2, 2, 0, 1])],
        coef: -3.0,
        ds: [2, 1, 3],
        dk: [2, 3],
    },
    DdsRel {
        word: None,
        sum: &[(-1.0, [0, 2, 3, 3]), (1.0, [0, 2, 0, 1])],
        coef: -1.0,
        ds: [2, 1, 3],
        dk: [0, 3],
    },
    DdsRel {
        word: Some([3, 2, 0, 2]),
        sum: &[(-1.0, [3, 2, 3, 2]), (1.0, [1, 2, 0, 2])],
        coef: -1.0,
        ds: [2, 1, 2],
        dk: [3, 3],
    },
    DdsRel {
        word: Some([2, 2, 0, 2]),
        sum: &[(-1.0, [2, 2, 3, 2])],
        coef: -1.0,
        ds: [2, 1, 2],
        dk: [2, 3],
    },
    DdsRel {
        word: None,
        sum: &[(1.0, [0, 2, 2, 3])],
        coef: 1.0,
        ds: [2, 1, 2],
        dk: [0, 3],
    },
    DdsRel {
        word: Some([3, 0, 2, 2]),
        sum: &[(-1.0, [3, 3, 2, 2]), (1.0, [1, 0, 2, 2])],
        coef: -1.0,
        ds: [1, 2, 2],
        dk: [3, 3],
    },
    DdsRel {
        word: Some([2, 0, 2, 2]),
        sum: &[(-1.0, [2, 3, 2, 2])],
        coef: -1.0,
        ds: [1, 2, 2],
        dk: [2, 3],
    },
    DdsRel {
        word: None,
        sum: &[(1.0, [0, 3, 2, 2])],
        coef: 1.0,
        ds: [1, 2, 2],
        dk: [0, 3],
    },
];

fn tol() -> Tolerances {
    Tolerances::default()
}

/// Frame at the point with `π(m₂)` along `z` (components in the site
/// frame) and `S₁₂ = 0`.
pub fn gauge_frame(f: &NullFrame, z: &[f64], s: &TensorValue, m: &crate::tensor::MetricAtPoint, thr: f64) -> Result<NullFrame> {
    let norm = (z[0] * z[0] + z[1] * z[1]).sqrt();
    let (a, b) = (z[0] / norm, z[1] / norm);
    let r = DMatrix::from_row_slice(2, 2, &[a, b, -b, a]);
    let f1 = f.spin(&r)?;
    let sf = frame_components(s, &f1, m)?;
    let den = sf.get(&[0, 1]) - sf.get(&[2, 2]);
    if den.abs() <= thr {
        return Err(Error::DegenerateGauge);
    }
    f1.null_rotation(&[sf.get(&[1, 2]) / den, 0.0])
}

/// Largest negative-weight component, relative to `1 + ‖T‖∞`.
pub(super) fn negative_weight(tf: &TensorValue) -> f64 {
    let mut worst = 0.0f64;
    for (i, idx) in multi_indices(tf.dim(), tf.rank()).enumerate() {
        if boost_weight(&idx) < 0 {
            worst = worst.max(tf.components()[i].abs());
        }
    }
    worst / (1.0 + tf.max_abs())
}

fn kundt_norm(site: &Site) -> f64 {
    let k = site.kappa.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    site.rho.iter().flatten().fold(k, |m, x| m.max(x.abs()))
}

fn held(ok: bool, text: String) -> (Hypothesis, String) {
    let st = if ok { Hypothesis::Holds } else { Hypothesis::Fails };
    (st, format!("{text}: {}", st.as_str()))
}

pub(super) fn run(fx: &Fixture, p: &Point, rec: &mut Recorder) -> Result<()> {
    let site = Site::at(fx, p)?;
    let geo = &site.geo;
    let at = &geo.at;
    let n = site.dim();
    if n != 4 {
        let gate = Gate::default().with(held(false, format!("dimension 4 (n = {n})")));
        for (a, _) in ANCHORS {
            rec.record(a, "-", &gate, 0.0, IDENTITY_BUDGET);
        }
        return Ok(());
    }

    // Hypotheses a)–c).
    let rm_scale = geo.riemann.value().max_abs();
    let c_max = geo.weyl.value().max_abs();
    let mut base = Gate::default().with((
        grade(c_max, tol().threshold(rm_scale), false),
        format!("C = 0: {}", grade(c_max, tol().threshold(rm_scale), false).as_str()),
    ));
    let ssub = Subject::new(&site, "S", geo.tracefree_ricci.clone(), 2)?;
    base = base.with(bound(&site, &ssub, 0, 0, true, tol())?);
    let mut jets = vec![geo.riemann.clone()];
    for m in 1..=DEPTH {
        jets.push(geo.nabla_riemann(m)?.clone());
    }
    let rm = Subject::from_jets(&site, "Rm", jets)?;
    for m in 0..=DEPTH {
        base = base.with(bound(&site, &rm, m, 0, false, tol())?);
    }
    let ks = k_subspace(geo, &site.f, DEPTH, GeneratorPolicy::CurvatureBasic, tol())?;
    rec.note(format!("d_3 lower bound {} at point {}", ks.d, rec.point));
    base = base.with(held(ks.d == 1, format!("d_3 = 1 (d = {})", ks.d)));

    // Bianchi identity for conformally flat metrics.
    let ds_val = ssub.jets[1].value();
    let bianchi = geo.bianchi_cf_residual()?.max_abs() / (1.0 + ds_val.max_abs());
    let g_cf = Gate::default().with(base.conditions.first().map_or((Hypothesis::Fails, String::new()), |c| {
        let st = grade(c_max, tol().threshold(rm_scale), false);
        (st, c.clone())
    }));
    rec.record("conformally-flat/bianchi", "S", &g_cf, bianchi, IDENTITY_BUDGET);

    let sv = geo.tracefree_ricci.value();
    let s_thr = tol().threshold(sv.max_abs());
    let frame = match ks.basis.first() {
        Some(z) if base.holds() => match gauge_frame(&site.f, z, &sv, at, 10.0 * s_thr) {
            Ok(f) => Some(f),
            Err(Error::DegenerateGauge) => None,
            Err(e) => return Err(e),
        },
        _ => None,
    };
    let base = base.with(held(frame.is_some(), "gauge S_01 != S_22".into()));
    let Some(f) = frame else {
        for (a, _) in ANCHORS.iter().skip(1) {
            rec.record(a, "S", &base, 0.0, IDENTITY_BUDGET);
        }
        return Ok(());
    };

    let sf = frame_components(&sv, &f, at)?;
    let dsf = frame_components(&ds_val, &f, at)?;
    let ddsf = frame_components(&ssub.jets[2].value(), &f, at)?;
    let dk = frame_components(&geo.cov_deriv(&site.k_lower())?.value(), &f, at)?;
    let rmf = frame_components(&geo.riemann.value(), &f, at)?;
    let k3 = ks.basis[0][0] * 0.0 + {
        // K_3 expressed in the gauge frame: its m3 component must vanish.
        let z = &ks.basis[0];
        let v: Vec<f64> = (0..4).map(|a| z[0] * site.f.m(2)[a] + z[1] * site.f.m(3)[a]).collect();
        at.dot(&v, f.m(3)).abs()
    };
    let s_scale = 1.0 + sf.max_abs();
    rec.record("conformally-flat/gauge", "frame", &base, sf.get(&[1, 2]).abs().max(k3) / s_scale, IDENTITY_BUDGET);
    let sb1 = bracket_closed_form(&sf, &[0, 3])[1];
    let sb2 = bracket_closed_form(&sf, &[0, 2])[1];
    let res = (sb1 - (sf.get(&[0, 1]) - sf.get(&[3, 3])))
        .abs()
        .max((sb2 + sf.get(&[2, 3])).abs())
        .max(sb1.abs())
        .max(sb2.abs());
    rec.record("conformally-flat/s-bracket", "S", &base, res / s_scale, IDENTITY_BUDGET);

    // First derivatives.
    let d_scale = 1.0 + dsf.max_abs();
    let (mut r_exp, mut r_van) = (0.0f64, 0.0f64);
    for (word, terms) in DSREL {
        let br = bracket_closed_form(&dsf, word)[1];
        let sum: f64 = terms.iter().map(|(c, i)| c * dsf.get(i)).sum();
        r_exp = r_exp.max((br - sum).abs());
        r_van = r_van.max(sum.abs());
    }
    rec.record("conformally-flat/dsrel-expansion", "nabla S", &base, r_exp / d_scale, IDENTITY_BUDGET);
    rec.record("conformally-flat/dsrel-vanishing", "nabla S", &base, r_van / d_scale, IDENTITY_BUDGET);
    let r333 = [[3, 3, 3], [1, 0, 3], [0, 1, 3], [3, 0, 1]]
        .iter()
        .fold(0.0f64, |m, i| m.max(dsf.get(i).abs()));
    rec.record("conformally-flat/dsrel-333", "nabla S", &base, r333 / d_scale, IDENTITY_BUDGET);
    let s13 = sf.get(&[1, 3]);
    let mut r13 = 0.0f64;
    for x in [0, 2, 3] {
        let lhs = dsf.get(&[x, 3, 3]) - dsf.get(&[x, 0, 1]);
        let rhs = 3.0 * s13 * dk.get(&[x, 3]);
        r13 = r13.max((lhs - rhs).abs()).max(lhs.abs());
    }
    rec.record("conformally-flat/s13rel", "nabla S", &base, r13 / d_scale, IDENTITY_BUDGET);

    // Second derivatives, with S_13 = 0.
    let g13 = base.clone().with(held(
        grade(s13.abs(), s_thr, false) == Hypothesis::Holds,
        "S_13 = 0".into(),
    ));
    let dd_scale = 1.0 + ddsf.max_abs() + dsf.max_abs() * dk.max_abs();
    let (mut r_exp, mut r_rel) = (0.0f64, 0.0f64);
    for rel in DDSREL {
        let sum: f64 = rel.sum.iter().map(|(c, i)| c * ddsf.get(i)).sum();
        if let Some(w) = rel.word {
            r_exp = r_exp.max((bracket_closed_form(&ddsf, &w)[1] - sum).abs());
        }
        let fin = rel.coef * dsf.get(&rel.ds) * dk.get(&rel.dk);
        r_rel = r_rel.max((sum - fin).abs()).max(sum.abs());
    }
    rec.record("conformally-flat/ddsrel-expansion", "nabla nabla S", &base, r_exp / dd_scale, IDENTITY_BUDGET);
    rec.record("conformally-flat/ddsrel", "nabla nabla S", &g13, r_rel / dd_scale, IDENTITY_BUDGET);
    let mut r11 = 0.0f64;
    for x in [0, 2, 3] {
        r11 = r11.max((dsf.get(&[x, 1, 3]) - sf.get(&[1, 1]) * dk.get(&[x, 3])).abs());
    }
    rec.record("conformally-flat/s11rel", "nabla S", &g13, r11 / d_scale, IDENTITY_BUDGET);

    // Uniform type D of {S, ∇S} relative to (k, l).
    let type_d = negative_weight(&sf).max(negative_weight(&dsf));
    let td = grade(type_d, tol().rel.max(tol().abs), false);
    let not_d = grade(type_d, tol().rel.max(tol().abs), true);
    let g_case_i = base.clone().with((not_d, format!("{{S, nabla S}} not uniformly type D: {}", not_d.as_str())));
    rec.record("conformally-flat/case-i-kundt", "k", &g_case_i, kundt_norm(&site), CONCLUSION_BUDGET);

    let tach = Tachyon::at(geo)?;
    let g_tach = base.clone().with(held(tach.is_some(), "P = 0 (S tachyonic)".into()));
    let udot_ok = tach.as_ref().is_some_and(|t| {
        let ud = t.udot(geo);
        let v = ud.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        grade(v, tol().threshold(t.du.value().max_abs()), false) == Hypothesis::Holds
    });
    let g_ud = g_tach.clone().with(held(udot_ok, "u-dot = 0".into()));
    rec.record("conformally-flat/uniform-type-d", "S, nabla S", &g_ud, type_d, TYPE_D_BUDGET);

    let g_d = g_tach.with((td, format!("{{S, nabla S}} uniformly type D: {}", td.as_str())));
    let (mut r_m2rel, mut r_m2id, mut r_cid) = (0.0, 0.0, 0.0);
    if let Some(t) = &tach {
        let mut u = t.u_value();
        let flip = at.dot(&at.raise(&u), f.m(2)) < 0.0;
        let sgn = if flip { -1.0 } else { 1.0 };
        u.iter_mut().for_each(|x| *x *= sgn);
        let du = t.du.value().scale(sgn);
        let d2 = frame_components(&du, &f, at)?;
        let sc = 1.0 + d2.max_abs();
        r_m2rel = d2
            .get(&[2, 3])
            .abs()
            .max((d2.get(&[1, 0]) - d2.get(&[0, 1])).abs())
            .max((d2.get(&[0, 1]) - d2.get(&[3, 3])).abs())
            / sc;
        let theta_jet = t.theta(geo).scale(sgn);
        let th = theta_jet.value();
        let mut w = 0.0f64;
        for b in 0..4 {
            for a in 0..4 {
                let h = at.g.get(&[a, b]) - u[a] * u[b];
                w = w.max((du.get(&[b, a]) - th * h).abs());
            }
        }
        r_m2id = w / sc;
        let dth = theta_jet.gradient();
        let mut c = 0.0f64;
        for a in 0..4 {
            for b in 0..4 {
                c = c.max((dth[a] * u[b] - dth[b] * u[a]).abs());
            }
        }
        let dn = dth.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        r_cid = c / (1.0 + dn);
    }
    rec.record("conformally-flat/m2rel", "m2", &g_d, r_m2rel, IDENTITY_BUDGET);
    rec.record("conformally-flat/m2id", "m2", &g_d, r_m2id, IDENTITY_BUDGET);
    rec.record("conformally-flat/cid", "theta", &g_d, r_cid, IDENTITY_BUDGET);

    // Curvature of the leaves.
    let r = |i: [usize; 4]| rmf.get(&i);
    let r_scale = 1.0 + rmf.max_abs();
    let br = bracket_closed_form(&rmf, &[0, 1, 0, 3])[1];
    let end = r([0, 1, 0, 1]) - r([3, 1, 0, 3]);
    rec.record("conformally-flat/endeq", "Rm", &base, (br - end).abs().max(end.abs()) / r_scale, IDENTITY_BUDGET);
    let hat = r([1, 0, 0, 1]) + r([3, 0, 3, 1]) - 2.0 * r([0, 3, 1, 3]);
    rec.record("conformally-flat/einstein-endpoint", "Rm", &g_d, hat.abs() / r_scale, IDENTITY_BUDGET);
    Ok(())
}
