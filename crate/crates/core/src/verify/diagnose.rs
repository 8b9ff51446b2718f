//! Which Kundt theorem applies at a point, what it predicts, and whether
//! the measured congruence agrees.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::alignment::{boost_weight, s_eigenstructure, Tolerances};
use crate::bilinear::{k_subspace, GeneratorPolicy};
use crate::congruence::{kappa_rho, CongruenceReport, CONGRUENCE_TOL};
use crate::error::Result;
use crate::frames::{frame_components, NullFrame};
use crate::metric_ir::Point;
use crate::tensor::{multi_indices, TensorValue};

use super::subjects::{bound, grade, Site, Subject};
use super::tachyon::Tachyon;
use super::{Fixture, Gate, Hypothesis, IDENTITY_BUDGET};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Prediction {
    Kundt,
    WarpedProduct,
}

impl Prediction {
    pub fn as_str(self) -> &'static str {
        match self {
            Prediction::Kundt => "Kundt",
            Prediction::WarpedProduct => "warped product",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Consistent,
    Inconsistent,
    NoPrediction,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Consistent => "consistent",
            Verdict::Inconsistent => "INCONSISTENT",
            Verdict::NoPrediction => "no prediction",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Route {
    pub name: &'static str,
    pub statement: &'static str,
    pub gate: Gate,
    pub prediction: Prediction,
    /// Set when the gate holds.
    pub measured: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Diagnosis {
    pub metric: String,
    pub point: Vec<f64>,
    pub dim: usize,
    /// `d_N^c` lower bounds for `N = 1, …`.
    pub d: Vec<usize>,
    /// Smallest negative-weight residual of `{S, ∇S}` over choices of `l`.
    pub type_d_residual: f64,
    pub warped: bool,
    pub congruence: CongruenceReport,
    pub routes: Vec<Route>,
    pub verdict: Verdict,
    pub mismatches: Vec<String>,
}

fn held(st: Hypothesis, text: &str) -> (Hypothesis, String) {
    (st, format!("{text}: {}", st.as_str()))
}

fn flag(ok: bool, text: &str) -> (Hypothesis, String) {
    held(if ok { Hypothesis::Holds } else { Hypothesis::Fails }, text)
}

fn negative(tf: &TensorValue) -> Vec<f64> {
    multi_indices(tf.dim(), tf.rank())
        .zip(tf.components())
        .filter(|(idx, _)| boost_weight(idx) < 0)
        .map(|(_, c)| *c)
        .collect()
}

fn type_d_system(f: &NullFrame, z: &[f64], t: &[(TensorValue, f64)], site: &Site) -> Result<Vec<f64>> {
    let g = f.null_rotation(z)?;
    let mut out = Vec::new();
    for (v, scale) in t {
        out.extend(negative(&frame_components(v, &g, &site.geo.at)?).iter().map(|c| c / scale));
    }
    Ok(out)
}

/// Minimises the negative-weight components of `{S, ∇S}` over null
/// rotations about `k` by damped Gauss-Newton from a grid of starts.
fn uniform_type_d(site: &Site, s: &TensorValue, ds: &TensorValue) -> Result<f64> {
    let t = [(s.clone(), 1.0 + s.max_abs()), (ds.clone(), 1.0 + ds.max_abs())];
    let dim = site.dim() - 2;
    let norm = |r: &[f64]| r.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let grid = [-2.0, -0.5, 0.0, 0.5, 2.0];
    let mut best = f64::INFINITY;
    let starts: Vec<Vec<f64>> = if dim == 1 {
        grid.iter().map(|&a| vec![a]).collect()
    } else {
        grid.iter()
            .flat_map(|&a| grid.iter().map(move |&b| (a, b)))
            .map(|(a, b)| {
                let mut z = vec![0.0; dim];
                z[0] = a;
                z[1] = b;
                z
            })
            .collect()
    };
    for z0 in starts {
        let mut z = z0;
        let mut r = type_d_system(&site.f, &z, &t, site)?;
        let mut mu = 1e-3;
        for _ in 0..60 {
            if norm(&r) < 1e-15 {
                break;
            }
            let h = 1e-7;
            let mut jac = DMatrix::zeros(r.len(), dim);
            for c in 0..dim {
                let mut zp = z.clone();
                zp[c] += h;
                let rp = type_d_system(&site.f, &zp, &t, site)?;
                for (i, v) in rp.iter().enumerate() {
                    jac[(i, c)] = (v - r[i]) / h;
                }
            }
            let rv = DVector::from_column_slice(&r);
            let jt = jac.transpose();
            let a = &jt * &jac + DMatrix::identity(dim, dim) * mu;
            let Some(step) = a.lu().solve(&(-(&jt * &rv))) else { break };
            let zn: Vec<f64> = z.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let rn = type_d_system(&site.f, &zn, &t, site)?;
            let (e0, e1): (f64, f64) = (r.iter().map(|x| x * x).sum(), rn.iter().map(|x| x * x).sum());
            if e1 < e0 {
                z = zn;
                r = rn;
                mu = (mu * 0.3).max(1e-12);
            } else {
                mu *= 10.0;
                if mu > 1e8 {
                    break;
                }
            }
        }
        best = best.min(norm(&r));
    }
    Ok(best)
}

pub fn diagnose(fx: &Fixture, p: &Point, n_order: usize, tol: Tolerances) -> Result<Diagnosis> {
    let site = Site::at(fx, p)?;
    let geo = &site.geo;
    let n = site.dim();
    let depth = n_order.max(1);

    let s = Subject::new(&site, "S", geo.tracefree_ricci.clone(), depth)?;
    let c = Subject::new(&site, "C", geo.weyl.clone(), depth)?;
    let dk = Subject::new(&site, "nabla k", geo.cov_deriv(&site.k_lower())?, 1)?;
    let mut rm_jets = vec![geo.riemann.clone()];
    for m in 1..=depth {
        rm_jets.push(geo.nabla_riemann(m)?.clone());
    }
    let rm = Subject::from_jets(&site, "Rm", rm_jets)?;

    let mut rm_special = Gate::default();
    for m in 0..=depth {
        rm_special = rm_special.with(bound(&site, &rm, m, 0, false, tol)?);
    }
    let sv = geo.tracefree_ricci.value();
    let s_norm = sv.max_abs();
    let s_nonzero = grade(s_norm, tol.threshold(0.0), true);
    let c_norm = geo.weyl.value().max_abs();
    let c_zero = if n == 3 {
        Hypothesis::Holds
    } else {
        grade(c_norm, tol.threshold(geo.riemann.value().max_abs()), false)
    };

    let mut d = Vec::new();
    for m in 1..=depth {
        d.push(k_subspace(geo, &site.f, m, GeneratorPolicy::CurvatureBasic, tol)?.d);
    }
    let d_top = *d.last().expect("depth >= 1");

    let ds = s.jets[1].value();
    let type_d_residual = uniform_type_d(&site, &sv, &ds)?;
    let type_d = grade(type_d_residual, tol.threshold(1.0), false);
    let not_type_d = grade(type_d_residual, tol.threshold(1.0), true);

    let tach = if n == 4 { Tachyon::at(geo)? } else { None };
    let warped = tach.as_ref().is_some_and(|t| {
        let ud = t.udot(geo).iter().fold(0.0f64, |m, x| m.max(x.abs()));
        grade(ud, tol.threshold(t.du.value().max_abs()), false) == Hypothesis::Holds
            && t.structure_residual(geo) <= IDENTITY_BUDGET
    });

    let eig = s_eigenstructure(&sv, &geo.at, &site.f, tol)?;
    let mut routes = Vec::new();
    let mut push = |name, statement, gate: Gate, prediction| {
        routes.push(Route {
            name,
            statement,
            gate,
            prediction,
            measured: None,
        })
    };

    push(
        "top-dimension",
        "nabla^m Rm special for m <= N and d_N = n - 2 at p imply Kundt near p",
        rm_special
            .clone()
            .with(flag(d_top == n - 2, &format!("d_{depth} = n - 2 (measured {d_top})"))),
        Prediction::Kundt,
    );
    push(
        "ricci-generic",
        "S generic type II (dim E_lambda = 2) and bo(nabla S) <= 0 imply Kundt",
        Gate::default()
            .with(bound(&site, &s, 0, 0, false, tol)?)
            .with(flag(
                eig.k_is_eigendirection && eig.dim_e_lambda == 2 && !eig.zero,
                &format!("dim E_lambda = 2 (measured {})", eig.dim_e_lambda),
            ))
            .with(bound(&site, &s, 1, 0, false, tol)?),
        Prediction::Kundt,
    );
    push(
        "k-iii",
        "bo(nabla k) <= 0 and bo(nabla nabla k) <= 0 imply Kundt",
        Gate::default()
            .with(bound(&site, &dk, 0, 0, false, tol)?)
            .with(bound(&site, &dk, 1, 0, false, tol)?),
        Prediction::Kundt,
    );
    if depth >= 2 {
        push(
            "ricci-iii",
            "bo(S) = -1, bo(nabla S) <= 0, bo(nabla nabla S) <= 0 imply Kundt",
            Gate::default()
                .with(bound(&site, &s, 0, -1, true, tol)?)
                .with(bound(&site, &s, 1, 0, false, tol)?)
                .with(bound(&site, &s, 2, 0, false, tol)?),
            Prediction::Kundt,
        );
        push(
            "weyl-iii",
            "bo(C) = -1, bo(nabla C) <= 0, bo(nabla nabla C) <= 0 imply Kundt",
            Gate::default()
                .with(bound(&site, &c, 0, -1, true, tol)?)
                .with(bound(&site, &c, 1, 0, false, tol)?)
                .with(bound(&site, &c, 2, 0, false, tol)?),
            Prediction::Kundt,
        );
    }
    if depth >= 3 {
        push(
            "ricci-n",
            "bo(S) = -2, bo(nabla^2 S) <= 0, bo(nabla^3 S) <= 0 imply Kundt",
            Gate::default()
                .with(bound(&site, &s, 0, -2, true, tol)?)
                .with(bound(&site, &s, 2, 0, false, tol)?)
                .with(bound(&site, &s, 3, 0, false, tol)?),
            Prediction::Kundt,
        );
        push(
            "weyl-n",
            "bo(C) = -2, bo(nabla^2 C) <= 0, bo(nabla^3 C) <= 0 imply Kundt",
            Gate::default()
                .with(bound(&site, &c, 0, -2, true, tol)?)
                .with(bound(&site, &c, 2, 0, false, tol)?)
                .with(bound(&site, &c, 3, 0, false, tol)?),
            Prediction::Kundt,
        );
    }
    if n == 3 && depth >= 3 {
        let mut g = Gate::default().with(held(s_nonzero, "S != 0"));
        for m in 0..=3 {
            g = g.with(bound(&site, &s, m, 0, false, tol)?);
        }
        push("three-dimensional", "nabla^m S special for m <= 3 and S != 0 imply Kundt", g, Prediction::Kundt);
    }
    if n == 4 {
        push(
            "weyl-ii-d",
            "bo(C) = 0 and bo(nabla C) <= 0 imply Kundt",
            Gate::default()
                .with(bound(&site, &c, 0, 0, true, tol)?)
                .with(bound(&site, &c, 1, 0, false, tol)?),
            Prediction::Kundt,
        );
        if depth >= 3 {
            let base = rm_special
                .clone()
                .with(held(c_zero, "C = 0"))
                .with(held(s_nonzero, "S != 0"))
                .with(bound(&site, &s, 0, 0, true, tol)?)
                .with(flag(d[2] == 1, &format!("d_3 = 1 (measured {})", d[2])));
            push(
                "conformally-flat-tachyonic-i",
                "C = 0, bo(S) = 0, d_3 = 1, {S, nabla S} not uniformly type D imply Kundt",
                base.clone().with(held(not_type_d, "{S, nabla S} not uniformly type D")),
                Prediction::Kundt,
            );
            push(
                "conformally-flat-tachyonic-ii",
                "C = 0, bo(S) = 0, d_3 = 1, {S, nabla S} uniformly type D imply a warped product",
                base.with(held(type_d, "{S, nabla S} uniformly type D")),
                Prediction::WarpedProduct,
            );
            let c_nonzero = grade(c_norm, tol.threshold(geo.riemann.value().max_abs()), true);
            let any = [c_nonzero, not_type_d, if d[2] == 2 { Hypothesis::Holds } else { Hypothesis::Fails }]
                .into_iter()
                .min()
                .expect("three conditions");
            push(
                "four-dimensional",
                "nabla^m Rm special for m <= 3 and (C != 0 or not uniformly type D or d_3 = 2) imply Kundt",
                rm_special.clone().with(held(any, "C != 0 or not uniformly type D or d_3 = 2")),
                Prediction::Kundt,
            );
        }
    }

    let congruence = kappa_rho(geo, &site.k, &site.f, CONGRUENCE_TOL)?;
    let mut mismatches = Vec::new();
    let mut applied = 0;
    for r in &mut routes {
        if !r.gate.holds() {
            continue;
        }
        applied += 1;
        let got = match r.prediction {
            Prediction::Kundt => congruence.flags.kundt,
            Prediction::WarpedProduct => warped,
        };
        r.measured = Some(got);
        if !got {
            mismatches.push(format!("{} predicts {}, not measured", r.name, r.prediction.as_str()));
        }
    }
    let verdict = match (applied, mismatches.is_empty()) {
        (0, _) => Verdict::NoPrediction,
        (_, true) => Verdict::Consistent,
        (_, false) => Verdict::Inconsistent,
    };
    Ok(Diagnosis {
        metric: fx.name.clone(),
        point: p.values.clone(),
        dim: n,
        d,
        type_d_residual,
        warped,
        congruence,
        routes,
        verdict,
        mismatches,
    })
}
