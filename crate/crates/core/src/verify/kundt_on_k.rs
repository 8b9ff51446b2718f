//! The subspace `K_N` spanned by brackets of curvature tensors, the Kundt
//! property on it, and the Ricci-generic route to the full quotient.

use crate::alignment::{s_eigenstructure, Tolerances};
use crate::bilinear::{bracket_closed_form, k_subspace, GeneratorPolicy};
use crate::error::Result;
use crate::metric_ir::Point;

use super::subjects::{bound, rel, Site, Subject};
use super::{Fixture, Gate, Hypothesis, Recorder, CONCLUSION_BUDGET, IDENTITY_BUDGET};

/// Derivative depth `N` used for `K_N`.
const DEPTH: usize = 3;

pub(super) const ANCHORS: &[(&str, &str)] = &[
    ("kundt-on-k/map-s", "<S|k|k m_i>_j = lambda delta_ij - S_ij when bo(S) <= 0"),
    ("kundt-on-k/claim", "(nabla_a k_b) X^a z^b = 0 for X in c-perp and z in K_3"),
    ("kundt-on-k/top-dimension", "d_3 = n-2 implies kappa = rho = 0"),
    ("kundt-on-k/ricci-generic-identity", "X^a nabla_a S_0i = X^a nabla_a k^j (lambda delta_ij - S_ij) for X in c-perp"),
    ("kundt-on-k/ricci-generic-rank", "dim E_lambda = 2 and bo(nabla S) <= 0 imply d_1 = n-2"),
    ("kundt-on-k/ricci-generic-kundt", "dim E_lambda = 2 and bo(nabla S) <= 0 imply kappa = rho = 0"),
];

fn tol() -> Tolerances {
    Tolerances::default()
}

fn kundt_norm(site: &Site) -> f64 {
    let k = site.kappa.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    site.rho.iter().flatten().fold(k, |m, x| m.max(x.abs()))
}

/// Directions in `c⊥` as frame labels: `k` and the `m_i`.
fn perp(site: &Site) -> impl Iterator<Item = usize> + '_ {
    std::iter::once(0).chain(site.spatial())
}

pub(super) fn run(fx: &Fixture, p: &Point, rec: &mut Recorder) -> Result<()> {
    let site = Site::at(fx, p)?;
    let geo = &site.geo;
    let n = site.dim();
    let kf = Subject::new(&site, "k", site.k_lower(), 1)?;
    let s = Subject::new(&site, "S", geo.tracefree_ricci.clone(), 1)?;

    // Bracket of S against k m_i.
    let g_s = Gate::default().with(bound(&site, &s, 0, 0, false, tol())?);
    let lambda = s.c(0, &[0, 1]);
    let mut res = 0.0f64;
    for i in site.spatial() {
        let w = bracket_closed_form(&s.frame[0], &[0, i]);
        for j in site.spatial() {
            let expect = if i == j { lambda } else { 0.0 } - s.c(0, &[i, j]);
            res = res.max(rel(w[j - 2], expect));
        }
    }
    rec.record("kundt-on-k/map-s", "S", &g_s, res, IDENTITY_BUDGET);

    // Kundt property on K_3.
    let mut jets = vec![geo.riemann.clone()];
    for m in 1..=DEPTH {
        jets.push(geo.nabla_riemann(m)?.clone());
    }
    let rm = Subject::from_jets(&site, "Rm", jets)?;
    let mut g_rm = Gate::default();
    for m in 0..=DEPTH {
        g_rm = g_rm.with(bound(&site, &rm, m, 0, false, tol())?);
    }
    let ks = k_subspace(geo, &site.f, DEPTH, GeneratorPolicy::CurvatureBasic, tol())?;
    rec.note(format!("d_{DEPTH} lower bound {} at point {}", ks.d, rec.point));
    let nonzero = if ks.d > 0 { Hypothesis::Holds } else { Hypothesis::Fails };
    let g_claim = g_rm.clone().with((nonzero, format!("K_{DEPTH} nonzero: {} (d = {})", nonzero.as_str(), ks.d)));
    let scale = 1.0 + kf.frame[1].max_abs();
    let mut res = 0.0f64;
    for z in &ks.basis {
        for b in perp(&site) {
            let v: f64 = site.spatial().map(|j| kf.c(1, &[b, j]) * z[j - 2]).sum();
            res = res.max(v.abs() / scale);
        }
    }
    rec.record("kundt-on-k/claim", "K_3", &g_claim, res, IDENTITY_BUDGET);
    let top = if ks.d == n - 2 { Hypothesis::Holds } else { Hypothesis::Fails };
    let g_top = g_rm.with((top, format!("d_{DEPTH} = n-2: {} (d = {})", top.as_str(), ks.d)));
    rec.record("kundt-on-k/top-dimension", "k", &g_top, kundt_norm(&site), CONCLUSION_BUDGET);

    // Ricci-generic route.
    let mut res = 0.0f64;
    for b in perp(&site) {
        for i in site.spatial() {
            let mut rhs = 0.0;
            for j in site.spatial() {
                let m = if i == j { lambda } else { 0.0 } - s.c(0, &[i, j]);
                rhs += kf.c(1, &[b, j]) * m;
            }
            res = res.max(rel(s.c(1, &[b, 0, i]), rhs));
        }
    }
    rec.record("kundt-on-k/ricci-generic-identity", "S", &g_s, res, IDENTITY_BUDGET);
    let eig = s_eigenstructure(&geo.tracefree_ricci.value(), &geo.at, &site.f, tol())?;
    let generic = if eig.k_is_eigendirection && eig.dim_e_lambda == 2 && !eig.zero {
        Hypothesis::Holds
    } else {
        Hypothesis::Fails
    };
    let g_gen = g_s
        .with((generic, format!("dim E_lambda = 2: {} (measured {})", generic.as_str(), eig.dim_e_lambda)))
        .with(bound(&site, &s, 1, 0, false, tol())?);
    let d1 = k_subspace(geo, &site.f, 1, GeneratorPolicy::CurvatureBasic, tol())?.d;
    rec.record("kundt-on-k/ricci-generic-rank", "S", &g_gen, (n - 2 - d1.min(n - 2)) as f64, 0.0);
    rec.record("kundt-on-k/ricci-generic-kundt", "k", &g_gen, kundt_norm(&site), CONCLUSION_BUDGET);
    Ok(())
}
