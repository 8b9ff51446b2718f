//! Tensors a suite is run on, with the frame components of their covariant
//! derivatives at the point.

use crate::alignment::{boost_order_of_components, Tolerances};
use crate::congruence::{kappa_rho, CONGRUENCE_TOL};
use crate::error::Result;
use crate::frames::{frame_components, jet_frame_components, JetFrame, NullFrame};
use crate::geometry::Geometry;
use crate::jet::{Jet, JetTensor};
use crate::tensor::{multi_indices, TensorValue, Variance};

use super::{Fixture, Hypothesis};
use crate::metric_ir::Point;

/// Jet order used for the designated field.
pub const FIELD_ORDER: usize = 4;

/// Geometry, field and frame at one point.
pub struct Site {
    pub geo: Geometry,
    pub k: JetTensor,
    pub jf: JetFrame,
    pub f: NullFrame,
    /// `κ_i`, indexed by spatial label minus 2.
    pub kappa: Vec<f64>,
    /// `ρ_ij = m_i · ∇_{m_j} k`, indexed by spatial labels minus 2.
    pub rho: Vec<Vec<f64>>,
}

impl Site {
    /// Geometry at `p` with the fixture field, its index raised if needed.
    pub fn at(fx: &Fixture, p: &Point) -> Result<Site> {
        let geo = Geometry::new(fx.metric, p)?;
        let k = geo.field_jet(&fx.k, FIELD_ORDER)?;
        let k = if k.variance[0] == Variance::Down { raise(&k, &geo.ginv) } else { k };
        Site::new(geo, k)
    }

    pub fn new(geo: Geometry, k: JetTensor) -> Result<Site> {
        let jf = JetFrame::complete(&k, &geo.g, &geo.at, None)?;
        let f = jf.value();
        let rep = kappa_rho(&geo, &k, &f, CONGRUENCE_TOL)?;
        Ok(Site {
            geo,
            k,
            jf,
            f,
            kappa: rep.kappa,
            rho: rep.rho,
        })
    }

    pub fn dim(&self) -> usize {
        self.geo.dim()
    }

    /// `κ` by spatial frame label.
    pub fn kap(&self, i: usize) -> f64 {
        self.kappa[i - 2]
    }

    /// `ρ` by spatial frame labels.
    pub fn r(&self, i: usize, j: usize) -> f64 {
        self.rho[i - 2][j - 2]
    }

    pub fn spatial(&self) -> std::ops::Range<usize> {
        2..self.dim()
    }

    /// The designated field with its index lowered.
    pub fn k_lower(&self) -> JetTensor {
        let n = self.dim();
        let order = self.k.order().min(self.geo.g.order());
        let k: Vec<Jet> = self.k.comps.iter().map(|c| c.truncate(order)).collect();
        JetTensor {
            dim: n,
            variance: vec![Variance::Down],
            comps: lower(&k, &self.geo.g),
        }
    }

    /// Frame vector `e_a` of the jet frame, lowered.
    pub fn frame_lower(&self, a: usize) -> JetTensor {
        JetTensor {
            dim: self.dim(),
            variance: vec![Variance::Down],
            comps: lower(&self.jf.vectors[a], &self.geo.g),
        }
    }

    pub fn frame_components(&self, t: &TensorValue) -> Result<TensorValue> {
        frame_components(t, &self.f, &self.geo.at)
    }
}

fn raise(k: &JetTensor, ginv: &JetTensor) -> JetTensor {
    JetTensor {
        dim: k.dim,
        variance: vec![Variance::Up],
        comps: lower(&k.comps, ginv),
    }
}

/// Contracts `v` with a symmetric rank-2 jet.
fn lower(v: &[Jet], g: &JetTensor) -> Vec<Jet> {
    let n = v.len();
    let order = v[0].order().min(g.order());
    (0..n)
        .map(|a| {
            let mut acc = Jet::zero(v[0].space(), order);
            for b in 0..n {
                acc = &acc + &(&g.comps[a * n + b].truncate(order) * &v[b].truncate(order));
            }
            acc
        })
        .collect()
}

pub fn outer(a: &JetTensor, b: &JetTensor) -> JetTensor {
    let order = a.order().min(b.order());
    let mut comps = Vec::with_capacity(a.comps.len() * b.comps.len());
    for x in &a.comps {
        for y in &b.comps {
            comps.push(&x.truncate(order) * &y.truncate(order));
        }
    }
    let mut variance = a.variance.clone();
    variance.extend_from_slice(&b.variance);
    JetTensor {
        dim: a.dim,
        variance,
        comps,
    }
}

/// `a ⊗ b + b ⊗ a`.
pub fn sym_outer(a: &JetTensor, b: &JetTensor) -> JetTensor {
    let ab = outer(a, b);
    let ba = outer(b, a);
    ab.add(&ba)
}

/// `(h ⊙ g)_{abcd} = h_ac g_bd + h_bd g_ac − h_ad g_bc − h_bc g_ad`.
pub fn kulkarni_nomizu(h: &JetTensor, g: &JetTensor) -> JetTensor {
    let n = h.dim;
    let order = h.order().min(g.order());
    let hc = |a: usize, b: usize| h.comps[a * n + b].truncate(order);
    let gc = |a: usize, b: usize| g.comps[a * n + b].truncate(order);
    let comps = multi_indices(n, 4)
        .map(|i| {
            let (a, b, c, d) = (i[0], i[1], i[2], i[3]);
            let p = &(&hc(a, c) * &gc(b, d)) + &(&hc(b, d) * &gc(a, c));
            let q = &(&hc(a, d) * &gc(b, c)) + &(&hc(b, c) * &gc(a, d));
            &p - &q
        })
        .collect();
    JetTensor {
        dim: n,
        variance: vec![Variance::Down; 4],
        comps,
    }
}

/// A tensor field with the frame components of `∇^m T`, `m ≤ depth`.
pub struct Subject {
    pub name: String,
    pub jets: Vec<JetTensor>,
    pub frame: Vec<TensorValue>,
}

impl Subject {
    pub fn new(site: &Site, name: &str, t: JetTensor, depth: usize) -> Result<Subject> {
        let mut jets = vec![t];
        for _ in 0..depth {
            let next = site.geo.cov_deriv(jets.last().expect("non-empty"))?;
            jets.push(next);
        }
        let frame = jets
            .iter()
            .map(|j| site.frame_components(&j.value()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Subject {
            name: name.to_string(),
            jets,
            frame,
        })
    }

    /// Frame component of `∇^m T`.
    pub fn c(&self, m: usize, idx: &[usize]) -> f64 {
        self.frame[m].get(idx)
    }
}

/// Status of `bo(∇^m T) ≤ s`, or `= s` when `genuine`, at the point and to
/// first order around it.
pub fn bound(site: &Site, sub: &Subject, m: usize, s: i32, genuine: bool, tol: Tolerances) -> Result<(Hypothesis, String)> {
    let tf = &sub.frame[m];
    let rep = boost_order_of_components(tf, tol);
    let thr = tol.threshold(rep.norm);
    let above = rep.weights.iter().filter(|w| w.b > s).fold(0.0f64, |a, w| a.max(w.max_abs));
    let at_s = rep.weights.iter().find(|w| w.b == s).map_or(0.0, |w| w.max_abs);
    let mut status = grade(above, thr, false);
    if genuine {
        status = status.max(grade(at_s, thr, true));
    }
    let mut near = 0.0f64;
    let jet = &sub.jets[m];
    if jet.order() >= 1 && status != Hypothesis::Fails {
        let jtf = jet_frame_components(&jet.truncate(1), &site.jf)?;
        for (flat, alpha) in multi_indices(tf.dim(), tf.rank()).enumerate() {
            if crate::alignment::boost_weight(&alpha) > s {
                near = jtf.comps[flat].gradient().iter().fold(near, |w, x| w.max(x.abs()));
            }
        }
        status = status.max(grade(near, thr.max(1e-8 * (1.0 + rep.norm)), false));
    }
    let what = match m {
        0 => sub.name.clone(),
        1 => format!("nabla {}", sub.name),
        m => format!("nabla^{m} {}", sub.name),
    };
    let rel = if genuine { "=" } else { "<=" };
    let bo = rep.bo.map_or("none".to_string(), |b| b.to_string());
    Ok((status, format!("bo({what}) {rel} {s}: {} (measured {bo})", status.as_str())))
}

/// `present`: the value should be clearly above the threshold; otherwise
/// clearly below.
pub(super) fn grade(v: f64, thr: f64, present: bool) -> Hypothesis {
    let (lo, hi) = (0.1 * thr, 10.0 * thr);
    match (present, v) {
        (false, v) if v <= lo => Hypothesis::Holds,
        (true, v) if v > hi => Hypothesis::Holds,
        (_, v) if v > lo && v <= hi => Hypothesis::Marginal,
        _ => Hypothesis::Fails,
    }
}

/// Largest `|a − b| / (1 + max(|a|, |b|))`.
pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}

impl Subject {
    /// Subject from precomputed jets of `T, ∇T, …`.
    pub fn from_jets(site: &Site, name: &str, jets: Vec<JetTensor>) -> Result<Subject> {
        let frame = jets
            .iter()
            .map(|j| site.frame_components(&j.value()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Subject {
            name: name.to_string(),
            jets,
            frame,
        })
    }
}
