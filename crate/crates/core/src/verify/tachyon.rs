//! The unit spacelike field `u` with `S = λ(u u − h/3)`, as a jet.

use crate::alignment::tachyonic_form;
use crate::error::Result;
use crate::geometry::Geometry;
use crate::jet::{Jet, JetTensor};
use crate::tensor::Variance;

/// Accepted misfit of `S = λ(u u − h/3)` at the point.
pub const FORM_TOL: f64 = 1e-9;

pub struct Tachyon {
    pub lambda: Jet,
    /// `u_a`.
    pub u: JetTensor,
    /// `∇_b u_a`, derivative slot first.
    pub du: JetTensor,
}

impl Tachyon {
    /// `None` unless the trace-free Ricci tensor has the tachyonic form at
    /// the point.
    pub fn at(geo: &Geometry) -> Result<Option<Tachyon>> {
        if geo.dim() != 4 {
            return Ok(None);
        }
        let sv = geo.tracefree_ricci.value();
        let Some(form) = tachyonic_form(&sv, &geo.at).filter(|f| f.residual <= FORM_TOL) else {
            return Ok(None);
        };
        let n = 4;
        let s = &geo.tracefree_ricci;
        let order = s.order().min(geo.ginv.order());
        let sc = |a: usize, b: usize| s.comps[a * n + b].truncate(order);
        let gi = |a: usize, b: usize| geo.ginv.comps[a * n + b].truncate(order);
        let mut ss = Jet::zero(s.space(), order);
        for a in 0..n {
            for b in 0..n {
                // (S g⁻¹)_a^c S_cb g^{ba}
                let mut sm = Jet::zero(s.space(), order);
                for c in 0..n {
                    sm = &sm + &(&sc(a, c) * &gi(c, b));
                }
                let mut t = Jet::zero(s.space(), order);
                for d in 0..n {
                    t = &t + &(&sc(b, d) * &gi(d, a));
                }
                ss = &ss + &(&sm * &t);
            }
        }
        let lambda = ss.scale(0.75).sqrt().scale(form.lambda.signum());
        let inv = lambda.recip();
        let uu: Vec<Jet> = (0..n * n)
            .map(|i| {
                let g = geo.g.comps[i].truncate(order);
                &(&s.comps[i].truncate(order) * &inv).scale(0.75) + &g.scale(0.25)
            })
            .collect();
        let v = geo.at.raise(&form.u);
        let w: Vec<Jet> = (0..n)
            .map(|a| (0..n).fold(Jet::zero(s.space(), order), |acc, b| &acc + &uu[a * n + b].scale(v[b])))
            .collect();
        let norm = (0..n).fold(Jet::zero(s.space(), order), |acc, b| &acc + &w[b].scale(v[b]));
        let rn = norm.sqrt().recip();
        let u = JetTensor {
            dim: n,
            variance: vec![Variance::Down],
            comps: w.iter().map(|x| x * &rn).collect(),
        };
        let du = geo.cov_deriv(&u)?;
        Ok(Some(Tachyon { lambda, u, du }))
    }

    pub fn u_value(&self) -> Vec<f64> {
        self.u.comps.iter().map(Jet::value).collect()
    }

    /// `u̇_a = u^b ∇_b u_a`.
    pub fn udot(&self, geo: &Geometry) -> Vec<f64> {
        let up = geo.at.raise(&self.u_value());
        let du = self.du.value();
        (0..4).map(|a| (0..4).map(|b| up[b] * du.get(&[b, a])).sum()).collect()
    }

    /// `θ = ∇_a u^a / 3` as a jet.
    pub fn theta(&self, geo: &Geometry) -> Jet {
        let order = self.du.order().min(geo.ginv.order());
        let mut t = Jet::zero(self.u.space(), order);
        for a in 0..4 {
            for b in 0..4 {
                t = &t + &(&geo.ginv.comps[a * 4 + b].truncate(order) * &self.du.comps[a * 4 + b].truncate(order));
            }
        }
        t.scale(1.0 / 3.0)
    }

    /// Largest component of `∇_b u_a − u̇_a u_b − θ h_ab`, relative to
    /// `1 + ‖∇u‖∞`.
    pub fn structure_residual(&self, geo: &Geometry) -> f64 {
        let u = self.u_value();
        let ud = self.udot(geo);
        let th = self.theta(geo).value();
        let du = self.du.value();
        let g = &geo.at.g;
        let mut worst = 0.0f64;
        for b in 0..4 {
            for a in 0..4 {
                let h = g.get(&[a, b]) - u[a] * u[b];
                worst = worst.max((du.get(&[b, a]) - ud[a] * u[b] - th * h).abs());
            }
        }
        worst / (1.0 + du.max_abs())
    }
}
