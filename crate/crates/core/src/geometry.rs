//! Curvature pipeline evaluated on jets at a point.
//!
//! Starting from the order-5 jet of `g_ab`, each stage loses one order:
//! Γ (4), Riemann (3), ∇Rm (2), ∇²Rm (1), ∇³Rm (0). Covariant derivatives
//! put the derivative slot first: `(∇T)_{b a₁…a_r} = ∇_b T_{a₁…a_r}`.

use std::sync::{Arc, OnceLock};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::jet::{Jet, JetSpace, JetTensor};
use crate::metric_ir::{metric::coordinate_jets, Expr, MetricSpec, Point, MAX_METRIC_ORDER};
use crate::tensor::{multi_indices, MetricAtPoint, TensorValue, Variance};

/// Highest supported power of ∇ applied to the Riemann tensor.
pub const MAX_NABLA: usize = 3;

/// A tensor field with closed-form components.
#[derive(Debug, Clone)]
pub struct TensorFieldExpr {
    pub dim: usize,
    pub variance: Vec<Variance>,
    pub comps: Vec<Expr>,
}

impl TensorFieldExpr {
    pub fn vector(comps: Vec<Expr>) -> Self {
        TensorFieldExpr {
            dim: comps.len(),
            variance: vec![Variance::Up],
            comps,
        }
    }

    pub fn covector(comps: Vec<Expr>) -> Self {
        TensorFieldExpr {
            dim: comps.len(),
            variance: vec![Variance::Down],
            comps,
        }
    }

    /// Parses `expr,expr,...` with one expression per coordinate.
    pub fn parse_vector(text: &str, metric: &MetricSpec, variance: Variance) -> Result<Self> {
        let comps: Vec<Expr> = text
            .split(',')
            .map(|s| metric.parse_expr(s.trim()))
            .collect::<Result<_>>()?;
        if comps.len() != metric.dim() {
            return Err(Error::DimensionMismatch {
                expected: metric.dim(),
                found: comps.len(),
            });
        }
        Ok(TensorFieldExpr {
            dim: comps.len(),
            variance: vec![variance],
            comps,
        })
    }

    pub fn rank(&self) -> usize {
        self.variance.len()
    }

    pub fn eval(&self, p: &Point) -> Result<TensorValue> {
        let comps = self
            .comps
            .iter()
            .map(|e| e.eval(&p.values))
            .collect::<Result<Vec<_>>>()?;
        TensorValue::from_parts(self.dim, self.variance.clone(), comps)
    }

    pub fn jet(&self, vars: &[Jet]) -> Result<JetTensor> {
        Ok(JetTensor {
            dim: self.dim,
            variance: self.variance.clone(),
            comps: self
                .comps
                .iter()
                .map(|e| e.eval_jet(vars))
                .collect::<Result<_>>()?,
        })
    }
}

/// Curvature quantities at one point, known as jets.
pub struct Geometry {
    pub point: Point,
    pub at: MetricAtPoint,
    pub space: Arc<JetSpace>,
    pub g: JetTensor,
    pub ginv: JetTensor,
    /// `Γ^a_{bc}`, variance (up, down, down).
    pub gamma: JetTensor,
    pub riemann: JetTensor,
    pub ricci: JetTensor,
    pub scalar: Jet,
    pub tracefree_ricci: JetTensor,
    pub weyl: JetTensor,
    nabla: [OnceLock<JetTensor>; MAX_NABLA],
    vars: Vec<Jet>,
}

impl Geometry {
    /// Full pipeline from the symbolic derivative table of `metric`.
    pub fn new(metric: &MetricSpec, p: &Point) -> Result<Self> {
        let at = metric.at(p)?;
        let g = metric.metric_jet(p, MAX_METRIC_ORDER)?;
        Geometry::from_metric_jet(g, at, p.clone())
    }

    /// Same pipeline, with the metric jet taken from jet-arithmetic
    /// evaluation of the component trees.
    pub fn new_direct(metric: &MetricSpec, p: &Point) -> Result<Self> {
        let at = metric.at(p)?;
        let g = metric.metric_jet_direct(p, MAX_METRIC_ORDER)?;
        Geometry::from_metric_jet(g, at, p.clone())
    }

    pub fn from_metric_jet(g: JetTensor, at: MetricAtPoint, point: Point) -> Result<Self> {
        let n = g.dim;
        let space = g.space().clone();
        let ginv = inverse_jet(&g, &at)?;
        let gamma = christoffel(&g, &ginv);
        let riemann = riemann(&gamma, &g);
        let ricci = ricci(&riemann, &ginv);
        let gi = ginv.truncate(ricci.order());
        let mut scalar = Jet::zero(&space, ricci.order());
        for i in 0..n * n {
            scalar = &scalar + &(&gi.comps[i] * &ricci.comps[i]);
        }
        let gt = g.truncate(ricci.order());
        let mut tracefree_ricci = ricci.clone();
        for i in 0..n * n {
            tracefree_ricci.comps[i] = &ricci.comps[i] - &(&gt.comps[i] * &scalar).scale(1.0 / n as f64);
        }
        let weyl = weyl(&riemann, &ricci, &scalar, &gt);
        let vars = coordinate_jets(&space, &point, space.max_order());
        Ok(Geometry {
            point,
            at,
            space,
            g,
            ginv,
            gamma,
            riemann,
            ricci,
            scalar,
            tracefree_ricci,
            weyl,
            nabla: Default::default(),
            vars,
        })
    }

    pub fn dim(&self) -> usize {
        self.g.dim
    }

    /// `∇^m Rm` for `1 ≤ m ≤ 3`, computed once and memoized.
    pub fn nabla_riemann(&self, m: usize) -> Result<&JetTensor> {
        if m == 0 {
            return Ok(&self.riemann);
        }
        if m > MAX_NABLA {
            return Err(Error::OrderTooHigh(m));
        }
        if self.nabla[m - 1].get().is_none() {
            let prev = self.nabla_riemann(m - 1)?;
            let next = self.cov_deriv(prev)?;
            let _ = self.nabla[m - 1].set(next);
        }
        Ok(self.nabla[m - 1].get().expect("initialized above"))
    }

    /// Covariant derivative with the new slot first.
    pub fn cov_deriv(&self, t: &JetTensor) -> Result<JetTensor> {
        if t.order() == 0 {
            return Err(Error::OrderTooHigh(MAX_NABLA + 1));
        }
        Ok(cov_deriv(t, &self.gamma))
    }

    /// Jets of the coordinate functions at the point, to the given order.
    pub fn coordinate_jets(&self, order: usize) -> Vec<Jet> {
        self.vars.iter().map(|v| v.truncate(order)).collect()
    }

    pub fn field_jet(&self, f: &TensorFieldExpr, order: usize) -> Result<JetTensor> {
        f.jet(&self.coordinate_jets(order))
    }

    /// `∇_{[a}S_{b]c} + (1/12) ∇_{[a}R g_{b]c}` at the point (dimension 4).
    pub fn bianchi_cf_residual(&self) -> Result<TensorValue> {
        let n = self.dim();
        if n != 4 {
            return Err(Error::WrongDimension { required: 4, found: n });
        }
        let ds = self.cov_deriv(&self.tracefree_ricci)?.value();
        let dr = self.scalar.gradient();
        let g = &self.at.g;
        let mut out = TensorValue::zeros(n, vec![Variance::Down; 3]);
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let v = 0.5 * (ds.get(&[a, b, c]) - ds.get(&[b, a, c]))
                        + 0.5 / 12.0 * (dr[a] * g.get(&[b, c]) - dr[b] * g.get(&[a, c]));
                    out.set(&[a, b, c], v);
                }
            }
        }
        Ok(out)
    }
}

fn jet_matrix(t: &JetTensor) -> Vec<Jet> {
    t.comps.clone()
}

fn jet_matmul(a: &[Jet], b: &[Jet], n: usize) -> Vec<Jet> {
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut s = &a[i * n] * &b[j];
            for k in 1..n {
                s = &s + &(&a[i * n + k] * &b[k * n + j]);
            }
            out.push(s);
        }
    }
    out
}

/// Inverse metric jet by the Neumann series around `g(p)⁻¹`.
fn inverse_jet(g: &JetTensor, at: &MetricAtPoint) -> Result<JetTensor> {
    let n = g.dim;
    let space = g.space().clone();
    let order = g.order();
    let g0inv: Vec<Jet> = at
        .ginv
        .components()
        .iter()
        .map(|&v| Jet::constant(&space, v, order))
        .collect();
    let mut delta = jet_matrix(g);
    for d in &mut delta {
        let v = d.value();
        *d = &*d - &Jet::constant(&space, v, order);
    }
    // X = −g0⁻¹ δ; ginv = Σ_k X^k g0⁻¹
    let x: Vec<Jet> = jet_matmul(&g0inv, &delta, n).iter().map(|j| j.scale(-1.0)).collect();
    let mut term = g0inv.clone();
    let mut sum = g0inv.clone();
    for _ in 0..order {
        term = jet_matmul(&x, &term, n);
        for (s, t) in sum.iter_mut().zip(&term) {
            *s = &*s + t;
        }
    }
    Ok(JetTensor {
        dim: n,
        variance: vec![Variance::Up; 2],
        comps: sum,
    })
}

fn christoffel(g: &JetTensor, ginv: &JetTensor) -> JetTensor {
    let n = g.dim;
    let space = g.space().clone();
    let o = g.order() - 1;
    // dg[(d*n+b)*n+c] = ∂_d g_bc
    let mut dg = Vec::with_capacity(n * n * n);
    for d in 0..n {
        for bc in 0..n * n {
            dg.push(g.comps[bc].deriv(d));
        }
    }
    let at = |d: usize, b: usize, c: usize| &dg[(d * n + b) * n + c];
    // Γ_{dbc} = ½(∂_b g_dc + ∂_c g_db − ∂_d g_bc)
    let mut low = Vec::with_capacity(n * n * n);
    for d in 0..n {
        for b in 0..n {
            for c in 0..n {
                let s = &(at(b, d, c) + at(c, d, b)) - at(d, b, c);
                low.push(s.scale(0.5));
            }
        }
    }
    let gi = ginv.truncate(o);
    let mut comps = Vec::with_capacity(n * n * n);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let mut s = Jet::zero(&space, o);
                for d in 0..n {
                    let l = &low[(d * n + b) * n + c];
                    if l.max_abs() != 0.0 {
                        s = &s + &(&gi.comps[a * n + d] * l);
                    }
                }
                comps.push(s);
            }
        }
    }
    JetTensor {
        dim: n,
        variance: vec![Variance::Up, Variance::Down, Variance::Down],
        comps,
    }
}

fn riemann(gamma: &JetTensor, g: &JetTensor) -> JetTensor {
    let n = gamma.dim;
    let space = gamma.space().clone();
    let o = gamma.order() - 1;
    let mut dgam = Vec::with_capacity(n * n * n * n);
    for c in 0..n {
        for abc in 0..n * n * n {
            dgam.push(gamma.comps[abc].deriv(c));
        }
    }
    let d = |c: usize, a: usize, b: usize, e: usize| &dgam[((c * n + a) * n + b) * n + e];
    let gt: Vec<Jet> = gamma.comps.iter().map(|j| j.truncate(o)).collect();
    let gtr = |a: usize, b: usize, c: usize| &gt[(a * n + b) * n + c];
    // R^a_{bcd}
    let mut up = Vec::with_capacity(n.pow(4));
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for dd in 0..n {
                    let mut s = d(c, a, dd, b) - d(dd, a, c, b);
                    for e in 0..n {
                        let p1 = gtr(a, c, e);
                        let p2 = gtr(e, dd, b);
                        if p1.max_abs() != 0.0 && p2.max_abs() != 0.0 {
                            s = &s + &(p1 * p2);
                        }
                        let q1 = gtr(a, dd, e);
                        let q2 = gtr(e, c, b);
                        if q1.max_abs() != 0.0 && q2.max_abs() != 0.0 {
                            s = &s - &(q1 * q2);
                        }
                    }
                    up.push(s);
                }
            }
        }
    }
    let gl = g.truncate(o);
    let mut comps = Vec::with_capacity(n.pow(4));
    let n3 = n * n * n;
    for a in 0..n {
        for bcd in 0..n3 {
            let mut s = Jet::zero(&space, o);
            for e in 0..n {
                let ge = &gl.comps[a * n + e];
                if ge.max_abs() != 0.0 {
                    s = &s + &(ge * &up[e * n3 + bcd]);
                }
            }
            comps.push(s);
        }
    }
    JetTensor {
        dim: n,
        variance: vec![Variance::Down; 4],
        comps,
    }
}

/// `Ric_{bd} = R^a_{bad} = g^{ae} R_{ebad}`.
fn ricci(rm: &JetTensor, ginv: &JetTensor) -> JetTensor {
    let n = rm.dim;
    let o = rm.order();
    let gi = ginv.truncate(o);
    let space = rm.space().clone();
    let mut comps = Vec::with_capacity(n * n);
    for b in 0..n {
        for d in 0..n {
            let mut s = Jet::zero(&space, o);
            for a in 0..n {
                for e in 0..n {
                    let gae = &gi.comps[a * n + e];
                    if gae.max_abs() != 0.0 {
                        s = &s + &(gae * &rm.comps[((e * n + b) * n + a) * n + d]);
                    }
                }
            }
            comps.push(s);
        }
    }
    JetTensor {
        dim: n,
        variance: vec![Variance::Down; 2],
        comps,
    }
}

fn weyl(rm: &JetTensor, ric: &JetTensor, scalar: &Jet, g: &JetTensor) -> JetTensor {
    let n = rm.dim;
    if n == 3 {
        return JetTensor::zeros(rm.space(), n, vec![Variance::Down; 4], rm.order());
    }
    let nf = n as f64;
    let c1 = 1.0 / (nf - 2.0);
    let c2 = 1.0 / ((nf - 1.0) * (nf - 2.0));
    let gg = |a: usize, b: usize| &g.comps[a * n + b];
    let rr = |a: usize, b: usize| &ric.comps[a * n + b];
    let mut comps = Vec::with_capacity(n.pow(4));
    for idx in multi_indices(n, 4) {
        let (a, b, c, d) = (idx[0], idx[1], idx[2], idx[3]);
        let k = ((a * n + b) * n + c) * n + d;
        let mixed = &(&(&(gg(a, c) * rr(b, d)) - &(gg(a, d) * rr(b, c))) - &(gg(b, c) * rr(a, d)))
            + &(gg(b, d) * rr(a, c));
        let gg2 = &(gg(a, c) * gg(b, d)) - &(gg(a, d) * gg(b, c));
        let v = &(&rm.comps[k] - &mixed.scale(c1)) + &(&gg2 * scalar).scale(c2);
        comps.push(v);
    }
    JetTensor {
        dim: n,
        variance: vec![Variance::Down; 4],
        comps,
    }
}

/// `(∇T)_{b a₁…a_r} = ∂_b T − Σ Γ^e_{b a_i} T_{…e…} + Σ Γ^{a_i}_{b e} T^{…e…}`.
pub fn cov_deriv(t: &JetTensor, gamma: &JetTensor) -> JetTensor {
    let n = t.dim;
    let r = t.rank();
    let o = (t.order() - 1).min(gamma.order());
    let gt: Vec<Jet> = gamma.comps.iter().map(|j| j.truncate(o)).collect();
    let gnz: Vec<bool> = gt.iter().map(|j| j.max_abs() != 0.0).collect();
    let tt: Vec<Jet> = t.comps.iter().map(|j| j.truncate(o)).collect();
    let mut strides = vec![1usize; r];
    for s in (0..r.saturating_sub(1)).rev() {
        strides[s] = strides[s + 1] * n;
    }
    let mut variance = vec![Variance::Down];
    variance.extend_from_slice(&t.variance);
    let mut comps = Vec::with_capacity(n.pow(r as u32 + 1));
    let total = n.pow(r as u32);
    for b in 0..n {
        for flat in 0..total {
            let mut s = t.comps[flat].deriv(b);
            let mut rest = flat;
            for slot in 0..r {
                let ai = rest / strides[slot];
                rest %= strides[slot];
                let base = flat - ai * strides[slot];
                for e in 0..n {
                    let src = &tt[base + e * strides[slot]];
                    match t.variance[slot] {
                        Variance::Down => {
                            let gi = (e * n + b) * n + ai;
                            if gnz[gi] {
                                s = &s - &(&gt[gi] * src);
                            }
                        }
                        Variance::Up => {
                            let gi = (ai * n + b) * n + e;
                            if gnz[gi] {
                                s = &s + &(&gt[gi] * src);
                            }
                        }
                    }
                }
            }
            comps.push(s);
        }
    }
    JetTensor {
        dim: n,
        variance,
        comps,
    }
}

/// Plebański tensor `P^{ab}_{cd}` of a symmetric trace-free `S` (dimension 4).
pub fn plebanski(s: &TensorValue, m: &MetricAtPoint) -> Result<TensorValue> {
    let n = s.dim();
    if n != 4 {
        return Err(Error::WrongDimension { required: 4, found: n });
    }
    let sd = s.all_down(m)?;
    let smat = sd.to_matrix();
    let ginv = m.ginv.to_matrix();
    let scale = sd.max_abs();
    let trace = (&ginv * &smat).trace();
    if trace.abs() > 1e-9 * scale.max(1.0) {
        return Err(Error::NotTraceFree(trace));
    }
    // Mixed S^a_c and (S·S)^b_d = S^{be} S_{ed}.
    let mixed: DMatrix<f64> = &ginv * &smat;
    let sq: DMatrix<f64> = &mixed * &mixed;
    let ss = sq.trace();
    let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    let mut a_t = TensorValue::zeros(4, vec![Variance::Up, Variance::Up, Variance::Down, Variance::Down]);
    for idx in multi_indices(4, 4) {
        let (a, b, c, d) = (idx[0], idx[1], idx[2], idx[3]);
        let v = mixed[(a, c)] * mixed[(b, d)] + delta(a, c) * sq[(b, d)]
            - delta(a, c) * delta(b, d) * ss / 6.0;
        a_t.set(&idx, v);
    }
    a_t.antisymmetrize(&[0, 1])?.antisymmetrize(&[2, 3])
}

/// Projects an all-down rank-4 tensor onto algebraic curvature tensors
/// and then removes all traces.
pub fn weyl_projection(t: &TensorValue, m: &MetricAtPoint) -> Result<TensorValue> {
    let n = t.dim();
    if t.rank() != 4 {
        return Err(Error::RankMismatch { expected: 4, found: t.rank() });
    }
    let a = t.all_down(m)?.antisymmetrize(&[0, 1])?.antisymmetrize(&[2, 3])?;
    let mut r = TensorValue::zeros(n, vec![Variance::Down; 4]);
    for idx in multi_indices(n, 4) {
        let (p, q, u, v) = (idx[0], idx[1], idx[2], idx[3]);
        r.set(&idx, 0.5 * (a.get(&idx) + a.get(&[u, v, p, q])));
    }
    let mut rc = r.clone();
    for idx in multi_indices(n, 4) {
        let (p, q, u, v) = (idx[0], idx[1], idx[2], idx[3]);
        let cyc = r.get(&idx) + r.get(&[p, u, v, q]) + r.get(&[p, v, q, u]);
        rc.set(&idx, r.get(&idx) - cyc / 3.0);
    }
    let mut ric = vec![0.0; n * n];
    for b in 0..n {
        for d in 0..n {
            for a in 0..n {
                for c in 0..n {
                    ric[b * n + d] += m.ginv.get(&[a, c]) * rc.get(&[a, b, c, d]);
                }
            }
        }
    }
    let scalar: f64 = (0..n * n).map(|i| m.ginv.components()[i] * ric[i]).sum();
    let nf = n as f64;
    let (c1, c2) = (1.0 / (nf - 2.0), 1.0 / ((nf - 1.0) * (nf - 2.0)));
    let g = |a: usize, b: usize| m.g.get(&[a, b]);
    let rr = |a: usize, b: usize| ric[a * n + b];
    let mut w = rc.clone();
    for idx in multi_indices(n, 4) {
        let (a, b, c, d) = (idx[0], idx[1], idx[2], idx[3]);
        let mixed = g(a, c) * rr(b, d) - g(a, d) * rr(b, c) - g(b, c) * rr(a, d) + g(b, d) * rr(a, c);
        let gg = g(a, c) * g(b, d) - g(a, d) * g(b, c);
        w.set(&idx, rc.get(&idx) - c1 * mixed + c2 * scalar * gg);
    }
    Ok(w)
}

/// Largest violation among the Weyl-like conditions on an all-down rank-4
/// tensor: pair antisymmetry, pair exchange, cyclic identity, and the trace
/// `W_{abc}{}^{b}` (relative to `max(1, ‖W‖∞)`).
pub fn weyl_like_residual(w: &TensorValue, m: &MetricAtPoint) -> f64 {
    let n = w.dim();
    let scale = w.max_abs().max(1.0);
    let mut worst = 0.0f64;
    for idx in multi_indices(n, 4) {
        let (a, b, c, d) = (idx[0], idx[1], idx[2], idx[3]);
        let v = w.get(&idx);
        worst = worst
            .max((v + w.get(&[b, a, c, d])).abs())
            .max((v + w.get(&[a, b, d, c])).abs())
            .max((v - w.get(&[c, d, a, b])).abs())
            .max((v + w.get(&[a, c, d, b]) + w.get(&[a, d, b, c])).abs());
    }
    for a in 0..n {
        for c in 0..n {
            let mut t = 0.0;
            for b in 0..n {
                for d in 0..n {
                    t += m.ginv.get(&[b, d]) * w.get(&[a, b, c, d]);
                }
            }
            worst = worst.max(t.abs());
        }
    }
    worst / scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric_ir::parse_metric;

    fn schwarzschild() -> MetricSpec {
        parse_metric(
            "dim = 4\ncoords = t r th ph\ng[0][0] = -(1 - 2/r)\ng[1][1] = 1/(1 - 2/r)\ng[2][2] = r^2\ng[3][3] = r^2*sin(th)^2\n",
        )
        .unwrap()
    }

    fn ppwave() -> MetricSpec {
        parse_metric("dim = 4\ncoords = u v x y\ng[0][0] = x^2 - y^2\ng[0][1] = 1\ng[2][2] = 1\ng[3][3] = 1\n").unwrap()
    }

    #[test]
    fn minkowski_is_flat() {
        let m = parse_metric("dim = 4\ncoords = t x y z\ng[0][0] = -1\ng[1][1] = 1\ng[2][2] = 1\ng[3][3] = 1\n").unwrap();
        let geo = Geometry::new(&m, &Point::new(vec![0.3, 1.0, 2.0, -1.0])).unwrap();
        assert_eq!(geo.gamma.value().max_abs(), 0.0);
        assert_eq!(geo.riemann.value().max_abs(), 0.0);
    }

    #[test]
    fn ppwave_christoffel_and_riemann() {
        let geo = Geometry::new(&ppwave(), &Point::new(vec![0.0, 0.0, 1.5, 0.5])).unwrap();
        let gam = geo.gamma.value();
        // Γ^v_{ux} = ½ ∂_x H = x
        assert!((gam.get(&[1, 0, 2]) - 1.5).abs() < 1e-14);
        let rm = geo.riemann.value();
        assert!((rm.get(&[0, 2, 0, 2]) + 1.0).abs() < 1e-14);
        assert!(geo.ricci.value().max_abs() < 1e-14);
        assert!(geo.weyl.value().max_diff(&rm) < 1e-14);
    }

    #[test]
    fn schwarzschild_gamma_and_vacuum() {
        let geo = Geometry::new(&schwarzschild(), &Point::new(vec![0.0, 3.0, 1.2, 0.0])).unwrap();
        assert!((geo.gamma.value().get(&[1, 0, 0]) - 1.0 / 27.0).abs() < 1e-14);
        assert!(geo.ricci.value().max_abs() < 1e-13);
        assert!(geo.scalar.value().abs() < 1e-13);
        assert!(geo.tracefree_ricci.value().max_abs() < 1e-13);
    }

    #[test]
    fn riemann_symmetries_and_second_bianchi() {
        let geo = Geometry::new(&schwarzschild(), &Point::new(vec![0.0, 3.0, 1.2, 0.4])).unwrap();
        let rm = geo.riemann.value();
        let scale = rm.max_abs();
        for idx in multi_indices(4, 4) {
            let (a, b, c, d) = (idx[0], idx[1], idx[2], idx[3]);
            let v = rm.get(&idx);
            assert!((v + rm.get(&[b, a, c, d])).abs() < 1e-12 * scale);
            assert!((v - rm.get(&[c, d, a, b])).abs() < 1e-12 * scale);
            assert!((v + rm.get(&[a, c, d, b]) + rm.get(&[a, d, b, c])).abs() < 1e-12 * scale);
        }
        let drm = geo.nabla_riemann(1).unwrap().value();
        for idx in multi_indices(4, 5) {
            let (e, a, b, c, d) = (idx[0], idx[1], idx[2], idx[3], idx[4]);
            let cyc = drm.get(&[e, a, b, c, d]) + drm.get(&[a, b, e, c, d]) + drm.get(&[b, e, a, c, d]);
            assert!(cyc.abs() < 1e-9, "{cyc}");
        }
    }

    #[test]
    fn metricity() {
        let geo = Geometry::new(&schwarzschild(), &Point::new(vec![0.0, 4.0, 0.9, 0.0])).unwrap();
        let dg = geo.cov_deriv(&geo.g).unwrap();
        assert!(dg.value().max_abs() < 1e-12);
    }

    #[test]
    fn symbolic_and_direct_routes_agree() {
        let m = schwarzschild();
        let p = Point::new(vec![0.0, 3.5, 1.0, 0.0]);
        let a = Geometry::new(&m, &p).unwrap();
        let b = Geometry::new_direct(&m, &p).unwrap();
        let x = a.nabla_riemann(3).unwrap().value();
        let y = b.nabla_riemann(3).unwrap().value();
        assert!(x.max_diff(&y) < 1e-9 * (1.0 + x.max_abs()));
    }

    #[test]
    fn plebanski_of_tachyonic_s_vanishes() {
        let m = MetricAtPoint::minkowski(4);
        // u = ∂_x unit spacelike; h = g − u u
        let lam = 0.7;
        let mut s = TensorValue::zeros(4, vec![Variance::Down; 2]);
        for a in 0..4 {
            for b in 0..4 {
                let uu = if a == 1 && b == 1 { 1.0 } else { 0.0 };
                let h = m.g.get(&[a, b]) - uu;
                s.set(&[a, b], lam * (uu - h / 3.0));
            }
        }
        let p = plebanski(&s, &m).unwrap();
        assert!(p.max_abs() < 1e-12);
        assert!(plebanski(&TensorValue::zeros(4, vec![Variance::Down; 2]), &m).unwrap().max_abs() == 0.0);
    }
}
