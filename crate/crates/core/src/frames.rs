//! Null frames `(k, l, m₂, …, m_{n−1})`, their transformations, frame
//! components, rigid-frame connection coefficients, and the complex frame
//! used in four dimensions.
//!
//! Frame label 0 is `k`, 1 is `l`, labels `2..n` are the spatial `m_j`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::Geometry;
use crate::jet::{Jet, JetTensor};
use crate::tensor::{multi_indices, MetricAtPoint, TensorValue, Variance};

/// Null-ness tolerance for the input direction.
pub const NULL_TOL: f64 = 1e-10;
/// Relative threshold below which a Gram–Schmidt candidate is dropped.
const DROP_TOL: f64 = 1e-8;

/// Scalars the frame completion can run on: plain values or jets.
pub trait FrameScalar: Clone {
    fn value(&self) -> f64;
    fn like(&self, v: f64) -> Self;
    fn plus(&self, o: &Self) -> Self;
    fn minus(&self, o: &Self) -> Self;
    fn times(&self, o: &Self) -> Self;
    fn scaled(&self, s: f64) -> Self;
    fn recip(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn is_zero(&self) -> bool;
}

impl FrameScalar for f64 {
    fn value(&self) -> f64 {
        *self
    }
    fn like(&self, v: f64) -> Self {
        v
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn scaled(&self, s: f64) -> Self {
        self * s
    }
    fn recip(&self) -> Self {
        1.0 / self
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
}

impl FrameScalar for Jet {
    fn value(&self) -> f64 {
        Jet::value(self)
    }
    fn like(&self, v: f64) -> Self {
        Jet::constant(self.space(), v, self.order())
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn scaled(&self, s: f64) -> Self {
        self.scale(s)
    }
    fn recip(&self) -> Self {
        Jet::recip(self)
    }
    fn sqrt(&self) -> Self {
        Jet::sqrt(self)
    }
    fn is_zero(&self) -> bool {
        self.max_abs() == 0.0
    }
}

fn dot<S: FrameScalar>(g: &[S], n: usize, a: &[S], b: &[S]) -> S {
    let mut s = g[0].like(0.0);
    for i in 0..n {
        for j in 0..n {
            if !g[i * n + j].is_zero() {
                s = s.plus(&g[i * n + j].times(&a[i]).times(&b[j]));
            }
        }
    }
    s
}

fn axpy<S: FrameScalar>(y: &[S], a: &S, x: &[S]) -> Vec<S> {
    y.iter().zip(x).map(|(yi, xi)| yi.plus(&a.times(xi))).collect()
}

/// Chart-canonical unit timelike vector: the eigenvector of `g(p)` with the
/// negative eigenvalue, sign fixed so its largest component is positive.
pub fn canonical_timelike(m: &MetricAtPoint) -> Vec<f64> {
    let g = m.matrix();
    let n = g.nrows();
    let eig = SymmetricEigen::new(g.clone());
    let (col, _) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty");
    let mut t: Vec<f64> = (0..n).map(|i| eig.eigenvectors[(i, col)]).collect();
    let mut big = 0;
    for i in 1..n {
        if t[i].abs() > t[big].abs() + 1e-12 {
            big = i;
        }
    }
    if t[big] < 0.0 {
        t.iter_mut().for_each(|x| *x = -*x);
    }
    let norm = (-m.dot(&t, &t)).sqrt();
    t.iter_mut().for_each(|x| *x /= norm);
    t
}

/// Completes `k` to a null frame given the metric components `g` (row-major)
/// and a reference vector `t` with `g(k,t) ≠ 0`.
pub fn complete_generic<S: FrameScalar>(k: &[S], g: &[S], t: &[S]) -> Result<Vec<Vec<S>>> {
    let n = k.len();
    let kt = dot(g, n, k, t);
    let knorm = k.iter().map(|x| x.value().powi(2)).sum::<f64>().sqrt();
    let tnorm = t.iter().map(|x| x.value().powi(2)).sum::<f64>().sqrt();
    if kt.value().abs() <= 1e-10 * knorm * tnorm {
        return Err(Error::DegenerateSeed);
    }
    let a = kt.recip();
    let tt = dot(g, n, t, t);
    let b = tt.times(&a).times(&a).scaled(-0.5);
    let l: Vec<S> = t
        .iter()
        .zip(k)
        .map(|(ti, ki)| a.times(ti).plus(&b.times(ki)))
        .collect();
    let mut frame = vec![k.to_vec(), l];
    for c in 0..n {
        if frame.len() == n {
            break;
        }
        let mut v: Vec<S> = (0..n).map(|i| k[0].like(if i == c { 1.0 } else { 0.0 })).collect();
        // Second pass restores orthogonality lost to cancellation.
        for _ in 0..2 {
            let vk = dot(g, n, &v, &frame[0]);
            let vl = dot(g, n, &v, &frame[1]);
            v = axpy(&v, &vl.scaled(-1.0), &frame[0]);
            v = axpy(&v, &vk.scaled(-1.0), &frame[1]);
            for j in 2..frame.len() {
                let vm = dot(g, n, &v, &frame[j]);
                v = axpy(&v, &vm.scaled(-1.0), &frame[j]);
            }
        }
        let nn = dot(g, n, &v, &v);
        let gcc = g[c * n + c].value().abs();
        if nn.value() <= (DROP_TOL * (1.0 + gcc.sqrt())).powi(2) {
            continue;
        }
        let inv = nn.sqrt().recip();
        frame.push(v.iter().map(|x| x.times(&inv)).collect());
    }
    if frame.len() != n {
        return Err(Error::DegenerateSeed);
    }
    Ok(frame)
}

/// An ordered null frame at a point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullFrame {
    pub vectors: Vec<Vec<f64>>,
}

impl NullFrame {
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn k(&self) -> &[f64] {
        &self.vectors[0]
    }

    pub fn l(&self) -> &[f64] {
        &self.vectors[1]
    }

    /// Spatial vector `m_j`, `2 ≤ j < n`.
    pub fn m(&self, j: usize) -> &[f64] {
        &self.vectors[j]
    }

    /// Largest deviation of the frame Gram matrix from the null-frame metric.
    pub fn normalization_residual(&self, m: &MetricAtPoint) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for a in 0..n {
            for b in 0..n {
                let want = frame_metric(a, b);
                worst = worst.max((m.dot(&self.vectors[a], &self.vectors[b]) - want).abs());
            }
        }
        worst
    }

    /// Short hash of the frame components, for comparing frame-dependent output.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        for v in &self.vectors {
            for x in v {
                h.update(x.to_bits().to_le_bytes());
            }
        }
        h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    /// Null rotation about `k` with parameters `z` (length n−2).
    pub fn null_rotation(&self, z: &[f64]) -> Result<NullFrame> {
        let n = self.dim();
        if z.len() != n - 2 {
            return Err(Error::DimensionMismatch {
                expected: n - 2,
                found: z.len(),
            });
        }
        let zz: f64 = z.iter().map(|x| x * x).sum();
        let k = self.k();
        let mut l: Vec<f64> = (0..n).map(|a| self.l()[a] - 0.5 * zz * k[a]).collect();
        let mut out = vec![k.to_vec(), vec![]];
        for (i, zi) in z.iter().enumerate() {
            let m = self.m(i + 2);
            for a in 0..n {
                l[a] += zi * m[a];
            }
            out.push((0..n).map(|a| m[a] - zi * k[a]).collect());
        }
        out[1] = l;
        Ok(NullFrame { vectors: out })
    }

    pub fn boost(&self, lambda: f64) -> Result<NullFrame> {
        if lambda == 0.0 {
            return Err(Error::ZeroBoost);
        }
        let mut out = self.clone();
        out.vectors[0].iter_mut().for_each(|x| *x *= lambda);
        out.vectors[1].iter_mut().for_each(|x| *x /= lambda);
        Ok(out)
    }

    /// Spatial rotation `m_i ↦ R_ij m_j`.
    pub fn spin(&self, r: &DMatrix<f64>) -> Result<NullFrame> {
        let n = self.dim();
        let s = n - 2;
        if r.nrows() != s || r.ncols() != s {
            return Err(Error::DimensionMismatch {
                expected: s,
                found: r.nrows(),
            });
        }
        let res = (r * r.transpose() - DMatrix::identity(s, s)).abs().max();
        if res > 1e-10 {
            return Err(Error::NotOrthogonal(res));
        }
        let mut out = self.clone();
        for i in 0..s {
            out.vectors[i + 2] = (0..n)
                .map(|a| (0..s).map(|j| r[(i, j)] * self.vectors[j + 2][a]).sum())
                .collect();
        }
        Ok(out)
    }
}

/// Null-frame metric `η_{αβ}`: `η₀₁ = η_{jj} = 1`.
pub fn frame_metric(a: usize, b: usize) -> f64 {
    match (a, b) {
        (0, 1) | (1, 0) => 1.0,
        (i, j) if i == j && i >= 2 => 1.0,
        _ => 0.0,
    }
}

/// Raising a frame label with `η` swaps 0 and 1.
pub fn raise_label(a: usize) -> usize {
    match a {
        0 => 1,
        1 => 0,
        j => j,
    }
}

/// Completes a null `k` at a point to a frame, deterministically.
pub fn complete_null_frame(k: &[f64], m: &MetricAtPoint, seed: Option<&[f64]>) -> Result<NullFrame> {
    let n = m.dim();
    if k.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: k.len(),
        });
    }
    let knorm = k.iter().map(|x| x * x).sum::<f64>().sqrt();
    if knorm == 0.0 {
        return Err(Error::ZeroVector);
    }
    let kk = m.dot(k, k);
    if kk.abs() > NULL_TOL * knorm * knorm * m.g.max_abs().max(1.0) {
        return Err(Error::NotNull(kk));
    }
    let t = match seed {
        Some(s) => s.to_vec(),
        None => canonical_timelike(m),
    };
    let vectors = complete_generic(k, m.g.components(), &t)?;
    Ok(NullFrame { vectors })
}

/// Frame components `T(e_{α₁}, …, e_{α_r})` after lowering all slots.
pub fn frame_components(t: &TensorValue, f: &NullFrame, m: &MetricAtPoint) -> Result<TensorValue> {
    if t.dim() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            found: t.dim(),
        });
    }
    let mut out = t.all_down(m)?;
    for slot in 0..out.rank() {
        out = out.transform_slot(slot, &f.vectors);
    }
    Ok(out)
}

/// Coordinate components of a tensor given by its frame components
/// (all slots down in the frame, all down in the result).
pub fn from_frame_components(tf: &TensorValue, f: &NullFrame, m: &MetricAtPoint) -> TensorValue {
    // T_{a…} = Σ T_{α…} θ^α_a with coframe θ^α = η^{αβ} e_β♭.
    let n = f.dim();
    let coframe: Vec<Vec<f64>> = (0..n)
        .map(|a| m.lower(&f.vectors[raise_label(a)]))
        .collect();
    // transform_slot contracts with basis[index][e]; we need out[c] = Σ_α θ^α_c T[α].
    let mut basis = vec![vec![0.0; n]; n];
    for c in 0..n {
        for alpha in 0..n {
            basis[c][alpha] = coframe[alpha][c];
        }
    }
    let mut out = tf.clone();
    for slot in 0..out.rank() {
        out = out.transform_slot(slot, &basis);
    }
    out
}

/// A frame field known through jets at a point.
#[derive(Debug, Clone)]
pub struct JetFrame {
    pub vectors: Vec<Vec<Jet>>,
}

impl JetFrame {
    /// Completes a null vector field jet using the same algorithm as the
    /// pointwise completion, with the reference vector held constant.
    pub fn complete(k: &JetTensor, g: &JetTensor, at: &MetricAtPoint, seed: Option<&[f64]>) -> Result<JetFrame> {
        let order = k.order().min(g.order());
        let kc: Vec<Jet> = k.comps.iter().map(|j| j.truncate(order)).collect();
        let gc: Vec<Jet> = g.comps.iter().map(|j| j.truncate(order)).collect();
        let k0: Vec<f64> = kc.iter().map(Jet::value).collect();
        // Validates null-ness and non-degeneracy at the point.
        complete_null_frame(&k0, at, seed)?;
        let t0 = match seed {
            Some(s) => s.to_vec(),
            None => canonical_timelike(at),
        };
        let t: Vec<Jet> = t0.iter().map(|&v| kc[0].like(v)).collect();
        Ok(JetFrame {
            vectors: complete_generic(&kc, &gc, &t)?,
        })
    }

    pub fn value(&self) -> NullFrame {
        NullFrame {
            vectors: self
                .vectors
                .iter()
                .map(|v| v.iter().map(Jet::value).collect())
                .collect(),
        }
    }

    /// Largest first-order deviation of `g(e_α, e_β)` from `η_{αβ}`.
    pub fn rigidity_residual(&self, g: &JetTensor) -> f64 {
        let n = self.vectors.len();
        let order = self.vectors[0][0].order().min(g.order()).min(1);
        let gc: Vec<Jet> = g.comps.iter().map(|j| j.truncate(order)).collect();
        let mut worst = 0.0f64;
        for a in 0..n {
            for b in 0..n {
                let ea: Vec<Jet> = self.vectors[a].iter().map(|j| j.truncate(order)).collect();
                let eb: Vec<Jet> = self.vectors[b].iter().map(|j| j.truncate(order)).collect();
                let d = dot(&gc, n, &ea, &eb);
                let mut c = d.coeffs().to_vec();
                c[0] -= frame_metric(a, b);
                worst = c.iter().fold(worst, |w, x| w.max(x.abs()));
            }
        }
        worst
    }
}

/// Frame components of an all-down tensor field jet in a jet frame.
pub fn jet_frame_components(t: &JetTensor, f: &JetFrame) -> Result<JetTensor> {
    if t.variance.iter().any(|v| *v != Variance::Down) {
        return Err(Error::VarianceClash(0, 0));
    }
    let n = t.dim;
    let order = t.order().min(f.vectors[0][0].order());
    let e: Vec<Vec<Jet>> = f
        .vectors
        .iter()
        .map(|v| v.iter().map(|j| j.truncate(order)).collect())
        .collect();
    let mut comps: Vec<Jet> = t.comps.iter().map(|j| j.truncate(order)).collect();
    let r = t.rank();
    for slot in 0..r {
        let stride = n.pow((r - 1 - slot) as u32);
        let mut next = comps.clone();
        for (flat, out) in next.iter_mut().enumerate() {
            let alpha = (flat / stride) % n;
            let base = flat - alpha * stride;
            let mut acc = Jet::zero(t.space(), order);
            for c in 0..n {
                if e[alpha][c].is_zero() {
                    continue;
                }
                acc = &acc + &(&e[alpha][c] * &comps[base + c * stride]);
            }
            *out = acc;
        }
        comps = next;
    }
    Ok(JetTensor {
        dim: n,
        variance: t.variance.clone(),
        comps,
    })
}

/// Rigid-frame connection coefficients `Γ_{αβγ} = g(e_α, ∇_{e_γ} e_β)`.
pub fn frame_connection(f: &JetFrame, geo: &Geometry) -> Result<TensorValue> {
    let n = f.vectors.len();
    let res = f.rigidity_residual(&geo.g);
    if res > 1e-9 {
        return Err(Error::NotRigid(res));
    }
    if f.vectors[0][0].order() == 0 {
        return Err(Error::OrderTooHigh(1));
    }
    let e: Vec<Vec<f64>> = f.value().vectors;
    let gam = geo.gamma.value();
    // (∇_c e_β)^a = ∂_c e_β^a + Γ^a_{cd} e_β^d
    let mut nabla = vec![vec![vec![0.0; n]; n]; n]; // [β][c][a]
    for beta in 0..n {
        for c in 0..n {
            for a in 0..n {
                let mut s = f.vectors[beta][a].gradient()[c];
                for d in 0..n {
                    s += gam.get(&[a, c, d]) * e[beta][d];
                }
                nabla[beta][c][a] = s;
            }
        }
    }
    let mut out = TensorValue::zeros(n, vec![Variance::Down; 3]);
    for idx in multi_indices(n, 3) {
        let (alpha, beta, gamma) = (idx[0], idx[1], idx[2]);
        let dir: Vec<f64> = (0..n)
            .map(|a| (0..n).map(|c| e[gamma][c] * nabla[beta][c][a]).sum())
            .collect();
        out.set(&idx, geo.at.dot(&e[alpha], &dir));
    }
    Ok(out)
}

/// Complex scalar as a `(re, im)` pair.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl Complex {
    pub const ZERO: Complex = Complex { re: 0.0, im: 0.0 };
    pub const I: Complex = Complex { re: 0.0, im: 1.0 };

    pub fn new(re: f64, im: f64) -> Self {
        Complex { re, im }
    }

    pub fn real(re: f64) -> Self {
        Complex { re, im: 0.0 }
    }

    pub fn conj(self) -> Self {
        Complex::new(self.re, -self.im)
    }

    pub fn abs(self) -> f64 {
        self.re.hypot(self.im)
    }

    pub fn scale(self, s: f64) -> Self {
        Complex::new(self.re * s, self.im * s)
    }

    pub fn recip(self) -> Self {
        let d = self.re * self.re + self.im * self.im;
        Complex::new(self.re / d, -self.im / d)
    }

    pub fn from_polar(r: f64, theta: f64) -> Self {
        Complex::new(r * theta.cos(), r * theta.sin())
    }
}

impl Add for Complex {
    type Output = Complex;
    fn add(self, o: Complex) -> Complex {
        Complex::new(self.re + o.re, self.im + o.im)
    }
}

impl Sub for Complex {
    type Output = Complex;
    fn sub(self, o: Complex) -> Complex {
        Complex::new(self.re - o.re, self.im - o.im)
    }
}

impl Mul for Complex {
    type Output = Complex;
    fn mul(self, o: Complex) -> Complex {
        Complex::new(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)
    }
}

impl Neg for Complex {
    type Output = Complex;
    fn neg(self) -> Complex {
        Complex::new(-self.re, -self.im)
    }
}

impl fmt::Display for Complex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im < 0.0 {
            write!(f, "{}-{}i", self.re, -self.im)
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

/// A complexified vector.
#[derive(Debug, Clone, PartialEq)]
pub struct CVector {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl CVector {
    pub fn real(v: &[f64]) -> Self {
        CVector {
            re: v.to_vec(),
            im: vec![0.0; v.len()],
        }
    }

    pub fn conj(&self) -> Self {
        CVector {
            re: self.re.clone(),
            im: self.im.iter().map(|x| -x).collect(),
        }
    }

    pub fn component(&self, a: usize) -> Complex {
        Complex::new(self.re[a], self.im[a])
    }
}

/// `T(v₁, …, v_r)` for an all-down real tensor and complex vectors.
pub fn contract_complex(t: &TensorValue, vs: &[&CVector]) -> Complex {
    let n = t.dim();
    assert_eq!(vs.len(), t.rank());
    let mut acc: Vec<Complex> = t.components().iter().map(|&x| Complex::real(x)).collect();
    for v in vs.iter().rev() {
        let len = acc.len() / n;
        acc = (0..len)
            .map(|i| {
                (0..n).fold(Complex::ZERO, |s, e| s + acc[i * n + e] * v.component(e))
            })
            .collect();
    }
    acc[0]
}

/// Complex null frame `(k, l, m, m̄)` with `m = (m₂ − i m₃)/√2`.
#[derive(Debug, Clone, PartialEq)]
pub struct NpFrame {
    pub k: CVector,
    pub l: CVector,
    pub m: CVector,
    pub mbar: CVector,
}

pub fn np_frame(f: &NullFrame) -> Result<NpFrame> {
    if f.dim() != 4 {
        return Err(Error::WrongDimension {
            required: 4,
            found: f.dim(),
        });
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let m = CVector {
        re: f.m(2).iter().map(|x| x * s).collect(),
        im: f.m(3).iter().map(|x| -x * s).collect(),
    };
    Ok(NpFrame {
        k: CVector::real(f.k()),
        l: CVector::real(f.l()),
        mbar: m.conj(),
        m,
    })
}

/// Bilinear (not Hermitian) metric product of complex vectors.
pub fn complex_dot(m: &MetricAtPoint, a: &CVector, b: &CVector) -> Complex {
    contract_complex(&m.g, &[a, b])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn null_chart() -> MetricAtPoint {
        let mut g = DMatrix::zeros(4, 4);
        g[(0, 1)] = 1.0;
        g[(1, 0)] = 1.0;
        g[(2, 2)] = 1.0;
        g[(3, 3)] = 1.0;
        MetricAtPoint::new(g).unwrap()
    }

    #[test]
    fn adapted_chart_completion() {
        let m = null_chart();
        let f = complete_null_frame(&[0.0, 1.0, 0.0, 0.0], &m, None).unwrap();
        let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-14);
        assert!(close(f.l(), &[1.0, 0.0, 0.0, 0.0]));
        assert!(close(f.m(2), &[0.0, 0.0, 1.0, 0.0]));
        assert!(close(f.m(3), &[0.0, 0.0, 0.0, 1.0]));
    }

    #[test]
    fn timelike_k_is_rejected() {
        let m = MetricAtPoint::minkowski(4);
        assert!(matches!(
            complete_null_frame(&[1.0, 0.0, 0.0, 0.0], &m, None),
            Err(Error::NotNull(_))
        ));
        assert!(matches!(
            complete_null_frame(&[0.0; 4], &m, None),
            Err(Error::ZeroVector)
        ));
    }

    #[test]
    fn completion_is_deterministic() {
        let m = MetricAtPoint::minkowski(5);
        let k = [1.0, 0.6, 0.8, 0.0, 0.0];
        let a = complete_null_frame(&k, &m, None).unwrap();
        let b = complete_null_frame(&k, &m, None).unwrap();
        assert_eq!(a, b);
        assert!(a.normalization_residual(&m) < 1e-12);
    }

    #[test]
    fn transformations_preserve_normalization() {
        let m = MetricAtPoint::minkowski(4);
        let f = complete_null_frame(&[1.0, 1.0, 0.0, 0.0], &m, None).unwrap();
        assert_eq!(f.null_rotation(&[0.0, 0.0]).unwrap(), f);
        assert_eq!(f.boost(1.0).unwrap(), f);
        let g = f.null_rotation(&[0.3, -1.2]).unwrap().boost(2.5).unwrap();
        assert!(g.normalization_residual(&m) < 1e-12);
        assert!(matches!(f.boost(0.0), Err(Error::ZeroBoost)));
        let rot = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let s = f.spin(&rot).unwrap();
        let minus_m3: Vec<f64> = f.m(3).iter().map(|x| -x).collect();
        assert_eq!(s.m(2), minus_m3.as_slice());
        assert_eq!(s.m(3), f.m(2));
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert!(matches!(f.spin(&bad), Err(Error::NotOrthogonal(_))));
    }

    #[test]
    fn metric_frame_components() {
        let m = MetricAtPoint::minkowski(4);
        let f = complete_null_frame(&[1.0, 0.0, 1.0, 0.0], &m, None).unwrap();
        let gf = frame_components(&m.g, &f, &m).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                assert!((gf.get(&[a, b]) - frame_metric(a, b)).abs() < 1e-13);
            }
        }
        let back = from_frame_components(&gf, &f, &m);
        assert!(back.max_diff(&m.g) < 1e-13);
    }

    #[test]
    fn np_frame_is_null() {
        let m = MetricAtPoint::minkowski(4);
        let f = complete_null_frame(&[1.0, 0.0, 0.0, 1.0], &m, None).unwrap();
        let nf = np_frame(&f).unwrap();
        assert!(complex_dot(&m, &nf.m, &nf.m).abs() < 1e-14);
        assert!((complex_dot(&m, &nf.m, &nf.mbar) - Complex::real(1.0)).abs() < 1e-14);
        assert_eq!(nf.mbar.conj(), nf.m);
    }
}
