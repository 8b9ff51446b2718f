//! Boost weights, boost order and alignment type relative to a null
//! direction; Newman–Penrose scalars and principal null directions in four
//! dimensions; eigenstructure of the trace-free Ricci tensor.

use std::collections::BTreeMap;

use nalgebra::{ComplexField, DMatrix, Schur, SymmetricEigen};
use num::Complex as NumComplex;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::{
    complete_null_frame, contract_complex, frame_components, from_frame_components, np_frame, Complex,
    NpFrame, NullFrame,
};
use crate::geometry::weyl_like_residual;
use crate::tensor::{multi_indices, MetricAtPoint, TensorValue};

/// Zero threshold `|T_α| ≤ abs + rel·‖T‖∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { abs: 1e-10, rel: 1e-9 }
    }
}

impl Tolerances {
    pub fn threshold(&self, scale: f64) -> f64 {
        self.abs + self.rel * scale
    }

    pub fn scaled(&self, factor: f64) -> Tolerances {
        Tolerances {
            abs: self.abs * factor,
            rel: self.rel * factor,
        }
    }
}

/// `bw(α) = Σ_i (δ_{α_i 0} − δ_{α_i 1})`.
pub fn boost_weight(alpha: &[usize]) -> i32 {
    alpha
        .iter()
        .map(|&a| match a {
            0 => 1,
            1 => -1,
            _ => 0,
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AlignmentLabel {
    #[serde(rename = "not special")]
    NotSpecial,
    #[serde(rename = "II")]
    II,
    #[serde(rename = "III")]
    III,
    #[serde(rename = "N")]
    N,
    #[serde(rename = "zero")]
    Zero,
}

impl AlignmentLabel {
    pub fn from_bo(bo: Option<i32>) -> Self {
        match bo {
            None => AlignmentLabel::Zero,
            Some(b) if b > 0 => AlignmentLabel::NotSpecial,
            Some(0) => AlignmentLabel::II,
            Some(-1) => AlignmentLabel::III,
            Some(_) => AlignmentLabel::N,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AlignmentLabel::NotSpecial => "not special",
            AlignmentLabel::II => "II",
            AlignmentLabel::III => "III",
            AlignmentLabel::N => "N",
            AlignmentLabel::Zero => "zero",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightEntry {
    pub b: i32,
    pub max_abs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentReport {
    /// `None` for the zero tensor.
    pub bo: Option<i32>,
    pub weights: Vec<WeightEntry>,
    pub label: AlignmentLabel,
    pub tol_abs: f64,
    pub tol_rel: f64,
    pub sampled: bool,
    /// Largest component magnitude.
    pub norm: f64,
    /// Largest magnitude among components at or below the zero threshold
    /// whose weight exceeds `bo`; values close to the threshold are marginal.
    pub margin: f64,
}

impl AlignmentReport {
    pub fn is_zero(&self) -> bool {
        self.bo.is_none()
    }

    /// `bo ≤ s`, with the zero tensor counting as satisfying every bound.
    pub fn bo_at_most(&self, s: i32) -> bool {
        self.bo.is_none_or(|b| b <= s)
    }

    /// True when some discarded component is within a factor 10 of the threshold.
    pub fn is_marginal(&self) -> bool {
        let thr = self.tol_abs + self.tol_rel * self.norm;
        self.margin > 0.1 * thr
    }
}

/// Boost order from frame components (all slots frame-labelled).
pub fn boost_order_of_components(tf: &TensorValue, tol: Tolerances) -> AlignmentReport {
    let norm = tf.max_abs();
    let thr = tol.threshold(norm);
    let mut by_weight: BTreeMap<i32, f64> = BTreeMap::new();
    for (k, idx) in multi_indices(tf.dim(), tf.rank()).enumerate() {
        let v = tf.components()[k].abs();
        let e = by_weight.entry(boost_weight(&idx)).or_insert(0.0);
        *e = e.max(v);
    }
    let bo = by_weight
        .iter()
        .filter(|(_, &m)| m > thr)
        .map(|(&b, _)| b)
        .max();
    let margin = by_weight
        .iter()
        .filter(|(&b, &m)| m <= thr && bo.is_none_or(|bo| b > bo))
        .map(|(_, &m)| m)
        .fold(0.0, f64::max);
    let weights = by_weight
        .iter()
        .rev()
        .map(|(&b, &max_abs)| WeightEntry { b, max_abs })
        .collect();
    AlignmentReport {
        bo,
        weights,
        label: AlignmentLabel::from_bo(bo),
        tol_abs: tol.abs,
        tol_rel: tol.rel,
        sampled: false,
        norm,
        margin,
    }
}

pub fn boost_order(t: &TensorValue, f: &NullFrame, m: &MetricAtPoint, tol: Tolerances) -> Result<AlignmentReport> {
    Ok(boost_order_of_components(&frame_components(t, f, m)?, tol))
}

/// Splits `T` into boost-weight parts (all slots down, coordinate basis).
pub fn boost_decomposition(t: &TensorValue, f: &NullFrame, m: &MetricAtPoint) -> Result<BTreeMap<i32, TensorValue>> {
    let tf = frame_components(t, f, m)?;
    let mut parts: BTreeMap<i32, TensorValue> = BTreeMap::new();
    for (k, idx) in multi_indices(tf.dim(), tf.rank()).enumerate() {
        let b = boost_weight(&idx);
        let e = parts
            .entry(b)
            .or_insert_with(|| TensorValue::zeros(tf.dim(), tf.variance().to_vec()));
        e.components_mut()[k] = tf.components()[k];
    }
    Ok(parts
        .into_iter()
        .map(|(b, p)| (b, from_frame_components(&p, f, m)))
        .collect())
}

/// Keeps only the boost-weight parts with `bw ≤ s`.
pub fn truncate_boost_order(t: &TensorValue, f: &NullFrame, m: &MetricAtPoint, s: i32) -> Result<TensorValue> {
    let parts = boost_decomposition(t, f, m)?;
    let mut out = TensorValue::zeros(t.dim(), t.all_down(m)?.variance().to_vec());
    for (b, p) in parts {
        if b <= s {
            out = out.add(&p)?;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NpScalars {
    pub psi: [Complex; 5],
}

/// `Ψ₀ … Ψ₄` of an all-down Weyl-like tensor in a complex null frame.
pub fn np_scalars(w: &TensorValue, nf: &NpFrame, m: &MetricAtPoint) -> Result<NpScalars> {
    if w.dim() != 4 {
        return Err(Error::WrongDimension {
            required: 4,
            found: w.dim(),
        });
    }
    let wd = w.all_down(m)?;
    let res = weyl_like_residual(&wd, m);
    if res > 1e-9 {
        return Err(Error::NotWeylLike(res));
    }
    let (k, l, mm, mb) = (&nf.k, &nf.l, &nf.m, &nf.mbar);
    Ok(NpScalars {
        psi: [
            contract_complex(&wd, &[k, mm, k, mm]),
            contract_complex(&wd, &[k, l, k, mm]),
            contract_complex(&wd, &[k, mm, l, mb]),
            contract_complex(&wd, &[l, k, mb, l]),
            contract_complex(&wd, &[l, mb, l, mb]),
        ],
    })
}

/// A principal null direction with its multiplicity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pnd {
    pub direction: Vec<f64>,
    pub multiplicity: usize,
}

/// Principal null directions of a 4D Weyl-like tensor, from the roots of
/// `Ψ₀'(ζ)` under null rotations about `l` of the start frame.
pub fn weyl_pnd_4d(w: &TensorValue, m: &MetricAtPoint, start: &NullFrame) -> Result<Vec<Pnd>> {
    if w.dim() != 4 {
        return Err(Error::WrongDimension {
            required: 4,
            found: w.dim(),
        });
    }
    let wd = w.all_down(m)?;
    let scale = wd.max_abs();
    if scale == 0.0 {
        return Err(Error::ZeroTensor);
    }
    let nf = np_frame(start)?;
    let psi0 = |zeta: Complex| -> Complex {
        let kp = rotate_k(&nf, zeta);
        let mp = rotate_m(&nf, zeta);
        contract_complex(&wd, &[&kp, &mp, &kp, &mp])
    };
    // Sample on the unit circle and read off Fourier coefficients; Ψ₀' is a
    // polynomial of degree ≤ 4 in one of ζ, ζ̄.
    const S: usize = 16;
    let samples: Vec<Complex> = (0..S)
        .map(|j| psi0(Complex::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / S as f64)))
        .collect();
    let coeff = |freq: i32| -> Complex {
        let mut acc = Complex::ZERO;
        for (j, s) in samples.iter().enumerate() {
            let ang = -2.0 * std::f64::consts::PI * freq as f64 * j as f64 / S as f64;
            acc = acc + *s * Complex::from_polar(1.0, ang);
        }
        acc.scale(1.0 / S as f64)
    };
    let pos: Vec<Complex> = (0..=4).map(coeff).collect();
    let neg: Vec<Complex> = (0..=4).map(|j| coeff(-j)).collect();
    let pos_mass: f64 = pos[1..].iter().map(|c| c.abs()).sum();
    let neg_mass: f64 = neg[1..].iter().map(|c| c.abs()).sum();
    let conjugated = neg_mass > pos_mass;
    let coeffs: Vec<Complex> = if conjugated { neg } else { pos };
    let cmax = coeffs.iter().map(|c| c.abs()).fold(0.0, f64::max);
    if cmax <= 1e-14 * scale {
        return Err(Error::ZeroTensor);
    }
    let tiny = 1e-10 * cmax;
    let low = coeffs.iter().take_while(|c| c.abs() <= tiny).count();
    let high = coeffs.iter().rev().take_while(|c| c.abs() <= tiny).count();
    let mut out = Vec::new();
    if low > 0 {
        out.push(Pnd {
            direction: start.k().to_vec(),
            multiplicity: low,
        });
    }
    let inner: Vec<Complex> = coeffs[low..coeffs.len() - high].to_vec();
    let roots = polynomial_roots(&inner);
    for (z, mult) in cluster_roots(&roots, &inner) {
        let zeta = if conjugated { z.conj() } else { z };
        let kp = rotate_k(&nf, zeta);
        out.push(Pnd {
            direction: kp.re,
            multiplicity: mult,
        });
    }
    if high > 0 {
        out.push(Pnd {
            direction: start.l().to_vec(),
            multiplicity: high,
        });
    }
    Ok(out)
}

/// `k' = k + ζ̄ m + ζ m̄ − ζζ̄ l` (real).
fn rotate_k(nf: &NpFrame, zeta: Complex) -> crate::frames::CVector {
    let zz = zeta.abs().powi(2);
    let n = nf.k.re.len();
    let mut re = vec![0.0; n];
    let mut im = vec![0.0; n];
    for a in 0..n {
        let v = nf.k.component(a) + zeta.conj() * nf.m.component(a) + zeta * nf.mbar.component(a)
            - nf.l.component(a).scale(zz);
        re[a] = v.re;
        im[a] = v.im;
    }
    crate::frames::CVector { re, im }
}

/// `m' = m − ζ l`.
fn rotate_m(nf: &NpFrame, zeta: Complex) -> crate::frames::CVector {
    let n = nf.k.re.len();
    let mut re = vec![0.0; n];
    let mut im = vec![0.0; n];
    for a in 0..n {
        let v = nf.m.component(a) - zeta * nf.l.component(a);
        re[a] = v.re;
        im[a] = v.im;
    }
    crate::frames::CVector { re, im }
}

/// Roots of `Σ c_j z^j` from companion-matrix eigenvalues.
pub fn polynomial_roots(c: &[Complex]) -> Vec<Complex> {
    let deg = c.len().saturating_sub(1);
    if deg == 0 {
        return Vec::new();
    }
    let lead = c[deg];
    let to = |z: Complex| NumComplex::new(z.re, z.im);
    let mut comp = DMatrix::<NumComplex<f64>>::zeros(deg, deg);
    for i in 1..deg {
        comp[(i, i - 1)] = NumComplex::new(1.0, 0.0);
    }
    for i in 0..deg {
        comp[(i, deg - 1)] = -to(c[i]) / to(lead);
    }
    match bounded_schur(comp) {
        Some(t) => (0..deg).map(|i| Complex::new(t[(i, i)].re, t[(i, i)].im)).collect(),
        None => vec![Complex::new(f64::NAN, f64::NAN); deg],
    }
}

const SCHUR_MAX_ITER: usize = 2000;

/// Schur form with a bounded QR sweep. The shifted iteration can cycle on
/// matrices with repeated eigenvalues; those are retried after a fixed
/// orthogonal similarity, which leaves the spectrum unchanged.
fn bounded_schur<T: ComplexField<RealField = f64>>(m: DMatrix<T>) -> Option<DMatrix<T>> {
    let n = m.nrows();
    let mut a = m;
    for attempt in 0..6 {
        if let Some(s) = Schur::try_new(a.clone(), f64::EPSILON, SCHUR_MAX_ITER) {
            return Some(s.unpack().1);
        }
        let (c, sn) = (0.37 * (attempt + 1) as f64).sin_cos();
        let mut r = DMatrix::<T>::identity(n, n);
        for i in 0..n.saturating_sub(1) {
            let mut g = DMatrix::<T>::identity(n, n);
            g[(i, i)] = T::from_real(c);
            g[(i + 1, i + 1)] = T::from_real(c);
            g[(i, i + 1)] = T::from_real(-sn);
            g[(i + 1, i)] = T::from_real(sn);
            r = g * r;
        }
        a = &r * a * r.transpose();
    }
    None
}

/// Eigenvalues of a real square matrix.
fn real_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex>> {
    let n = m.nrows();
    let t = bounded_schur(m.clone()).ok_or_else(|| Error::Domain {
        expr: "S^a_b".into(),
        reason: "Schur iteration did not converge".into(),
    })?;
    // Real Schur form: 1x1 blocks and 2x2 blocks for conjugate pairs.
    let mut out = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        if i + 1 < n && t[(i + 1, i)].abs() > f64::EPSILON * (t[(i, i)].abs() + t[(i + 1, i + 1)].abs()) {
            let (a, b, c, d) = (t[(i, i)], t[(i, i + 1)], t[(i + 1, i)], t[(i + 1, i + 1)]);
            let tr = 0.5 * (a + d);
            let disc = 0.25 * (a - d) * (a - d) + b * c;
            if disc < 0.0 {
                out.push(Complex::new(tr, (-disc).sqrt()));
                out.push(Complex::new(tr, -(-disc).sqrt()));
            } else {
                out.push(Complex::real(tr + disc.sqrt()));
                out.push(Complex::real(tr - disc.sqrt()));
            }
            i += 2;
        } else {
            out.push(Complex::real(t[(i, i)]));
            i += 1;
        }
    }
    Ok(out)
}

fn eval_poly(c: &[Complex], z: Complex) -> Complex {
    c.iter().rev().fold(Complex::ZERO, |acc, &ci| acc * z + ci)
}

fn derivative(c: &[Complex]) -> Vec<Complex> {
    c.iter().enumerate().skip(1).map(|(j, &cj)| cj.scale(j as f64)).collect()
}

/// Groups numerically repeated roots. A perturbed root of multiplicity `m`
/// spreads by about `ε^{1/m}`, so candidates are merged within a radius that
/// allows a quadruple root, and each merged cluster is confirmed by checking
/// that the first `m−1` derivatives vanish at its mean.
pub fn cluster_roots(roots: &[Complex], c: &[Complex]) -> Vec<(Complex, usize)> {
    let radius = |z: Complex| 1e-3 * (1.0 + z.abs());
    let cscale = c.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let mut used = vec![false; roots.len()];
    let mut out: Vec<(Complex, usize)> = Vec::new();
    for i in 0..roots.len() {
        if used[i] {
            continue;
        }
        let mut members = vec![i];
        used[i] = true;
        for j in i + 1..roots.len() {
            if !used[j] && (roots[j] - roots[i]).abs() <= radius(roots[i]) {
                members.push(j);
                used[j] = true;
            }
        }
        let mean = members
            .iter()
            .fold(Complex::ZERO, |s, &k| s + roots[k])
            .scale(1.0 / members.len() as f64);
        // Confirm: derivatives up to order mult−1 vanish at the mean.
        let mut mult = members.len();
        while mult > 1 {
            let mut d = c.to_vec();
            let mut ok = true;
            for _ in 0..mult - 1 {
                let v = eval_poly(&d, mean).abs();
                if v > 1e-6 * cscale * (1.0 + mean.abs()).powi(c.len() as i32) {
                    ok = false;
                    break;
                }
                d = derivative(&d);
            }
            if ok {
                break;
            }
            mult -= 1;
        }
        if mult == members.len() {
            out.push((mean, mult));
        } else {
            for &k in &members {
                out.push((roots[k], 1));
            }
        }
    }
    out
}

/// Eigenstructure of the trace-free Ricci tensor relative to a frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SEigenstructure {
    /// Eigenvalues of `S^a_b` as `(re, im)`, sorted.
    pub eigenvalues: Vec<Complex>,
    /// `S_{ab}k^b = λ k_a` holds within tolerance.
    pub k_is_eigendirection: bool,
    /// `λ = S₀₁` when `k` is an eigendirection.
    pub lambda: Option<f64>,
    /// Algebraic multiplicity of `λ` among the eigenvalues of `S^a_b`.
    pub dim_e_lambda: usize,
    /// `λ` is an eigenvalue of the spatial block `[S_ij]`.
    pub lambda_in_spatial_block: bool,
    pub generic_type_ii: bool,
    /// `S = λ(u u − h/3)` with unit spacelike `u` (dimension 4 only).
    pub tachyonic: Option<TachyonicForm>,
    pub zero: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TachyonicForm {
    pub lambda: f64,
    /// Covariant components `u_a`.
    pub u: Vec<f64>,
    pub residual: f64,
}

pub fn s_eigenstructure(s: &TensorValue, m: &MetricAtPoint, f: &NullFrame, tol: Tolerances) -> Result<SEigenstructure> {
    let n = s.dim();
    let sd = s.all_down(m)?;
    let scale = sd.max_abs();
    let thr = tol.threshold(scale);
    let smat = sd.to_matrix();
    let mixed: DMatrix<f64> = m.ginv.to_matrix() * &smat;
    let mut eigenvalues = real_eigenvalues(&mixed)?;
    eigenvalues.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    if scale <= tol.abs {
        return Ok(SEigenstructure {
            eigenvalues,
            k_is_eigendirection: true,
            lambda: Some(0.0),
            dim_e_lambda: n,
            lambda_in_spatial_block: true,
            generic_type_ii: false,
            tachyonic: None,
            zero: true,
        });
    }
    let sf = frame_components(&sd, f, m)?;
    let lambda = sf.get(&[0, 1]);
    // S k = λ k ⇔ S₀₀ = S₀ⱼ = 0 in the frame.
    let mut off = sf.get(&[0, 0]).abs();
    for j in 2..n {
        off = off.max(sf.get(&[0, j]).abs());
    }
    let aligned = off <= thr;
    let spatial = DMatrix::from_fn(n - 2, n - 2, |i, j| sf.get(&[i + 2, j + 2]));
    let spatial_eigs = SymmetricEigen::new(spatial).eigenvalues;
    let eig_tol = 1e-6 * scale.max(1e-300);
    let lambda_in_spatial = spatial_eigs.iter().any(|&mu| (mu - lambda).abs() <= eig_tol);
    let dim_e_lambda = if aligned {
        eigenvalues
            .iter()
            .filter(|z| z.im.abs() <= eig_tol && (z.re - lambda).abs() <= eig_tol)
            .count()
    } else {
        0
    };
    let tachyonic = if n == 4 { tachyonic_form(&sd, m) } else { None };
    Ok(SEigenstructure {
        eigenvalues,
        k_is_eigendirection: aligned,
        lambda: aligned.then_some(lambda),
        dim_e_lambda,
        lambda_in_spatial_block: lambda_in_spatial,
        generic_type_ii: aligned && !lambda_in_spatial,
        tachyonic: tachyonic.filter(|t| t.residual <= 1e-9),
        zero: false,
    })
}

/// Best fit of `S = λ(u u − h/3)` in four dimensions; `u` is returned with
/// its largest component positive.
pub fn tachyonic_form(sd: &TensorValue, m: &MetricAtPoint) -> Option<TachyonicForm> {
    let n = sd.dim();
    let smat = sd.to_matrix();
    let ginv = m.ginv.to_matrix();
    let g = m.matrix();
    let ss = (&ginv * &smat * &ginv * &smat).trace();
    if ss <= 0.0 {
        return None;
    }
    let mag = (0.75 * ss).sqrt();
    let mut best: Option<TachyonicForm> = None;
    for sign in [1.0, -1.0] {
        let lambda = sign * mag;
        let uu: DMatrix<f64> = (&smat * (3.0 / lambda) + &g) * 0.25;
        let eig = SymmetricEigen::new(uu.clone());
        let (i, &top) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty");
        if top <= 0.0 {
            continue;
        }
        let mut u: Vec<f64> = (0..n).map(|a| eig.eigenvectors[(a, i)] * top.sqrt()).collect();
        let big = (0..n).max_by(|&a, &b| u[a].abs().total_cmp(&u[b].abs())).unwrap();
        if u[big] < 0.0 {
            u.iter_mut().for_each(|x| *x = -*x);
        }
        let uvec = nalgebra::DVector::from_vec(u.clone());
        let rebuilt = &uvec * uvec.transpose();
        let residual = (&rebuilt - &uu).abs().max() / (1.0 + uu.abs().max());
        let cand = TachyonicForm { lambda, u, residual };
        if best.as_ref().is_none_or(|b| cand.residual < b.residual) {
            best = Some(cand);
        }
    }
    best
}

/// Upper bound on `min over null directions` of the boost order by random
/// sampling of null rotations about `l` (labelled as sampled).
pub fn sampled_min_boost_order<R: Rng>(
    t: &TensorValue,
    m: &MetricAtPoint,
    start: &NullFrame,
    samples: usize,
    rng: &mut R,
    tol: Tolerances,
) -> Result<AlignmentReport> {
    let mut best = boost_order(t, start, m, tol)?;
    let n = m.dim();
    for _ in 0..samples {
        let z: Vec<f64> = (0..n - 2).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let k = rotated_direction(start, &z);
        let f = complete_null_frame(&k, m, None)?;
        let r = boost_order(t, &f, m, tol)?;
        if r.bo < best.bo || (best.bo.is_some() && r.bo.is_none()) {
            best = r;
        }
    }
    best.sampled = true;
    Ok(best)
}


/// `k + z^i m_i − ½|z|² l`: a null direction obtained by rotating about `l`.
pub fn rotated_direction(f: &NullFrame, z: &[f64]) -> Vec<f64> {
    let n = f.dim();
    let zz: f64 = z.iter().map(|x| x * x).sum();
    (0..n)
        .map(|a| {
            let mut v = f.k()[a] - 0.5 * zz * f.l()[a];
            for (i, zi) in z.iter().enumerate() {
                v += zi * f.m(i + 2)[a];
            }
            v
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Variance;

    #[test]
    fn weights() {
        assert_eq!(boost_weight(&[0, 1]), 0);
        assert_eq!(boost_weight(&[0, 0]), 2);
        assert_eq!(boost_weight(&[1, 2, 3]), -1);
    }

    #[test]
    fn k_is_type_iii_and_g_is_type_ii() {
        let m = MetricAtPoint::minkowski(4);
        let f = complete_null_frame(&[1.0, 1.0, 0.0, 0.0], &m, None).unwrap();
        let k = TensorValue::vector(f.k().to_vec());
        let r = boost_order(&k, &f, &m, Tolerances::default()).unwrap();
        assert_eq!(r.bo, Some(-1));
        assert_eq!(r.label, AlignmentLabel::III);
        let r = boost_order(&m.g, &f, &m, Tolerances::default()).unwrap();
        assert_eq!(r.bo, Some(0));
        let z = TensorValue::zeros(4, vec![Variance::Down; 2]);
        assert_eq!(boost_order(&z, &f, &m, Tolerances::default()).unwrap().label, AlignmentLabel::Zero);
    }

    #[test]
    fn kk_is_single_weight_minus_two() {
        let m = MetricAtPoint::minkowski(4);
        let f = complete_null_frame(&[1.0, 0.0, 1.0, 0.0], &m, None).unwrap();
        let k = TensorValue::vector(f.k().to_vec());
        let kk = k.tensor_product(&k).unwrap();
        let parts = boost_decomposition(&kk, &f, &m).unwrap();
        let nonzero: Vec<i32> = parts.iter().filter(|(_, p)| p.max_abs() > 1e-14).map(|(b, _)| *b).collect();
        assert_eq!(nonzero, vec![-2]);
    }

    #[test]
    fn companion_roots() {
        // (z − 1)(z + 2i)
        let c = [Complex::new(0.0, -2.0), Complex::new(-1.0, 2.0), Complex::real(1.0)];
        let mut r = polynomial_roots(&c);
        r.sort_by(|a, b| a.re.total_cmp(&b.re));
        assert!((r[0] - Complex::new(0.0, -2.0)).abs() < 1e-12);
        assert!((r[1] - Complex::real(1.0)).abs() < 1e-12);
    }

    #[test]
    fn quadruple_root_clusters() {
        // (z − 0.5)^4
        let c: Vec<Complex> = [0.0625, -0.5, 1.5, -2.0, 1.0].iter().map(|&x| Complex::real(x)).collect();
        let roots = polynomial_roots(&c);
        let cl = cluster_roots(&roots, &c);
        assert_eq!(cl.len(), 1);
        assert_eq!(cl[0].1, 4);
        assert!((cl[0].0 - Complex::real(0.5)).abs() < 1e-8);
    }

    #[test]
    fn tachyonic_detection() {
        let m = MetricAtPoint::minkowski(4);
        let lam = -1.3;
        let mut s = TensorValue::zeros(4, vec![Variance::Down; 2]);
        for a in 0..4 {
            for b in 0..4 {
                let uu = if a == 2 && b == 2 { 1.0 } else { 0.0 };
                s.set(&[a, b], lam * (uu - (m.g.get(&[a, b]) - uu) / 3.0));
            }
        }
        let t = tachyonic_form(&s, &m).unwrap();
        assert!(t.residual < 1e-12);
        assert!((t.lambda - lam).abs() < 1e-12);
        assert!((t.u[2] - 1.0).abs() < 1e-12);
    }

    fn schwarzschild_weyl() -> (TensorValue, MetricAtPoint, NullFrame) {
        use crate::geometry::Geometry;
        use crate::metric_ir::{parse_metric, Point};
        let spec = parse_metric(
            "dim = 4\ncoords = t r th ph\ng[0][0] = -(1 - 2/r)\ng[1][1] = 1/(1 - 2/r)\ng[2][2] = r^2\ng[3][3] = r^2*sin(th)^2\n",
        )
        .unwrap();
        let geo = Geometry::new(&spec, &Point::new(vec![0.0, 3.0, 1.2, 0.0])).unwrap();
        let f = complete_null_frame(&[3.0, 1.0, 0.0, 0.0], &geo.at, None).unwrap();
        (geo.weyl.value(), geo.at.clone(), f)
    }

    #[test]
    fn schwarzschild_np_scalars() {
        let (w, m, f) = schwarzschild_weyl();
        let np = np_scalars(&w, &np_frame(&f).unwrap(), &m).unwrap();
        for (i, psi) in np.psi.iter().enumerate() {
            let want = if i == 2 { Complex::real(-1.0 / 27.0) } else { Complex::ZERO };
            assert!((*psi - want).abs() < 1e-9, "psi{i} = {psi}");
        }
    }

    #[test]
    fn schwarzschild_is_type_d() {
        let (w, m, f) = schwarzschild_weyl();
        // Start from a generic frame so neither PND is k or l.
        let g = f.null_rotation(&[0.3, -0.2]).unwrap();
        let g = complete_null_frame(&rotated_direction(&g, &[0.0, 0.0]), &m, Some(&[1.0, 0.2, 0.1, 0.3])).unwrap();
        let pnds = weyl_pnd_4d(&w, &m, &g).unwrap();
        assert_eq!(pnds.len(), 2, "{pnds:?}");
        assert!(pnds.iter().all(|p| p.multiplicity == 2));
        for p in &pnds {
            let fp = complete_null_frame(&p.direction, &m, None).unwrap();
            assert_eq!(boost_order(&w, &fp, &m, Tolerances::scaled(&Tolerances::default(), 100.0)).unwrap().bo, Some(0));
        }
    }

    #[test]
    fn random_weyl_has_four_simple_pnds() {
        use crate::geometry::weyl_projection;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let m = MetricAtPoint::minkowski(4);
        let raw: Vec<f64> = (0..256).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let w = weyl_projection(&TensorValue::covariant(4, 4, raw).unwrap(), &m).unwrap();
        assert!(weyl_like_residual(&w, &m) < 1e-12);
        let f = complete_null_frame(&[1.0, 0.0, 0.0, 1.0], &m, None).unwrap();
        let pnds = weyl_pnd_4d(&w, &m, &f).unwrap();
        assert_eq!(pnds.len(), 4);
        for p in &pnds {
            assert_eq!(p.multiplicity, 1);
            let fp = complete_null_frame(&p.direction, &m, None).unwrap();
            let psi = np_scalars(&w, &np_frame(&fp).unwrap(), &m).unwrap().psi;
            assert!(psi[0].abs() < 1e-8 * w.max_abs(), "{}", psi[0]);
            assert!(psi[1].abs() > 1e-6 * w.max_abs());
        }
    }
}
