//! Dense component arrays at a point.
//!
//! Components are stored row-major over the multi-index, first slot slowest,
//! so JSON dumps are reproducible.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variance {
    Up,
    Down,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorValue {
    dim: usize,
    rank: usize,
    variance: Vec<Variance>,
    components: Vec<f64>,
}

/// Iterates all multi-indices of `rank` slots over `0..dim` in storage order.
pub fn multi_indices(dim: usize, rank: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = dim.pow(rank as u32);
    (0..total).map(move |mut flat| {
        let mut idx = vec![0; rank];
        for slot in (0..rank).rev() {
            idx[slot] = flat % dim;
            flat /= dim;
        }
        idx
    })
}

impl TensorValue {
    pub fn from_parts(dim: usize, variance: Vec<Variance>, components: Vec<f64>) -> Result<Self> {
        let expected = dim.pow(variance.len() as u32);
        if components.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: components.len(),
            });
        }
        Ok(TensorValue {
            dim,
            rank: variance.len(),
            variance,
            components,
        })
    }

    pub fn zeros(dim: usize, variance: Vec<Variance>) -> Self {
        let n = dim.pow(variance.len() as u32);
        TensorValue {
            dim,
            rank: variance.len(),
            variance,
            components: vec![0.0; n],
        }
    }

    pub fn scalar(v: f64) -> Self {
        TensorValue {
            dim: 0,
            rank: 0,
            variance: vec![],
            components: vec![v],
        }
    }

    /// Covariant tensor with all slots down.
    pub fn covariant(dim: usize, rank: usize, components: Vec<f64>) -> Result<Self> {
        Self::from_parts(dim, vec![Variance::Down; rank], components)
    }

    pub fn vector(components: Vec<f64>) -> Self {
        let dim = components.len();
        TensorValue {
            dim,
            rank: 1,
            variance: vec![Variance::Up],
            components,
        }
    }

    pub fn covector(components: Vec<f64>) -> Self {
        let dim = components.len();
        TensorValue {
            dim,
            rank: 1,
            variance: vec![Variance::Down],
            components,
        }
    }

    pub fn from_matrix(m: &DMatrix<f64>, variance: [Variance; 2]) -> Self {
        let n = m.nrows();
        let mut c = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                c.push(m[(i, j)]);
            }
        }
        TensorValue {
            dim: n,
            rank: 2,
            variance: variance.to_vec(),
            components: c,
        }
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        assert_eq!(self.rank, 2);
        DMatrix::from_row_slice(self.dim, self.dim, &self.components)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn variance(&self) -> &[Variance] {
        &self.variance
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    pub fn components_mut(&mut self) -> &mut [f64] {
        &mut self.components
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.components[self.flat_index(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: f64) {
        let k = self.flat_index(idx);
        self.components[k] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut r = self.clone();
        r.components.iter_mut().for_each(|x| *x *= s);
        r
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let mut r = self.clone();
        for (a, b) in r.components.iter_mut().zip(&other.components) {
            *a += b;
        }
        Ok(r)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    /// Largest componentwise difference; panics on shape mismatch.
    pub fn max_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.components.len(), other.components.len());
        self.components
            .iter()
            .zip(&other.components)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        if self.rank != other.rank {
            return Err(Error::RankMismatch {
                expected: self.rank,
                found: other.rank,
            });
        }
        Ok(())
    }

    pub fn tensor_product(&self, other: &Self) -> Result<Self> {
        if self.rank > 0 && other.rank > 0 && self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let dim = if self.rank > 0 { self.dim } else { other.dim };
        let mut variance = self.variance.clone();
        variance.extend_from_slice(&other.variance);
        let mut components = Vec::with_capacity(self.components.len() * other.components.len());
        for a in &self.components {
            for b in &other.components {
                components.push(a * b);
            }
        }
        Ok(TensorValue {
            dim,
            rank: variance.len(),
            variance,
            components,
        })
    }

    /// Trace over two slots of opposite variance.
    pub fn contract(&self, s1: usize, s2: usize) -> Result<Self> {
        for s in [s1, s2] {
            if s >= self.rank {
                return Err(Error::SlotOutOfRange { slot: s, rank: self.rank });
            }
        }
        if s1 == s2 || self.variance[s1] == self.variance[s2] {
            return Err(Error::VarianceClash(s1, s2));
        }
        Ok(self.trace_unchecked(s1, s2))
    }

    /// Trace over two slots without a variance check (frame or
    /// orthonormal-basis contractions).
    pub fn trace_unchecked(&self, s1: usize, s2: usize) -> Self {
        let (a, b) = if s1 < s2 { (s1, s2) } else { (s2, s1) };
        let variance: Vec<Variance> = self
            .variance
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != a && *i != b)
            .map(|(_, v)| *v)
            .collect();
        let mut out = TensorValue::zeros(self.dim, variance);
        let mut full = vec![0; self.rank];
        for (k, idx) in multi_indices(self.dim, out.rank).enumerate() {
            let mut s = 0.0;
            for t in 0..self.dim {
                let mut it = idx.iter();
                for (slot, f) in full.iter_mut().enumerate() {
                    *f = if slot == a || slot == b { t } else { *it.next().unwrap() };
                }
                s += self.get(&full);
            }
            out.components[k] = s;
        }
        out
    }

    /// Contracts slot `s1` of `self` with slot `s2` of `other`; remaining
    /// slots are `self`'s followed by `other`'s.
    pub fn contract_with(&self, s1: usize, other: &Self, s2: usize) -> Result<Self> {
        let p = self.tensor_product(other)?;
        p.contract(s1, self.rank + s2)
    }

    /// `out[σ(0)..σ(r-1)]`: slot `i` of the result is slot `perm[i]` of the input.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.rank];
        if perm.len() != self.rank {
            return Err(Error::InvalidPermutation(perm.to_vec()));
        }
        for &p in perm {
            if p >= self.rank || seen[p] {
                return Err(Error::InvalidPermutation(perm.to_vec()));
            }
            seen[p] = true;
        }
        let variance = perm.iter().map(|&p| self.variance[p]).collect();
        let mut out = TensorValue::zeros(self.dim, variance);
        let mut src = vec![0; self.rank];
        for (k, idx) in multi_indices(self.dim, self.rank).enumerate() {
            for (i, &p) in perm.iter().enumerate() {
                src[p] = idx[i];
            }
            out.components[k] = self.get(&src);
        }
        Ok(out)
    }

    fn check_slots(&self, slots: &[usize]) -> Result<()> {
        for (i, &s) in slots.iter().enumerate() {
            if s >= self.rank {
                return Err(Error::SlotOutOfRange { slot: s, rank: self.rank });
            }
            if slots[..i].contains(&s) {
                return Err(Error::InvalidPermutation(slots.to_vec()));
            }
        }
        Ok(())
    }

    fn sym_impl(&self, slots: &[usize], alternating: bool) -> Result<Self> {
        self.check_slots(slots)?;
        let perms = permutations(slots.len());
        let norm = 1.0 / perms.len() as f64;
        let mut out = TensorValue::zeros(self.dim, self.variance.clone());
        let mut src = vec![0; self.rank];
        for (k, idx) in multi_indices(self.dim, self.rank).enumerate() {
            let mut acc = 0.0;
            for (perm, sign) in &perms {
                src.copy_from_slice(&idx);
                for (i, &p) in perm.iter().enumerate() {
                    src[slots[i]] = idx[slots[p]];
                }
                let v = self.get(&src);
                acc += if alternating { *sign * v } else { v };
            }
            out.components[k] = acc * norm;
        }
        Ok(out)
    }

    /// Symmetrization over `slots` with the `1/p!` normalization.
    pub fn symmetrize(&self, slots: &[usize]) -> Result<Self> {
        self.sym_impl(slots, false)
    }

    /// Antisymmetrization over `slots` with the `1/p!` normalization.
    pub fn antisymmetrize(&self, slots: &[usize]) -> Result<Self> {
        self.sym_impl(slots, true)
    }

    /// Raises or lowers `slot` with the metric (toggles its variance).
    pub fn raise_lower(&self, slot: usize, m: &MetricAtPoint) -> Result<Self> {
        if slot >= self.rank {
            return Err(Error::SlotOutOfRange { slot, rank: self.rank });
        }
        if m.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: m.dim(),
            });
        }
        let (mat, new_var) = match self.variance[slot] {
            Variance::Up => (&m.g, Variance::Down),
            Variance::Down => (&m.ginv, Variance::Up),
        };
        let mut variance = self.variance.clone();
        variance[slot] = new_var;
        let mut out = TensorValue::zeros(self.dim, variance);
        let mut src = vec![0; self.rank];
        for (k, idx) in multi_indices(self.dim, self.rank).enumerate() {
            src.copy_from_slice(&idx);
            let mut acc = 0.0;
            for e in 0..self.dim {
                src[slot] = e;
                acc += mat.get(&[idx[slot], e]) * self.get(&src);
            }
            out.components[k] = acc;
        }
        Ok(out)
    }

    /// Lowers every up slot.
    pub fn all_down(&self, m: &MetricAtPoint) -> Result<Self> {
        let mut t = self.clone();
        for s in 0..self.rank {
            if t.variance[s] == Variance::Up {
                t = t.raise_lower(s, m)?;
            }
        }
        Ok(t)
    }

    /// Raises every down slot.
    pub fn all_up(&self, m: &MetricAtPoint) -> Result<Self> {
        let mut t = self.clone();
        for s in 0..self.rank {
            if t.variance[s] == Variance::Down {
                t = t.raise_lower(s, m)?;
            }
        }
        Ok(t)
    }

    /// Contracts `vectors[i]` into slot `i` of an all-down tensor,
    /// i.e. `T(v₁,…,v_r)`.
    pub fn evaluate_on(&self, vectors: &[&[f64]]) -> f64 {
        assert_eq!(vectors.len(), self.rank);
        let mut acc = self.components.clone();
        let mut len = acc.len();
        for v in vectors.iter().rev() {
            len /= self.dim;
            let mut next = vec![0.0; len];
            for (i, n) in next.iter_mut().enumerate() {
                let base = i * self.dim;
                *n = (0..self.dim).map(|e| acc[base + e] * v[e]).sum();
            }
            acc = next;
        }
        acc[0]
    }

    /// Contracts slot `slot` with each of `basis` (a change of basis on one slot).
    pub fn transform_slot(&self, slot: usize, basis: &[Vec<f64>]) -> Self {
        let mut out = TensorValue::zeros(self.dim, self.variance.clone());
        let mut src = vec![0; self.rank];
        for (k, idx) in multi_indices(self.dim, self.rank).enumerate() {
            src.copy_from_slice(&idx);
            let b = &basis[idx[slot]];
            let mut acc = 0.0;
            for (e, be) in b.iter().enumerate() {
                if *be != 0.0 {
                    src[slot] = e;
                    acc += be * self.get(&src);
                }
            }
            out.components[k] = acc;
        }
        out
    }
}

/// All permutations of `0..p` with their signs, in lexicographic order.
pub fn permutations(p: usize) -> Vec<(Vec<usize>, f64)> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..p).collect();
    heap_lex(&mut cur, 0, &mut out);
    out.sort();
    out.into_iter()
        .map(|perm| {
            let sign = permutation_sign(&perm);
            (perm, sign)
        })
        .collect()
}

fn heap_lex(cur: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == cur.len() {
        out.push(cur.clone());
        return;
    }
    for i in k..cur.len() {
        cur.swap(k, i);
        heap_lex(cur, k + 1, out);
        cur.swap(k, i);
    }
}

pub fn permutation_sign(perm: &[usize]) -> f64 {
    let mut inv = 0;
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            if perm[i] > perm[j] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Metric and inverse metric at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricAtPoint {
    pub g: TensorValue,
    pub ginv: TensorValue,
}

impl MetricAtPoint {
    /// Builds from the covariant metric matrix, checking non-degeneracy and
    /// Lorentzian signature.
    pub fn new(g: DMatrix<f64>) -> Result<Self> {
        let n = g.nrows();
        let det = g.determinant();
        let scale = g.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-300);
        if det.abs() <= 1e-13 * scale.powi(n as i32) {
            return Err(Error::SingularMetric { det });
        }
        let sym = (&g + g.transpose()) * 0.5;
        let eig = nalgebra::SymmetricEigen::new(sym);
        let negative = eig.eigenvalues.iter().filter(|&&x| x < 0.0).count();
        if negative != 1 {
            return Err(Error::NotLorentzian { negative });
        }
        let ginv = g.clone().try_inverse().ok_or(Error::SingularMetric { det })?;
        Ok(MetricAtPoint {
            g: TensorValue::from_matrix(&g, [Variance::Down; 2]),
            ginv: TensorValue::from_matrix(&ginv, [Variance::Up; 2]),
        })
    }

    pub fn minkowski(dim: usize) -> Self {
        let mut g = DMatrix::identity(dim, dim);
        g[(0, 0)] = -1.0;
        MetricAtPoint::new(g).expect("Minkowski is Lorentzian")
    }

    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    pub fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        let n = self.dim();
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += self.g.components[i * n + j] * a[i] * b[j];
            }
        }
        s
    }

    pub fn lower(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|j| self.g.components[i * n + j] * v[j]).sum())
            .collect()
    }

    pub fn raise(&self, w: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|j| self.ginv.components[i * n + j] * w[j]).sum())
            .collect()
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        self.g.to_matrix()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn delta(n: usize, variance: [Variance; 2]) -> TensorValue {
        TensorValue::from_matrix(&DMatrix::identity(n, n), variance)
    }

    #[test]
    fn delta_product_layout() {
        let d = delta(3, [Variance::Down; 2]);
        let p = d.tensor_product(&d).unwrap();
        for idx in multi_indices(3, 4) {
            let want = f64::from(u8::from(idx[0] == idx[1]) * u8::from(idx[2] == idx[3]));
            assert_eq!(p.get(&idx), want);
        }
    }

    #[test]
    fn scalar_product_is_identity() {
        let d = delta(3, [Variance::Down; 2]);
        assert_eq!(TensorValue::scalar(1.0).tensor_product(&d).unwrap(), d);
    }

    #[test]
    fn trace_of_mixed_delta() {
        let d = delta(5, [Variance::Up, Variance::Down]);
        let t = d.contract(0, 1).unwrap();
        assert_eq!(t.components(), &[5.0]);
        assert!(matches!(
            delta(5, [Variance::Down; 2]).contract(0, 1),
            Err(Error::VarianceClash(0, 1))
        ));
        assert!(matches!(d.contract(0, 2), Err(Error::SlotOutOfRange { .. })));
    }

    #[test]
    fn antisymmetrized_symmetric_vanishes() {
        let s = TensorValue::covariant(2, 2, vec![1.0, 2.0, 2.0, 3.0]).unwrap();
        assert_eq!(s.antisymmetrize(&[0, 1]).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn permutation_validation() {
        let s = TensorValue::covariant(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!(s.permute(&[0, 0]).is_err());
        let t = s.permute(&[1, 0]).unwrap();
        assert_eq!(t.components(), &[1.0, 3.0, 2.0, 4.0]);
    }

    #[test]
    fn lowering_in_null_chart() {
        let mut g = DMatrix::zeros(4, 4);
        g[(0, 1)] = 1.0;
        g[(1, 0)] = 1.0;
        g[(2, 2)] = 1.0;
        g[(3, 3)] = 1.0;
        let m = MetricAtPoint::new(g.clone()).unwrap();
        let k = TensorValue::vector(vec![1.0, 1.0, 0.0, 0.0]);
        let low = k.raise_lower(0, &m).unwrap();
        let oracle = &g * nalgebra::DVector::from_vec(vec![1.0, 1.0, 0.0, 0.0]);
        assert_eq!(low.components(), oracle.as_slice());
    }

    #[test]
    fn rejects_riemannian_and_singular() {
        assert!(matches!(
            MetricAtPoint::new(DMatrix::identity(3, 3)),
            Err(Error::NotLorentzian { negative: 0 })
        ));
        assert!(matches!(
            MetricAtPoint::new(DMatrix::zeros(3, 3)),
            Err(Error::SingularMetric { .. })
        ));
    }
}
