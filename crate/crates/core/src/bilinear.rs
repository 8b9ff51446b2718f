//! The antisymmetric pairing `φ(X, Y)`, the quotient-valued bracket
//! `⟨T|k|Q⟩`, the subspace `K_N` it spans, and the factorization check for
//! covariant derivatives.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::alignment::{boost_order_of_components, boost_weight, Tolerances};
use crate::error::{Error, Result};
use crate::frames::{frame_components, jet_frame_components, JetFrame, NullFrame};
use crate::geometry::Geometry;
use crate::jet::JetTensor;
use crate::tensor::{multi_indices, MetricAtPoint, TensorValue, Variance};

/// `φ(X,Y)_{ab} = Σ_i X_{…b…} Y^{…}{}_a{}^{…} − X_{…a…} Y^{…}{}_b{}^{…}`,
/// with slot `i` carrying the free index.
pub fn phi(x: &TensorValue, y: &TensorValue, m: &MetricAtPoint) -> Result<TensorValue> {
    if x.rank() != y.rank() {
        return Err(Error::RankMismatch {
            expected: x.rank(),
            found: y.rank(),
        });
    }
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            found: y.dim(),
        });
    }
    let n = x.dim();
    let r = x.rank();
    let xd = x.all_down(m)?;
    let yu = y.all_up(m)?;
    let mut a_mat = vec![0.0; n * n]; // [b][a]
    for i in 0..r {
        let yi = yu.raise_lower(i, m)?;
        let stride = n.pow((r - 1 - i) as u32);
        for (flat, &xv) in xd.components().iter().enumerate() {
            if xv == 0.0 {
                continue;
            }
            let b = (flat / stride) % n;
            let base = flat - b * stride;
            for a in 0..n {
                a_mat[b * n + a] += xv * yi.components()[base + a * stride];
            }
        }
    }
    let mut out = TensorValue::zeros(n, vec![Variance::Down; 2]);
    for a in 0..n {
        for b in 0..n {
            out.set(&[a, b], a_mat[b * n + a] - a_mat[a * n + b]);
        }
    }
    Ok(out)
}

/// Components `w_j` of an element of `c^⊥/c` in the basis `π(m_j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuotientVector {
    pub components: Vec<f64>,
    pub frame: String,
}

impl QuotientVector {
    pub fn zero(f: &NullFrame) -> Self {
        QuotientVector {
            components: vec![0.0; f.dim() - 2],
            frame: f.fingerprint(),
        }
    }

    pub fn norm(&self) -> f64 {
        self.components.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_diff(&self, other: &QuotientVector) -> f64 {
        self.components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// The contravariant monomial `e_{α₁} ⊗ ⋯ ⊗ e_{α_r}`.
pub fn monomial_tensor(f: &NullFrame, alpha: &[usize]) -> TensorValue {
    let n = f.dim();
    let mut out = TensorValue::zeros(n, vec![Variance::Up; alpha.len()]);
    for (flat, idx) in multi_indices(n, alpha.len()).enumerate() {
        let mut v = 1.0;
        for (slot, &c) in idx.iter().enumerate() {
            v *= f.vectors[alpha[slot]][c];
            if v == 0.0 {
                break;
            }
        }
        out.components_mut()[flat] = v;
    }
    out
}

/// `⟨T|k|Q⟩ = π(φ(T,Q)^{ab} l_b)` from the definition. `T = 0` gives zero.
pub fn bracket(t: &TensorValue, f: &NullFrame, q: &TensorValue, m: &MetricAtPoint, tol: Tolerances) -> Result<QuotientVector> {
    let bo_t = boost_order_of_components(&frame_components(t, f, m)?, tol).bo;
    let Some(s) = bo_t else {
        return Ok(QuotientVector::zero(f));
    };
    if let Some(bo_q) = boost_order_of_components(&frame_components(q, f, m)?, tol).bo {
        if bo_q > -s - 1 {
            return Err(Error::BracketDomain { bo_q, limit: -s - 1 });
        }
    }
    bracket_unchecked(t, f, q, m)
}

/// The bracket formula without the domain check.
pub fn bracket_unchecked(t: &TensorValue, f: &NullFrame, q: &TensorValue, m: &MetricAtPoint) -> Result<QuotientVector> {
    let p = phi(t, q, m)?;
    let n = f.dim();
    // w_j = g(m_j, φ^{ab} l_b) = φ_{cd} m_j^c l^d
    let components = (2..n).map(|j| p.evaluate_on(&[f.m(j), f.l()])).collect();
    Ok(QuotientVector {
        components,
        frame: f.fingerprint(),
    })
}

/// Closed form on a monomial, from the frame components of `T`:
/// `w_j = Σ_i (δ^j_{α_i} T_{α_i→1} − δ^0_{α_i} T_{α_i→j})`.
pub fn bracket_closed_form(tf: &TensorValue, alpha: &[usize]) -> Vec<f64> {
    let n = tf.dim();
    let mut w = vec![0.0; n - 2];
    let mut idx = alpha.to_vec();
    for (i, &a) in alpha.iter().enumerate() {
        if a >= 2 {
            idx[i] = 1;
            w[a - 2] += tf.get(&idx);
        } else if a == 0 {
            for j in 2..n {
                idx[i] = j;
                w[j - 2] -= tf.get(&idx);
            }
        }
        idx[i] = a;
    }
    w
}

/// `⟨T|k|e_{α₁}⋯e_{α_r}⟩` by the closed form. Requires `bw(α) ≥ bo(T)+1`.
pub fn bracket_monomial(t: &TensorValue, f: &NullFrame, alpha: &[usize], m: &MetricAtPoint, tol: Tolerances) -> Result<QuotientVector> {
    let tf = frame_components(t, f, m)?;
    if alpha.len() != tf.rank() {
        return Err(Error::RankMismatch {
            expected: tf.rank(),
            found: alpha.len(),
        });
    }
    let Some(s) = boost_order_of_components(&tf, tol).bo else {
        return Ok(QuotientVector::zero(f));
    };
    let bw = boost_weight(alpha);
    if bw < s + 1 {
        return Err(Error::BracketDomain { bo_q: -bw, limit: -s - 1 });
    }
    let components = if bw > s + 1 {
        vec![0.0; f.dim() - 2]
    } else {
        bracket_closed_form(&tf, alpha)
    };
    Ok(QuotientVector {
        components,
        frame: f.fingerprint(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeneratorPolicy {
    /// `∇^m Rm` for `m < N`, `Ric`, `S` and `C`.
    CurvatureBasic,
    /// Adds tensor products and single contractions of pairs, up to rank 6.
    Products2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorBo {
    pub name: String,
    pub rank: usize,
    pub bo: Option<i32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KSubspace {
    pub n_order: usize,
    pub policy: GeneratorPolicy,
    /// Orthonormal basis in the `π(m_j)` components.
    pub basis: Vec<Vec<f64>>,
    /// Rank of the bracket images; a lower bound for the full span.
    pub d: usize,
    pub lower_bound: bool,
    pub singular_values: Vec<f64>,
    pub generators: Vec<GeneratorBo>,
    /// Every generator has `bo ≤ 0`.
    pub hypothesis_holds: bool,
    pub frame: String,
}

/// Named generators at the point, sorted by name.
pub fn generators(geo: &Geometry, n_order: usize, policy: GeneratorPolicy) -> Result<BTreeMap<String, TensorValue>> {
    let mut base: BTreeMap<String, TensorValue> = BTreeMap::new();
    base.insert("C".into(), geo.weyl.value());
    base.insert("Ric".into(), geo.ricci.value());
    base.insert("S".into(), geo.tracefree_ricci.value());
    base.insert("nabla0Rm".into(), geo.riemann.value());
    for mm in 1..n_order {
        base.insert(format!("nabla{mm}Rm"), geo.nabla_riemann(mm)?.value());
    }
    if policy == GeneratorPolicy::CurvatureBasic {
        return Ok(base);
    }
    let at = &geo.at;
    let mut out = base.clone();
    let names: Vec<String> = base.keys().cloned().collect();
    for (ia, a) in names.iter().enumerate() {
        for b in &names[ia..] {
            let (ta, tb) = (&base[a], &base[b]);
            if ta.rank() + tb.rank() <= 6 {
                out.insert(format!("{a}*{b}"), ta.tensor_product(tb)?);
            }
            if ta.rank() + tb.rank() - 2 <= 6 && ta.rank() + tb.rank() > 2 {
                let tbu = tb.raise_lower(0, at)?;
                for i in 0..ta.rank() {
                    out.insert(format!("{a}.{i}*{b}"), ta.contract_with(i, &tbu, 0)?);
                }
            }
        }
    }
    Ok(out)
}

/// `K_N` at a point: span of the brackets of all generators against all
/// monomials of weight one, with rank threshold `1e−8·σ_max`.
pub fn k_subspace(geo: &Geometry, f: &NullFrame, n_order: usize, policy: GeneratorPolicy, tol: Tolerances) -> Result<KSubspace> {
    let n = geo.dim();
    let at = &geo.at;
    let gens = generators(geo, n_order, policy)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut report = Vec::new();
    let mut scale = 0.0f64;
    for (name, t) in &gens {
        let tf = frame_components(t, f, at)?;
        let bo = boost_order_of_components(&tf, tol).bo;
        report.push(GeneratorBo {
            name: name.clone(),
            rank: t.rank(),
            bo,
        });
        if bo.is_none() {
            continue;
        }
        scale = scale.max(tf.max_abs());
        for alpha in multi_indices(n, t.rank()) {
            if boost_weight(&alpha) == 1 {
                let w = bracket_closed_form(&tf, &alpha);
                if w.iter().any(|x| *x != 0.0) {
                    rows.push(w);
                }
            }
        }
    }
    let hypothesis_holds = report.iter().all(|g| g.bo.is_none_or(|b| b <= 0));
    let (basis, singular_values) = span_basis(&rows, n - 2, tol.threshold(scale));
    Ok(KSubspace {
        n_order,
        policy,
        d: basis.len(),
        basis,
        lower_bound: true,
        singular_values,
        generators: report,
        hypothesis_holds,
        frame: f.fingerprint(),
    })
}

/// Orthonormal basis of the row span; singular values below
/// `max(1e−8·σ_max, floor)` are discarded.
pub fn span_basis(rows: &[Vec<f64>], dim: usize, floor: f64) -> (Vec<Vec<f64>>, Vec<f64>) {
    if rows.is_empty() || dim == 0 {
        return (Vec::new(), Vec::new());
    }
    // Gram matrix keeps the SVD small regardless of the number of rows.
    let mut gram = DMatrix::<f64>::zeros(dim, dim);
    for r in rows {
        for i in 0..dim {
            for j in 0..dim {
                gram[(i, j)] += r[i] * r[j];
            }
        }
    }
    let eig = nalgebra::SymmetricEigen::new(gram);
    let mut pairs: Vec<(f64, usize)> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(i, &v)| (v.max(0.0).sqrt(), i))
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let smax = pairs[0].0;
    let cut = (1e-8 * smax).max(floor);
    let singular_values: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let basis = pairs
        .iter()
        .filter(|p| p.0 > cut)
        .map(|&(_, i)| {
            let mut v: Vec<f64> = (0..dim).map(|a| eig.eigenvectors[(a, i)]).collect();
            let big = (0..dim).max_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs())).unwrap();
            if v[big] < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            v
        })
        .collect();
    (basis, singular_values)
}

/// Largest principal angle between two subspaces given by orthonormal bases.
pub fn max_principal_angle(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    if a.len() != b.len() {
        return std::f64::consts::FRAC_PI_2;
    }
    if a.is_empty() {
        return 0.0;
    }
    let m = DMatrix::<f64>::from_fn(a.len(), b.len(), |i, j| a[i].iter().zip(&b[j]).map(|(x, y)| x * y).sum::<f64>());
    let smin = m.singular_values().iter().cloned().fold(f64::INFINITY, f64::min);
    smin.clamp(-1.0, 1.0).acos()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorizationReport {
    /// Boost order of `T` at the point; `None` for the zero tensor.
    pub s: Option<i32>,
    pub skipped: Option<String>,
    /// Components of weight `≥ s+1` vanish to first order around the point.
    pub neighbourhood_hypothesis: bool,
    pub hypothesis_margin: f64,
    /// Max residual of `X^a(∇_a T)Q = π(∇_X k)·⟨T|k|Q⟩` over frame vectors
    /// `X` and monomials `Q` of weight `≥ s+1`.
    pub residual: f64,
    /// Max residual of `∇_β T_α = 0` for `bw(α) ≥ s+2`.
    pub vanishing_residual: f64,
    /// Max residual of the weight `s+1` component formula.
    pub component_residual: f64,
    /// Same identity for random `X` and random `Q ∈ B^{−s−1}` via `φ`.
    pub random_residual: f64,
    pub checked: usize,
}

impl FactorizationReport {
    pub fn max_residual(&self) -> f64 {
        self.residual
            .max(self.vanishing_residual)
            .max(self.component_residual)
            .max(self.random_residual)
    }
}

fn rel(l: f64, r: f64) -> f64 {
    (l - r).abs() / (1.0 + l.abs() + r.abs())
}

/// `(∇_b k)^a` at the point from a contravariant field jet.
pub fn nabla_vector(k: &JetTensor, geo: &Geometry) -> Result<DMatrix<f64>> {
    let n = geo.dim();
    if k.order() == 0 {
        return Err(Error::OrderTooHigh(1));
    }
    let gam = geo.gamma.value();
    Ok(DMatrix::from_fn(n, n, |a, b| {
        let mut v = k.comps[a].gradient()[b];
        for c in 0..n {
            v += gam.get(&[a, b, c]) * k.comps[c].value();
        }
        v
    }))
}

/// Checks the factorization identity for an all-down field `T` and a null
/// vector field `k`, both given as jets at the point.
pub fn factorization_check(
    geo: &Geometry,
    t: &JetTensor,
    k: &JetTensor,
    seed: Option<&[f64]>,
    tol: Tolerances,
) -> Result<FactorizationReport> {
    let n = geo.dim();
    let at = &geo.at;
    let jf = JetFrame::complete(k, &geo.g, at, seed)?;
    let f = jf.value();
    let tv = t.value();
    let tf = frame_components(&tv, &f, at)?;
    let rep = boost_order_of_components(&tf, tol);
    let mut out = FactorizationReport {
        s: rep.bo,
        skipped: None,
        neighbourhood_hypothesis: true,
        hypothesis_margin: 0.0,
        residual: 0.0,
        vanishing_residual: 0.0,
        component_residual: 0.0,
        random_residual: 0.0,
        checked: 0,
    };
    let Some(s) = rep.bo else {
        out.skipped = Some("zero tensor".into());
        return Ok(out);
    };
    let thr = tol.threshold(rep.norm);
    let r = tv.rank();
    let jtf = jet_frame_components(&t.truncate(1), &jf)?;
    let mut margin = 0.0f64;
    for (flat, alpha) in multi_indices(n, r).enumerate() {
        if boost_weight(&alpha) >= s + 1 {
            let g = jtf.comps[flat].gradient();
            margin = g.iter().fold(margin, |w, x| w.max(x.abs()));
        }
    }
    out.hypothesis_margin = margin;
    out.neighbourhood_hypothesis = margin <= thr.max(1e-8 * (1.0 + rep.norm));

    let nt = geo.cov_deriv(&t.truncate(1))?.value();
    let ntf = frame_components(&nt, &f, at)?;
    let dk = nabla_vector(k, geo)?;
    // (∇_β k)^j = g(m_j, ∇_{e_β} k)
    let nk: Vec<Vec<f64>> = (0..n)
        .map(|beta| {
            let v: Vec<f64> = (0..n)
                .map(|a| (0..n).map(|b| dk[(a, b)] * f.vectors[beta][b]).sum())
                .collect();
            (2..n).map(|j| at.dot(f.m(j), &v)).collect()
        })
        .collect();
    for alpha in multi_indices(n, r) {
        let bw = boost_weight(&alpha);
        if bw < s + 1 {
            continue;
        }
        let w = if bw == s + 1 {
            bracket_closed_form(&tf, &alpha)
        } else {
            vec![0.0; n - 2]
        };
        for beta in 0..n {
            let mut idx = vec![beta];
            idx.extend_from_slice(&alpha);
            let lhs = ntf.get(&idx);
            let rhs: f64 = nk[beta].iter().zip(&w).map(|(a, b)| a * b).sum();
            let res = rel(lhs, rhs);
            out.residual = out.residual.max(res);
            if bw >= s + 2 {
                out.vanishing_residual = out.vanishing_residual.max(lhs.abs() / (1.0 + lhs.abs()));
            } else {
                out.component_residual = out.component_residual.max(res);
            }
            out.checked += 1;
        }
    }
    // Random X and random Q in B^{−s−1}, bracket through φ.
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let monomials: Vec<Vec<usize>> = multi_indices(n, r).filter(|a| boost_weight(a) >= s + 1).collect();
    // Q^{a…} = Σ c_α e_α^a ⋯, assembled slot by slot from the coefficients.
    let to_coords: Vec<Vec<f64>> = (0..n).map(|a| (0..n).map(|al| f.vectors[al][a]).collect()).collect();
    for _ in 0..4 {
        let mut qf = TensorValue::zeros(n, vec![Variance::Up; r]);
        for alpha in &monomials {
            qf.set(alpha, rng.gen_range(-1.0..1.0));
        }
        let q = (0..r).fold(qf, |q, slot| q.transform_slot(slot, &to_coords));
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut lhs = 0.0;
        for (flat, idx) in multi_indices(n, r + 1).enumerate() {
            let qv = q.get(&idx[1..]);
            if qv != 0.0 {
                lhs += x[idx[0]] * nt.components()[flat] * qv;
            }
        }
        let w = bracket_unchecked(&tv, &f, &q, at)?;
        let nx: Vec<f64> = (0..n).map(|a| (0..n).map(|b| dk[(a, b)] * x[b]).sum()).collect();
        let rhs: f64 = (2..n).map(|j| at.dot(f.m(j), &nx) * w.components[j - 2]).sum();
        out.random_residual = out.random_residual.max(rel(lhs, rhs));
        out.checked += 1;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::complete_null_frame;

    fn frame4() -> (MetricAtPoint, NullFrame) {
        let m = MetricAtPoint::minkowski(4);
        let f = complete_null_frame(&[1.0, 0.6, 0.8, 0.0], &m, Some(&[1.0, 0.1, -0.2, 0.3])).unwrap();
        (m, f)
    }

    #[test]
    fn phi_of_vector_with_itself_vanishes() {
        let m = MetricAtPoint::minkowski(4);
        let v = TensorValue::covector(vec![0.3, -1.0, 2.0, 0.5]);
        assert!(phi(&v, &v, &m).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn phi_matches_brute_force() {
        let (m, f) = frame4();
        let k = TensorValue::vector(f.k().to_vec());
        let l = TensorValue::vector(f.l().to_vec());
        let m2 = TensorValue::vector(f.m(2).to_vec());
        let x = k.tensor_product(&k).unwrap();
        let y = l.tensor_product(&m2).unwrap();
        let got = phi(&x, &y, &m).unwrap();
        let xd = x.all_down(&m).unwrap();
        let yu = y.all_up(&m).unwrap();
        let g = m.g.to_matrix();
        for a in 0..4 {
            for b in 0..4 {
                let mut want = 0.0;
                for c in 0..4 {
                    for e in 0..4 {
                        // slot 1 free: X_{b c} Y^{e c} g_{e a}, slot 2 free: X_{c b} Y^{c e} g_{e a}
                        want += xd.get(&[b, c]) * yu.get(&[e, c]) * g[(e, a)] + xd.get(&[c, b]) * yu.get(&[c, e]) * g[(e, a)]
                            - xd.get(&[a, c]) * yu.get(&[e, c]) * g[(e, b)]
                            - xd.get(&[c, a]) * yu.get(&[c, e]) * g[(e, b)];
                    }
                }
                assert!((got.get(&[a, b]) - want).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn ricci_type_bracket() {
        let (m, f) = frame4();
        // S with S k = λ k: frame components S01 = λ, S_ij, S_1j free.
        let mut sf = TensorValue::zeros(4, vec![Variance::Down; 2]);
        sf.set(&[0, 1], 2.0);
        sf.set(&[1, 0], 2.0);
        sf.set(&[2, 2], 1.0);
        sf.set(&[3, 3], -0.5);
        sf.set(&[2, 3], 0.7);
        sf.set(&[3, 2], 0.7);
        sf.set(&[1, 1], 0.4);
        sf.set(&[1, 2], -0.9);
        sf.set(&[2, 1], -0.9);
        let s = crate::frames::from_frame_components(&sf, &f, &m);
        let tol = Tolerances::default();
        let q = monomial_tensor(&f, &[0, 2]);
        let w = bracket(&s, &f, &q, &m, tol).unwrap();
        assert!((w.components[0] - 1.0).abs() < 1e-12);
        assert!((w.components[1] + 0.7).abs() < 1e-12);
        let wc = bracket_monomial(&s, &f, &[0, 2], &m, tol).unwrap();
        assert!(w.max_diff(&wc) < 1e-12);
        // l-independence under null rotations about k
        let f2 = f.null_rotation(&[0.4, -1.1]).unwrap();
        let w2 = bracket(&s, &f2, &monomial_tensor(&f2, &[0, 2]), &m, tol).unwrap();
        let w2b = bracket(&s, &f2, &q, &m, tol).unwrap();
        assert!(w.max_diff(&w2b) < 1e-12);
        assert!(w2.components.iter().all(|x| x.is_finite()));
        // weight above s+1 gives zero, below is a domain error
        assert!(bracket_monomial(&s, &f, &[0, 0], &m, tol).unwrap().norm() == 0.0);
        assert!(matches!(
            bracket_monomial(&s, &f, &[1, 2], &m, tol),
            Err(Error::BracketDomain { .. })
        ));
    }

    #[test]
    fn span_rank() {
        let rows = vec![vec![1.0, 0.0, 0.0], vec![2.0, 0.0, 0.0], vec![0.0, 1e-14, 0.0]];
        let (b, _) = span_basis(&rows, 3, 1e-10);
        assert_eq!(b.len(), 1);
        let rows = vec![vec![1.0, 1.0, 0.0], vec![1.0, -1.0, 0.0]];
        let (b, _) = span_basis(&rows, 3, 1e-10);
        assert_eq!(b.len(), 2);
        let e = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]];
        assert!(max_principal_angle(&b, &e) < 1e-8);
    }

    fn field_case(metric: &str, k: &str, p: Vec<f64>) -> (Geometry, JetTensor) {
        use crate::geometry::TensorFieldExpr;
        use crate::metric_ir::{parse_metric, Point};
        let spec = parse_metric(metric).unwrap();
        let geo = Geometry::new(&spec, &Point::new(p)).unwrap();
        let kf = TensorFieldExpr::parse_vector(k, &spec, Variance::Up).unwrap();
        let kj = geo.field_jet(&kf, 3).unwrap();
        (geo, kj)
    }

    const PPWAVE: &str = "dim = 4\ncoords = u v x y\ng[0][0] = x^2 - y^2 + x*y^2\ng[0][1] = 1\ng[2][2] = 1\ng[3][3] = 1\n";
    const SCHW: &str = "dim = 4\ncoords = t r th ph\ng[0][0] = -(1 - 2/r)\ng[1][1] = 1/(1 - 2/r)\ng[2][2] = r^2\ng[3][3] = r^2*sin(th)^2\n";

    #[test]
    fn ppwave_factorization_and_kundt_subspace() {
        let (geo, k) = field_case(PPWAVE, "0,1,0,0", vec![0.2, -0.4, 0.7, 0.3]);
        let tol = Tolerances::default();
        for t in [geo.riemann.clone(), geo.nabla_riemann(1).unwrap().clone(), geo.tracefree_ricci.clone()] {
            let rep = factorization_check(&geo, &t, &k, None, tol).unwrap();
            assert!(rep.skipped.is_some() || rep.max_residual() < 1e-9, "{rep:?}");
        }
        let f = JetFrame::complete(&k, &geo.g, &geo.at, None).unwrap().value();
        let ks = k_subspace(&geo, &f, 3, GeneratorPolicy::CurvatureBasic, tol).unwrap();
        assert!(ks.hypothesis_holds);
        assert_eq!(ks.d, 0);
    }

    #[test]
    fn schwarzschild_radial_factorization() {
        let (geo, k) = field_case(SCHW, "1/(1 - 2/r),1,0,0", vec![0.0, 3.0, 1.1, 0.2]);
        let tol = Tolerances::default();
        let rep = factorization_check(&geo, &geo.riemann, &k, None, tol).unwrap();
        assert_eq!(rep.s, Some(0));
        assert!(rep.neighbourhood_hypothesis, "{rep:?}");
        assert!(rep.max_residual() < 1e-9, "{rep:?}");
        let rep = factorization_check(&geo, &geo.tracefree_ricci, &k, None, tol).unwrap();
        assert_eq!(rep.skipped.as_deref(), Some("zero tensor"));
    }
}
