//! Truncated multivariate Taylor polynomials ("jets") at a point.
//!
//! A jet of order `o` in `n` variables stores the coefficients
//! `c_α = ∂^α f(p) / α!` for every multi-index with `|α| ≤ o`. Monomials are
//! sorted by total degree, so truncation to a lower order is a prefix.

use std::collections::HashMap;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use crate::tensor::{TensorValue, Variance};

#[derive(Debug)]
pub struct JetSpace {
    nvars: usize,
    max_order: usize,
    monos: Vec<Vec<u8>>,
    deg_start: Vec<usize>,
    index: HashMap<Vec<u8>, usize>,
    /// `(a, b, c)` with `mono[a] + mono[b] = mono[c]`, sorted by `deg(c)`.
    mul_table: Vec<(u32, u32, u32)>,
    mul_cut: Vec<usize>,
    /// Per variable: for each monomial `α`, the index of `α + e_i` and `α_i + 1`.
    deriv: Vec<Vec<(usize, f64)>>,
    factorial: Vec<f64>,
}

impl JetSpace {
    pub fn new(nvars: usize, max_order: usize) -> Arc<JetSpace> {
        let mut monos: Vec<Vec<u8>> = Vec::new();
        let mut deg_start = vec![0];
        for d in 0..=max_order {
            let mut this = Vec::new();
            gen_degree(nvars, d, &mut vec![0u8; nvars], 0, &mut this);
            this.sort_by(|a, b| b.cmp(a));
            monos.extend(this);
            deg_start.push(monos.len());
        }
        let index: HashMap<Vec<u8>, usize> =
            monos.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
        let mut mul_table = Vec::new();
        for (a, ma) in monos.iter().enumerate() {
            for (b, mb) in monos.iter().enumerate() {
                let sum: Vec<u8> = ma.iter().zip(mb).map(|(x, y)| x + y).collect();
                if let Some(&c) = index.get(&sum) {
                    mul_table.push((a as u32, b as u32, c as u32));
                }
            }
        }
        mul_table.sort_by_key(|&(_, _, c)| c);
        let mut mul_cut = Vec::with_capacity(max_order + 1);
        for d in 0..=max_order {
            let limit = deg_start[d + 1] as u32;
            mul_cut.push(mul_table.iter().take_while(|t| t.2 < limit).count());
        }
        let mut deriv = Vec::with_capacity(nvars);
        for i in 0..nvars {
            let mut table = Vec::with_capacity(monos.len());
            for m in &monos {
                let mut up = m.clone();
                up[i] += 1;
                match index.get(&up) {
                    Some(&j) => table.push((j, f64::from(m[i]) + 1.0)),
                    None => table.push((usize::MAX, 0.0)),
                }
            }
            deriv.push(table);
        }
        let mut factorial = vec![1.0; max_order + 2];
        for k in 1..factorial.len() {
            factorial[k] = factorial[k - 1] * k as f64;
        }
        Arc::new(JetSpace {
            nvars,
            max_order,
            monos,
            deg_start,
            index,
            mul_table,
            mul_cut,
            deriv,
            factorial,
        })
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    /// Number of monomials of degree ≤ `order`.
    pub fn len(&self, order: usize) -> usize {
        self.deg_start[order + 1]
    }

    pub fn is_empty(&self) -> bool {
        self.monos.is_empty()
    }

    pub fn monomials(&self) -> &[Vec<u8>] {
        &self.monos
    }

    pub fn monomial_index(&self, m: &[u8]) -> Option<usize> {
        self.index.get(m).copied()
    }

    /// `α! = Π α_i!`
    pub fn multi_factorial(&self, m: &[u8]) -> f64 {
        m.iter().map(|&k| self.factorial[k as usize]).product()
    }

    fn order_of_len(&self, len: usize) -> usize {
        self.deg_start[1..]
            .iter()
            .position(|&s| s == len)
            .expect("jet length matches a degree boundary")
    }
}

fn gen_degree(n: usize, d: usize, cur: &mut Vec<u8>, pos: usize, out: &mut Vec<Vec<u8>>) {
    if pos + 1 == n || n == 0 {
        if n > 0 {
            cur[pos] = d as u8;
        }
        out.push(cur.clone());
        if n > 0 {
            cur[pos] = 0;
        }
        return;
    }
    for k in (0..=d).rev() {
        cur[pos] = k as u8;
        gen_degree(n, d - k, cur, pos + 1, out);
    }
    cur[pos] = 0;
}

#[derive(Clone, Debug)]
pub struct Jet {
    space: Arc<JetSpace>,
    c: Vec<f64>,
}

impl Jet {
    pub fn from_coeffs(space: &Arc<JetSpace>, c: Vec<f64>) -> Jet {
        debug_assert!(space.deg_start.contains(&c.len()));
        Jet { space: space.clone(), c }
    }

    pub fn constant(space: &Arc<JetSpace>, v: f64, order: usize) -> Jet {
        let mut c = vec![0.0; space.len(order)];
        c[0] = v;
        Jet { space: space.clone(), c }
    }

    pub fn zero(space: &Arc<JetSpace>, order: usize) -> Jet {
        Jet::constant(space, 0.0, order)
    }

    /// The coordinate function `x_i − p_i` shifted by `value`.
    pub fn variable(space: &Arc<JetSpace>, i: usize, value: f64, order: usize) -> Jet {
        let mut j = Jet::constant(space, value, order);
        if order >= 1 {
            let mut m = vec![0u8; space.nvars];
            m[i] = 1;
            j.c[space.index[&m]] = 1.0;
        }
        j
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }

    pub fn order(&self) -> usize {
        self.space.order_of_len(self.c.len())
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// First partial derivatives at the base point.
    pub fn gradient(&self) -> Vec<f64> {
        (0..self.space.nvars)
            .map(|i| {
                if self.c.len() > 1 {
                    let mut m = vec![0u8; self.space.nvars];
                    m[i] = 1;
                    self.c[self.space.index[&m]]
                } else {
                    0.0
                }
            })
            .collect()
    }

    pub fn truncate(&self, order: usize) -> Jet {
        let n = self.space.len(order.min(self.order()));
        Jet {
            space: self.space.clone(),
            c: self.c[..n].to_vec(),
        }
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet {
            space: self.space.clone(),
            c: self.c.iter().map(|x| x * s).collect(),
        }
    }

    pub fn add_scaled(&mut self, other: &Jet, s: f64) {
        let n = self.c.len().min(other.c.len());
        self.c.truncate(n);
        for (a, b) in self.c.iter_mut().zip(&other.c) {
            *a += s * b;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.c.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Partial derivative; the order drops by one.
    pub fn deriv(&self, var: usize) -> Jet {
        let o = self.order();
        assert!(o >= 1, "cannot differentiate an order-0 jet");
        let n = self.space.len(o - 1);
        let table = &self.space.deriv[var];
        let c = (0..n)
            .map(|k| {
                let (src, f) = table[k];
                f * self.c[src]
            })
            .collect();
        Jet {
            space: self.space.clone(),
            c,
        }
    }

    /// Composes a univariate function given its Taylor coefficients
    /// `a_k = f⁽ᵏ⁾(x₀)/k!` at `x₀ = self.value()`.
    pub fn compose(&self, a: &[f64]) -> Jet {
        let o = self.order();
        let mut delta = self.clone();
        delta.c[0] = 0.0;
        let mut r = Jet::constant(&self.space, a[o.min(a.len() - 1)], o);
        for k in (0..o.min(a.len() - 1)).rev() {
            r = &r * &delta;
            r.c[0] += a[k];
        }
        r
    }

    pub fn recip(&self) -> Jet {
        let x0 = self.value();
        let o = self.order();
        let a: Vec<f64> = (0..=o)
            .map(|k| (if k % 2 == 0 { 1.0 } else { -1.0 }) / x0.powi(k as i32 + 1))
            .collect();
        self.compose(&a)
    }

    pub fn sqrt(&self) -> Jet {
        let x0 = self.value();
        let o = self.order();
        let mut a = Vec::with_capacity(o + 1);
        let mut binom = 1.0;
        for k in 0..=o {
            a.push(binom * x0.powf(0.5 - k as f64));
            binom *= (0.5 - k as f64) / (k as f64 + 1.0);
        }
        self.compose(&a)
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        let a: Vec<f64> = (0..=self.order())
            .map(|k| e / self.space.factorial[k])
            .collect();
        self.compose(&a)
    }

    pub fn ln(&self) -> Jet {
        let x0 = self.value();
        let mut a = vec![x0.ln()];
        for k in 1..=self.order() {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            a.push(sign / (k as f64 * x0.powi(k as i32)));
        }
        self.compose(&a)
    }

    /// Periodic-derivative functions: `derivs[k % 4]` gives `f⁽ᵏ⁾(x₀)`.
    fn compose_cyclic(&self, derivs: [f64; 4]) -> Jet {
        let a: Vec<f64> = (0..=self.order())
            .map(|k| derivs[k % 4] / self.space.factorial[k])
            .collect();
        self.compose(&a)
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        self.compose_cyclic([s, c, -s, -c])
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        self.compose_cyclic([c, -s, -c, s])
    }

    pub fn sinh(&self) -> Jet {
        let x = self.value();
        self.compose_cyclic([x.sinh(), x.cosh(), x.sinh(), x.cosh()])
    }

    pub fn cosh(&self) -> Jet {
        let x = self.value();
        self.compose_cyclic([x.cosh(), x.sinh(), x.cosh(), x.sinh()])
    }

    pub fn powi(&self, k: i32) -> Jet {
        if k < 0 {
            return self.recip().powi(-k);
        }
        let mut r = Jet::constant(&self.space, 1.0, self.order());
        for _ in 0..k {
            r = &r * self;
        }
        r
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        let mut r = self.clone();
        r.add_scaled(rhs, 1.0);
        r
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        let mut r = self.clone();
        r.add_scaled(rhs, -1.0);
        r
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        let n = self.c.len().min(rhs.c.len());
        let o = self.space.order_of_len(n);
        let mut c = vec![0.0; n];
        if n == 1 {
            c[0] = self.c[0] * rhs.c[0];
        } else {
            for &(a, b, k) in &self.space.mul_table[..self.space.mul_cut[o]] {
                c[k as usize] += self.c[a as usize] * rhs.c[b as usize];
            }
        }
        Jet {
            space: self.space.clone(),
            c,
        }
    }
}

/// A tensor field known through its jet at a point; layout matches
/// [`TensorValue`] (row-major, first slot slowest).
#[derive(Clone, Debug)]
pub struct JetTensor {
    pub dim: usize,
    pub variance: Vec<Variance>,
    pub comps: Vec<Jet>,
}

impl JetTensor {
    pub fn zeros(space: &Arc<JetSpace>, dim: usize, variance: Vec<Variance>, order: usize) -> JetTensor {
        let n = dim.pow(variance.len() as u32);
        JetTensor {
            dim,
            variance,
            comps: vec![Jet::zero(space, order); n],
        }
    }

    pub fn rank(&self) -> usize {
        self.variance.len()
    }

    pub fn order(&self) -> usize {
        self.comps.iter().map(Jet::order).min().unwrap_or(0)
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        self.comps[0].space()
    }

    pub fn value(&self) -> TensorValue {
        TensorValue::from_parts(
            self.dim,
            self.variance.clone(),
            self.comps.iter().map(Jet::value).collect(),
        )
        .expect("consistent shape")
    }

    pub fn truncate(&self, order: usize) -> JetTensor {
        JetTensor {
            dim: self.dim,
            variance: self.variance.clone(),
            comps: self.comps.iter().map(|j| j.truncate(order)).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> JetTensor {
        JetTensor {
            dim: self.dim,
            variance: self.variance.clone(),
            comps: self.comps.iter().map(|j| j.scale(s)).collect(),
        }
    }

    pub fn add(&self, other: &JetTensor) -> JetTensor {
        JetTensor {
            dim: self.dim,
            variance: self.variance.clone(),
            comps: self.comps.iter().zip(&other.comps).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &JetTensor) -> JetTensor {
        JetTensor {
            dim: self.dim,
            variance: self.variance.clone(),
            comps: self.comps.iter().zip(&other.comps).map(|(a, b)| a - b).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_counts() {
        let s = JetSpace::new(4, 5);
        assert_eq!(s.len(5), 126);
        assert_eq!(s.len(0), 1);
        assert_eq!(s.len(1), 5);
    }

    #[test]
    fn product_and_derivative() {
        let s = JetSpace::new(2, 3);
        let x = Jet::variable(&s, 0, 2.0, 3);
        let y = Jet::variable(&s, 1, -1.0, 3);
        let f = &(&x * &x) * &y; // x²y
        assert!((f.value() + 4.0).abs() < 1e-15);
        let fx = f.deriv(0); // 2xy
        assert!((fx.value() + 4.0).abs() < 1e-15);
        let fxx = fx.deriv(0); // 2y
        assert!((fxx.value() + 2.0).abs() < 1e-15);
        assert!((fxx.deriv(1).value() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn recip_and_sqrt_series() {
        let s = JetSpace::new(1, 4);
        let x = Jet::variable(&s, 0, 2.0, 4);
        let r = x.recip();
        // d^3/dx^3 (1/x) = -6/x^4
        let d3 = r.deriv(0).deriv(0).deriv(0);
        assert!((d3.value() + 6.0 / 16.0).abs() < 1e-14);
        let q = x.sqrt();
        let back = &q * &q;
        for (a, b) in back.coeffs().iter().zip(x.coeffs()) {
            assert!((a - b).abs() < 1e-14);
        }
    }
}
