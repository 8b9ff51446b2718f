#![allow(dead_code)]

use nalgebra::DMatrix;
use nullkit::alignment::boost_weight;
use nullkit::frames::{complete_null_frame, from_frame_components, NullFrame};
use nullkit::tensor::{multi_indices, MetricAtPoint, TensorValue, Variance};
use rand::Rng;

/// `g = Aᵀ η A` with `A` a small perturbation of the identity, together
/// with `A⁻¹`, whose columns are a `g`-orthonormal basis.
pub fn random_metric<R: Rng>(rng: &mut R, n: usize) -> (MetricAtPoint, DMatrix<f64>) {
    loop {
        let a = DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 } + rng.gen_range(-0.25..0.25));
        let Some(ainv) = a.clone().try_inverse() else { continue };
        let mut eta = DMatrix::identity(n, n);
        eta[(0, 0)] = -1.0;
        let g = a.transpose() * eta * &a;
        if let Ok(m) = MetricAtPoint::new(g) {
            return (m, ainv);
        }
    }
}

fn unit<R: Rng>(rng: &mut R, len: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if r > 0.2 {
            return v.into_iter().map(|x| x / r).collect();
        }
    }
}

/// A random metric with a random null frame at a point.
pub fn random_frame<R: Rng>(rng: &mut R, n: usize) -> (MetricAtPoint, NullFrame) {
    let (m, ainv) = random_metric(rng, n);
    let mut w = vec![1.0];
    w.extend(unit(rng, n - 1));
    let scale = rng.gen_range(0.5..2.0);
    let k: Vec<f64> = (ainv.clone() * nalgebra::DVector::from_vec(w)).iter().map(|x| x * scale).collect();
    // timelike seed
    let mut t = vec![1.0];
    t.extend((1..n).map(|_| rng.gen_range(-0.3..0.3)));
    let t: Vec<f64> = (ainv * nalgebra::DVector::from_vec(t)).iter().copied().collect();
    let f = complete_null_frame(&k, &m, Some(&t)).expect("frame completes");
    (m, f)
}

/// All-down tensor whose frame components are uniform in `[-1, 1]` where
/// `keep(bw)` holds and zero elsewhere.
pub fn random_tensor<R: Rng>(rng: &mut R, f: &NullFrame, m: &MetricAtPoint, rank: usize, keep: impl Fn(i32) -> bool) -> TensorValue {
    let n = f.dim();
    let mut tf = TensorValue::zeros(n, vec![Variance::Down; rank]);
    for idx in multi_indices(n, rank) {
        if keep(boost_weight(&idx)) {
            tf.set(&idx, rng.gen_range(-1.0..1.0));
        }
    }
    from_frame_components(&tf, f, m)
}

/// Tensor of boost order exactly `s` with at least one component of weight `s`.
pub fn tensor_of_order<R: Rng>(rng: &mut R, f: &NullFrame, m: &MetricAtPoint, rank: usize, s: i32) -> TensorValue {
    random_tensor(rng, f, m, rank, |bw| bw <= s)
}

/// Frame words of the given length with boost weight in `range`.
pub fn words(n: usize, rank: usize, range: impl Fn(i32) -> bool) -> Vec<Vec<usize>> {
    multi_indices(n, rank).filter(|a| range(boost_weight(a))).collect()
}

/// Symmetric trace-free `S` with `k` as null eigenvector, from frame
/// components `S_ij` and `λ = S_01`.
pub fn s_with_null_eigendirection<R: Rng>(rng: &mut R, f: &NullFrame, m: &MetricAtPoint) -> (TensorValue, f64, DMatrix<f64>) {
    let n = f.dim();
    let sp = n - 2;
    let sij = DMatrix::from_fn(sp, sp, |_, _| rng.gen_range(-1.0..1.0));
    let sij = (&sij + sij.transpose()) * 0.5;
    let lambda = -sij.trace() / 2.0;
    let mut tf = TensorValue::zeros(n, vec![Variance::Down; 2]);
    tf.set(&[0, 1], lambda);
    tf.set(&[1, 0], lambda);
    for i in 2..n {
        let v = rng.gen_range(-1.0..1.0);
        tf.set(&[1, i], v);
        tf.set(&[i, 1], v);
        for j in 2..n {
            tf.set(&[i, j], sij[(i - 2, j - 2)]);
        }
    }
    tf.set(&[1, 1], rng.gen_range(-1.0..1.0));
    (from_frame_components(&tf, f, m), lambda, sij)
}

/// Random symmetric trace-free tensor, all down.
pub fn random_tracefree<R: Rng>(rng: &mut R, m: &MetricAtPoint) -> TensorValue {
    let n = m.dim();
    let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    let s = (&a + a.transpose()) * 0.5;
    let g = m.matrix();
    let ginv = g.clone().try_inverse().unwrap();
    let tr = (&ginv * &s).trace();
    let s = s - g * (tr / n as f64);
    TensorValue::from_matrix(&s, [Variance::Down; 2])
}
