mod common;

use common::*;
use nullkit::geometry::{plebanski, weyl_like_residual};
use nullkit::tensor::{TensorValue, Variance};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `λ(u u − h/3)` with `h = g − u u` for a random unit spacelike `u`.
fn tachyonic<R: Rng>(rng: &mut R) -> (nullkit::tensor::MetricAtPoint, TensorValue) {
    let (m, ainv) = random_metric(rng, 4);
    let w: Vec<f64> = (0..4).map(|i| if i == 0 { rng.gen_range(-0.5..0.5) } else { rng.gen_range(-1.0..1.0) }).collect();
    let v: Vec<f64> = (ainv * nalgebra::DVector::from_vec(w)).iter().copied().collect();
    let uu = m.dot(&v, &v);
    let u: Vec<f64> = m.lower(&v).iter().map(|x| x / uu.sqrt()).collect();
    let lambda = rng.gen_range(-2.0..2.0);
    let g = m.matrix();
    let s = nalgebra::DMatrix::from_fn(4, 4, |a, b| lambda * (u[a] * u[b] - (g[(a, b)] - u[a] * u[b]) / 3.0));
    (m, TensorValue::from_matrix(&s, [Variance::Down; 2]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn plebanski_is_weyl_like(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (m, _) = random_metric(&mut rng, 4);
        let s = random_tracefree(&mut rng, &m);
        let p = plebanski(&s, &m).unwrap().all_down(&m).unwrap();
        prop_assert!(weyl_like_residual(&p, &m) <= 1e-10);
    }

    #[test]
    fn plebanski_vanishes_on_tachyonic(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (m, s) = tachyonic(&mut rng);
        let p = plebanski(&s, &m).unwrap();
        prop_assert!(p.max_abs() <= 1e-12, "|P| = {:e}", p.max_abs());
    }
}

#[test]
fn plebanski_needs_dimension_four() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (m, _) = random_metric(&mut rng, 5);
    let s = random_tracefree(&mut rng, &m);
    assert!(plebanski(&s, &m).is_err());
}

#[test]
fn plebanski_rejects_trace() {
    let m = nullkit::tensor::MetricAtPoint::minkowski(4);
    let s = TensorValue::from_matrix(&nalgebra::DMatrix::identity(4, 4), [Variance::Down; 2]);
    assert!(plebanski(&s, &m).is_err());
}
