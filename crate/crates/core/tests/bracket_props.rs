mod common;

use common::*;
use nullkit::alignment::Tolerances;
use nullkit::bilinear::{bracket, bracket_monomial, monomial_tensor};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn tol() -> Tolerances {
    Tolerances::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closed_form_matches_definition(seed in any::<u64>(), n in 3usize..=5, rank in 1usize..=4, s in -2i32..=1) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (m, f) = random_frame(&mut rng, n);
        let t = tensor_of_order(&mut rng, &f, &m, rank, s.min(rank as i32));
        let s = s.min(rank as i32);
        let ws = words(n, rank, |bw| bw == s + 1);
        prop_assume!(!ws.is_empty());
        let alpha = &ws[rng.gen_range(0..ws.len())];
        let a = bracket_monomial(&t, &f, alpha, &m, tol()).unwrap();
        let b = bracket(&t, &f, &monomial_tensor(&f, alpha), &m, tol()).unwrap();
        prop_assert!(a.max_diff(&b) <= 1e-12, "diff {:e}", a.max_diff(&b));
    }

    #[test]
    fn vanishes_above_leading_weight(seed in any::<u64>(), n in 3usize..=5, rank in 1usize..=3, s in -2i32..=0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (m, f) = random_frame(&mut rng, n);
        let t = tensor_of_order(&mut rng, &f, &m, rank, s);
        let q = random_tensor(&mut rng, &f, &m, rank, |bw| bw <= -s - 2);
        let w = bracket(&t, &f, &q, &m, tol()).unwrap();
        prop_assert!(w.norm() <= 1e-10, "norm {:e}", w.norm());
    }

    #[test]
    fn independent_of_l(seed in any::<u64>(), n in 3usize..=5, rank in 1usize..=3, s in -2i32..=1) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (m, f) = random_frame(&mut rng, n);
        let t = tensor_of_order(&mut rng, &f, &m, rank, s);
        let q = random_tensor(&mut rng, &f, &m, rank, |bw| bw <= -s - 1);
        let z: Vec<f64> = (0..n - 2).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let f2 = f.null_rotation(&z).unwrap();
        let a = bracket(&t, &f, &q, &m, tol()).unwrap();
        let b = bracket(&t, &f2, &q, &m, tol()).unwrap();
        prop_assert!(a.max_diff(&b) <= 1e-10, "diff {:e}", a.max_diff(&b));
    }

    #[test]
    fn map_s_identity(seed in any::<u64>(), n in 3usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (m, f) = random_frame(&mut rng, n);
        let (s, lambda, sij) = s_with_null_eigendirection(&mut rng, &f, &m);
        for i in 2..n {
            let w = bracket_monomial(&s, &f, &[0, i], &m, tol()).unwrap();
            for j in 2..n {
                let want = if i == j { lambda } else { 0.0 } - sij[(i - 2, j - 2)];
                prop_assert!((w.components[j - 2] - want).abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn zero_tensor_brackets_to_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (m, f) = random_frame(&mut rng, 4);
    let t = random_tensor(&mut rng, &f, &m, 2, |_| false);
    let q = random_tensor(&mut rng, &f, &m, 2, |_| true);
    assert_eq!(bracket(&t, &f, &q, &m, tol()).unwrap().norm(), 0.0);
}

#[test]
fn domain_violation_is_rejected() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (m, f) = random_frame(&mut rng, 4);
    let t = tensor_of_order(&mut rng, &f, &m, 2, 0);
    // k l has weight 0 < s + 1
    assert!(bracket_monomial(&t, &f, &[0, 1], &m, tol()).is_err());
    assert!(bracket(&t, &f, &monomial_tensor(&f, &[0, 1]), &m, tol()).is_err());
}
