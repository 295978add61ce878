mod common;

use common::{random_tensor, rng};
use kronalign::eigen::{
    dominant_eigen, residual, spectrum_sample, sshopm, verify_decoupling, EigenOptions,
    PackedSymmetric, SymmetricTensor,
};
use kronalign::tensor::{DenseTensor, MotifTensor};
use proptest::prelude::*;

fn opts(restarts: usize, seed: u64) -> EigenOptions {
    EigenOptions { restarts, seed, ..EigenOptions::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn returned_pairs_are_consistent(seed in any::<u64>(), k in 3usize..6, dim in 2usize..5) {
        let t = DenseTensor::random_symmetric(k, dim, &mut rng(seed));
        let p = dominant_eigen(&t, &opts(40, seed)).unwrap();
        let norm: f64 = p.vector.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!((norm - 1.0).abs() <= 1e-12);
        prop_assert!((residual(&t, p.lambda, &p.vector) - p.residual).abs() <= 1e-12);
        prop_assert!(p.converged && p.residual <= 1e-9);
        if k % 2 == 1 {
            let neg: Vec<f64> = p.vector.iter().map(|v| -v).collect();
            prop_assert!(residual(&t, -p.lambda, &neg) <= 1e-9);
        }
    }

    #[test]
    fn nonnegative_tensors_have_nonnegative_dominant_value(seed in any::<u64>(), k in 3usize..5, dim in 3usize..7) {
        let t = random_tensor(k, dim, 0.6, &mut rng(seed));
        prop_assume!(t.nnz() > 0);
        let p = dominant_eigen(&t, &opts(20, seed)).unwrap();
        prop_assert!(p.lambda >= 0.0);
        let pd = dominant_eigen(&PackedSymmetric::from_dense(&t.to_dense(1 << 20).unwrap()), &opts(20, seed)).unwrap();
        prop_assert!((pd.lambda - p.lambda).abs() <= 1e-8);
    }

    #[test]
    fn decoupling_on_small_random_pairs(seed in any::<u64>(), k in 3usize..5, m in 2usize..4, n in 2usize..4) {
        let mut r = rng(seed);
        let a = DenseTensor::random_symmetric(k, m, &mut r);
        let b = DenseTensor::random_symmetric(k, n, &mut r);
        let rep = verify_decoupling(&a, &b, &opts(200, seed)).unwrap();
        prop_assert!(rep.eig_gap >= 0.0 && rep.vec_gap >= 0.0);
        prop_assert!(rep.eig_gap <= 1e-6, "{:?}", rep);
        prop_assert!(rep.vec_gap <= 1e-6, "{:?}", rep);
    }
}

#[test]
fn sshopm_examples() {
    let d2 = DenseTensor::diagonal(3, 2);
    let p = sshopm(&d2, 0.0, &[1.0, 0.0], 1e-12, 100).unwrap();
    assert!((p.lambda - 1.0).abs() < 1e-12 && p.vector == vec![1.0, 0.0]);

    let tri = MotifTensor::new(3, 3, vec![vec![0, 1, 2]], None).unwrap();
    let c = 1.0 / 3f64.sqrt();
    let p = sshopm(&tri, 1.0, &[c, c, c], 1e-12, 100).unwrap();
    assert!((p.lambda - 2.0 / 3f64.sqrt()).abs() < 1e-12);

    let zero = DenseTensor::zeros(3, 2, 64).unwrap();
    let p = sshopm(&zero, 1.0, &[3.0, 4.0], 1e-12, 100).unwrap();
    assert!(p.converged && p.lambda == 0.0);
    assert!((p.vector[0] - 0.6).abs() < 1e-15 && (p.vector[1] - 0.8).abs() < 1e-15);
}

#[test]
fn dominant_examples() {
    for t in [DenseTensor::diagonal(3, 2), DenseTensor::diagonal(3, 4)] {
        let p = dominant_eigen(&t, &opts(50, 3)).unwrap();
        assert!((p.lambda.abs() - 1.0).abs() < 1e-9);
    }
    let tri = MotifTensor::new(3, 3, vec![vec![0, 1, 2]], None).unwrap();
    let p = dominant_eigen(&tri, &opts(50, 3)).unwrap();
    assert!((p.lambda - 2.0 / 3f64.sqrt()).abs() < 1e-9);
}

#[test]
fn spectrum_of_zero_tensor_is_zero() {
    let zero = DenseTensor::zeros(3, 3, 64).unwrap();
    let s = spectrum_sample(&zero, 20, 1, 1e-10);
    assert_eq!(s.len(), 1);
    assert_eq!(s[0].lambda, 0.0);
}

#[test]
fn packed_tensor_counts_distinct_entries() {
    let t = DenseTensor::random_symmetric(4, 5, &mut rng(8));
    let p = PackedSymmetric::from_dense(&t);
    // C(5 + 3, 4)
    assert_eq!(p.nnz(), 70);
    assert_eq!(SymmetricTensor::dim(&p), 5);
}
