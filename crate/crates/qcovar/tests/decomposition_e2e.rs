//! End-to-end decomposition runs on random and named instances: termination,
//! extreme leaves, exact reconstruction, covariance additivity, projection
//! leaves in the two-constraint regime, and bit-level determinism.

use proptest::prelude::*;

use qcovar::generators::{
    example3, example4_default, gell_mann, maximally_mixed, random_instance, InstanceKind,
    InstanceSpec,
};
use qcovar::{
    covariance, decompose, rank_bound, verify, CovarianceMatrix, DecomposeOptions, Tolerances,
};

fn spec(n: usize, k: usize, rank: usize, seed: u64) -> InstanceSpec {
    InstanceSpec {
        kind: InstanceKind::Random,
        n,
        k,
        rank,
        pad: 0,
        seed,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn decompose_satisfies_its_contract(
        seed in any::<u64>(),
        n in 2usize..=6,
        k in 1usize..=8,
        r in 1usize..=6,
    ) {
        let r = r.min(n);
        let k = k.min(n * n);
        let (d, x) = random_instance(&spec(n, k, r, seed)).unwrap();
        let opts = DecomposeOptions::default();
        let dec = decompose(&d, &x, &opts).unwrap();

        prop_assert!(!dec.pieces.is_empty());
        prop_assert!(dec.pieces.len() <= 1usize << (r.saturating_sub(1)));
        let sum: f64 = dec.weights.iter().sum();
        prop_assert!((sum - 1.0).abs() <= 1e-9);
        prop_assert!(dec.weights.iter().all(|&w| w > 0.0));
        prop_assert!(dec.residuals.reconstruction <= 1e-8);
        prop_assert!(dec.residuals.covariance_additivity <= 1e-8);
        prop_assert!(dec.residuals.membership_max <= 1e-8);
        let bound = rank_bound(x.len());
        for cert in &dec.certificates {
            prop_assert_eq!(cert.span_rank, cert.required);
            prop_assert!(cert.rank <= bound);
        }
        let report = verify(&d, &x, &dec, &opts.tolerances).unwrap();
        prop_assert!(report.passed, "{:#?}", report.checks);
    }

    #[test]
    fn two_constraints_force_projection_pieces(
        seed in any::<u64>(),
        n in 2usize..=6,
        k in 1usize..=2,
        r in 1usize..=6,
    ) {
        let r = r.min(n);
        let (d, x) = random_instance(&spec(n, k, r, seed)).unwrap();
        let dec = decompose(&d, &x, &DecomposeOptions::default()).unwrap();
        for piece in &dec.pieces {
            let sq = piece.data() * piece.data();
            prop_assert!((sq - piece.data()).norm() <= 1e-9);
        }
    }

    #[test]
    fn decompose_is_bit_deterministic(
        seed in any::<u64>(),
        n in 2usize..=5,
        k in 1usize..=6,
        r in 1usize..=5,
    ) {
        let r = r.min(n);
        let k = k.min(n * n);
        let (d, x) = random_instance(&spec(n, k, r, seed)).unwrap();
        let a = decompose(&d, &x, &DecomposeOptions::default()).unwrap();
        let b = decompose(&d, &x, &DecomposeOptions::default()).unwrap();
        prop_assert_eq!(&a.weights, &b.weights);
        prop_assert_eq!(a.pieces.len(), b.pieces.len());
        for (pa, pb) in a.pieces.iter().zip(&b.pieces) {
            prop_assert_eq!(pa.data(), pb.data());
        }
    }

    #[test]
    fn covariance_splits_across_the_pieces(
        seed in any::<u64>(),
        n in 2usize..=6,
        k in 1usize..=6,
    ) {
        let k = k.min(n * n);
        let (d, x) = random_instance(&spec(n, k, n, seed)).unwrap();
        let dec = decompose(&d, &x, &DecomposeOptions::default()).unwrap();
        let var_d = covariance(&d, &x).unwrap();
        let var_parts: Vec<CovarianceMatrix> = dec
            .pieces
            .iter()
            .map(|p| covariance(p, &x).unwrap())
            .collect();
        let combined = CovarianceMatrix::weighted_sum(&dec.weights, &var_parts);
        prop_assert!(combined.distance(&var_d) <= 1e-8 * var_d.frobenius_norm().max(1.0));
    }
}

#[test]
fn gell_mann_instances_are_already_extreme() {
    for n in 2..=4usize {
        let d = maximally_mixed(n);
        let x = gell_mann(n).unwrap();
        let dec = decompose(&d, &x, &DecomposeOptions::default()).unwrap();
        assert_eq!(dec.pieces.len(), 1, "n = {n}");
        assert_eq!(dec.weights, vec![1.0]);
        assert!(dec.pieces[0].matrix().distance(d.matrix()) < 1e-12);
    }
}

#[test]
fn rank_one_identity_covariance_instance_is_a_fixed_point() {
    for n in [1usize, 3, 5] {
        let (d, x) = example3(n);
        let dec = decompose(&d, &x, &DecomposeOptions::default()).unwrap();
        assert_eq!(dec.pieces.len(), 1);
        assert_eq!(dec.certificates[0].rank, 1);
        let report = verify(&d, &x, &dec, &Tolerances::default()).unwrap();
        assert!(report.passed);
    }
}

#[test]
fn block_instances_decompose_and_verify() {
    for (n, k) in [(3usize, 2usize), (3, 3), (4, 3), (4, 6), (5, 4)] {
        let (d, x) = example4_default(n, k).unwrap();
        let dec = decompose(&d, &x, &DecomposeOptions::default()).unwrap();
        assert!(
            dec.pieces.len() <= 1 << (n - 1),
            "n={n} k={k}: {} pieces",
            dec.pieces.len()
        );
        let report = verify(&d, &x, &dec, &Tolerances::default()).unwrap();
        assert!(report.passed, "n={n} k={k}: {:#?}", report.checks);
    }
}

#[test]
fn verify_rejects_piece_rank_above_bound() {
    // hand-build a decomposition whose single piece has excessive rank
    let (d, x) = random_instance(&spec(4, 2, 2, 9)).unwrap();
    let dec = decompose(&d, &x, &DecomposeOptions::default()).unwrap();
    let mut tampered = dec.clone();
    tampered.weights = vec![1.0];
    tampered.pieces = vec![d.clone()];
    tampered.certificates = vec![tampered.certificates[0]];
    let report = verify(&d, &x, &tampered, &Tolerances::default()).unwrap();
    assert!(!report.passed);
    assert!(!report.check("rank-bound").unwrap().passed);
}
