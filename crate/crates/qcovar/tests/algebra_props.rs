//! Property tests for the coordinate algebra: vectorization isometry,
//! factorization round trips, and span-rank behavior.

use nalgebra::DVector;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qcovar::generators::{gaussian_hermitian, random_density};
use qcovar::{
    devectorize, orthonormal_basis, real_span_rank, vectorize, HermitianMatrix, Tolerances,
};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn vectorization_is_an_isometry(seed in any::<u64>(), n in 1usize..=8) {
        let mut rng = rng(seed);
        let a = gaussian_hermitian(n, &mut rng);
        let b = gaussian_hermitian(n, &mut rng);
        let lhs = vectorize(&a).dot(&vectorize(&b));
        let rhs = a.trace_product(&b);
        let scale = a.frobenius_norm() * b.frobenius_norm();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * scale.max(1.0));
    }

    #[test]
    fn devectorize_inverts_vectorize(seed in any::<u64>(), n in 1usize..=8) {
        let mut rng = rng(seed);
        let a = gaussian_hermitian(n, &mut rng);
        let back = devectorize(&vectorize(&a));
        prop_assert!(a.distance(&back) <= 1e-12 * a.frobenius_norm().max(1.0));
    }

    #[test]
    fn factor_reconstructs_every_rank(seed in any::<u64>(), n in 1usize..=8, r in 1usize..=8) {
        let r = r.min(n);
        let mut rng = rng(seed);
        let d = random_density(n, r, &mut rng);
        let y = d.factor(1e-9).unwrap();
        prop_assert_eq!(y.rank(), r);
        prop_assert!(y.density().matrix().distance(d.matrix()) <= 1e-10);
    }

    #[test]
    fn gram_spectrum_is_positive_spectrum(seed in any::<u64>(), n in 2usize..=8, r in 1usize..=8) {
        let r = r.min(n);
        let mut rng = rng(seed);
        let d = random_density(n, r, &mut rng);
        let y = d.factor(1e-9).unwrap();
        let (d_vals, _) = d.matrix().eigh();
        let (g_vals, _) = y.gram().eigh();
        // eigh sorts descending, so the top r eigenvalues line up directly
        for i in 0..r {
            prop_assert!((d_vals[i] - g_vals[i]).abs() <= 1e-9);
        }
        for i in r..n {
            prop_assert!(d_vals[i].abs() <= 1e-9);
        }
    }

    #[test]
    fn orthogonal_sets_have_full_span_rank(n in 2usize..=6, take in 1usize..=36, seed in any::<u64>()) {
        let basis = orthonormal_basis(n);
        let take = take.min(basis.len());
        let subset: Vec<HermitianMatrix> = basis.into_iter().take(take).collect();
        prop_assert_eq!(real_span_rank(&subset, 1e-9).unwrap(), take);

        // appending an exact dependency must not increase the rank
        let mut rng = rng(seed);
        let c0: f64 = rand::Rng::random_range(&mut rng, -2.0..2.0);
        let c1: f64 = rand::Rng::random_range(&mut rng, -2.0..2.0);
        let mut with_dep = subset.clone();
        let dep = if take >= 2 {
            subset[0].scale(c0).add(&subset[1].scale(c1))
        } else {
            subset[0].scale(c0)
        };
        with_dep.push(dep);
        prop_assert_eq!(real_span_rank(&with_dep, 1e-9).unwrap(), take);
    }

    #[test]
    fn eigh_reconstructs(seed in any::<u64>(), n in 1usize..=8) {
        let mut rng = rng(seed);
        let a = gaussian_hermitian(n, &mut rng);
        let (vals, vecs) = a.eigh();
        let diag = nalgebra::DMatrix::from_diagonal(&DVector::from_iterator(
            n,
            vals.iter().map(|&v| num_complex::Complex64::new(v, 0.0)),
        ));
        let recon = &vecs * diag * vecs.adjoint();
        prop_assert!((recon - a.data()).norm() <= 1e-11 * a.frobenius_norm().max(1.0));
        for i in 1..n {
            prop_assert!(vals[i - 1] >= vals[i]);
        }
    }
}

#[test]
fn clamped_construction_respects_tolerances() {
    // densities built from factors stay valid under the default ladder
    let tol = Tolerances::default();
    for seed in 0..20u64 {
        let mut rng = rng(seed);
        for n in [2usize, 4, 7] {
            let d = random_density(n, 1 + (seed as usize % n), &mut rng);
            assert!((d.matrix().trace() - 1.0).abs() <= tol.trace);
            assert!(d.matrix().min_eigenvalue() >= -tol.psd);
        }
    }
}
