//! Property tests for the algebraic invariants of the kernel analytics and
//! the selection criterion.

use pco::kernels::{Bandwidth, BaseKernel, Kernel, ProductKernel};
use pco::selection::comparison_term;
use pco::Sample;
use proptest::prelude::*;

fn any_kernel() -> impl Strategy<Value = Kernel> {
    prop_oneof![
        Just(Kernel::gaussian()),
        Just(Kernel::epanechnikov()),
        Just(Kernel::with_order(BaseKernel::Gaussian, 4).unwrap()),
    ]
}

fn bandwidth_in(dim: usize) -> impl Strategy<Value = Bandwidth> {
    prop::collection::vec(0.01f64..10.0, dim).prop_map(|c| Bandwidth::new(c).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// ||K_h||^2 * prod(h) recovers ||K||^2 exactly (pure scaling law).
    #[test]
    fn scaled_norm_times_volume_is_invariant(
        kernel in any_kernel(),
        h in bandwidth_in(2),
    ) {
        let pk = ProductKernel::new(kernel, 2).unwrap();
        let l2 = pk.l2_norm_scaled(&h).unwrap();
        let base = pk.axis().l2_norm_sq().powi(2);
        let recovered = l2 * h.volume();
        prop_assert!((recovered - base).abs() <= 1e-12 * base);
    }

    /// <K_h, K_h> coincides with the scaled norm.
    #[test]
    fn cross_inner_diagonal_is_the_norm(
        kernel in any_kernel(),
        h in bandwidth_in(1),
    ) {
        let pk = ProductKernel::univariate(kernel);
        let cross = pk.cross_inner(&h, &h).unwrap();
        let l2 = pk.l2_norm_scaled(&h).unwrap();
        prop_assert!((cross - l2).abs() <= 1e-10 * l2);
    }

    /// Cross inner products are symmetric in their bandwidth arguments.
    #[test]
    fn cross_inner_is_symmetric(
        kernel in any_kernel(),
        a in bandwidth_in(1),
        b in bandwidth_in(1),
    ) {
        let pk = ProductKernel::univariate(kernel);
        let ab = pk.cross_inner(&a, &b).unwrap();
        let ba = pk.cross_inner(&b, &a).unwrap();
        prop_assert!((ab - ba).abs() <= 1e-12 * ab.abs().max(1e-300));
    }

    /// ||K_hmin - K_h||^2 never goes negative.
    #[test]
    fn diff_norm_is_nonnegative(
        kernel in any_kernel(),
        h in bandwidth_in(1),
        hmin in bandwidth_in(1),
    ) {
        let pk = ProductKernel::univariate(kernel);
        prop_assert!(pk.diff_l2_norm(&h, &hmin).unwrap() >= -1e-12);
    }

    /// The pair interaction at the origin recovers the squared difference
    /// norm (Parseval route against the scalar route).
    #[test]
    fn pair_interaction_at_zero_matches_diff_norm(
        kernel in any_kernel(),
        pair in (0.02f64..2.0, 0.02f64..2.0),
    ) {
        let pk = ProductKernel::univariate(kernel);
        let h = Bandwidth::scalar(pair.0.max(pair.1)).unwrap();
        let hmin = Bandwidth::scalar(pair.0.min(pair.1)).unwrap();
        let g0 = pk.pair_interaction(&h, &hmin, &[0.0]).unwrap();
        let diff = pk.diff_l2_norm(&h, &hmin).unwrap();
        let scale = diff.abs().max(1e-12);
        prop_assert!((g0 - diff).abs() <= 1e-8 * scale.max(1.0) + 1e-8 * scale);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Samples normalize observation order, so the comparison term is
    /// bit-identical under input permutations.
    #[test]
    fn comparison_term_is_permutation_invariant(
        mut data in prop::collection::vec(-3.0f64..3.0, 5..40),
        swap in any::<u64>(),
    ) {
        let pk = ProductKernel::univariate(Kernel::gaussian());
        let h = Bandwidth::scalar(0.5).unwrap();
        let hmin = Bandwidth::scalar(0.07).unwrap();
        let original = Sample::univariate(data.clone()).unwrap();
        let base = comparison_term(&original, &pk, &h, &hmin).unwrap();
        let k = (swap as usize) % data.len();
        data.rotate_left(k);
        data.reverse();
        let shuffled = Sample::univariate(data).unwrap();
        let permuted = comparison_term(&shuffled, &pk, &h, &hmin).unwrap();
        prop_assert_eq!(base, permuted);
    }
}
