use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use symlab_core::matrix::sumbound::random_admissible;
use symlab_core::matrix::{c, canonical_symmetrizer, eigendecompose, linalg, random, strong_hyperbolicity_certificate};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn hermitian_matrices_certify(seed in any::<u64>(), n in 1usize..=6) {
        let a = random::hermitian(&mut ChaCha8Rng::seed_from_u64(seed), n);
        let cert = strong_hyperbolicity_certificate(&a);
        prop_assert!(cert.pass, "{:?}", cert.reasons);
        prop_assert!(cert.c4 >= 1.0 / n as f64 - 1e-8);
    }

    #[test]
    fn canonical_symmetrizer_symmetrizes(seed in any::<u64>(), n in 1usize..=6) {
        let a = random::semisimple_real(&mut ChaCha8Rng::seed_from_u64(seed), n);
        let s = canonical_symmetrizer(&eigendecompose(&a, 0.0).unwrap()).unwrap();
        let sa = &s * &a;
        prop_assert!(linalg::skew_defect(&sa) <= 1e-8 * linalg::norm2(&s) * linalg::norm2(&a));
        prop_assert!(linalg::herm_min_eig(&s) >= 1.0 / n as f64 - 1e-8);
    }

    #[test]
    fn jordan_blocks_are_defective(seed in any::<u64>(), n in 2usize..=6) {
        let a = random::with_jordan_block(&mut ChaCha8Rng::seed_from_u64(seed), n);
        let cert = strong_hyperbolicity_certificate(&a);
        prop_assert!(!cert.pass);
        prop_assert!(cert.has_reason("defective"));
    }

    #[test]
    fn certificate_is_similarity_covariant_in_pass(seed in any::<u64>(), n in 1usize..=5, shift in -3.0f64..3.0) {
        // A + t·Id has the same projectors, hence the same verdict
        let a = random::semisimple_real(&mut ChaCha8Rng::seed_from_u64(seed), n);
        let b = &a + linalg::identity(n) * c(shift, 0.0);
        prop_assert_eq!(strong_hyperbolicity_certificate(&a).pass, strong_hyperbolicity_certificate(&b).pass);
    }

    #[test]
    fn sum_bound_holds(seed in any::<u64>(), m in 1usize..=5, n in 1usize..=4) {
        let rep = random_admissible(&mut ChaCha8Rng::seed_from_u64(seed), m, n).check();
        prop_assert!(rep.hypotheses_hold, "{:?}", rep.violations);
        prop_assert!(rep.bound_holds, "lhs {} rhs {}", rep.lhs, rep.rhs);
    }
}

#[test]
fn rotation_is_not_hyperbolic() {
    let a = linalg::from_real_rows(2, &[0.0, 1.0, -1.0, 0.0]);
    assert!(!strong_hyperbolicity_certificate(&a).pass);
}
