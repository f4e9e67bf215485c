use proptest::prelude::*;

use symlab_core::cauchy::{first_order_shift, growing_root, oscillator_eigen};
use symlab_core::matrix::c;

// |Im √(1 + i)| = √((√2 − 1)/2)
const IM_BETA: f64 = 0.455_089_860_562_227_3;

#[test]
fn unperturbed_oscillator_matches_closed_form() {
    let osc = oscillator_eigen(0.0, 1.0, 32).unwrap();
    assert!((osc.beta_sq[0] - 1.0).abs() < 1e-10 && (osc.beta_sq[1] - 1.0).abs() < 1e-10, "{:?}", osc.beta_sq);
    assert!((osc.beta[1].abs() - IM_BETA).abs() < 1e-10);
    assert!((growing_root(c(1.0, 1.0)).im.abs() - IM_BETA).abs() < 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn shift_matches_gamma_formula(alpha in 0.05f64..0.95) {
        let g = statrs::function::gamma::gamma;
        let expected = (alpha + 1.0) * g((alpha + 1.0) / 2.0) / g(0.5);
        prop_assert!((first_order_shift(alpha).unwrap() - expected).abs() < 1e-10);
    }
}
