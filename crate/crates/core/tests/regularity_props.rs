use proptest::prelude::*;

use symlab_core::regularity::{default_radii, discontinuity_probe, holder_fit, FieldSamples};
use symlab_core::matrix::{c, CMatrix};
use symlab_core::sampling::ParamBox;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn holder_exponent_of_power(beta in 0.15f64..0.95, scale in 0.1f64..10.0) {
        let line = ParamBox::interval("x", -1.0, 1.0, 2001);
        let f = FieldSamples::scalar(&line, move |p| scale * p[0].abs().powf(beta));
        let fit = holder_fit(&f, &[0.0], &default_radii(f.spacing(), 6)).unwrap();
        prop_assert!((fit.alpha - beta).abs() < 0.05, "beta {} fit {}", beta, fit.alpha);
    }
}

#[test]
fn step_survives_and_smooth_does_not() {
    let step = |p: &[f64]| Ok(CMatrix::from_element(1, 1, c(if p[0] < 0.0 { 0.0 } else { 1.0 }, 0.0)));
    let smooth = |p: &[f64]| Ok(CMatrix::from_element(1, 1, c(p[0], 0.0)));
    let s = discontinuity_probe(step, &[0.0], 0.01, 4).unwrap();
    assert!(s.survives && s.gap > 0.5);
    let m = discontinuity_probe(smooth, &[0.0], 0.01, 4).unwrap();
    assert!(!m.survives);
}
