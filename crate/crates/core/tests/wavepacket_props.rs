use std::f64::consts::PI;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use symlab_core::matrix::c;
use symlab_core::wavepacket::{dyadic_decompose, wavepacket_transform, DyadicFrame, GridFunction};

fn random_band_limited(seed: u64, n: usize, kmax: usize) -> GridFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = GridFunction::zeros(1, n, PI, 1).unwrap();
    let spec = (0..n)
        .map(|i| {
            let k = if i <= n / 2 { i } else { n - i };
            if k <= kmax { c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) } else { c(0.0, 0.0) }
        })
        .collect();
    u.from_spectrum(spec)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn transform_is_an_isometry(seed in any::<u64>(), j in 3i32..=8) {
        let u = random_band_limited(seed, 512, 100);
        let w = wavepacket_transform(&u, 2f64.powi(j), None).unwrap();
        prop_assert!((w.norm() / u.norm() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn dyadic_pieces_sum_to_the_function(seed in any::<u64>()) {
        let u = random_band_limited(seed, 256, 128);
        let frame = DyadicFrame::for_grid(&u);
        let parts = dyadic_decompose(&u, &frame).unwrap();
        for (i, v) in u.values.iter().enumerate() {
            let s: symlab_core::C64 = parts.iter().map(|p| p.values[i]).sum();
            prop_assert!((s - v).norm() < 1e-12);
        }
    }
}
