//! Fixed inputs shared by the benchmarks.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use symlab_core::matrix::{c, random, CMatrix};
use symlab_core::wavepacket::GridFunction;

pub fn semisimple(n: usize, count: usize) -> Vec<CMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    (0..count).map(|_| random::semisimple_real(&mut rng, n)).collect()
}

pub fn noise(n: usize) -> GridFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut u = GridFunction::zeros(1, n, PI, 1).expect("power-of-two grid");
    for v in u.values.iter_mut() {
        *v = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    }
    u
}

#[cfg(test)]
mod tests {
    #[test]
    fn fixtures_are_reproducible() {
        assert_eq!(super::semisimple(3, 2), super::semisimple(3, 2));
        assert_eq!(super::noise(64).values, super::noise(64).values);
    }
}
