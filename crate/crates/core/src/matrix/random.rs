//! Random matrix generators used by property tests and acceptance checks.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::linalg::{self, c, CMatrix, C64};

pub fn gaussian_matrix<R: Rng>(rng: &mut R, n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        c(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

pub fn hermitian<R: Rng>(rng: &mut R, n: usize) -> CMatrix {
    linalg::hermitian_part(&gaussian_matrix(rng, n))
}

/// Invertible matrix with condition number at most about `max_cond`.
pub fn well_conditioned<R: Rng>(rng: &mut R, n: usize, max_cond: f64) -> CMatrix {
    loop {
        let p = gaussian_matrix(rng, n) + linalg::identity(n) * c(1.5, 0.0);
        let s = linalg::singular_values(&p);
        if s[n - 1] > 0.0 && s[0] / s[n - 1] <= max_cond {
            return p;
        }
    }
}

/// Real eigenvalues in [-3, 3], possibly repeated (repetitions stay
/// semi-simple), with a well conditioned eigenbasis.
pub fn real_spectrum<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut ev: Vec<f64> = Vec::with_capacity(n);
    for k in 0..n {
        if k > 0 && rng.random_bool(0.2) {
            ev.push(ev[k - 1]);
        } else {
            // keep distinct values at least 0.05 apart
            loop {
                let x: f64 = rng.random_range(-3.0..3.0);
                if ev.iter().all(|y| (x - y).abs() >= 0.05) {
                    ev.push(x);
                    break;
                }
            }
        }
    }
    ev
}

/// P·diag(ev)·P⁻¹ with real `ev`.
pub fn semisimple_real<R: Rng>(rng: &mut R, n: usize) -> CMatrix {
    let ev = real_spectrum(rng, n);
    let p = well_conditioned(rng, n, 50.0);
    let d = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n, ev.iter().map(|&x| c(x, 0.0))));
    &p * d * p.try_inverse().expect("well conditioned")
}

/// Matrix with a Jordan block of size 2 or 3 (n ≥ 2) at a real eigenvalue;
/// the nilpotent coupling has modulus in [0.5, 2].
pub fn with_jordan_block<R: Rng>(rng: &mut R, n: usize) -> CMatrix {
    assert!(n >= 2);
    let ev = real_spectrum(rng, n);
    let block = if n >= 3 && rng.random_bool(0.3) { 3 } else { 2 };
    let mut t = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n, ev.iter().map(|&x| c(x, 0.0))));
    for k in 0..block {
        t[(k, k)] = c(ev[0], 0.0);
    }
    for k in 0..block - 1 {
        let phase = C64::from_polar(rng.random_range(0.5..2.0), rng.random_range(0.0..std::f64::consts::TAU));
        t[(k, k + 1)] = phase;
    }
    // the remaining eigenvalues must stay away from the block
    for k in block..n {
        if (t[(k, k)].re - ev[0]).abs() < 0.05 {
            t[(k, k)] = c(ev[0] + 0.5, 0.0);
        }
    }
    let p = well_conditioned(rng, n, 20.0);
    &p * t * p.try_inverse().expect("well conditioned")
}
