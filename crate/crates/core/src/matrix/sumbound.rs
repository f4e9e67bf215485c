//! The combinatorial bound ‖Σ Sj pj‖ ≤ C_m K1 K2 ε for families whose
//! partial sums over index subsets are controlled by the gaps of μ.

use rand::Rng;
use serde::Serialize;

use super::linalg::{self, CMatrix};
use super::random;

#[derive(Clone, Debug, Serialize)]
pub struct SumBoundReport {
    pub bound_holds: bool,
    pub hypotheses_hold: bool,
    /// Which hypotheses failed, one message per violated inequality.
    pub violations: Vec<String>,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub c_m: f64,
}

/// C_m from C_1 = 0, C_m = 1 + 2 C_{m-1}.
pub fn c_m(m: usize) -> f64 {
    let mut c = 0.0;
    for _ in 1..m {
        c = 1.0 + 2.0 * c;
    }
    c
}

fn subset_gap(mu: &[f64], mask: u32) -> f64 {
    let m = mu.len();
    let mut gap = f64::INFINITY;
    for j in 0..m {
        if mask & (1 << j) == 0 {
            continue;
        }
        for k in 0..m {
            if mask & (1 << k) == 0 {
                gap = gap.min((mu[j] - mu[k]).abs());
            }
        }
    }
    gap
}

fn subset_sum(p: &[CMatrix], mask: u32) -> CMatrix {
    let n = p[0].nrows();
    let mut s = CMatrix::zeros(n, p[0].ncols());
    for (j, pj) in p.iter().enumerate() {
        if mask & (1 << j) != 0 {
            s += pj;
        }
    }
    s
}

pub fn sum_bound_check(s: &[CMatrix], p: &[CMatrix], mu: &[f64], eps: f64, k1: f64, k2: f64) -> SumBoundReport {
    let m = s.len();
    assert!(m >= 1 && p.len() == m && mu.len() == m && m <= 20);
    let slack = 1.0 + 1e-9;
    let mut violations = Vec::new();
    for j in 0..m {
        for k in (j + 1)..m {
            let d = linalg::norm2(&(&s[j] - &s[k]));
            if d > k1 * (mu[j] - mu[k]).abs() * slack + 1e-14 {
                violations.push(format!("|S{} - S{}| = {:.6e} > K1 |mu{} - mu{}|", j + 1, k + 1, d, j + 1, k + 1));
            }
        }
    }
    let full = (1u32 << m) - 1;
    for mask in 1..full {
        let pj = linalg::norm2(&subset_sum(p, mask));
        let bound = k2 * eps / subset_gap(mu, mask);
        if pj > bound * slack + 1e-14 {
            let idx: Vec<usize> = (0..m).filter(|j| mask & (1 << j) != 0).map(|j| j + 1).collect();
            violations.push(format!("|P_J| = {pj:.6e} > K2 eps / gap_J = {bound:.6e} for J = {idx:?}"));
        }
    }
    let total = linalg::norm2(&subset_sum(p, full));
    let scale = p.iter().map(linalg::norm2).fold(0.0, f64::max);
    if total > 1e-12 * scale.max(1e-300) && total > 0.0 {
        violations.push(format!("sum of all p_j has norm {total:.6e}, expected 0"));
    }

    let n = s[0].nrows();
    let mut sum = CMatrix::zeros(n, p[0].ncols());
    for j in 0..m {
        sum += &s[j] * &p[j];
    }
    let lhs = linalg::norm2(&sum);
    let cm = c_m(m);
    let rhs = cm * k1 * k2 * eps;
    let ratio = if lhs == 0.0 { 0.0 } else { lhs / rhs };
    SumBoundReport {
        bound_holds: lhs <= rhs * slack + 1e-13 * scale.max(1.0),
        hypotheses_hold: violations.is_empty(),
        violations,
        lhs,
        rhs,
        ratio,
        c_m: cm,
    }
}

/// A randomly generated instance satisfying all hypotheses with K1 = K2 = 1
/// (up to the stated `k1`, `k2` scalings).
#[derive(Clone, Debug)]
pub struct SumBoundInstance {
    pub s: Vec<CMatrix>,
    pub p: Vec<CMatrix>,
    pub mu: Vec<f64>,
    pub eps: f64,
    pub k1: f64,
    pub k2: f64,
}

impl SumBoundInstance {
    pub fn check(&self) -> SumBoundReport {
        sum_bound_check(&self.s, &self.p, &self.mu, self.eps, self.k1, self.k2)
    }
}

/// S_j follow a K1-Lipschitz path in μ; p_j are random with zero sum; ε is
/// the smallest value for which every partial-sum bound holds.
pub fn random_admissible<R: Rng>(rng: &mut R, m: usize, n: usize) -> SumBoundInstance {
    let k1 = rng.random_range(0.5..2.0);
    let k2 = rng.random_range(0.5..2.0);
    let mut mu: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
    // occasionally squeeze two points together to exercise small gaps
    if m >= 2 && rng.random_bool(0.3) {
        mu[1] = mu[0] + rng.random_range(1e-4..1e-2);
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| mu[a].total_cmp(&mu[b]));
    let mut s = vec![CMatrix::zeros(n, n); m];
    let mut cur = random::gaussian_matrix(rng, n);
    for (step, &j) in order.iter().enumerate() {
        if step > 0 {
            let prev = order[step - 1];
            let dmu = mu[j] - mu[prev];
            let dir = random::gaussian_matrix(rng, n);
            let len = rng.random_range(0.0..=1.0) * k1 * dmu;
            cur += dir.scale(len / linalg::norm2(&dir));
        }
        s[j] = cur.clone();
    }
    let mut p: Vec<CMatrix> = (0..m).map(|_| random::gaussian_matrix(rng, n)).collect();
    let mean = p.iter().fold(CMatrix::zeros(n, n), |acc, x| acc + x) / crate::matrix::c(m as f64, 0.0);
    for pj in p.iter_mut() {
        *pj -= &mean;
    }
    // m = 1 forces p_1 = 0
    let full = (1u32 << m) - 1;
    let mut eps: f64 = 0.0;
    for mask in 1..full {
        let pj = linalg::norm2(&subset_sum(&p, mask));
        eps = eps.max(pj * subset_gap(&mu, mask) / k2);
    }
    if m == 1 {
        eps = 1.0;
    }
    SumBoundInstance { s, p, mu, eps, k1, k2 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::linalg::from_real_rows;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constants() {
        assert_eq!(c_m(1), 0.0);
        assert_eq!(c_m(2), 1.0);
        assert_eq!(c_m(5), 15.0);
    }

    #[test]
    fn single_term_is_void() {
        let z = CMatrix::zeros(2, 2);
        let r = sum_bound_check(&[linalg::identity(2)], &[z], &[0.3], 1.0, 1.0, 1.0);
        assert!(r.bound_holds && r.hypotheses_hold && r.lhs == 0.0);
    }

    #[test]
    fn two_term_cancellation_is_sharp() {
        let (mu1, mu2, eps) = (0.0, 0.5, 0.01);
        let p = from_real_rows(2, &[1.0, 0.0, 0.0, 0.0]) * crate::matrix::c(eps / (mu2 - mu1), 0.0);
        let s1 = linalg::identity(2);
        let s2 = &s1 + linalg::identity(2) * crate::matrix::c(mu2 - mu1, 0.0);
        let r = sum_bound_check(&[s1, s2], &[p.clone(), -p], &[mu1, mu2], eps, 1.0, 1.0);
        assert!(r.hypotheses_hold, "{:?}", r.violations);
        assert!((r.ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn violations_are_reported() {
        let p = linalg::identity(2);
        let r = sum_bound_check(
            &[linalg::identity(2), linalg::identity(2) * crate::matrix::c(5.0, 0.0)],
            &[p.clone(), p],
            &[0.0, 1.0],
            1e-3,
            1.0,
            1.0,
        );
        assert!(!r.hypotheses_hold);
        assert!(r.violations.iter().any(|v| v.contains("K1")));
        assert!(r.violations.iter().any(|v| v.contains("expected 0")));
    }

    #[test]
    fn random_instances_satisfy_hypotheses() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for m in 1..=5 {
            for _ in 0..50 {
                let inst = random_admissible(&mut rng, m, 3);
                let r = inst.check();
                assert!(r.hypotheses_hold, "{:?}", r.violations);
                assert!(r.bound_holds, "ratio {}", r.ratio);
            }
        }
    }
}
