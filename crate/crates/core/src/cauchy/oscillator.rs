//! Perturbed harmonic oscillator −∂² + z² + iε(α+1)|z|^α in the Hermite basis.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{c, CMatrix, C64};

/// λ₁ = (α+1) ∫|x|^α e^{−x²} dx / ∫ e^{−x²} dx by double-exponential quadrature.
pub fn first_order_shift(alpha: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::Invalid(format!("alpha = {alpha} outside [0, 1)")));
    }
    use quadrature::double_exponential::integrate;
    // both integrands are even; e^{−x²} < 1e-300 beyond 27
    let num = integrate(|x: f64| x.powf(alpha) * (-x * x).exp(), 0.0, 27.0, 1e-15).integral;
    let den = integrate(|x: f64| (-x * x).exp(), 0.0, 27.0, 1e-15).integral;
    Ok((alpha + 1.0) * num / den)
}

/// Gauss–Jacobi rule for ∫_{−1}^{1} (1+x)^b f(x) dx by Golub–Welsch.
pub(crate) fn gauss_jacobi(q: usize, b: f64) -> (Vec<f64>, Vec<f64>) {
    // Jacobi(0, b) recurrence for monic polynomials
    let mut t = DMatrix::<f64>::zeros(q, q);
    for k in 0..q {
        let kf = k as f64;
        let s = 2.0 * kf + b;
        t[(k, k)] = if s + 2.0 == 0.0 || s == 0.0 { b / (b + 2.0) } else { b * b / (s * (s + 2.0)) };
        if k + 1 < q {
            let j = kf + 1.0;
            let s = 2.0 * j + b;
            let beta = 4.0 * j * j * (j + b) * (j + b) / (s * s * (s + 1.0) * (s - 1.0));
            t[(k, k + 1)] = beta.sqrt();
            t[(k + 1, k)] = beta.sqrt();
        }
    }
    let mu0 = 2f64.powf(b + 1.0) / (b + 1.0);
    let eig = SymmetricEigen::new(t);
    let mut pairs: Vec<(f64, f64)> =
        (0..q).map(|i| (eig.eigenvalues[i], mu0 * eig.eigenvectors[(0, i)].powi(2))).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Normalised Hermite functions ψ0..ψ_{n−1} at the points z (rows = index).
pub(crate) fn hermite_functions(z: &[f64], n: usize) -> DMatrix<f64> {
    let mut p = DMatrix::<f64>::zeros(n, z.len());
    for (col, &x) in z.iter().enumerate() {
        let mut prev = 0.0;
        let mut cur = std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp();
        for k in 0..n {
            p[(k, col)] = cur;
            let kf = k as f64;
            let next = (2.0 / (kf + 1.0)).sqrt() * x * cur - (kf / (kf + 1.0)).sqrt() * prev;
            prev = cur;
            cur = next;
        }
    }
    p
}

/// ∫_R |z|^α ψj ψk dz, j, k < n. Panels of width ¼ on [0, Z]; the first one
/// carries the z^α weight exactly.
pub(crate) fn abs_power_matrix(alpha: f64, n: usize) -> DMatrix<f64> {
    let q = 24;
    let h = 0.25;
    let zmax = (2.0 * n as f64 + 1.0).sqrt() + 12.0;
    let (xj, wj) = gauss_jacobi(q, alpha);
    let (xl, wl) = gauss_jacobi(q, 0.0);
    let mut z = Vec::new();
    let mut w = Vec::new();
    for (x, wt) in xj.iter().zip(&wj) {
        z.push(0.5 * h * (x + 1.0));
        w.push(wt * (0.5 * h).powf(alpha + 1.0));
    }
    let mut a = h;
    while a < zmax {
        for (x, wt) in xl.iter().zip(&wl) {
            let zz = a + 0.5 * h * (x + 1.0);
            z.push(zz);
            w.push(wt * 0.5 * h * zz.powf(alpha));
        }
        a += h;
    }
    let p = hermite_functions(&z, n);
    let mut pw = p.clone();
    for (col, wt) in w.iter().enumerate() {
        pw.column_mut(col).scale_mut(2.0 * wt);
    }
    let mut m = &pw * p.transpose();
    // odd products integrate to zero over R
    for j in 0..n {
        for k in 0..n {
            if (j + k) % 2 == 1 {
                m[(j, k)] = 0.0;
            }
        }
    }
    m
}

fn operator(alpha: f64, eps: f64, n: usize) -> CMatrix {
    let m = abs_power_matrix(alpha, n);
    CMatrix::from_fn(n, n, |j, k| {
        let d = if j == k { 2.0 * j as f64 + 1.0 } else { 0.0 };
        c(d, eps * (alpha + 1.0) * m[(j, k)])
    })
}

/// Eigenpair near `shift` of a complex symmetric matrix by Rayleigh-quotient
/// iteration with the unconjugated quotient xᵀHx / xᵀx.
fn rqi(h: &CMatrix, shift: C64) -> Result<(C64, DVector<C64>)> {
    let n = h.nrows();
    let mut x = DVector::<C64>::zeros(n);
    x[0] = c(1.0, 0.0);
    let mut mu = shift;
    for _ in 0..60 {
        let mut a = h.clone();
        for i in 0..n {
            a[(i, i)] -= mu;
        }
        let y = match a.lu().solve(&x) {
            Some(y) if y.iter().all(|v| v.re.is_finite() && v.im.is_finite()) => y,
            // exact hit of an eigenvalue
            _ => return Ok((mu, x)),
        };
        x = &y / c(y.norm(), 0.0);
        let hx = h * &x;
        let next = x.dot(&hx) / x.dot(&x);
        let done = (next - mu).norm() <= 1e-15 * next.norm();
        mu = next;
        if done {
            return Ok((mu, x));
        }
    }
    Ok((mu, x))
}

#[derive(Clone, Debug, Serialize)]
pub struct OscillatorStep {
    pub modes: usize,
    pub eigenvalue: [f64; 2],
    pub residual: f64,
    pub change: Option<f64>,
}

/// Residuals of the Gaussian e^{−z²/2} for the candidate values of β².
#[derive(Clone, Debug, Serialize)]
pub struct GaussianSubstitution {
    pub direct: [f64; 2],
    pub direct_residual: f64,
    /// the value i − 1 stated with the ansatz
    pub stated: [f64; 2],
    pub stated_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Oscillator {
    pub alpha: f64,
    pub eps: f64,
    pub beta_sq: [f64; 2],
    /// root of β² with negative imaginary part: e^{iβτ} grows like e^{|Im β|τ}
    pub beta: [f64; 2],
    pub modes: usize,
    pub residual: f64,
    pub history: Vec<OscillatorStep>,
    pub gaussian: GaussianSubstitution,
    /// Hermite coefficients of the ground state, normalised with a real ψ0 coefficient
    #[serde(skip)]
    pub groundstate: Vec<C64>,
}

#[derive(Clone, Copy, Debug)]
pub struct OscillatorOptions {
    pub n_modes: usize,
    pub max_modes: usize,
    pub tol: f64,
}

impl Default for OscillatorOptions {
    fn default() -> Self {
        OscillatorOptions { n_modes: 32, max_modes: 512, tol: 1e-8 }
    }
}

pub fn growing_root(beta_sq: C64) -> C64 {
    let b = beta_sq.sqrt();
    if b.im > 0.0 {
        -b
    } else {
        b
    }
}

/// Lowest eigenvalue of −∂² + z² + iε(α+1)|z|^α. The mode count doubles
/// until the eigenvalue moves by at most `tol` and the residual against the
/// doubled basis is at most `tol`.
pub fn oscillator_eigen(alpha: f64, eps: f64, n_modes: usize) -> Result<Oscillator> {
    oscillator_eigen_with(alpha, eps, OscillatorOptions { n_modes, ..Default::default() })
}

pub fn oscillator_eigen_with(alpha: f64, eps: f64, opts: OscillatorOptions) -> Result<Oscillator> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::Invalid(format!("alpha = {alpha} outside [0, 1)")));
    }
    if opts.n_modes < 32 {
        return Err(Error::Invalid("at least 32 Hermite modes are required".into()));
    }
    let mut n = opts.n_modes;
    let mut history: Vec<OscillatorStep> = Vec::new();
    let h = operator(alpha, eps, n);
    let lam1 = first_order_shift(alpha)?;
    let mut current = rqi(&h, c(1.0, eps * lam1))?;
    loop {
        if 2 * n > opts.max_modes {
            let trail: Vec<String> = history
                .iter()
                .map(|s| format!("n={} residual={:.2e} change={:.2e}", s.modes, s.residual, s.change.unwrap_or(f64::NAN)))
                .collect();
            return Err(Error::Convergence(format!("oscillator eigenvalue not converged: {}", trail.join("; "))));
        }
        let h2 = operator(alpha, eps, 2 * n);
        let (mu, x) = &current;
        let mut xp = DVector::<C64>::zeros(2 * n);
        xp.rows_mut(0, n).copy_from(x);
        let r = &h2 * &xp - &xp * *mu;
        let residual = r.norm() / xp.norm();
        let next = rqi(&h2, *mu)?;
        let change = (next.0 - mu).norm();
        history.push(OscillatorStep { modes: n, eigenvalue: [mu.re, mu.im], residual, change: Some(change) });
        let tol = opts.tol * mu.norm().max(1.0);
        if change <= tol && residual <= opts.tol {
            break;
        }
        n *= 2;
        current = next;
    }
    let (mu, x) = current;
    // fix the phase so that the ψ0 coefficient is real positive
    let ph = if x[0].norm() > 0.0 { x[0].conj() / c(x[0].norm(), 0.0) } else { c(1.0, 0.0) };
    let gs: Vec<C64> = x.iter().map(|v| v * ph).collect();
    let hfull = operator(alpha, eps, n);
    let e0 = hfull.column(0).into_owned();
    let sub = |cand: C64| {
        let mut r = e0.clone();
        r[0] -= cand;
        r.norm()
    };
    let direct = hfull[(0, 0)];
    let stated = c(-1.0, 1.0);
    let gaussian = GaussianSubstitution {
        direct: [direct.re, direct.im],
        direct_residual: sub(direct),
        stated: [stated.re, stated.im],
        stated_residual: sub(stated),
    };
    let beta = growing_root(mu);
    Ok(Oscillator {
        alpha,
        eps,
        beta_sq: [mu.re, mu.im],
        beta: [beta.re, beta.im],
        modes: n,
        residual: history.last().map(|s| s.residual).unwrap_or(0.0),
        history,
        gaussian,
        groundstate: gs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_jacobi_integrates_monomials() {
        let (x, w) = gauss_jacobi(8, 0.5);
        // ∫_{-1}^{1} (1+x)^{1/2} (1+x)^2 dx = 2^{3.5}/3.5
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * (1.0 + x).powi(2)).sum();
        assert!((s - 2f64.powf(3.5) / 3.5).abs() < 1e-13);
        let (x, w) = gauss_jacobi(5, 0.0);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(8)).sum();
        assert!((s - 2.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn hermite_functions_are_orthonormal() {
        let m = abs_power_matrix(0.0, 40);
        for j in 0..40 {
            for k in 0..40 {
                let e = if j == k { 1.0 } else { 0.0 };
                assert!((m[(j, k)] - e).abs() < 1e-12, "{j} {k} {}", m[(j, k)]);
            }
        }
    }

    #[test]
    fn unperturbed_ground_state() {
        let o = oscillator_eigen(0.0, 0.0, 32).unwrap();
        assert!((c(o.beta_sq[0], o.beta_sq[1]) - c(1.0, 0.0)).norm() < 1e-12);
        assert!((o.groundstate[0].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_substitution_gives_one_plus_i() {
        let o = oscillator_eigen(0.0, 1.0, 32).unwrap();
        assert!((c(o.beta_sq[0], o.beta_sq[1]) - c(1.0, 1.0)).norm() < 1e-12);
        assert!(o.residual < 1e-8);
        assert!(o.gaussian.direct_residual < 1e-12);
        assert!((o.gaussian.stated_residual - 2.0).abs() < 1e-12);
        // |Im β| = 2^{1/4} sin(π/8)
        let expected = 2f64.powf(0.25) * (std::f64::consts::PI / 8.0).sin();
        assert!((o.beta[1] + expected).abs() < 1e-12);
    }

    #[test]
    fn rough_potential_converges_only_algebraically() {
        match oscillator_eigen(0.5, 1.0, 32) {
            Err(Error::Convergence(msg)) => assert!(msg.contains("n=256"), "{msg}"),
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn small_eps_slope_is_first_order_shift() {
        let opts = OscillatorOptions { n_modes: 64, max_modes: 256, tol: 1e-4 };
        for alpha in [0.25, 0.5] {
            let lam1 = first_order_shift(alpha).unwrap();
            let im: Vec<f64> = [1e-3, 2e-3]
                .iter()
                .map(|&e| oscillator_eigen_with(alpha, e, opts).unwrap().beta_sq[1] / e)
                .collect();
            // Im β²/ε = λ₁ + O(ε)
            let slope0 = 2.0 * im[0] - im[1];
            assert!((slope0 - lam1).abs() < 1e-6, "{alpha}: {im:?} vs {lam1}");
        }
    }
}
