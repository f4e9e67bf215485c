//! Explicit symmetrizers for traceless 2×2 symbols φA1 + ψA2 near a double
//! point, where A1 has distinct real eigenvalues.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{self, c, linalg, CMatrix, C64};

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DoubleCase {
    /// A2 is a multiple of A1 (mod identity), so A = (φ + tψ)A1.
    Factored,
    /// Normal form A1 = diag(−1, 1), A2 = [[−a2, b2], [c2, a2]] with b2 > 0.
    Reduced,
}

#[derive(Clone, Debug, Serialize)]
pub struct Symmetrize2x2 {
    pub case: DoubleCase,
    #[serde(with = "crate::serial::matrix")]
    pub s: CMatrix,
    /// Reduced coefficients (a2, b2, c2) after the normalisations.
    #[serde(with = "crate::serial::complex_vec")]
    pub reduced: Vec<C64>,
    /// φ after absorbing Re a2 and the eigenvalue scale of A1.
    pub phi_reduced: f64,
    /// 2φ Im a2 + ψ Im(b2 c2) (must vanish).
    pub real_delta: f64,
    /// Re(b2 c2) − (Im a2)² (must be positive).
    pub positivity: f64,
    /// ‖SA − (SA)*‖ / (‖S‖‖A‖)
    pub symmetry_defect: f64,
    pub min_eig: f64,
}

fn check_traceless(m: &CMatrix, what: &str) -> Result<()> {
    if m.shape() != (2, 2) {
        return Err(Error::Dimension(format!("{what} must be 2x2")));
    }
    let tr = m[(0, 0)] + m[(1, 1)];
    if tr.norm() > 1e-12 * (1.0 + m.norm()) {
        return Err(Error::Invalid(format!("{what} is not traceless")));
    }
    Ok(())
}

/// Unit-normalised eigenvector columns of A1 for its eigenvalues −κ, κ,
/// with the largest component made real positive.
fn eigenframe(a1: &CMatrix) -> Result<(CMatrix, f64)> {
    let spec = matrix::eigendecompose(a1, 0.0)?;
    if spec.clusters.len() != 2 || !spec.is_real() {
        return Err(Error::Invalid("A1 must have two distinct real eigenvalues".into()));
    }
    let kappa = spec.clusters[1].eigenvalue.re;
    let mut cols = Vec::new();
    for cl in &spec.clusters {
        // range of the rank-one projector
        let p = &cl.projector;
        let j = (0..2).max_by(|&x, &y| p.column(x).norm().total_cmp(&p.column(y).norm())).unwrap();
        let mut v = p.column(j).into_owned();
        v /= c(v.norm(), 0.0);
        let big = (0..2).max_by(|&x, &y| v[x].norm().total_cmp(&v[y].norm())).unwrap();
        let phase = v[big] / c(v[big].norm(), 0.0);
        v /= phase;
        cols.push(v);
    }
    Ok((CMatrix::from_columns(&cols), kappa))
}

/// Symmetrizer S (hermitian positive, SA hermitian) of A = φA1 + ψA2 built
/// from the explicit normal form.  Fails when the normal form is not
/// strongly hyperbolic.
pub fn symmetrize_2x2(phi: f64, psi: f64, a1: &CMatrix, a2: &CMatrix) -> Result<Symmetrize2x2> {
    check_traceless(a1, "A1")?;
    check_traceless(a2, "A2")?;
    let a = a1 * c(phi, 0.0) + a2 * c(psi, 0.0);
    let (p, kappa) = eigenframe(a1)?;
    let pi = p.clone().try_inverse().ok_or_else(|| Error::Invalid("eigenframe singular".into()))?;
    // P⁻¹A1P = κ diag(−1, 1); rescale A2 by 1/κ so that A = κ(φ' diag(−1,1) + ψ Ã2)
    let a2r = &pi * a2 * &p * c(1.0 / kappa, 0.0);
    let t = (a2r[(0, 1)].norm() + a2r[(1, 0)].norm()) / (1.0 + a2r.norm());
    if t < 1e-12 {
        // A2 diagonal in the eigenframe of A1, hence a multiple of A1
        let s = matrix::canonical_symmetrizer(&matrix::eigendecompose(a1, 0.0)?)?;
        return finish(DoubleCase::Factored, s, &a, vec![a2r[(1, 1)], c(0.0, 0.0), c(0.0, 0.0)], phi, 0.0, f64::INFINITY);
    }
    let a2c = a2r[(1, 1)];
    let phi_r = phi * kappa + a2c.re * psi * kappa;
    let b2 = a2r[(0, 1)];
    let c2 = a2r[(1, 0)];
    if b2.norm() < 1e-14 {
        return Err(Error::DoublePoint(format!("b2 = 0 in the normal form (c2 = {c2})")));
    }
    let ph = b2 / c(b2.norm(), 0.0);
    let b2r = b2.norm();
    let c2r = c2 * ph;
    let im_a = a2c.im;
    let real_delta = 2.0 * (phi_r / kappa) * im_a + psi * (c2r * b2r).im;
    let positivity = (c2r * b2r).re - im_a * im_a;
    if real_delta.abs() > 1e-8 * (1.0 + phi.abs() + psi.abs()) * (1.0 + a2r.norm()) {
        return Err(Error::NotHyperbolic { imag: real_delta.abs(), tol: 1e-8 });
    }
    if !(positivity > 0.0) {
        return Err(Error::DoublePoint(format!("Re(b2 c2) - (Im a2)^2 = {positivity:e} <= 0")));
    }
    let s_red = CMatrix::from_row_slice(2, 2, &[c(c2r.re, 0.0), c(0.0, im_a), c(0.0, -im_a), c(b2r, 0.0)]);
    // total conjugation T = P D, D = diag(b2/|b2|, 1)
    let d = CMatrix::from_row_slice(2, 2, &[ph, c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
    let t_inv = (&p * d).try_inverse().expect("unitary times invertible");
    let s = t_inv.adjoint() * s_red * t_inv;
    finish(DoubleCase::Reduced, linalg::hermitian_part(&s), &a, vec![c(0.0, im_a), c(b2r, 0.0), c2r], phi_r / kappa, real_delta, positivity)
}

fn finish(
    case: DoubleCase,
    s: CMatrix,
    a: &CMatrix,
    reduced: Vec<C64>,
    phi_reduced: f64,
    real_delta: f64,
    positivity: f64,
) -> Result<Symmetrize2x2> {
    let sa = &s * a;
    let symmetry_defect = linalg::skew_defect(&sa) / (linalg::norm2(&s) * linalg::norm2(a)).max(1e-300);
    let min_eig = linalg::herm_min_eig(&s);
    Ok(Symmetrize2x2 { case, s, reduced, phi_reduced, real_delta, positivity, symmetry_defect, min_eig })
}

/// Symmetrizers along a path of (φ, ψ) samples; the phase of the eigenframe
/// is fixed by the normalisation in `eigenframe`, which is continuous as long
/// as the dominant component does not switch.
pub fn symmetrize_2x2_path(samples: &[(f64, f64)], a1: &CMatrix, a2: &CMatrix) -> Vec<Result<Symmetrize2x2>> {
    samples.iter().map(|&(phi, psi)| symmetrize_2x2(phi, psi, a1, a2)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(v: [f64; 4]) -> CMatrix {
        linalg::from_real_rows(2, &v)
    }

    #[test]
    fn symmetric_a2_gives_identity() {
        let r = symmetrize_2x2(0.3, 0.8, &m([-1.0, 0.0, 0.0, 1.0]), &m([0.0, 1.0, 1.0, 0.0])).unwrap();
        assert!((r.s.clone() - linalg::identity(2)).norm() < 1e-12, "{}", r.s);
    }

    #[test]
    fn skewed_a2_gives_diag() {
        let r = symmetrize_2x2(0.3, 0.8, &m([-1.0, 0.0, 0.0, 1.0]), &m([0.0, 2.0, 0.5, 0.0])).unwrap();
        let want = m([0.5, 0.0, 0.0, 2.0]);
        assert!((r.s.clone() - want).norm() < 1e-12, "{}", r.s);
        assert!(r.symmetry_defect < 1e-14);
    }

    #[test]
    fn non_diagonal_a1() {
        // A1 with eigenvalues ±2 in a skewed frame
        let t = m([1.0, 2.0, 0.0, 1.0]);
        let ti = t.clone().try_inverse().unwrap();
        let a1 = &t * m([-2.0, 0.0, 0.0, 2.0]) * &ti;
        let a2 = &t * CMatrix::from_row_slice(2, 2, &[c(0.3, 0.0), c(1.0, 0.5), c(2.0, -1.0), c(-0.3, 0.0)]) * &ti;
        for &(phi, psi) in &[(1.0, 0.0), (0.2, 0.7), (-1.0, 2.0)] {
            let r = symmetrize_2x2(phi, psi, &a1, &a2).unwrap();
            assert!(r.symmetry_defect < 1e-12 && r.min_eig > 0.0, "{r:?}");
        }
    }

    #[test]
    fn jordan_direction_rejected() {
        // ψ A2 nilpotent: b2 c2 = 0
        let e = symmetrize_2x2(0.0, 1.0, &m([-1.0, 0.0, 0.0, 1.0]), &m([0.0, 1.0, 0.0, 0.0])).unwrap_err();
        assert!(e.to_string().contains("not strongly hyperbolic at double point"), "{e}");
    }

    #[test]
    fn factored_case() {
        let r = symmetrize_2x2(0.4, 0.4, &m([1.0, 2.0, 0.0, -1.0]), &m([2.0, 4.0, 0.0, -2.0])).unwrap();
        assert!(matches!(r.case, DoubleCase::Factored));
        assert!(r.symmetry_defect < 1e-12);
    }
}
