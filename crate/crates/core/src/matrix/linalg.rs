//! Small dense helpers shared by the rest of the crate.

use std::hash::{Hash, Hasher};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

pub const EPS: f64 = f64::EPSILON;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Builds a complex matrix from real row-major entries.
pub fn from_real_rows(n: usize, rows: &[f64]) -> CMatrix {
    assert_eq!(rows.len(), n * n);
    CMatrix::from_fn(n, n, |i, j| c(rows[i * n + j], 0.0))
}

pub fn is_finite(a: &CMatrix) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn check_finite(a: &CMatrix) -> Result<()> {
    if is_finite(a) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = a.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Spectral (operator 2-) norm.
pub fn norm2(a: &CMatrix) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}

pub fn sigma_min(a: &CMatrix) -> f64 {
    singular_values(a).last().copied().unwrap_or(0.0)
}

pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()).scale(0.5)
}

pub fn skew_defect(a: &CMatrix) -> f64 {
    norm2(&(a - a.adjoint()))
}

/// Eigenvalues of a hermitian matrix, ascending.
pub fn herm_eigenvalues(a: &CMatrix) -> Vec<f64> {
    let h = hermitian_part(a);
    let mut v: Vec<f64> = nalgebra::linalg::SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

pub fn herm_min_eig(a: &CMatrix) -> f64 {
    herm_eigenvalues(a)[0]
}

pub fn herm_max_eig(a: &CMatrix) -> f64 {
    *herm_eigenvalues(a).last().unwrap()
}

pub fn inverse(a: &CMatrix) -> Option<CMatrix> {
    a.clone().try_inverse()
}

pub fn det(a: &CMatrix) -> C64 {
    a.clone().determinant()
}

/// Adjugate by cofactors; only used for small N.
pub fn adjugate(a: &CMatrix) -> CMatrix {
    let n = a.nrows();
    if n == 1 {
        return identity(1);
    }
    CMatrix::from_fn(n, n, |i, j| {
        let minor = a.clone().remove_row(j).remove_column(i);
        let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
        det(&minor) * sign
    })
}

/// Stable hash of the bit patterns, used in diagnostics.
pub fn matrix_hash(a: &CMatrix) -> u64 {
    let mut h = std::collections::hash_map::DefaultHasher::new();
    a.nrows().hash(&mut h);
    for z in a.iter() {
        z.re.to_bits().hash(&mut h);
        z.im.to_bits().hash(&mut h);
    }
    h.finish()
}

/// Eigenvalues via complex Schur form, sorted by (re, im).
///
/// The QR iteration occasionally stalls on exactly repeated eigenvalues; on
/// failure it is retried on a shifted, unitarily rotated copy.
pub fn eigenvalues(a: &CMatrix) -> Result<Vec<C64>> {
    check_finite(a)?;
    let n = a.nrows();
    if n == 1 {
        return Ok(vec![a[(0, 0)]]);
    }
    let scale = norm2(a).max(f64::MIN_POSITIVE);
    for attempt in 0..4 {
        let (b, shift) = if attempt == 0 {
            (a.clone(), c(0.0, 0.0))
        } else {
            let q = fixed_unitary(n, attempt);
            let shift = c(0.3183 * attempt as f64 * scale, 0.0);
            (q.adjoint() * (a + identity(n) * shift) * &q, shift)
        };
        let Some(schur) = nalgebra::linalg::Schur::try_new(b, EPS, 10_000) else {
            continue;
        };
        if let Some(ev) = schur.eigenvalues() {
            let mut v: Vec<C64> = ev.iter().map(|z| z - shift).collect();
            v.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
            return Ok(v);
        }
    }
    Err(Error::NoConvergence { hash: matrix_hash(a), dim: n })
}

/// Deterministic unitary (product of Givens rotations) used for retries.
fn fixed_unitary(n: usize, seed: usize) -> CMatrix {
    let mut q = identity(n);
    for k in 0..n - 1 {
        let theta = 0.7 + 0.45 * (seed * (k + 1)) as f64;
        let (s, co) = theta.sin_cos();
        let mut g = identity(n);
        g[(k, k)] = c(co, 0.0);
        g[(k + 1, k + 1)] = c(co, 0.0);
        g[(k, k + 1)] = c(0.0, s);
        g[(k + 1, k)] = c(0.0, s);
        q = q * g;
    }
    q
}

/// Right singular vectors of the `m` smallest singular values, with the
/// singular values in ascending order.
fn smallest_right(a: &CMatrix, m: usize) -> (CMatrix, Vec<f64>) {
    let n = a.ncols();
    let svd = a.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    let cols: Vec<_> = idx[..m].iter().map(|&k| v_t.row(k).adjoint()).collect();
    (CMatrix::from_columns(&cols), idx.iter().map(|&k| svd.singular_values[k]).collect())
}

/// Orthonormal basis (columns) of the singular vectors with σ ≤ tol.
pub fn kernel_basis(a: &CMatrix, tol: f64) -> CMatrix {
    let n = a.ncols();
    let (v, sv) = smallest_right(a, n);
    let k = sv.iter().take_while(|&&s| s <= tol).count();
    v.columns(0, k).into_owned()
}

/// The `m` right and left singular vectors belonging to the smallest singular
/// values, together with the ascending singular values.  The left vectors
/// come from a second decomposition of A* because the U factor loses
/// accuracy on the near-null space.
pub fn null_pairs(a: &CMatrix, m: usize) -> (CMatrix, CMatrix, Vec<f64>) {
    let (right, sv) = smallest_right(a, m);
    let (left, _) = smallest_right(&a.adjoint(), m);
    (right, left, sv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adjugate_times_matrix_is_det() {
        let a = from_real_rows(3, &[1.0, 2.0, 0.0, -1.0, 3.0, 1.0, 0.5, 0.0, 2.0]);
        let prod = adjugate(&a) * &a;
        let d = det(&a);
        assert!((prod - identity(3) * d).norm() < 1e-12);
    }

    #[test]
    fn kernel_of_rank_one() {
        let a = from_real_rows(2, &[1.0, 1.0, 1.0, 1.0]);
        let q = kernel_basis(&a, 1e-10);
        assert_eq!(q.ncols(), 1);
        assert!((&a * &q).norm() < 1e-12);
    }

    #[test]
    fn eigenvalues_sorted() {
        let a = from_real_rows(2, &[2.0, 0.0, 0.0, -1.0]);
        let ev = eigenvalues(&a).unwrap();
        assert!((ev[0].re + 1.0).abs() < 1e-14 && (ev[1].re - 2.0).abs() < 1e-14);
    }
}
