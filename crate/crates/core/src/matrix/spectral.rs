//! Eigenvalue clusters, spectral projectors and the functional calculus.

use serde::Serialize;

use super::linalg::{self, c, CMatrix, C64, EPS};
use crate::error::{Error, Result};
use crate::serial;

/// Relative tolerance on |Im λ| for "real spectrum".
pub const REAL_TOL_REL: f64 = 1e-8;

/// Number of trapezoid nodes on each contour circle.
pub const CONTOUR_NODES: usize = 64;

#[derive(Clone, Debug, Serialize)]
pub struct Cluster {
    #[serde(with = "serial::complex")]
    pub eigenvalue: C64,
    pub multiplicity: usize,
    #[serde(with = "serial::matrix")]
    pub projector: CMatrix,
    pub semisimple: bool,
    /// `multiplicity`-th smallest singular value of A - λ Id.
    pub margin: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralData {
    pub clusters: Vec<Cluster>,
    /// Effective clustering tolerance (after resolving the automatic default).
    pub cluster_tol: f64,
    /// Threshold used by the rank test.
    pub rank_tol: f64,
    pub norm: f64,
}

impl SpectralData {
    pub fn dim(&self) -> usize {
        self.clusters.iter().map(|c| c.multiplicity).sum()
    }

    pub fn is_semisimple(&self) -> bool {
        self.clusters.iter().all(|c| c.semisimple)
    }

    pub fn max_imag(&self) -> f64 {
        self.clusters.iter().map(|c| c.eigenvalue.im.abs()).fold(0.0, f64::max)
    }

    pub fn real_tol(&self) -> f64 {
        REAL_TOL_REL * self.norm
    }

    pub fn is_real(&self) -> bool {
        self.max_imag() <= self.real_tol()
    }

    /// Largest projector norm (the constant C2).
    pub fn max_projector_norm(&self) -> f64 {
        self.clusters.iter().map(|c| linalg::norm2(&c.projector)).fold(0.0, f64::max)
    }

    pub fn eigenvalues(&self) -> Vec<C64> {
        self.clusters.iter().map(|c| c.eigenvalue).collect()
    }

    /// Operator norm of Σ Π - Id and the largest ‖Πj Πk‖ for j ≠ k.
    pub fn partition_defects(&self) -> (f64, f64) {
        let n = self.dim();
        let mut sum = CMatrix::zeros(n, n);
        for cl in &self.clusters {
            sum += &cl.projector;
        }
        let sum_def = linalg::norm2(&(sum - linalg::identity(n)));
        let mut cross: f64 = 0.0;
        for (j, a) in self.clusters.iter().enumerate() {
            for (k, b) in self.clusters.iter().enumerate() {
                if j != k {
                    cross = cross.max(linalg::norm2(&(&a.projector * &b.projector)));
                }
            }
        }
        (sum_def, cross)
    }

    fn require_semisimple(&self) -> Result<()> {
        match self.clusters.iter().find(|c| !c.semisimple) {
            None => Ok(()),
            Some(cl) => Err(Error::NotSemisimple {
                eigenvalue: format!("{}", cl.eigenvalue),
                defect: cl.margin,
            }),
        }
    }
}

fn condition_numbers(a: &CMatrix, ev: &[C64]) -> Vec<f64> {
    let n = a.nrows();
    ev.iter()
        .map(|&l| {
            let m = a - linalg::identity(n) * l;
            let (v, w, _) = linalg::null_pairs(&m, 1);
            let overlap = (w.adjoint() * v)[(0, 0)].norm();
            if overlap > 0.0 {
                1.0 / overlap
            } else {
                f64::INFINITY
            }
        })
        .collect()
}

/// Single-linkage grouping of `ev` (already sorted) under the pairwise rule.
fn group_by<F: Fn(usize, usize) -> bool>(len: usize, close: F) -> Vec<Vec<usize>> {
    let mut label: Vec<usize> = (0..len).collect();
    fn find(label: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while label[r] != r {
            r = label[r];
        }
        label[i] = r;
        r
    }
    for i in 0..len {
        for j in (i + 1)..len {
            if close(i, j) {
                let (ri, rj) = (find(&mut label, i), find(&mut label, j));
                if ri != rj {
                    label[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_of: Vec<Option<usize>> = vec![None; len];
    for i in 0..len {
        let r = find(&mut label, i);
        match root_of[r] {
            Some(g) => groups[g].push(i),
            None => {
                root_of[r] = Some(groups.len());
                groups.push(vec![i]);
            }
        }
    }
    groups
}

/// Clusters the spectrum of `a`, computes projectors and flags semi-simplicity.
///
/// `cluster_tol = 0` selects the automatic tolerance eps·‖A‖·N.  Computed
/// eigenvalues of a multiple eigenvalue are scattered by roughly
/// κ·eps·‖A‖, so pairs are also merged when they are within that
/// perturbation radius (κ the eigenvalue condition numbers), capped at
/// eps^{1/4}·N·‖A‖ so that Jordan blocks up to size 3 are merged.
pub fn eigendecompose(a: &CMatrix, cluster_tol: f64) -> Result<SpectralData> {
    linalg::check_finite(a)?;
    let n = a.nrows();
    if n == 0 || a.ncols() != n {
        return Err(Error::Dimension(format!("expected a square matrix, got {}x{}", n, a.ncols())));
    }
    let norm = linalg::norm2(a);
    let tol = if cluster_tol > 0.0 { cluster_tol } else { EPS * norm * n as f64 };
    let rank_tol = tol.max(EPS.sqrt() * n as f64 * norm);
    if norm == 0.0 {
        return Ok(SpectralData {
            clusters: vec![Cluster {
                eigenvalue: c(0.0, 0.0),
                multiplicity: n,
                projector: linalg::identity(n),
                semisimple: true,
                margin: 0.0,
            }],
            cluster_tol: tol,
            rank_tol,
            norm,
        });
    }
    let ev = linalg::eigenvalues(a)?;
    let kappa = condition_numbers(a, &ev);
    let cap = EPS.sqrt().sqrt() * n as f64 * norm;
    let groups = group_by(ev.len(), |i, j| {
        let pert = (1e3 * EPS * norm * (kappa[i] + kappa[j])).min(cap);
        (ev[i] - ev[j]).norm() <= tol.max(pert)
    });

    let centers: Vec<C64> = groups
        .iter()
        .map(|g| g.iter().map(|&i| ev[i]).sum::<C64>() / g.len() as f64)
        .collect();

    let mut clusters = Vec::with_capacity(groups.len());
    for (gi, g) in groups.iter().enumerate() {
        let lambda = centers[gi];
        let m = g.len();
        let shifted = a - linalg::identity(n) * lambda;
        let (v, w, sv) = linalg::null_pairs(&shifted, m);
        let margin = sv[m - 1];
        let semisimple = margin <= rank_tol;
        let projector = if groups.len() == 1 {
            linalg::identity(n)
        } else if semisimple {
            let gram = w.adjoint() * &v;
            match gram.try_inverse() {
                Some(gi) => &v * gi * w.adjoint(),
                None => contour_for_group(a, g, &ev)?,
            }
        } else {
            contour_for_group(a, g, &ev)?
        };
        clusters.push(Cluster { eigenvalue: lambda, multiplicity: m, projector, semisimple, margin });
    }
    Ok(SpectralData { clusters, cluster_tol: tol, rank_tol, norm })
}

fn contour_for_group(a: &CMatrix, g: &[usize], ev: &[C64]) -> Result<CMatrix> {
    let members: Vec<C64> = g.iter().map(|&i| ev[i]).collect();
    let gap = ev
        .iter()
        .enumerate()
        .filter(|(i, _)| !g.contains(i))
        .flat_map(|(_, &z)| members.iter().map(move |&m| (z - m).norm()))
        .fold(f64::INFINITY, f64::min);
    Ok(spectral_projector(a, &members, gap)?.projector)
}

#[derive(Clone, Debug, Serialize)]
pub struct ContourProjector {
    #[serde(with = "serial::matrix")]
    pub projector: CMatrix,
    pub idempotency_defect: f64,
    pub circles: usize,
}

/// Riesz projector onto the eigenvalues enclosed by circles of radius
/// `gap/2` around the `cluster` points, by the trapezoid rule.
pub fn spectral_projector(a: &CMatrix, cluster: &[C64], gap: f64) -> Result<ContourProjector> {
    linalg::check_finite(a)?;
    let n = a.nrows();
    if cluster.is_empty() {
        return Err(Error::Invalid("empty cluster".into()));
    }
    if !(gap > 0.0) {
        return Err(Error::GapViolated(format!("gap must be positive, got {gap}")));
    }
    let r0 = 0.5 * gap;
    // merge members whose circles would overlap
    let groups = group_by(cluster.len(), |i, j| (cluster[i] - cluster[j]).norm() < gap);
    let circles: Vec<(C64, f64)> = groups
        .iter()
        .map(|g| {
            let center = g.iter().map(|&i| cluster[i]).sum::<C64>() / g.len() as f64;
            let spread = g.iter().map(|&i| (cluster[i] - center).norm()).fold(0.0, f64::max);
            (center, r0 + spread)
        })
        .collect();

    let ev = if n == 1 { vec![a[(0, 0)]] } else { linalg::eigenvalues(a)? };
    let mut inside = 0;
    for z in &ev {
        for &(center, r) in &circles {
            let d = (z - center).norm();
            if (d - r).abs() < 0.05 * r {
                return Err(Error::GapViolated(format!("eigenvalue {z} lies on a contour")));
            }
            if d < r {
                inside += 1;
                break;
            }
        }
    }
    if inside != cluster.len() {
        return Err(Error::GapViolated(format!(
            "{inside} eigenvalues enclosed, cluster has {}",
            cluster.len()
        )));
    }

    let id = linalg::identity(n);
    let mut p = CMatrix::zeros(n, n);
    for &(center, r) in &circles {
        for k in 0..CONTOUR_NODES {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / CONTOUR_NODES as f64;
            let e = C64::from_polar(1.0, theta);
            let z = center + e * r;
            let res = (&id * z - a)
                .try_inverse()
                .ok_or_else(|| Error::GapViolated(format!("resolvent singular at {z}")))?;
            p += res * (e * r / CONTOUR_NODES as f64);
        }
    }
    let idempotency_defect = linalg::norm2(&(&p * &p - &p));
    Ok(ContourProjector { projector: p, idempotency_defect, circles: circles.len() })
}

/// Σ f(λ) Π_λ for a matrix-valued f (f(λ) multiplies from the left).
pub fn functional_calculus<F: Fn(C64) -> CMatrix>(spec: &SpectralData, f: F) -> Result<CMatrix> {
    spec.require_semisimple()?;
    let n = spec.dim();
    let mut out = CMatrix::zeros(n, n);
    for cl in &spec.clusters {
        out += f(cl.eigenvalue) * &cl.projector;
    }
    Ok(out)
}

/// Σ f(λ) Π_λ for a scalar f.
pub fn functional_calculus_scalar<F: Fn(C64) -> C64>(spec: &SpectralData, f: F) -> Result<CMatrix> {
    spec.require_semisimple()?;
    let n = spec.dim();
    let mut out = CMatrix::zeros(n, n);
    for cl in &spec.clusters {
        out += &cl.projector * f(cl.eigenvalue);
    }
    Ok(out)
}

/// S = Σ Πj* Πj.
pub fn canonical_symmetrizer(spec: &SpectralData) -> Result<CMatrix> {
    spec.require_semisimple()?;
    if !spec.is_real() {
        return Err(Error::NotHyperbolic { imag: spec.max_imag(), tol: spec.real_tol() });
    }
    let n = spec.dim();
    let mut s = CMatrix::zeros(n, n);
    for cl in &spec.clusters {
        s += cl.projector.adjoint() * &cl.projector;
    }
    Ok(linalg::hermitian_part(&s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::linalg::from_real_rows;

    #[test]
    fn identity_is_one_cluster() {
        let sd = eigendecompose(&linalg::identity(2), 0.0).unwrap();
        assert_eq!(sd.clusters.len(), 1);
        assert_eq!(sd.clusters[0].multiplicity, 2);
        assert!(sd.clusters[0].semisimple);
        assert!((sd.clusters[0].eigenvalue - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn jordan_block_is_defective() {
        let sd = eigendecompose(&from_real_rows(2, &[0.0, 1.0, 0.0, 0.0]), 0.0).unwrap();
        assert_eq!(sd.clusters.len(), 1);
        assert_eq!(sd.clusters[0].multiplicity, 2);
        assert!(!sd.clusters[0].semisimple);
    }

    #[test]
    fn diagonal_projectors() {
        let sd = eigendecompose(&from_real_rows(2, &[1.0, 0.0, 0.0, 2.0]), 0.0).unwrap();
        assert_eq!(sd.clusters.len(), 2);
        assert!((&sd.clusters[0].projector - from_real_rows(2, &[1.0, 0.0, 0.0, 0.0])).norm() < 1e-12);
        assert!((&sd.clusters[1].projector - from_real_rows(2, &[0.0, 0.0, 0.0, 1.0])).norm() < 1e-12);
    }

    #[test]
    fn oblique_projector_matches_hand_diagonalization() {
        // P diag(0,1) P^{-1}, P = [[1,1],[0,1]]
        let a = from_real_rows(2, &[0.0, 1.0, 0.0, 1.0]);
        let sd = eigendecompose(&a, 0.0).unwrap();
        let p0 = from_real_rows(2, &[1.0, -1.0, 0.0, 0.0]);
        assert!((&sd.clusters[0].projector - p0).norm() < 1e-12);
    }

    #[test]
    fn contour_projector_diag() {
        let a = from_real_rows(2, &[0.0, 0.0, 0.0, 1.0]);
        let cp = spectral_projector(&a, &[c(0.0, 0.0)], 1.0).unwrap();
        assert!((cp.projector - from_real_rows(2, &[1.0, 0.0, 0.0, 0.0])).norm() < 1e-12);
        assert!(cp.idempotency_defect < 1e-12);
    }

    #[test]
    fn contour_rejects_bad_gap() {
        let a = from_real_rows(2, &[0.0, 0.0, 0.0, 1.0]);
        let err = spectral_projector(&a, &[c(0.0, 0.0)], 2.0).unwrap_err();
        assert!(err.to_string().contains("gap violated"));
    }

    #[test]
    fn canonical_of_oblique() {
        let a = from_real_rows(2, &[0.0, 1.0, 0.0, 1.0]);
        let s = canonical_symmetrizer(&eigendecompose(&a, 0.0).unwrap()).unwrap();
        let p0 = from_real_rows(2, &[1.0, -1.0, 0.0, 0.0]);
        let p1 = from_real_rows(2, &[0.0, 1.0, 0.0, 1.0]);
        let expect = p0.adjoint() * &p0 + p1.adjoint() * &p1;
        assert!((&s - expect).norm() < 1e-12);
        assert!(linalg::skew_defect(&(&s * &a)) < 1e-12);
    }

    #[test]
    fn canonical_rejects_rotation() {
        let a = from_real_rows(2, &[0.0, 1.0, -1.0, 0.0]);
        let err = canonical_symmetrizer(&eigendecompose(&a, 0.0).unwrap()).unwrap_err();
        assert!(err.to_string().contains("not hyperbolic"));
    }

    #[test]
    fn calculus_identity_and_square() {
        let a = from_real_rows(2, &[1.0, 0.0, 0.0, 2.0]);
        let sd = eigendecompose(&a, 0.0).unwrap();
        let one = functional_calculus_scalar(&sd, |_| c(1.0, 0.0)).unwrap();
        assert!((one - linalg::identity(2)).norm() < 1e-14);
        let same = functional_calculus_scalar(&sd, |l| l).unwrap();
        assert!((same - &a).norm() < 1e-14);
    }
}
