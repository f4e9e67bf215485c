//! Full symmetrizers 𝐒(ξ̃) over all space-time frequencies and the passage
//! between them and symmetrizers in a fixed time direction.

use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use super::family::{combine, FamilySpec, SymbolFamily};
use crate::error::{Error, Result};
use crate::matrix::{self, c, linalg, random, CMatrix};
use crate::sampling;

/// Relative singular value threshold for "characteristic sample".
pub const KER_TOL: f64 = 1e-8;

type FieldFn = dyn Fn(&[f64], &[f64]) -> Result<CMatrix> + Send + Sync;

/// A matrix field on parameters × unit frequencies.
#[derive(Clone)]
pub struct FullSymmetrizerField {
    f: Arc<FieldFn>,
    pub description: String,
}

impl std::fmt::Debug for FullSymmetrizerField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "FullSymmetrizerField({})", self.description)
    }
}

impl FullSymmetrizerField {
    pub fn new<F>(description: &str, f: F) -> Self
    where
        F: Fn(&[f64], &[f64]) -> Result<CMatrix> + Send + Sync + 'static,
    {
        FullSymmetrizerField { f: Arc::new(f), description: description.to_string() }
    }

    /// Evaluates at ξ̃/|ξ̃| (the field is homogeneous of degree 0).
    pub fn eval(&self, a: &[f64], xi_tilde: &[f64]) -> Result<CMatrix> {
        let n = sampling::norm(xi_tilde);
        if n == 0.0 {
            return Err(Error::Invalid("full symmetrizer evaluated at zero frequency".into()));
        }
        let unit: Vec<f64> = xi_tilde.iter().map(|x| x / n).collect();
        (self.f)(a, &unit)
    }

    pub fn scaled(&self, s: f64) -> Self {
        let inner = self.f.clone();
        FullSymmetrizerField::new(&format!("{} x {s}", self.description), move |a, xi| Ok(inner(a, xi)? * c(s, 0.0)))
    }
}

/// The canonical symmetrizer S(a, ξ) = S_A L(a,ν)⁻¹ in direction ν, with
/// A = L(a,ν)⁻¹L(a,ξ).
pub fn canonical_in_direction(fam: &SymbolFamily, a: &[f64], nu: &[f64], xi: &[f64]) -> Result<CMatrix> {
    let cs = fam.coefficients(a)?;
    let j = combine(&cs, nu);
    let ji = j.clone().try_inverse().ok_or_else(|| Error::Characteristic(nu.to_vec()))?;
    let amat = &ji * combine(&cs, xi);
    let spec = matrix::eigendecompose(&amat, 0.0)?;
    Ok(matrix::canonical_symmetrizer(&spec)? * ji)
}

fn smooth_step(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
}

/// Cutoff equal to 1 within chord distance ρ/2 of the line ℝν and 0 beyond ρ.
pub fn line_cutoff(dist: f64, rho: f64) -> f64 {
    1.0 - smooth_step((dist - 0.5 * rho) / (0.5 * rho))
}

/// 𝐒(ξ + τν) = (1−χ) S(ξ/|ξ|) + χ L(ξ̃)⁻¹ with χ a smooth cutoff around the
/// line ℝν of radius `rho` (both rays ±ν are excluded from the domain of S).
pub fn full_from_symmetrizer<S>(s_field: S, fam: &SymbolFamily, nu: &[f64], rho: f64) -> FullSymmetrizerField
where
    S: Fn(&[f64], &[f64]) -> Result<CMatrix> + Send + Sync + 'static,
{
    let fam = fam.clone();
    let nu_hat = sampling::normalize(nu);
    FullSymmetrizerField::new("extended symmetrizer", move |a, xi_t| {
        let tau = sampling::dot(xi_t, &nu_hat);
        let xi_e: Vec<f64> = xi_t.iter().zip(&nu_hat).map(|(x, n)| x - tau * n).collect();
        let dist = sampling::norm(&xi_e);
        let chi = if dist >= rho { 0.0 } else { line_cutoff(dist, rho) };
        let mut out = if chi < 1.0 {
            let unit: Vec<f64> = xi_e.iter().map(|x| x / dist).collect();
            s_field(a, &unit)? * c(1.0 - chi, 0.0)
        } else {
            CMatrix::zeros(fam.n, fam.n)
        };
        if chi > 0.0 {
            let l = fam.eval(a, xi_t)?;
            let sv = linalg::singular_values(&l);
            if !(sv[fam.n - 1] > 1e-10 * sv[0]) {
                return Err(Error::CutoffTooWide(xi_t.to_vec()));
            }
            out += l.try_inverse().ok_or_else(|| Error::CutoffTooWide(xi_t.to_vec()))? * c(chi, 0.0);
        }
        Ok(out)
    })
}

/// Kernel basis of L (orthonormal columns) at relative tolerance KER_TOL.
pub fn kernel_of(l: &CMatrix) -> CMatrix {
    let scale = linalg::norm2(l).max(1e-300);
    linalg::kernel_basis(l, KER_TOL * scale)
}

/// min eig of Q* Herm(M) Q.
fn compressed_min(q: &CMatrix, m: &CMatrix) -> f64 {
    let h = q.adjoint() * linalg::hermitian_part(m) * q;
    linalg::herm_min_eig(&h)
}

/// Characteristic frequencies ξ − μν generated from the eigenvalues μ of
/// L(ν)⁻¹L(ξ), one per cluster, normalized to the unit sphere.
pub fn characteristic_points(fam: &SymbolFamily, a: &[f64], nu: &[f64], xi: &[f64]) -> Result<Vec<Vec<f64>>> {
    let cs = fam.coefficients(a)?;
    let j = combine(&cs, nu);
    let ji = j.try_inverse().ok_or_else(|| Error::Characteristic(nu.to_vec()))?;
    let spec = matrix::eigendecompose(&(ji * combine(&cs, xi)), 0.0)?;
    Ok(spec
        .clusters
        .iter()
        .map(|cl| sampling::normalize(&xi.iter().zip(nu).map(|(x, n)| x - cl.eigenvalue.re * n).collect::<Vec<_>>()))
        .collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct PositivityReport {
    pub c: f64,
    pub worst_sample: Vec<f64>,
    pub characteristic_samples: usize,
    pub vacuous: bool,
}

/// min over characteristic samples of min-eig(Q* Herm(𝐒(ξ̃) L(ν)) Q).
pub fn full_positivity_check(
    field: &FullSymmetrizerField,
    fam: &SymbolFamily,
    a: &[f64],
    nu: &[f64],
    e_samples: &[Vec<f64>],
) -> Result<PositivityReport> {
    let j = fam.eval(a, nu)?;
    let mut out = PositivityReport { c: f64::INFINITY, worst_sample: Vec::new(), characteristic_samples: 0, vacuous: true };
    for xi in e_samples {
        for xt in characteristic_points(fam, a, nu, xi)? {
            let l = fam.eval(a, &xt)?;
            let q = kernel_of(&l);
            if q.ncols() == 0 {
                continue;
            }
            out.characteristic_samples += 1;
            let v = compressed_min(&q, &(field.eval(a, &xt)? * &j));
            if v < out.c {
                out.c = v;
                out.worst_sample = xt.clone();
            }
        }
    }
    out.vacuous = out.characteristic_samples == 0;
    if out.vacuous {
        out.c = 0.0;
    }
    Ok(out)
}

/// Checks of the kernel identities for one triple (L, 𝐒, J).
#[derive(Clone, Debug, Serialize)]
pub struct PspReport {
    pub kernel_dim: usize,
    /// ‖Π*𝐒JΠ − Π*𝐒J‖ / (‖Π‖²‖𝐒J‖)
    pub eq_pi_s_pi: f64,
    /// ‖Π‖ / (‖𝐒J‖ / c)
    pub norm_pi_ratio: f64,
    pub c: f64,
    /// ‖Q*𝐒L‖ / (‖𝐒‖‖L‖): 𝐒 maps range L into (ker L)^⊥
    pub range_defect: f64,
    /// k-th singular value of Q*𝐒 relative to ‖𝐒‖: positive iff the
    /// preimage of (ker L)^⊥ is exactly range L
    pub preimage_margin: f64,
    pub ortho_ok: bool,
    pub semisimple_zero: bool,
}

pub fn psp_check(l: &CMatrix, s_full: &CMatrix, j: &CMatrix, projector: &CMatrix) -> PspReport {
    let q = kernel_of(l);
    let k = q.ncols();
    let sj = s_full * j;
    let norm_sj = linalg::norm2(&sj).max(1e-300);
    let pn = linalg::norm2(projector);
    let eq = linalg::norm2(&(projector.adjoint() * &sj * projector - projector.adjoint() * &sj)) / (pn * pn * norm_sj).max(1e-300);
    let cpos = if k > 0 { compressed_min(&q, &sj) } else { f64::INFINITY };
    let norm_ratio = pn / (norm_sj / cpos);
    let scale = (linalg::norm2(s_full) * linalg::norm2(l)).max(1e-300);
    let range_defect = if k > 0 { linalg::norm2(&(q.adjoint() * s_full * l)) / scale } else { 0.0 };
    let preimage_margin = if k > 0 {
        let sv = linalg::singular_values(&(q.adjoint() * s_full));
        sv[k - 1] / linalg::norm2(s_full).max(1e-300)
    } else {
        1.0
    };
    let ji = j.clone().try_inverse();
    let semisimple_zero = ji.map_or(false, |ji| {
        let aj = ji * l;
        let nrm = linalg::norm2(&aj).max(1e-300);
        // 0 is semisimple iff ker A_J ∩ range A_J = 0 iff rank(A_J²) = rank(A_J)
        let r1 = linalg::singular_values(&aj).iter().filter(|&&s| s > 1e-8 * nrm).count();
        let r2 = linalg::singular_values(&(&aj * &aj)).iter().filter(|&&s| s > 1e-8 * nrm * nrm).count();
        r1 == r2
    });
    PspReport {
        kernel_dim: k,
        eq_pi_s_pi: eq,
        norm_pi_ratio: norm_ratio,
        c: cpos,
        range_defect,
        preimage_margin,
        ortho_ok: range_defect <= 1e-8 && preimage_margin > 1e-8,
        semisimple_zero,
    }
}

/// Random triple (J, L, 𝐒) with ker L ≠ 0, 𝐒L hermitian and 𝐒J positive on
/// ker L, with the exact kernel projector of J⁻¹L.
#[derive(Clone, Debug)]
pub struct PspInstance {
    pub j: CMatrix,
    pub l: CMatrix,
    pub s_full: CMatrix,
    pub projector: CMatrix,
}

pub fn random_psp_instance<R: Rng>(rng: &mut R, n: usize) -> PspInstance {
    assert!(n >= 2);
    let k = rng.random_range(1..n);
    let p = random::well_conditioned(rng, n, 20.0);
    let pi = p.clone().try_inverse().expect("well conditioned");
    let mut d = vec![0.0; n];
    for x in d.iter_mut().skip(k) {
        let mag = rng.random_range(0.3..3.0);
        *x = if rng.random_bool(0.5) { mag } else { -mag };
    }
    let diag = |v: &[f64]| CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n, v.iter().map(|&x| c(x, 0.0))));
    let aj = &p * diag(&d) * &pi;
    let j = random::well_conditioned(rng, n, 20.0);
    let l = &j * &aj;
    let lam: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..2.0)).collect();
    let h = pi.adjoint() * diag(&lam) * &pi;
    let kmat = random::hermitian(rng, n) * c(0.3, 0.0);
    let s_full = h * j.clone().try_inverse().expect("invertible") + l.adjoint() * kmat;
    let e: Vec<f64> = (0..n).map(|i| if i < k { 1.0 } else { 0.0 }).collect();
    let projector = &p * diag(&e) * &pi;
    PspInstance { j, l, s_full, projector }
}

/// Output of the full-to-direction construction at one (a, ξ).
#[derive(Clone, Debug, Serialize)]
pub struct FromFull {
    #[serde(with = "crate::serial::matrix")]
    pub s: CMatrix,
    pub per_root: Vec<PspReport>,
    /// ‖SJ − (SJ)*‖ / ‖SJ‖
    pub sj_defect: f64,
    /// ‖SL(ξ) − (SL(ξ))*‖ / (‖S‖‖L(ξ)‖)
    pub sl_defect: f64,
    /// min eig Herm(SJ)
    pub c1: f64,
}

/// S = (Σ_μ Π_μ* 𝐒(ξ − μν) J Π_μ) J⁻¹ with J = L(ν), μ the eigenvalues of
/// J⁻¹L(ξ) and Π_μ their projectors.
pub fn symmetrizer_from_full(field: &FullSymmetrizerField, fam: &SymbolFamily, a: &[f64], nu: &[f64], xi: &[f64]) -> Result<FromFull> {
    let cs = fam.coefficients(a)?;
    let j = combine(&cs, nu);
    let ji = j.clone().try_inverse().ok_or_else(|| Error::Characteristic(nu.to_vec()))?;
    let lxi = combine(&cs, xi);
    let spec = matrix::eigendecompose(&(&ji * &lxi), 0.0)?;
    if !spec.is_semisimple() {
        return Err(Error::NotSemisimple { eigenvalue: "cluster".into(), defect: spec.max_imag() });
    }
    if !spec.is_real() {
        return Err(Error::NotHyperbolic { imag: spec.max_imag(), tol: spec.real_tol() });
    }
    let n = fam.n;
    let mut sj = CMatrix::zeros(n, n);
    let mut per_root = Vec::new();
    for cl in &spec.clusters {
        let mu = cl.eigenvalue.re;
        let xt: Vec<f64> = xi.iter().zip(nu).map(|(x, v)| x - mu * v).collect();
        let sfull = field.eval(a, &xt)?;
        let l_at = combine(&cs, &xt);
        let rep = psp_check(&l_at, &sfull, &j, &cl.projector);
        if rep.eq_pi_s_pi > 1e-8 {
            return Err(Error::FullSymmetrizerInconsistent { sample: xt, defect: rep.eq_pi_s_pi });
        }
        per_root.push(rep);
        sj += cl.projector.adjoint() * &sfull * &j * &cl.projector;
    }
    let sj_norm = linalg::norm2(&sj).max(1e-300);
    let sj_defect = linalg::skew_defect(&sj) / sj_norm;
    let sjh = linalg::hermitian_part(&sj);
    let c1 = linalg::herm_min_eig(&sjh);
    let s = sjh * ji;
    let sl_defect = linalg::skew_defect(&(&s * &lxi)) / (linalg::norm2(&s) * linalg::norm2(&lxi)).max(1e-300);
    Ok(FromFull { s, per_root, sj_defect, sl_defect, c1 })
}

#[derive(Clone, Debug, Serialize)]
pub struct HomotopyReport {
    pub t: Vec<f64>,
    pub values: Vec<f64>,
    pub c: f64,
    pub bound_holds: bool,
}

/// Kernel-compressed positivity of 𝐒 J_t along J_t = (1−t)J0 + tJ1 at a
/// characteristic frequency ξ̃.
pub fn homotopy_positivity(
    fam: &SymbolFamily,
    a: &[f64],
    xi_tilde: &[f64],
    j0: &CMatrix,
    j1: &CMatrix,
    field: &FullSymmetrizerField,
    t_grid: &[f64],
) -> Result<HomotopyReport> {
    let l = fam.eval(a, xi_tilde)?;
    let q = kernel_of(&l);
    if q.ncols() == 0 {
        return Err(Error::Invalid(format!("{xi_tilde:?} is not characteristic")));
    }
    let sfull = field.eval(a, xi_tilde)?;
    let mut values = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let jt = j0 * c(1.0 - t, 0.0) + j1 * c(t, 0.0);
        let ji = jt.clone().try_inverse().ok_or_else(|| Error::Invalid(format!("J_t singular at t = {t}")))?;
        if t < 1.0 {
            let spec = matrix::eigendecompose(&(ji * &l), 0.0)?;
            let zero = spec
                .clusters
                .iter()
                .min_by(|x, y| x.eigenvalue.norm().total_cmp(&y.eigenvalue.norm()))
                .expect("nonempty");
            if !zero.semisimple {
                return Err(Error::Invalid(format!("0 is not semi-simple for J_t^-1 L at t = {t}")));
            }
        }
        values.push(compressed_min(&q, &(&sfull * &jt)));
    }
    let c0 = linalg::herm_min_eig(&(q.adjoint() * linalg::hermitian_part(&(&sfull * j0)) * &q));
    let bound_holds = t_grid.iter().zip(&values).all(|(&t, &v)| v >= (1.0 - t) * c0 - 1e-10 * (1.0 + c0.abs()));
    Ok(HomotopyReport { t: t_grid.to_vec(), values, c: c0, bound_holds })
}

/// The reduced family in direction ν′ together with a symmetrizer obtained
/// by extending the canonical ν-symmetrizer to a full symmetrizer and
/// projecting it back in direction ν′.
pub struct ChangedDirection {
    pub family: SymbolFamily,
    pub nu_prime: Vec<f64>,
    pub field: FullSymmetrizerField,
    base: SymbolFamily,
}

impl ChangedDirection {
    /// Symmetrizer for the original family in direction ν′ at (a, ξ ∈ ν′^⊥).
    pub fn symmetrizer(&self, a: &[f64], xi: &[f64]) -> Result<FromFull> {
        symmetrizer_from_full(&self.field, &self.base, a, &self.nu_prime, xi)
    }

    /// Symmetrizer of the reduced family L(ν′)⁻¹L(ξ): S·L(ν′).
    pub fn reduced_symmetrizer(&self, a: &[f64], xi: &[f64]) -> Result<CMatrix> {
        let ff = self.symmetrizer(a, xi)?;
        Ok(ff.s * self.base.eval(a, &self.nu_prime)?)
    }
}

pub fn change_time_direction(
    fam: &SymbolFamily,
    nu: &[f64],
    nu_prime: &[f64],
    chart: &super::cone::ConeChart,
) -> Result<ChangedDirection> {
    if chart.certifies(nu_prime).is_none() {
        return Err(Error::Invalid(format!("direction {nu_prime:?} is outside the certified cone")));
    }
    let rho = 0.5 * chart.base_radius();
    let f2 = fam.clone();
    let nu_v = nu.to_vec();
    let field = full_from_symmetrizer(move |a, xi| canonical_in_direction(&f2, a, &nu_v, xi), fam, nu, rho);
    let family = SymbolFamily::from_spec(&FamilySpec::Reduced { base: Box::new(fam.spec().clone()), nu: nu_prime.to_vec() })?;
    Ok(ChangedDirection { family, nu_prime: nu_prime.to_vec(), field, base: fam.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::ParamBox;
    use crate::symbol::family::ASlot;
    use rand::SeedableRng;

    fn expr2(rows0: [&str; 4], rows1: [&str; 4]) -> SymbolFamily {
        let m = |r: [&str; 4]| vec![vec![r[0].to_string(), r[1].to_string()], vec![r[2].to_string(), r[3].to_string()]];
        SymbolFamily::from_spec(&FamilySpec::Expr {
            name: "t".into(),
            n: 2,
            d: 1,
            params: ParamBox::empty(),
            coefficients: vec![m(rows0), m(rows1)],
        })
        .unwrap()
    }

    #[test]
    fn identity_field_on_hermitian_symbol() {
        let fam = expr2(["1", "0", "0", "1"], ["1", "2", "2", "-1"]);
        let id = FullSymmetrizerField::new("id", |_, _| Ok(linalg::identity(2)));
        let rep = full_positivity_check(&id, &fam, &[], &[1.0, 0.0], &sampling::complement_sphere(&[1.0, 0.0], 2)).unwrap();
        assert!((rep.c - 1.0).abs() < 1e-12);
        let neg = full_positivity_check(&id.scaled(-1.0), &fam, &[], &[1.0, 0.0], &sampling::complement_sphere(&[1.0, 0.0], 2)).unwrap();
        assert!((neg.c + 1.0).abs() < 1e-12);
        let ff = symmetrizer_from_full(&id, &fam, &[], &[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert!((ff.s - linalg::identity(2)).norm() < 1e-12);
    }

    #[test]
    fn diag_symbol_projectors() {
        // L(ξ) = diag(0, 1) ξ: Π0 = diag(1,0), |Π0| = 1 = |𝐒J|/c
        let fam = expr2(["1", "0", "0", "1"], ["0", "0", "0", "1"]);
        let id = FullSymmetrizerField::new("id", |_, _| Ok(linalg::identity(2)));
        let ff = symmetrizer_from_full(&id, &fam, &[], &[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert!((ff.s - linalg::identity(2)).norm() < 1e-12);
        for r in &ff.per_root {
            assert!((r.norm_pi_ratio - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn psp_instances() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for k in 0..200 {
            let inst = random_psp_instance(&mut rng, 2 + k % 5);
            let rep = psp_check(&inst.l, &inst.s_full, &inst.j, &inst.projector);
            assert!(rep.eq_pi_s_pi < 1e-8, "{rep:?}");
            assert!(rep.norm_pi_ratio <= 1.01, "{rep:?}");
            assert!(rep.ortho_ok && rep.semisimple_zero, "{rep:?}");
        }
    }

    #[test]
    fn extended_field_round_trip_example1() {
        let fam = SymbolFamily::example1(ASlot::Const(0.5));
        let nu = [1.0, 0.0, 0.0];
        let f2 = fam.clone();
        let field = full_from_symmetrizer(move |a, xi| canonical_in_direction(&f2, a, &nu, xi), &fam, &nu, 0.04);
        // at ν: 𝐒 L(ν) = Id
        let at_nu = field.eval(&[0.7], &nu).unwrap();
        assert!((at_nu - linalg::identity(3)).norm() < 1e-12);
        for xi in sampling::complement_sphere(&nu, 12) {
            let direct = canonical_in_direction(&fam, &[0.7], &nu, &xi).unwrap();
            let back = symmetrizer_from_full(&field, &fam, &[0.7], &nu, &xi).unwrap();
            assert!((back.s - &direct).norm() < 1e-6 * direct.norm(), "{xi:?}");
        }
    }
}
