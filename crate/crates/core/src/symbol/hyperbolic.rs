//! Hyperbolicity and strong hyperbolicity of symbol families in a direction.

use rayon::prelude::*;
use serde::Serialize;

use super::family::{combine, SymbolFamily};
use crate::error::{Error, Result};
use crate::matrix::{self, c, linalg, CMatrix, C64};
use crate::sampling;
use crate::serial;

/// L(ν) must have σ_min above this fraction of its norm.
pub const NONCHAR_TOL: f64 = 1e-12;

fn invert_direction(j: &CMatrix, nu: &[f64]) -> Result<CMatrix> {
    let s = linalg::singular_values(j);
    let smin = *s.last().unwrap();
    if !(smin > NONCHAR_TOL * s[0]) {
        return Err(Error::Characteristic(nu.to_vec()));
    }
    j.clone().try_inverse().ok_or_else(|| Error::Characteristic(nu.to_vec()))
}

/// Roots λ of det L(ξ̃ + λν) = 0, i.e. the eigenvalues of −L(ν)⁻¹L(ξ̃).
pub fn char_roots(fam: &SymbolFamily, a: &[f64], xi: &[f64], nu: &[f64]) -> Result<Vec<C64>> {
    let cs = fam.coefficients(a)?;
    roots_from(&cs, xi, nu)
}

fn roots_from(cs: &[CMatrix], xi: &[f64], nu: &[f64]) -> Result<Vec<C64>> {
    let ji = invert_direction(&combine(cs, nu), nu)?;
    let m = -(ji * combine(cs, xi));
    linalg::eigenvalues(&m)
}

#[derive(Clone, Debug, Serialize)]
pub struct HyperbolicityCheck {
    pub pass: bool,
    pub max_im: f64,
    pub tol: f64,
    pub worst_xi: Vec<f64>,
    pub samples: usize,
}

/// Max |Im root| over unit frequencies `sphere_samples`.
pub fn hyperbolicity_check(fam: &SymbolFamily, a: &[f64], nu: &[f64], sphere_samples: &[Vec<f64>]) -> Result<HyperbolicityCheck> {
    let cs = fam.coefficients(a)?;
    let results: Vec<Result<(f64, f64)>> = sphere_samples
        .par_iter()
        .map(|xi| {
            let roots = roots_from(&cs, xi, nu)?;
            let scale = roots.iter().map(|z| z.norm()).fold(1e-300, f64::max);
            Ok((roots.iter().map(|z| z.im.abs()).fold(0.0, f64::max), scale))
        })
        .collect();
    let mut out = HyperbolicityCheck { pass: true, max_im: 0.0, tol: 0.0, worst_xi: Vec::new(), samples: sphere_samples.len() };
    let mut tol: f64 = 0.0;
    for (xi, r) in sphere_samples.iter().zip(results) {
        let (im, scale) = r?;
        tol = tol.max(matrix::spectral::REAL_TOL_REL * scale);
        if im > out.max_im || out.worst_xi.is_empty() {
            out.max_im = im;
            out.worst_xi = xi.clone();
        }
    }
    out.tol = tol.max(1e-14);
    out.pass = out.max_im <= out.tol;
    Ok(out)
}

/// Which parameters and frequencies a certificate covers.
#[derive(Clone, Debug, Serialize)]
pub struct SamplePlan {
    pub params: Vec<Vec<f64>>,
    /// Number of points on the unit sphere of ν^⊥.
    pub sphere: usize,
}

impl SamplePlan {
    pub fn from_family(fam: &SymbolFamily, sphere: usize) -> Self {
        SamplePlan { params: fam.params.grid(), sphere }
    }
}

/// One sample of a symmetrizer field S(a, ξ).
#[derive(Clone, Debug, Serialize)]
pub struct FieldSample {
    pub a: Vec<f64>,
    pub xi: Vec<f64>,
    #[serde(with = "serial::opt_matrix")]
    pub s: Option<CMatrix>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SampleFailure {
    pub a: Vec<f64>,
    pub xi: Vec<f64>,
    pub reasons: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SymbolCertificate {
    pub pass: bool,
    pub nu: Vec<f64>,
    pub samples: usize,
    pub failed: usize,
    pub max_im: f64,
    #[serde(rename = "C1", with = "serial::extended")]
    pub c1: f64,
    #[serde(rename = "C2", with = "serial::extended")]
    pub c2: f64,
    #[serde(rename = "C3", with = "serial::extended")]
    pub c3: f64,
    pub c4: f64,
    #[serde(rename = "C4")]
    pub cap4: f64,
    pub min_abs_det_nu: f64,
    /// max ‖S L(ξ) − (S L(ξ))*‖ / (‖S‖‖L(ξ)‖)
    pub symmetry_defect: f64,
    /// min eigenvalue of Herm(S L(ν))
    pub positivity: f64,
    pub first_failures: Vec<SampleFailure>,
    #[serde(skip)]
    pub field: Vec<FieldSample>,
}

/// Builds A = L(ν)⁻¹L(ξ) at each sample, certifies it, and assembles the
/// symmetrizer S = S_A L(ν)⁻¹ with uniform constants.
pub fn strong_hyperbolicity_in_direction(fam: &SymbolFamily, nu: &[f64], plan: &SamplePlan) -> Result<SymbolCertificate> {
    if nu.len() != fam.d + 1 || sampling::norm(nu) == 0.0 {
        return Err(Error::Invalid("direction must be a nonzero vector of length d + 1".into()));
    }
    let sphere = sampling::complement_sphere(nu, plan.sphere);
    let mut jobs = Vec::with_capacity(plan.params.len() * sphere.len());
    for a in &plan.params {
        for xi in &sphere {
            jobs.push((a.clone(), xi.clone()));
        }
    }
    struct Out {
        cert: matrix::HypMatrixCertificate,
        s: Option<CMatrix>,
        det_nu: f64,
        sym: f64,
        pos: f64,
    }
    let results: Vec<Result<Out>> = jobs
        .par_iter()
        .map(|(a, xi)| {
            let cs = fam.coefficients(a)?;
            let j = combine(&cs, nu);
            let ji = invert_direction(&j, nu).map_err(|_| Error::Characteristic(a.iter().chain(nu).copied().collect()))?;
            let lxi = combine(&cs, xi);
            let amat = &ji * &lxi;
            let cert = matrix::strong_hyperbolicity_certificate(&amat);
            let (s, sym, pos) = match &cert.s {
                Some(sa) => {
                    let s = sa * &ji;
                    let sl = &s * &lxi;
                    let denom = (linalg::norm2(&s) * linalg::norm2(&lxi)).max(1e-300);
                    let sym = linalg::skew_defect(&sl) / denom;
                    let pos = linalg::herm_min_eig(&(&s * &j));
                    (Some(s), sym, pos)
                }
                None => (None, f64::INFINITY, f64::NEG_INFINITY),
            };
            Ok(Out { det_nu: linalg::det(&j).norm(), cert, s, sym, pos })
        })
        .collect();

    let mut out = SymbolCertificate {
        pass: true,
        nu: nu.to_vec(),
        samples: jobs.len(),
        failed: 0,
        max_im: 0.0,
        c1: 0.0,
        c2: 0.0,
        c3: 0.0,
        c4: f64::INFINITY,
        cap4: 0.0,
        min_abs_det_nu: f64::INFINITY,
        symmetry_defect: 0.0,
        positivity: f64::INFINITY,
        first_failures: Vec::new(),
        field: Vec::with_capacity(jobs.len()),
    };
    for ((a, xi), r) in jobs.into_iter().zip(results) {
        let o = r?;
        out.min_abs_det_nu = out.min_abs_det_nu.min(o.det_nu);
        out.max_im = out.max_im.max(o.cert.real_residual);
        if o.cert.pass {
            out.c1 = out.c1.max(o.cert.c1);
            out.c2 = out.c2.max(o.cert.c2);
            out.c3 = out.c3.max(o.cert.c3);
            out.c4 = out.c4.min(o.cert.c4);
            out.cap4 = out.cap4.max(o.cert.cap4);
            out.symmetry_defect = out.symmetry_defect.max(o.sym);
            out.positivity = out.positivity.min(o.pos);
        } else {
            out.failed += 1;
            if out.first_failures.len() < 10 {
                out.first_failures.push(SampleFailure { a: a.clone(), xi: xi.clone(), reasons: o.cert.reasons.clone() });
            }
        }
        out.field.push(FieldSample { a, xi, s: o.s });
    }
    if out.c4 == f64::INFINITY {
        out.c4 = 0.0;
    }
    if out.positivity == f64::INFINITY {
        out.positivity = 0.0;
    }
    out.pass = out.failed == 0 && out.symmetry_defect <= 1e-8 && out.positivity > 0.0;
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct NecessaryProbe {
    #[serde(with = "serial::extended")]
    pub value: f64,
    pub worst_xi: Vec<f64>,
    pub worst_gamma: f64,
    pub gammas: Vec<f64>,
}

/// sup over samples of |γ|·‖(L(ξ̃) + iγL(ν))⁻¹‖.
pub fn necessary_condition_probe(
    fam: &SymbolFamily,
    a: &[f64],
    nu: &[f64],
    gamma_grid: &[f64],
    sphere_samples: &[Vec<f64>],
) -> Result<NecessaryProbe> {
    let cs = fam.coefficients(a)?;
    let j = combine(&cs, nu);
    let vals: Vec<(f64, f64)> = sphere_samples
        .par_iter()
        .map(|xi| {
            let l = combine(&cs, xi);
            let mut best = (0.0, 0.0);
            for &g in gamma_grid {
                let m = &l + &j * c(0.0, g);
                let smin = linalg::sigma_min(&m);
                let v = if smin > 0.0 { g.abs() / smin } else { f64::INFINITY };
                if v > best.0 {
                    best = (v, g);
                }
            }
            best
        })
        .collect();
    let mut out = NecessaryProbe { value: 0.0, worst_xi: Vec::new(), worst_gamma: 0.0, gammas: gamma_grid.to_vec() };
    for (xi, (v, g)) in sphere_samples.iter().zip(vals) {
        if v > out.value || out.worst_xi.is_empty() {
            out.value = v;
            out.worst_xi = xi.clone();
            out.worst_gamma = g;
        }
    }
    Ok(out)
}

/// Points on S^d translated along ν: every ξ̃ = ξ + τν with ξ on the unit
/// sphere of ν^⊥ and τ in `taus`.
pub fn slab_samples(nu: &[f64], sphere: usize, taus: &[f64]) -> Vec<Vec<f64>> {
    let base = sampling::complement_sphere(nu, sphere);
    let mut out = Vec::new();
    for xi in &base {
        for &t in taus {
            out.push(xi.iter().zip(nu).map(|(x, n)| x + t * n).collect());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::ParamBox;
    use crate::symbol::family::{ASlot, FamilySpec};

    fn diag_family() -> SymbolFamily {
        SymbolFamily::from_spec(&FamilySpec::Expr {
            name: "diag".into(),
            n: 2,
            d: 1,
            params: ParamBox::empty(),
            coefficients: vec![
                vec![vec!["1".into(), "0".into()], vec!["0".into(), "1".into()]],
                vec![vec!["1".into(), "0".into()], vec!["0".into(), "-1".into()]],
            ],
        })
        .unwrap()
    }

    fn rotation_family() -> SymbolFamily {
        SymbolFamily::from_spec(&FamilySpec::Expr {
            name: "rot".into(),
            n: 2,
            d: 1,
            params: ParamBox::empty(),
            coefficients: vec![
                vec![vec!["1".into(), "0".into()], vec!["0".into(), "1".into()]],
                vec![vec!["0".into(), "1".into()], vec!["-1".into(), "0".into()]],
            ],
        })
        .unwrap()
    }

    #[test]
    fn diag_roots() {
        let r = char_roots(&diag_family(), &[], &[0.0, 1.0], &[1.0, 0.0]).unwrap();
        assert!((r[0] + 1.0).norm() < 1e-14 && (r[1] - 1.0).norm() < 1e-14);
    }

    #[test]
    fn characteristic_direction_rejected() {
        let err = char_roots(&diag_family(), &[], &[1.0, 0.0], &[1.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::Characteristic(_)));
    }

    #[test]
    fn rotation_is_not_hyperbolic() {
        let s = sampling::unit_sphere(2, 16);
        let h = hyperbolicity_check(&rotation_family(), &[], &[1.0, 0.0], &s).unwrap();
        assert!(!h.pass);
        // Im roots = ±ξ; largest |ξ| on the circle is 1 up to the sampling
        assert!(h.max_im > 0.95);
    }

    #[test]
    fn example1_roots_and_translation() {
        let f = SymbolFamily::example1(ASlot::Const(0.4));
        let (x, xi, eta) = (0.7, 0.3, -0.9);
        let r = char_roots(&f, &[x], &[0.0, xi, eta], &[1.0, 0.0, 0.0]).unwrap();
        let w = (xi * xi + x * x * eta * eta).sqrt();
        let expect = [-w, 0.0, w];
        for (z, e) in r.iter().zip(expect) {
            assert!((z - c(e, 0.0)).norm() < 1e-12, "{z} vs {e}");
        }
        let t = 0.37;
        let r2 = char_roots(&f, &[x], &[t, xi, eta], &[1.0, 0.0, 0.0]).unwrap();
        for (z, z2) in r.iter().zip(&r2) {
            assert!((z - t - z2).norm() < 1e-12);
        }
    }

    #[test]
    fn friedrichs_family_certifies_with_identity_like_symmetrizer() {
        let f = SymbolFamily::from_spec(&FamilySpec::Friedrichs { n: 3, d: 2, seed: 9 }).unwrap();
        let cert = strong_hyperbolicity_in_direction(&f, &[1.0, 0.0, 0.0], &SamplePlan { params: vec![vec![]], sphere: 40 }).unwrap();
        assert!(cert.pass, "{:?}", cert.first_failures);
        for s in &cert.field {
            assert!((s.s.as_ref().unwrap() - linalg::identity(3)).norm() < 1e-8);
        }
    }
}
