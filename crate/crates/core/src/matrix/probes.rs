//! Resolvent and exponential probes, invertibility margins and the
//! strong hyperbolicity certificate for a single matrix.

use serde::Serialize;

use super::linalg::{self, c, CMatrix, C64};
use super::spectral::{self, SpectralData};
use crate::serial;

#[derive(Clone, Debug, Serialize)]
pub struct ResolventProbe {
    /// sup of |Im λ|·‖(A - λ)^{-1}‖ over the grid.
    #[serde(with = "serial::extended")]
    pub value: f64,
    pub argmax: [f64; 2],
    pub re_points: usize,
    pub im_points: usize,
}

/// Grid for the resolvent probe: the real parts of the spectrum plus a
/// uniform sweep `[min - ‖A‖, max + ‖A‖]`, and imaginary offsets ±‖A‖·4^{-k}.
#[derive(Clone, Debug, Serialize)]
pub struct ProbeGrid {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl ProbeGrid {
    pub fn around(eigs: &[C64], scale: f64, sweep: usize, levels: usize) -> Self {
        let scale = if scale > 0.0 { scale } else { 1.0 };
        let lo = eigs.iter().map(|z| z.re).fold(f64::INFINITY, f64::min) - scale;
        let hi = eigs.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max) + scale;
        let mut re: Vec<f64> = eigs.iter().map(|z| z.re).collect();
        for k in 0..sweep {
            re.push(lo + (hi - lo) * k as f64 / (sweep.max(2) - 1) as f64);
        }
        let mut im = Vec::with_capacity(2 * levels);
        for k in 0..levels {
            let g = scale * 4f64.powi(-(k as i32));
            im.push(g);
            im.push(-g);
        }
        ProbeGrid { re, im }
    }
}

pub fn resolvent_probe(a: &CMatrix, re_grid: &[f64], im_grid: &[f64]) -> ResolventProbe {
    let n = a.nrows();
    let mut best = ResolventProbe { value: 0.0, argmax: [0.0, 0.0], re_points: re_grid.len(), im_points: im_grid.len() };
    for &x in re_grid {
        for &g in im_grid {
            if g == 0.0 {
                continue;
            }
            let shifted = a - linalg::identity(n) * c(x, g);
            let smin = linalg::sigma_min(&shifted);
            let val = if smin > 0.0 { g.abs() / smin } else { f64::INFINITY };
            if val > best.value || val.is_nan() {
                best.value = val;
                best.argmax = [x, g];
            }
        }
    }
    best
}

#[derive(Clone, Debug, Serialize)]
pub struct ExponentialProbe {
    #[serde(with = "serial::extended")]
    pub value: f64,
    pub argmax_t: f64,
    pub saturated: bool,
}

/// sup over `t_grid` of ‖exp(itA)‖.
pub fn exponential_probe(a: &CMatrix, t_grid: &[f64]) -> ExponentialProbe {
    let mut out = ExponentialProbe { value: 0.0, argmax_t: 0.0, saturated: false };
    for &t in t_grid {
        let e = (a * c(0.0, t)).exp();
        let v = if linalg::is_finite(&e) { linalg::norm2(&e) } else { f64::INFINITY };
        if !v.is_finite() {
            out.saturated = true;
            out.value = f64::MAX;
            out.argmax_t = t;
            return out;
        }
        if v > out.value {
            out.value = v;
            out.argmax_t = t;
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct InvertibilityMargin {
    #[serde(with = "serial::extended")]
    pub kappa: f64,
    pub radius: f64,
    /// Rank-one perturbation of norm `radius` that makes A - B singular.
    #[serde(with = "serial::matrix")]
    pub worst_b: CMatrix,
    /// |det(A - B)|.
    pub singular_residual: f64,
}

pub fn invertibility_margin(a: &CMatrix) -> InvertibilityMargin {
    let (v, _, sv) = linalg::null_pairs(a, 1);
    let radius = sv[0];
    let kappa = if radius > 0.0 { 1.0 / radius } else { f64::INFINITY };
    // B = (A u) u* with u the unit vector realizing |Au| = radius
    let worst_b = (a * &v) * v.adjoint();
    let singular_residual = linalg::det(&(a - &worst_b)).norm();
    InvertibilityMargin { kappa, radius, worst_b, singular_residual }
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificateOptions {
    pub cluster_tol: f64,
    pub sweep: usize,
    pub levels: usize,
    /// Exponential probe times, in units of 1/‖A‖.
    pub times: Vec<f64>,
}

impl Default for CertificateOptions {
    fn default() -> Self {
        CertificateOptions {
            cluster_tol: 0.0,
            sweep: 5,
            levels: 6,
            times: vec![-16.0, -4.0, -1.0, 0.5, 2.0, 8.0, 32.0],
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HypMatrixCertificate {
    pub real_residual: f64,
    #[serde(rename = "C1", with = "serial::extended")]
    pub c1: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
    #[serde(rename = "C3", with = "serial::extended")]
    pub c3: f64,
    #[serde(rename = "S", with = "serial::opt_matrix")]
    pub s: Option<CMatrix>,
    pub c4: f64,
    #[serde(rename = "C4")]
    pub cap4: f64,
    pub symmetry_defect: f64,
    pub semisimple: bool,
    pub pass: bool,
    pub reasons: Vec<String>,
    #[serde(with = "serial::complex_vec")]
    pub eigenvalues: Vec<C64>,
    pub multiplicities: Vec<usize>,
}

impl HypMatrixCertificate {
    pub fn has_reason(&self, r: &str) -> bool {
        self.reasons.iter().any(|x| x == r)
    }
}

pub fn strong_hyperbolicity_certificate(a: &CMatrix) -> HypMatrixCertificate {
    certificate_with(a, &CertificateOptions::default())
}

pub fn certificate_with(a: &CMatrix, opts: &CertificateOptions) -> HypMatrixCertificate {
    let n = a.nrows();
    let spec = match spectral::eigendecompose(a, opts.cluster_tol) {
        Ok(s) => s,
        Err(e) => return failed(vec![format!("eigensolver: {e}")]),
    };
    let mut reasons = Vec::new();
    let semisimple = spec.is_semisimple();
    if !semisimple {
        reasons.push("defective".to_string());
    }
    let real_residual = spec.max_imag();
    if !spec.is_real() {
        reasons.push("not hyperbolic".to_string());
    }
    let c2 = spec.max_projector_norm();
    let scale = if spec.norm > 0.0 { spec.norm } else { 1.0 };
    let grid = ProbeGrid::around(&spec.eigenvalues(), scale, opts.sweep, opts.levels);
    let c3 = resolvent_probe(a, &grid.re, &grid.im).value;
    let times: Vec<f64> = opts.times.iter().map(|t| t / scale).collect();
    let c1 = exponential_probe(a, &times).value;

    let mut out = HypMatrixCertificate {
        real_residual,
        c1,
        c2,
        c3,
        s: None,
        c4: 0.0,
        cap4: 0.0,
        symmetry_defect: f64::INFINITY,
        semisimple,
        pass: false,
        reasons,
        eigenvalues: spec.eigenvalues(),
        multiplicities: spec.clusters.iter().map(|c| c.multiplicity).collect(),
    };
    if !out.reasons.is_empty() {
        return out;
    }
    let s = match spectral::canonical_symmetrizer(&spec) {
        Ok(s) => s,
        Err(e) => {
            out.reasons.push(e.to_string());
            return out;
        }
    };
    let eig = linalg::herm_eigenvalues(&s);
    out.c4 = eig[0];
    out.cap4 = *eig.last().unwrap();
    out.symmetry_defect = linalg::skew_defect(&(&s * a));
    out.s = Some(s);
    cross_check(&mut out, &spec, n);
    out.pass = out.reasons.is_empty();
    out
}

fn cross_check(cert: &mut HypMatrixCertificate, spec: &SpectralData, n: usize) {
    let nf = n as f64;
    let slack = 1.0 + 1e-6;
    if cert.c4 < 1.0 / nf - 1e-8 {
        cert.reasons.push(format!("lower bound c4 = {:.3e} below 1/N", cert.c4));
    }
    if cert.cap4 > nf * cert.c2 * cert.c2 * slack {
        cert.reasons.push("upper bound C4 exceeds N C2^2".into());
    }
    if cert.symmetry_defect > 1e-8 * cert.cap4 * spec.norm.max(f64::MIN_POSITIVE) {
        cert.reasons.push(format!("S A not hermitian (defect {:.3e})", cert.symmetry_defect));
    }
    if cert.c1 > nf * cert.c2 * slack {
        cert.reasons.push("cross-check failed: C1 > N C2".into());
    }
    if cert.c3 > nf * cert.c2 * slack {
        cert.reasons.push("cross-check failed: C3 > N C2".into());
    }
    if cert.c3 > cert.cap4 / cert.c4 * slack {
        cert.reasons.push("cross-check failed: C3 > C4/c4".into());
    }
}

fn failed(reasons: Vec<String>) -> HypMatrixCertificate {
    HypMatrixCertificate {
        real_residual: f64::NAN,
        c1: f64::NAN,
        c2: f64::NAN,
        c3: f64::NAN,
        s: None,
        c4: 0.0,
        cap4: 0.0,
        symmetry_defect: f64::NAN,
        semisimple: false,
        pass: false,
        reasons,
        eigenvalues: Vec::new(),
        multiplicities: Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::linalg::from_real_rows;

    #[test]
    fn resolvent_of_normal_matrix_is_one() {
        let a = from_real_rows(2, &[0.0, 0.0, 0.0, 1.0]);
        let g = ProbeGrid::around(&[c(0.0, 0.0), c(1.0, 0.0)], 1.0, 5, 10);
        let p = resolvent_probe(&a, &g.re, &g.im);
        assert!((p.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn resolvent_of_jordan_diverges() {
        let a = from_real_rows(2, &[0.0, 1.0, 0.0, 0.0]);
        let coarse = ProbeGrid::around(&[c(0.0, 0.0)], 1.0, 5, 4);
        let fine = ProbeGrid::around(&[c(0.0, 0.0)], 1.0, 5, 8);
        let v0 = resolvent_probe(&a, &coarse.re, &coarse.im).value;
        let v1 = resolvent_probe(&a, &fine.re, &fine.im).value;
        assert!(v1 > 10.0 * v0);
    }

    #[test]
    fn exponential_of_hermitian_is_unitary() {
        let a = from_real_rows(2, &[1.0, 2.0, 2.0, -3.0]);
        let p = exponential_probe(&a, &[-3.0, -0.1, 0.7, 5.0]);
        assert!((p.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn exponential_of_nilpotent_grows() {
        let a = from_real_rows(2, &[0.0, 1.0, 0.0, 0.0]);
        let t = 100.0;
        let p = exponential_probe(&a, &[t]);
        // ‖[[1, it],[0,1]]‖ = (t + sqrt(t^2 + 4)) / 2
        assert!((p.value - 0.5 * (t + (t * t + 4.0).sqrt())).abs() < 1e-8);
    }

    #[test]
    fn margin_identity_and_diag() {
        let m = invertibility_margin(&linalg::identity(2));
        assert!((m.kappa - 1.0).abs() < 1e-14 && (m.radius - 1.0).abs() < 1e-14);
        let m = invertibility_margin(&from_real_rows(2, &[1.0, 0.0, 0.0, 1e-3]));
        assert!((m.radius - 1e-3).abs() < 1e-15);
        assert!(m.singular_residual < 1e-15);
    }

    #[test]
    fn certificate_hermitian_and_jordan() {
        let h = from_real_rows(2, &[2.0, 1.0, 1.0, 0.0]);
        let cert = strong_hyperbolicity_certificate(&h);
        assert!(cert.pass, "{:?}", cert.reasons);
        assert!((cert.c1 - 1.0).abs() < 1e-10);
        assert!((cert.s.unwrap() - linalg::identity(2)).norm() < 1e-10);
        let j = from_real_rows(2, &[0.0, 1.0, 0.0, 0.0]);
        let cert = strong_hyperbolicity_certificate(&j);
        assert!(!cert.pass && cert.has_reason("defective"));
    }

    #[test]
    fn certificate_projector_scaling() {
        // [[0,1],[e,0]]: eigenvalues ±√e, projector norm (1+e)/(2√e)
        for &e in &[1e-2, 1e-4, 1e-6] {
            let a = from_real_rows(2, &[0.0, 1.0, e, 0.0]);
            let cert = strong_hyperbolicity_certificate(&a);
            assert!(cert.pass, "{e}: {:?}", cert.reasons);
            let expect = (1.0 + e) / (2.0 * e.sqrt());
            assert!((cert.c2 / expect - 1.0).abs() < 1e-6, "{} vs {}", cert.c2, expect);
        }
    }
}
