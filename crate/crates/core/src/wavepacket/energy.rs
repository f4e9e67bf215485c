use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::dyadic::{phi0, phi_j, DyadicFrame};
use super::grid::GridFunction;
use super::transform::{check_wraparound, transform_points, xi_lattice, WavePacketGrid};
use crate::error::{Error, Result};
use crate::matrix::{c, linalg, CMatrix, C64};
use crate::symbol::{combine, SymbolFamily};

type CoeffFn = dyn Fn(&[f64]) -> Result<Vec<CMatrix>> + Send + Sync;

/// Spatial coefficients A1(x), …, Ad(x) of A(x, ∂) = Σ Ak(x)∂k.
#[derive(Clone)]
pub struct Coefficients {
    pub dims: usize,
    pub components: usize,
    f: Arc<CoeffFn>,
}

impl std::fmt::Debug for Coefficients {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Coefficients(dims = {}, components = {})", self.dims, self.components)
    }
}

impl Coefficients {
    pub fn new<F>(dims: usize, components: usize, f: F) -> Self
    where
        F: Fn(&[f64]) -> Result<Vec<CMatrix>> + Send + Sync + 'static,
    {
        Coefficients { dims, components, f: Arc::new(f) }
    }

    pub fn constant(mats: Vec<CMatrix>) -> Self {
        let components = mats[0].nrows();
        Self::new(mats.len(), components, move |_| Ok(mats.clone()))
    }

    /// Ak(x) = L(a, ν)⁻¹ L(a, dirs[k]) with the family parameter a = x1.
    pub fn from_family(fam: &SymbolFamily, nu: &[f64], dirs: Vec<Vec<f64>>) -> Result<Self> {
        if fam.params.dim() != 1 {
            return Err(Error::Invalid("spatial coefficients need a one-parameter family".into()));
        }
        let fam = fam.clone();
        let nu = nu.to_vec();
        let dims = dirs.len();
        let components = fam.n;
        Ok(Self::new(dims, components, move |x| {
            let cs = fam.coefficients(&[x[0]])?;
            let ji = combine(&cs, &nu).try_inverse().ok_or_else(|| Error::Characteristic(nu.clone()))?;
            Ok(dirs.iter().map(|d| &ji * combine(&cs, d)).collect())
        }))
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<CMatrix>> {
        (self.f)(x)
    }

    /// A(x, ξ) = Σ ξk Ak(x).
    pub fn symbol(&self, x: &[f64], xi: &[f64]) -> Result<CMatrix> {
        Ok(combine(&self.eval(x)?, xi))
    }

    /// A(x, ∂)v, derivatives computed spectrally.
    pub fn apply(&self, v: &GridFunction) -> Result<GridFunction> {
        self.apply_with(v, false)
    }

    /// Ã v = −Σ Ak(x)* ∂k v.
    pub fn apply_adjoint_form(&self, v: &GridFunction) -> Result<GridFunction> {
        self.apply_with(v, true)
    }

    fn apply_with(&self, v: &GridFunction, adjoint: bool) -> Result<GridFunction> {
        if v.dims != self.dims || v.components != self.components {
            return Err(Error::Dimension("coefficients do not match the grid function".into()));
        }
        let derivs: Vec<GridFunction> = (0..self.dims).map(|k| v.derivative(k)).collect();
        let np = v.npts();
        let rows: Vec<Vec<C64>> = (0..np)
            .into_par_iter()
            .map(|i| {
                let mats = self.eval(&v.coords(i))?;
                let mut out = vec![c(0.0, 0.0); self.components];
                for (k, m) in mats.iter().enumerate() {
                    let d = derivs[k].at(i);
                    for r in 0..self.components {
                        for q in 0..self.components {
                            let a = if adjoint { -m[(q, r)].conj() } else { m[(r, q)] };
                            out[r] += a * d[q];
                        }
                    }
                }
                Ok(out)
            })
            .collect::<Result<_>>()?;
        let mut out = v.like();
        for (i, row) in rows.into_iter().enumerate() {
            for (q, z) in row.into_iter().enumerate() {
                out.values[q * np + i] = z;
            }
        }
        Ok(out)
    }
}

/// Symmetrizer field S(x, ξ/|ξ|).
pub type SField<'a> = &'a (dyn Fn(&[f64], &[f64]) -> Result<CMatrix> + Sync);

fn unit_dir(xi: &[f64]) -> Vec<f64> {
    let r = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
    if r == 0.0 {
        // ξ = 0 carries no direction; use the first axis
        let mut e = vec![0.0; xi.len()];
        e[0] = 1.0;
        e
    } else {
        xi.iter().map(|x| x / r).collect()
    }
}

fn dir_key(d: &[f64]) -> Vec<i64> {
    d.iter().map(|x| (x * 1e12).round() as i64).collect()
}

/// S tables over the x-grid, one per distinct ξ direction of the lattice.
struct STables {
    tables: HashMap<Vec<i64>, Vec<CMatrix>>,
    min_eig: f64,
    max_eig: f64,
}

fn s_tables(u: &GridFunction, xi: &[Vec<f64>], s: SField) -> Result<STables> {
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    let mut seen = HashMap::new();
    for x in xi {
        let d = unit_dir(x);
        let k = dir_key(&d);
        if seen.insert(k, ()).is_none() {
            dirs.push(d);
        }
    }
    let np = u.npts();
    let coords: Vec<Vec<f64>> = (0..np).map(|i| u.coords(i)).collect();
    let mut tables = HashMap::new();
    let mut min_eig = f64::INFINITY;
    let mut max_eig = f64::NEG_INFINITY;
    for d in dirs {
        let tab: Vec<CMatrix> = coords.par_iter().map(|x| s(x, &d)).collect::<Result<_>>()?;
        for (x, m) in coords.iter().zip(&tab) {
            let ev = linalg::herm_eigenvalues(&linalg::hermitian_part(m));
            if !(ev[0] > 0.0) {
                return Err(Error::Invalid(format!("non-positive symmetrizer sample at x = {x:?}, xi = {d:?}")));
            }
            min_eig = min_eig.min(ev[0]);
            max_eig = max_eig.max(*ev.last().unwrap());
        }
        tables.insert(dir_key(&d), tab);
    }
    Ok(STables { tables, min_eig, max_eig })
}

/// Σ w(ξ)⟨S(x, ξ/|ξ|) W, V⟩ over the lattice.
fn s_pairing<W>(w: &WavePacketGrid, v: &WavePacketGrid, tabs: &STables, weight: W) -> C64
where
    W: Fn(&[f64]) -> f64 + Sync,
{
    w.weighted_pairing(v, |i, xi, wv| {
        let m = &tabs.tables[&dir_key(&unit_dir(xi))][i];
        let s = weight(xi);
        (0..wv.len()).map(|r| (0..wv.len()).map(|q| m[(r, q)] * wv[q]).sum::<C64>() * s).collect()
    })
}

fn lattice_points(dims: usize, axis: &[f64], keep: impl Fn(f64) -> bool) -> Vec<Vec<f64>> {
    let pts: Vec<Vec<f64>> = if dims == 1 {
        axis.iter().map(|&x| vec![x]).collect()
    } else {
        axis.iter().flat_map(|&a| axis.iter().map(move |&b| vec![a, b])).collect()
    };
    pts.into_iter().filter(|p| keep(p.iter().map(|x| x * x).sum::<f64>().sqrt())).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct EnergyReport {
    pub energy: f64,
    pub norm_sq: f64,
    /// E / ‖u‖²
    pub ratio: f64,
    /// Σ ‖Θj u‖², the value of E for S ≡ Id
    pub theta_sum: f64,
    pub s_min: f64,
    pub s_max: f64,
    pub per_level: Vec<f64>,
    /// ‖ΘJ u‖² / ‖u‖² for the top (Nyquist-limited) level
    pub top_level_mass: f64,
}

/// E(u) = Σj (S W_{2^j} Θj u, W_{2^j} Θj u), each level on a ξ-lattice of
/// spacing √λ/2 covering its dyadic shell plus 4√λ.
pub fn energy(u: &GridFunction, s: SField, frame: &DyadicFrame) -> Result<EnergyReport> {
    let mut per_level = Vec::new();
    let mut theta_sum = 0.0;
    let mut s_min = f64::INFINITY;
    let mut s_max = f64::NEG_INFINITY;
    let mut top_mass = 0.0;
    for j in 0..frame.levels() {
        let lambda = 2f64.powi(j as i32);
        check_wraparound(lambda, u.l)?;
        let tu = frame.apply(u, j)?;
        let nt = tu.norm_sq();
        theta_sum += nt;
        if j == frame.top {
            top_mass = nt / u.norm_sq().max(1e-300);
        }
        let pad = 4.0 * lambda.sqrt();
        let hi = 2f64.powi(j as i32 + 1) + pad;
        let lo = if j == 0 { 0.0 } else { (2f64.powi(j as i32 - 1) - pad).max(0.0) };
        let axis = xi_lattice(lambda, -hi, hi);
        let pts = lattice_points(u.dims, &axis, |r| r >= lo && r <= hi);
        let w = transform_points(&tu, &tu.spectrum(), lambda, pts, 0.5 * lambda.sqrt());
        let tabs = s_tables(u, &w.xi, s)?;
        s_min = s_min.min(tabs.min_eig);
        s_max = s_max.max(tabs.max_eig);
        per_level.push(s_pairing(&w, &w, &tabs, |_| 1.0).re);
    }
    let e: f64 = per_level.iter().sum();
    let norm_sq = u.norm_sq();
    Ok(EnergyReport {
        energy: e,
        norm_sq,
        ratio: e / norm_sq.max(1e-300),
        theta_sum,
        s_min,
        s_max,
        per_level,
        top_level_mass: top_mass,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Localization {
    pub j: usize,
    pub ratio: f64,
    pub lhs: f64,
    pub theta_norm: f64,
    pub skipped: bool,
}

/// ‖ |ξ|^m (1 − φ_{j+2}) W_{2^j} ∂^α Θj u ‖ / (2^{−jn} ‖Θj u‖).
pub fn localization_probe(u: &GridFunction, frame: &DyadicFrame, j: usize, n: u32, m: u32, alpha: &[u32]) -> Result<Localization> {
    if alpha.len() != u.dims {
        return Err(Error::Dimension("multi-index length must equal the grid dimension".into()));
    }
    let lambda = 2f64.powi(j as i32);
    check_wraparound(lambda, u.l)?;
    let tu = frame.apply(u, j)?;
    let theta_norm = tu.norm();
    if theta_norm <= 1e-13 * u.norm() {
        return Ok(Localization { j, ratio: 0.0, lhs: 0.0, theta_norm, skipped: true });
    }
    // spectrum of ∂^α Θj u built from û directly: a round trip through
    // physical space leaves ~1e-16 noise at |ξ| ≈ 2^{j+2}, which is where the
    // cut-off looks
    let w_j = &frame.windows[j];
    let np = u.npts();
    let mut spec = u.spectrum();
    for (idx, z) in spec.iter_mut().enumerate() {
        let k = u.wavevector(idx % np);
        let mut f = c(w_j[idx % np], 0.0);
        for (kk, &a) in k.iter().zip(alpha) {
            f *= c(0.0, *kk).powu(a);
        }
        *z *= f;
    }
    // the shell of Θj u reaches 2^{j+1}; the cut-off starts at 2^{j+2}
    let hi = 2f64.powi(j as i32 + 3) + 12.0 * lambda.sqrt();
    let axis = xi_lattice(lambda, -hi, hi);
    let pts = lattice_points(u.dims, &axis, |_| true);
    let w = transform_points(&tu, &spec, lambda, pts, 0.5 * lambda.sqrt());
    let jj = j as i32;
    let lhs_sq = w
        .weighted_pairing(&w, |_, xi, wv| {
            let r = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
            let f = r.powi(m as i32) * (1.0 - phi_j(jj + 2, r));
            wv.iter().map(|z| z * (f * f)).collect()
        })
        .re;
    let lhs = lhs_sq.max(0.0).sqrt();
    Ok(Localization { j, ratio: lhs / (2f64.powi(-(jj * n as i32)) * theta_norm), lhs, theta_norm, skipped: false })
}

#[derive(Clone, Debug, Serialize)]
pub struct CommutatorProbe {
    pub lambda: f64,
    pub value: f64,
    /// |Re(ψλ S Wλ u, Wλ Ã u)| / ‖u‖²
    pub ratio: f64,
}

/// Re(ψλ S Wλ u, Wλ Ã u) with Ã = −Σ Ak* ∂k and ψλ(ξ) = φ0(|ξ|/(4λ)).
pub fn commutator_energy_probe(u: &GridFunction, s: SField, coeffs: &Coefficients, lambda: f64) -> Result<CommutatorProbe> {
    check_wraparound(lambda, u.l)?;
    let au = coeffs.apply_adjoint_form(u)?;
    let spec_u = u.spectrum();
    let max = spec_u.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let np = u.npts();
    let mut ext = 0.0f64;
    for (idx, z) in spec_u.iter().enumerate() {
        if z.norm() > 1e-14 * max {
            ext = ext.max(u.wavevector(idx % np).iter().fold(0.0f64, |a, x| a.max(x.abs())));
        }
    }
    let hi = (ext + 6.0 * lambda.sqrt()).min(8.0 * lambda);
    let axis = xi_lattice(lambda, -hi, hi);
    let pts = lattice_points(u.dims, &axis, |_| true);
    let wu = transform_points(u, &spec_u, lambda, pts.clone(), 0.5 * lambda.sqrt());
    let wa = transform_points(&au, &au.spectrum(), lambda, pts, 0.5 * lambda.sqrt());
    let tabs = s_tables(u, &wu.xi, s)?;
    let value = s_pairing(&wu, &wa, &tabs, |xi| phi0(xi.iter().map(|x| x * x).sum::<f64>().sqrt() / (4.0 * lambda))).re;
    Ok(CommutatorProbe { lambda, value, ratio: value.abs() / u.norm_sq().max(1e-300) })
}

/// gj = A(x, ∂)Θj u − Θj A(x, ∂)u.
pub fn discrete_commutator(coeffs: &Coefficients, u: &GridFunction, frame: &DyadicFrame, j: usize) -> Result<GridFunction> {
    let a_theta = coeffs.apply(&frame.apply(u, j)?)?;
    let theta_a = frame.apply(&coeffs.apply(u)?, j)?;
    let mut g = a_theta;
    for (x, y) in g.values.iter_mut().zip(&theta_a.values) {
        *x -= y;
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    fn noise(n: usize, l: f64, comps: usize, seed: u64) -> GridFunction {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut g = GridFunction::zeros(1, n, l, comps).unwrap();
        for z in g.values.iter_mut() {
            *z = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
        g
    }

    #[test]
    fn identity_energy_is_theta_sum() {
        let u = noise(256, 2.0 * PI, 2, 1);
        let frame = DyadicFrame::for_grid(&u);
        let id = |_: &[f64], _: &[f64]| Ok(linalg::identity(2));
        let r = energy(&u, &id, &frame).unwrap();
        assert!((r.energy / r.theta_sum - 1.0).abs() < 1e-6, "{r:?}");
        let two = |_: &[f64], _: &[f64]| Ok(linalg::identity(2) * c(2.0, 0.0));
        let r2 = energy(&u, &two, &frame).unwrap();
        assert!((r2.energy / r.energy - 2.0).abs() < 1e-12);
    }

    #[test]
    fn energy_rejects_negative_s() {
        let u = noise(64, 2.0 * PI, 1, 2);
        let frame = DyadicFrame::for_grid(&u);
        let neg = |x: &[f64], _: &[f64]| Ok(CMatrix::from_element(1, 1, c(x[0], 0.0)));
        assert!(energy(&u, &neg, &frame).is_err());
    }

    #[test]
    fn constant_symmetric_commutator_vanishes() {
        let u = noise(256, PI, 2, 3);
        let a = linalg::from_real_rows(2, &[1.0, 2.0, 2.0, -1.0]);
        let coeffs = Coefficients::constant(vec![a]);
        let id = |_: &[f64], _: &[f64]| Ok(linalg::identity(2));
        for lambda in [8.0, 32.0] {
            let p = commutator_energy_probe(&u, &id, &coeffs, lambda).unwrap();
            assert!(p.ratio < 1e-9, "{p:?}");
        }
    }

    #[test]
    fn constant_coefficient_commutator_is_zero() {
        let u = noise(128, PI, 2, 4);
        let frame = DyadicFrame::for_grid(&u);
        let coeffs = Coefficients::constant(vec![linalg::from_real_rows(2, &[0.0, 1.0, 3.0, 0.0])]);
        for j in 0..frame.levels() {
            let g = discrete_commutator(&coeffs, &u, &frame, j).unwrap();
            assert!(g.norm() < 1e-10 * u.norm());
        }
    }

    #[test]
    fn localization_of_single_mode_is_small() {
        let u = GridFunction::from_fn(1, 512, PI, 1, |x| vec![c(0.0, 32.0 * x[0]).exp()]).unwrap();
        let frame = DyadicFrame::for_grid(&u);
        let r = localization_probe(&u, &frame, 5, 1, 0, &[0]).unwrap();
        assert!(!r.skipped && r.ratio < 1e-10, "{r:?}");
        let empty = localization_probe(&u, &frame, 2, 1, 0, &[0]).unwrap();
        assert!(empty.skipped);
    }
}
