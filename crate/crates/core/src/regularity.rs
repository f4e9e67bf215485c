//! Regularity of eigenvalue, projector and symmetrizer fields sampled on
//! uniform parameter grids: Lipschitz constants, Hölder exponents,
//! discontinuities and first-derivative defects.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{self, c, linalg, CMatrix};
use crate::sampling::{self, ParamBox};
use crate::symbol::{full::canonical_in_direction, SymbolFamily};

/// Matrix values on a lexicographic tensor grid.  Scalar fields are 1×1.
#[derive(Clone, Debug)]
pub struct FieldSamples {
    pub grid: ParamBox,
    pub points: Vec<Vec<f64>>,
    /// `None` where the sample failed (excluded from all estimates).
    pub values: Vec<Option<CMatrix>>,
    pub invalid: usize,
}

impl FieldSamples {
    /// Samples `f` on the grid; samples run in parallel, failures are counted.
    pub fn sample<F>(grid: &ParamBox, f: F) -> Self
    where
        F: Fn(&[f64]) -> Result<CMatrix> + Sync,
    {
        let points = grid.grid();
        let values: Vec<Option<CMatrix>> = points.par_iter().map(|p| f(p).ok()).collect();
        let invalid = values.iter().filter(|v| v.is_none()).count();
        FieldSamples { grid: grid.clone(), points, values, invalid }
    }

    pub fn scalar<F>(grid: &ParamBox, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        Self::sample(grid, |p| Ok(CMatrix::from_element(1, 1, c(f(p), 0.0))))
    }

    /// Smallest grid spacing over the axes with more than one sample.
    pub fn spacing(&self) -> f64 {
        (0..self.grid.dim())
            .filter(|&k| self.grid.samples[k] > 1)
            .map(|k| (self.grid.hi[k] - self.grid.lo[k]) / (self.grid.samples[k] - 1) as f64)
            .fold(f64::INFINITY, f64::min)
    }

    fn strides(&self) -> Vec<usize> {
        let m = self.grid.dim();
        let mut s = vec![1; m];
        for k in (0..m.saturating_sub(1)).rev() {
            s[k] = s[k + 1] * self.grid.samples[k + 1];
        }
        s
    }

    /// Axis-adjacent index pairs.
    pub fn neighbor_pairs(&self) -> Vec<(usize, usize)> {
        let strides = self.strides();
        let mut out = Vec::new();
        for i in 0..self.points.len() {
            for (k, &st) in strides.iter().enumerate() {
                let coord = (i / st) % self.grid.samples[k];
                if coord + 1 < self.grid.samples[k] {
                    out.push((i, i + st));
                }
            }
        }
        out
    }

    /// Largest axis-neighbour difference quotient ‖f(a) − f(a′)‖ / |a − a′|.
    pub fn max_quotient(&self) -> f64 {
        self.neighbor_pairs()
            .iter()
            .filter_map(|&(i, j)| {
                let (u, v) = (self.values[i].as_ref()?, self.values[j].as_ref()?);
                let dist = dist(&self.points[i], &self.points[j]);
                Some(linalg::norm2(&(u - v)) / dist)
            })
            .fold(0.0, f64::max)
    }

    /// Index of the grid point closest to `x`.
    pub fn nearest(&self, x: &[f64]) -> usize {
        (0..self.points.len()).min_by(|&i, &j| dist(&self.points[i], x).total_cmp(&dist(&self.points[j], x))).unwrap_or(0)
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// The same box with (samples − 1)·2^level + 1 points per axis.
pub fn refine(grid: &ParamBox, level: u32) -> ParamBox {
    let mut g = grid.clone();
    for s in g.samples.iter_mut() {
        if *s > 1 {
            *s = (*s - 1) * (1 << level) + 1;
        }
    }
    g
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct RegularityReport {
    pub lipschitz_constant: f64,
    pub per_level: Vec<f64>,
    /// consecutive levels agree within 20%
    pub stable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub holder_exponent: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub holder_r2: Option<f64>,
    pub discontinuity_gap: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theory_bound: Option<f64>,
    pub flags: Vec<String>,
}

/// Lipschitz constant per refinement level (finest last).
pub fn lipschitz_estimate(levels: &[FieldSamples]) -> Result<RegularityReport> {
    if levels.len() < 2 {
        return Err(Error::Invalid("lipschitz_estimate needs at least two refinement levels".into()));
    }
    let per_level: Vec<f64> = levels.iter().map(FieldSamples::max_quotient).collect();
    let stable = per_level.windows(2).all(|w| {
        let scale = w[0].max(w[1]);
        scale == 0.0 || (w[1] - w[0]).abs() <= 0.2 * scale
    });
    let mut flags = Vec::new();
    if !stable {
        flags.push("difference quotients do not settle under refinement".to_string());
    }
    Ok(RegularityReport { lipschitz_constant: *per_level.last().unwrap(), per_level, stable, flags, ..Default::default() })
}

/// Samples `f` on `levels` dyadic refinements of `grid` and estimates the
/// Lipschitz constant.
pub fn lipschitz_on_levels<F>(grid: &ParamBox, levels: u32, f: F) -> Result<RegularityReport>
where
    F: Fn(&[f64]) -> Result<CMatrix> + Sync,
{
    let samples: Vec<FieldSamples> = (0..levels).map(|l| FieldSamples::sample(&refine(grid, l), &f)).collect();
    lipschitz_estimate(&samples)
}

/// Eigenvalue branches λ1 ≤ … ≤ λN of A(a) on the grid, one field per index.
pub fn eigenvalue_field<F>(reduced: F, grid: &ParamBox) -> Result<Vec<FieldSamples>>
where
    F: Fn(&[f64]) -> Result<CMatrix> + Sync,
{
    let points = grid.grid();
    let eigs: Vec<Result<Vec<f64>>> = points
        .par_iter()
        .map(|p| {
            let a = reduced(p)?;
            let eigs = linalg::eigenvalues(&a)?;
            let tol = 1e-8 * linalg::norm2(&a).max(1e-300);
            let imag = eigs.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
            if imag > tol {
                return Err(Error::NotHyperbolic { imag, tol });
            }
            let mut v: Vec<f64> = eigs.iter().map(|z| z.re).collect();
            v.sort_by(f64::total_cmp);
            Ok(v)
        })
        .collect();
    let eigs: Vec<Vec<f64>> = eigs.into_iter().collect::<Result<_>>()?;
    let n = eigs.first().map_or(0, Vec::len);
    Ok((0..n)
        .map(|j| FieldSamples {
            grid: grid.clone(),
            points: points.clone(),
            values: eigs.iter().map(|e| Some(CMatrix::from_element(1, 1, c(e[j], 0.0)))).collect(),
            invalid: 0,
        })
        .collect())
}

/// Lipschitz report for the eigenvalue branches, with theory bound K·C
/// where K is the measured Lipschitz constant of A and C the largest
/// Σ‖Πj‖ on the grid.
pub fn eigenvalue_lipschitz<F>(reduced: F, grid: &ParamBox, levels: u32) -> Result<RegularityReport>
where
    F: Fn(&[f64]) -> Result<CMatrix> + Sync,
{
    let mut per_level = Vec::new();
    let mut k_coeff = 0.0f64;
    for l in 0..levels {
        let g = refine(grid, l);
        let branches = eigenvalue_field(&reduced, &g)?;
        per_level.push(branches.iter().map(FieldSamples::max_quotient).fold(0.0, f64::max));
        k_coeff = k_coeff.max(FieldSamples::sample(&g, &reduced).max_quotient());
    }
    let c_proj = grid
        .grid()
        .par_iter()
        .map(|p| {
            let spec = matrix::eigendecompose(&reduced(p)?, 0.0)?;
            Ok(spec.clusters.iter().map(|cl| linalg::norm2(&cl.projector)).sum::<f64>())
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let stable = per_level.windows(2).all(|w| (w[1] - w[0]).abs() <= 0.2 * w[0].max(w[1]).max(1e-300));
    Ok(RegularityReport {
        lipschitz_constant: *per_level.last().unwrap_or(&0.0),
        per_level,
        stable,
        theory_bound: Some(k_coeff * c_proj),
        ..Default::default()
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ProjectorModulus {
    pub quotient: f64,
    pub min_gap: f64,
    pub coeff_lipschitz: f64,
    pub projector_bound: f64,
    /// 2 P² K / δ with P = max Σ‖Πj‖
    pub theory_bound: f64,
    pub flags: Vec<String>,
}

/// Modulus of the projector on the cluster of the `index`-th smallest
/// eigenvalue.  Pairs touching a point whose gap is below `gap_floor` are
/// excluded and flagged.
pub fn projector_modulus<F>(reduced: F, index: usize, grid: &ParamBox, gap_floor: f64) -> Result<ProjectorModulus>
where
    F: Fn(&[f64]) -> Result<CMatrix> + Sync,
{
    let points = grid.grid();
    let per: Vec<Result<(CMatrix, CMatrix, f64, f64)>> = points
        .par_iter()
        .map(|p| {
            let a = reduced(p)?;
            let spec = matrix::eigendecompose(&a, 0.0)?;
            let mut order: Vec<usize> = (0..spec.clusters.len()).collect();
            order.sort_by(|&i, &j| spec.clusters[i].eigenvalue.re.total_cmp(&spec.clusters[j].eigenvalue.re));
            let &k = order.get(index).ok_or_else(|| Error::Invalid(format!("no cluster {index}")))?;
            let lam = spec.clusters[k].eigenvalue;
            let gap = spec
                .clusters
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != k)
                .map(|(_, cl)| (cl.eigenvalue - lam).norm())
                .fold(f64::INFINITY, f64::min);
            let p_sum = spec.clusters.iter().map(|cl| linalg::norm2(&cl.projector)).sum::<f64>();
            Ok((a, spec.clusters[k].projector.clone(), gap, p_sum))
        })
        .collect();
    let per: Vec<_> = per.into_iter().collect::<Result<_>>()?;
    let fs = FieldSamples {
        grid: grid.clone(),
        points: points.clone(),
        values: per.iter().map(|x| Some(x.0.clone())).collect(),
        invalid: 0,
    };
    let mut flags = Vec::new();
    let mut quotient = 0.0f64;
    let mut coeff = 0.0f64;
    let mut min_gap = f64::INFINITY;
    let mut p_max = 0.0f64;
    for (i, j) in fs.neighbor_pairs() {
        let d = dist(&points[i], &points[j]);
        coeff = coeff.max(linalg::norm2(&(&per[i].0 - &per[j].0)) / d);
        let g = per[i].2.min(per[j].2);
        if g < gap_floor {
            continue;
        }
        min_gap = min_gap.min(g);
        p_max = p_max.max(per[i].3).max(per[j].3);
        quotient = quotient.max(linalg::norm2(&(&per[i].1 - &per[j].1)) / d);
    }
    for (p, x) in points.iter().zip(&per) {
        if x.2 < gap_floor {
            flags.push(format!("delta->0 region at {p:?} (gap {:.3e})", x.2));
        }
    }
    Ok(ProjectorModulus {
        quotient,
        min_gap,
        coeff_lipschitz: coeff,
        projector_bound: p_max,
        theory_bound: 2.0 * p_max * p_max * coeff / min_gap,
        flags,
    })
}

/// Canonical symmetrizer S(a, ξ) in direction ν sampled on a grid whose
/// points are mapped to (a, ξ) by `slice`.  Samples where the certificate
/// fails are invalid.
pub fn symmetrizer_field<M>(fam: &SymbolFamily, nu: &[f64], grid: &ParamBox, slice: M) -> FieldSamples
where
    M: Fn(&[f64]) -> (Vec<f64>, Vec<f64>) + Sync,
{
    FieldSamples::sample(grid, |p| {
        let (a, xi) = slice(p);
        canonical_in_direction(fam, &a, nu, &xi)
    })
}

/// Slice of a 2-d model family at fixed η: grid coordinates (x, ξ) map to
/// parameter x and frequency (0, ξ, η).
pub fn xxi_slice(eta: f64) -> impl Fn(&[f64]) -> (Vec<f64>, Vec<f64>) + Sync {
    move |p| (vec![p[0]], vec![0.0, p[1], eta])
}

#[derive(Clone, Debug, Serialize)]
pub struct HolderFit {
    pub alpha: f64,
    pub r2: f64,
    pub constant_field: bool,
    pub radii: Vec<f64>,
    pub oscillations: Vec<f64>,
}

/// Radii 4h·2^k, k < count.
pub fn default_radii(h: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| 4.0 * h * (1u64 << k) as f64).collect()
}

/// Least-squares slope of log osc(r) against log r, where osc(r) is the
/// largest ‖f(p) − f(centre)‖ over valid grid points within distance r of
/// the grid point nearest `center`.
pub fn holder_fit(f: &FieldSamples, center: &[f64], radii: &[f64]) -> Result<HolderFit> {
    if radii.len() < 5 {
        return Err(Error::Invalid("holder_fit needs at least 5 radii".into()));
    }
    let (rmin, rmax) = radii.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
    if !(rmin > 0.0) || (rmax / rmin).log10() < 1.5 - 1e-12 {
        return Err(Error::Invalid("holder_fit radii must span at least 1.5 decades".into()));
    }
    let ic = f.nearest(center);
    let fc = f.values[ic].clone().ok_or_else(|| Error::Invalid("centre sample is invalid".into()))?;
    let cpt = &f.points[ic];
    let mut dists: Vec<(f64, f64)> = f
        .points
        .iter()
        .zip(&f.values)
        .filter_map(|(p, v)| Some((dist(p, cpt), linalg::norm2(&(v.as_ref()? - &fc)))))
        .collect();
    dists.sort_by(|x, y| x.0.total_cmp(&y.0));
    let oscillations: Vec<f64> = radii
        .iter()
        .map(|&r| dists.iter().take_while(|x| x.0 <= r * (1.0 + 1e-12)).map(|x| x.1).fold(0.0, f64::max))
        .collect();
    if oscillations.iter().all(|&o| o == 0.0) {
        return Ok(HolderFit { alpha: 1.0, r2: 1.0, constant_field: true, radii: radii.to_vec(), oscillations });
    }
    let xs: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = oscillations.iter().map(|o| o.max(1e-300).ln()).collect();
    let (alpha, _, r2) = linear_fit(&xs, &ys);
    Ok(HolderFit { alpha, r2, constant_field: false, radii: radii.to_vec(), oscillations })
}

/// Least squares y ≈ slope·x + intercept; returns (slope, intercept, R²).
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let r2 = if syy > 0.0 { (sxy * sxy) / (sxx * syy) } else { 1.0 };
    (slope, my - slope * mx, r2)
}

#[derive(Clone, Debug, Serialize)]
pub struct Discontinuity {
    pub spacings: Vec<f64>,
    pub jumps: Vec<f64>,
    pub survives: bool,
    pub gap: f64,
}

/// Largest pairwise difference among stencil points within distance 2h of
/// `center`, for h = h0·2^{-level}.  The jump survives refinement when the
/// last two levels differ by less than 10%.
pub fn discontinuity_probe<F>(f: F, center: &[f64], h0: f64, levels: u32) -> Result<Discontinuity>
where
    F: Fn(&[f64]) -> Result<CMatrix> + Sync,
{
    let d = center.len();
    let mut offsets: Vec<Vec<f64>> = vec![Vec::new()];
    for _ in 0..d {
        offsets = offsets
            .into_iter()
            .flat_map(|o| {
                (-2i32..=2).map(move |k| {
                    let mut q = o.clone();
                    q.push(k as f64);
                    q
                })
            })
            .collect();
    }
    offsets.retain(|o| sampling::norm(o) <= 2.0 + 1e-12);
    let mut spacings = Vec::new();
    let mut jumps = Vec::new();
    for l in 0..levels {
        let h = h0 / (1u64 << l) as f64;
        let vals: Vec<CMatrix> = offsets
            .par_iter()
            .map(|o| {
                let p: Vec<f64> = center.iter().zip(o).map(|(c0, k)| c0 + h * k).collect();
                f(&p)
            })
            .collect::<Result<_>>()?;
        let mut jump = 0.0f64;
        for i in 0..vals.len() {
            for j in i + 1..vals.len() {
                jump = jump.max(linalg::norm2(&(&vals[i] - &vals[j])));
            }
        }
        spacings.push(h);
        jumps.push(jump);
    }
    let survives = jumps.len() >= 2 && {
        let (a, b) = (jumps[jumps.len() - 2], jumps[jumps.len() - 1]);
        b > 1e-8 && (a - b).abs() < 0.1 * a.max(b)
    };
    let gap = if survives { *jumps.last().unwrap() } else { 0.0 };
    Ok(Discontinuity { spacings, jumps, survives, gap })
}

#[derive(Clone, Debug, Serialize)]
pub struct C1Defect {
    pub steps: Vec<f64>,
    /// max over axes of ‖D(e) + D(−e)‖, D(e) = (f(c + te) − f(c))/t
    pub one_sided: Vec<f64>,
    /// ‖D((e1 + e2)/√2) − (D(e1) + D(e2))/√2‖ (2-d only, else 0)
    pub nonlinearity: Vec<f64>,
    /// max of the two at the smallest step, relative to the size of D
    pub defect: f64,
    pub derivative_scale: f64,
}

/// First-derivative defect at `center`: a differentiable field has odd,
/// linear one-sided difference quotients as t → 0.
pub fn c1_defect<F>(f: F, center: &[f64], steps: &[f64]) -> Result<C1Defect>
where
    F: Fn(&[f64]) -> Result<CMatrix>,
{
    let d = center.len();
    let fc = f(center)?;
    let quot = |dir: &[f64], t: f64| -> Result<CMatrix> {
        let p: Vec<f64> = center.iter().zip(dir).map(|(c0, e)| c0 + t * e).collect();
        Ok((f(&p)? - &fc) * c(1.0 / t, 0.0))
    };
    let mut one_sided = Vec::new();
    let mut nonlinearity = Vec::new();
    let mut scale = 0.0f64;
    for &t in steps {
        let mut os = 0.0f64;
        let mut axes = Vec::new();
        for k in 0..d {
            let mut e = vec![0.0; d];
            e[k] = 1.0;
            let plus = quot(&e, t)?;
            e[k] = -1.0;
            let minus = quot(&e, t)?;
            os = os.max(linalg::norm2(&(&plus + &minus)));
            scale = scale.max(linalg::norm2(&plus)).max(linalg::norm2(&minus));
            axes.push(plus);
        }
        let nl = if d == 2 {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            let diag = quot(&[s, s], t)?;
            linalg::norm2(&(diag - (&axes[0] + &axes[1]) * c(s, 0.0)))
        } else {
            0.0
        };
        one_sided.push(os);
        nonlinearity.push(nl);
    }
    let last = one_sided.len().saturating_sub(1);
    let defect = if steps.is_empty() { 0.0 } else { one_sided[last].max(nonlinearity[last]) / scale.max(1e-300) };
    Ok(C1Defect { steps: steps.to_vec(), one_sided, nonlinearity, defect, derivative_scale: scale })
}

/// Exact linear-algebra form of the Taylor obstruction for the 4×4 model at
/// the origin: the Sylvester maps Σ ↦ ΩkΣ − 2ΣΩk are invertible, forcing
/// the first-order Taylor coefficients of S12 to vanish, while the x²
/// equation needs Ω1Σ1 − 2Σ1Ω1 = −2 J0 S11(0,0) ≠ 0.
#[derive(Clone, Debug, Serialize)]
pub struct SylvesterObstruction {
    /// smallest singular values of the Sylvester maps for Ω1, Ω2
    pub sigma_min: [f64; 2],
    /// ‖2 J0 S11‖ for S11 = Id
    pub rhs_witness: f64,
    pub contradiction: bool,
}

pub fn sylvester_obstruction() -> SylvesterObstruction {
    let omega1 = linalg::from_real_rows(2, &[0.0, 1.0, 1.0, 0.0]);
    let omega2 = linalg::from_real_rows(2, &[1.0, 0.0, 0.0, -1.0]);
    let sylv = |om: &CMatrix| {
        // vec(ΩΣ − 2ΣΩ) = (I ⊗ Ω − 2 Ωᵀ ⊗ I) vec Σ
        let id = linalg::identity(2);
        id.kronecker(om) - om.transpose().kronecker(&id) * c(2.0, 0.0)
    };
    let s1 = linalg::sigma_min(&sylv(&omega1));
    let s2 = linalg::sigma_min(&sylv(&omega2));
    // any positive S11 has (S11)00 > 0, so J0 S11 ≠ 0; witness S11 = Id
    let witness = linalg::norm2(&(linalg::from_real_rows(2, &[1.0, 0.0, 0.0, 0.0]) * c(2.0, 0.0)));
    SylvesterObstruction { sigma_min: [s1, s2], rhs_witness: witness, contradiction: s1 > 1e-12 && s2 > 1e-12 && witness > 0.0 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::ASlot;

    fn line(n: usize) -> ParamBox {
        ParamBox::interval("a", -1.0, 1.0, n)
    }

    #[test]
    fn abs_is_lipschitz_one() {
        let levels: Vec<_> = (0..3).map(|l| FieldSamples::scalar(&refine(&line(21), l), |p| p[0].abs())).collect();
        let r = lipschitz_estimate(&levels).unwrap();
        assert!((r.lipschitz_constant - 1.0).abs() < 1e-3 && r.stable);
    }

    #[test]
    fn sqrt_is_not_lipschitz() {
        let levels: Vec<_> = (0..4).map(|l| FieldSamples::scalar(&refine(&line(20), l), |p| p[0].abs().sqrt())).collect();
        let r = lipschitz_estimate(&levels).unwrap();
        assert!(!r.stable, "{:?}", r.per_level);
        assert!(r.per_level[3] > 2.5 * r.per_level[0]);
    }

    #[test]
    fn diag_branches() {
        let f = |p: &[f64]| Ok(linalg::from_real_rows(2, &[p[0], 0.0, 0.0, -p[0]]));
        let br = eigenvalue_field(f, &line(41)).unwrap();
        for (p, v) in br[0].points.iter().zip(&br[0].values) {
            assert!((v.as_ref().unwrap()[(0, 0)].re + p[0].abs()).abs() < 1e-12);
        }
        let r = eigenvalue_lipschitz(f, &line(41), 2).unwrap();
        assert!((r.lipschitz_constant - 1.0).abs() < 1e-9);
        let cst = eigenvalue_lipschitz(|_: &[f64]| Ok(linalg::from_real_rows(2, &[1.0, 2.0, 0.0, 3.0])), &line(11), 2).unwrap();
        assert_eq!(cst.lipschitz_constant, 0.0);
    }

    #[test]
    fn projector_closed_form() {
        // Π₊(a) = ½[[1, a^{-1/2}], [a^{1/2}, 1]], dΠ₊/da at 1 has norm 1/4
        let g = ParamBox::interval("a", 0.95, 1.05, 101);
        let m = projector_modulus(|p: &[f64]| Ok(linalg::from_real_rows(2, &[0.0, 1.0, p[0], 0.0])), 1, &g, 0.1).unwrap();
        assert!((m.quotient - 0.25).abs() < 0.02, "{m:?}");
        assert!(m.quotient <= m.theory_bound && m.flags.is_empty());
        assert!((m.min_gap - 2.0 * 0.95f64.sqrt()).abs() < 1e-9);
        let cst = projector_modulus(|_: &[f64]| Ok(linalg::from_real_rows(2, &[1.0, 0.0, 0.0, 2.0])), 0, &g, 0.1).unwrap();
        assert_eq!(cst.quotient, 0.0);
    }

    #[test]
    fn holder_calibration() {
        for beta in [0.25, 0.5, 0.75, 1.0] {
            let g = line(2001);
            let f = FieldSamples::scalar(&g, move |p| p[0].abs().powf(beta));
            let fit = holder_fit(&f, &[0.0], &default_radii(f.spacing(), 6)).unwrap();
            assert!((fit.alpha - beta).abs() < 0.05, "{beta} {fit:?}");
        }
        let f = FieldSamples::scalar(&line(2001), |p| p[0]);
        assert!(holder_fit(&f, &[0.3], &default_radii(f.spacing(), 6)).unwrap().alpha >= 0.95);
        let f = FieldSamples::scalar(&line(2001), |_| 2.0);
        assert!(holder_fit(&f, &[0.0], &default_radii(f.spacing(), 6)).unwrap().constant_field);
        assert!(holder_fit(&f, &[0.0], &default_radii(f.spacing(), 3)).is_err());
    }

    #[test]
    fn symmetric_family_has_identity_symmetrizer() {
        let fam = SymbolFamily::example1(ASlot::Const(0.0));
        let g = ParamBox { names: vec!["x".into(), "xi".into()], lo: vec![-0.5, -0.5], hi: vec![0.5, 0.5], samples: vec![5, 5] };
        let f = symmetrizer_field(&fam, &[1.0, 0.0, 0.0], &g, xxi_slice(1.0));
        for v in f.values.iter() {
            assert!((v.as_ref().unwrap() - linalg::identity(3)).norm() < 1e-8);
        }
    }

    #[test]
    fn jump_detection() {
        let step = |p: &[f64]| Ok(CMatrix::from_element(1, 1, c(if p[0] > 0.0 { 1.0 } else { 0.0 }, 0.0)));
        let d = discontinuity_probe(step, &[0.0], 0.1, 4).unwrap();
        assert!(d.survives && (d.gap - 1.0).abs() < 1e-12);
        let root = |p: &[f64]| Ok(CMatrix::from_element(1, 1, c(p[0].abs().sqrt(), 0.0)));
        assert!(!discontinuity_probe(root, &[0.0], 0.1, 4).unwrap().survives);
    }

    #[test]
    fn c1_defect_of_abs_and_smooth() {
        let absf = |p: &[f64]| Ok(CMatrix::from_element(1, 1, c(p[0].abs(), 0.0)));
        assert!(c1_defect(absf, &[0.0], &[1e-2, 1e-3]).unwrap().defect > 0.5);
        let smooth = |p: &[f64]| Ok(CMatrix::from_element(1, 1, c((p[0] + 2.0 * p[1]).sin(), 0.0)));
        assert!(c1_defect(smooth, &[0.0, 0.0], &[1e-3, 1e-5]).unwrap().defect < 1e-4);
    }

    #[test]
    fn sylvester_maps_invertible() {
        let s = sylvester_obstruction();
        assert!(s.contradiction);
        // eigenvalues of the Sylvester map are μ − 2λ with μ, λ ∈ {±1}
        assert!((s.sigma_min[0] - 1.0).abs() < 1e-12 && (s.sigma_min[1] - 1.0).abs() < 1e-12);
    }
}
