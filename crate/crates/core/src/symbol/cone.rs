//! Quantitative hyperbolicity cones: breadth-first certification of
//! directions by balls of radius |p(ν′)| / (K |ν′|^{N−1}).

use std::collections::VecDeque;

use serde::Serialize;

use super::family::{combine, SymbolFamily};
use crate::error::{Error, Result};
use crate::matrix::{linalg, CMatrix};
use crate::sampling;

#[derive(Clone, Debug, Serialize)]
pub struct ConeEntry {
    pub nu: Vec<f64>,
    pub detval: f64,
    pub radius: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConeChart {
    pub base_direction: Vec<f64>,
    pub certified: Vec<ConeEntry>,
    /// Gradient bound max_{|ξ̃| ≤ 2} |∇ det L(ξ̃)| (sampled, with safety factor).
    #[serde(rename = "K")]
    pub k: f64,
    /// Smallest |det L| among certified directions.
    pub c: f64,
    pub lattice_size: usize,
    pub incomplete: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConeBudget {
    /// Points of the sphere lattice explored by the search.
    pub lattice: usize,
    /// Sphere samples used to bound the gradient.
    pub gradient_samples: usize,
    /// Upper bound on certified directions.
    pub max_certified: usize,
}

impl Default for ConeBudget {
    fn default() -> Self {
        ConeBudget { lattice: 8000, gradient_samples: 4000, max_certified: 8000 }
    }
}

/// Safety factor on the sampled gradient maximum.
pub const GRADIENT_SAFETY: f64 = 1.1;

/// ∂_j det L(ξ̃) = trace(adj(L(ξ̃)) A_j).
pub fn det_gradient(coeffs: &[CMatrix], xi: &[f64]) -> Vec<f64> {
    let l = combine(coeffs, xi);
    let adj = linalg::adjugate(&l);
    coeffs.iter().map(|a| (&adj * a).trace().norm()).collect()
}

/// max over |ξ̃| ≤ 2 of |∇ det L|, using degree-(N−1) homogeneity and a
/// sampled unit sphere.
pub fn gradient_bound(coeffs: &[CMatrix], samples: usize) -> f64 {
    let n = coeffs[0].nrows();
    let dim = coeffs.len();
    let unit = sampling::unit_sphere(dim, samples)
        .iter()
        .map(|p| sampling::norm(&det_gradient(coeffs, p)))
        .fold(0.0, f64::max);
    GRADIENT_SAFETY * 2f64.powi(n as i32 - 1) * unit
}

fn det_real(coeffs: &[CMatrix], nu: &[f64]) -> f64 {
    linalg::det(&combine(coeffs, nu)).norm()
}

pub fn cone_explore(fam: &SymbolFamily, a: &[f64], nu: &[f64], budget: &ConeBudget) -> Result<ConeChart> {
    let coeffs = fam.coefficients(a)?;
    let n = fam.n;
    let base = sampling::normalize(nu);
    let d0 = det_real(&coeffs, &base);
    if !(d0 > 0.0) {
        return Err(Error::Characteristic(nu.to_vec()));
    }
    let k = gradient_bound(&coeffs, budget.gradient_samples);
    let lattice = sampling::unit_sphere(fam.d + 1, budget.lattice);
    let radius_of = |p: &[f64]| det_real(&coeffs, p) / k;
    let _ = n;

    let mut certified = vec![ConeEntry { nu: base.clone(), detval: d0, radius: d0 / k }];
    let mut visited = vec![false; lattice.len()];
    let mut queue: VecDeque<usize> = VecDeque::new();
    queue.push_back(0);
    let mut incomplete = false;
    while let Some(idx) = queue.pop_front() {
        let (center, r) = (certified[idx].nu.clone(), certified[idx].radius);
        for (li, p) in lattice.iter().enumerate() {
            if visited[li] {
                continue;
            }
            let dist = p.iter().zip(&center).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
            if dist < r {
                visited[li] = true;
                if certified.len() >= budget.max_certified {
                    incomplete = true;
                    continue;
                }
                let detval = det_real(&coeffs, p);
                certified.push(ConeEntry { nu: p.clone(), detval, radius: radius_of(p) });
                queue.push_back(certified.len() - 1);
            }
        }
    }
    let c = certified.iter().map(|e| e.detval).fold(f64::INFINITY, f64::min);
    Ok(ConeChart { base_direction: base, certified, k, c, lattice_size: lattice.len(), incomplete })
}

impl ConeChart {
    /// Index of a certified ball containing the direction of `nu`.
    pub fn certifies(&self, nu: &[f64]) -> Option<usize> {
        let u = sampling::normalize(nu);
        self.certified.iter().position(|e| {
            let dist = u.iter().zip(&e.nu).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
            dist < e.radius
        })
    }

    /// Radius certified at the base direction.
    pub fn base_radius(&self) -> f64 {
        self.certified[0].radius
    }
}

/// C₁ = K C |ν| / (c |ν′|); errors unless ν′ is certified by the chart.
pub fn direction_change_constant(chart: &ConeChart, nu: &[f64], nu_prime: &[f64], big_c: f64, small_c: f64) -> Result<f64> {
    if chart.certifies(nu_prime).is_none() {
        return Err(Error::Invalid(format!("direction {nu_prime:?} is not certified by the cone chart")));
    }
    if !(small_c > 0.0) {
        return Err(Error::Invalid("c must be positive".into()));
    }
    Ok(chart.k * big_c * sampling::norm(nu) / (small_c * sampling::norm(nu_prime)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::ParamBox;
    use crate::symbol::family::{ASlot, FamilySpec};

    fn light_cone() -> SymbolFamily {
        SymbolFamily::from_spec(&FamilySpec::Expr {
            name: "light".into(),
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

    #[test]
    fn light_cone_fills_quarter_circle() {
        let chart = cone_explore(&light_cone(), &[], &[1.0, 0.0], &ConeBudget { lattice: 720, gradient_samples: 360, max_certified: 720 }).unwrap();
        assert!(!chart.incomplete);
        for e in &chart.certified {
            assert!(e.nu[0] > e.nu[1].abs(), "{:?}", e.nu);
        }
        // every lattice angle with |θ| < 40° is reached
        let inside = chart.certified.iter().filter(|e| e.nu[1].atan2(e.nu[0]).abs() < 40f64.to_radians()).count();
        assert!(inside >= 150, "{inside}");
    }

    #[test]
    fn base_radius_at_most_one() {
        let f = SymbolFamily::example1(ASlot::Const(0.5));
        let chart = cone_explore(&f, &[1.0], &[1.0, 0.0, 0.0], &ConeBudget { lattice: 2000, gradient_samples: 2000, max_certified: 2000 }).unwrap();
        assert!(chart.base_radius() <= 1.0);
        assert!((chart.k / GRADIENT_SAFETY - 12.0).abs() < 0.05, "K = {}", chart.k);
    }

    #[test]
    fn direction_change_formula() {
        let f = light_cone();
        let chart = cone_explore(&f, &[], &[1.0, 0.0], &ConeBudget { lattice: 360, gradient_samples: 360, max_certified: 360 }).unwrap();
        let c1 = direction_change_constant(&chart, &[1.0, 0.0], &[1.0, 0.0], 2.0, 1.0).unwrap();
        assert!((c1 - chart.k * 2.0).abs() < 1e-12);
        let c2 = direction_change_constant(&chart, &[1.0, 0.0], &[2.0, 0.0], 2.0, 1.0).unwrap();
        assert!((c2 - 0.5 * c1).abs() < 1e-12);
        assert!(direction_change_constant(&chart, &[1.0, 0.0], &[0.0, 1.0], 2.0, 1.0).is_err());
    }
}
