use serde::Serialize;

use super::grid::GridFunction;
use crate::error::{Error, Result};
use crate::matrix::c;

fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
}

/// Radial bump: 1 on r ≤ 1, 0 on r ≥ 2, quintic smoothstep composed twice
/// in between.
pub fn phi0(r: f64) -> f64 {
    1.0 - smoothstep(smoothstep(r - 1.0))
}

/// φj(ξ) = φ0(2^{−j}ξ).
pub fn phi_j(j: i32, r: f64) -> f64 {
    phi0(r * 2f64.powi(-j))
}

/// θ0 = φ0, θj = φj − φ(j−1).
pub fn theta_j(j: usize, r: f64) -> f64 {
    if j == 0 {
        phi0(r)
    } else {
        phi_j(j as i32, r) - phi_j(j as i32 - 1, r)
    }
}

/// Windows θ0..θJ sampled on the DFT lattice of a grid; J is the first
/// level with φJ ≡ 1 on the lattice.
#[derive(Clone, Debug, Serialize)]
pub struct DyadicFrame {
    pub dims: usize,
    pub n: usize,
    pub l: f64,
    pub top: usize,
    #[serde(skip)]
    pub windows: Vec<Vec<f64>>,
}

impl DyadicFrame {
    pub fn for_grid(u: &GridFunction) -> Self {
        let np = u.npts();
        let radii: Vec<f64> = (0..np).map(|i| u.wavevector(i).iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
        let rmax = radii.iter().cloned().fold(0.0, f64::max);
        let top = if rmax <= 1.0 { 0 } else { rmax.log2().ceil() as usize };
        let windows = (0..=top).map(|j| radii.iter().map(|&r| theta_j(j, r)).collect()).collect();
        DyadicFrame { dims: u.dims, n: u.n, l: u.l, top, windows }
    }

    pub fn levels(&self) -> usize {
        self.top + 1
    }

    /// max |Σθj − 1| over the lattice.
    pub fn partition_defect(&self) -> f64 {
        let np = self.windows[0].len();
        (0..np).map(|i| (self.windows.iter().map(|w| w[i]).sum::<f64>() - 1.0).abs()).fold(0.0, f64::max)
    }

    fn matches(&self, u: &GridFunction) -> bool {
        self.dims == u.dims && self.n == u.n && self.l == u.l
    }

    /// Θj u.
    pub fn apply(&self, u: &GridFunction, j: usize) -> Result<GridFunction> {
        if !self.matches(u) {
            return Err(Error::Dimension("dyadic frame was built for a different grid".into()));
        }
        let w = self.windows.get(j).ok_or_else(|| Error::Invalid(format!("level {j} above top level {}", self.top)))?;
        let mut spec = u.spectrum();
        let np = u.npts();
        for (k, z) in spec.iter_mut().enumerate() {
            *z *= c(w[k % np], 0.0);
        }
        Ok(u.from_spectrum(spec))
    }
}

/// Θ0 u, …, ΘJ u.
pub fn dyadic_decompose(u: &GridFunction, frame: &DyadicFrame) -> Result<Vec<GridFunction>> {
    (0..frame.levels()).map(|j| frame.apply(u, j)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::C64;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    fn noise(n: usize, seed: u64) -> GridFunction {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut g = GridFunction::zeros(1, n, PI, 1).unwrap();
        for z in g.values.iter_mut() {
            *z = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
        g
    }

    #[test]
    fn windows_have_dyadic_support() {
        for j in 1..8 {
            let lo = 2f64.powi(j - 1);
            let hi = 2f64.powi(j + 1);
            for k in 0..400 {
                let r = k as f64 * 0.9;
                if r < lo || r > hi {
                    assert_eq!(theta_j(j as usize, r), 0.0, "{j} {r}");
                }
            }
        }
    }

    #[test]
    fn reconstruction_and_disjointness() {
        let u = noise(512, 1);
        let frame = DyadicFrame::for_grid(&u);
        assert!(frame.partition_defect() < 1e-12);
        let parts = dyadic_decompose(&u, &frame).unwrap();
        let mut sum = u.like();
        for p in &parts {
            for (s, v) in sum.values.iter_mut().zip(&p.values) {
                *s += v;
            }
        }
        let err = sum.values.iter().zip(&u.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
        for j in 0..parts.len() {
            for k in j + 2..parts.len() {
                let tt = frame.apply(&parts[j], k).unwrap();
                assert!(tt.values.iter().all(|z: &C64| z.norm() < 1e-12));
            }
        }
        // almost orthogonality: ‖u‖² = Σ ⟨Θj u, Σ_{|k−j|≤1} Θk u⟩
        let mut total = 0.0;
        for j in 0..parts.len() {
            for k in j.saturating_sub(1)..(j + 2).min(parts.len()) {
                total += parts[j].inner(&parts[k]).re;
            }
        }
        assert!((total - u.norm_sq()).abs() < 1e-10 * u.norm_sq());
    }

    #[test]
    fn single_mode_in_two_levels() {
        let u = GridFunction::from_fn(1, 256, PI, 1, |x| vec![c(0.0, 16.0 * x[0]).exp()]).unwrap();
        let frame = DyadicFrame::for_grid(&u);
        let parts = dyadic_decompose(&u, &frame).unwrap();
        for (j, p) in parts.iter().enumerate() {
            if j != 4 && j != 5 {
                assert!(p.norm() < 1e-12, "level {j}");
            }
        }
    }

    #[test]
    fn mismatched_grid_rejected() {
        let frame = DyadicFrame::for_grid(&noise(64, 2));
        assert!(dyadic_decompose(&noise(128, 3), &frame).is_err());
    }
}
