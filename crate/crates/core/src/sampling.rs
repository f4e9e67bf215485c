//! Deterministic point sets on spheres and parameter boxes.

use serde::{Deserialize, Serialize};

/// Fibonacci lattice on S².
pub fn fibonacci_sphere(count: usize) -> Vec<[f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|k| {
            let z = 1.0 - (2.0 * k as f64 + 1.0) / count as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * k as f64;
            [r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

/// Equally spaced angles on S¹, starting at angle `offset`.
pub fn circle(count: usize, offset: f64) -> Vec<[f64; 2]> {
    (0..count)
        .map(|k| {
            let t = offset + std::f64::consts::TAU * k as f64 / count as f64;
            [t.cos(), t.sin()]
        })
        .collect()
}

/// `count` points on the unit sphere of ℝ^dim (exactly `{±1}` for dim 1;
/// tensor angles for dim 2; Fibonacci for dim 3; hyperspherical tensor grid
/// beyond).
pub fn unit_sphere(dim: usize, count: usize) -> Vec<Vec<f64>> {
    match dim {
        0 => Vec::new(),
        1 => vec![vec![1.0], vec![-1.0]],
        2 => circle(count, 0.5 * std::f64::consts::TAU / count as f64).iter().map(|p| p.to_vec()).collect(),
        3 => fibonacci_sphere(count).iter().map(|p| p.to_vec()).collect(),
        _ => {
            // Fibonacci on S² times a circle factor, normalized
            let per = ((count as f64).sqrt().ceil() as usize).max(2);
            let mut out = Vec::new();
            for p in fibonacci_sphere(per) {
                for q in circle(per, 0.1) {
                    let mut v = vec![0.0; dim];
                    v[0] = p[0];
                    v[1] = p[1];
                    v[2] = p[2] * q[0];
                    for x in v.iter_mut().skip(3) {
                        *x = p[2] * q[1] / ((dim - 3) as f64).sqrt();
                    }
                    let n = norm(&v);
                    out.push(v.iter().map(|x| x / n).collect());
                }
            }
            out.truncate(count.max(1));
            out
        }
    }
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn normalize(v: &[f64]) -> Vec<f64> {
    let n = norm(v);
    v.iter().map(|x| x / n).collect()
}

/// Orthonormal basis of the orthogonal complement of `nu` (Gram–Schmidt on
/// the standard basis, skipping the most aligned vector).
pub fn complement_basis(nu: &[f64]) -> Vec<Vec<f64>> {
    let dim = nu.len();
    let u = normalize(nu);
    let skip = (0..dim).max_by(|&i, &j| u[i].abs().total_cmp(&u[j].abs())).unwrap_or(0);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for k in 0..dim {
        if k == skip {
            continue;
        }
        let mut v = vec![0.0; dim];
        v[k] = 1.0;
        let p = dot(&v, &u);
        for (x, y) in v.iter_mut().zip(&u) {
            *x -= p * y;
        }
        for b in &basis {
            let p = dot(&v, b);
            for (x, y) in v.iter_mut().zip(b) {
                *x -= p * y;
            }
        }
        basis.push(normalize(&v));
    }
    basis
}

/// Points on the unit sphere of ν^⊥.
pub fn complement_sphere(nu: &[f64], count: usize) -> Vec<Vec<f64>> {
    let basis = complement_basis(nu);
    unit_sphere(basis.len(), count)
        .into_iter()
        .map(|w| {
            let mut v = vec![0.0; nu.len()];
            for (coef, b) in w.iter().zip(&basis) {
                for (x, y) in v.iter_mut().zip(b) {
                    *x += coef * y;
                }
            }
            v
        })
        .collect()
}

/// Uniform tensor grid over an axis-aligned box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamBox {
    pub names: Vec<String>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub samples: Vec<usize>,
}

impl ParamBox {
    pub fn empty() -> Self {
        ParamBox { names: Vec::new(), lo: Vec::new(), hi: Vec::new(), samples: Vec::new() }
    }

    pub fn interval(name: &str, lo: f64, hi: f64, samples: usize) -> Self {
        ParamBox { names: vec![name.into()], lo: vec![lo], hi: vec![hi], samples: vec![samples] }
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn validate(&self) -> Result<(), String> {
        let m = self.names.len();
        if self.lo.len() != m || self.hi.len() != m || self.samples.len() != m {
            return Err("parameter box: names, lo, hi and samples must have equal length".into());
        }
        for k in 0..m {
            if !(self.lo[k] <= self.hi[k]) {
                return Err(format!("parameter box: lo > hi for '{}'", self.names[k]));
            }
            if self.samples[k] == 0 {
                return Err(format!("parameter box: zero samples for '{}'", self.names[k]));
            }
        }
        Ok(())
    }

    pub fn contains(&self, a: &[f64]) -> bool {
        a.len() == self.dim()
            && a.iter().enumerate().all(|(k, &x)| {
                let slack = 1e-12 * (1.0 + self.lo[k].abs().max(self.hi[k].abs()));
                x >= self.lo[k] - slack && x <= self.hi[k] + slack
            })
    }

    pub fn axis(&self, k: usize) -> Vec<f64> {
        let n = self.samples[k];
        if n == 1 {
            return vec![0.5 * (self.lo[k] + self.hi[k])];
        }
        (0..n).map(|i| self.lo[k] + (self.hi[k] - self.lo[k]) * i as f64 / (n - 1) as f64).collect()
    }

    /// Lexicographically ordered tensor grid.
    pub fn grid(&self) -> Vec<Vec<f64>> {
        let mut pts = vec![Vec::new()];
        for k in 0..self.dim() {
            let axis = self.axis(k);
            pts = pts
                .into_iter()
                .flat_map(|p| {
                    axis.iter().map(move |&x| {
                        let mut q = p.clone();
                        q.push(x);
                        q
                    })
                })
                .collect();
        }
        pts
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_points_are_unit() {
        for dim in 1..=5 {
            for p in unit_sphere(dim, 50) {
                assert!((norm(&p) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn complement_is_orthonormal() {
        let nu = [1.0, 0.5, -0.2];
        let b = complement_basis(&nu);
        assert_eq!(b.len(), 2);
        for v in &b {
            assert!(dot(v, &nu).abs() < 1e-14);
            assert!((norm(v) - 1.0).abs() < 1e-14);
        }
        assert!(dot(&b[0], &b[1]).abs() < 1e-14);
    }

    #[test]
    fn grid_is_lexicographic() {
        let b = ParamBox {
            names: vec!["x".into(), "y".into()],
            lo: vec![0.0, 0.0],
            hi: vec![1.0, 2.0],
            samples: vec![2, 3],
        };
        let g = b.grid();
        assert_eq!(g.len(), 6);
        assert_eq!(g[1], vec![0.0, 1.0]);
        assert_eq!(g[3], vec![1.0, 0.0]);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }
}
