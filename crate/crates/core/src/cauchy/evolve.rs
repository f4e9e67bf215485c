//! RK4 pseudospectral evolution of u_t + Σ Ak(x) ∂k u + B(x) u = f on a
//! periodic grid. Coefficients depend on the first coordinate only, so in 2-d
//! every Fourier mode in y is an independent line problem in x.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{c, linalg, CMatrix, C64};
use crate::sampling::ParamBox;
use crate::symbol::{combine, SymbolFamily};
use crate::wavepacket::{fft_forward, fft_inverse, frequencies, Coefficients, GridFunction};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Largest dt·ρ accepted for RK4, ρ a bound on the semi-discrete spectrum.
/// The stability region reaches 2√2 on the imaginary axis.
pub const RK4_MARGIN: f64 = 2.5;

/// Smooth switch-off of unbounded coefficients: the coefficient at x is
/// evaluated at x·χ(|x|/L), χ = 1 below `start`, 0 beyond `end`. With
/// `absorb` > 0 a damping absorb·(1 − χ) acts in the switch-off zone, where
/// the bent coefficients otherwise trap spurious growing modes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Taper {
    pub start: f64,
    pub end: f64,
    #[serde(default)]
    pub absorb: f64,
}

impl Default for Taper {
    fn default() -> Self {
        Taper { start: 0.6, end: 0.8, absorb: 0.0 }
    }
}

impl Taper {
    pub fn weight(&self, x: f64, l: f64) -> f64 {
        let r = x.abs() / l;
        if r <= self.start {
            1.0
        } else if r >= self.end {
            0.0
        } else {
            let t = (r - self.start) / (self.end - self.start);
            1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
        }
    }

    pub fn localize(&self, x: f64, l: f64) -> f64 {
        x * self.weight(x, l)
    }

    pub fn damping(&self, x: f64, l: f64) -> f64 {
        self.absorb * (1.0 - self.weight(x, l))
    }

    pub fn with_absorb(mut self, absorb: f64) -> Self {
        self.absorb = absorb;
        self
    }
}

/// Family with its parameter box widened to [−r, r] so that the tapered
/// coordinate is always inside it.
pub(crate) fn widened(fam: &SymbolFamily, r: f64) -> Result<SymbolFamily> {
    match fam.params.dim() {
        0 => Ok(fam.clone()),
        1 => {
            let name = fam.params.names[0].clone();
            fam.clone().with_params(ParamBox::interval(&name, -r, r, 3))
        }
        _ => Err(Error::Invalid("evolutions need a family with at most one parameter (x)".into())),
    }
}

/// Ak(x) = A0(x)⁻¹ Ak(x) for k = 1..d.
pub(crate) fn reduced_coefficients(fam: &SymbolFamily, x: f64) -> Result<Vec<CMatrix>> {
    let a = if fam.params.dim() == 0 { vec![] } else { vec![x] };
    let cs = fam.coefficients(&a)?;
    let a0i = cs[0].clone().try_inverse().ok_or_else(|| {
        let mut nu = vec![0.0; fam.d + 1];
        nu[0] = 1.0;
        Error::Characteristic(nu)
    })?;
    Ok((1..=fam.d)
        .map(|k| {
            let mut e = vec![0.0; fam.d + 1];
            e[k] = 1.0;
            &a0i * combine(&cs, &e)
        })
        .collect())
}

type ZeroOrder = Arc<dyn Fn(f64) -> Result<CMatrix> + Send + Sync>;
pub type Forcing = Arc<dyn Fn(f64, &[f64]) -> Vec<C64> + Send + Sync>;

#[derive(Clone)]
pub struct EvolutionProblem {
    pub coeffs: Coefficients,
    pub zero_order: Option<ZeroOrder>,
    pub forcing: Option<Forcing>,
    pub u0: GridFunction,
    pub t_final: f64,
    /// None picks the largest stable step.
    pub dt: Option<f64>,
    /// Keep every `stride`-th step as a snapshot; the initial and final
    /// states are always kept.
    pub stride: usize,
}

impl std::fmt::Debug for EvolutionProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "EvolutionProblem(T = {}, dt = {:?}, {:?})", self.t_final, self.dt, self.coeffs)
    }
}

impl EvolutionProblem {
    pub fn new(coeffs: Coefficients, u0: GridFunction, t_final: f64) -> Self {
        EvolutionProblem { coeffs, zero_order: None, forcing: None, u0, t_final, dt: None, stride: usize::MAX }
    }

    /// Time direction (1, 0, …); spatial coefficients localized by `taper`.
    pub fn from_family(fam: &SymbolFamily, u0: GridFunction, t_final: f64, taper: Taper) -> Result<Self> {
        if fam.d != u0.dims || fam.n != u0.components {
            return Err(Error::Dimension(format!(
                "family is {}x{} in {} space dimensions, data has {} components in {}",
                fam.n, fam.n, fam.d, u0.components, u0.dims
            )));
        }
        let l = u0.l;
        let fam = widened(fam, l)?;
        let m = u0.components;
        let coeffs = Coefficients::new(u0.dims, m, move |x| reduced_coefficients(&fam, taper.localize(x[0], l)));
        let p = Self::new(coeffs, u0, t_final);
        Ok(if taper.absorb > 0.0 {
            p.with_zero_order(move |x| Ok(linalg::identity(m) * c(taper.damping(x, l), 0.0)))
        } else {
            p
        })
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = Some(dt);
        self
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.stride = stride.max(1);
        self
    }

    pub fn with_zero_order<F>(mut self, b: F) -> Self
    where
        F: Fn(f64) -> Result<CMatrix> + Send + Sync + 'static,
    {
        self.zero_order = Some(Arc::new(b));
        self
    }

    pub fn with_forcing(mut self, f: Forcing) -> Self {
        self.forcing = Some(f);
        self
    }
}

/// u_t = −a(x) u_x − c(x) u + f on one periodic line, component-major storage.
pub(crate) struct LineSystem {
    n: usize,
    m: usize,
    k: Vec<f64>,
    a: Vec<C64>,
    c: Vec<C64>,
}

fn flatten(ms: &[CMatrix], m: usize) -> Vec<C64> {
    let mut out = Vec::with_capacity(ms.len() * m * m);
    for mat in ms {
        for r in 0..m {
            for q in 0..m {
                out.push(mat[(r, q)]);
            }
        }
    }
    out
}

impl LineSystem {
    pub(crate) fn new(n: usize, l: f64, a: &[CMatrix], c: &[CMatrix]) -> Self {
        let m = a[0].nrows();
        LineSystem { n, m, k: frequencies(n, l), a: flatten(a, m), c: flatten(c, m) }
    }

    /// Bound on the spectral radius of the semi-discrete operator.
    pub(crate) fn stiffness(&self) -> f64 {
        let kmax = self.k.iter().fold(0.0f64, |s, k| s.max(k.abs()));
        let m = self.m;
        (0..self.n)
            .map(|i| {
                let a = CMatrix::from_row_slice(m, m, &self.a[i * m * m..(i + 1) * m * m]);
                let cc = CMatrix::from_row_slice(m, m, &self.c[i * m * m..(i + 1) * m * m]);
                kmax * linalg::norm2(&a) + linalg::norm2(&cc)
            })
            .fold(0.0, f64::max)
    }

    fn rhs(&self, u: &[C64], f: Option<&[C64]>, out: &mut [C64], du: &mut [C64]) {
        let (n, m) = (self.n, self.m);
        du.copy_from_slice(u);
        for q in 0..m {
            let s = &mut du[q * n..(q + 1) * n];
            fft_forward(s, n, 1);
            for (v, k) in s.iter_mut().zip(&self.k) {
                *v *= c(0.0, *k);
            }
            fft_inverse(s, n, 1);
        }
        for i in 0..n {
            let a = &self.a[i * m * m..(i + 1) * m * m];
            let cc = &self.c[i * m * m..(i + 1) * m * m];
            for r in 0..m {
                let mut acc = ZERO;
                for q in 0..m {
                    acc += a[r * m + q] * du[q * n + i] + cc[r * m + q] * u[q * n + i];
                }
                out[r * n + i] = f.map_or(ZERO, |f| f[r * n + i]) - acc;
            }
        }
    }

    /// One classical RK4 step; `f` gives the forcing at t, t + dt/2, t + dt.
    pub(crate) fn rk4(&self, u: &mut [C64], dt: f64, f: Option<[&[C64]; 3]>) {
        let len = u.len();
        let mut du = vec![ZERO; len];
        let mut k1 = vec![ZERO; len];
        let mut k2 = vec![ZERO; len];
        let mut k3 = vec![ZERO; len];
        let mut k4 = vec![ZERO; len];
        let mut tmp = vec![ZERO; len];
        self.rhs(u, f.map(|f| f[0]), &mut k1, &mut du);
        for i in 0..len {
            tmp[i] = u[i] + k1[i] * (0.5 * dt);
        }
        self.rhs(&tmp, f.map(|f| f[1]), &mut k2, &mut du);
        for i in 0..len {
            tmp[i] = u[i] + k2[i] * (0.5 * dt);
        }
        self.rhs(&tmp, f.map(|f| f[1]), &mut k3, &mut du);
        for i in 0..len {
            tmp[i] = u[i] + k3[i] * dt;
        }
        self.rhs(&tmp, f.map(|f| f[2]), &mut k4, &mut du);
        for i in 0..len {
            u[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (dt / 6.0);
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CflReport {
    /// max spectral radius of the principal symbol over the grid and unit directions
    pub speed: f64,
    /// 0.5·h / speed
    pub cfl_limit: f64,
    /// RK4_MARGIN / stiffness of the semi-discrete operator
    pub stability_limit: f64,
    pub dt: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Snapshot {
    pub t: f64,
    #[serde(skip)]
    pub u: GridFunction,
    pub norm: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
    pub steps: usize,
    pub cfl: CflReport,
    pub active_modes: usize,
    /// max_t |‖u(t)‖/‖u0‖ − 1|
    pub max_norm_deviation: f64,
    /// time of the first non-finite state; the last snapshot is the last finite one
    pub aborted_at: Option<f64>,
}

impl Trajectory {
    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().expect("a trajectory holds at least the initial state")
    }

    /// Forcing-free growth constant: slope of the least-squares fit of
    /// ln(‖u(t)‖/‖u0‖) over t.
    pub fn growth_constant(&self) -> f64 {
        let n0 = self.norms[0];
        if n0 == 0.0 {
            return 0.0;
        }
        let ys: Vec<f64> = self.norms.iter().map(|v| (v / n0).ln()).collect();
        crate::regularity::linear_fit(&self.times, &ys).0
    }
}

fn speed(coeffs: &Coefficients, xs: &[f64], dims: usize) -> Result<f64> {
    let dirs: Vec<Vec<f64>> = if dims == 1 {
        vec![vec![1.0]]
    } else {
        (0..32).map(|k| {
            let t = std::f64::consts::PI * k as f64 / 32.0;
            vec![t.cos(), t.sin()]
        }).collect()
    };
    let mut s = 0.0f64;
    for &x in xs {
        let mut p = vec![0.0; dims];
        p[0] = x;
        let mats = coeffs.eval(&p)?;
        for d in &dirs {
            for ev in linalg::eigenvalues(&combine(&mats, d))? {
                s = s.max(ev.norm());
            }
        }
    }
    Ok(s)
}

pub fn evolve(p: &EvolutionProblem) -> Result<Trajectory> {
    let u0 = &p.u0;
    let (n, l, dims, m) = (u0.n, u0.l, u0.dims, u0.components);
    if p.coeffs.dims != dims || p.coeffs.components != m {
        return Err(Error::Dimension("coefficients do not match the initial data".into()));
    }
    if !(dims == 1 || dims == 2) {
        return Err(Error::Invalid("evolutions are 1-d or 2-d".into()));
    }
    if !(p.t_final > 0.0 && p.t_final.is_finite()) {
        return Err(Error::Invalid("final time must be positive".into()));
    }
    u0.check_finite()?;
    let xs = u0.axis();
    let h = u0.h();
    let mats: Vec<Vec<CMatrix>> = xs
        .iter()
        .map(|&x| {
            let mut pt = vec![0.0; dims];
            pt[0] = x;
            p.coeffs.eval(&pt)
        })
        .collect::<Result<_>>()?;
    let b: Vec<CMatrix> = match &p.zero_order {
        Some(f) => xs.iter().map(|&x| f(x)).collect::<Result<_>>()?,
        None => vec![CMatrix::zeros(m, m); n],
    };
    let ax: Vec<CMatrix> = mats.iter().map(|v| v[0].clone()).collect();

    // line data: one line per active y-mode (a single line in 1-d)
    let np = u0.npts();
    let mut spec = u0.values.clone();
    let etas: Vec<f64> = if dims == 2 {
        for q in 0..m {
            fft_forward(&mut spec[q * np..(q + 1) * np], n, 1);
        }
        frequencies(n, l)
    } else {
        vec![0.0]
    };
    let nmodes = etas.len();
    let line_of = |spec: &[C64], j: usize| -> Vec<C64> {
        let mut v = vec![ZERO; m * n];
        for q in 0..m {
            for i in 0..n {
                v[q * n + i] = if dims == 2 { spec[q * np + i * n + j] } else { spec[q * np + i] };
            }
        }
        v
    };
    let scale = spec.iter().fold(0.0f64, |s, z| s.max(z.norm()));
    let active: Vec<usize> = (0..nmodes)
        .filter(|&j| p.forcing.is_some() || line_of(&spec, j).iter().any(|z| z.norm() > 1e-14 * scale))
        .collect();
    let systems: Vec<LineSystem> = active
        .iter()
        .map(|&j| {
            let cm: Vec<CMatrix> = (0..n)
                .map(|i| if dims == 2 { &b[i] + &mats[i][1] * c(0.0, etas[j]) } else { b[i].clone() })
                .collect();
            LineSystem::new(n, l, &ax, &cm)
        })
        .collect();
    let mut lines: Vec<Vec<C64>> = active.iter().map(|&j| line_of(&spec, j)).collect();

    let spd = speed(&p.coeffs, &xs, dims)?;
    let cfl_limit = if spd > 0.0 { 0.5 * h / spd } else { f64::INFINITY };
    let stiff = systems.iter().map(|s| s.stiffness()).fold(0.0, f64::max);
    let stability_limit = if stiff > 0.0 { RK4_MARGIN / stiff } else { f64::INFINITY };
    let limit = cfl_limit.min(stability_limit);
    let dt0 = match p.dt {
        Some(dt) if !(dt > 0.0) => return Err(Error::Invalid("time step must be positive".into())),
        Some(dt) if dt > limit * (1.0 + 1e-12) => {
            return Err(Error::Invalid(format!(
                "time step {dt:.4e} violates the CFL/stability limit {limit:.4e} (CFL {cfl_limit:.4e}, RK4 {stability_limit:.4e})"
            )))
        }
        Some(dt) => dt,
        None => limit.min(p.t_final),
    };
    let steps = (p.t_final / dt0).ceil().max(1.0) as usize;
    let dt = p.t_final / steps as f64;
    let cfl = CflReport { speed: spd, cfl_limit, stability_limit, dt };

    // ‖u‖² = h^d Σ|u|², Parseval in y: Σ_y |u|² = Σ_k |û|² / n
    let ymass = if dims == 2 { h * h / n as f64 } else { h };
    let norm_of = |lines: &[Vec<C64>]| -> f64 {
        (lines.iter().map(|v| v.iter().map(|z| z.norm_sqr()).sum::<f64>()).sum::<f64>() * ymass).sqrt()
    };
    let assemble = |lines: &[Vec<C64>]| -> GridFunction {
        let mut g = u0.like();
        if dims == 2 {
            for (line, &j) in lines.iter().zip(&active) {
                for q in 0..m {
                    for i in 0..n {
                        g.values[q * np + i * n + j] = line[q * n + i];
                    }
                }
            }
            for q in 0..m {
                fft_inverse(&mut g.values[q * np..(q + 1) * np], n, 1);
            }
        } else {
            g.values.copy_from_slice(&lines[0]);
        }
        g
    };
    let forcing_lines = |t: f64| -> Option<Vec<Vec<C64>>> {
        let f = p.forcing.as_ref()?;
        let mut g = u0.like();
        for i in 0..np {
            let v = f(t, &u0.coords(i));
            for q in 0..m {
                g.values[q * np + i] = v[q];
            }
        }
        if dims == 2 {
            for q in 0..m {
                fft_forward(&mut g.values[q * np..(q + 1) * np], n, 1);
            }
        }
        Some(active.iter().map(|&j| line_of(&g.values, j)).collect())
    };

    let n0 = u0.norm();
    let mut times = vec![0.0];
    let mut norms = vec![n0];
    let mut snapshots = vec![Snapshot { t: 0.0, u: u0.clone(), norm: n0 }];
    let mut aborted_at = None;
    let mut max_dev = 0.0f64;
    let mut prev = lines.clone();
    for s in 0..steps {
        let t = s as f64 * dt;
        let fs = [forcing_lines(t), forcing_lines(t + 0.5 * dt), forcing_lines(t + dt)];
        lines.par_iter_mut().zip(&systems).enumerate().for_each(|(k, (line, sys))| {
            let f = match &fs {
                [Some(a), Some(b), Some(c)] => Some([a[k].as_slice(), b[k].as_slice(), c[k].as_slice()]),
                _ => None,
            };
            sys.rk4(line, dt, f);
        });
        let t1 = (s + 1) as f64 * dt;
        let nrm = norm_of(&lines);
        if !nrm.is_finite() {
            aborted_at = Some(t1);
            let last_t = *times.last().unwrap();
            if snapshots.last().map(|s| s.t) != Some(last_t) {
                snapshots.push(Snapshot { t: last_t, u: assemble(&prev), norm: *norms.last().unwrap() });
            }
            break;
        }
        times.push(t1);
        norms.push(nrm);
        if n0 > 0.0 {
            max_dev = max_dev.max((nrm / n0 - 1.0).abs());
        }
        if (s + 1) % p.stride == 0 || s + 1 == steps {
            snapshots.push(Snapshot { t: t1, u: assemble(&lines), norm: nrm });
        }
        prev.clone_from(&lines);
    }
    Ok(Trajectory { times, norms, snapshots, steps, cfl, active_modes: active.len(), max_norm_deviation: max_dev, aborted_at })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::ASlot;

    fn pulse(dims: usize, n: usize, l: f64, comps: usize) -> GridFunction {
        GridFunction::from_fn(dims, n, l, comps, |x| {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            let g = (-2.0 * r2).exp();
            (0..comps).map(|q| c(g * (1.0 + 0.3 * q as f64), 0.2 * g * x[0])).collect()
        })
        .unwrap()
    }

    #[test]
    fn taper_is_smooth_switch() {
        let t = Taper::default();
        assert_eq!(t.weight(0.5, 1.0), 1.0);
        assert_eq!(t.weight(0.85, 1.0), 0.0);
        let w = t.weight(0.7, 1.0);
        assert!((w - 0.5).abs() < 1e-12);
    }

    #[test]
    fn symmetric_constant_system_conserves_norm() {
        let a = linalg::from_real_rows(2, &[0.0, 1.0, 1.0, 0.0]);
        let u0 = pulse(1, 512, 8.0, 2);
        let tr = evolve(&EvolutionProblem::new(Coefficients::constant(vec![a]), u0, 1.0)).unwrap();
        assert!(tr.max_norm_deviation < 1e-6, "{}", tr.max_norm_deviation);
        assert!(tr.aborted_at.is_none());
    }

    #[test]
    fn transport_moves_profile_exactly() {
        // u_t + u_x = 0 shifts by t
        let a = linalg::from_real_rows(1, &[1.0]);
        let u0 = GridFunction::from_fn(1, 256, std::f64::consts::PI, 1, |x| vec![c((-4.0 * x[0] * x[0]).exp(), 0.0)]).unwrap();
        let tr = evolve(&EvolutionProblem::new(Coefficients::constant(vec![a]), u0, 0.5)).unwrap();
        let u = &tr.last().u;
        let err = (0..u.npts())
            .map(|i| {
                let x = u.coords(i)[0] - 0.5;
                (u.values[i] - c((-4.0 * x * x).exp(), 0.0)).norm()
            })
            .fold(0.0, f64::max);
        assert!(err < 1e-7, "{err}");
    }

    #[test]
    fn zero_data_stays_zero() {
        let fam = SymbolFamily::example1(ASlot::X);
        let u0 = GridFunction::zeros(2, 32, 3.0, 3).unwrap();
        let tr = evolve(&EvolutionProblem::from_family(&fam, u0, 0.2, Taper::default()).unwrap()).unwrap();
        assert!(tr.norms.iter().all(|&v| v == 0.0));
        assert_eq!(tr.active_modes, 0);
    }

    #[test]
    fn forcing_integrates_in_time() {
        let a = CMatrix::zeros(1, 1);
        let u0 = GridFunction::zeros(1, 16, 1.0, 1).unwrap();
        let f: Forcing = Arc::new(|t, _| vec![c(2.0 * t, 1.0)]);
        let p = EvolutionProblem::new(Coefficients::constant(vec![a]), u0, 1.0).with_forcing(f).with_dt(0.1);
        let tr = evolve(&p).unwrap();
        let v = tr.last().u.values[3];
        assert!((v - c(1.0, 1.0)).norm() < 1e-12, "{v}");
    }

    #[test]
    fn two_d_matches_direct_symmetric_check() {
        // symmetric A1, A2 in 2-d: norm conserved through the y-mode split
        let a1 = linalg::from_real_rows(2, &[1.0, 0.0, 0.0, -1.0]);
        let a2 = linalg::from_real_rows(2, &[0.0, 1.0, 1.0, 0.0]);
        let u0 = pulse(2, 64, 6.0, 2);
        let tr = evolve(&EvolutionProblem::new(Coefficients::constant(vec![a1, a2]), u0, 0.5).with_dt(0.01)).unwrap();
        assert!(tr.max_norm_deviation < 1e-6, "{}", tr.max_norm_deviation);
    }

    #[test]
    fn step_beyond_limit_is_rejected() {
        let a = linalg::from_real_rows(1, &[1.0]);
        let u0 = pulse(1, 64, 1.0, 1);
        let p = EvolutionProblem::new(Coefficients::constant(vec![a]), u0, 1.0).with_dt(0.5);
        assert!(matches!(evolve(&p), Err(Error::Invalid(_))));
    }

    #[test]
    fn blowup_is_reported_with_last_finite_state() {
        // a huge anti-damping term overflows
        let a = CMatrix::zeros(1, 1);
        let u0 = pulse(1, 16, 1.0, 1);
        let p = EvolutionProblem::new(Coefficients::constant(vec![a]), u0, 2000.0)
            .with_zero_order(|_| Ok(linalg::from_real_rows(1, &[-1.0])))
            .with_stride(1_000_000);
        let tr = evolve(&p).unwrap();
        let t = tr.aborted_at.expect("overflow");
        assert!(t > 300.0 && t < 800.0, "{t}");
        assert!(tr.last().u.check_finite().is_ok());
        assert!(tr.last().t < t);
    }
}
