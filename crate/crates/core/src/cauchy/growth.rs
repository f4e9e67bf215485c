//! Growth rates of single Fourier modes e^{iyη} for the x-dependent model
//! systems, measured by evolution.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::evolve::{evolve, reduced_coefficients, widened, EvolutionProblem, LineSystem, Taper, RK4_MARGIN};
use super::oscillator::{first_order_shift, growing_root};
use crate::error::{Error, Result};
use crate::matrix::{c, linalg, CMatrix, C64};
use crate::regularity::linear_fit;
use crate::sampling::ParamBox;
use crate::symbol::{ASlot, FamilySpec, SymbolFamily};
use crate::wavepacket::GridFunction;

/// Initial data of the mode evolutions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthData {
    /// Gaussian ground state of the unperturbed oscillator with the matching
    /// second and third components (only for the 3×3 model with slot a).
    Ansatz,
    /// e^{−z²/2} in every component, weights 1, ½, ⅓, …
    Gaussian,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrowthOptions {
    /// points of the z-grid
    pub n: usize,
    /// z ∈ [−l, l)
    pub l: f64,
    pub t_final: f64,
    /// in z; `absorb` is a rate in τ = √η t
    pub taper: Taper,
    pub data: GrowthData,
}

impl Default for GrowthOptions {
    fn default() -> Self {
        GrowthOptions { n: 512, l: 16.0, t_final: 1.0, taper: Taper::default().with_absorb(6.0), data: GrowthData::Ansatz }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthPoint {
    pub eta: f64,
    /// growth rate in physical time
    pub sigma: f64,
    pub r2: f64,
    pub steps: usize,
    pub dt: f64,
    /// ln(‖u(T)‖/‖u(0)‖)
    pub log_amplification: f64,
    pub dropped: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PowerFit {
    pub exponent: f64,
    pub prefactor: f64,
    pub r2: f64,
    pub count: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthReport {
    pub family: String,
    pub eta_list: Vec<f64>,
    pub sigma: Vec<f64>,
    pub points: Vec<GrowthPoint>,
    pub fit: Option<PowerFit>,
    pub flags: Vec<String>,
}

/// Slope of ln‖u‖ against t over the middle third of [0, T].
pub fn middle_third_rate(times: &[f64], norms: &[f64]) -> (f64, f64) {
    let t_end = *times.last().unwrap_or(&0.0);
    let (xs, ys): (Vec<f64>, Vec<f64>) = times
        .iter()
        .zip(norms)
        .filter(|(t, v)| **t >= t_end / 3.0 && **t <= 2.0 * t_end / 3.0 && **v > 0.0)
        .map(|(t, v)| (*t, v.ln()))
        .unzip();
    if xs.len() < 2 {
        return (0.0, 0.0);
    }
    let (s, _, r2) = linear_fit(&xs, &ys);
    (s, r2)
}

/// σ = g·η^p by least squares on the positive rates.
pub fn power_fit(points: &[GrowthPoint]) -> Option<PowerFit> {
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        points.iter().filter(|p| p.dropped.is_none() && p.sigma > 0.0).map(|p| (p.eta.ln(), p.sigma.ln())).unzip();
    if xs.len() < 4 {
        return None;
    }
    let (p, lg, r2) = linear_fit(&xs, &ys);
    Some(PowerFit { exponent: p, prefactor: lg.exp(), r2, count: xs.len() })
}

/// Shift of β² at first order for the 3×3 model: ⟨ψ0, (z a(z/√η))′ ψ0⟩.
fn first_order(slot: ASlot, eta: f64) -> Result<f64> {
    Ok(match slot {
        ASlot::Const(a) => a,
        ASlot::X => 0.0,
        ASlot::AbsPow(alpha) => eta.powf(-alpha / 2.0) * first_order_shift(alpha)?,
    })
}

/// (u, v, w) = e^{−z²/2}(1, (i/β)(−z − i z a), −(z/β)(1 + a²)) with a = a(z/√η).
fn ansatz(slot: ASlot, eta: f64, beta: C64, z: f64) -> Vec<C64> {
    let a = slot.eval(z / eta.sqrt());
    let g = (-0.5 * z * z).exp();
    let i = c(0.0, 1.0);
    vec![c(g, 0.0), i / beta * (c(-z, 0.0) - i * z * a) * g, -(c(z * (1.0 + a * a), 0.0) / beta) * g]
}

fn ansatz_root(slot: ASlot, eta: f64) -> Result<C64> {
    Ok(growing_root(c(1.0, first_order(slot, eta)?)))
}

fn example1_slot(fam: &SymbolFamily) -> Option<ASlot> {
    match fam.spec() {
        FamilySpec::Example1 { a_slot, .. } => Some(*a_slot),
        _ => None,
    }
}

/// Mode e^{iyη} of u_t + A1(x)u_x + A2(x)u_y = 0 in z = √η x, τ = √η t:
/// U_τ + A1 U_z + i√η A2 U = 0, coefficients at x = localize(z)/√η.
fn one_mode(fam: &SymbolFamily, eta: f64, opts: &GrowthOptions) -> Result<GrowthPoint> {
    let sq = eta.sqrt();
    let (n, l) = (opts.n, opts.l);
    let grid = GridFunction::zeros(1, n, l, fam.n)?;
    let zs = grid.axis();
    let fam = widened(fam, l / sq + 1e-9)?;
    let mut a = Vec::with_capacity(n);
    let mut cm = Vec::with_capacity(n);
    let mut speed = 0.0f64;
    for &z in &zs {
        let ms = reduced_coefficients(&fam, opts.taper.localize(z, l) / sq)?;
        for ev in linalg::eigenvalues(&ms[0])? {
            speed = speed.max(ev.norm());
        }
        a.push(ms[0].clone());
        let damp = CMatrix::identity(fam.n, fam.n) * c(opts.taper.damping(z, l), 0.0);
        cm.push(&ms[1] * c(0.0, sq) + damp);
    }
    let sys = LineSystem::new(n, l, &a, &cm);
    let h = grid.h();
    let cfl = if speed > 0.0 { 0.5 * h / speed } else { f64::INFINITY };
    let tau_final = opts.t_final * sq;
    let dt0 = cfl.min(RK4_MARGIN / sys.stiffness()).min(tau_final);
    let steps = (tau_final / dt0).ceil() as usize;
    let dt = tau_final / steps as f64;

    let root = match opts.data {
        GrowthData::Ansatz => {
            let slot =
                example1_slot(&fam).ok_or_else(|| Error::Invalid("ansatz data needs the 3x3 model family".into()))?;
            Some((slot, ansatz_root(slot, eta)?))
        }
        GrowthData::Gaussian => None,
    };
    let mut u = vec![c(0.0, 0.0); fam.n * n];
    for (i, &z) in zs.iter().enumerate() {
        let v = match root {
            Some((slot, beta)) => ansatz(slot, eta, beta, z),
            None => (0..fam.n).map(|q| c((-0.5 * z * z).exp() / (q as f64 + 1.0), 0.0)).collect(),
        };
        for q in 0..fam.n {
            u[q * n + i] = v[q];
        }
    }
    let norm = |u: &[C64]| (u.iter().map(|z| z.norm_sqr()).sum::<f64>() * h).sqrt();
    let mut times = vec![0.0];
    let mut norms = vec![norm(&u)];
    let mut dropped = None;
    for s in 0..steps {
        sys.rk4(&mut u, dt, None);
        let v = norm(&u);
        if !v.is_finite() || v > 1e250 {
            dropped = Some(format!("saturated at t = {:.4}", (s + 1) as f64 * dt / sq));
            break;
        }
        times.push((s + 1) as f64 * dt / sq);
        norms.push(v);
    }
    let (sigma, r2) = middle_third_rate(&times, &norms);
    Ok(GrowthPoint {
        eta,
        sigma,
        r2,
        steps,
        dt: dt / sq,
        log_amplification: (norms.last().unwrap() / norms[0]).ln(),
        dropped,
    })
}

/// Per-η evolutions (parallel over η) and the power-law fit σ(η) = g·η^p.
pub fn mode_growth(fam: &SymbolFamily, eta_list: &[f64], opts: &GrowthOptions) -> Result<GrowthReport> {
    if fam.d != 2 {
        return Err(Error::Invalid("mode growth needs a family in two space dimensions".into()));
    }
    if opts.taper.start * opts.l < 8.0 {
        return Err(Error::Invalid(format!(
            "grid must resolve |z| <= 8 before the taper: start*l = {}",
            opts.taper.start * opts.l
        )));
    }
    if eta_list.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::Invalid("frequencies must be positive".into()));
    }
    let points: Vec<GrowthPoint> = eta_list.par_iter().map(|&eta| one_mode(fam, eta, opts)).collect::<Result<_>>()?;
    let mut flags: Vec<String> = points
        .iter()
        .filter_map(|p| p.dropped.as_ref().map(|d| format!("eta = {}: {d}", p.eta)))
        .collect();
    let fit = power_fit(&points);
    if fit.is_none() {
        flags.push("fewer than 4 growing frequencies; no power law fitted".into());
    }
    Ok(GrowthReport {
        family: fam.name.clone(),
        eta_list: eta_list.to_vec(),
        sigma: points.iter().map(|p| p.sigma).collect(),
        points,
        fit,
        flags,
    })
}

/// The 3×3 model with a(x) = |x|^α.
pub fn example1_growth(alpha: f64, eta_list: &[f64], opts: &GrowthOptions) -> Result<GrowthReport> {
    mode_growth(&SymbolFamily::example1(ASlot::AbsPow(alpha)), eta_list, opts)
}

/// Control: the 3×3 model with A2 replaced by the symmetric [[0,x,x],[x,0,0],[x,0,0]].
pub fn symmetric_control() -> SymbolFamily {
    let row = |v: [&str; 3]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    SymbolFamily::from_spec(&FamilySpec::Expr {
        name: "symmetric-control".into(),
        n: 3,
        d: 2,
        params: ParamBox::interval("x", -1.0, 1.0, 3),
        coefficients: vec![
            vec![row(["1", "0", "0"]), row(["0", "1", "0"]), row(["0", "0", "1"])],
            vec![row(["0", "1", "0"]), row(["1", "0", "0"]), row(["0", "0", "0"])],
            vec![row(["0", "x", "x"]), row(["x", "0", "0"]), row(["x", "0", "0"])],
        ],
    })
    .expect("valid builtin")
}

/// Same mode experiment on the physical (x, y) grid through `evolve`: data
/// e^{iyη} times the ansatz in √η x, η = πk/l for each k.
#[derive(Clone, Debug, Serialize)]
pub struct PhysicalGrowth {
    pub n: usize,
    /// half-width of the rescaled domain, L·√η
    pub lz: f64,
    pub t_final: f64,
    /// physical half-period used for each mode
    pub domains: Vec<f64>,
    pub points: Vec<GrowthPoint>,
    pub fit: Option<PowerFit>,
}

/// Each mode index k runs on its own period L_k = lz²/(πk), so that
/// η = πk/L_k and L_k·√η = lz. A fixed L would push the taper zone out to
/// large z, where p passes through zero again with a non-Lipschitz a(p) and
/// seeds growth of its own.
pub fn physical_growth(fam: &SymbolFamily, ks: &[usize], n: usize, lz: f64, t_final: f64, taper: Taper) -> Result<PhysicalGrowth> {
    let slot = example1_slot(fam).ok_or_else(|| Error::Invalid("physical growth runs the 3x3 model".into()))?;
    if taper.start * lz < 8.0 {
        return Err(Error::Invalid(format!("rescaled domain {lz} leaves the taper inside the mode")));
    }
    let mut points = Vec::new();
    let mut domains = Vec::new();
    for &k in ks {
        if k == 0 || 2 * k >= n {
            return Err(Error::Invalid(format!("mode index {k} is not resolved on {n} points")));
        }
        let l = lz * lz / (std::f64::consts::PI * k as f64);
        let eta = std::f64::consts::PI * k as f64 / l;
        let sq = eta.sqrt();
        let beta = ansatz_root(slot, eta)?;
        let u0 = GridFunction::from_fn(2, n, l, 3, |p| {
            let v = ansatz(slot, eta, beta, sq * p[0]);
            let e = c(0.0, eta * p[1]).exp();
            v.into_iter().map(|z| z * e).collect()
        })?;
        // absorb is a rate in τ, as for the reduced runs
        let tp = taper.with_absorb(taper.absorb * sq);
        let tr = evolve(&EvolutionProblem::from_family(fam, u0, t_final, tp)?)?;
        let (sigma, r2) = middle_third_rate(&tr.times, &tr.norms);
        domains.push(l);
        points.push(GrowthPoint {
            eta,
            sigma,
            r2,
            steps: tr.steps,
            dt: tr.cfl.dt,
            log_amplification: (tr.norms.last().unwrap() / tr.norms[0]).ln(),
            dropped: tr.aborted_at.map(|t| format!("non-finite at t = {t}")),
        });
    }
    let fit = power_fit(&points);
    Ok(PhysicalGrowth { n, lz, t_final, domains, points, fit })
}
