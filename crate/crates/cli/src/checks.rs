//! The acceptance criteria, each as a self-contained check with its grids
//! and tolerances pinned.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use symlab_core::cauchy::{
    evolve, example1_growth, first_order_shift, oscillator_eigen, physical_growth, EvolutionProblem, GrowthOptions, Taper,
};
use symlab_core::matrix::sumbound::random_admissible;
use symlab_core::matrix::{c, linalg, random, strong_hyperbolicity_certificate, CMatrix};
use symlab_core::regularity::{
    default_radii, discontinuity_probe, holder_fit, linear_fit, symmetrizer_field, xxi_slice, FieldSamples,
};
use symlab_core::sampling::{self, ParamBox};
use symlab_core::symbol::full::{canonical_in_direction, psp_check, random_psp_instance};
use symlab_core::symbol::hyperbolic::char_roots;
use symlab_core::symbol::{
    cone_explore, direction_change_constant, necessary_condition_probe, strong_hyperbolicity_in_direction, ASlot,
    ConeBudget, SamplePlan, SymbolFamily,
};
use symlab_core::wavepacket::{
    commutator_energy_probe, dyadic_decompose, localization_probe, wavepacket_transform, Coefficients, DyadicFrame,
    GridFunction,
};
use symlab_core::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

/// One inequality of a criterion: `value` compared against `bound`.
#[derive(Clone, Debug, Serialize)]
pub struct SubCheck {
    pub name: String,
    pub value: f64,
    pub bound: String,
    pub pass: bool,
}

pub(crate) fn at_most(name: &str, value: f64, bound: f64) -> SubCheck {
    SubCheck { name: name.into(), value, bound: format!("<= {bound:e}"), pass: value <= bound }
}

pub(crate) fn at_least(name: &str, value: f64, bound: f64) -> SubCheck {
    SubCheck { name: name.into(), value, bound: format!(">= {bound:e}"), pass: value >= bound }
}

pub(crate) fn above(name: &str, value: f64, bound: f64) -> SubCheck {
    SubCheck { name: name.into(), value, bound: format!("> {bound:e}"), pass: value > bound }
}

pub(crate) fn within(name: &str, value: f64, target: f64, tol: f64) -> SubCheck {
    SubCheck { name: name.into(), value, bound: format!("{target} +- {tol}"), pass: (value - target).abs() <= tol }
}

pub(crate) fn holds(name: &str, ok: bool) -> SubCheck {
    SubCheck { name: name.into(), value: if ok { 1.0 } else { 0.0 }, bound: "= 1".into(), pass: ok }
}

#[derive(Clone, Debug, Serialize)]
pub struct Criterion {
    pub id: u32,
    pub name: String,
    pub status: Status,
    pub checks: Vec<SubCheck>,
    /// grids, sample counts and raw measurements behind the checks
    pub evidence: Value,
    pub error: Option<String>,
}

impl Criterion {
    fn from_checks(id: u32, name: &str, checks: Vec<SubCheck>, evidence: Value) -> Self {
        let status = if checks.iter().all(|c| c.pass) { Status::Pass } else { Status::Fail };
        Criterion { id, name: name.into(), status, checks, evidence, error: None }
    }

    fn failed(id: u32, name: &str, err: String) -> Self {
        Criterion { id, name: name.into(), status: Status::Fail, checks: Vec::new(), evidence: Value::Null, error: Some(err) }
    }

    pub fn skipped(id: u32) -> Self {
        Criterion {
            id,
            name: NAMES[id as usize - 1].into(),
            status: Status::Skipped,
            checks: Vec::new(),
            evidence: Value::Null,
            error: None,
        }
    }

    /// First failing sub-check, for one-line summaries.
    pub fn summary(&self) -> String {
        if let Some(e) = &self.error {
            return format!("error: {e}");
        }
        if self.status == Status::Skipped {
            return "skipped (reduced budget)".into();
        }
        let shown: Vec<String> = self
            .checks
            .iter()
            .filter(|c| !c.pass || self.status == Status::Pass)
            .take(3)
            .map(|c| format!("{} = {:.4e} ({})", c.name, c.value, c.bound))
            .collect();
        shown.join("; ")
    }
}

pub const NAMES: [&str; 10] = [
    "matrix certificates",
    "sum bound",
    "kernel projector identities",
    "example 1 constant a",
    "cone and direction change",
    "regularity",
    "wave packets",
    "ill-posedness rates",
    "well-posedness contrast",
    "determinism",
];

fn wrap(id: u32, r: Result<Criterion>) -> Criterion {
    r.unwrap_or_else(|e| Criterion::failed(id, NAMES[id as usize - 1], e.to_string()))
}

pub fn run(id: u32, seed: u64) -> Criterion {
    match id {
        1 => wrap(1, Ok(matrix_certificates(seed))),
        2 => wrap(2, Ok(sum_bound(seed))),
        3 => wrap(3, Ok(kernel_projectors(seed))),
        4 => wrap(4, example1_constant()),
        5 => wrap(5, cone_direction_change()),
        6 => wrap(6, regularity()),
        7 => wrap(7, wave_packets(seed)),
        8 => wrap(8, illposed_rates()),
        9 => wrap(9, wellposed_contrast()),
        10 => wrap(10, Ok(determinism(seed))),
        _ => Criterion::failed(id, "unknown", format!("no criterion {id}")),
    }
}

/// Criteria cheap enough for the reduced budget.
pub const REDUCED: [u32; 5] = [2, 3, 5, 8, 10];

/// Random hermitian and semi-simple matrices certify; Jordan blocks fail as
/// defective.
pub fn matrix_certificates(seed: u64) -> Criterion {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut herm = Vec::with_capacity(10_000);
    let mut semi = Vec::with_capacity(10_000);
    for k in 0..10_000 {
        let n = 1 + k % 6;
        herm.push(random::hermitian(&mut rng, n));
        semi.push(random::semisimple_real(&mut rng, n));
    }
    let jordan: Vec<CMatrix> = (0..1_000).map(|k| random::with_jordan_block(&mut rng, 2 + k % 5)).collect();

    struct Row {
        pass: bool,
        lower: f64,
        sym: f64,
    }
    let certify = |a: &CMatrix| {
        let cert = strong_hyperbolicity_certificate(a);
        let n = a.nrows() as f64;
        let scale = (cert.cap4 * linalg::norm2(a)).max(f64::MIN_POSITIVE);
        Row { pass: cert.pass, lower: cert.c4 - 1.0 / n, sym: cert.symmetry_defect / scale }
    };
    let h: Vec<Row> = herm.par_iter().map(certify).collect();
    let s: Vec<Row> = semi.par_iter().map(certify).collect();
    let j: Vec<bool> = jordan
        .par_iter()
        .map(|a| {
            let cert = strong_hyperbolicity_certificate(a);
            !cert.pass && cert.has_reason("defective")
        })
        .collect();
    let passed: Vec<&Row> = h.iter().chain(&s).filter(|r| r.pass).collect();
    let worst_lower = passed.iter().map(|r| r.lower).fold(f64::INFINITY, f64::min);
    let worst_sym = passed.iter().map(|r| r.sym).fold(0.0, f64::max);
    let checks = vec![
        at_most("hermitian failures", h.iter().filter(|r| !r.pass).count() as f64, 0.0),
        at_most("semisimple failures", s.iter().filter(|r| !r.pass).count() as f64, 0.0),
        at_most("jordan not flagged defective", j.iter().filter(|ok| !**ok).count() as f64, 0.0),
        at_least("min (c4 - 1/N)", worst_lower, -1e-8),
        at_most("max |SA - (SA)*| / (|S||A|)", worst_sym, 1e-8),
    ];
    let evidence = json!({
        "hermitian": 10_000, "semisimple": 10_000, "jordan": 1_000,
        "sizes": "N = 1 + k mod 6 (jordan: 2 + k mod 5)", "seed": seed,
    });
    Criterion::from_checks(1, NAMES[0], checks, evidence)
}

/// ‖Σ Sj pj‖ ≤ (2^{m−1} − 1) K1 K2 ε on random admissible instances.
pub fn sum_bound(seed: u64) -> Criterion {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0002);
    let inst: Vec<_> = (0..10_000).map(|k| random_admissible(&mut rng, 1 + k % 5, 1 + (k / 5) % 4)).collect();
    let reps: Vec<_> = inst.par_iter().map(|i| i.check()).collect();
    let bad_hyp = reps.iter().filter(|r| !r.hypotheses_hold).count();
    let bad_bound = reps.iter().filter(|r| !r.bound_holds).count();
    let max_ratio = reps.iter().filter(|r| r.rhs > 0.0).map(|r| r.ratio).fold(0.0, f64::max);
    let checks = vec![
        at_most("instances violating hypotheses", bad_hyp as f64, 0.0),
        at_most("instances violating the bound", bad_bound as f64, 0.0),
        at_most("max lhs / rhs", max_ratio, 1.0),
    ];
    let evidence = json!({ "instances": 10_000, "m": "1 + k mod 5", "n": "1 + (k / 5) mod 4", "seed": seed });
    Criterion::from_checks(2, NAMES[1], checks, evidence)
}

/// Π*𝐒JΠ = Π*𝐒J, the norm bound on Π, and the orthogonality rank test.
pub fn kernel_projectors(seed: u64) -> Criterion {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0003);
    let inst: Vec<_> = (0..1_000).map(|k| random_psp_instance(&mut rng, 2 + k % 5)).collect();
    let reps: Vec<_> = inst.par_iter().map(|i| psp_check(&i.l, &i.s_full, &i.j, &i.projector)).collect();
    let max_eq = reps.iter().map(|r| r.eq_pi_s_pi).fold(0.0, f64::max);
    let max_norm = reps.iter().map(|r| r.norm_pi_ratio).fold(0.0, f64::max);
    let ortho_bad = reps.iter().filter(|r| !(r.ortho_ok && r.semisimple_zero)).count();
    let checks = vec![
        at_most("max projector identity defect", max_eq, 1e-8),
        at_most("max |Pi| / (|SJ| / c)", max_norm, 1.01),
        at_most("rank characterization failures", ortho_bad as f64, 0.0),
    ];
    let evidence = json!({ "instances": 1_000, "n": "2 + k mod 5", "seed": seed });
    Criterion::from_checks(3, NAMES[2], checks, evidence)
}

/// Example 1 with constant a in direction (1, 0, 0): certificate and the
/// roots {0, ±√(ξ² + x²η²)}.
pub fn example1_constant() -> Result<Criterion> {
    let nu = [1.0, 0.0, 0.0];
    let xbox = ParamBox::interval("x", -1.0, 1.0, 5);
    let sphere = sampling::complement_sphere(&nu, 1000);
    let mut failed = 0usize;
    let mut max_im = 0.0f64;
    let mut root_err = 0.0f64;
    let mut sym = 0.0f64;
    let avals: Vec<f64> = (0..20).map(|i| -0.5 + i as f64 / 19.0).collect();
    for &a in &avals {
        let fam = SymbolFamily::example1(ASlot::Const(a)).with_params(xbox.clone())?;
        let cert = strong_hyperbolicity_in_direction(&fam, &nu, &SamplePlan::from_family(&fam, sphere.len()))?;
        failed += cert.failed + usize::from(!cert.pass);
        sym = sym.max(cert.symmetry_defect);
        let errs: Vec<(f64, f64)> = xbox
            .grid()
            .par_iter()
            .flat_map_iter(|x| sphere.iter().map(move |xi| (x.clone(), xi.clone())))
            .map(|(x, xi)| {
                let mut r = char_roots(&fam, &x, &xi, &nu)?;
                r.sort_by(|p, q| p.re.total_cmp(&q.re));
                let w = (xi[1] * xi[1] + x[0] * x[0] * xi[2] * xi[2]).sqrt();
                let err = r.iter().zip([-w, 0.0, w]).map(|(z, e)| (z - c(e, 0.0)).norm()).fold(0.0, f64::max);
                let im = r.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
                Ok((im, err))
            })
            .collect::<Result<_>>()?;
        for (im, err) in errs {
            max_im = max_im.max(im);
            root_err = root_err.max(err);
        }
    }
    let checks = vec![
        at_most("failed certificates", failed as f64, 0.0),
        at_most("max |Im root|", max_im, 1e-8),
        at_most("max root error", root_err, 1e-8),
        at_most("max symmetry defect", sym, 1e-8),
    ];
    let evidence = json!({
        "a": avals, "x": xbox.axis(0), "direction": nu, "sphere_samples": sphere.len(),
    });
    Ok(Criterion::from_checks(4, NAMES[3], checks, evidence))
}

pub(crate) fn gamma_grid() -> Vec<f64> {
    (0..=48).map(|k| 10f64.powf(-3.0 + k as f64 / 8.0)).collect()
}

/// ν′ = (1, ½, 0) lies in a certified ball, and the measured resolvent
/// constant in direction ν′ respects C₁ = K C |ν| / (c |ν′|).
pub fn cone_direction_change() -> Result<Criterion> {
    let fam = SymbolFamily::example1(ASlot::Const(0.5));
    let nu = [1.0, 0.0, 0.0];
    let nu_p = [1.0, 0.5, 0.0];
    let gammas = gamma_grid();
    let sphere = sampling::unit_sphere(3, 2000);
    let mut checks = Vec::new();
    let mut rows = Vec::new();
    for x in [0.5, 1.0] {
        let chart = cone_explore(&fam, &[x], &nu, &ConeBudget::default())?;
        let certified = chart.certifies(&nu_p).is_some();
        checks.push(holds(&format!("x = {x}: nu' certified"), certified));
        let big_c = necessary_condition_probe(&fam, &[x], &nu, &gammas, &sphere)?.value;
        let measured = necessary_condition_probe(&fam, &[x], &nu_p, &gammas, &sphere)?.value;
        let small_c = linalg::det(&fam.eval(&[x], &sampling::normalize(&nu_p))?).norm();
        if certified {
            let c1 = direction_change_constant(&chart, &nu, &nu_p, big_c, small_c)?;
            checks.push(at_most(&format!("x = {x}: measured C' / C1"), measured / c1, 1.1));
            rows.push(json!({ "x": x, "K": chart.k, "C": big_c, "c": small_c, "C1": c1, "measured": measured,
                "certified_directions": chart.certified.len(), "incomplete": chart.incomplete }));
        }
    }
    let evidence = json!({
        "direction": nu, "nu_prime": nu_p, "gammas": gammas, "sphere_samples": sphere.len(),
        "budget": ConeBudget::default(), "points": rows,
    });
    Ok(Criterion::from_checks(5, NAMES[4], checks, evidence))
}

/// Hölder calibration, the |x|^½ symmetrizer exponent and the
/// constant-a discontinuity at (x, ξ) = (0, 0).
pub fn regularity() -> Result<Criterion> {
    let mut checks = Vec::new();
    let line = ParamBox::interval("x", -1.0, 1.0, 2001);
    let mut calib = Vec::new();
    for beta in [0.25, 0.5, 0.75] {
        let f = FieldSamples::scalar(&line, move |p| p[0].abs().powf(beta));
        let fit = holder_fit(&f, &[0.0], &default_radii(f.spacing(), 6))?;
        checks.push(within(&format!("calibration beta = {beta}"), fit.alpha, beta, 0.05));
        calib.push(fit);
    }
    let nu = [1.0, 0.0, 0.0];
    let r0 = 0.01;
    let g = ParamBox { names: vec!["x".into(), "xi".into()], lo: vec![-r0, -r0], hi: vec![r0, r0], samples: vec![257, 257] };
    let fam = SymbolFamily::example1(ASlot::AbsPow(0.5));
    let field = symmetrizer_field(&fam, &nu, &g, xxi_slice(1.0));
    let fit = holder_fit(&field, &[0.0, 0.0], &default_radii(field.spacing(), 6))?;
    checks.push(at_most("invalid symmetrizer samples", field.invalid as f64, 0.0));
    checks.push(within("|x|^0.5 symmetrizer exponent", fit.alpha, 0.5, 0.1));
    let fam_c = SymbolFamily::example1(ASlot::Const(0.5));
    let slice = xxi_slice(1.0);
    let disc = discontinuity_probe(
        |p| {
            let (a, xi) = slice(p);
            canonical_in_direction(&fam_c, &a, &nu, &xi)
        },
        &[0.0, 0.0],
        0.01,
        4,
    )?;
    checks.push(holds("constant a: jump survives refinement", disc.survives));
    checks.push(above("constant a: gap", disc.gap, 0.1));
    let evidence = json!({
        "calibration": calib, "symmetrizer_grid": g, "eta": 1.0, "symmetrizer_fit": fit, "discontinuity": disc,
    });
    Ok(Criterion::from_checks(6, NAMES[5], checks, evidence))
}

pub(crate) fn noise(rng: &mut ChaCha8Rng, n: usize, l: f64, components: usize) -> Result<GridFunction> {
    let mut u = GridFunction::zeros(1, n, l, components)?;
    for v in u.values.iter_mut() {
        *v = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    }
    Ok(u)
}

/// Random Fourier coefficients on |k| ≤ kmax.
pub(crate) fn band_limited(rng: &mut ChaCha8Rng, n: usize, l: f64, kmax: usize) -> Result<GridFunction> {
    let u = GridFunction::zeros(1, n, l, 1)?;
    let mut spec = vec![c(0.0, 0.0); n];
    for (i, z) in spec.iter_mut().enumerate() {
        let k = if i <= n / 2 { i } else { n - i };
        if k <= kmax {
            *z = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
    }
    Ok(u.from_spectrum(spec))
}

pub(crate) fn log_slope(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let (s, _, r2) = linear_fit(&lx, &ly);
    (s, r2)
}

/// Packet at frequency λ centred at 0.7/√λ with polarisation `pol`.
pub(crate) fn packet(lambda: f64, n: usize, pol: &[(f64, f64)]) -> Result<GridFunction> {
    GridFunction::from_fn(1, n, PI, pol.len(), |x| {
        let y = x[0] - 0.7 / lambda.sqrt();
        let g = c(0.0, lambda * x[0]).exp() * (-lambda * y * y / 2.0).exp();
        pol.iter().map(|&(re, im)| g * c(re, im)).collect()
    })
}

/// Isometry of W_λ, the dyadic partition, the localization ratios and the
/// commutator energy trend with its rough negative control.
pub fn wave_packets(seed: u64) -> Result<Criterion> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0007);
    let mut checks = Vec::new();

    let lambdas: Vec<f64> = (3..=9).map(|j| 2f64.powi(j)).collect();
    let u = band_limited(&mut rng, 1024, PI, 200)?;
    let iso: Vec<f64> = lambdas
        .iter()
        .map(|&l| Ok((wavepacket_transform(&u, l, None)?.norm() / u.norm() - 1.0).abs()))
        .collect::<Result<_>>()?;
    checks.push(at_most("max isometry defect", iso.iter().cloned().fold(0.0, f64::max), 1e-6));

    let w = noise(&mut rng, 1024, PI, 1)?;
    let frame = DyadicFrame::for_grid(&w);
    let parts = dyadic_decompose(&w, &frame)?;
    let mut sum = w.like();
    for p in &parts {
        for (s, v) in sum.values.iter_mut().zip(&p.values) {
            *s += v;
        }
    }
    let recon = sum.values.iter().zip(&w.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    checks.push(at_most("dyadic reconstruction defect", recon, 1e-12));

    // fit over the levels with a nonzero left side; above j = 7 the cut-off
    // region lies beyond the Nyquist frequency
    let mut loc = Vec::new();
    for (n, m, a) in [(1u32, 0u32, 0u32), (2, 0, 0), (3, 0, 0), (1, 2, 0), (1, 0, 1)] {
        let mut js = Vec::new();
        let mut ratios = Vec::new();
        for j in 3..=8usize {
            let r = localization_probe(&w, &frame, j, n, m, &[a])?;
            if !r.skipped && r.ratio > 0.0 {
                js.push(j as f64);
                ratios.push(r.ratio.log2());
            }
            loc.push(json!({ "n": n, "m": m, "alpha": a, "j": j, "ratio": r.ratio, "lhs": r.lhs,
                "theta_norm": r.theta_norm }));
        }
        let slope = if js.len() >= 2 { linear_fit(&js, &ratios).0 } else { f64::NEG_INFINITY };
        checks.push(at_most(&format!("localization slope n = {n}, m = {m}, alpha = {a}"), slope, 0.1));
    }

    // Example 1 with a = x on the diagonal slice y = x, and its canonical
    // symmetrizer
    let fam = SymbolFamily::example1(ASlot::X).with_params(ParamBox::interval("x", -4.0, 4.0, 3))?;
    let coeffs = Coefficients::from_family(&fam, &[1.0, 0.0, 0.0], vec![vec![0.0, 1.0, 1.0]])?;
    let c2 = coeffs.clone();
    let s_lip = move |x: &[f64], xi: &[f64]| -> Result<CMatrix> {
        let a = c2.symbol(x, xi)?;
        symlab_core::matrix::canonical_symmetrizer(&symlab_core::matrix::eigendecompose(&a, 0.0)?)
    };
    let pol = [(0.3, 0.8), (-0.5, 0.2), (0.6, -0.3)];
    let lip: Vec<f64> = lambdas
        .iter()
        .map(|&l| Ok(commutator_energy_probe(&packet(l, 4096, &pol)?, &s_lip, &coeffs, l)?.ratio))
        .collect::<Result<_>>()?;
    let (lip_slope, lip_r2) = log_slope(&lambdas, &lip);
    checks.push(at_most("Lipschitz commutator slope", lip_slope, 0.1));

    // constant symmetric system with S = (1 + √|x|)·Id
    let sym = Coefficients::constant(vec![linalg::from_real_rows(2, &[0.0, 1.0, 1.0, 0.0])]);
    let s_rough = |x: &[f64], _: &[f64]| -> Result<CMatrix> { Ok(linalg::identity(2) * c(1.0 + x[0].abs().sqrt(), 0.0)) };
    let rough: Vec<f64> = lambdas
        .iter()
        .map(|&l| Ok(commutator_energy_probe(&packet(l, 4096, &[(1.0, 0.0), (1.0, 0.0)])?, &s_rough, &sym, l)?.ratio))
        .collect::<Result<_>>()?;
    let (rough_slope, rough_r2) = log_slope(&lambdas, &rough);
    checks.push(above("rough control commutator slope", rough_slope, 0.3));

    let evidence = json!({
        "lambdas": lambdas, "isometry_defects": iso, "isometry_grid": { "n": 1024, "l": PI, "kmax": 200 },
        "dyadic_grid": { "n": 1024, "l": PI, "levels": frame.levels() },
        "localization": loc,
        "commutator_grid": { "n": 4096, "l": PI, "centre": "0.7 / sqrt(lambda)" },
        "lipschitz": { "ratios": lip, "slope": lip_slope, "r2": lip_r2 },
        "rough": { "ratios": rough, "slope": rough_slope, "r2": rough_r2 },
        "seed": seed,
    });
    Ok(Criterion::from_checks(7, NAMES[6], checks, evidence))
}

pub const GROWTH_ETAS: [f64; 6] = [16.0, 64.0, 256.0, 1024.0, 4096.0, 16384.0];

/// Growth rates σ(η) of the reduced mode equations against the oscillator
/// oracle (α = 0) and against λ₁/2 (α = ½).
pub fn illposed_rates() -> Result<Criterion> {
    let opts = GrowthOptions::default();
    let mut checks = Vec::new();
    let osc = oscillator_eigen(0.0, 1.0, 32)?;
    let oracle = osc.beta[1].abs();
    let g0 = example1_growth(0.0, &GROWTH_ETAS, &opts)?;
    match &g0.fit {
        Some(f) => {
            checks.push(within("alpha = 0 exponent", f.exponent, 0.5, 0.02));
            checks.push(at_most("alpha = 0 prefactor relative error", (f.prefactor / oracle - 1.0).abs(), 0.05));
        }
        None => checks.push(holds("alpha = 0 fit available", false)),
    }
    let lam1 = first_order_shift(0.5)?;
    let oracle_gamma = 1.5 * statrs::function::gamma::gamma(0.75) / statrs::function::gamma::gamma(0.5);
    checks.push(at_most("lambda1 quadrature vs gamma formula", (lam1 - oracle_gamma).abs(), 1e-10));
    let g5 = example1_growth(0.5, &GROWTH_ETAS, &opts)?;
    match &g5.fit {
        Some(f) => {
            checks.push(within("alpha = 0.5 exponent", f.exponent, 0.25, 0.05));
            checks.push(at_most("alpha = 0.5 prefactor relative error", (f.prefactor / (lam1 / 2.0) - 1.0).abs(), 0.15));
        }
        None => checks.push(holds("alpha = 0.5 fit available", false)),
    }
    let evidence = json!({
        "eta_list": GROWTH_ETAS, "options": opts, "oscillator": { "beta_sq": osc.beta_sq, "beta": osc.beta,
        "residual": osc.residual, "gaussian": osc.gaussian },
        "lambda1": lam1, "lambda1_gamma": oracle_gamma,
        "alpha0": g0, "alpha05": g5,
    });
    Ok(Criterion::from_checks(8, NAMES[7], checks, evidence))
}

/// Example 1 data: Gaussian of width ¼ in x times a few y-modes.
pub fn contrast_data(n: usize) -> Result<GridFunction> {
    GridFunction::from_fn(2, n, PI, 3, |p| {
        let g = (-p[0] * p[0] / (2.0 * 0.0625)).exp();
        let y = p[1];
        let s = y.cos() + 0.5 * (2.0 * y).cos() + 0.25 * (4.0 * y).cos();
        vec![c(g * s, 0.0), c(0.5 * g * s, 0.0), c(0.25 * g * s * p[0], 0.0)]
    })
}

pub const CONTRAST_KS: [usize; 4] = [16, 32, 64, 128];

/// a = x: the growth constant is resolution independent; a = |x|^½: the
/// rate of the top y-frequency grows like η^¼.
pub fn wellposed_contrast() -> Result<Criterion> {
    let fam = SymbolFamily::example1(ASlot::X);
    let mut gammas = Vec::new();
    let mut runs = Vec::new();
    for n in [256usize, 512] {
        let tr = evolve(&EvolutionProblem::from_family(&fam, contrast_data(n)?, 1.0, Taper::default())?)?;
        gammas.push(tr.growth_constant());
        runs.push(json!({ "n": n, "gamma": tr.growth_constant(), "steps": tr.steps, "cfl": tr.cfl,
            "active_modes": tr.active_modes, "aborted_at": tr.aborted_at }));
    }
    let mut checks = vec![at_most("a = x: |gamma(512) / gamma(256) - 1|", (gammas[1] / gammas[0] - 1.0).abs(), 0.2)];
    let rough = SymbolFamily::example1(ASlot::AbsPow(0.5));
    let taper = Taper::default().with_absorb(6.0);
    let pg = physical_growth(&rough, &CONTRAST_KS, 512, 16.0, 1.0, taper)?;
    match &pg.fit {
        Some(f) => checks.push(within("a = |x|^0.5 exponent", f.exponent, 0.25, 0.05)),
        None => checks.push(holds("a = |x|^0.5 fit available", false)),
    }
    let evidence = json!({
        "lipschitz": { "runs": runs, "l": PI, "t_final": 1.0, "taper": Taper::default(),
            "data": "exp(-x^2 / 0.125) (cos y + cos 2y / 2 + cos 4y / 4) (1, 1/2, x/4)" },
        "holder": { "mode_indices": CONTRAST_KS, "taper": taper, "growth": pg },
    });
    Ok(Criterion::from_checks(9, NAMES[8], checks, evidence))
}

/// Repeats the randomized, parallel criteria and compares the serialized
/// results byte for byte.
pub fn determinism(seed: u64) -> Criterion {
    let render = || {
        let a = vec![sum_bound(seed), kernel_projectors(seed)];
        serde_json::to_string(&a).unwrap_or_default()
    };
    let first = render();
    let second = render();
    let checks = vec![holds("repeated randomized criteria are byte-identical", first == second && !first.is_empty())];
    let evidence = json!({ "replayed": [2, 3], "bytes": first.len(), "seed": seed });
    Criterion::from_checks(10, NAMES[9], checks, evidence)
}
