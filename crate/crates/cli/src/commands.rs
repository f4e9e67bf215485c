//! One function per subcommand. Each computes everything in memory and
//! returns an [`Outcome`]; nothing touches the disk here.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::checks::{
    self, above, at_most, band_limited, holds, log_slope, noise, packet, within, Criterion, Status, SubCheck,
};
use crate::config::{Command, RunConfig};
use crate::output::{io_err, num, PlotSpec, Table};
use crate::report::Outcome;
use symlab_core::cauchy::{evolve, mode_growth, EvolutionProblem};
use symlab_core::matrix::{c, canonical_symmetrizer, eigendecompose, linalg, CMatrix};
use symlab_core::regularity::{
    default_radii, discontinuity_probe, holder_fit, linear_fit, symmetrizer_field, xxi_slice,
};
use symlab_core::sampling::{self, ParamBox};
use symlab_core::symbol::full::canonical_in_direction;
use symlab_core::symbol::{
    change_time_direction, cone_explore, direction_change_constant, necessary_condition_probe,
    strong_hyperbolicity_in_direction, ConeBudget, SamplePlan,
};
use symlab_core::wavepacket::{
    commutator_energy_probe, dyadic_decompose, localization_probe, wavepacket_transform, Coefficients, DyadicFrame,
    GridFunction,
};
use symlab_core::{Error, Result};

pub fn run(cmd: Command, cfg: &RunConfig, seed: u64) -> Result<Outcome> {
    match cmd {
        Command::Certify => certify(cfg, seed),
        Command::Cone => cone(cfg, seed),
        Command::Symmetrize => symmetrize(cfg, seed),
        Command::Regularity => regularity(cfg, seed),
        Command::Wavepacket => wavepacket(cfg, seed),
        Command::Evolve => evolve_cmd(cfg, seed),
        Command::Growth => growth(cfg, seed),
        Command::AllPaperChecks => Ok(all_paper_checks(cfg, seed)),
    }
}

fn check_len(what: &str, v: &[f64], len: usize) -> Result<()> {
    if v.len() != len {
        return Err(Error::Dimension(format!("{what} has length {}, expected {len}", v.len())));
    }
    Ok(())
}

fn certify(cfg: &RunConfig, seed: u64) -> Result<Outcome> {
    let cmd = Command::Certify;
    let fam = cfg.family()?;
    let g = &cfg.grids.certify;
    check_len("nu", &g.nu, fam.d + 1)?;
    let cert = strong_hyperbolicity_in_direction(&fam, &g.nu, &SamplePlan::from_family(&fam, g.sphere))?;
    let checks = vec![
        holds("certificate passes", cert.pass),
        at_most("max |Im root|", cert.max_im, cfg.tolerance(cmd, "max_im")),
        at_most("max symmetry defect", cert.symmetry_defect, cfg.tolerance(cmd, "symmetry")),
    ];
    let mut header: Vec<String> = (0..fam.params.dim()).map(|k| fam.params.names[k].clone()).collect();
    header.extend((0..=fam.d).map(|k| format!("xi{k}")));
    header.push("s_min_eig".into());
    let mut table = Table { header, rows: Vec::new() };
    for f in &cert.field {
        let mut row: Vec<String> = f.a.iter().chain(&f.xi).map(|&x| num(x)).collect();
        row.push(f.s.as_ref().map_or("nan".into(), |s| num(linalg::herm_min_eig(&linalg::hermitian_part(s)))));
        table.push(row);
    }
    let evidence = json!({
        "params": fam.params, "direction": g.nu, "sphere_samples": g.sphere,
        "tolerances": cfg.tolerance_table(cmd), "family": fam.spec(),
    });
    let results = serde_json::to_value(&cert).map_err(|e| io_err(e.to_string()))?;
    Ok(Outcome::new(cmd, cfg, seed, results, evidence, checks).with("samples", table, None))
}

fn log_grid(lo_hi: [f64; 2], count: usize) -> Vec<f64> {
    if count < 2 {
        return vec![10f64.powf(lo_hi[0])];
    }
    (0..count).map(|k| 10f64.powf(lo_hi[0] + k as f64 * (lo_hi[1] - lo_hi[0]) / (count - 1) as f64)).collect()
}

fn cone(cfg: &RunConfig, seed: u64) -> Result<Outcome> {
    let cmd = Command::Cone;
    let fam = cfg.family()?;
    let g = &cfg.grids.cone;
    check_len("nu", &g.nu, fam.d + 1)?;
    check_len("a", &g.a, fam.params.dim())?;
    let budget = ConeBudget { lattice: g.lattice, gradient_samples: g.gradient_samples, max_certified: g.max_certified };
    let chart = cone_explore(&fam, &g.a, &g.nu, &budget)?;
    let mut checks = vec![holds("base direction certified", chart.certifies(&g.nu).is_some())];
    let mut change = Value::Null;
    let gammas = log_grid(g.gamma_exponents, g.gamma_count);
    if let Some(nu_p) = &g.nu_prime {
        check_len("nu_prime", nu_p, fam.d + 1)?;
        let certified = chart.certifies(nu_p).is_some();
        checks.push(holds("nu' certified", certified));
        if certified {
            let sphere = sampling::unit_sphere(fam.d + 1, g.sphere);
            let big_c = necessary_condition_probe(&fam, &g.a, &g.nu, &gammas, &sphere)?.value;
            let measured = necessary_condition_probe(&fam, &g.a, nu_p, &gammas, &sphere)?.value;
            let small_c = linalg::det(&fam.eval(&g.a, &sampling::normalize(nu_p))?).norm();
            let c1 = direction_change_constant(&chart, &g.nu, nu_p, big_c, small_c)?;
            let slack = cfg.tolerance(cmd, "direction_change_slack");
            checks.push(at_most("measured resolvent constant / C1", measured / c1, 1.0 + slack));
            change = json!({ "C": big_c, "c": small_c, "C1": c1, "measured": measured });
        }
    }
    let mut header: Vec<String> = (0..=fam.d).map(|k| format!("nu{k}")).collect();
    header.extend(["detval".to_string(), "radius".to_string()]);
    let mut table = Table { header, rows: Vec::new() };
    for e in &chart.certified {
        let mut row: Vec<f64> = e.nu.clone();
        row.extend([e.detval, e.radius]);
        table.push_nums(&row);
    }
    let results = json!({
        "K": chart.k, "c": chart.c, "certified": chart.certified.len(), "incomplete": chart.incomplete,
        "lattice_size": chart.lattice_size, "base_radius": chart.base_radius(), "direction_change": change,
    });
    let evidence = json!({
        "a": g.a, "direction": g.nu, "nu_prime": g.nu_prime, "budget": budget, "gammas": gammas,
        "sphere_samples": g.sphere, "tolerances": cfg.tolerance_table(cmd), "family": fam.spec(),
    });
    Ok(Outcome::new(cmd, cfg, seed, results, evidence, checks).with("cone", table, None))
}

fn symmetrize(cfg: &RunConfig, seed: u64) -> Result<Outcome> {
    let cmd = Command::Symmetrize;
    let fam = cfg.family()?;
    let g = &cfg.grids.symmetrize;
    check_len("nu", &g.nu, fam.d + 1)?;
    check_len("nu_prime", &g.nu_prime, fam.d + 1)?;
    check_len("a", &g.a, fam.params.dim())?;
    let chart = cone_explore(&fam, &g.a, &g.nu, &ConeBudget::default())?;
    let changed = change_time_direction(&fam, &g.nu, &g.nu_prime, &chart)?;
    let sphere = sampling::complement_sphere(&g.nu_prime, g.sphere);
    let reps: Vec<_> = sphere.par_iter().map(|xi| changed.symmetrizer(&g.a, xi)).collect::<Result<_>>()?;
    let mut table = Table::new(&[]);
    table.header = (0..=fam.d).map(|k| format!("xi{k}")).collect();
    table.header.extend(["sj_defect", "sl_defect", "c1"].map(String::from));
    let (mut sj, mut sl, mut c1) = (0.0f64, 0.0f64, f64::INFINITY);
    for (xi, r) in sphere.iter().zip(&reps) {
        sj = sj.max(r.sj_defect);
        sl = sl.max(r.sl_defect);
        c1 = c1.min(r.c1);
        let mut row = xi.clone();
        row.extend([r.sj_defect, r.sl_defect, r.c1]);
        table.push_nums(&row);
    }
    let sym = cfg.tolerance(cmd, "symmetry");
    let checks = vec![
        at_most("max SJ skew defect", sj, sym),
        at_most("max SL skew defect", sl, sym),
        above("min eigenvalue of SJ", c1, cfg.tolerance(cmd, "positivity")),
    ];
    let results = json!({ "reduced_family": changed.family.name, "max_sj_defect": sj, "max_sl_defect": sl, "min_c1": c1,
        "cutoff_radius": 0.5 * chart.base_radius() });
    let evidence = json!({ "a": g.a, "direction": g.nu, "nu_prime": g.nu_prime, "sphere_samples": g.sphere,
        "tolerances": cfg.tolerance_table(cmd), "family": fam.spec() });
    Ok(Outcome::new(cmd, cfg, seed, results, evidence, checks).with("symmetrizer", table, None))
}

fn regularity(cfg: &RunConfig, seed: u64) -> Result<Outcome> {
    let cmd = Command::Regularity;
    let fam = cfg.family()?;
    let g = &cfg.grids.regularity;
    check_len("nu", &g.nu, fam.d + 1)?;
    if fam.params.dim() != 1 || fam.d != 2 {
        return Err(Error::Invalid("regularity samples the (x, xi) plane of a one-parameter family in 2-d".into()));
    }
    let [x0, k0] = g.center;
    let grid = ParamBox {
        names: vec!["x".into(), "xi".into()],
        lo: vec![x0 - g.r0, k0 - g.r0],
        hi: vec![x0 + g.r0, k0 + g.r0],
        samples: vec![g.points, g.points],
    };
    grid.validate().map_err(Error::Invalid)?;
    let field = symmetrizer_field(&fam, &g.nu, &grid, xxi_slice(g.eta));
    let fit = holder_fit(&field, &g.center, &default_radii(field.spacing(), g.radii))?;
    let slice = xxi_slice(g.eta);
    let disc = discontinuity_probe(
        |p| {
            let (a, xi) = slice(p);
            canonical_in_direction(&fam, &a, &g.nu, &xi)
        },
        &g.center,
        g.h0,
        g.levels,
    )?;
    let mut checks = vec![at_most("invalid samples", field.invalid as f64, 0.0)];
    if let Some(e) = g.expected_exponent {
        checks.push(within("Holder exponent", fit.alpha, e, cfg.tolerance(cmd, "exponent")));
    }
    let mut table = Table::new(&["radius", "oscillation"]);
    for (r, o) in fit.radii.iter().zip(&fit.oscillations) {
        table.push_nums(&[*r, *o]);
    }
    let plot = PlotSpec {
        title: "modulus of continuity".into(),
        x: "radius".into(),
        y: vec!["oscillation".into()],
        log_x: true,
        log_y: true,
    };
    let results = json!({ "fit": fit, "discontinuity": disc });
    let evidence = json!({ "grid": grid, "eta": g.eta, "direction": g.nu, "h0": g.h0, "levels": g.levels,
        "tolerances": cfg.tolerance_table(cmd), "family": fam.spec() });
    Ok(Outcome::new(cmd, cfg, seed, results, evidence, checks).with("modulus", table, Some(plot)))
}

fn wavepacket(cfg: &RunConfig, seed: u64) -> Result<Outcome> {
    let cmd = Command::Wavepacket;
    let g = &cfg.grids.wavepacket;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();

    let u = band_limited(&mut rng, g.n, g.l, g.kmax)?;
    let iso: Vec<f64> = g
        .lambdas
        .iter()
        .map(|&l| Ok((wavepacket_transform(&u, l, None)?.norm() / u.norm() - 1.0).abs()))
        .collect::<Result<_>>()?;
    checks.push(at_most("max isometry defect", iso.iter().cloned().fold(0.0, f64::max), cfg.tolerance(cmd, "isometry")));

    let w = noise(&mut rng, g.n, g.l, 1)?;
    let frame = DyadicFrame::for_grid(&w);
    let parts = dyadic_decompose(&w, &frame)?;
    let mut sum = w.like();
    for p in &parts {
        for (s, v) in sum.values.iter_mut().zip(&p.values) {
            *s += v;
        }
    }
    let recon = sum.values.iter().zip(&w.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    checks.push(at_most("dyadic reconstruction defect", recon, cfg.tolerance(cmd, "reconstruction")));

    let mut loc = Table::new(&["order", "j", "ratio"]);
    let mut slopes = Vec::new();
    for &n in &g.orders {
        let mut js = Vec::new();
        let mut ratios = Vec::new();
        for j in g.levels[0]..=g.levels[1] {
            let r = localization_probe(&w, &frame, j, n, 0, &[0])?;
            if !r.skipped && r.ratio > 0.0 {
                js.push(j as f64);
                ratios.push(r.ratio.log2());
            }
            loc.push_nums(&[n as f64, j as f64, r.ratio]);
        }
        let slope = if js.len() >= 2 { linear_fit(&js, &ratios).0 } else { f64::NEG_INFINITY };
        checks.push(at_most(&format!("localization slope n = {n}"), slope, cfg.tolerance(cmd, "localization_slope")));
        slopes.push(json!({ "order": n, "slope": slope, "levels_fitted": js.len() }));
    }

    let mut iso_t = Table::new(&["lambda", "isometry_defect", "commutator_ratio"]);
    let mut commutator = Value::Null;
    let mut ratios = vec![f64::NAN; g.lambdas.len()];
    if g.commutator {
        let fam = cfg.family()?;
        check_len("nu", &g.nu, fam.d + 1)?;
        let coeffs = Coefficients::from_family(&fam, &g.nu, g.slice.clone())?;
        let c2 = coeffs.clone();
        let s = move |x: &[f64], xi: &[f64]| -> Result<CMatrix> { canonical_symmetrizer(&eigendecompose(&c2.symbol(x, xi)?, 0.0)?) };
        let pol: Vec<(f64, f64)> = [(0.3, 0.8), (-0.5, 0.2), (0.6, -0.3), (0.2, 0.1)].into_iter().cycle().take(fam.n).collect();
        ratios = g
            .lambdas
            .iter()
            .map(|&l| Ok(commutator_energy_probe(&packet(l, g.commutator_n, &pol)?, &s, &coeffs, l)?.ratio))
            .collect::<Result<_>>()?;
        let (slope, r2) = log_slope(&g.lambdas, &ratios);
        checks.push(at_most("commutator energy slope", slope, cfg.tolerance(cmd, "commutator_slope")));
        commutator = json!({ "slope": slope, "r2": r2, "polarisation": pol, "family": fam.spec() });
    }
    for ((l, d), r) in g.lambdas.iter().zip(&iso).zip(&ratios) {
        iso_t.push_nums(&[*l, *d, *r]);
    }
    let results = json!({ "isometry_defects": iso, "reconstruction_defect": recon, "localization": slopes,
        "commutator": commutator });
    let evidence = json!({ "grid": g, "dyadic_levels": frame.levels(), "seed": seed, "tolerances": cfg.tolerance_table(cmd) });
    let plot = PlotSpec {
        title: "commutator energy ratio".into(),
        x: "lambda".into(),
        y: vec!["commutator_ratio".into()],
        log_x: true,
        log_y: true,
    };
    Ok(Outcome::new(cmd, cfg, seed, results, evidence, checks)
        .with("lambdas", iso_t, g.commutator.then_some(plot))
        .with("localization", loc, None))
}

/// Gaussian in the first coordinate times cosine modes in the last one,
/// component k weighted by 2^(−k).
pub fn initial_data(d: usize, components: usize, n: usize, l: f64, width: f64, modes: &[usize]) -> Result<GridFunction> {
    GridFunction::from_fn(d, n, l, components, |p| {
        let g = (-p[0] * p[0] / (2.0 * width * width)).exp();
        let y = p[d - 1];
        let s: f64 = modes.iter().enumerate().map(|(i, &k)| 0.5f64.powi(i as i32) * (k as f64 * y).cos()).sum();
        (0..components).map(|k| c(0.5f64.powi(k as i32) * g * s, 0.0)).collect()
    })
}

fn evolve_cmd(cfg: &RunConfig, seed: u64) -> Result<Outcome> {
    let cmd = Command::Evolve;
    let fam = cfg.family()?;
    let g = &cfg.grids.evolve;
    if g.modes.is_empty() {
        return Err(Error::Invalid("evolve needs at least one data mode".into()));
    }
    let u0 = initial_data(fam.d, fam.n, g.n, g.l, g.width, &g.modes)?;
    let mut problem = EvolutionProblem::from_family(&fam, u0, g.t_final, g.taper)?;
    if let Some(s) = g.stride {
        problem.stride = s.max(1);
    }
    let tr = evolve(&problem)?;
    let checks = vec![holds("evolution reached the final time", tr.aborted_at.is_none())];
    let mut table = Table::new(&["t", "norm"]);
    for (t, n) in tr.times.iter().zip(&tr.norms) {
        table.push_nums(&[*t, *n]);
    }
    let plot = PlotSpec { title: "energy".into(), x: "t".into(), y: vec!["norm".into()], log_x: false, log_y: true };
    let results = json!({ "growth_constant": tr.growth_constant(), "trajectory": tr });
    let evidence = json!({ "grid": g, "family": fam.spec() });
    Ok(Outcome::new(cmd, cfg, seed, results, evidence, checks).with("norms", table, Some(plot)))
}

fn growth(cfg: &RunConfig, seed: u64) -> Result<Outcome> {
    let cmd = Command::Growth;
    let fam = cfg.family()?;
    let g = &cfg.grids.growth;
    if g.etas.is_empty() || g.etas.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::Invalid("etas must be positive".into()));
    }
    if g.etas.len() < 4 {
        return Err(Error::Invalid("a power-law fit needs at least 4 etas".into()));
    }
    let rep = mode_growth(&fam, &g.etas, &g.options)?;
    let mut checks = vec![holds("power law fitted", rep.fit.is_some())];
    if let (Some(e), Some(f)) = (g.expected_exponent, &rep.fit) {
        checks.push(within("growth exponent", f.exponent, e, cfg.tolerance(cmd, "exponent")));
    }
    let mut table = Table::new(&["eta", "sigma", "r2", "dropped"]);
    for p in &rep.points {
        table.push(vec![num(p.eta), num(p.sigma), num(p.r2), p.dropped.clone().unwrap_or_default()]);
    }
    let plot = PlotSpec { title: "growth rate".into(), x: "eta".into(), y: vec!["sigma".into()], log_x: true, log_y: true };
    let results = serde_json::to_value(&rep).map_err(|e| io_err(e.to_string()))?;
    let evidence = json!({ "grid": g, "tolerances": cfg.tolerance_table(cmd), "family": fam.spec() });
    Ok(Outcome::new(cmd, cfg, seed, results, evidence, checks).with("growth", table, Some(plot)))
}

/// Runs the acceptance criteria; with `reduced` only the cheap ones.
pub fn criteria(reduced: bool, seed: u64) -> Vec<Criterion> {
    (1..=10u32)
        .map(|id| if reduced && !checks::REDUCED.contains(&id) { Criterion::skipped(id) } else { checks::run(id, seed) })
        .collect()
}

pub fn summarize(cfg: &RunConfig, seed: u64, list: Vec<Criterion>) -> Outcome {
    let cmd = Command::AllPaperChecks;
    let checks: Vec<SubCheck> = list
        .iter()
        .filter(|c| c.status != Status::Skipped)
        .map(|c| holds(&format!("criterion {}: {}", c.id, c.name), c.status == Status::Pass))
        .collect();
    let mut table = Table::new(&["id", "name", "status", "summary"]);
    for c in &list {
        let status = serde_json::to_value(c.status).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
        table.push(vec![c.id.to_string(), c.name.clone(), status, c.summary()]);
    }
    let results = json!({ "criteria": list });
    let evidence = json!({ "reduced": cfg.reduced, "seed": seed });
    Outcome::new(cmd, cfg, seed, results, evidence, checks).with("criteria", table, None)
}

fn all_paper_checks(cfg: &RunConfig, seed: u64) -> Outcome {
    summarize(cfg, seed, criteria(cfg.reduced, seed))
}
