//! Acceptance suite: one PASS/FAIL line per criterion. Exits nonzero when
//! any criterion fails.

use std::process::{Command, ExitCode};
use std::time::Instant;

use symlab_cli::checks::{self, Criterion, Status, SubCheck};
use symlab_cli::commands::summarize;
use symlab_cli::RunConfig;

const SEED: u64 = 7;

/// Runtime limits in seconds.
const LIMITS: [f64; 10] = [60.0, 30.0, 30.0, 60.0, 60.0, 120.0, 120.0, 600.0, 600.0, 600.0];

fn line(c: &Criterion, secs: f64) -> bool {
    let within = secs < LIMITS[c.id as usize - 1];
    let ok = c.status == Status::Pass && within;
    println!(
        "{} criterion {:>2} {:<28} {:>7.1} s (limit {:.0} s)",
        if ok { "PASS" } else { "FAIL" },
        c.id,
        c.name,
        secs,
        LIMITS[c.id as usize - 1]
    );
    for s in &c.checks {
        println!("       {} {:<52} {:>13.6e}  {}", if s.pass { "ok  " } else { "FAIL" }, s.name, s.value, s.bound);
    }
    if let Some(e) = &c.error {
        println!("       error: {e}");
    }
    ok
}

/// Renders the all-paper-checks report in process and compares it with the
/// one written by a separate run of the binary.
fn binary_matches(list: &[Criterion]) -> (bool, String) {
    let cfg = RunConfig::default();
    let ours = match summarize(&cfg, SEED, list.to_vec()).render() {
        Ok(s) => s,
        Err(e) => return (false, format!("render failed: {e}")),
    };
    let dir = std::env::temp_dir().join(format!("symlab-acceptance-{}", std::process::id()));
    let status = Command::new(env!("CARGO_BIN_EXE_symlab"))
        .args(["all-paper-checks", "--seed", &SEED.to_string(), "--out"])
        .arg(&dir)
        .output();
    let theirs = std::fs::read_to_string(dir.join("report.json"));
    let _ = std::fs::remove_dir_all(&dir);
    match (status, theirs) {
        (Ok(out), Ok(text)) => {
            let same = text == ours;
            (same, format!("binary exit {:?}, {} vs {} bytes", out.status.code(), text.len(), ours.len()))
        }
        (Err(e), _) => (false, format!("could not run symlab: {e}")),
        (_, Err(e)) => (false, format!("no report: {e}")),
    }
}

fn main() -> ExitCode {
    let mut all = true;
    let mut list = Vec::new();
    let mut secs = Vec::new();
    for id in 1..=10 {
        let t = Instant::now();
        let c = checks::run(id, SEED);
        secs.push(t.elapsed().as_secs_f64());
        list.push(c);
    }
    let t = Instant::now();
    let (same, detail) = binary_matches(&list);
    secs[9] += t.elapsed().as_secs_f64();
    let c10 = &mut list[9];
    c10.checks.push(SubCheck {
        name: format!("in-process and binary reports byte-identical ({detail})"),
        value: if same { 1.0 } else { 0.0 },
        bound: "= 1".into(),
        pass: same,
    });
    if !same {
        c10.status = Status::Fail;
    }
    for (c, s) in list.iter().zip(&secs) {
        all &= line(c, *s);
    }
    let failed: Vec<String> = list.iter().filter(|c| c.status != Status::Pass).map(|c| c.id.to_string()).collect();
    if all {
        println!("acceptance: all 10 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failing criteria: {}", failed.join(", "));
        ExitCode::FAILURE
    }
}
