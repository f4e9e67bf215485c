use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use symlab_cli::config::DEFAULT_SEED;
use symlab_cli::{commands, is_usage_error, Command, RunConfig};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Cmd {
    Certify,
    Cone,
    Symmetrize,
    Regularity,
    Wavepacket,
    Evolve,
    Growth,
    AllPaperChecks,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Certify => Command::Certify,
            Cmd::Cone => Command::Cone,
            Cmd::Symmetrize => Command::Symmetrize,
            Cmd::Regularity => Command::Regularity,
            Cmd::Wavepacket => Command::Wavepacket,
            Cmd::Evolve => Command::Evolve,
            Cmd::Growth => Command::Growth,
            Cmd::AllPaperChecks => Command::AllPaperChecks,
        }
    }
}

/// Certificates, regularity probes and growth experiments for symmetrizers
/// of hyperbolic systems.
#[derive(Parser, Debug)]
#[command(name = "symlab", version)]
struct Args {
    command: Cmd,
    /// JSON run configuration (optional for all-paper-checks)
    #[arg(long)]
    config: Option<PathBuf>,
    /// output directory [default: config out_dir, else symlab-out]
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// worker threads for parallel sweeps
    #[arg(long)]
    workers: Option<usize>,
    /// all-paper-checks: run only the cheap criteria
    #[arg(long)]
    reduced: bool,
}

fn usage(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("symlab: {msg}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let cmd = Command::from(args.command);
    let mut cfg = match &args.config {
        Some(p) => match RunConfig::load(p) {
            Ok(c) => c,
            Err(e) => return usage(format!("{}: {e}", p.display())),
        },
        None if cmd == Command::AllPaperChecks => RunConfig::default(),
        None => return usage(format!("{} needs --config <file>", cmd.name())),
    };
    if args.reduced {
        cfg.reduced = true;
    }
    if let Err(e) = cfg.validate(cmd) {
        return usage(e);
    }
    if let Some(w) = args.workers.or(cfg.workers) {
        if w == 0 {
            return usage("--workers must be at least 1");
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(w).build_global() {
            eprintln!("symlab: could not size the worker pool: {e}");
        }
    }
    let seed = args.seed.or(cfg.seed).unwrap_or(DEFAULT_SEED);
    let out = args.out.clone().or_else(|| cfg.out_dir.clone()).unwrap_or_else(|| PathBuf::from("symlab-out"));

    let outcome = match commands::run(cmd, &cfg, seed) {
        Ok(o) => o,
        Err(e) if is_usage_error(&e) => return usage(e),
        Err(e) => {
            eprintln!("symlab: {} failed: {e}", cmd.name());
            return ExitCode::from(1);
        }
    };
    if let Err(e) = outcome.write(&out) {
        eprintln!("symlab: {e}");
        return ExitCode::from(1);
    }
    let r = &outcome.report;
    for c in &r.checks {
        println!("{} {}  {:e} ({})", if c.pass { "ok  " } else { "FAIL" }, c.name, c.value, c.bound);
    }
    println!("{}: {} -> {}", cmd.name(), if r.pass { "pass" } else { "fail" }, out.display());
    if r.pass {
        ExitCode::SUCCESS
    } else {
        eprintln!("failing checks: {}", r.failing.join("; "));
        ExitCode::from(1)
    }
}
