//! The JSON report envelope and writing a finished run to disk.

use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::checks::SubCheck;
use crate::config::{Command, RunConfig};
use crate::output::{io_err, svg_from_csv, write_file, PlotSpec, Table};
use symlab_core::Result;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize)]
pub struct Environment {
    pub os: &'static str,
    pub arch: &'static str,
    pub version: &'static str,
}

impl Environment {
    pub fn current() -> Self {
        Environment { os: std::env::consts::OS, arch: std::env::consts::ARCH, version: env!("CARGO_PKG_VERSION") }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Echo {
    pub name: &'static str,
    pub seed: u64,
    /// the parsed config with only this command's grid section; output
    /// location and worker count are left out since they change no number
    pub config: Value,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: Echo,
    pub environment: Environment,
    pub results: Value,
    pub evidence: Value,
    pub checks: Vec<SubCheck>,
    pub failing: Vec<String>,
    pub pass: bool,
    pub files: Vec<String>,
}

/// A named CSV table with an optional plot of it.
pub struct Artifact {
    pub stem: String,
    pub table: Table,
    pub plot: Option<PlotSpec>,
}

/// Everything a command produced, held in memory until written.
pub struct Outcome {
    pub report: Report,
    pub artifacts: Vec<Artifact>,
    pub plots: bool,
}

impl Outcome {
    pub fn new(cmd: Command, cfg: &RunConfig, seed: u64, results: Value, evidence: Value, checks: Vec<SubCheck>) -> Self {
        let mut echo_cfg = cfg.clone();
        echo_cfg.out_dir = None;
        echo_cfg.workers = None;
        let mut echo_cfg = serde_json::to_value(&echo_cfg).unwrap_or(Value::Null);
        if let Some(obj) = echo_cfg.as_object_mut() {
            obj.remove("out_dir");
            obj.remove("workers");
            let key = cmd.name();
            if let Some(Value::Object(g)) = obj.get_mut("grids") {
                g.retain(|k, _| k == key);
            }
        }
        let failing: Vec<String> = checks.iter().filter(|c| !c.pass).map(|c| c.name.clone()).collect();
        let report = Report {
            schema_version: SCHEMA_VERSION,
            command: Echo { name: cmd.name(), seed, config: echo_cfg },
            environment: Environment::current(),
            results,
            evidence,
            pass: failing.is_empty(),
            failing,
            checks,
            files: Vec::new(),
        };
        Outcome { report, artifacts: Vec::new(), plots: cfg.plots }
    }

    pub fn with(mut self, stem: &str, table: Table, plot: Option<PlotSpec>) -> Self {
        self.artifacts.push(Artifact { stem: stem.into(), table, plot });
        self
    }

    fn file_names(&self) -> Vec<String> {
        let mut names = vec!["report.json".to_string()];
        for a in &self.artifacts {
            names.push(format!("{}.csv", a.stem));
            if self.plots && a.plot.is_some() {
                names.push(format!("{}.svg", a.stem));
            }
        }
        names
    }

    /// Report as written: two-space indent, keys sorted, trailing newline.
    pub fn render(&self) -> Result<String> {
        let mut report = self.report.clone();
        report.files = self.file_names();
        let v = serde_json::to_value(&report).map_err(|e| io_err(e.to_string()))?;
        let mut s = serde_json::to_string_pretty(&v).map_err(|e| io_err(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    /// Renders every file first so that nothing is written when any of
    /// them fails.
    pub fn write(&self, dir: &Path) -> Result<()> {
        let mut files = vec![("report.json".to_string(), self.render()?)];
        for a in &self.artifacts {
            let csv = a.table.to_csv()?;
            if self.plots {
                if let Some(p) = &a.plot {
                    files.push((format!("{}.svg", a.stem), svg_from_csv(&csv, p)?));
                }
            }
            files.push((format!("{}.csv", a.stem), csv));
        }
        std::fs::create_dir_all(dir).map_err(|e| io_err(format!("{}: {e}", dir.display())))?;
        for (name, text) in &files {
            write_file(dir, name, text)?;
        }
        Ok(())
    }
}
