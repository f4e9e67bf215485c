//! Run configuration: strict JSON, every section optional with defaults.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use symlab_core::cauchy::{GrowthOptions, Taper};
use symlab_core::symbol::{ASlot, FamilySpec, SymbolFamily};
use symlab_core::{Error, Result};

use crate::output::io_err;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Certify,
    Cone,
    Symmetrize,
    Regularity,
    Wavepacket,
    Evolve,
    Growth,
    AllPaperChecks,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Certify => "certify",
            Command::Cone => "cone",
            Command::Symmetrize => "symmetrize",
            Command::Regularity => "regularity",
            Command::Wavepacket => "wavepacket",
            Command::Evolve => "evolve",
            Command::Growth => "growth",
            Command::AllPaperChecks => "all-paper-checks",
        }
    }

    /// Tolerance names the command understands, with their defaults.
    pub fn tolerances(self) -> &'static [(&'static str, f64)] {
        match self {
            Command::Certify => &[("max_im", 1e-8), ("symmetry", 1e-8)],
            Command::Cone => &[("direction_change_slack", 0.1)],
            Command::Symmetrize => &[("symmetry", 1e-8), ("positivity", 0.0)],
            Command::Regularity => &[("exponent", 0.1)],
            Command::Wavepacket => {
                &[("isometry", 1e-6), ("reconstruction", 1e-12), ("localization_slope", 0.1), ("commutator_slope", 0.1)]
            }
            Command::Evolve => &[],
            Command::Growth => &[("exponent", 0.05)],
            Command::AllPaperChecks => &[],
        }
    }
}

/// A builtin name or an inline family description.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FamilyRef {
    Builtin(String),
    Inline(FamilySpec),
}

pub const BUILTINS: [&str; 6] =
    ["example1-const-a", "example1-lipschitz", "example1-holder", "example2-const-a", "example2-lipschitz", "friedrichs"];

impl FamilyRef {
    pub fn spec(&self) -> Result<FamilySpec> {
        let ex1 = |a_slot| FamilySpec::Example1 { a_slot, params: None };
        let ex2 = |a_slot| FamilySpec::Example2 { a_slot, params: None };
        match self {
            FamilyRef::Inline(s) => Ok(s.clone()),
            FamilyRef::Builtin(name) => match name.as_str() {
                "example1-const-a" => Ok(ex1(ASlot::Const(0.5))),
                "example1-lipschitz" => Ok(ex1(ASlot::X)),
                "example1-holder" => Ok(ex1(ASlot::AbsPow(0.5))),
                "example2-const-a" => Ok(ex2(ASlot::Const(0.5))),
                "example2-lipschitz" => Ok(ex2(ASlot::X)),
                "friedrichs" => Ok(FamilySpec::Friedrichs { n: 3, d: 2, seed: 0 }),
                other => Err(Error::Invalid(format!("unknown builtin family {other:?}; known: {}", BUILTINS.join(", ")))),
            },
        }
    }

    pub fn build(&self) -> Result<SymbolFamily> {
        SymbolFamily::from_spec(&self.spec()?)
    }
}

fn default_nu() -> Vec<f64> {
    vec![1.0, 0.0, 0.0]
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CertifyGrid {
    pub nu: Vec<f64>,
    pub sphere: usize,
}

impl Default for CertifyGrid {
    fn default() -> Self {
        CertifyGrid { nu: default_nu(), sphere: 1000 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConeGrid {
    /// parameter point
    pub a: Vec<f64>,
    pub nu: Vec<f64>,
    pub nu_prime: Option<Vec<f64>>,
    pub lattice: usize,
    pub gradient_samples: usize,
    pub max_certified: usize,
    /// resolvent probe: γ = 10^(lo + k (hi − lo) / (count − 1))
    pub gamma_exponents: [f64; 2],
    pub gamma_count: usize,
    pub sphere: usize,
}

impl Default for ConeGrid {
    fn default() -> Self {
        ConeGrid {
            a: vec![0.5],
            nu: default_nu(),
            nu_prime: Some(vec![1.0, 0.5, 0.0]),
            lattice: 8000,
            gradient_samples: 4000,
            max_certified: 8000,
            gamma_exponents: [-3.0, 3.0],
            gamma_count: 49,
            sphere: 2000,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SymmetrizeGrid {
    pub a: Vec<f64>,
    pub nu: Vec<f64>,
    pub nu_prime: Vec<f64>,
    pub sphere: usize,
}

impl Default for SymmetrizeGrid {
    fn default() -> Self {
        SymmetrizeGrid { a: vec![0.5], nu: default_nu(), nu_prime: vec![1.0, 0.5, 0.0], sphere: 200 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegularityGrid {
    pub nu: Vec<f64>,
    pub eta: f64,
    /// (x, ξ) centre of the probe
    pub center: [f64; 2],
    /// half-width of the sampled square
    pub r0: f64,
    pub points: usize,
    pub radii: usize,
    pub h0: f64,
    pub levels: u32,
    pub expected_exponent: Option<f64>,
}

impl Default for RegularityGrid {
    fn default() -> Self {
        RegularityGrid {
            nu: default_nu(),
            eta: 1.0,
            center: [0.0, 0.0],
            r0: 0.01,
            points: 257,
            radii: 6,
            h0: 0.01,
            levels: 4,
            expected_exponent: None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WavepacketGrid {
    pub n: usize,
    pub l: f64,
    pub lambdas: Vec<f64>,
    /// band limit of the isometry test function
    pub kmax: usize,
    pub levels: [usize; 2],
    pub orders: Vec<u32>,
    /// commutator probe on a 1-d slice of a one-parameter family
    pub commutator: bool,
    pub nu: Vec<f64>,
    pub slice: Vec<Vec<f64>>,
    pub commutator_n: usize,
}

impl Default for WavepacketGrid {
    fn default() -> Self {
        WavepacketGrid {
            n: 1024,
            l: PI,
            lambdas: (3..=9).map(|j| 2f64.powi(j)).collect(),
            kmax: 200,
            levels: [3, 8],
            orders: vec![1, 2, 3],
            commutator: true,
            nu: default_nu(),
            slice: vec![vec![0.0, 1.0, 1.0]],
            commutator_n: 4096,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveGrid {
    pub n: usize,
    pub l: f64,
    pub t_final: f64,
    pub taper: Taper,
    /// Gaussian width in the first coordinate
    pub width: f64,
    /// cosine modes of the data in the last coordinate
    pub modes: Vec<usize>,
    pub stride: Option<usize>,
}

impl Default for EvolveGrid {
    fn default() -> Self {
        EvolveGrid { n: 256, l: PI, t_final: 1.0, taper: Taper::default(), width: 0.25, modes: vec![1, 2, 4], stride: None }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GrowthGrid {
    pub etas: Vec<f64>,
    pub options: GrowthOptions,
    pub expected_exponent: Option<f64>,
}

impl Default for GrowthGrid {
    fn default() -> Self {
        GrowthGrid { etas: crate::checks::GROWTH_ETAS.to_vec(), options: GrowthOptions::default(), expected_exponent: None }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grids {
    pub certify: CertifyGrid,
    pub cone: ConeGrid,
    pub symmetrize: SymmetrizeGrid,
    pub regularity: RegularityGrid,
    pub wavepacket: WavepacketGrid,
    pub evolve: EvolveGrid,
    pub growth: GrowthGrid,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// must agree with the command line when present
    pub command: Option<Command>,
    pub family: Option<FamilyRef>,
    pub grids: Grids,
    pub tolerances: BTreeMap<String, f64>,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub plots: bool,
    pub workers: Option<usize>,
    /// all-paper-checks: run only the cheap criteria
    pub reduced: bool,
}

pub const DEFAULT_SEED: u64 = 7;

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| io_err(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse { pos: e.column(), msg: e.to_string() })
    }

    /// Checks everything that does not need a computation.
    pub fn validate(&self, cmd: Command) -> Result<()> {
        if let Some(c) = self.command {
            if c != cmd {
                return Err(Error::Invalid(format!("config is for {:?} but {:?} was requested", c.name(), cmd.name())));
            }
        }
        let known = cmd.tolerances();
        for (name, v) in &self.tolerances {
            if !known.iter().any(|(k, _)| k == name) {
                let names: Vec<&str> = known.iter().map(|(k, _)| *k).collect();
                return Err(Error::Invalid(format!("unknown tolerance {name:?} for {}; known: {names:?}", cmd.name())));
            }
            if !v.is_finite() || *v < 0.0 {
                return Err(Error::Invalid(format!("tolerance {name} must be finite and nonnegative")));
            }
        }
        if self.workers == Some(0) {
            return Err(Error::Invalid("workers must be at least 1".into()));
        }
        let needs_family = !matches!(cmd, Command::Wavepacket | Command::AllPaperChecks);
        if needs_family && self.family.is_none() {
            return Err(Error::Invalid(format!("{} needs a family", cmd.name())));
        }
        if let Some(f) = &self.family {
            f.build()?;
        }
        Ok(())
    }

    pub fn tolerance(&self, cmd: Command, name: &str) -> f64 {
        self.tolerances.get(name).copied().unwrap_or_else(|| {
            cmd.tolerances().iter().find(|(k, _)| *k == name).map(|(_, v)| *v).expect("declared tolerance")
        })
    }

    /// Effective tolerances of a command, for the report.
    pub fn tolerance_table(&self, cmd: Command) -> BTreeMap<String, f64> {
        cmd.tolerances().iter().map(|(k, _)| (k.to_string(), self.tolerance(cmd, k))).collect()
    }

    pub fn family(&self) -> Result<SymbolFamily> {
        self.family.as_ref().ok_or_else(|| Error::Invalid("no family given".into()))?.build()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_all_defaults() {
        let c = RunConfig::parse("{}").unwrap();
        assert!(c.family.is_none());
        assert_eq!(c.grids.certify.sphere, 1000);
        assert!(c.validate(Command::AllPaperChecks).is_ok());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(matches!(RunConfig::parse(r#"{"sed": 3}"#), Err(Error::Parse { .. })));
        assert!(RunConfig::parse(r#"{"grids": {"certify": {"spheres": 3}}}"#).is_err());
    }

    #[test]
    fn builtin_and_inline_families() {
        let c = RunConfig::parse(r#"{"family": "example1-holder"}"#).unwrap();
        assert_eq!(c.family().unwrap().n, 3);
        let c = RunConfig::parse(r#"{"family": {"friedrichs": {"n": 2, "d": 1, "seed": 4}}}"#).unwrap();
        assert_eq!(c.family().unwrap().d, 1);
        let c = RunConfig::parse(r#"{"family": "example9"}"#).unwrap();
        assert!(c.validate(Command::Certify).is_err());
    }

    #[test]
    fn tolerances_are_per_command() {
        let c = RunConfig::parse(r#"{"family": "friedrichs", "tolerances": {"max_im": 1e-6}}"#).unwrap();
        assert!(c.validate(Command::Certify).is_ok());
        assert_eq!(c.tolerance(Command::Certify, "max_im"), 1e-6);
        assert_eq!(c.tolerance(Command::Certify, "symmetry"), 1e-8);
        assert!(c.validate(Command::Growth).is_err());
    }

    #[test]
    fn command_mismatch_is_a_usage_error() {
        let c = RunConfig::parse(r#"{"command": "growth", "family": "example1-holder"}"#).unwrap();
        assert!(c.validate(Command::Growth).is_ok());
        assert!(c.validate(Command::Evolve).is_err());
    }
}
