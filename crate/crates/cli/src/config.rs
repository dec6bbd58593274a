//! Run configuration: a TOML file with sections, plus `key=value` overrides.

use std::path::{Path, PathBuf};

use hamsys::functional::{ExponentPair, WeightPair};
use hamsys::solver::SolverOptions;
use hamsys::{DomainSpec, Grid};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSection {
    pub m: usize,
    pub n: usize,
    #[serde(default = "one")]
    pub inner_radius: f64,
    /// Defaults to `10 * inner_radius`.
    #[serde(default)]
    pub outer_radius: Option<f64>,
    #[serde(default = "default_nr")]
    pub n_r: usize,
    #[serde(default = "default_nt")]
    pub n_theta: usize,
}

fn one() -> f64 {
    1.0
}
fn default_nr() -> usize {
    129
}
fn default_nt() -> usize {
    65
}

impl DomainSection {
    pub fn spec(&self) -> DomainSpec {
        let s = DomainSpec::new(self.m, self.n, self.inner_radius, self.n_r, self.n_theta);
        match self.outer_radius {
            Some(r) => s.with_outer_radius(r),
            None => s,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentSection {
    pub p: f64,
    pub q: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightPreset {
    /// `a = b = 1`.
    Ones,
    /// `a = b = 1 + s²` with `s = r cos θ`.
    SSquared,
    /// Nodal values read from `weights.file`.
    File,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightSection {
    pub preset: WeightPreset,
    /// CSV with header `r,theta,a,b`, one row per grid node in `(r, θ)` order.
    #[serde(default)]
    pub file: Option<PathBuf>,
}

impl Default for WeightSection {
    fn default() -> Self {
        Self {
            preset: WeightPreset::Ones,
            file: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// Decompositions `(N - n, n)` for `n = 2..=k`.
    pub k: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self { k: 2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Solve,
    Sweep,
    Spectrum,
    Verify,
    Hardy,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Solve => "solve",
            Task::Sweep => "sweep",
            Task::Spectrum => "spectrum",
            Task::Verify => "verify",
            Task::Hardy => "hardy",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub tasks: Vec<Task>,
    /// Seed for every randomized direction.
    pub seed: u64,
    pub out: PathBuf,
    /// Use the homotopy from a subcritical pair for supercritical targets.
    pub continuation: bool,
    pub szulkin_directions: usize,
    /// Size of the Szulkin trial directions relative to `max |u|`.
    pub szulkin_size: f64,
    /// Allowed negative slack in the Szulkin inequality.
    pub szulkin_tol: f64,
    /// Allowed `ε / scale` in the comparison `q v^p ≥ p u^q - ε`.
    pub comparison_tol: f64,
    /// Relative slack in the Rayleigh bound.
    pub rayleigh_tol: f64,
    /// Radiality above which a solution counts as non-radial.
    pub radiality_tol: f64,
    /// Mesh width in `ln r` for the Hardy eigenproblem.
    pub hardy_mesh: f64,
    /// Input fields for `verify`; defaults to `<out>/solve.csv`.
    pub fields: Option<PathBuf>,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            tasks: vec![Task::Solve],
            seed: 0,
            out: PathBuf::from("out"),
            continuation: false,
            szulkin_directions: 50,
            szulkin_size: 1e-2,
            szulkin_tol: 1e-8,
            comparison_tol: 1e-10,
            rayleigh_tol: 1e-3,
            radiality_tol: 1e-3,
            hardy_mesh: 2e-3,
            fields: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: DomainSection,
    pub exponents: ExponentSection,
    #[serde(default)]
    pub weights: WeightSection,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub run: RunSection,
}

impl RunConfig {
    /// Parses TOML text and applies `section.key=value` overrides in order.
    pub fn parse(text: &str, overrides: &[String]) -> Result<Self, CliError> {
        let cfg = Self::parse_unchecked(text, overrides)?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn parse_unchecked(text: &str, overrides: &[String]) -> Result<Self, CliError> {
        let mut value: toml::Table = text.parse().map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        let cfg: RunConfig = toml::Value::Table(value)
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::parse_unchecked(&text, overrides)?;
        // relative weight files are resolved against the config's directory
        if let (Some(f), Some(dir)) = (cfg.weights.file.as_mut(), path.parent()) {
            if f.is_relative() {
                *f = dir.join(&*f);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.domain.spec().validate()?;
        ExponentPair::new(self.exponents.p, self.exponents.q)?;
        if self.run.tasks.is_empty() {
            return Err(CliError::Config("run.tasks must not be empty".into()));
        }
        match (self.weights.preset, &self.weights.file) {
            (WeightPreset::File, None) => {
                return Err(CliError::Config("weights.preset = \"file\" needs weights.file".into()))
            }
            (WeightPreset::File, Some(f)) if !f.exists() => {
                return Err(CliError::Config(format!("weight file {} does not exist", f.display())))
            }
            (WeightPreset::Ones | WeightPreset::SSquared, Some(_)) => {
                return Err(CliError::Config("weights.file is only used with preset \"file\"".into()))
            }
            _ => {}
        }
        if self.sweep.k < 2 {
            return Err(CliError::Config(format!("sweep.k = {} must be >= 2", self.sweep.k)));
        }
        Ok(())
    }

    pub fn exponents(&self) -> ExponentPair {
        ExponentPair::new(self.exponents.p, self.exponents.q).expect("validated")
    }

    /// SHA-256 of the effective configuration (after overrides), as TOML.
    ///
    /// The output directory is left out: it does not affect any computed value.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.run.out = PathBuf::new();
        let text = toml::to_string(&c).expect("config serializes");
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Samples the configured weight pair on `grid`.
    pub fn weights_on(&self, grid: &std::sync::Arc<Grid>) -> Result<WeightPair, CliError> {
        match self.weights.preset {
            WeightPreset::Ones => Ok(WeightPair::ones(grid.clone())),
            WeightPreset::SSquared => Ok(WeightPair::from_st(grid.clone(), |s, _| 1.0 + s * s, |s, _| 1.0 + s * s)),
            WeightPreset::File => {
                let path = self.weights.file.as_ref().expect("validated");
                let table = crate::io::read_table(path, ["r", "theta", "a", "b"])?;
                let (a, b) = crate::io::fields_on(grid, &table)?;
                Ok(WeightPair::new(a, b)?)
            }
        }
    }
}

fn apply_override(table: &mut toml::Table, item: &str) -> Result<(), CliError> {
    let (key, raw) = item
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override `{item}` is not key=value")))?;
    let parts: Vec<&str> = key.trim().split('.').collect();
    let value = parse_value(raw.trim());
    let (last, path) = parts.split_last().expect("split yields one part");
    let mut cur = table;
    for p in path {
        cur = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| CliError::Config(format!("override `{key}`: `{p}` is not a section")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

/// Interprets the right-hand side of an override as a TOML value, falling back to a string.
fn parse_value(raw: &str) -> toml::Value {
    let wrapped = format!("v = {raw}");
    match wrapped.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("key present"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

/// Commented reference of every key with its default value.
pub fn reference() -> String {
    let defaults = RunConfig {
        domain: DomainSection {
            m: 3,
            n: 2,
            inner_radius: 1.0,
            outer_radius: Some(10.0),
            n_r: default_nr(),
            n_theta: default_nt(),
        },
        exponents: ExponentSection { p: 3.2, q: 3.2 },
        weights: WeightSection::default(),
        solver: SolverOptions::default(),
        sweep: SweepSection::default(),
        run: RunSection::default(),
    };
    let body = toml::to_string(&defaults).expect("defaults serialize");
    let mut out = String::from(
        "# hamsys run configuration (all keys shown with their defaults)\n\
         #\n\
         # [domain]     m, n (n <= m, N = m + n > 3), inner_radius R, outer_radius (default 10 R), n_r, n_theta\n\
         # [exponents]  p, q with q >= p > 2\n\
         # [weights]    preset = \"ones\" | \"s-squared\" | \"file\"; file = CSV with header r,theta,a,b\n\
         # [solver]     tolerances and iteration caps of the mountain-pass search and Newton refinement\n\
         # [sweep]      k: decompositions (N - n, n) for n = 2..=k\n\
         # [run]        tasks (solve, sweep, spectrum, verify, hardy), seed, out, check tolerances\n\
         #\n\
         # Any key can be overridden on the command line, e.g. --override solver.accept_tol=1e-9\n\n",
    );
    out.push_str(&body);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = "[domain]\nm = 3\nn = 2\n[exponents]\np = 3.2\nq = 3.2\n";

    #[test]
    fn defaults_fill_in() {
        let cfg = RunConfig::parse(BASE, &[]).unwrap();
        assert_eq!(cfg.domain.spec().outer_radius, 10.0);
        assert_eq!(cfg.run.tasks, vec![Task::Solve]);
        assert_eq!(cfg.solver, SolverOptions::default());
    }

    #[test]
    fn overrides_apply_in_order() {
        let o = vec![
            "solver.accept_tol=1e-9".to_string(),
            "run.tasks=[\"hardy\", \"solve\"]".to_string(),
            "weights.preset=s-squared".to_string(),
            "domain.n_r = 33".to_string(),
        ];
        let cfg = RunConfig::parse(BASE, &o).unwrap();
        assert_eq!(cfg.solver.accept_tol, 1e-9);
        assert_eq!(cfg.run.tasks, vec![Task::Hardy, Task::Solve]);
        assert_eq!(cfg.weights.preset, WeightPreset::SSquared);
        assert_eq!(cfg.domain.n_r, 33);
        assert_ne!(cfg.hash(), RunConfig::parse(BASE, &[]).unwrap().hash());
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let bad = BASE.replace("m = 3\nn = 2", "m = 2\nn = 3");
        let err = RunConfig::parse(&bad, &[]).unwrap_err().to_string();
        assert!(err.contains("n = 3 must be <= m = 2"), "{err}");
        assert!(RunConfig::parse(BASE, &["run.tasks=[]".into()]).is_err());
        assert!(RunConfig::parse(BASE, &["exponents.q=2.5".into()]).is_err());
        assert!(RunConfig::parse(BASE, &["solver.bogus=1".into()]).is_err());
        assert!(RunConfig::parse(BASE, &["weights.preset=file".into()]).is_err());
    }

    #[test]
    fn reference_parses_back() {
        let cfg = RunConfig::parse(&reference(), &[]).unwrap();
        assert_eq!(cfg.exponents.p, 3.2);
        assert_eq!(cfg.hash(), RunConfig::parse(&reference(), &[]).unwrap().hash());
    }
}
