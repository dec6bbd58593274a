//! JSON report schema and the plain-text summary derived from it.

use std::fmt::Write as _;

use hamsys::cone::ConeReport;
use hamsys::functional::{Energy, ExponentPair, SzulkinReport, WeightReport};
use hamsys::solver::{DescentLog, Distinctness};
use hamsys::spectral::{ComparisonReport, HardyEstimate, RayleighReport, SpectralReport, SymmetryVerdict};
use hamsys::DomainSpec;
use serde::Serialize;

/// One invariant: `pass` is decided by the task, `hard` failures set exit status 3.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// Human-readable bound, e.g. `<= 1e-8`.
    pub bound: String,
    pub pass: bool,
    pub hard: bool,
}

impl Check {
    pub fn le(name: &str, value: f64, limit: f64, hard: bool) -> Self {
        Self {
            name: name.into(),
            value,
            bound: format!("<= {limit:.4e}"),
            pass: value <= limit,
            hard,
        }
    }

    pub fn ge(name: &str, value: f64, limit: f64, hard: bool) -> Self {
        Self {
            name: name.into(),
            value,
            bound: format!(">= {limit:.4e}"),
            pass: value >= limit,
            hard,
        }
    }

    pub fn gt(name: &str, value: f64, limit: f64, hard: bool) -> Self {
        Self {
            name: name.into(),
            value,
            bound: format!("> {limit:.4e}"),
            pass: value > limit,
            hard,
        }
    }

    pub fn flag(name: &str, ok: bool, hard: bool) -> Self {
        Self {
            name: name.into(),
            value: if ok { 1.0 } else { 0.0 },
            bound: "== 1".into(),
            pass: ok,
            hard,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub config_sha256: String,
    pub seed: u64,
    pub grid: DomainSpec,
    pub exponents: ExponentPair,
    pub weights: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolutionRecord {
    pub decomposition: (usize, usize),
    pub accepted: bool,
    pub energy: Energy,
    pub residual_u: f64,
    pub residual_v: f64,
    pub cone: ConeReport,
    pub positivity_margin: f64,
    pub roundtrip_error: f64,
    pub invariance_cone: ConeReport,
    pub newton_iterations: usize,
    pub newton_history: Vec<f64>,
    pub descent: Option<DescentLog>,
    pub radiality: f64,
    pub max_u: f64,
    pub max_v: f64,
    pub comparison: ComparisonReport,
    pub rayleigh: RayleighReport,
    pub szulkin: SzulkinReport,
    /// CSV file with the nodal values, relative to the output directory.
    pub fields: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistinctRecord {
    pub pair: ((usize, usize), (usize, usize)),
    #[serde(flatten)]
    pub result: Distinctness,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymmetryRecord {
    pub criterion_lhs: f64,
    pub criterion_rhs: f64,
    pub predicted: bool,
    pub radiality: f64,
    pub observed: bool,
    pub verdict: SymmetryVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HardyRecord {
    pub estimate: HardyEstimate,
    /// Extrapolated values at other inner radii, `(R, value)`.
    pub rescaled: Vec<(f64, f64)>,
    /// Smallest eigenvalue of the 2-D grid operator against `1/r²`.
    pub grid_estimate: f64,
    /// 1-D value on the same truncated annulus.
    pub radial_truncated: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub task: &'static str,
    pub provenance: Provenance,
    /// `ok`, `nonconvergence` or `invariant-failure`.
    pub status: &'static str,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<WeightReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub solutions: Vec<SolutionRecord>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<(usize, usize, String)>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub distinctness: Vec<DistinctRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectral: Option<SpectralReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub symmetry: Option<SymmetryRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hardy: Option<HardyRecord>,
}

impl Report {
    pub fn new(task: &'static str, provenance: Provenance) -> Self {
        Self {
            task,
            provenance,
            status: "ok",
            checks: Vec::new(),
            warnings: Vec::new(),
            weights: None,
            solutions: Vec::new(),
            failures: Vec::new(),
            distinctness: Vec::new(),
            spectral: None,
            symmetry: None,
            hardy: None,
        }
    }

    pub fn hard_failures(&self) -> usize {
        self.checks.iter().filter(|c| c.hard && !c.pass).count()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Plain-text table; every number in it is also a field of the JSON report.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        let p = &self.provenance;
        let _ = writeln!(out, "task      {}", self.task);
        let _ = writeln!(out, "status    {}", self.status);
        let _ = writeln!(
            out,
            "grid      N={} (m,n)=({},{}) R={} R_out={} {}x{}",
            p.grid.dim, p.grid.m, p.grid.n, p.grid.inner_radius, p.grid.outer_radius, p.grid.n_r, p.grid.n_theta
        );
        let _ = writeln!(out, "exponents p={} q={}  weights {}  seed {}", p.exponents.p, p.exponents.q, p.weights, p.seed);
        let _ = writeln!(out, "config    {}", p.config_sha256);
        for s in &self.solutions {
            let _ = writeln!(
                out,
                "solution  ({},{}) accepted={} energy={:.10e} radiality={:.4e} residuals=({:.2e},{:.2e})",
                s.decomposition.0, s.decomposition.1, s.accepted, s.energy.total, s.radiality, s.residual_u, s.residual_v
            );
        }
        for (m, n, e) in &self.failures {
            let _ = writeln!(out, "failed    ({m},{n}) {e}");
        }
        for d in &self.distinctness {
            let _ = writeln!(
                out,
                "distinct  {:?} vs {:?}: {:?} (distance {:.4e})",
                d.pair.0, d.pair.1, d.result.verdict, d.result.distance
            );
        }
        if let Some(sym) = &self.symmetry {
            let _ = writeln!(
                out,
                "symmetry  (p-1)(q-1)={:.6} vs {:.6}: predicted={} observed={} ({:?})",
                sym.criterion_lhs, sym.criterion_rhs, sym.predicted, sym.observed, sym.verdict
            );
        }
        if let Some(h) = &self.hardy {
            let _ = writeln!(
                out,
                "hardy     Λ_H={:.12} lower bound {:.12}",
                h.estimate.value, h.estimate.lower_bound
            );
        }
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        let _ = writeln!(out, "{:<width$}  {:>14}  {:<16}  result", "check", "value", "bound");
        for c in &self.checks {
            let verdict = match (c.pass, c.hard) {
                (true, _) => "pass",
                (false, true) => "FAIL",
                (false, false) => "warn",
            };
            let _ = writeln!(out, "{:<width$}  {:>14.6e}  {:<16}  {verdict}", c.name, c.value, c.bound);
        }
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        out
    }
}
