//! Task runners: each returns a report and writes its artifacts into the output directory.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use hamsys::functional::{szulkin_check, szulkin_trials, validate_weights, ExponentPair, WeightPair};
use hamsys::solver::{
    continuation_solve, distinctness_check, evaluate_pair, mountain_pass_solve, multiplicity_sweep,
    radiality_measure, DistinctVerdict, SolutionPair, SolverOptions,
};
use hamsys::spectral::{
    comparison_check, hardy_constant, hardy_grid_estimate, hardy_truncated, rayleigh_bound_check,
    spectral_report, SymmetryVerdict,
};
use hamsys::{build_grid, DomainSpec, Grid};
use log::{info, warn};

use crate::config::{RunConfig, Task, WeightPreset};
use crate::report::{Check, DistinctRecord, HardyRecord, Provenance, Report, SolutionRecord, SymmetryRecord};
use crate::{exit, io, CliError};

/// Tolerance on the discrete `θ`-slope of the weights.
const WEIGHT_TOL: f64 = 1e-12;
/// Agreement required between the general and closed forms of the second variation.
const SECOND_VARIATION_TOL: f64 = 1e-8;

/// A finished task: its report, the files to write, and the exit status it implies.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Report,
    /// `(file name, contents)` relative to the output directory.
    pub files: Vec<(String, String)>,
    pub status: i32,
}

impl Outcome {
    fn finish(mut report: Report, files: Vec<(String, String)>, nonconvergence: bool) -> Self {
        let status = if nonconvergence {
            report.status = "nonconvergence";
            exit::NONCONVERGENCE
        } else if report.hard_failures() > 0 {
            report.status = "invariant-failure";
            exit::INVARIANT
        } else {
            exit::OK
        };
        Self { report, files, status }
    }

    /// Writes `<task>.json`, `<task>_summary.txt` and any field dumps into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        let task = self.report.task;
        let mut all = self.files.clone();
        all.push((format!("{task}.json"), self.report.to_json()));
        all.push((format!("{task}_summary.txt"), self.report.summary()));
        for (name, body) in all {
            let path = dir.join(&name);
            std::fs::write(&path, body).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        }
        Ok(())
    }
}

pub fn run_task(cfg: &RunConfig, task: Task, threads: usize) -> Result<Outcome, CliError> {
    info!("running task {}", task.name());
    match task {
        Task::Solve => solve(cfg),
        Task::Sweep => sweep(cfg, threads),
        Task::Spectrum => spectrum(cfg),
        Task::Verify => verify(cfg, None),
        Task::Hardy => hardy(cfg),
    }
}

fn weights_name(cfg: &RunConfig) -> String {
    match cfg.weights.preset {
        WeightPreset::Ones => "ones".into(),
        WeightPreset::SSquared => "s-squared".into(),
        WeightPreset::File => {
            let f = cfg.weights.file.as_ref().expect("validated");
            format!("file:{}", f.file_name().map(|s| s.to_string_lossy()).unwrap_or_default())
        }
    }
}

fn provenance(cfg: &RunConfig, grid: DomainSpec) -> Provenance {
    Provenance {
        tool: "hamsys",
        version: env!("CARGO_PKG_VERSION"),
        config_sha256: cfg.hash(),
        seed: cfg.run.seed,
        grid,
        exponents: cfg.exponents(),
        weights: weights_name(cfg),
    }
}

fn window_warning(ep: &ExponentPair, n: usize) -> Option<String> {
    (!ep.window_ok(n)).then(|| {
        format!(
            "p = {}, q = {} lie outside the existence window for n = {n}; results are not covered by the theory",
            ep.p, ep.q
        )
    })
}

fn checked_weights(cfg: &RunConfig, grid: &Arc<Grid>, report: &mut Report) -> Result<WeightPair, CliError> {
    let wp = cfg.weights_on(grid)?;
    let scale = wp.a.max_abs().max(wp.b.max_abs());
    let wr = validate_weights(&wp, WEIGHT_TOL * scale);
    report.weights = Some(wr);
    if !wr.pass {
        return Err(CliError::Validation(format!(
            "weights violate positivity or θ-monotonicity (min a {}, min b {}, max a_θ {:e}, max b_θ {:e})",
            wr.min_a, wr.min_b, wr.max_a_theta, wr.max_b_theta
        )));
    }
    Ok(wp)
}

/// Record and hard checks for one solution pair.
fn assess(
    cfg: &RunConfig,
    sp: &SolutionPair,
    wp: &WeightPair,
    label: &str,
    fields: Option<String>,
) -> Result<(SolutionRecord, Vec<Check>), CliError> {
    let ep = sp.exponents;
    let run = &cfg.run;
    let tol = cfg.solver.accept_tol;
    let comparison = comparison_check(&sp.u, &sp.v, &ep, run.comparison_tol)?;
    let rayleigh = rayleigh_bound_check(&sp.u, &sp.v, &ep, run.rayleigh_tol)?;
    let dirs = szulkin_trials(&sp.u, run.szulkin_directions, run.szulkin_size, run.seed);
    let szulkin = szulkin_check(&sp.u, wp, &ep, &dirs, run.szulkin_tol)?;
    let radiality = radiality_measure(&sp.u).unwrap_or(f64::NAN);
    let name = |s: &str| if label.is_empty() { s.to_string() } else { format!("{label}.{s}") };
    let checks = vec![
        Check::le(&name("residual_u"), sp.residual_u, tol, true),
        Check::le(&name("residual_v"), sp.residual_v, tol, true),
        Check::le(&name("cone_violation"), sp.cone.violation(), sp.cone.tol, true),
        Check::gt(&name("positivity_margin"), sp.positivity_margin, 0.0, true),
        Check::gt(&name("energy"), sp.energy.total, 0.0, true),
        Check::le(&name("comparison_relative_epsilon"), comparison.relative_epsilon, run.comparison_tol, true),
        Check::le(&name("rayleigh_quotient"), rayleigh.quotient, rayleigh.bound * (1.0 + run.rayleigh_tol), true),
        Check::ge(&name("szulkin_min_slack"), szulkin.min_slack, -run.szulkin_tol, true),
        Check::le(
            &name("invariance_cone_violation"),
            sp.invariance_cone.violation(),
            sp.invariance_cone.tol,
            false,
        ),
    ];
    let record = SolutionRecord {
        decomposition: sp.decomposition,
        accepted: sp.accepted,
        energy: sp.energy,
        residual_u: sp.residual_u,
        residual_v: sp.residual_v,
        cone: sp.cone,
        positivity_margin: sp.positivity_margin,
        roundtrip_error: sp.roundtrip_error,
        invariance_cone: sp.invariance_cone,
        newton_iterations: sp.newton_iterations,
        newton_history: sp.newton_history.clone(),
        descent: sp.descent.clone(),
        radiality,
        max_u: sp.u.max_abs(),
        max_v: sp.v.max_abs(),
        comparison,
        rayleigh,
        szulkin,
        fields,
    };
    Ok((record, checks))
}

fn solve_one(cfg: &RunConfig, grid: &Arc<Grid>, wp: &WeightPair, opts: &SolverOptions) -> hamsys::Result<SolutionPair> {
    let ep = cfg.exponents();
    if cfg.run.continuation && ep.is_supercritical(grid.dim()) {
        continuation_solve(grid, wp, &ep, opts)
    } else {
        mountain_pass_solve(grid, wp, &ep, opts)
    }
}

/// Splits a solver result into the pair to report and whether it converged.
fn unwrap_solution(r: hamsys::Result<SolutionPair>) -> Result<(SolutionPair, bool), CliError> {
    match r {
        Ok(sp) => Ok((sp, true)),
        Err(hamsys::Error::Unconverged { best, residual }) => {
            warn!("solver stalled at residual {residual:e}; reporting the best iterate");
            Ok((*best, false))
        }
        Err(e) => Err(e.into()),
    }
}

fn solve(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let spec = cfg.domain.spec();
    let grid = build_grid(spec)?;
    let mut report = Report::new("solve", provenance(cfg, spec));
    let wp = checked_weights(cfg, &grid, &mut report)?;
    report.warnings.extend(window_warning(&cfg.exponents(), spec.n));
    let (sp, converged) = unwrap_solution(solve_one(cfg, &grid, &wp, &cfg.solver))?;
    let (record, checks) = assess(cfg, &sp, &wp, "", Some("solve.csv".into()))?;
    report.solutions.push(record);
    report.checks = checks;
    let files = vec![("solve.csv".to_string(), io::format_fields(&sp.u, &sp.v))];
    Ok(Outcome::finish(report, files, !converged))
}

fn sweep(cfg: &RunConfig, threads: usize) -> Result<Outcome, CliError> {
    let spec = cfg.domain.spec();
    let ep = cfg.exponents();
    let mut report = Report::new("sweep", provenance(cfg, spec));
    let k = cfg.sweep.k;
    if k > spec.dim / 2 {
        return Err(CliError::Validation(format!("sweep.k = {k} must be <= N/2 = {}", spec.dim / 2)));
    }
    for n in 2..=k {
        report.warnings.extend(window_warning(&ep, n));
    }
    let weights = |g: &Arc<Grid>| cfg.weights_on(g).map_err(|e| hamsys::Error::InvalidArgument(e.to_string()));
    let entries = multiplicity_sweep(&spec, &ep, k, &weights, &cfg.solver, threads)?;
    let mut files = Vec::new();
    let mut solved: Vec<SolutionPair> = Vec::new();
    let mut nonconvergence = false;
    for e in entries {
        let (m, n) = e.decomposition;
        let sp = match e.result {
            Ok(sp) => sp,
            Err(hamsys::Error::Unconverged { best, .. }) => {
                nonconvergence = true;
                report.failures.push((m, n, "refinement stalled".into()));
                *best
            }
            Err(err) => {
                nonconvergence = true;
                report.failures.push((m, n, err.to_string()));
                continue;
            }
        };
        let wp = cfg.weights_on(sp.grid())?;
        let name = format!("sweep_m{m}_n{n}.csv");
        let (record, checks) = assess(cfg, &sp, &wp, &format!("m{m}n{n}"), Some(name.clone()))?;
        report.solutions.push(record);
        report.checks.extend(checks);
        files.push((name, io::format_fields(&sp.u, &sp.v)));
        solved.push(sp);
    }
    let tol = cfg.run.radiality_tol;
    for i in 0..solved.len() {
        for j in i + 1..solved.len() {
            let d = distinctness_check(&solved[i], &solved[j], tol)?;
            let (a, b) = (solved[i].decomposition, solved[j].decomposition);
            let both_nonradial = d.radiality.0 > tol && d.radiality.1 > tol;
            if both_nonradial {
                report.checks.push(Check::flag(
                    &format!("distinct.m{}n{}_m{}n{}", a.0, a.1, b.0, b.1),
                    d.verdict == DistinctVerdict::Distinct,
                    true,
                ));
            } else {
                report
                    .warnings
                    .push(format!("{a:?} / {b:?}: not both non-radial, verdict {:?}", d.verdict));
            }
            report.distinctness.push(DistinctRecord { pair: (a, b), result: d });
        }
    }
    Ok(Outcome::finish(report, files, nonconvergence))
}

fn spectrum(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let spec = cfg.domain.spec();
    let grid = build_grid(spec)?;
    let ep = cfg.exponents();
    let mut report = Report::new("spectrum", provenance(cfg, spec));
    let wp = checked_weights(cfg, &grid, &mut report)?;
    if !wp.is_unit() {
        return Err(CliError::Validation("spectrum needs weights.preset = \"ones\"".into()));
    }
    report.warnings.extend(window_warning(&ep, spec.n));
    let hardy = hardy_constant(&spec, cfg.run.hardy_mesh)?;
    let radial_opts = SolverOptions {
        radial_only: true,
        ..cfg.solver.clone()
    };
    let (radial, radial_ok) = unwrap_solution(mountain_pass_solve(&grid, &wp, &ep, &radial_opts))?;
    let sr = spectral_report(&radial, hardy.value, 1e-12)?;
    let (full, full_ok) = unwrap_solution(solve_one(cfg, &grid, &wp, &cfg.solver))?;

    let (rrec, mut checks) = assess(cfg, &radial, &wp, "radial", Some("spectrum_radial.csv".into()))?;
    let (frec, fchecks) = assess(cfg, &full, &wp, "full", Some("spectrum.csv".into()))?;
    checks.extend(fchecks);
    let sv = sr.second_variation;
    let sv_gap = (sv - sr.second_variation_closed).abs() / sv.abs().max(f64::MIN_POSITIVE);
    checks.push(Check::le("angular_residual", sr.mu1_residual, 1e-12, true));
    checks.push(Check::le("second_variation_relative_gap", sv_gap, SECOND_VARIATION_TOL, true));
    checks.push(Check::flag(
        "criterion_arithmetic",
        sr.predicted == (sr.criterion_lhs > sr.criterion_rhs),
        true,
    ));
    checks.push(Check::ge("hardy_lower_bound", hardy.value - hardy.lower_bound, -1e-8, true));

    let radiality = frec.radiality;
    let observed = radiality > cfg.run.radiality_tol;
    let verdict = SymmetryVerdict::new(sr.predicted, observed);
    if verdict.is_discrepancy() {
        report.warnings.push(format!(
            "criterion predicts symmetry breaking but the solution is radial (radiality {radiality:e})"
        ));
    }
    report.symmetry = Some(SymmetryRecord {
        criterion_lhs: sr.criterion_lhs,
        criterion_rhs: sr.criterion_rhs,
        predicted: sr.predicted,
        radiality,
        observed,
        verdict,
    });
    report.solutions = vec![rrec, frec];
    report.checks = checks;
    report.spectral = Some(sr);
    let files = vec![
        ("spectrum_radial.csv".to_string(), io::format_fields(&radial.u, &radial.v)),
        ("spectrum.csv".to_string(), io::format_fields(&full.u, &full.v)),
    ];
    Ok(Outcome::finish(report, files, !(radial_ok && full_ok)))
}

/// Re-runs every solution check on saved fields; `fields` defaults to the config's.
pub fn verify(cfg: &RunConfig, fields: Option<&Path>) -> Result<Outcome, CliError> {
    let path: PathBuf = match (fields, &cfg.run.fields) {
        (Some(p), _) => p.to_path_buf(),
        (None, Some(p)) => p.clone(),
        (None, None) => cfg.run.out.join("solve.csv"),
    };
    let table = io::read_table(&path, ["r", "theta", "u", "v"])?;
    let expect = cfg.domain.spec();
    let spec = io::spec_from_table(&table, expect.m, expect.n)?;
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * b.abs();
    if !close(spec.inner_radius, expect.inner_radius) || !close(spec.outer_radius, expect.outer_radius) {
        return Err(CliError::GridMismatch(format!(
            "file spans r in [{}, {}], config has [{}, {}]",
            spec.inner_radius, spec.outer_radius, expect.inner_radius, expect.outer_radius
        )));
    }
    // the file may come from another resolution; radii are taken from the config
    let spec = DomainSpec {
        inner_radius: expect.inner_radius,
        outer_radius: expect.outer_radius,
        ..spec
    };
    let grid = build_grid(spec)?;
    let (u, v) = io::fields_on(&grid, &table)?;
    let mut report = Report::new("verify", provenance(cfg, spec));
    let wp = checked_weights(cfg, &grid, &mut report)?;
    let sp = evaluate_pair(&u, &v, &wp, &cfg.exponents(), &cfg.solver)?;
    let name = path.file_name().map(|s| s.to_string_lossy().into_owned());
    let (record, checks) = assess(cfg, &sp, &wp, "", name)?;
    report.solutions.push(record);
    report.checks = checks;
    Ok(Outcome::finish(report, Vec::new(), false))
}

fn hardy(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let spec = cfg.domain.spec();
    let mut report = Report::new("hardy", provenance(cfg, spec));
    let mesh = cfg.run.hardy_mesh;
    let estimate = hardy_constant(&spec, mesh)?;
    let mut rescaled = Vec::new();
    let mut worst: f64 = 0.0;
    for factor in [0.5, 4.0] {
        let r = spec.inner_radius * factor;
        let other = hardy_constant(&DomainSpec::new(spec.m, spec.n, r, spec.n_r, spec.n_theta), mesh)?;
        worst = worst.max((other.value - estimate.value).abs() / estimate.value);
        rescaled.push((r, other.value));
    }
    let grid = build_grid(spec)?;
    let grid_estimate = hardy_grid_estimate(&grid, 1e-12)?;
    let radial_truncated = hardy_truncated(spec.dim, spec.inner_radius, spec.outer_radius, mesh)?;
    report.checks = vec![
        Check::ge("lower_bound_margin", estimate.value - estimate.lower_bound, -1e-8, true),
        Check::le("scale_invariance", worst, 1e-8, true),
        Check::le(
            "grid_vs_radial",
            (grid_estimate - radial_truncated).abs() / radial_truncated,
            1e-2,
            true,
        ),
    ];
    report.hardy = Some(HardyRecord {
        estimate,
        rescaled,
        grid_estimate,
        radial_truncated,
    });
    Ok(Outcome::finish(report, Vec::new(), false))
}
