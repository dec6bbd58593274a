use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hamsys_cli::config::{self, RunConfig, Task};
use hamsys_cli::{exit, run_task, tasks, CliError};
use log::error;

#[derive(Parser)]
#[command(name = "hamsys", version, about = "Positive solutions of Hamiltonian elliptic systems on exterior domains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides run.out).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for randomized check directions (overrides run.seed).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for the sweep.
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// `section.key=value`, applied after the file; repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Mountain-pass solve with Newton refinement.
    Solve(Common),
    /// One solve per decomposition (N - n, n), n = 2..=k, with distinctness checks.
    Sweep(Common),
    /// Radial eigenproblem, second variation and the symmetry-breaking verdict.
    Spectrum(Common),
    /// Re-run all checks on saved fields.
    Verify {
        #[command(flatten)]
        common: Common,
        /// CSV with header r,theta,u,v (default: <out>/solve.csv).
        #[arg(long)]
        fields: Option<PathBuf>,
    },
    /// Hardy constant, its scale invariance and the 2-D grid estimate.
    Hardy(Common),
    /// Every task listed in run.tasks, in order.
    Run(Common),
    /// Print the configuration reference with all defaults.
    ConfigReference,
}

fn load(c: &Common) -> Result<RunConfig, CliError> {
    let mut overrides = c.overrides.clone();
    if let Some(out) = &c.out {
        overrides.push(format!("run.out={}", toml_string(&out.to_string_lossy())));
    }
    if let Some(seed) = c.seed {
        overrides.push(format!("run.seed={seed}"));
    }
    RunConfig::load(&c.config, &overrides)
}

fn toml_string(s: &str) -> String {
    toml::Value::String(s.to_string()).to_string()
}

fn run(cfg: &RunConfig, tasks_: &[Task], threads: usize, fields: Option<&PathBuf>) -> Result<i32, CliError> {
    let mut status = exit::OK;
    for &task in tasks_ {
        let outcome = match (task, fields) {
            (Task::Verify, Some(f)) => tasks::verify(cfg, Some(f))?,
            _ => run_task(cfg, task, threads)?,
        };
        outcome.write(&cfg.run.out)?;
        print!("{}", outcome.report.summary());
        for w in &outcome.report.warnings {
            log::warn!("{w}");
        }
        status = status.max(outcome.status);
    }
    Ok(status)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::ConfigReference => {
            print!("{}", config::reference());
            Ok(exit::OK)
        }
        Command::Solve(c) => load(c).and_then(|cfg| run(&cfg, &[Task::Solve], c.threads, None)),
        Command::Sweep(c) => load(c).and_then(|cfg| run(&cfg, &[Task::Sweep], c.threads, None)),
        Command::Spectrum(c) => load(c).and_then(|cfg| run(&cfg, &[Task::Spectrum], c.threads, None)),
        Command::Hardy(c) => load(c).and_then(|cfg| run(&cfg, &[Task::Hardy], c.threads, None)),
        Command::Verify { common, fields } => {
            load(common).and_then(|cfg| run(&cfg, &[Task::Verify], common.threads, fields.as_ref()))
        }
        Command::Run(c) => load(c).and_then(|cfg| {
            let list = cfg.run.tasks.clone();
            run(&cfg, &list, c.threads, None)
        }),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            error!("{e}");
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
