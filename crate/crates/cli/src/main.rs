use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mgprox_cli::config::{Algo, ProblemKind, RunConfig, StepModeArg, Timing};
use mgprox_cli::run::{cmd_compare, cmd_solve};
use mgprox_cli::verify::{run_scope, Hooks, Scope};
use mgprox_cli::CliError;

/// Multigrid proximal gradient solvers for the elastic obstacle problem.
#[derive(Debug, Parser)]
#[command(name = "mgprox", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one solver and write its per-iteration trace.
    Solve {
        #[command(flatten)]
        common: CommonArgs,
        /// Solver to run.
        #[arg(long, value_enum)]
        algo: Option<Algo>,
    },
    /// Run all five solvers from one start and print a comparison table.
    Compare {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run the certificate suite.
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        scope: Scope,
        /// Flip the sign of the coarse linear term (negative-control hook).
        #[arg(long, hide = true)]
        flip_tau: bool,
    },
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Flat `key=value` file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    problem: Option<ProblemKind>,
    /// Grid exponent m; the obstacle grid has side 2^m - 1.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=12))]
    n_exp: Option<u32>,
    /// Penalty weight.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    levels: Option<usize>,
    /// Smoothing steps per stage.
    #[arg(long)]
    smoothing: Option<usize>,
    /// Smoothing steps of the kocvara3 method.
    #[arg(long)]
    kocvara_smoothing: Option<usize>,
    /// Relative prox-gradient tolerance.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Seed of the uniform starting point.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    step_mode: Option<StepModeArg>,
    /// CSV file for `solve`, directory for `compare`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    timing: Option<Timing>,
}

impl CommonArgs {
    fn resolve(self, algo: Option<Algo>) -> Result<RunConfig, CliError> {
        let mut c = RunConfig::default();
        if let Some(path) = &self.config {
            c.apply_file(path)?;
        }
        if let Some(v) = self.problem {
            c.problem = v;
        }
        if let Some(v) = self.n_exp {
            c.n_exp = v;
        }
        if let Some(v) = self.lambda {
            c.lambda = v;
        }
        if let Some(v) = self.levels {
            c.levels = v;
        }
        if let Some(v) = self.smoothing {
            c.smoothing = v;
        }
        if let Some(v) = self.kocvara_smoothing {
            c.kocvara_smoothing = v;
        }
        if let Some(v) = self.tol {
            c.tol = v;
        }
        if let Some(v) = self.max_iters {
            c.max_iters = v;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = self.step_mode {
            c.step_mode = v;
        }
        if self.out.is_some() {
            c.out = self.out;
        }
        if let Some(v) = self.timing {
            c.timing = v;
        }
        if let Some(v) = algo {
            c.algo = v;
        }
        c.validate()?;
        Ok(c)
    }
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let mut stdout = std::io::stdout().lock();
    match cli.command {
        Command::Solve { common, algo } => {
            cmd_solve(&common.resolve(algo)?, &mut stdout)?;
            Ok(true)
        }
        Command::Compare { common } => cmd_compare(&common.resolve(None)?, &mut stdout),
        Command::Verify { scope, flip_tau } => {
            let checks = run_scope(scope, Hooks { flip_tau })?;
            let mut ok = true;
            for c in &checks {
                println!(
                    "{} {:<32} margin={:+.3e}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.margin
                );
                if !c.passed {
                    eprintln!("certificate failed: {}", c.name);
                    ok = false;
                }
            }
            Ok(ok)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
