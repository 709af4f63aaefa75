//! Problem construction, solver dispatch and the `solve` / `compare` commands.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use mgprox::oracles::{reference_solution, ReferenceOptions};
use mgprox::rng::uniform_start;
use mgprox::{
    build_hierarchy, fista_solve, proxgrad_solve, CycleConfig, EopInstance, FastMgProx, GridLevel, LevelStack, MgProx,
    SmootherConfig, SolverTrace, StepMode, StoppingRule, SyntheticProblem, Variant,
};

use crate::config::{Algo, ProblemKind, RunConfig, StepModeArg, Timing};
use crate::CliError;

/// Seed of the synthetic right-hand side, kept apart from the start seed.
pub const SYNTHETIC_RHS_SEED: u64 = 42;

/// Level stack and starting point of a configured run.
#[derive(Debug, Clone)]
pub struct Setup {
    pub stack: LevelStack,
    pub x0: Vec<f64>,
}

pub fn setup(config: &RunConfig) -> Result<Setup, CliError> {
    config.validate()?;
    let stack = match config.problem {
        ProblemKind::Eop => {
            let grid = GridLevel::from_exponent(0, config.n_exp)?;
            build_hierarchy(&EopInstance::new(grid, config.lambda)?, config.levels)?
        }
        ProblemKind::Synthetic => {
            SyntheticProblem::new(1 << config.n_exp, config.lambda, SYNTHETIC_RHS_SEED)?.hierarchy(config.levels)?
        }
    };
    let x0 = uniform_start(stack.finest().dim(), config.seed);
    Ok(Setup { stack, x0 })
}

fn smoother(config: &RunConfig) -> SmootherConfig {
    SmootherConfig {
        step_mode: match config.step_mode {
            StepModeArg::Fixed => StepMode::Fixed,
            StepModeArg::Backtracking => StepMode::Backtracking,
        },
        ..SmootherConfig::default()
    }
}

pub fn cycle_config(config: &RunConfig, algo: Algo) -> CycleConfig {
    let base = CycleConfig {
        smoothing: config.smoothing,
        smoother: smoother(config),
        ..CycleConfig::default()
    };
    match algo {
        Algo::Kocvara3 => CycleConfig {
            smoothing: config.kocvara_smoothing,
            variant: Variant::Kocvara3,
            ..base
        },
        _ => base,
    }
}

/// Runs `algo` from the setup's starting point.
pub fn run_algo(config: &RunConfig, setup: &Setup, algo: Algo) -> Result<(Vec<f64>, SolverTrace), CliError> {
    let stop = StoppingRule::new(config.tol, config.max_iters);
    let problem = setup.stack.finest().problem();
    let out = match algo {
        Algo::Mgprox | Algo::Kocvara3 => {
            MgProx::new(setup.stack.clone(), cycle_config(config, algo))?.solve(&setup.x0, stop)?
        }
        Algo::Fastmgprox => {
            FastMgProx::new(setup.stack.clone(), cycle_config(config, algo), None)?.solve(&setup.x0, stop)?
        }
        Algo::Proxgrad => proxgrad_solve(problem, &setup.x0, stop, &smoother(config))?,
        Algo::Fista => fista_solve(problem, &setup.x0, stop, &smoother(config))?,
    };
    Ok(out)
}

pub fn write_trace(trace: &SolverTrace, path: &Path, timing: Timing) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| CliError::Io(path.display().to_string(), e))?;
    let mut w = BufWriter::new(file);
    trace
        .write_csv(&mut w, timing == Timing::Wall)
        .and_then(|_| w.flush())
        .map_err(|e| CliError::Io(path.display().to_string(), e))
}

/// `(F - F_min) / F(x_ini)`.
pub fn relative_gap(f: f64, f_min: f64, f_init: f64) -> f64 {
    (f - f_min) / f_init.abs()
}

fn total_time(trace: &SolverTrace) -> f64 {
    trace.records.last().map_or(0.0, |r| r.time_s)
}

/// `solve`: one solver, CSV trace, summary line. Returns whether it converged.
pub fn cmd_solve(config: &RunConfig, w: &mut impl Write) -> Result<bool, CliError> {
    let s = setup(config)?;
    let (x, trace) = run_algo(config, &s, config.algo)?;
    if let Some(path) = &config.out {
        write_trace(&trace, path, config.timing)?;
    }
    let (_, f_ref, _) = reference_solution(&s.stack, &s.x0, &ReferenceOptions::default())?;
    let f = s.stack.finest().problem().objective(&x);
    let f_min = f_ref.min(f);
    writeln!(
        w,
        "algo={} iterations={} converged={} rel_prox_grad_norm={:.6e} objective={:.12e} rel_gap={:.6e}",
        config.algo.name(),
        trace.iterations(),
        trace.converged,
        trace.final_rel_norm(),
        f,
        relative_gap(f, f_min, trace.initial_objective),
    )
    .map_err(|e| CliError::Io("stdout".into(), e))?;
    Ok(trace.converged)
}

/// One row of the comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub algo: Algo,
    pub iterations: usize,
    pub converged: bool,
    pub time_s: f64,
    pub objective: f64,
    pub rel_gap: f64,
}

/// Runs all five solvers from one starting point; `F_min` is the lowest
/// final objective among them.
pub fn compare(config: &RunConfig) -> Result<(Vec<CompareRow>, Vec<SolverTrace>), CliError> {
    let s = setup(config)?;
    let results: Vec<Result<(Vec<f64>, SolverTrace), CliError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = Algo::ALL
            .iter()
            .map(|&algo| {
                let s = &s;
                scope.spawn(move || run_algo(config, s, algo))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("solver thread panicked"))
            .collect()
    });
    let traces = results
        .into_iter()
        .map(|r| r.map(|(_, t)| t))
        .collect::<Result<Vec<_>, _>>()?;
    let f_min = traces
        .iter()
        .map(SolverTrace::final_objective)
        .fold(f64::INFINITY, f64::min);
    let rows = Algo::ALL
        .iter()
        .zip(&traces)
        .map(|(&algo, t)| CompareRow {
            algo,
            iterations: t.iterations(),
            converged: t.converged,
            time_s: total_time(t),
            objective: t.final_objective(),
            rel_gap: relative_gap(t.final_objective(), f_min, t.initial_objective),
        })
        .collect();
    Ok((rows, traces))
}

pub fn format_table(config: &RunConfig, rows: &[CompareRow]) -> String {
    let n = match config.problem {
        ProblemKind::Eop => ((1usize << config.n_exp) - 1).pow(2),
        ProblemKind::Synthetic => 1 << config.n_exp,
    };
    let mut out = format!(
        "N = {n}, lambda = {:e}, levels = {}, N_s = {}, tol = {:e}\n",
        config.lambda, config.levels, config.smoothing, config.tol
    );
    out.push_str(&format!(
        "{:<12} {:>12} {:>12} {:>24}\n",
        "method", "iterations", "time (s)", "(F - F_min)/F(x_ini)"
    ));
    for r in rows {
        let iters = if r.converged {
            r.iterations.to_string()
        } else {
            format!(">{}", r.iterations)
        };
        let time = match config.timing {
            Timing::Wall => format!("{:.3}", r.time_s),
            Timing::Off => "-".to_string(),
        };
        out.push_str(&format!(
            "{:<12} {:>12} {:>12} {:>24.6e}\n",
            r.algo.name(),
            iters,
            time,
            r.rel_gap
        ));
    }
    out
}

/// `compare`: table on `w`, one CSV per solver in the `out` directory.
pub fn cmd_compare(config: &RunConfig, w: &mut impl Write) -> Result<bool, CliError> {
    let (rows, traces) = compare(config)?;
    if let Some(dir) = &config.out {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(dir.display().to_string(), e))?;
        for (row, trace) in rows.iter().zip(&traces) {
            write_trace(trace, &dir.join(format!("{}.csv", row.algo.name())), config.timing)?;
        }
    }
    write!(w, "{}", format_table(config, &rows)).map_err(|e| CliError::Io("stdout".into(), e))?;
    Ok(true)
}
