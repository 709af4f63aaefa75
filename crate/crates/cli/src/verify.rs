//! Certificate suite behind the `verify` command.

use clap::ValueEnum;

use mgprox::cycle::vcycle;
use mgprox::linalg::{dist2, norm2};
use mgprox::oracles::{
    brute_force_prox, certify_fixed_point, certify_run, corrupt_stage_value, fd_gradient, linear_rate,
    reference_solution, RateConstants, ReferenceOptions, STAGE_MONOTONICITY,
};
use mgprox::rng::{uniform_start, UniformStream};
use mgprox::{
    build_hierarchy, fista_solve, proxgrad_solve, CoarseSolve, CycleConfig, EopInstance, FastMgProx, GridLevel,
    LevelStack, MgProx, SeparableNonsmooth, SmoothPart, SmootherConfig, StoppingRule, SyntheticProblem, Variant,
};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scope {
    All,
    Prox,
    Gradient,
    FixedPoint,
    Cycle,
    Rate,
    Fast,
    Ordering,
    Cost,
    Controls,
}

/// One named check; `margin <= 0` is a pass unless `passed` says otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub margin: f64,
}

impl Check {
    fn margin(name: impl Into<String>, margin: f64) -> Self {
        Check {
            name: name.into(),
            passed: margin <= 0.0,
            margin,
        }
    }
}

/// Test hooks that break the solver on purpose.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Hooks {
    pub flip_tau: bool,
}

pub const SYNTHETIC_N: usize = 64;
pub const SYNTHETIC_WEIGHT: f64 = 0.1;
pub const SEED: u64 = 42;

fn eop_stack(n_side: usize, levels: usize) -> Result<LevelStack, CliError> {
    let inst = EopInstance::new(GridLevel::new(0, n_side)?, 1e-6)?;
    Ok(build_hierarchy(&inst, levels)?)
}

/// Closed-form prox against golden-section search on random hinge and `l1` cases.
pub fn prox_checks(cases: usize) -> Result<Vec<Check>, CliError> {
    let mut r = UniformStream::new(SEED);
    let mut worst = 0.0f64;
    for k in 0..cases {
        let v = r.next_in(-3.0, 3.0);
        let weight = r.next_in(0.0, 2.0);
        let c = r.next_in(-2.0, 2.0);
        let step = r.next_in(0.01, 2.0);
        let g = if k % 2 == 0 {
            SeparableNonsmooth::hinge(weight, vec![c])?
        } else {
            SeparableNonsmooth::l1(weight)?
        };
        let p = g.coord_prox(0, v, step);
        let b = brute_force_prox(&g, 0, v, step, (v - 10.0, v + 10.0))?;
        worst = worst.max((p - b).abs());
    }
    Ok(vec![Check::margin("prox-golden-section", worst - 1e-8)])
}

/// Obstacle-energy gradient against central differences.
pub fn gradient_checks() -> Result<Vec<Check>, CliError> {
    let mut worst = 0.0f64;
    let mut r = UniformStream::new(SEED);
    for n in [3usize, 7] {
        let inst = EopInstance::new(GridLevel::new(0, n)?, 1e-6)?;
        let f = inst.smooth();
        for _ in 0..5 {
            let x = r.vector(n * n, 0.0, 1.0);
            let fd = fd_gradient(|z| f.value(z), &x, 1e-6)?;
            let g = f.gradient(&x);
            worst = worst.max(dist2(&g, &fd) / norm2(&g));
        }
    }
    Ok(vec![Check::margin("gradient-finite-difference", worst - 1e-6)])
}

/// High-accuracy coarse configuration for the fixed-point check.
pub fn high_accuracy(hooks: Hooks) -> CycleConfig {
    CycleConfig {
        coarse_solve: CoarseSolve::HighAccuracy {
            tol: 1e-13,
            max_steps: 100_000,
        },
        flip_tau_sign: hooks.flip_tau,
        ..CycleConfig::default()
    }
}

/// One cycle from a reference minimizer on a two-level `7 x 7` obstacle problem.
pub fn fixed_point_checks(hooks: Hooks) -> Result<Vec<Check>, CliError> {
    let stack = eop_stack(7, 2)?;
    let x0 = uniform_start(49, SEED);
    let (xs, _, rel) = reference_solution(&stack, &x0, &ReferenceOptions::default())?;
    let fp = certify_fixed_point(&stack, &high_accuracy(hooks), &xs, 1e-8, 1e-10)?;
    Ok(vec![
        Check::margin("reference-accuracy", rel - 1e-12),
        Check::margin("fixed-point", fp.certificate.margin),
    ])
}

/// Certificates of a full MGProx run on the `15 x 15` obstacle problem.
pub fn cycle_checks() -> Result<Vec<Check>, CliError> {
    let stack = eop_stack(15, 3)?;
    let x0 = uniform_start(225, SEED);
    let (xs, fs, _) = reference_solution(&stack, &x0, &ReferenceOptions::default())?;
    let (_, t) =
        MgProx::new(stack, CycleConfig::default())?.solve(&x0, StoppingRule::new(1e-10, 200).keep_iterates())?;
    let mut out = vec![Check {
        name: "converged-within-200-cycles".into(),
        passed: t.converged,
        margin: t.iterations() as f64 - 200.0,
    }];
    for c in certify_run(&t, &xs, fs, None)?.certificates {
        out.push(Check {
            name: c.name.into(),
            passed: c.passed,
            margin: c.margin,
        });
    }
    Ok(out)
}

fn synthetic() -> Result<(SyntheticProblem, LevelStack, Vec<f64>, f64), CliError> {
    let s = SyntheticProblem::new(SYNTHETIC_N, SYNTHETIC_WEIGHT, SEED)?;
    let stack = s.hierarchy(3)?;
    let (xs, fs, _) = reference_solution(&stack, &vec![0.0; SYNTHETIC_N], &ReferenceOptions::default())?;
    Ok((s, stack, xs, fs))
}

/// Linear-rate envelope of MGProx on the synthetic problem.
pub fn rate_checks() -> Result<Vec<Check>, CliError> {
    let (s, stack, _, fs) = synthetic()?;
    let x0 = vec![0.0; SYNTHETIC_N];
    let (_, t) = MgProx::new(stack, CycleConfig::default())?.solve(&x0, StoppingRule::new(1e-10, 1000))?;
    let c = linear_rate(&t, fs, RateConstants { mu: s.mu(), l: s.l() }, 1e-12);
    Ok(vec![Check::margin(c.name, c.margin)])
}

/// Estimate-sequence certificates of 200 accelerated steps on the synthetic problem.
pub fn fast_checks() -> Result<Vec<Check>, CliError> {
    let (_, stack, xs, fs) = synthetic()?;
    let x0 = vec![0.0; SYNTHETIC_N];
    let (_, t) = FastMgProx::new(stack, CycleConfig::default(), None)?.solve(&x0, StoppingRule::new(0.0, 200))?;
    Ok(certify_run(&t, &xs, fs, None)?
        .certificates
        .into_iter()
        .map(|c| Check {
            name: c.name.into(),
            passed: c.passed,
            margin: c.margin,
        })
        .collect())
}

/// Cycle counts of the five solvers on the `15 x 15` obstacle problem.
pub fn ordering_checks() -> Result<Vec<Check>, CliError> {
    let stack = eop_stack(15, 3)?;
    let x0 = uniform_start(225, SEED);
    let stop = StoppingRule::new(1e-10, 200);
    let (_, mg) = MgProx::new(stack.clone(), CycleConfig::default())?.solve(&x0, stop)?;
    let k = mg.iterations();
    let cap = StoppingRule::new(1e-10, 10 * k);
    let problem = stack.finest().problem();
    let (_, pg) = proxgrad_solve(problem, &x0, cap, &SmootherConfig::default())?;
    let (_, fi) = fista_solve(problem, &x0, cap, &SmootherConfig::default())?;
    let kcfg = CycleConfig {
        smoothing: 10,
        variant: Variant::Kocvara3,
        ..CycleConfig::default()
    };
    let (_, k3) = MgProx::new(stack, kcfg)?.solve(&x0, StoppingRule::new(1e-10, 10 * k))?;
    Ok(vec![
        Check {
            name: "mgprox-within-200-cycles".into(),
            passed: mg.converged,
            margin: k as f64 - 200.0,
        },
        Check {
            name: "proxgrad-needs-10x".into(),
            passed: !pg.converged,
            margin: if pg.converged { 1.0 } else { -1.0 },
        },
        Check {
            name: "fista-needs-10x".into(),
            passed: !fi.converged,
            margin: if fi.converged { 1.0 } else { -1.0 },
        },
        Check::margin("kocvara3-needs-more", (k + 1) as f64 - k3.iterations() as f64),
    ])
}

/// Smoothing work of one V-cycle against the geometric bound.
pub fn cost_checks() -> Result<Vec<Check>, CliError> {
    let mut out = Vec::new();
    for (n, levels) in [(15usize, 2usize), (15, 3), (31, 4)] {
        let stack = eop_stack(n, levels)?;
        let (_, t) = vcycle(&stack, &CycleConfig::default(), &uniform_start(n * n, SEED))?;
        let w = t.work_units(&stack.dims(), CycleConfig::default().smoothing);
        let bound = (8.0 / 3.0 * (1.0 - 0.25f64.powi(levels as i32))).min(2.67);
        out.push(Check::margin(format!("work-units-{levels}-levels"), w - bound));
    }
    Ok(out)
}

/// A flipped `tau` and a corrupted trace must both be detected.
pub fn control_checks() -> Result<Vec<Check>, CliError> {
    let flipped = fixed_point_checks(Hooks { flip_tau: true })?;
    let fp = flipped.iter().find(|c| c.name == "fixed-point").expect("present");
    let stack = eop_stack(7, 2)?;
    let x0 = uniform_start(49, SEED);
    let (xs, fs, _) = reference_solution(&stack, &x0, &ReferenceOptions::default())?;
    let (_, mut t) = MgProx::new(stack, CycleConfig::default())?.solve(&x0, StoppingRule::new(1e-10, 200))?;
    corrupt_stage_value(&mut t, 1, 0)?;
    let mono = certify_run(&t, &xs, fs, None)?;
    let mono = mono.get(STAGE_MONOTONICITY).expect("present");
    Ok(vec![
        Check {
            name: "flipped-tau-detected".into(),
            passed: !fp.passed,
            margin: -fp.margin,
        },
        Check {
            name: "corrupted-stage-detected".into(),
            passed: !mono.passed,
            margin: -mono.margin,
        },
    ])
}

pub fn run_scope(scope: Scope, hooks: Hooks) -> Result<Vec<Check>, CliError> {
    Ok(match scope {
        Scope::Prox => prox_checks(1000)?,
        Scope::Gradient => gradient_checks()?,
        Scope::FixedPoint => fixed_point_checks(hooks)?,
        Scope::Cycle => cycle_checks()?,
        Scope::Rate => rate_checks()?,
        Scope::Fast => fast_checks()?,
        Scope::Ordering => ordering_checks()?,
        Scope::Cost => cost_checks()?,
        Scope::Controls => control_checks()?,
        Scope::All => {
            let mut all = Vec::new();
            for s in [
                Scope::Prox,
                Scope::Gradient,
                Scope::FixedPoint,
                Scope::Cycle,
                Scope::Rate,
                Scope::Fast,
                Scope::Ordering,
                Scope::Cost,
                Scope::Controls,
            ] {
                all.extend(run_scope(s, hooks)?);
            }
            all
        }
    })
}
