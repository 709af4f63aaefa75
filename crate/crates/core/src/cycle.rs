//! Multigrid proximal-gradient cycles.
//!
//! A cycle at level `l` with upstream linear term `tau` runs
//!
//! 1. `N_s` prox-grad steps on `F_l - <tau, .>` giving `y`;
//! 2. `y_c = R y` and the mask of set-valued points of `y`;
//! 3. the coarse term `tau_c` from [`build_tau`];
//! 4. a recursive cycle on level `l + 1` started at `y_c`, returning `w_c`;
//! 5. a halving line search along `P_masked (w_c - y_c)`;
//! 6. `N_s` prox-grad steps.
//!
//! The coarsest level only runs prox-grad steps.

use crate::error::{Error, Result};
use crate::hierarchy::{build_tau, shifted_subgradient, LevelStack};
use crate::linalg::{dist_inf, dot, norm2};
use crate::nonsmooth::SubgradientPolicy;
use crate::problem::CompositeProblem;
use crate::smoother::{check_positive, map_norm, smooth, step_unchecked, SmootherConfig};
use crate::trace::{Recorder, SolverTrace, StoppingRule};
use crate::transfer::{adaptive_mask, AdaptiveMask};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Variant {
    /// Adaptive transfers and the configured subgradient policy.
    #[default]
    MgProx,
    /// Full transfers everywhere and zero set-valued subgradients.
    Kocvara3,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum CoarseSolve {
    /// `N_s` prox-grad steps.
    #[default]
    Iterations,
    /// Prox-grad steps until `||G(w)|| <= tol * max(||G(y_c)||, 1)` or
    /// `max_steps`.
    HighAccuracy { tol: f64, max_steps: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleConfig {
    /// `N_s`, used for pre-smoothing, post-smoothing and the coarsest level.
    pub smoothing: usize,
    pub coarse_solve: CoarseSolve,
    pub alpha_init: f64,
    pub epsilon: f64,
    pub variant: Variant,
    pub policy: SubgradientPolicy,
    pub smoother: SmootherConfig,
    /// Negates every coarse linear term. A fault-injection switch for
    /// exercising the certificates; never set in real runs.
    pub flip_tau_sign: bool,
}

impl Default for CycleConfig {
    fn default() -> Self {
        CycleConfig {
            smoothing: 20,
            coarse_solve: CoarseSolve::Iterations,
            alpha_init: 1.0,
            epsilon: 1e-15,
            variant: Variant::MgProx,
            policy: SubgradientPolicy::Zero,
            smoother: SmootherConfig::default(),
            flip_tau_sign: false,
        }
    }
}

impl CycleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.smoothing == 0 {
            return Err(Error::param("smoothing", "must be >= 1"));
        }
        check_positive("alpha_init", self.alpha_init)?;
        check_positive("epsilon", self.epsilon)?;
        if let CoarseSolve::HighAccuracy { tol, .. } = self.coarse_solve {
            check_positive("coarse tol", tol)?;
        }
        self.smoother.validate()
    }

    fn policy(&self) -> SubgradientPolicy {
        match self.variant {
            Variant::MgProx => self.policy,
            Variant::Kocvara3 => SubgradientPolicy::Zero,
        }
    }
}

/// What happened at one non-coarsest level during a cycle. All objective values
/// are of that level's tau-corrected objective.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelTrace {
    pub level: usize,
    pub f_start: f64,
    pub f_pre: f64,
    pub f_correction: f64,
    pub f_post: f64,
    pub alpha: f64,
    /// `<s_hat, p>` with `s_hat` a subgradient of the level objective at `y`.
    pub s_dot_p: f64,
    pub p_norm: f64,
    pub masked: usize,
    /// `||w_c - y_c||_inf`, the coarse solve's displacement.
    pub coarse_shift: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoarsestTrace {
    pub level: usize,
    pub f_start: f64,
    pub f_end: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CycleTrace {
    /// Finest level first.
    pub levels: Vec<LevelTrace>,
    pub coarsest: CoarsestTrace,
    /// Prox-grad steps taken per level.
    pub steps: Vec<usize>,
    /// Output of the finest pre-smoothing.
    pub first_pre_smooth: Vec<f64>,
}

impl CycleTrace {
    /// Prox-grad work in units of `smoothing` steps on the finest level, with
    /// one step on level `l` costing `dims[l]`.
    pub fn work_units(&self, dims: &[usize], smoothing: usize) -> f64 {
        let total: usize = self.steps.iter().zip(dims).map(|(s, d)| s * d).sum();
        total as f64 / (smoothing * dims[0]) as f64
    }

    /// Stage-boundary values of level `l`, in order.
    pub fn stage_values(&self, l: usize) -> Vec<f64> {
        if let Some(t) = self.levels.get(l) {
            vec![t.f_start, t.f_pre, t.f_correction, t.f_post]
        } else {
            vec![self.coarsest.f_start, self.coarsest.f_end]
        }
    }

    /// Largest relative increase between consecutive stage values on any level.
    pub fn worst_stage_increase(&self) -> f64 {
        (0..=self.levels.len())
            .flat_map(|l| {
                let v = self.stage_values(l);
                (1..v.len())
                    .map(|i| (v[i] - v[i - 1]) / v[i - 1].abs().max(1.0))
                    .collect::<Vec<_>>()
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn finest_alpha(&self) -> Option<f64> {
        self.levels.first().map(|t| t.alpha)
    }
}

/// Halving search for `F(y + alpha p) <= F(y)` on `F - <tau, .>`, from
/// `alpha_init` down to `epsilon`; falls back to `(y, 0)`.
pub fn naive_line_search(
    problem: &CompositeProblem,
    tau: &[f64],
    y: &[f64],
    p: &[f64],
    alpha_init: f64,
    epsilon: f64,
) -> Result<(Vec<f64>, f64)> {
    problem.check(y)?;
    problem.check(p)?;
    if !tau.is_empty() {
        problem.check(tau)?;
    }
    check_positive("alpha_init", alpha_init)?;
    check_positive("epsilon", epsilon)?;
    Ok(line_search(problem, tau, y, p, alpha_init, epsilon))
}

fn line_search(
    problem: &CompositeProblem,
    tau: &[f64],
    y: &[f64],
    p: &[f64],
    alpha_init: f64,
    epsilon: f64,
) -> (Vec<f64>, f64) {
    let fy = problem.objective_tau(tau, y);
    let mut alpha = alpha_init;
    while alpha > epsilon {
        let z: Vec<f64> = y.iter().zip(p).map(|(a, b)| a + alpha * b).collect();
        if problem.objective_tau(tau, &z) <= fy {
            return (z, alpha);
        }
        alpha *= 0.5;
    }
    (y.to_vec(), 0.0)
}

/// A multigrid solver owning its level stack.
#[derive(Debug, Clone)]
pub struct MgProx {
    stack: LevelStack,
    config: CycleConfig,
    lipschitz: Vec<f64>,
}

impl MgProx {
    pub fn new(stack: LevelStack, config: CycleConfig) -> Result<Self> {
        config.validate()?;
        if stack.len() < 2 {
            return Err(Error::param("levels", "multigrid needs at least two levels"));
        }
        let lipschitz = stack
            .levels()
            .iter()
            .enumerate()
            .map(|(l, lev)| match (l, config.smoother.initial_lipschitz) {
                (0, Some(v)) => v,
                _ => lev.lipschitz(),
            })
            .collect();
        Ok(MgProx {
            stack,
            config,
            lipschitz,
        })
    }

    pub fn stack(&self) -> &LevelStack {
        &self.stack
    }

    pub fn config(&self) -> &CycleConfig {
        &self.config
    }

    /// Current step constant on the finest level.
    pub fn fine_lipschitz(&self) -> f64 {
        self.lipschitz[0]
    }

    /// One V-cycle from `x` on the finest level.
    pub fn cycle(&mut self, x: &[f64]) -> Result<(Vec<f64>, CycleTrace)> {
        self.stack.finest().problem().check(x)?;
        let n = self.stack.len();
        let mut trace = CycleTrace {
            levels: Vec::with_capacity(n - 1),
            coarsest: CoarsestTrace {
                level: n - 1,
                f_start: 0.0,
                f_end: 0.0,
                steps: 0,
            },
            steps: vec![0; n],
            first_pre_smooth: Vec::new(),
        };
        let out = self.descend(0, &[], x.to_vec(), &mut trace)?;
        trace.levels.sort_by_key(|t| t.level);
        Ok((out, trace))
    }

    fn descend(&mut self, l: usize, tau: &[f64], x: Vec<f64>, trace: &mut CycleTrace) -> Result<Vec<f64>> {
        let stack = &self.stack;
        let cfg = self.config;
        let level = stack.level(l);
        let problem = level.problem();

        if l + 1 == stack.len() {
            let f_start = problem.objective_tau(tau, &x);
            let (w, steps) = self.coarse_solve(l, tau, x)?;
            trace.steps[l] += steps;
            trace.coarsest = CoarsestTrace {
                level: l,
                f_start,
                f_end: self.stack.level(l).problem().objective_tau(tau, &w),
                steps,
            };
            return Ok(w);
        }

        let f_start = problem.objective_tau(tau, &x);
        let y = smooth(problem, tau, x, cfg.smoothing, &mut self.lipschitz[l], &cfg.smoother)?;
        trace.steps[l] += cfg.smoothing;
        if l == 0 {
            trace.first_pre_smooth = y.clone();
        }
        let f_pre = problem.objective_tau(tau, &y);

        let transfer = level.transfer_down().expect("non-coarsest level has a transfer");
        let coarse = stack.level(l + 1).problem();
        let mask = match cfg.variant {
            Variant::MgProx => adaptive_mask(problem.nonsmooth(), &y)?,
            Variant::Kocvara3 => AdaptiveMask::none(y.len()),
        };
        let y_c = transfer.restrict(&y)?;
        let mut tau_c = build_tau(problem, coarse, transfer, &y, &y_c, &mask, tau, cfg.policy())?;
        if cfg.flip_tau_sign {
            tau_c.iter_mut().for_each(|t| *t = -*t);
        }

        let w_c = self.descend(l + 1, &tau_c, y_c.clone(), trace)?;
        let problem = self.stack.level(l).problem();
        let transfer = self.stack.level(l).transfer_down().expect("checked above");
        let diff: Vec<f64> = w_c.iter().zip(&y_c).map(|(a, b)| a - b).collect();
        let p = transfer.prolong_adaptive(&mask, &diff)?;
        let s_hat = shifted_subgradient(problem, &y, tau, cfg.policy());
        let s_dot_p = dot(&s_hat, &p);
        let p_norm = norm2(&p);

        let (z, alpha) = line_search(problem, tau, &y, &p, cfg.alpha_init, cfg.epsilon);
        let f_correction = problem.objective_tau(tau, &z);
        let out = smooth(problem, tau, z, cfg.smoothing, &mut self.lipschitz[l], &cfg.smoother)?;
        trace.steps[l] += cfg.smoothing;
        let f_post = problem.objective_tau(tau, &out);

        trace.levels.push(LevelTrace {
            level: l,
            f_start,
            f_pre,
            f_correction,
            f_post,
            alpha,
            s_dot_p,
            p_norm,
            masked: mask.count(),
            coarse_shift: dist_inf(&w_c, &y_c),
        });
        Ok(out)
    }

    fn coarse_solve(&mut self, l: usize, tau: &[f64], x: Vec<f64>) -> Result<(Vec<f64>, usize)> {
        let cfg = self.config;
        let problem = self.stack.level(l).problem();
        match cfg.coarse_solve {
            CoarseSolve::Iterations => {
                let w = smooth(problem, tau, x, cfg.smoothing, &mut self.lipschitz[l], &cfg.smoother)?;
                Ok((w, cfg.smoothing))
            }
            CoarseSolve::HighAccuracy { tol, max_steps } => {
                let l_step = self.lipschitz[l];
                let target = tol * map_norm(problem, tau, &x, l_step).max(1.0);
                let mut w = x;
                let mut steps = 0;
                while steps < max_steps {
                    let next = step_unchecked(problem, tau, &w, l_step);
                    steps += 1;
                    let moved = next != w;
                    w = next;
                    if !moved || map_norm(problem, tau, &w, l_step) <= target {
                        break;
                    }
                }
                Ok((w, steps))
            }
        }
    }

    /// Repeats cycles until the stopping rule fires.
    pub fn solve(&mut self, x0: &[f64], stop: StoppingRule) -> Result<(Vec<f64>, SolverTrace)> {
        let fine = self.stack.finest().problem().clone();
        fine.check(x0)?;
        let mut rec = Recorder::new(&fine, x0, stop);
        let mut x = x0.to_vec();
        while rec.keep_going() {
            let (next, cycle) = self.cycle(&x)?;
            x = next;
            rec.push(&x, cycle.finest_alpha());
            rec.trace.cycles.push(cycle);
        }
        Ok((x, rec.finish()))
    }
}

/// One V-cycle of a fresh solver.
pub fn vcycle(stack: &LevelStack, config: &CycleConfig, x: &[f64]) -> Result<(Vec<f64>, CycleTrace)> {
    MgProx::new(stack.clone(), *config)?.cycle(x)
}

/// [`vcycle`] restricted to two-level stacks.
pub fn two_level_cycle(stack: &LevelStack, config: &CycleConfig, x: &[f64]) -> Result<(Vec<f64>, CycleTrace)> {
    if stack.len() != 2 {
        return Err(Error::param(
            "levels",
            format!("expected 2 levels, got {}", stack.len()),
        ));
    }
    vcycle(stack, config, x)
}

/// [`vcycle`] with the Kocvara3 variant forced.
pub fn kocvara3_cycle(stack: &LevelStack, config: &CycleConfig, x: &[f64]) -> Result<(Vec<f64>, CycleTrace)> {
    let cfg = CycleConfig {
        variant: Variant::Kocvara3,
        ..*config
    };
    vcycle(stack, &cfg, x)
}
