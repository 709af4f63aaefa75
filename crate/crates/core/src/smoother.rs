//! Proximal-gradient steps on `F - <tau, .>` and backtracking on `L`.

use crate::error::{check_len, Error, Result};
use crate::linalg::{dist2, dot};
use crate::problem::CompositeProblem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StepMode {
    /// Step `1/L` with the level's Lipschitz constant.
    #[default]
    Fixed,
    /// Start from the level constant and double until the quadratic upper
    /// bound holds; the estimate never shrinks.
    Backtracking,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmootherConfig {
    pub step_mode: StepMode,
    /// Overrides the problem's Lipschitz constant as the starting estimate.
    pub initial_lipschitz: Option<f64>,
    pub growth: f64,
    pub max_doublings: usize,
}

impl Default for SmootherConfig {
    fn default() -> Self {
        SmootherConfig {
            step_mode: StepMode::Fixed,
            initial_lipschitz: None,
            growth: 2.0,
            max_doublings: 60,
        }
    }
}

impl SmootherConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.growth > 1.0) {
            return Err(Error::param("growth", format!("{} must be > 1", self.growth)));
        }
        if let Some(l) = self.initial_lipschitz {
            check_positive("initial_lipschitz", l)?;
        }
        Ok(())
    }

    pub fn starting_lipschitz(&self, problem: &CompositeProblem) -> f64 {
        self.initial_lipschitz.unwrap_or_else(|| problem.lipschitz())
    }
}

pub(crate) fn check_positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(name, format!("{v} must be finite and > 0")))
    }
}

fn check_tau(problem: &CompositeProblem, tau: &[f64]) -> Result<()> {
    if tau.is_empty() {
        Ok(())
    } else {
        check_len(problem.dim(), tau.len())
    }
}

pub(crate) fn step_unchecked(problem: &CompositeProblem, tau: &[f64], x: &[f64], l: f64) -> Vec<f64> {
    let grad = problem.grad_f(x);
    let v: Vec<f64> = if tau.is_empty() {
        x.iter().zip(&grad).map(|(xi, gi)| xi - gi / l).collect()
    } else {
        x.iter()
            .zip(&grad)
            .zip(tau)
            .map(|((xi, gi), ti)| xi - (gi - ti) / l)
            .collect()
    };
    problem.nonsmooth().prox_unchecked(&v, 1.0 / l)
}

/// `prox_{g/L}(x - (grad f(x) - tau) / L)`; an empty `tau` means zero.
pub fn prox_grad_step(problem: &CompositeProblem, tau: &[f64], x: &[f64], l: f64) -> Result<Vec<f64>> {
    problem.check(x)?;
    check_tau(problem, tau)?;
    check_positive("L", l)?;
    Ok(step_unchecked(problem, tau, x, l))
}

/// Proximal gradient map `G(x) = L (x - prox_grad_step(x))`.
pub fn prox_grad_map(problem: &CompositeProblem, tau: &[f64], x: &[f64], l: f64) -> Result<Vec<f64>> {
    let y = prox_grad_step(problem, tau, x, l)?;
    Ok(x.iter().zip(&y).map(|(a, b)| l * (a - b)).collect())
}

pub(crate) fn map_norm(problem: &CompositeProblem, tau: &[f64], x: &[f64], l: f64) -> f64 {
    let y = step_unchecked(problem, tau, x, l);
    l * dist2(x, &y)
}

fn upper_bound_holds(problem: &CompositeProblem, x: &[f64], fx: f64, grad: &[f64], y: &[f64], l: f64) -> bool {
    let d: Vec<f64> = y.iter().zip(x).map(|(a, b)| a - b).collect();
    let fy = problem.f(y);
    let roundoff = 8.0 * f64::EPSILON * fx.abs().max(fy.abs());
    fy <= fx + dot(grad, &d) + 0.5 * l * dot(&d, &d) + roundoff
}

/// Smallest `L0 * growth^t` for which the quadratic upper bound on `f` holds
/// at `y = prox_grad_step(x, L)`, up to a few ulps of `f`; returns `(L, y)`.
pub fn backtrack_lipschitz(
    problem: &CompositeProblem,
    tau: &[f64],
    x: &[f64],
    l0: f64,
    config: &SmootherConfig,
) -> Result<(f64, Vec<f64>)> {
    problem.check(x)?;
    check_tau(problem, tau)?;
    check_positive("L0", l0)?;
    config.validate()?;
    let fx = problem.f(x);
    let grad = problem.grad_f(x);
    let mut l = l0;
    for _ in 0..=config.max_doublings {
        let y = step_unchecked(problem, tau, x, l);
        if upper_bound_holds(problem, x, fx, &grad, &y, l) {
            return Ok((l, y));
        }
        l *= config.growth;
    }
    Err(Error::Backtracking {
        max_doublings: config.max_doublings,
        last_lipschitz: l / config.growth,
    })
}

/// `F_after <= F_before - G_norm^2 / (2L)`.
pub fn check_sufficient_descent(f_before: f64, f_after: f64, g_norm: f64, l: f64) -> bool {
    f_after <= f_before - g_norm * g_norm / (2.0 * l)
}

/// Runs `steps` smoothing steps from `x`; `lipschitz` carries the step
/// constant across calls in backtracking mode.
pub(crate) fn smooth(
    problem: &CompositeProblem,
    tau: &[f64],
    x: Vec<f64>,
    steps: usize,
    lipschitz: &mut f64,
    config: &SmootherConfig,
) -> Result<Vec<f64>> {
    let mut x = x;
    for _ in 0..steps {
        x = match config.step_mode {
            StepMode::Fixed => step_unchecked(problem, tau, &x, *lipschitz),
            StepMode::Backtracking => {
                let (l, y) = backtrack_lipschitz(problem, tau, &x, *lipschitz, config)?;
                *lipschitz = l;
                y
            }
        };
    }
    Ok(x)
}
