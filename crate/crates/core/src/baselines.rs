//! Single-level comparison solvers: proximal gradient and FISTA, both with a
//! non-decreasing backtracked Lipschitz estimate.

use crate::error::Result;
use crate::problem::CompositeProblem;
use crate::smoother::{backtrack_lipschitz, SmootherConfig};
use crate::trace::{Recorder, SolverTrace, StoppingRule};

/// `x <- prox_{g/L}(x - grad f(x)/L)` with backtracked `L`.
pub fn proxgrad_solve(
    problem: &CompositeProblem,
    x0: &[f64],
    stop: StoppingRule,
    config: &SmootherConfig,
) -> Result<(Vec<f64>, SolverTrace)> {
    problem.check(x0)?;
    config.validate()?;
    let mut l = config.starting_lipschitz(problem);
    let mut rec = Recorder::new(problem, x0, stop);
    let mut x = x0.to_vec();
    while rec.keep_going() {
        let (l_new, y) = backtrack_lipschitz(problem, &[], &x, l, config)?;
        l = l_new;
        x = y;
        rec.push(&x, None);
    }
    Ok((x, rec.finish()))
}

/// Next FISTA weight `t_{k+1} = (1 + sqrt(1 + 4 t_k^2)) / 2`.
pub fn fista_t_next(t: f64) -> f64 {
    0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt())
}

/// FISTA from `t_1 = 1`, extrapolating with `beta_k = (t_k - 1) / t_{k+1}`.
/// Convergence is measured at `x^k`; `F(x^k)` need not decrease.
pub fn fista_solve(
    problem: &CompositeProblem,
    x0: &[f64],
    stop: StoppingRule,
    config: &SmootherConfig,
) -> Result<(Vec<f64>, SolverTrace)> {
    problem.check(x0)?;
    config.validate()?;
    let mut l = config.starting_lipschitz(problem);
    let mut rec = Recorder::new(problem, x0, stop);
    let mut x = x0.to_vec();
    let mut y = x0.to_vec();
    let mut t = 1.0;
    while rec.keep_going() {
        let (l_new, x_next) = backtrack_lipschitz(problem, &[], &y, l, config)?;
        l = l_new;
        let t_next = fista_t_next(t);
        let beta = (t - 1.0) / t_next;
        y = x_next.iter().zip(&x).map(|(a, b)| a + beta * (a - b)).collect();
        x = x_next;
        t = t_next;
        rec.push(&x, None);
    }
    Ok((x, rec.finish()))
}
