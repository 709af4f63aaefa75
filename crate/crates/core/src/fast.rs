//! Accelerated multigrid proximal gradient with estimate-sequence diagnostics.
//!
//! Each step solves `L alpha^2 = (1 - alpha) gamma`, extrapolates
//! `y = alpha z + (1 - alpha) x`, takes one prox-grad step from `y` and then
//! one V-cycle, and moves `z` along `g = (y - x_next) / L`.

use crate::cycle::{CycleConfig, CycleTrace, MgProx};
use crate::error::Result;
use crate::hierarchy::LevelStack;
use crate::linalg::{dot, lerp};
use crate::smoother::{check_positive, map_norm, step_unchecked};
use crate::trace::{Recorder, SolverTrace, StoppingRule};

/// Root in `(0, 1)` of `L alpha^2 = (1 - alpha) gamma`.
pub fn solve_alpha(l: f64, gamma: f64) -> Result<f64> {
    check_positive("L", l)?;
    check_positive("gamma", gamma)?;
    Ok((-gamma + (gamma * gamma + 4.0 * l * gamma).sqrt()) / (2.0 * l))
}

/// Upper bound on the estimate-sequence weight after `k` steps.
pub fn lambda_rate_bound(k: usize, gamma0: f64, l: f64) -> Result<f64> {
    check_positive("L", l)?;
    check_positive("gamma0", gamma0)?;
    let k = k as f64;
    let (sl, sg) = (l.sqrt(), gamma0.sqrt());
    let denom = (2.0 * sl - sg).powi(2) + 2.0 * (2.0 * sl * sg - sg) * sg * k + gamma0 * k * k;
    Ok(4.0 * l / denom)
}

/// `phi_bar^+ = (1 - a) phi_bar + a F(x+) + (a/2)(1/L - a/gamma^+) ||g||^2 + a <g, z - y>`.
pub fn phi_bar_update(
    phi_bar: f64,
    alpha: f64,
    gamma_next: f64,
    l: f64,
    f_next: f64,
    g: &[f64],
    z_prev: &[f64],
    y_prev: &[f64],
) -> f64 {
    let zy: Vec<f64> = z_prev.iter().zip(y_prev).map(|(a, b)| a - b).collect();
    (1.0 - alpha) * phi_bar
        + alpha * f_next
        + 0.5 * alpha * (1.0 / l - alpha / gamma_next) * dot(g, g)
        + alpha * dot(g, &zy)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateSeqState {
    pub gamma: f64,
    /// Weight used by the most recent step.
    pub alpha: f64,
    pub z: Vec<f64>,
    pub y: Vec<f64>,
    pub lambda: f64,
    pub phi_bar: f64,
}

impl EstimateSeqState {
    /// `z^0 = y^0 = x^0`, `lambda^0 = 1`, `phi_bar^0 = F(x^0)`.
    pub fn new(x0: &[f64], gamma0: f64, f0: f64) -> Result<Self> {
        check_positive("gamma0", gamma0)?;
        Ok(EstimateSeqState {
            gamma: gamma0,
            alpha: 0.0,
            z: x0.to_vec(),
            y: x0.to_vec(),
            lambda: 1.0,
            phi_bar: f0,
        })
    }
}

/// Diagnostics of one accelerated step.
#[derive(Debug, Clone, PartialEq)]
pub struct FastRecord {
    pub alpha: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub phi_bar: f64,
    pub f_y: f64,
    /// `||G(y)||` with the fixed finest-level step.
    pub g_norm_y: f64,
    pub f_next: f64,
    /// `L alpha^2 - (1 - alpha) gamma_prev`.
    pub alpha_residual: f64,
}

#[derive(Debug, Clone)]
pub struct FastMgProx {
    mg: MgProx,
    gamma0: Option<f64>,
}

impl FastMgProx {
    /// `gamma0 = None` uses the finest Lipschitz constant.
    pub fn new(stack: LevelStack, config: CycleConfig, gamma0: Option<f64>) -> Result<Self> {
        if let Some(g) = gamma0 {
            check_positive("gamma0", g)?;
        }
        Ok(FastMgProx {
            mg: MgProx::new(stack, config)?,
            gamma0,
        })
    }

    pub fn lipschitz(&self) -> f64 {
        self.mg.stack().finest().lipschitz()
    }

    pub fn initial_state(&self, x0: &[f64]) -> Result<EstimateSeqState> {
        let p = self.mg.stack().finest().problem();
        p.check(x0)?;
        EstimateSeqState::new(x0, self.gamma0.unwrap_or(self.lipschitz()), p.objective(x0))
    }

    /// One accelerated step from `x`.
    pub fn fast_step(
        &mut self,
        state: &EstimateSeqState,
        x: &[f64],
    ) -> Result<(Vec<f64>, EstimateSeqState, FastRecord, CycleTrace)> {
        let l = self.lipschitz();
        let problem = self.mg.stack().finest().problem().clone();
        problem.check(x)?;
        let alpha = solve_alpha(l, state.gamma)?;
        let gamma_next = (1.0 - alpha) * state.gamma;
        let y = lerp(alpha, &state.z, x);
        let w = step_unchecked(&problem, &[], &y, l);
        let (x_next, cycle) = self.mg.cycle(&w)?;
        let g: Vec<f64> = y.iter().zip(&x_next).map(|(a, b)| (a - b) / l).collect();
        let z_next: Vec<f64> = state
            .z
            .iter()
            .zip(&g)
            .map(|(zi, gi)| zi - alpha / gamma_next * gi)
            .collect();
        let f_next = problem.objective(&x_next);
        let phi_bar = phi_bar_update(state.phi_bar, alpha, gamma_next, l, f_next, &g, &state.z, &y);
        let record = FastRecord {
            alpha,
            gamma: gamma_next,
            lambda: (1.0 - alpha) * state.lambda,
            phi_bar,
            f_y: problem.objective(&y),
            g_norm_y: map_norm(&problem, &[], &y, l),
            f_next,
            alpha_residual: l * alpha * alpha - (1.0 - alpha) * state.gamma,
        };
        let next = EstimateSeqState {
            gamma: gamma_next,
            alpha,
            z: z_next,
            y,
            lambda: record.lambda,
            phi_bar,
        };
        Ok((x_next, next, record, cycle))
    }

    pub fn solve(&mut self, x0: &[f64], stop: StoppingRule) -> Result<(Vec<f64>, SolverTrace)> {
        let problem = self.mg.stack().finest().problem().clone();
        let mut state = self.initial_state(x0)?;
        let mut rec = Recorder::new(&problem, x0, stop);
        let mut x = x0.to_vec();
        while rec.keep_going() {
            let (next, st, record, cycle) = self.fast_step(&state, &x)?;
            x = next;
            state = st;
            rec.push(&x, cycle.finest_alpha());
            rec.trace.cycles.push(cycle);
            rec.trace.fast.push(record);
        }
        Ok((x, rec.finish()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_roots() {
        let a = solve_alpha(1.0, 1.0).unwrap();
        assert!((a - 0.6180339887).abs() < 1e-10);
        let a = solve_alpha(4.0, 1.0).unwrap();
        assert!((a - 0.3903882).abs() < 1e-7);
        assert!((4.0 * a * a - (1.0 - a)).abs() <= 1e-14);
        assert!(solve_alpha(1.0, 1e-16).unwrap() < 1e-7);
        assert!(solve_alpha(0.0, 1.0).is_err());
        assert!(solve_alpha(1.0, -1.0).is_err());
    }

    #[test]
    fn rate_bound_values() {
        assert_eq!(lambda_rate_bound(0, 1.0, 1.0).unwrap(), 4.0);
        let k = 1000;
        let b = lambda_rate_bound(k, 1.0, 1.0).unwrap();
        assert!((b * (k * k) as f64 - 4.0).abs() < 0.02);
        assert!(lambda_rate_bound(1, 0.0, 1.0).is_err());
    }

    #[test]
    fn lambda_recursion_below_bound() {
        let (l, g0) = (1.0, 1.0);
        let mut gamma = g0;
        let mut lambda = 1.0f64;
        for k in 1..=200 {
            let a = solve_alpha(l, gamma).unwrap();
            let next = (1.0 - a) * lambda;
            assert!(next < lambda && next > 0.0);
            lambda = next;
            gamma *= 1.0 - a;
            assert!(((gamma - lambda * g0) / gamma).abs() < 1e-12);
            assert!(lambda < lambda_rate_bound(k, g0, l).unwrap());
        }
    }

    #[test]
    fn phi_bar_frozen_without_weight() {
        let g = [1.0, -2.0];
        let v = phi_bar_update(3.0, 0.0, 1.0, 1.0, 10.0, &g, &[0.0, 0.0], &[1.0, 1.0]);
        assert_eq!(v, 3.0);
    }
}
