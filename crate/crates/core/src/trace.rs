//! Per-iteration solver records and CSV output.

use std::io::{self, Write};
use std::time::Instant;

use crate::cycle::CycleTrace;
use crate::fast::FastRecord;
use crate::problem::CompositeProblem;
use crate::smoother::map_norm;

/// Column header of [`SolverTrace::write_csv`].
pub const CSV_HEADER: &str = "iter,time_s,objective,rel_prox_grad_norm,coarse_alpha";

/// When a solve stops.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoppingRule {
    /// Relative prox-gradient-map tolerance.
    pub tol: f64,
    pub max_iters: usize,
    /// Denominator of the relative norm; defaults to `||G(x0)||`.
    pub reference_norm: Option<f64>,
    /// Keep every iterate in the trace (needed by some certificates).
    pub keep_iterates: bool,
}

impl Default for StoppingRule {
    fn default() -> Self {
        StoppingRule {
            tol: 1e-10,
            max_iters: 1000,
            reference_norm: None,
            keep_iterates: false,
        }
    }
}

impl StoppingRule {
    pub fn new(tol: f64, max_iters: usize) -> Self {
        StoppingRule {
            tol,
            max_iters,
            ..StoppingRule::default()
        }
    }

    pub fn keep_iterates(mut self) -> Self {
        self.keep_iterates = true;
        self
    }

    pub fn with_reference_norm(mut self, norm: f64) -> Self {
        self.reference_norm = Some(norm);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterRecord {
    pub iter: usize,
    pub time_s: f64,
    pub objective: f64,
    pub rel_prox_grad_norm: f64,
    /// Finest-level coarse-correction step, multigrid solvers only.
    pub coarse_alpha: Option<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct SolverTrace {
    pub initial_objective: f64,
    pub initial_prox_grad_norm: f64,
    pub reference_norm: f64,
    /// Lipschitz constant of the gradient-map metric.
    pub metric_lipschitz: f64,
    pub records: Vec<IterRecord>,
    pub converged: bool,
    /// `x^0, x^1, ...` when requested by the stopping rule.
    pub iterates: Vec<Vec<f64>>,
    pub cycles: Vec<CycleTrace>,
    pub fast: Vec<FastRecord>,
}

impl SolverTrace {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn final_objective(&self) -> f64 {
        self.records.last().map_or(self.initial_objective, |r| r.objective)
    }

    pub fn final_rel_norm(&self) -> f64 {
        self.records
            .last()
            .map_or(relative(self.initial_prox_grad_norm, self.reference_norm), |r| {
                r.rel_prox_grad_norm
            })
    }

    /// Objective sequence `F(x^0), F(x^1), ...`.
    pub fn objectives(&self) -> Vec<f64> {
        std::iter::once(self.initial_objective)
            .chain(self.records.iter().map(|r| r.objective))
            .collect()
    }

    /// Writes one row per iteration; `timing = false` writes zero times.
    pub fn write_csv<W: Write>(&self, mut w: W, timing: bool) -> io::Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        for r in &self.records {
            let t = if timing { r.time_s } else { 0.0 };
            let alpha = r.coarse_alpha.map(|a| format!("{a:.15e}")).unwrap_or_default();
            writeln!(
                w,
                "{},{:.15e},{:.15e},{:.15e},{}",
                r.iter, t, r.objective, r.rel_prox_grad_norm, alpha
            )?;
        }
        Ok(())
    }
}

fn relative(norm: f64, reference: f64) -> f64 {
    if reference > 0.0 {
        norm / reference
    } else if norm > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

/// Shared bookkeeping for the solver loops.
pub(crate) struct Recorder<'a> {
    problem: &'a CompositeProblem,
    stop: StoppingRule,
    start: Instant,
    pub trace: SolverTrace,
}

impl<'a> Recorder<'a> {
    pub fn new(problem: &'a CompositeProblem, x0: &[f64], stop: StoppingRule) -> Self {
        let l = problem.lipschitz();
        let g0 = map_norm(problem, &[], x0, l);
        let reference = stop.reference_norm.unwrap_or(g0);
        let trace = SolverTrace {
            initial_objective: problem.objective(x0),
            initial_prox_grad_norm: g0,
            reference_norm: reference,
            metric_lipschitz: l,
            iterates: if stop.keep_iterates {
                vec![x0.to_vec()]
            } else {
                Vec::new()
            },
            ..SolverTrace::default()
        };
        let mut rec = Recorder {
            problem,
            stop,
            start: Instant::now(),
            trace,
        };
        rec.trace.converged = relative(g0, reference) <= stop.tol;
        rec
    }

    /// True when the loop should run another iteration.
    pub fn keep_going(&self) -> bool {
        !self.trace.converged && self.trace.records.len() < self.stop.max_iters
    }

    pub fn push(&mut self, x: &[f64], coarse_alpha: Option<f64>) {
        let g = map_norm(self.problem, &[], x, self.trace.metric_lipschitz);
        let rel = relative(g, self.trace.reference_norm);
        self.trace.records.push(IterRecord {
            iter: self.trace.records.len() + 1,
            time_s: self.start.elapsed().as_secs_f64(),
            objective: self.problem.objective(x),
            rel_prox_grad_norm: rel,
            coarse_alpha,
        });
        if self.stop.keep_iterates {
            self.trace.iterates.push(x.to_vec());
        }
        self.trace.converged = rel <= self.stop.tol;
    }

    pub fn finish(self) -> SolverTrace {
        self.trace
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let trace = SolverTrace {
            records: vec![
                IterRecord {
                    iter: 1,
                    time_s: 0.5,
                    objective: 2.0,
                    rel_prox_grad_norm: 0.1,
                    coarse_alpha: Some(1.0),
                },
                IterRecord {
                    iter: 2,
                    time_s: 0.75,
                    objective: 1.5,
                    rel_prox_grad_norm: 0.01,
                    coarse_alpha: None,
                },
            ],
            ..SolverTrace::default()
        };
        let mut buf = Vec::new();
        trace.write_csv(&mut buf, false).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(
            lines[1],
            "1,0.000000000000000e0,2.000000000000000e0,1.000000000000000e-1,1.000000000000000e0"
        );
        assert!(lines[2].ends_with(','));
        assert_eq!(lines.len(), 3);
    }
}
