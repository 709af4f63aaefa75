//! Independent oracles and run certificates.
//!
//! The oracles here avoid the closed forms they check: gradients by central
//! differences, prox values by golden-section search, eigenvalues by power
//! iteration. Certificates read a [`SolverTrace`] plus a reference minimizer
//! and report a margin per property.

use std::sync::Arc;

use crate::baselines::fista_solve;
use crate::cycle::{CycleConfig, MgProx};
use crate::error::{check_len, Error, Result};
use crate::fast::lambda_rate_bound;
use crate::hierarchy::{Level, LevelStack};
use crate::linalg::{dist2, dist_inf, dot, norm2};
use crate::nonsmooth::SeparableNonsmooth;
use crate::problem::{CompositeProblem, SmoothPart};
use crate::rng::UniformStream;
use crate::smoother::{check_positive, SmootherConfig};
use crate::sparse::SparseMat;
use crate::trace::{SolverTrace, StoppingRule};
use crate::transfer::{linear_weighting_1d, TransferPair};

/// Central differences `(f(x + h e_i) - f(x - h e_i)) / 2h`.
pub fn fd_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], step: f64) -> Result<Vec<f64>> {
    check_positive("step", step)?;
    let mut probe = x.to_vec();
    Ok((0..x.len())
        .map(|i| {
            probe[i] = x[i] + step;
            let up = f(&probe);
            probe[i] = x[i] - step;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * step)
        })
        .collect())
}

/// Double-double value `hi + lo`, enough to resolve a quadratic minimum far
/// below `sqrt(eps)`.
#[derive(Debug, Clone, Copy)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    fn two_sum(a: f64, b: f64) -> Dd {
        let s = a + b;
        let bb = s - a;
        Dd {
            hi: s,
            lo: (a - (s - bb)) + (b - bb),
        }
    }

    fn norm(self) -> Dd {
        let s = self.hi + self.lo;
        Dd {
            hi: s,
            lo: self.lo - (s - self.hi),
        }
    }

    fn add(self, o: Dd) -> Dd {
        let s = Dd::two_sum(self.hi, o.hi);
        Dd {
            hi: s.hi,
            lo: s.lo + self.lo + o.lo,
        }
        .norm()
    }

    fn mul(self, o: Dd) -> Dd {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p) + self.hi * o.lo + self.lo * o.hi;
        Dd { hi: p, lo: e }.norm()
    }

    fn scale(self, f: f64) -> Dd {
        self.mul(Dd { hi: f, lo: 0.0 })
    }

    fn is_negative(self) -> bool {
        self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0)
    }

    fn max_zero(self) -> Dd {
        if self.is_negative() {
            Dd { hi: 0.0, lo: 0.0 }
        } else {
            self
        }
    }
}

/// `step * g_i(t) + (t - v)^2 / 2` in double-double arithmetic.
fn prox_objective(g: &SeparableNonsmooth, i: usize, v: f64, step: f64, t: f64) -> Dd {
    let penalty = match g {
        SeparableNonsmooth::Zero => Dd { hi: 0.0, lo: 0.0 },
        SeparableNonsmooth::L1 { weight } => Dd::two_sum(t.abs(), 0.0).scale(*weight),
        SeparableNonsmooth::Hinge { weight, obstacle } => Dd::two_sum(obstacle[i], -t).max_zero().scale(*weight),
    };
    let d = Dd::two_sum(t, -v);
    penalty.scale(step).add(d.mul(d).scale(0.5))
}

/// Minimizer of `step * g_i(t) + (t - v)^2 / 2` over `bracket` by golden-section
/// search, to an interval width of `1e-12 * max(1, |bracket|)`.
pub fn brute_force_prox(g: &SeparableNonsmooth, i: usize, v: f64, step: f64, bracket: (f64, f64)) -> Result<f64> {
    check_positive("step", step)?;
    let (mut a, mut b) = bracket;
    if !(a < b) {
        return Err(Error::Bracket { lo: a, hi: b });
    }
    let h = |t: f64| prox_objective(g, i, v, step, t);
    let less = |x: Dd, y: Dd| x.add(y.scale(-1.0)).is_negative();
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let tol = 1e-12 * a.abs().max(b.abs()).max(1.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (h(c), h(d));
    while b - a > tol {
        if less(fc, fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = h(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = h(d);
        }
    }
    let t = 0.5 * (a + b);
    let edge = 4.0 * tol;
    if t - bracket.0 < edge || bracket.1 - t < edge {
        return Err(Error::Bracket {
            lo: bracket.0,
            hi: bracket.1,
        });
    }
    Ok(t)
}

/// `f(x) = x^T A x / 2 - b^T x` for symmetric `A`.
#[derive(Debug, Clone)]
pub struct QuadraticSmooth {
    a: SparseMat,
    b: Vec<f64>,
    lipschitz: f64,
}

impl QuadraticSmooth {
    pub fn new(a: SparseMat, b: Vec<f64>, lipschitz: f64) -> Result<Self> {
        check_len(a.rows(), a.cols())?;
        check_len(a.rows(), b.len())?;
        check_positive("lipschitz", lipschitz)?;
        Ok(QuadraticSmooth { a, b, lipschitz })
    }

    pub fn a(&self) -> &SparseMat {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }
}

impl SmoothPart for QuadraticSmooth {
    fn dim(&self) -> usize {
        self.b.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        0.5 * dot(x, &self.a.apply(x)) - dot(&self.b, x)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = self.a.apply(x);
        g.iter_mut().zip(&self.b).for_each(|(gi, bi)| *gi -= bi);
        g
    }

    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }
}

/// Largest eigenvalue of symmetric positive semidefinite `a` by power
/// iteration, stopping when the Rayleigh quotient moves by at most
/// `tol * |estimate|`.
pub fn power_iteration(a: &SparseMat, tol: f64, max_iters: usize, seed: u64) -> Result<f64> {
    check_len(a.rows(), a.cols())?;
    let mut v = UniformStream::new(seed).vector(a.rows(), 0.5, 1.5);
    let n = norm2(&v);
    v.iter_mut().for_each(|x| *x /= n);
    let mut est = 0.0;
    for _ in 0..max_iters {
        let w = a.apply(&v);
        let next = dot(&v, &w);
        let nw = norm2(&w);
        if nw == 0.0 {
            return Ok(0.0);
        }
        v = w.into_iter().map(|x| x / nw).collect();
        if (next - est).abs() <= tol * next.abs() {
            return Ok(next);
        }
        est = next;
    }
    Ok(est)
}

/// Quadratic plus `l1` test problem with a tridiagonal `(2, -1)` matrix.
#[derive(Debug, Clone)]
pub struct SyntheticProblem {
    n: usize,
    weight: f64,
    smooth: Arc<QuadraticSmooth>,
    mu: f64,
    l: f64,
    problem: CompositeProblem,
}

/// Rayleigh-quotient tolerance of the eigenvalue estimates.
pub const EIGEN_TOL: f64 = 1e-15;

impl SyntheticProblem {
    /// `b` is uniform on `[-1, 1)^n` from `seed`; `mu` and `L` come from power
    /// iteration on `A` and `L I - A`.
    pub fn new(n: usize, weight: f64, seed: u64) -> Result<Self> {
        let b = UniformStream::new(seed).vector(n, -1.0, 1.0);
        Self::with_rhs(weight, b)
    }

    pub fn with_rhs(weight: f64, b: Vec<f64>) -> Result<Self> {
        let n = b.len();
        if n < 2 {
            return Err(Error::param("n", format!("{n} must be >= 2")));
        }
        let a = laplacian_1d(n);
        let l = power_iteration(&a, EIGEN_TOL, 1_000_000, 1)?;
        let shifted = SparseMat::from_triplets(
            n,
            n,
            a.triplets().map(|(r, c, v)| (r, c, if r == c { l - v } else { -v })),
        )?;
        let mu = l - power_iteration(&shifted, EIGEN_TOL, 1_000_000, 2)?;
        let smooth = Arc::new(QuadraticSmooth::new(a, b, l)?);
        let problem = CompositeProblem::new(smooth.clone(), SeparableNonsmooth::l1(weight)?)?;
        Ok(SyntheticProblem {
            n,
            weight,
            smooth,
            mu,
            l,
            problem,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn smooth(&self) -> &QuadraticSmooth {
        &self.smooth
    }

    pub fn problem(&self) -> &CompositeProblem {
        &self.problem
    }

    /// Galerkin hierarchy: `A_c = P^T A P`, `b_c = P^T b`, `l1` weight scaled
    /// by the column sum 2 of the interpolation.
    pub fn hierarchy(&self, num_levels: usize) -> Result<LevelStack> {
        if num_levels == 0 || self.n >> (num_levels - 1) < 1 {
            return Err(Error::TooDeep {
                n_side: self.n,
                levels: num_levels,
            });
        }
        let mut levels = Vec::with_capacity(num_levels);
        let mut a = self.smooth.a().clone();
        let mut b = self.smooth.b().to_vec();
        let mut weight = self.weight;
        let mut problem = self.problem.clone();
        for l in 0..num_levels {
            if l + 1 == num_levels {
                levels.push(Level::new(None, problem, None)?);
                break;
            }
            let t: TransferPair = linear_weighting_1d(a.rows(), 2.0)?;
            let p = t.prolongation();
            let pt = p.transpose();
            let a_c = pt.matmul(&a)?.matmul(p)?;
            let b_c = pt.apply(&b);
            weight *= 2.0;
            let l_c = gershgorin(&a_c);
            levels.push(Level::new(None, problem, Some(t))?);
            let smooth = Arc::new(QuadraticSmooth::new(a_c.clone(), b_c.clone(), l_c)?);
            problem = CompositeProblem::new(smooth, SeparableNonsmooth::l1(weight)?)?;
            a = a_c;
            b = b_c;
        }
        LevelStack::new(levels)
    }
}

/// Tridiagonal `(2, -1)` matrix of size `n`.
pub fn laplacian_1d(n: usize) -> SparseMat {
    let mut t = Vec::with_capacity(3 * n);
    for i in 0..n {
        t.push((i, i, 2.0));
        if i > 0 {
            t.push((i, i - 1, -1.0));
        }
        if i + 1 < n {
            t.push((i, i + 1, -1.0));
        }
    }
    SparseMat::from_triplets(n, n, t).expect("tridiagonal pattern is valid")
}

/// Largest absolute row sum, an upper bound on the spectral radius.
pub fn gershgorin(a: &SparseMat) -> f64 {
    (0..a.rows())
        .map(|r| a.row(r).map(|(_, v)| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Settings for [`reference_solution`].
#[derive(Debug, Clone, Copy)]
pub struct ReferenceOptions {
    pub tol: f64,
    pub fista_iters: usize,
    pub max_cycles: usize,
    pub cycle: CycleConfig,
}

impl Default for ReferenceOptions {
    fn default() -> Self {
        ReferenceOptions {
            tol: 1e-13,
            fista_iters: 2000,
            max_cycles: 5000,
            cycle: CycleConfig::default(),
        }
    }
}

/// High-accuracy minimizer: FISTA from `x0`, then multigrid cycles from the
/// FISTA output, both measured against `||G(x0)||`; the iterate with the lower
/// objective is returned with its value and relative prox-gradient norm.
pub fn reference_solution(stack: &LevelStack, x0: &[f64], options: &ReferenceOptions) -> Result<(Vec<f64>, f64, f64)> {
    if options.tol < 1e-13 {
        return Err(Error::param("tol", format!("{} must be >= 1e-13", options.tol)));
    }
    let problem = stack.finest().problem();
    problem.check(x0)?;
    let g0 = crate::smoother::map_norm(problem, &[], x0, problem.lipschitz());
    let reference = if g0 > 0.0 { g0 } else { 1.0 };
    let stop = StoppingRule::new(options.tol, options.fista_iters).with_reference_norm(reference);
    let (xf, tf) = fista_solve(problem, x0, stop, &SmootherConfig::default())?;
    let mut best = (xf, tf.final_objective(), tf.final_rel_norm());
    if stack.len() >= 2 {
        let mut mg = MgProx::new(stack.clone(), options.cycle)?;
        let stop = StoppingRule::new(options.tol, options.max_cycles).with_reference_norm(reference);
        let (xm, tm) = mg.solve(&best.0, stop)?;
        if tm.final_objective() <= best.1 {
            best = (xm, tm.final_objective(), tm.final_rel_norm());
        }
    }
    Ok(best)
}

/// Outcome of one certificate; `margin <= 0` means the property holds with
/// room to spare of `-margin`.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub name: &'static str,
    pub passed: bool,
    pub margin: f64,
    pub checked: usize,
}

impl Certificate {
    fn from_margin(name: &'static str, margin: f64, checked: usize) -> Self {
        Certificate {
            name,
            passed: margin <= 0.0,
            margin,
            checked,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CertificateReport {
    pub certificates: Vec<Certificate>,
}

impl CertificateReport {
    pub fn all_passed(&self) -> bool {
        self.certificates.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&Certificate> {
        self.certificates.iter().find(|c| c.name == name)
    }
}

pub const STAGE_MONOTONICITY: &str = "stage-monotonicity";
pub const ANGLE_CONDITION: &str = "angle-condition";
pub const MGPROX_DESCENT: &str = "mgprox-sufficient-descent";
pub const SUBLINEAR_ENVELOPE: &str = "sublinear-envelope";
pub const LINEAR_RATE: &str = "linear-rate";
pub const LAMBDA_BOUND: &str = "lambda-bound";
pub const ESTIMATE_SEQUENCE: &str = "estimate-sequence";
pub const FAST_DESCENT: &str = "fast-descent";
pub const FIXED_POINT: &str = "fixed-point";

/// Known strong convexity and smoothness constants of `f`.
#[derive(Debug, Clone, Copy)]
pub struct RateConstants {
    pub mu: f64,
    pub l: f64,
}

/// Runs every certificate the trace carries data for.
pub fn certify_run(
    trace: &SolverTrace,
    x_star: &[f64],
    f_star: f64,
    rates: Option<RateConstants>,
) -> Result<CertificateReport> {
    let mut out = Vec::new();
    if !trace.cycles.is_empty() && trace.fast.is_empty() {
        out.push(stage_monotonicity(trace, 1e-12));
        out.push(angle_condition(trace, 1e-10));
        if !trace.iterates.is_empty() {
            out.push(mgprox_descent(trace, x_star, f_star, 1e-8)?);
        }
    }
    if !trace.records.is_empty() {
        out.push(sublinear_envelope(trace, f_star, 1e-8));
    }
    if let Some(r) = rates {
        out.push(linear_rate(trace, f_star, r, 1e-12));
    }
    if !trace.fast.is_empty() {
        out.extend(fast_certificates(trace, 1e-9, 1e-10)?);
    }
    Ok(CertificateReport { certificates: out })
}

/// Stage values of every level never rise by more than `rel_slack`.
pub fn stage_monotonicity(trace: &SolverTrace, rel_slack: f64) -> Certificate {
    let worst = trace
        .cycles
        .iter()
        .map(|c| c.worst_stage_increase())
        .fold(f64::NEG_INFINITY, f64::max);
    Certificate::from_margin(STAGE_MONOTONICITY, worst - rel_slack, trace.cycles.len())
}

/// `<s_hat, p> < 0` whenever `||p|| > min_norm`; the margin is the largest
/// recorded inner product.
pub fn angle_condition(trace: &SolverTrace, min_norm: f64) -> Certificate {
    let mut worst = f64::NEG_INFINITY;
    let mut checked = 0;
    for t in trace.cycles.iter().flat_map(|c| &c.levels) {
        if t.p_norm > min_norm {
            checked += 1;
            worst = worst.max(t.s_dot_p);
        }
    }
    let mut cert = Certificate::from_margin(ANGLE_CONDITION, worst, checked);
    cert.passed = worst < 0.0;
    cert
}

/// `F(x^{k+1}) - F* <= (L/2)(||x^k - x*||^2 - ||y^{k+1} - x*||^2) + slack` with
/// `y^{k+1}` the first pre-smoothing output.
pub fn mgprox_descent(trace: &SolverTrace, x_star: &[f64], f_star: f64, slack: f64) -> Result<Certificate> {
    if trace.iterates.len() != trace.records.len() + 1 {
        return Err(Error::MissingTraceField("iterates"));
    }
    let l = trace.metric_lipschitz;
    let mut worst = f64::NEG_INFINITY;
    for (k, cycle) in trace.cycles.iter().enumerate() {
        if cycle.first_pre_smooth.is_empty() {
            return Err(Error::MissingTraceField("first_pre_smooth"));
        }
        let xk = &trace.iterates[k];
        let dx = dist2(xk, x_star);
        let dy = dist2(&cycle.first_pre_smooth, x_star);
        let lhs = trace.records[k].objective - f_star;
        let rhs = 0.5 * l * (dx * dx - dy * dy) + slack;
        worst = worst.max(lhs - rhs);
    }
    Ok(Certificate::from_margin(MGPROX_DESCENT, worst, trace.cycles.len()))
}

/// `k (F(x^k) - F*)` over the second half of the run stays below its maximum
/// over the first half plus `slack`.
pub fn sublinear_envelope(trace: &SolverTrace, f_star: f64, slack: f64) -> Certificate {
    let s: Vec<f64> = trace
        .records
        .iter()
        .map(|r| r.iter as f64 * (r.objective - f_star))
        .collect();
    let half = s.len().div_ceil(2);
    let head = s[..half].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let tail = s[half..].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let margin = if s.len() < 2 {
        f64::NEG_INFINITY
    } else {
        tail - head - slack
    };
    Certificate::from_margin(SUBLINEAR_ENVELOPE, margin, s.len())
}

/// `F(x^{k+1}) - F* <= (1 - mu/L)^k (F(x^1) - F*) + slack`.
pub fn linear_rate(trace: &SolverTrace, f_star: f64, rates: RateConstants, slack: f64) -> Certificate {
    let q = 1.0 - rates.mu / rates.l;
    let Some(first) = trace.records.first() else {
        return Certificate::from_margin(LINEAR_RATE, f64::NEG_INFINITY, 0);
    };
    let e1 = first.objective - f_star;
    let worst = trace
        .records
        .iter()
        .enumerate()
        .map(|(k, r)| (r.objective - f_star) - (q.powi(k as i32) * e1 + slack))
        .fold(f64::NEG_INFINITY, f64::max);
    Certificate::from_margin(LINEAR_RATE, worst, trace.records.len())
}

/// Estimate-sequence certificates of an accelerated run: the `lambda` bound,
/// `F(x^k) <= phi_bar^k` with relative slack, and the per-step descent from `y`.
pub fn fast_certificates(trace: &SolverTrace, rel_slack: f64, descent_slack: f64) -> Result<Vec<Certificate>> {
    let first = trace.fast.first().ok_or(Error::MissingTraceField("fast"))?;
    let gamma0 = first.gamma / first.lambda;
    let l = trace.metric_lipschitz;
    let mut lambda_worst = f64::NEG_INFINITY;
    let mut phi_worst = f64::NEG_INFINITY;
    let mut descent_worst = f64::NEG_INFINITY;
    for (i, rec) in trace.fast.iter().enumerate() {
        let bound = lambda_rate_bound(i + 1, gamma0, l)?;
        lambda_worst = lambda_worst.max((rec.lambda - bound) / bound);
        phi_worst = phi_worst.max(rec.f_next - rec.phi_bar - rel_slack * rec.phi_bar.abs().max(1.0));
        let target = rec.f_y - rec.g_norm_y * rec.g_norm_y / (2.0 * l) + descent_slack;
        descent_worst = descent_worst.max(rec.f_next - target);
    }
    let n = trace.fast.len();
    let mut lambda = Certificate::from_margin(LAMBDA_BOUND, lambda_worst, n);
    lambda.passed = lambda_worst < 0.0;
    Ok(vec![
        lambda,
        Certificate::from_margin(ESTIMATE_SEQUENCE, phi_worst, n),
        Certificate::from_margin(FAST_DESCENT, descent_worst, n),
    ])
}

/// Result of one cycle started at a reference minimizer.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointReport {
    pub step_inf: f64,
    /// Largest `||w_c - y_c||_inf` over the non-coarsest levels.
    pub coarse_shift: f64,
    pub rel_objective_change: f64,
    pub certificate: Certificate,
}

/// One cycle from `x_star`; passes iff the iterate moves by at most `tol_x`,
/// every coarse solve moves by at most `tol_x` and the objective changes by at
/// most `tol_f` relative.
pub fn certify_fixed_point(
    stack: &LevelStack,
    config: &CycleConfig,
    x_star: &[f64],
    tol_x: f64,
    tol_f: f64,
) -> Result<FixedPointReport> {
    let mut mg = MgProx::new(stack.clone(), *config)?;
    let (x, cycle) = mg.cycle(x_star)?;
    let problem = stack.finest().problem();
    let f0 = problem.objective(x_star);
    let step_inf = dist_inf(&x, x_star);
    let coarse_shift = cycle.levels.iter().map(|t| t.coarse_shift).fold(0.0, f64::max);
    let rel = (problem.objective(&x) - f0).abs() / f0.abs().max(1.0);
    let margin = (step_inf - tol_x).max(coarse_shift - tol_x).max(rel - tol_f);
    Ok(FixedPointReport {
        step_inf,
        coarse_shift,
        rel_objective_change: rel,
        certificate: Certificate::from_margin(FIXED_POINT, margin, 1),
    })
}

/// Raises the post-smoothing value of `level` in `cycle` above its correction
/// value, for negative-control tests of the monotonicity certificate.
pub fn corrupt_stage_value(trace: &mut SolverTrace, cycle: usize, level: usize) -> Result<()> {
    let c = trace.cycles.get_mut(cycle).ok_or(Error::MissingTraceField("cycles"))?;
    let t = c.levels.get_mut(level).ok_or(Error::MissingTraceField("levels"))?;
    t.f_post = t.f_correction + 1e-6 * t.f_correction.abs().max(1.0);
    Ok(())
}
