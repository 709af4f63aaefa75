//! Acceptance run: one line per criterion, nonzero exit if any fails.

use std::process::Command;
use std::time::{Duration, Instant};

use mgprox::cycle::vcycle;
use mgprox::linalg::{dist2, norm2};
use mgprox::oracles::{
    brute_force_prox, certify_fixed_point, certify_run, corrupt_stage_value, fd_gradient, RateConstants,
    ReferenceOptions, ANGLE_CONDITION, ESTIMATE_SEQUENCE, FIXED_POINT, LAMBDA_BOUND, LINEAR_RATE, MGPROX_DESCENT,
    STAGE_MONOTONICITY,
};
use mgprox::rng::{uniform_start, UniformStream};
use mgprox::*;

const PROX_TOL: f64 = 1e-8;
const PROX_CASES: usize = 1000;
const PROX_BUDGET: Duration = Duration::from_secs(10);
const GRAD_TOL: f64 = 1e-6;
const FIXED_POINT_REF_TOL: f64 = 1e-12;
const FIXED_POINT_MOVE_TOL: f64 = 1e-8;
const MIN_CYCLES: usize = 40;
const MAX_CYCLES: usize = 200;
const ANGLE_MIN_NORM: f64 = 1e-10;
const STAGE_SLACK: f64 = 1e-12;
const DESCENT_SLACK: f64 = 1e-8;
const RATE_BUDGET: Duration = Duration::from_secs(30);
const FAST_STEPS: usize = 200;
const FAST_SLACK: f64 = 1e-9;
const ORDERING_FACTOR: usize = 10;
const ORDERING_BUDGET: Duration = Duration::from_secs(120);
const WORK_CAP: f64 = 2.67;
const SOLVE_TOL: f64 = 1e-10;
const SEED: u64 = 42;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn eop_stack(n: usize, levels: usize) -> LevelStack {
    let inst = EopInstance::new(GridLevel::new(0, n).unwrap(), 1e-6).unwrap();
    build_hierarchy(&inst, levels).unwrap()
}

fn high_accuracy(flip: bool) -> CycleConfig {
    CycleConfig {
        coarse_solve: CoarseSolve::HighAccuracy {
            tol: 1e-13,
            max_steps: 100_000,
        },
        flip_tau_sign: flip,
        ..CycleConfig::default()
    }
}

fn prox_oracle() -> Outcome {
    let start = Instant::now();
    let mut r = UniformStream::new(7);
    let mut worst = 0.0f64;
    for k in 0..PROX_CASES {
        let (v, weight, c, step) = (
            r.next_in(-3.0, 3.0),
            r.next_in(0.0, 2.0),
            r.next_in(-2.0, 2.0),
            r.next_in(0.01, 2.0),
        );
        let g = if k % 2 == 0 {
            SeparableNonsmooth::hinge(weight, vec![c]).unwrap()
        } else {
            SeparableNonsmooth::l1(weight).unwrap()
        };
        let p = g.prox(&[v], step).unwrap()[0];
        let b = brute_force_prox(&g, 0, v, step, (v - 10.0, v + 10.0)).unwrap();
        worst = worst.max((p - b).abs());
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= PROX_TOL && elapsed < PROX_BUDGET,
        format!(
            "max abs error {worst:.2e} over {PROX_CASES} cases in {:.2}s",
            elapsed.as_secs_f64()
        ),
    )
}

fn gradient_fidelity() -> Outcome {
    let mut worst = 0.0f64;
    let mut r = UniformStream::new(11);
    for n in [3usize, 7] {
        let inst = EopInstance::new(GridLevel::new(0, n).unwrap(), 1e-6).unwrap();
        let f = inst.smooth();
        for _ in 0..5 {
            let x = r.vector(n * n, 0.0, 1.0);
            let fd = fd_gradient(|z| f.value(z), &x, 1e-6).unwrap();
            let g = f.gradient(&x);
            worst = worst.max(dist2(&g, &fd) / norm2(&g));
        }
    }
    outcome(worst <= GRAD_TOL, format!("max relative l2 error {worst:.2e}"))
}

fn fixed_point() -> Outcome {
    let stack = eop_stack(7, 2);
    let x0 = uniform_start(49, SEED);
    let (xs, _, rel) = oracles::reference_solution(&stack, &x0, &ReferenceOptions::default()).unwrap();
    let fp = certify_fixed_point(&stack, &high_accuracy(false), &xs, FIXED_POINT_MOVE_TOL, 1e-10).unwrap();
    outcome(
        rel <= FIXED_POINT_REF_TOL && fp.step_inf <= FIXED_POINT_MOVE_TOL && fp.coarse_shift <= FIXED_POINT_MOVE_TOL,
        format!(
            "reference rel |G| {rel:.2e}, |x_next - x*|inf {:.2e}, |x_1 - y_1|inf {:.2e}",
            fp.step_inf, fp.coarse_shift
        ),
    )
}

struct EopRun {
    trace: SolverTrace,
    x_star: Vec<f64>,
    f_star: f64,
}

fn eop_run() -> EopRun {
    let stack = eop_stack(15, 3);
    let x0 = uniform_start(225, SEED);
    let (x_star, f_star, _) = oracles::reference_solution(&stack, &x0, &ReferenceOptions::default()).unwrap();
    let (_, trace) = MgProx::new(stack, CycleConfig::default())
        .unwrap()
        .solve(&x0, StoppingRule::new(SOLVE_TOL, MAX_CYCLES).keep_iterates())
        .unwrap();
    EopRun { trace, x_star, f_star }
}

fn angle_condition(run: &EopRun) -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    let mut checked = 0;
    for t in run.trace.cycles.iter().flat_map(|c| &c.levels) {
        if t.p_norm > ANGLE_MIN_NORM {
            checked += 1;
            worst = worst.max(t.s_dot_p);
        }
    }
    let cert = oracles::angle_condition(&run.trace, ANGLE_MIN_NORM);
    assert_eq!(cert.name, ANGLE_CONDITION);
    let cycles = run.trace.iterations();
    outcome(
        cycles >= MIN_CYCLES && worst < 0.0 && cert.passed,
        format!("{cycles} cycles, {checked} corrections, max <s, p> {worst:.2e}"),
    )
}

fn stage_monotonicity(run: &EopRun) -> Outcome {
    let worst = run
        .trace
        .cycles
        .iter()
        .map(|c| c.worst_stage_increase())
        .fold(f64::NEG_INFINITY, f64::max);
    let cert = oracles::stage_monotonicity(&run.trace, STAGE_SLACK);
    assert_eq!(cert.name, STAGE_MONOTONICITY);
    outcome(
        worst <= STAGE_SLACK && cert.passed,
        format!("worst relative stage increase {worst:.2e}"),
    )
}

fn sufficient_descent(run: &EopRun) -> Outcome {
    let cert = oracles::mgprox_descent(&run.trace, &run.x_star, run.f_star, DESCENT_SLACK).unwrap();
    assert_eq!(cert.name, MGPROX_DESCENT);
    outcome(
        cert.passed && cert.checked == run.trace.iterations(),
        format!(
            "{} iterations, worst margin {:.2e}",
            cert.checked,
            cert.margin + DESCENT_SLACK
        ),
    )
}

fn synthetic() -> (SyntheticProblem, LevelStack, Vec<f64>, f64) {
    let s = SyntheticProblem::new(64, 0.1, SEED).unwrap();
    let stack = s.hierarchy(3).unwrap();
    let (xs, fs, _) = oracles::reference_solution(&stack, &[0.0; 64], &ReferenceOptions::default()).unwrap();
    (s, stack, xs, fs)
}

fn linear_rate() -> Outcome {
    let start = Instant::now();
    let (s, stack, _, fs) = synthetic();
    let (_, t) = MgProx::new(stack, CycleConfig::default())
        .unwrap()
        .solve(&[0.0; 64], StoppingRule::new(SOLVE_TOL, 5000))
        .unwrap();
    let q = 1.0 - s.mu() / s.l();
    let e1 = t.records[0].objective - fs;
    let holds = t
        .records
        .iter()
        .enumerate()
        .all(|(k, r)| r.objective - fs <= q.powi(k as i32) * e1 + 1e-12);
    let cert = oracles::linear_rate(&t, fs, RateConstants { mu: s.mu(), l: s.l() }, 1e-12);
    assert_eq!(cert.name, LINEAR_RATE);
    let elapsed = start.elapsed();
    outcome(
        t.converged && holds && cert.passed && elapsed < RATE_BUDGET,
        format!(
            "mu {:.6e}, L {:.6e}, {} cycles to convergence in {:.2}s",
            s.mu(),
            s.l(),
            t.iterations(),
            elapsed.as_secs_f64()
        ),
    )
}

fn fast_certificates() -> Outcome {
    let (_, stack, xs, fs) = synthetic();
    let (_, t) = FastMgProx::new(stack, CycleConfig::default(), None)
        .unwrap()
        .solve(&[0.0; 64], StoppingRule::new(0.0, FAST_STEPS))
        .unwrap();
    let l = t.metric_lipschitz;
    let mut lambda_ok = t.fast.len() == FAST_STEPS;
    let mut phi_ok = true;
    for (i, r) in t.fast.iter().enumerate() {
        lambda_ok &= r.lambda < fast::lambda_rate_bound(i + 1, l, l).unwrap();
        phi_ok &= r.f_next <= r.phi_bar + FAST_SLACK * r.phi_bar.abs().max(1.0);
    }
    let report = certify_run(&t, &xs, fs, None).unwrap();
    let lib_ok = report.get(LAMBDA_BOUND).unwrap().passed && report.get(ESTIMATE_SEQUENCE).unwrap().passed;
    outcome(
        lambda_ok && phi_ok && lib_ok,
        format!(
            "{} steps, lambda bound {lambda_ok}, F <= phi_bar {phi_ok}",
            t.fast.len()
        ),
    )
}

fn ordering() -> Outcome {
    let start = Instant::now();
    let stack = eop_stack(15, 3);
    let x0 = uniform_start(225, SEED);
    let (_, mg) = MgProx::new(stack.clone(), CycleConfig::default())
        .unwrap()
        .solve(&x0, StoppingRule::new(SOLVE_TOL, MAX_CYCLES))
        .unwrap();
    let k = mg.iterations();
    let cap = StoppingRule::new(SOLVE_TOL, ORDERING_FACTOR * k);
    let problem = stack.finest().problem();
    let (_, pg) = proxgrad_solve(problem, &x0, cap, &SmootherConfig::default()).unwrap();
    let (_, fi) = fista_solve(problem, &x0, cap, &SmootherConfig::default()).unwrap();
    let kocvara = CycleConfig {
        smoothing: 10,
        variant: Variant::Kocvara3,
        ..CycleConfig::default()
    };
    let (_, k3) = MgProx::new(stack, kocvara).unwrap().solve(&x0, cap).unwrap();
    let elapsed = start.elapsed();
    outcome(
        mg.converged
            && k <= MAX_CYCLES
            && !pg.converged
            && !fi.converged
            && k3.iterations() > k
            && elapsed < ORDERING_BUDGET,
        format!(
            "mgprox {k}, proxgrad >{} ({}), fista >{} ({}), kocvara3 {} in {:.2}s",
            pg.iterations(),
            if pg.converged { "converged" } else { "not converged" },
            fi.iterations(),
            if fi.converged { "converged" } else { "not converged" },
            k3.iterations(),
            elapsed.as_secs_f64()
        ),
    )
}

fn cost_accounting() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (n, levels) in [(15usize, 2usize), (15, 3), (31, 4)] {
        let stack = eop_stack(n, levels);
        let (_, t) = vcycle(&stack, &CycleConfig::default(), &uniform_start(n * n, SEED)).unwrap();
        let w = t.work_units(&stack.dims(), CycleConfig::default().smoothing);
        let bound = 8.0 / 3.0 * (1.0 - 0.25f64.powi(levels as i32));
        ok &= w <= WORK_CAP && w <= bound;
        parts.push(format!("L={levels}: {w:.4} <= {bound:.4}"));
    }
    outcome(ok, parts.join(", "))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut tables = Vec::new();
    for run in ["a", "b"] {
        let out = Command::new(env!("CARGO_BIN_EXE_mgprox"))
            .args([
                "compare",
                "--n-exp",
                "4",
                "--seed",
                "42",
                "--timing",
                "off",
                "--max-iters",
                "300",
                "--out",
            ])
            .arg(dir.path().join(run))
            .output()
            .unwrap();
        if !out.status.success() {
            return outcome(false, String::from_utf8_lossy(&out.stderr).into_owned());
        }
        tables.push(out.stdout);
    }
    let mut same = tables[0] == tables[1];
    let mut files = 0;
    for algo in ["mgprox", "fastmgprox", "proxgrad", "fista", "kocvara3"] {
        let a = std::fs::read(dir.path().join("a").join(format!("{algo}.csv"))).unwrap();
        let b = std::fs::read(dir.path().join("b").join(format!("{algo}.csv"))).unwrap();
        same &= a == b;
        files += 1;
    }
    outcome(
        same,
        format!("{files} CSVs and the table byte-identical across two runs: {same}"),
    )
}

fn negative_controls(run: &mut EopRun) -> Outcome {
    let stack = eop_stack(7, 2);
    let x0 = uniform_start(49, SEED);
    let (xs, _, _) = oracles::reference_solution(&stack, &x0, &ReferenceOptions::default()).unwrap();
    let fp = certify_fixed_point(&stack, &high_accuracy(true), &xs, FIXED_POINT_MOVE_TOL, 1e-10).unwrap();
    assert_eq!(fp.certificate.name, FIXED_POINT);
    let clean = oracles::stage_monotonicity(&run.trace, STAGE_SLACK).passed;
    corrupt_stage_value(&mut run.trace, 5, 1).unwrap();
    let corrupted = oracles::stage_monotonicity(&run.trace, STAGE_SLACK);
    outcome(
        !fp.certificate.passed && clean && !corrupted.passed,
        format!(
            "flipped tau: fixed-point passed={}, corrupted trace: monotonicity passed={}",
            fp.certificate.passed, corrupted.passed
        ),
    )
}

fn main() {
    let mut run = eop_run();
    let results = [
        ("prox oracle equivalence", prox_oracle()),
        ("gradient fidelity", gradient_fidelity()),
        ("fixed-point property", fixed_point()),
        ("angle condition", angle_condition(&run)),
        ("stage monotonicity", stage_monotonicity(&run)),
        ("MGProx sufficient descent", sufficient_descent(&run)),
        ("linear rate on synthetic problem", linear_rate()),
        ("FastMGProx certificates", fast_certificates()),
        ("solver ordering on 15 x 15 obstacle problem", ordering()),
        ("multilevel cost accounting", cost_accounting()),
        ("compare determinism", determinism()),
        ("negative controls", negative_controls(&mut run)),
    ];
    let mut failed = 0;
    for (i, (name, o)) in results.iter().enumerate() {
        println!(
            "criterion {:>2} {} {name}: {}",
            i + 1,
            if o.passed { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += usize::from(!o.passed);
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
