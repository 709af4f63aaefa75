use mgprox::eop::{EopInstance, EopSmooth};
use mgprox::grid::GridLevel;
use mgprox::linalg::{dist2, dot};
use mgprox::oracles::{brute_force_prox, fd_gradient};
use mgprox::rng::UniformStream;
use mgprox::transfer::build_full_weighting;
use mgprox::{SeparableNonsmooth, SmoothPart, SubgradientPolicy};
use proptest::prelude::*;

fn coord_objective(g: &SeparableNonsmooth, v: f64, step: f64, t: f64) -> f64 {
    step * g.coord_value(0, t) + 0.5 * (t - v) * (t - v)
}

fn penalty() -> impl Strategy<Value = SeparableNonsmooth> {
    prop_oneof![
        (0.0..2.0f64).prop_map(|w| SeparableNonsmooth::l1(w).unwrap()),
        (0.0..2.0f64, -2.0..2.0f64).prop_map(|(w, c)| SeparableNonsmooth::hinge(w, vec![c]).unwrap()),
    ]
}

proptest! {
    #[test]
    fn prox_matches_golden_section(g in penalty(), v in -3.0..3.0f64, step in 0.01..2.0f64) {
        let p = g.coord_prox(0, v, step);
        let b = brute_force_prox(&g, 0, v, step, (v - 10.0, v + 10.0)).unwrap();
        prop_assert!((p - b).abs() <= 1e-8, "{p} vs {b}");
        // no point beats the prox
        for t in [p - 1e-3, p + 1e-3, b] {
            prop_assert!(coord_objective(&g, v, step, p) <= coord_objective(&g, v, step, t) + 1e-14);
        }
    }

    #[test]
    fn prox_is_nonexpansive(g in penalty(), a in -3.0..3.0f64, b in -3.0..3.0f64, step in 0.01..2.0f64) {
        let pa = g.coord_prox(0, a, step);
        let pb = g.coord_prox(0, b, step);
        prop_assert!((pa - pb).abs() <= (a - b).abs() + 1e-15);
    }

    #[test]
    fn subgradient_inequality(g in penalty(), u in -3.0..3.0f64, w in -3.0..3.0f64) {
        let (lo, hi) = g.coord_subdiff(0, u);
        for q in [lo, hi, 0.5 * (lo + hi)] {
            prop_assert!(g.coord_value(0, w) >= g.coord_value(0, u) + q * (w - u) - 1e-12);
        }
        let s = g.subgradient(&[u], SubgradientPolicy::Zero)[0];
        prop_assert!(lo <= s && s <= hi);
    }

    #[test]
    fn eop_energy_is_convex(seed in 0u64..1000, theta in 0.0..1.0f64) {
        let f = EopSmooth::new(GridLevel::new(0, 7).unwrap());
        let mut r = UniformStream::new(seed);
        let x = r.vector(49, -1.0, 1.0);
        let y = r.vector(49, -1.0, 1.0);
        let mid: Vec<f64> = x.iter().zip(&y).map(|(a, b)| theta * a + (1.0 - theta) * b).collect();
        prop_assert!(f.value(&mid) <= theta * f.value(&x) + (1.0 - theta) * f.value(&y) + 1e-12);
    }

    #[test]
    fn eop_descent_lemma(seed in 0u64..1000, n in prop_oneof![Just(7usize), Just(15usize)]) {
        let grid = GridLevel::new(0, n).unwrap();
        let f = EopSmooth::new(grid);
        let bound = mgprox::eop::lipschitz_upper_bound(&grid);
        let mut r = UniformStream::new(seed);
        let x = r.vector(n * n, -1.0, 1.0);
        let y = r.vector(n * n, -1.0, 1.0);
        let d: Vec<f64> = y.iter().zip(&x).map(|(a, b)| a - b).collect();
        let q = f.value(&x) + dot(&f.gradient(&x), &d) + 0.5 * bound * dot(&d, &d);
        prop_assert!(f.value(&y) <= q + 1e-9);
    }

    #[test]
    fn restriction_adjoint_identity(seed in 0u64..1000) {
        let t = build_full_weighting(&GridLevel::new(0, 15).unwrap()).unwrap();
        let mut r = UniformStream::new(seed);
        let x = r.vector(225, -1.0, 1.0);
        let y = r.vector(49, -1.0, 1.0);
        let lhs = dot(&t.restrict(&x).unwrap(), &y);
        let rhs = dot(&x, &t.prolong(&y).unwrap()) / t.c();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }
}

#[test]
fn descent_lemma_with_solver_constant_on_small_grids() {
    for n in [1usize, 3, 7] {
        let grid = GridLevel::new(0, n).unwrap();
        let f = EopSmooth::new(grid);
        let l = mgprox::eop::lipschitz_constant(&grid);
        let mut r = UniformStream::new(n as u64);
        for _ in 0..50 {
            let x = r.vector(n * n, -1.0, 1.0);
            let y = r.vector(n * n, -1.0, 1.0);
            let d: Vec<f64> = y.iter().zip(&x).map(|(a, b)| a - b).collect();
            let q = f.value(&x) + dot(&f.gradient(&x), &d) + 0.5 * l * dot(&d, &d);
            assert!(f.value(&y) <= q + 1e-9, "n = {n}");
        }
    }
}

#[test]
fn eop_gradient_matches_finite_differences() {
    for n in [3usize, 7] {
        let inst = EopInstance::new(GridLevel::new(0, n).unwrap(), 1e-6).unwrap();
        let f = inst.smooth();
        let mut r = UniformStream::new(11);
        for _ in 0..5 {
            let x = r.vector(n * n, 0.0, 1.0);
            let fd = fd_gradient(|z| f.value(z), &x, 1e-6).unwrap();
            let g = f.gradient(&x);
            let rel = dist2(&g, &fd) / mgprox::linalg::norm2(&g);
            assert!(rel <= 1e-6, "n = {n}: {rel}");
        }
    }
}
