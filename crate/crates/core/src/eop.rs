//! Discretized elastic obstacle problem.
//!
//! On an `N x N` interior grid the membrane energy is
//! `f(u) = sum_{ij} sqrt(1 + (Du)_{ij}^2 + (Eu)_{ij}^2)` with forward
//! differences `D` (along columns `j`) and `E` (along rows `i`), and the
//! non-penetration penalty is `g(u) = lambda * sum_i max(phi_i - u_i, 0)`.
//! The `h^2` prefactor of the quadrature is dropped. The difference rows at the
//! last interior point of each line see `u = 0` beyond the boundary, so they
//! hold only the `-1/h` diagonal entry.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{check_len, Result};
use crate::grid::{ij_to_k, GridLevel};
use crate::nonsmooth::SeparableNonsmooth;
use crate::problem::{CompositeProblem, SmoothPart};
use crate::sparse::SparseMat;

/// Side length of the physical square carrying the obstacle.
pub const DOMAIN_LENGTH: f64 = 3.0 * PI;

/// Forward difference operators `(D, E)` on `grid`.
pub fn build_difference_operators(grid: &GridLevel) -> (SparseMat, SparseMat) {
    let n = grid.n_side();
    let inv_h = 1.0 / grid.h();
    let k = |i, j| ij_to_k(i, j, n).expect("loop stays on the grid");
    let mut d = Vec::with_capacity(2 * n * n);
    let mut e = Vec::with_capacity(2 * n * n);
    for j in 1..=n {
        for i in 1..=n {
            let row = k(i, j);
            d.push((row, row, -inv_h));
            e.push((row, row, -inv_h));
            if j < n {
                d.push((row, k(i, j + 1), inv_h));
            }
            if i < n {
                e.push((row, k(i + 1, j), inv_h));
            }
        }
    }
    let size = grid.n_total();
    (
        SparseMat::from_triplets(size, size, d).expect("difference stencil is duplicate free"),
        SparseMat::from_triplets(size, size, e).expect("difference stencil is duplicate free"),
    )
}

/// The closed-form smoothness constant `sqrt(3) N^2 / h`.
///
/// This is not an upper bound on the true constant for `N <= 5`; solvers use
/// [`lipschitz_constant`].
pub fn lipschitz_upper_bound(grid: &GridLevel) -> f64 {
    let n = grid.n_side() as f64;
    3f64.sqrt() * n * n / grid.h()
}

/// Step-size constant used by the smoothers: the larger of
/// [`lipschitz_upper_bound`] and the Gershgorin bound `8 / h^2` on
/// `D^T D + E^T E` (the Hessian of `psi` is bounded by the identity).
pub fn lipschitz_constant(grid: &GridLevel) -> f64 {
    let h = grid.h();
    lipschitz_upper_bound(grid).max(8.0 / (h * h))
}

/// `phi(x, y) = max(0, sin x) max(0, sin y)` sampled at `x_i = 3 pi i h`,
/// `y_j = 3 pi j h`.
pub fn obstacle(grid: &GridLevel) -> Vec<f64> {
    obstacle_values(grid.n_side())
}

/// [`obstacle`] for any side length `n_side >= 1`, with `h = 1/(n_side+1)`.
pub fn obstacle_values(n_side: usize) -> Vec<f64> {
    let spacing = DOMAIN_LENGTH / (n_side + 1) as f64;
    let s: Vec<f64> = (1..=n_side).map(|i| (i as f64 * spacing).sin().max(0.0)).collect();
    let mut phi = Vec::with_capacity(n_side * n_side);
    for sy in &s {
        for sx in &s {
            phi.push(sx * sy);
        }
    }
    phi
}

/// Membrane energy on one grid level.
///
/// Evaluation allocates its own scratch space, so one instance can be shared
/// across threads.
#[derive(Debug, Clone)]
pub struct EopSmooth {
    grid: GridLevel,
    d: SparseMat,
    e: SparseMat,
    dt: SparseMat,
    et: SparseMat,
    lipschitz: f64,
}

impl EopSmooth {
    pub fn new(grid: GridLevel) -> Self {
        let (d, e) = build_difference_operators(&grid);
        EopSmooth {
            dt: d.transpose(),
            et: e.transpose(),
            d,
            e,
            lipschitz: lipschitz_constant(&grid),
            grid,
        }
    }

    pub fn grid(&self) -> &GridLevel {
        &self.grid
    }

    pub fn d(&self) -> &SparseMat {
        &self.d
    }

    pub fn e(&self) -> &SparseMat {
        &self.e
    }

    pub fn eval_f(&self, u: &[f64]) -> Result<f64> {
        check_len(self.grid.n_total(), u.len())?;
        Ok(self.value(u))
    }

    pub fn grad_f(&self, u: &[f64]) -> Result<Vec<f64>> {
        check_len(self.grid.n_total(), u.len())?;
        Ok(self.gradient(u))
    }
}

impl SmoothPart for EopSmooth {
    fn dim(&self) -> usize {
        self.grid.n_total()
    }

    fn value(&self, u: &[f64]) -> f64 {
        let du = self.d.apply(u);
        let eu = self.e.apply(u);
        du.iter().zip(&eu).map(|(s, t)| (1.0 + s * s + t * t).sqrt()).sum()
    }

    fn gradient(&self, u: &[f64]) -> Vec<f64> {
        let mut psi_d = self.d.apply(u);
        let mut psi_e = self.e.apply(u);
        for (s, t) in psi_d.iter_mut().zip(psi_e.iter_mut()) {
            let r = (1.0 + *s * *s + *t * *t).sqrt();
            *s /= r;
            *t /= r;
        }
        let mut g = self.dt.apply(&psi_d);
        for (gi, ei) in g.iter_mut().zip(self.et.apply(&psi_e)) {
            *gi += ei;
        }
        g
    }

    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }
}

/// One level of the obstacle problem: membrane energy plus hinge penalty.
#[derive(Debug, Clone)]
pub struct EopInstance {
    smooth: Arc<EopSmooth>,
    penalty: f64,
    problem: CompositeProblem,
}

impl EopInstance {
    pub fn new(grid: GridLevel, penalty: f64) -> Result<Self> {
        let smooth = Arc::new(EopSmooth::new(grid));
        let nonsmooth = SeparableNonsmooth::hinge(penalty, obstacle(&grid))?;
        let problem = CompositeProblem::new(smooth.clone(), nonsmooth)?;
        Ok(EopInstance {
            smooth,
            penalty,
            problem,
        })
    }

    pub fn grid(&self) -> &GridLevel {
        self.smooth.grid()
    }

    pub fn penalty(&self) -> f64 {
        self.penalty
    }

    pub fn smooth(&self) -> &EopSmooth {
        &self.smooth
    }

    pub fn problem(&self) -> &CompositeProblem {
        &self.problem
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> GridLevel {
        GridLevel::new(0, n).unwrap()
    }

    #[test]
    fn single_point_operator() {
        let (d, e) = build_difference_operators(&grid(1));
        assert_eq!(d.to_dense(), vec![vec![-2.0]]);
        assert_eq!(e.to_dense(), vec![vec![-2.0]]);
    }

    #[test]
    fn rows_hold_at_most_two_entries() {
        let g = grid(7);
        let (d, e) = build_difference_operators(&g);
        for m in [&d, &e] {
            for r in 0..m.rows() {
                let entries: Vec<_> = m.row(r).collect();
                assert!(!entries.is_empty() && entries.len() <= 2);
                for (_, v) in entries {
                    assert_eq!(v.abs(), 1.0 / g.h());
                }
            }
        }
    }

    #[test]
    fn constants_and_ramps() {
        let g = grid(3);
        let n = 3;
        let (d, _) = build_difference_operators(&g);
        let ones = vec![1.0; 9];
        let ramp: Vec<f64> = (0..9).map(|k| (k / n + 1) as f64 * g.h()).collect();
        let d1 = d.spmv(&ones).unwrap();
        let dr = d.spmv(&ramp).unwrap();
        for j in 1..n {
            for i in 1..=n {
                let k = ij_to_k(i, j, n).unwrap();
                assert_eq!(d1[k], 0.0);
                assert!((dr[k] - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn energy_at_zero_counts_points() {
        for n in [3, 7] {
            let s = EopSmooth::new(grid(n));
            assert_eq!(s.eval_f(&vec![0.0; n * n]).unwrap(), (n * n) as f64);
            assert_eq!(s.grad_f(&vec![0.0; n * n]).unwrap(), vec![0.0; n * n]);
        }
        assert!(EopSmooth::new(grid(3)).eval_f(&[0.0; 4]).is_err());
    }

    #[test]
    fn energy_by_direct_summation() {
        let g = grid(3);
        let s = EopSmooth::new(g);
        let u: Vec<f64> = (0..9).map(|k| ((k * 7 % 5) as f64 - 2.0) * 0.3).collect();
        let n = 3;
        let at = |i: usize, j: usize| {
            if i > n || j > n {
                0.0
            } else {
                u[ij_to_k(i, j, n).unwrap()]
            }
        };
        let mut want = 0.0;
        for j in 1..=n {
            for i in 1..=n {
                let sx = (at(i, j + 1) - at(i, j)) / g.h();
                let sy = (at(i + 1, j) - at(i, j)) / g.h();
                want += (1.0 + sx * sx + sy * sy).sqrt();
            }
        }
        let got = s.eval_f(&u).unwrap();
        assert!((got - want).abs() < 1e-12);
        assert!(got >= 9.0);
    }

    #[test]
    fn psi_gradient_component() {
        // a single point with Du = 1, Eu = 0 is not reachable on a square grid,
        // so evaluate the scalar gradient directly
        let (s, t) = (1.0f64, 0.0f64);
        let r = (1.0 + s * s + t * t).sqrt();
        assert!((s / r - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-5);
        assert_eq!(t / r, 0.0);
    }

    #[test]
    fn lipschitz_values() {
        assert!((lipschitz_upper_bound(&grid(3)) - 62.3538).abs() < 1e-4);
        assert!((lipschitz_upper_bound(&grid(1)) - 3.4641).abs() < 1e-4);
        assert!(lipschitz_upper_bound(&grid(7)) > lipschitz_upper_bound(&grid(3)));
        assert_eq!(lipschitz_constant(&grid(3)), 128.0);
        assert_eq!(lipschitz_constant(&grid(15)), lipschitz_upper_bound(&grid(15)));
    }

    #[test]
    fn obstacle_samples() {
        // n = 5: x_i = i pi / 2
        let phi = obstacle_values(5);
        assert!((phi[ij_to_k(1, 1, 5).unwrap()] - 1.0).abs() < 1e-15);
        // x = 3 pi / 2 lies in (pi, 2 pi)
        assert_eq!(phi[ij_to_k(3, 1, 5).unwrap()], 0.0);
        assert_eq!(phi[ij_to_k(1, 3, 5).unwrap()], 0.0);
        assert!(phi.iter().all(|&p| (0.0..=1.0).contains(&p)));
    }
}
