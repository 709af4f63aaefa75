//! Level stacks and tau-corrected coarse objectives.

use crate::eop::EopInstance;
use crate::error::{check_len, Error, Result};
use crate::grid::GridLevel;
use crate::linalg::dot;
use crate::nonsmooth::SubgradientPolicy;
use crate::problem::CompositeProblem;
use crate::transfer::{full_weighting, AdaptiveMask, TransferPair, FULL_WEIGHTING_SCALE, PROLONGATION_SCALE};

/// One resolution level.
#[derive(Debug, Clone)]
pub struct Level {
    grid: Option<GridLevel>,
    problem: CompositeProblem,
    transfer_down: Option<TransferPair>,
    lipschitz: f64,
}

impl Level {
    /// `transfer_down` maps this level to the next coarser one.
    pub fn new(
        grid: Option<GridLevel>,
        problem: CompositeProblem,
        transfer_down: Option<TransferPair>,
    ) -> Result<Self> {
        if let Some(t) = &transfer_down {
            check_len(problem.dim(), t.fine_dim())?;
        }
        if let Some(g) = &grid {
            check_len(g.n_total(), problem.dim())?;
        }
        Ok(Level {
            grid,
            lipschitz: problem.lipschitz(),
            problem,
            transfer_down,
        })
    }

    pub fn grid(&self) -> Option<&GridLevel> {
        self.grid.as_ref()
    }

    pub fn problem(&self) -> &CompositeProblem {
        &self.problem
    }

    pub fn transfer_down(&self) -> Option<&TransferPair> {
        self.transfer_down.as_ref()
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn dim(&self) -> usize {
        self.problem.dim()
    }
}

/// Finest level first.
#[derive(Debug, Clone)]
pub struct LevelStack {
    levels: Vec<Level>,
}

impl LevelStack {
    pub fn new(levels: Vec<Level>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::param("levels", "stack needs at least one level"));
        }
        let last = levels.len() - 1;
        for (l, level) in levels.iter().enumerate() {
            match (level.transfer_down(), l == last) {
                (Some(t), false) => check_len(levels[l + 1].dim(), t.coarse_dim())?,
                (None, true) => {}
                (None, false) => return Err(Error::param("levels", format!("level {l} lacks a transfer"))),
                (Some(_), true) => return Err(Error::param("levels", "coarsest level has a transfer")),
            }
        }
        Ok(LevelStack { levels })
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn level(&self, l: usize) -> &Level {
        &self.levels[l]
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn finest(&self) -> &Level {
        &self.levels[0]
    }

    pub fn dims(&self) -> Vec<usize> {
        self.levels.iter().map(Level::dim).collect()
    }
}

/// Transfer settings for the obstacle hierarchy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HierarchyOptions {
    pub kernel_scale: f64,
    pub prolongation_scale: f64,
}

impl Default for HierarchyOptions {
    fn default() -> Self {
        HierarchyOptions {
            kernel_scale: FULL_WEIGHTING_SCALE,
            prolongation_scale: PROLONGATION_SCALE,
        }
    }
}

/// Re-discretizes the obstacle problem on `num_levels` successively halved
/// grids with the same penalty weight.
pub fn build_hierarchy(fine: &EopInstance, num_levels: usize) -> Result<LevelStack> {
    build_hierarchy_with(fine, num_levels, HierarchyOptions::default())
}

pub fn build_hierarchy_with(fine: &EopInstance, num_levels: usize, options: HierarchyOptions) -> Result<LevelStack> {
    let n_side = fine.grid().n_side();
    if num_levels == 0 || n_side + 1 < (1usize << num_levels.min(63)) {
        return Err(Error::TooDeep {
            n_side,
            levels: num_levels,
        });
    }
    let mut grids = vec![*fine.grid()];
    for _ in 1..num_levels {
        let next = grids.last().expect("non-empty").coarsen()?;
        grids.push(next);
    }
    let mut levels = Vec::with_capacity(num_levels);
    for (l, grid) in grids.iter().enumerate() {
        let problem = if l == 0 {
            fine.problem().clone()
        } else {
            EopInstance::new(*grid, fine.penalty())?.problem().clone()
        };
        let transfer = if l + 1 < num_levels {
            Some(full_weighting(grid, options.kernel_scale, options.prolongation_scale)?)
        } else {
            None
        };
        levels.push(Level::new(Some(*grid), problem, transfer)?);
    }
    LevelStack::new(levels)
}

/// Coarse linear term
/// `tau = [grad f_c(y_c) + s_c] - R_masked(grad f(y) + s - upstream)`,
/// with `s`, `s_c` selected subgradients at `y` and `y_c`.
/// An empty `upstream` means zero.
pub fn build_tau(
    fine: &CompositeProblem,
    coarse: &CompositeProblem,
    transfer: &TransferPair,
    y_fine: &[f64],
    y_coarse: &[f64],
    mask: &AdaptiveMask,
    upstream: &[f64],
    policy: SubgradientPolicy,
) -> Result<Vec<f64>> {
    fine.check(y_fine)?;
    coarse.check(y_coarse)?;
    if !upstream.is_empty() {
        check_len(fine.dim(), upstream.len())?;
    }
    let fine_sub = shifted_subgradient(fine, y_fine, upstream, policy);
    let restricted = transfer.restrict_adaptive(mask, &fine_sub)?;
    let coarse_sub = shifted_subgradient(coarse, y_coarse, &[], policy);
    Ok(coarse_sub.iter().zip(&restricted).map(|(a, b)| a - b).collect())
}

/// `grad f(x) + select(subdiff g(x)) - tau`.
pub(crate) fn shifted_subgradient(
    problem: &CompositeProblem,
    x: &[f64],
    tau: &[f64],
    policy: SubgradientPolicy,
) -> Vec<f64> {
    let mut s = problem.grad_f(x);
    for (si, qi) in s.iter_mut().zip(problem.nonsmooth().subgradient(x, policy)) {
        *si += qi;
    }
    if !tau.is_empty() {
        for (si, ti) in s.iter_mut().zip(tau) {
            *si -= ti;
        }
    }
    s
}

/// `F(xi) - <tau, xi>` on one level.
#[derive(Debug, Clone, Copy)]
pub struct TauCorrected<'a> {
    problem: &'a CompositeProblem,
    tau: &'a [f64],
}

impl<'a> TauCorrected<'a> {
    pub fn new(problem: &'a CompositeProblem, tau: &'a [f64]) -> Result<Self> {
        check_len(problem.dim(), tau.len())?;
        Ok(TauCorrected { problem, tau })
    }

    pub fn tau(&self) -> &[f64] {
        self.tau
    }

    pub fn eval(&self, xi: &[f64]) -> Result<f64> {
        self.problem.check(xi)?;
        Ok(self.problem.objective(xi) - dot(self.tau, xi))
    }
}

pub fn eval_tau_corrected(tc: &TauCorrected<'_>, xi: &[f64]) -> Result<f64> {
    tc.eval(xi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eop::obstacle;
    use crate::grid::ij_to_k;
    use crate::linalg::norm2;
    use crate::nonsmooth::SeparableNonsmooth;
    use crate::sparse::SparseMat;

    fn eop(n: usize) -> EopInstance {
        EopInstance::new(GridLevel::new(0, n).unwrap(), 1e-6).unwrap()
    }

    #[test]
    fn halving_sides() {
        let s = build_hierarchy(&eop(15), 3).unwrap();
        let sides: Vec<_> = s.levels().iter().map(|l| l.grid().unwrap().n_side()).collect();
        assert_eq!(sides, vec![15, 7, 3]);
        let s = build_hierarchy(&eop(3), 2).unwrap();
        assert_eq!(s.level(1).dim(), 1);
        assert!(matches!(build_hierarchy(&eop(3), 3), Err(Error::TooDeep { .. })));
        assert!(build_hierarchy(&eop(15), 4).is_ok());
    }

    #[test]
    fn coarse_obstacle_aligns() {
        let fine = GridLevel::new(0, 15).unwrap();
        let coarse = fine.coarsen().unwrap();
        let pf = obstacle(&fine);
        let pc = obstacle(&coarse);
        for jc in 1..=7 {
            for ic in 1..=7 {
                let a = pc[ij_to_k(ic, jc, 7).unwrap()];
                let b = pf[ij_to_k(2 * ic, 2 * jc, 15).unwrap()];
                assert!((a - b).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn tau_vanishes_for_identical_levels() {
        let inst = eop(3);
        let p = inst.problem();
        let t = TransferPair::new(SparseMat::identity(9), 1.0).unwrap();
        let y: Vec<f64> = (0..9).map(|k| 0.1 * k as f64).collect();
        let tau = build_tau(p, p, &t, &y, &y, &AdaptiveMask::none(9), &[], SubgradientPolicy::Zero).unwrap();
        assert!(norm2(&tau) < 1e-12);
    }

    #[test]
    fn smooth_only_tau_is_classical() {
        let s = build_hierarchy(&eop(7), 2).unwrap();
        let strip = |p: &CompositeProblem| {
            CompositeProblem::new(
                std::sync::Arc::new(crate::eop::EopSmooth::new(
                    GridLevel::new(0, (p.dim() as f64).sqrt() as usize).unwrap(),
                )),
                SeparableNonsmooth::Zero,
            )
            .unwrap()
        };
        let fine = strip(s.level(0).problem());
        let coarse = strip(s.level(1).problem());
        let t = s.level(0).transfer_down().unwrap();
        let y: Vec<f64> = (0..49).map(|k| (k as f64 * 0.3).cos()).collect();
        let yc = t.restrict(&y).unwrap();
        let tau = build_tau(
            &fine,
            &coarse,
            t,
            &y,
            &yc,
            &AdaptiveMask::none(49),
            &[],
            SubgradientPolicy::Zero,
        )
        .unwrap();
        let want: Vec<f64> = coarse
            .grad_f(&yc)
            .iter()
            .zip(t.restrict(&fine.grad_f(&y)).unwrap())
            .map(|(a, b)| a - b)
            .collect();
        for (a, b) in tau.iter().zip(&want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn tau_corrected_values() {
        let inst = eop(3);
        let p = inst.problem();
        let xi: Vec<f64> = (0..9).map(|k| 0.05 * k as f64).collect();
        let zero = vec![0.0; 9];
        assert_eq!(
            TauCorrected::new(p, &zero).unwrap().eval(&xi).unwrap(),
            p.objective(&xi)
        );
        let t1: Vec<f64> = (0..9).map(|k| k as f64).collect();
        let t2: Vec<f64> = (0..9).map(|k| 1.0 - k as f64 * 0.5).collect();
        assert_eq!(
            TauCorrected::new(p, &t1).unwrap().eval(&zero).unwrap(),
            p.objective(&zero)
        );
        let sum: Vec<f64> = t1.iter().zip(&t2).map(|(a, b)| a + b).collect();
        let lhs = TauCorrected::new(p, &sum).unwrap().eval(&xi).unwrap();
        let rhs = TauCorrected::new(p, &t1).unwrap().eval(&xi).unwrap() - dot(&t2, &xi);
        assert!((lhs - rhs).abs() < 1e-12);
        assert!(TauCorrected::new(p, &[0.0]).is_err());
    }
}
