//! Grid transfer operators and adaptive masking.
//!
//! A [`TransferPair`] holds a restriction `R` (coarse x fine) and the
//! prolongation `P = c R^T`. An [`AdaptiveMask`] marks the fine coordinates
//! where the nonsmooth part has a set-valued subdifferential; masked
//! coordinates are dropped from restricted subgradients and receive no coarse
//! correction.

use crate::error::{check_len, Error, Result};
use crate::grid::{ij_to_k, GridLevel};
use crate::linalg::dot;
use crate::nonsmooth::SeparableNonsmooth;
use crate::sparse::SparseMat;

/// Full-weighting kernel scale used on the obstacle problem.
pub const FULL_WEIGHTING_SCALE: f64 = 1.0 / 8.0;

/// Prolongation factor `c` in `P = c R^T`.
pub const PROLONGATION_SCALE: f64 = 2.0;

#[derive(Debug, Clone, PartialEq)]
pub struct TransferPair {
    restriction: SparseMat,
    prolongation: SparseMat,
    c: f64,
}

impl TransferPair {
    /// Pairs `restriction` with `c * restriction^T`.
    pub fn new(restriction: SparseMat, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::param("c", format!("{c} must be finite and > 0")));
        }
        let prolongation = restriction.transpose().scaled(c);
        Ok(TransferPair {
            restriction,
            prolongation,
            c,
        })
    }

    pub fn restriction(&self) -> &SparseMat {
        &self.restriction
    }

    pub fn prolongation(&self) -> &SparseMat {
        &self.prolongation
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn fine_dim(&self) -> usize {
        self.restriction.cols()
    }

    pub fn coarse_dim(&self) -> usize {
        self.restriction.rows()
    }

    pub fn restrict(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.restriction.spmv(v)
    }

    pub fn prolong(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.prolongation.spmv(v)
    }

    /// `R` applied to `v` with masked coordinates set to zero.
    pub fn restrict_adaptive(&self, mask: &AdaptiveMask, v: &[f64]) -> Result<Vec<f64>> {
        check_len(self.fine_dim(), mask.len())?;
        check_len(self.fine_dim(), v.len())?;
        Ok(self.restriction.apply(&mask.apply(v)))
    }

    /// `P v` with masked fine coordinates forced to zero.
    pub fn prolong_adaptive(&self, mask: &AdaptiveMask, v: &[f64]) -> Result<Vec<f64>> {
        check_len(self.fine_dim(), mask.len())?;
        let out = self.prolong(v)?;
        Ok(mask.apply(&out))
    }
}

/// Full weighting on a square grid: coarse point `(I, J)` sits at fine point
/// `(2I, 2J)` and gathers `scale * [1 2 1]^T [1 2 1]` from its 3x3
/// neighbourhood.
pub fn full_weighting(fine: &GridLevel, scale: f64, c: f64) -> Result<TransferPair> {
    let n = fine.n_side();
    if n < 3 {
        return Err(Error::TooDeep { n_side: n, levels: 2 });
    }
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::param("scale", format!("{scale} must be finite and > 0")));
    }
    let coarse = fine.coarsen()?;
    let nc = coarse.n_side();
    let w = [1.0, 2.0, 1.0];
    let mut triplets = Vec::with_capacity(9 * nc * nc);
    for jc in 1..=nc {
        for ic in 1..=nc {
            let row = ij_to_k(ic, jc, nc)?;
            for (dj, wj) in w.iter().enumerate() {
                for (di, wi) in w.iter().enumerate() {
                    let i = 2 * ic + di - 1;
                    let j = 2 * jc + dj - 1;
                    triplets.push((row, ij_to_k(i, j, n)?, scale * wi * wj));
                }
            }
        }
    }
    TransferPair::new(SparseMat::from_triplets(nc * nc, n * n, triplets)?, c)
}

/// Default full weighting: kernel scale 1/8, `c = 2`.
pub fn build_full_weighting(fine: &GridLevel) -> Result<TransferPair> {
    full_weighting(fine, FULL_WEIGHTING_SCALE, PROLONGATION_SCALE)
}

/// One-dimensional weighting `(1/4)[1 2 1]` from `n_fine` to `n_fine / 2`
/// points; coarse point `I` (1-based) sits at fine point `2I`. With `c = 2`
/// the prolongation is linear interpolation.
pub fn linear_weighting_1d(n_fine: usize, c: f64) -> Result<TransferPair> {
    if n_fine < 2 {
        return Err(Error::param("n_fine", format!("{n_fine} must be >= 2")));
    }
    let nc = n_fine / 2;
    let mut triplets = Vec::with_capacity(3 * nc);
    for ic in 1..=nc {
        let center = 2 * ic;
        for (offset, w) in [(-1i64, 0.25), (0, 0.5), (1, 0.25)] {
            let i = center as i64 + offset;
            if (1..=n_fine as i64).contains(&i) {
                triplets.push((ic - 1, i as usize - 1, w));
            }
        }
    }
    TransferPair::new(SparseMat::from_triplets(nc, n_fine, triplets)?, c)
}

/// Per-coordinate flag, `true` where the fine subdifferential is set-valued.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdaptiveMask {
    zeroed: Vec<bool>,
}

impl AdaptiveMask {
    pub fn none(len: usize) -> Self {
        AdaptiveMask {
            zeroed: vec![false; len],
        }
    }

    pub fn from_flags(zeroed: Vec<bool>) -> Self {
        AdaptiveMask { zeroed }
    }

    pub fn len(&self) -> usize {
        self.zeroed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zeroed.is_empty()
    }

    pub fn is_masked(&self, i: usize) -> bool {
        self.zeroed[i]
    }

    pub fn flags(&self) -> &[bool] {
        &self.zeroed
    }

    /// Number of masked coordinates.
    pub fn count(&self) -> usize {
        self.zeroed.iter().filter(|&&z| z).count()
    }

    /// Copy of `v` with masked coordinates set to zero.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        v.iter()
            .zip(&self.zeroed)
            .map(|(&x, &z)| if z { 0.0 } else { x })
            .collect()
    }
}

/// Marks the coordinates of `x` where `subdiff_g` is a proper interval.
pub fn adaptive_mask(g: &SeparableNonsmooth, x: &[f64]) -> Result<AdaptiveMask> {
    let s = g.subdiff(x)?;
    Ok(AdaptiveMask {
        zeroed: (0..s.len()).map(|i| s.is_set_valued(i)).collect(),
    })
}

/// `<P_masked v_c, w_f> - c <v_c, R_masked w_f>`, zero up to rounding.
pub fn adjoint_defect(t: &TransferPair, mask: &AdaptiveMask, v_coarse: &[f64], w_fine: &[f64]) -> Result<f64> {
    let lhs = dot(&t.prolong_adaptive(mask, v_coarse)?, w_fine);
    let rhs = t.c() * dot(v_coarse, &t.restrict_adaptive(mask, w_fine)?);
    Ok(lhs - rhs)
}
