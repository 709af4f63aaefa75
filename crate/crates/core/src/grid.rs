//! Square interior grids and the flat index mapping shared by every operator.
//!
//! Grid vectors are stored column-major: point `(i, j)` (1-based row `i`,
//! column `j`) lives at `k = (j - 1) * n_side + i - 1`.

use crate::error::{Error, Result};

/// Interior grid of `n_side x n_side` points on the unit square with spacing
/// `h = 1 / (n_side + 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridLevel {
    level: usize,
    n_side: usize,
    h: f64,
}

impl GridLevel {
    /// `n_side` must be `2^m - 1` for some `m >= 1`.
    pub fn new(level: usize, n_side: usize) -> Result<Self> {
        if n_side == 0 || !(n_side + 1).is_power_of_two() {
            return Err(Error::InvalidGrid(n_side));
        }
        Ok(GridLevel {
            level,
            n_side,
            h: 1.0 / (n_side + 1) as f64,
        })
    }

    /// Grid with `2^exponent - 1` points per side.
    pub fn from_exponent(level: usize, exponent: u32) -> Result<Self> {
        if exponent == 0 || exponent > 20 {
            return Err(Error::param("exponent", format!("{exponent} not in 1..=20")));
        }
        Self::new(level, (1usize << exponent) - 1)
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn n_side(&self) -> usize {
        self.n_side
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn n_total(&self) -> usize {
        self.n_side * self.n_side
    }

    /// The next grid down, `(n_side - 1) / 2` per side.
    pub fn coarsen(&self) -> Result<Self> {
        if self.n_side < 3 {
            return Err(Error::TooDeep {
                n_side: self.n_side,
                levels: self.level + 2,
            });
        }
        Self::new(self.level + 1, (self.n_side - 1) / 2)
    }

    pub fn index(&self, i: usize, j: usize) -> Result<usize> {
        ij_to_k(i, j, self.n_side)
    }
}

/// Flat column-major index of the 1-based grid point `(i, j)`.
pub fn ij_to_k(i: usize, j: usize, n_side: usize) -> Result<usize> {
    if i == 0 || j == 0 || i > n_side || j > n_side {
        return Err(Error::Index { i, j, n_side });
    }
    Ok((j - 1) * n_side + i - 1)
}

/// Inverse of [`ij_to_k`].
pub fn k_to_ij(k: usize, n_side: usize) -> Result<(usize, usize)> {
    if n_side == 0 || k >= n_side * n_side {
        return Err(Error::Index {
            i: k % n_side.max(1) + 1,
            j: k / n_side.max(1) + 1,
            n_side,
        });
    }
    Ok((k % n_side + 1, k / n_side + 1))
}
