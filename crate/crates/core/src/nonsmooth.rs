//! Separable convex penalties `g(u) = sum_i g_i(u_i)`: value, proximal
//! operator, coordinate-wise subdifferential intervals and a subgradient
//! selector.
//!
//! Every penalty here is finite on all of `R^n`; indicator functions are not
//! representable.

use crate::error::{check_len, Error, Result};

/// Per-coordinate closed intervals `[lo_i, hi_i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalVec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl IntervalVec {
    pub fn len(&self) -> usize {
        self.lo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lo.is_empty()
    }

    /// Coordinate `i` is set-valued when `lo_i < hi_i`.
    pub fn is_set_valued(&self, i: usize) -> bool {
        self.lo[i] < self.hi[i]
    }

    pub fn contains(&self, i: usize, q: f64) -> bool {
        self.lo[i] <= q && q <= self.hi[i]
    }
}

/// How a single subgradient is picked from a set-valued coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SubgradientPolicy {
    /// `0` when it lies in the interval, else the endpoint nearest to `0`.
    #[default]
    Zero,
    Midpoint,
    Lower,
    Upper,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SeparableNonsmooth {
    /// `g = 0`.
    Zero,
    /// `g(u) = weight * ||u||_1`.
    L1 { weight: f64 },
    /// `g(u) = weight * sum_i max(obstacle_i - u_i, 0)`.
    Hinge { weight: f64, obstacle: Vec<f64> },
}

impl SeparableNonsmooth {
    pub fn l1(weight: f64) -> Result<Self> {
        check_weight(weight)?;
        Ok(SeparableNonsmooth::L1 { weight })
    }

    pub fn hinge(weight: f64, obstacle: Vec<f64>) -> Result<Self> {
        check_weight(weight)?;
        if obstacle.iter().any(|c| !c.is_finite()) {
            return Err(Error::param("obstacle", "entries must be finite"));
        }
        Ok(SeparableNonsmooth::Hinge { weight, obstacle })
    }

    /// Required length, if the penalty carries per-coordinate data.
    pub fn dim(&self) -> Option<usize> {
        match self {
            SeparableNonsmooth::Hinge { obstacle, .. } => Some(obstacle.len()),
            _ => None,
        }
    }

    pub fn weight(&self) -> f64 {
        match self {
            SeparableNonsmooth::Zero => 0.0,
            SeparableNonsmooth::L1 { weight } | SeparableNonsmooth::Hinge { weight, .. } => *weight,
        }
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        match self.dim() {
            Some(d) => check_len(d, len),
            None => Ok(()),
        }
    }

    pub fn eval(&self, u: &[f64]) -> Result<f64> {
        self.check_dim(u.len())?;
        Ok(self.value(u))
    }

    pub fn prox(&self, v: &[f64], step: f64) -> Result<Vec<f64>> {
        self.check_dim(v.len())?;
        if !(step > 0.0) {
            return Err(Error::param("step", format!("{step} is not positive")));
        }
        Ok(self.prox_unchecked(v, step))
    }

    pub fn subdiff(&self, u: &[f64]) -> Result<IntervalVec> {
        self.check_dim(u.len())?;
        Ok(self.subdiff_unchecked(u))
    }

    /// Value of the `i`-th summand at `t`.
    pub fn coord_value(&self, i: usize, t: f64) -> f64 {
        match self {
            SeparableNonsmooth::Zero => 0.0,
            SeparableNonsmooth::L1 { weight } => weight * t.abs(),
            SeparableNonsmooth::Hinge { weight, obstacle } => weight * (obstacle[i] - t).max(0.0),
        }
    }

    /// Minimizer of `step * g_i(t) + (t - v)^2 / 2`.
    pub fn coord_prox(&self, i: usize, v: f64, step: f64) -> f64 {
        match self {
            SeparableNonsmooth::Zero => v,
            SeparableNonsmooth::L1 { weight } => {
                let t = step * weight;
                if v > t {
                    v - t
                } else if v < -t {
                    v + t
                } else {
                    0.0
                }
            }
            SeparableNonsmooth::Hinge { weight, obstacle } => {
                let c = obstacle[i];
                let pushed = v + step * weight;
                if pushed < c {
                    pushed
                } else if v <= c {
                    c
                } else {
                    v
                }
            }
        }
    }

    pub fn coord_subdiff(&self, i: usize, t: f64) -> (f64, f64) {
        match self {
            SeparableNonsmooth::Zero => (0.0, 0.0),
            SeparableNonsmooth::L1 { weight } => {
                if t > 0.0 {
                    (*weight, *weight)
                } else if t < 0.0 {
                    (-weight, -weight)
                } else {
                    (-weight, *weight)
                }
            }
            SeparableNonsmooth::Hinge { weight, obstacle } => {
                let c = obstacle[i];
                if t < c {
                    (-weight, -weight)
                } else if t == c {
                    (-weight, 0.0)
                } else {
                    (0.0, 0.0)
                }
            }
        }
    }

    pub(crate) fn value(&self, u: &[f64]) -> f64 {
        match self {
            SeparableNonsmooth::Zero => 0.0,
            _ => u.iter().enumerate().map(|(i, &t)| self.coord_value(i, t)).sum(),
        }
    }

    pub(crate) fn prox_unchecked(&self, v: &[f64], step: f64) -> Vec<f64> {
        v.iter()
            .enumerate()
            .map(|(i, &vi)| self.coord_prox(i, vi, step))
            .collect()
    }

    pub(crate) fn subdiff_unchecked(&self, u: &[f64]) -> IntervalVec {
        let (lo, hi) = u.iter().enumerate().map(|(i, &t)| self.coord_subdiff(i, t)).unzip();
        IntervalVec { lo, hi }
    }

    /// Selected subgradient at `u` under `policy`.
    pub fn subgradient(&self, u: &[f64], policy: SubgradientPolicy) -> Vec<f64> {
        select_subgradient(&self.subdiff_unchecked(u), policy)
    }
}

fn check_weight(weight: f64) -> Result<()> {
    if weight >= 0.0 && weight.is_finite() {
        Ok(())
    } else {
        Err(Error::param("weight", format!("{weight} must be finite and >= 0")))
    }
}

/// One element of each interval; singletons return their value.
pub fn select_subgradient(s: &IntervalVec, policy: SubgradientPolicy) -> Vec<f64> {
    s.lo.iter()
        .zip(&s.hi)
        .map(|(&lo, &hi)| {
            if lo == hi {
                return lo;
            }
            let pick = match policy {
                SubgradientPolicy::Zero => 0.0,
                SubgradientPolicy::Midpoint => 0.5 * (lo + hi),
                SubgradientPolicy::Lower => lo,
                SubgradientPolicy::Upper => hi,
            };
            pick.clamp(lo, hi)
        })
        .collect()
}
