//! Composite objectives `F = f + g` with smooth `f` and separable `g`.

use std::sync::Arc;

use crate::error::{check_len, Result};
use crate::linalg::dot;
use crate::nonsmooth::SeparableNonsmooth;

/// Smooth convex part of a composite objective.
///
/// Implementations assume inputs of length [`SmoothPart::dim`]; the checked
/// entry points live on [`CompositeProblem`].
pub trait SmoothPart: Send + Sync + std::fmt::Debug {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64]) -> Vec<f64>;
    /// Upper bound on the Lipschitz constant of the gradient.
    fn lipschitz(&self) -> f64;
}

#[derive(Debug, Clone)]
pub struct CompositeProblem {
    smooth: Arc<dyn SmoothPart>,
    nonsmooth: SeparableNonsmooth,
}

impl CompositeProblem {
    pub fn new(smooth: Arc<dyn SmoothPart>, nonsmooth: SeparableNonsmooth) -> Result<Self> {
        if let Some(d) = nonsmooth.dim() {
            check_len(smooth.dim(), d)?;
        }
        Ok(CompositeProblem { smooth, nonsmooth })
    }

    pub fn dim(&self) -> usize {
        self.smooth.dim()
    }

    pub fn smooth(&self) -> &dyn SmoothPart {
        self.smooth.as_ref()
    }

    pub fn nonsmooth(&self) -> &SeparableNonsmooth {
        &self.nonsmooth
    }

    pub fn lipschitz(&self) -> f64 {
        self.smooth.lipschitz()
    }

    pub fn check(&self, x: &[f64]) -> Result<()> {
        check_len(self.dim(), x.len())
    }

    pub fn f(&self, x: &[f64]) -> f64 {
        self.smooth.value(x)
    }

    pub fn grad_f(&self, x: &[f64]) -> Vec<f64> {
        self.smooth.gradient(x)
    }

    pub fn g(&self, x: &[f64]) -> f64 {
        self.nonsmooth.value(x)
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.f(x) + self.g(x)
    }

    /// `F(x) - <tau, x>`; an empty `tau` means zero.
    pub fn objective_tau(&self, tau: &[f64], x: &[f64]) -> f64 {
        if tau.is_empty() {
            self.objective(x)
        } else {
            self.objective(x) - dot(tau, x)
        }
    }
}
