//! Multigrid proximal-gradient solvers for nonsmooth strongly convex problems
//! `min f(x) + g(x)` with separable `g`.
//!
//! The crate provides
//!
//! - grid geometry and sparse matrices ([`grid`], [`sparse`]),
//! - separable nonsmooth parts and their prox operators ([`nonsmooth`]),
//! - the discretized elastic obstacle problem ([`eop`]),
//! - transfer operators with adaptive masking ([`transfer`]) and level stacks
//!   ([`hierarchy`]),
//! - the MGProx V-cycle ([`cycle`]), its accelerated variant ([`fast`]) and
//!   single-level baselines ([`baselines`]),
//! - oracles and run certificates ([`oracles`]).
//!
//! ```
//! use mgprox::{build_hierarchy, CycleConfig, EopInstance, GridLevel, MgProx, StoppingRule};
//!
//! let fine = EopInstance::new(GridLevel::from_exponent(0, 3)?, 1e-6)?;
//! let stack = build_hierarchy(&fine, 2)?;
//! let mut solver = MgProx::new(stack, CycleConfig::default())?;
//! let x0 = mgprox::rng::uniform_start(49, 7);
//! let (_, trace) = solver.solve(&x0, StoppingRule::new(1e-8, 200))?;
//! assert!(trace.converged);
//! # Ok::<(), mgprox::Error>(())
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

pub mod baselines;
pub mod cycle;
pub mod eop;
pub mod error;
pub mod fast;
pub mod grid;
pub mod hierarchy;
pub mod linalg;
pub mod nonsmooth;
pub mod oracles;
pub mod problem;
pub mod rng;
pub mod smoother;
pub mod sparse;
pub mod trace;
pub mod transfer;

pub use baselines::{fista_solve, proxgrad_solve};
pub use cycle::{CoarseSolve, CycleConfig, CycleTrace, MgProx, Variant};
pub use eop::{EopInstance, EopSmooth};
pub use error::{Error, Result};
pub use fast::{EstimateSeqState, FastMgProx};
pub use grid::GridLevel;
pub use hierarchy::{build_hierarchy, Level, LevelStack};
pub use nonsmooth::{SeparableNonsmooth, SubgradientPolicy};
pub use oracles::{certify_run, CertificateReport, SyntheticProblem};
pub use problem::{CompositeProblem, SmoothPart};
pub use smoother::{SmootherConfig, StepMode};
pub use sparse::SparseMat;
pub use trace::{SolverTrace, StoppingRule};
pub use transfer::{AdaptiveMask, TransferPair};
