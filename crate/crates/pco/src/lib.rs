//! Bandwidth selection for kernel density estimation by penalized comparison
//! to the overfitting estimate, with data-driven penalty calibration.
//!
//! The selection criterion compares every candidate estimate to the one at
//! the minimal grid bandwidth and adds a penalty built from kernel norms:
//!
//! ```text
//! Crit(h) = ||fhat_h - fhat_hmin||^2 + (lambda ||K_h||^2 - ||K_hmin - K_h||^2) / n
//! ```
//!
//! The crate provides:
//!
//! - [`kernels`]: Gaussian / Epanechnikov / higher-order kernels with exact
//!   or quadrature-backed norms, inner products, and convolutions;
//! - [`kde`]: direct kernel density evaluation (the ground-truth path);
//! - [`selection`]: the criterion, penalty family, and grid selection;
//! - [`calibration`]: minimal-penalty phase-transition detection and the
//!   recommended constant one unit above it;
//! - [`baselines`]: Lepski, Goldenshluger-Lepski, and least-squares
//!   cross-validation selectors for comparison;
//! - [`risklab`]: seeded Monte Carlo experiments (oracle ratios,
//!   minimal-penalty frequencies, rate slopes);
//! - [`gwn`]: the Gaussian-sequence-model demonstrator of the penalty phase
//!   transition in its cleanest setting.
//!
//! With the default `parallel` feature, grid elements and Monte Carlo
//! replications fan out over rayon; reductions are order-fixed, so results
//! are identical for any worker count (and to the sequential build).

pub mod baselines;
pub mod calibration;
pub mod error;
pub mod exec;
pub mod gwn;
pub mod kde;
pub mod kernels;
pub mod numeric;
pub mod quad;
pub mod risklab;
pub mod selection;

pub use error::{Error, Result};
pub use kde::Sample;
pub use kernels::{Bandwidth, BaseKernel, Kernel, ProductKernel};
pub use selection::{
    comparison_term, criterion_identity_check, penalty, select_bandwidth, BandwidthGrid,
    CriterionTable, PenaltySpec, SelectionEngine,
};
