//! Gaussian-sequence-model simulator for ordered variable selection.
//!
//! Observations are noisy basis coefficients `xi_j = theta_j + eps z_j`; the
//! penalized projection criterion `crit(D) = -sum_{j<=D} xi_j^2 + lambda D
//! eps^2` selects a dimension. The simulator reproduces the phase transition
//! of the penalty constant at 1: below it the criterion explodes to large
//! dimensions, above it the selection collapses to oracle scale.

use crate::error::{Error, Result};
use crate::exec;
use crate::numeric::compensated_sum;
use crate::risklab::replication_rng;
use rand::prelude::*;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Target coefficient sequence and noise level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceModel {
    theta: Vec<f64>,
    epsilon: f64,
}

impl SequenceModel {
    pub fn new(theta: Vec<f64>, epsilon: f64) -> Result<Self> {
        if theta.is_empty() {
            return Err(Error::invalid("coefficient sequence must be non-empty"));
        }
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::invalid(format!(
                "noise level must be positive, got {epsilon}"
            )));
        }
        Ok(SequenceModel { theta, epsilon })
    }

    /// The zero target: pure noise.
    pub fn zero(dims: usize, epsilon: f64) -> Result<Self> {
        Self::new(vec![0.0; dims], epsilon)
    }

    /// Power-decay target `theta_j = j^{-exponent}`, truncated at `dims`.
    pub fn power(dims: usize, exponent: f64, epsilon: f64) -> Result<Self> {
        Self::new(
            (1..=dims).map(|j| (j as f64).powf(-exponent)).collect(),
            epsilon,
        )
    }

    pub fn dims(&self) -> usize {
        self.theta.len()
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// Exact risk of the projection at a fixed dimension:
    /// `sum_{j>D} theta_j^2 + D eps^2`.
    pub fn projection_risk(&self, dim: usize) -> f64 {
        let tail: f64 = compensated_sum(
            &self.theta[dim..]
                .iter()
                .map(|t| t * t)
                .collect::<Vec<_>>(),
        );
        tail + dim as f64 * self.epsilon * self.epsilon
    }
}

/// One realized selection at a fixed penalty constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceRun {
    /// Realized observations `xi_j`.
    pub observations: Vec<f64>,
    /// Criterion values `crit(D)` for `D = 1..=N` (index `D - 1`).
    pub criteria: Vec<f64>,
    /// Selected dimension, ties broken toward the smallest `D`.
    pub selected_dim: usize,
    /// Realized squared error of the selected projection.
    pub risk: f64,
}

fn draw_observations(model: &SequenceModel, rng: &mut impl Rng) -> Vec<f64> {
    model
        .theta
        .iter()
        .map(|&t| t + model.epsilon * rng.sample::<f64, _>(StandardNormal))
        .collect()
}

/// `crit(D) = -sum_{j<=D} xi_j^2 + lambda D eps^2`, for every `D`.
fn criterion_values(model: &SequenceModel, observations: &[f64], lambda: f64) -> Vec<f64> {
    let eps_sq = model.epsilon * model.epsilon;
    let mut cumulative = 0.0;
    observations
        .iter()
        .enumerate()
        .map(|(idx, &xi)| {
            cumulative += xi * xi;
            let dim = (idx + 1) as f64;
            -cumulative + lambda * dim * eps_sq
        })
        .collect()
}

fn select_dim(criteria: &[f64]) -> usize {
    let mut best = 0;
    for (idx, &value) in criteria.iter().enumerate().skip(1) {
        if value < criteria[best] {
            best = idx;
        }
    }
    best + 1
}

fn realized_risk(model: &SequenceModel, observations: &[f64], dim: usize) -> f64 {
    let head: f64 = observations[..dim]
        .iter()
        .zip(&model.theta[..dim])
        .map(|(&xi, &t)| (xi - t) * (xi - t))
        .sum();
    let tail: f64 = model.theta[dim..].iter().map(|t| t * t).sum();
    head + tail
}

/// Draws one noise realization and runs the penalized selection.
pub fn run_once(model: &SequenceModel, lambda: f64, seed: u64) -> SequenceRun {
    let mut rng = replication_rng(seed, 0);
    run_with_rng(model, lambda, &mut rng)
}

fn run_with_rng(model: &SequenceModel, lambda: f64, rng: &mut impl Rng) -> SequenceRun {
    let observations = draw_observations(model, rng);
    let criteria = criterion_values(model, &observations, lambda);
    let selected_dim = select_dim(&criteria);
    let risk = realized_risk(model, &observations, selected_dim);
    SequenceRun {
        observations,
        criteria,
        selected_dim,
        risk,
    }
}

/// Monte Carlo check of the projection risk identity
/// `E||f - fhat_D||^2 = sum_{j>D} theta_j^2 + D eps^2` at a fixed dimension:
/// true when the empirical mean sits within four standard errors.
pub fn risk_identity_check(
    model: &SequenceModel,
    dim: usize,
    reps: usize,
    seed: u64,
) -> Result<bool> {
    if dim == 0 || dim > model.dims() {
        return Err(Error::invalid(format!(
            "dimension must lie in [1, {}], got {dim}",
            model.dims()
        )));
    }
    if reps < 50 {
        return Err(Error::invalid(format!(
            "risk identity check needs at least 50 replications, got {reps}"
        )));
    }
    let risks: Vec<f64> = exec::map_indices(reps, |rep| {
        let mut rng = replication_rng(seed, rep);
        let observations = draw_observations(model, &mut rng);
        realized_risk(model, &observations, dim)
    });
    let mean = compensated_sum(&risks) / reps as f64;
    let var = risks.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>()
        / (reps as f64 - 1.0);
    let se = (var / reps as f64).sqrt();
    let exact = model.projection_risk(dim);
    Ok((mean - exact).abs() <= 4.0 * se + 1e-15)
}

/// One row of the penalty-constant phase diagram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseRow {
    pub lambda: f64,
    pub mean_dim: f64,
    pub mean_risk: f64,
}

/// Monte Carlo means of the selected dimension and realized risk per penalty
/// constant. Each replication draws one noise realization and evaluates the
/// whole lambda grid on it.
pub fn phase_diagram(
    model: &SequenceModel,
    lambdas: &[f64],
    reps: usize,
    seed: u64,
) -> Result<Vec<PhaseRow>> {
    if lambdas.is_empty() {
        return Err(Error::invalid("lambda grid must be non-empty"));
    }
    let lo = lambdas.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = lambdas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(lo < 1.0 && hi > 1.0) {
        return Err(Error::invalid(
            "lambda grid must span both sides of the critical value 1",
        ));
    }
    if reps == 0 {
        return Err(Error::invalid("need at least one replication"));
    }
    let per_rep: Vec<Vec<(usize, f64)>> = exec::map_indices(reps, |rep| {
        let mut rng = replication_rng(seed, rep);
        let observations = draw_observations(model, &mut rng);
        lambdas
            .iter()
            .map(|&lambda| {
                let criteria = criterion_values(model, &observations, lambda);
                let dim = select_dim(&criteria);
                (dim, realized_risk(model, &observations, dim))
            })
            .collect()
    });
    Ok(lambdas
        .iter()
        .enumerate()
        .map(|(k, &lambda)| {
            let dims: Vec<f64> = per_rep.iter().map(|r| r[k].0 as f64).collect();
            let risks: Vec<f64> = per_rep.iter().map(|r| r[k].1).collect();
            PhaseRow {
                lambda,
                mean_dim: compensated_sum(&dims) / reps as f64,
                mean_risk: compensated_sum(&risks) / reps as f64,
            }
        })
        .collect())
}
