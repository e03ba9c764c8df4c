//! Data-driven choice of the penalty constant.
//!
//! Sweeping lambda across negative and positive values makes the selected
//! bandwidth volume jump from the overfitting floor to oracle scale; the
//! jump locates the critical constant, and the recommended constant is one
//! unit above it (the minimal and optimal penalties differ by exactly
//! `||K_h||^2 / n`, one lambda-unit of the family).

use crate::error::{Error, Result};
use crate::kde::Sample;
use crate::kernels::{Bandwidth, ProductKernel};
use crate::selection::{BandwidthGrid, PenaltySpec, SelectionEngine};
use serde::{Deserialize, Serialize};

/// Minimum ratio between consecutive selected volumes that counts as the
/// phase transition. Below the transition the selection sits at the minimal
/// volume, above it near the oracle, several decades apart at desk scale;
/// 5 ignores grid-step wobble.
pub const JUMP_RATIO_THRESHOLD: f64 = 5.0;

/// Selected bandwidth as a function of the penalty constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationTrace {
    pub rows: Vec<TraceRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub lambda: f64,
    pub selected: Bandwidth,
    pub volume: f64,
}

/// Location of the detected phase transition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jump {
    /// Midpoint of the bracketing lambda pair.
    pub lambda: f64,
    /// Ratio of selected volumes across the bracket.
    pub ratio: f64,
    /// Index of the lower bracket row.
    pub lower_index: usize,
}

/// Default calibration sweep: 31 equispaced constants on [-1, 2], bracketing
/// the theoretical transition at 0 and the optimum at 1.
pub fn default_lambda_grid() -> Vec<f64> {
    (0..31).map(|k| -1.0 + k as f64 * 0.1).collect()
}

/// Runs the selection once per lambda and records the selected volumes.
///
/// The comparison terms do not depend on lambda, so the sweep computes them
/// once and reassembles the penalized criterion per constant; the trace is
/// identical to running the full selection per lambda.
pub fn scan_lambda(
    sample: &Sample,
    kernel: &ProductKernel,
    grid: &BandwidthGrid,
    lambdas: &[f64],
) -> Result<CalibrationTrace> {
    if lambdas.is_empty() {
        return Err(Error::invalid("lambda grid must be non-empty"));
    }
    if lambdas.len() < 5 {
        return Err(Error::invalid(format!(
            "lambda grid needs at least 5 values, got {}",
            lambdas.len()
        )));
    }
    if !lambdas.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::invalid("lambda grid must be strictly increasing"));
    }
    if lambdas[0] > -1.0 + 1e-12 || lambdas[lambdas.len() - 1] < 2.0 - 1e-12 {
        return Err(Error::invalid(
            "lambda grid must cover [-1, 2] to bracket the transition",
        ));
    }
    let engine = SelectionEngine::new(kernel, grid)?;
    let comparisons = engine.comparison_terms(sample)?;
    let rows = lambdas
        .iter()
        .map(|&lambda| {
            let table = engine.select_with_comparisons_n(
                &comparisons,
                &PenaltySpec::Family { lambda },
                sample.n(),
            );
            let selected = table.selected_bandwidth().clone();
            TraceRow {
                lambda,
                volume: selected.volume(),
                selected,
            }
        })
        .collect();
    Ok(CalibrationTrace { rows })
}

/// Locates the largest ratio of consecutive selected volumes. Returns the
/// bracket midpoint when that ratio reaches [`JUMP_RATIO_THRESHOLD`];
/// `None` means no transition (a valid outcome, e.g. constant traces).
pub fn detect_jump(trace: &CalibrationTrace) -> Option<Jump> {
    let mut best: Option<Jump> = None;
    for (k, pair) in trace.rows.windows(2).enumerate() {
        let ratio = pair[1].volume / pair[0].volume;
        if best.as_ref().is_none_or(|b| ratio > b.ratio) {
            best = Some(Jump {
                lambda: 0.5 * (pair[0].lambda + pair[1].lambda),
                ratio,
                lower_index: k,
            });
        }
    }
    best.filter(|jump| jump.ratio >= JUMP_RATIO_THRESHOLD)
}

/// Turns a detected transition into a penalty: `lambda = lambda_crit + 1`.
pub fn recommend(trace: &CalibrationTrace) -> Result<PenaltySpec> {
    match detect_jump(trace) {
        Some(jump) => Ok(PenaltySpec::Family {
            lambda: jump.lambda + 1.0,
        }),
        None => Err(Error::CalibrationFailed {
            trace: Box::new(trace.clone()),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::Kernel;

    fn synthetic_trace(lambdas: &[f64], volumes: &[f64]) -> CalibrationTrace {
        CalibrationTrace {
            rows: lambdas
                .iter()
                .zip(volumes)
                .map(|(&lambda, &volume)| TraceRow {
                    lambda,
                    selected: Bandwidth::scalar(volume).unwrap(),
                    volume,
                })
                .collect(),
        }
    }

    #[test]
    fn detects_midpoint_of_constructed_step() {
        let trace = synthetic_trace(
            &[-0.5, 0.0, 0.5, 1.0],
            &[1e-3, 1e-3, 0.1, 0.1],
        );
        let jump = detect_jump(&trace).unwrap();
        assert!((jump.lambda - 0.25).abs() < 1e-12);
        assert!((jump.ratio - 100.0).abs() < 1e-9);
    }

    #[test]
    fn constant_trace_reports_no_transition() {
        let trace = synthetic_trace(&[-1.0, 0.0, 1.0, 2.0], &[0.05; 4]);
        assert!(detect_jump(&trace).is_none());
        assert!(matches!(
            recommend(&trace),
            Err(Error::CalibrationFailed { .. })
        ));
    }

    #[test]
    fn step_fixture_family_recovered_within_one_spacing() {
        let lambdas: Vec<f64> = (0..31).map(|k| -1.0 + k as f64 * 0.1).collect();
        let spacing = 0.1;
        for jump_ratio in [5.0, 8.0, 50.0, 1e4] {
            for jump_at in [5, 10, 15, 25] {
                let volumes: Vec<f64> = (0..31)
                    .map(|k| if k < jump_at { 1e-3 } else { 1e-3 * jump_ratio })
                    .collect();
                let trace = synthetic_trace(&lambdas, &volumes);
                let jump = detect_jump(&trace).unwrap();
                let expected = 0.5 * (lambdas[jump_at - 1] + lambdas[jump_at]);
                assert!(
                    (jump.lambda - expected).abs() <= spacing + 1e-12,
                    "ratio {jump_ratio} at {jump_at}: {} vs {expected}",
                    jump.lambda
                );
            }
        }
    }

    #[test]
    fn below_threshold_ratio_is_ignored() {
        let trace = synthetic_trace(
            &[-1.0, 0.0, 1.0, 2.0],
            &[1e-3, 1e-3, 4.9e-3, 4.9e-3],
        );
        assert!(detect_jump(&trace).is_none());
    }

    #[test]
    fn recommendation_is_one_above_critical() {
        let trace = synthetic_trace(
            &[-0.5, 0.0, 0.5, 1.0],
            &[1e-3, 1e-3, 0.1, 0.1],
        );
        match recommend(&trace).unwrap() {
            PenaltySpec::Family { lambda } => assert!((lambda - 1.25).abs() < 1e-12),
            other => panic!("unexpected spec {other:?}"),
        }
    }

    #[test]
    fn scan_validates_lambda_grid() {
        let sample = Sample::univariate(vec![0.1, 0.4, -0.3, 0.9, 1.2]).unwrap();
        let pk = ProductKernel::univariate(Kernel::gaussian());
        let grid = BandwidthGrid::geometric(0.05, 0.5, 5, &pk, sample.n()).unwrap();
        assert!(scan_lambda(&sample, &pk, &grid, &[]).is_err());
        assert!(scan_lambda(&sample, &pk, &grid, &[-1.0, 0.0, 2.0]).is_err());
        assert!(scan_lambda(&sample, &pk, &grid, &[-1.0, 0.0, 0.5, 1.0, 0.9, 2.0]).is_err());
        assert!(scan_lambda(&sample, &pk, &grid, &[-0.5, 0.0, 0.5, 1.0, 2.0]).is_err());
        let trace =
            scan_lambda(&sample, &pk, &grid, &[-1.0, 0.0, 0.5, 1.0, 2.0]).unwrap();
        assert_eq!(trace.rows.len(), 5);
    }

    #[test]
    fn scan_matches_full_selection_per_lambda() {
        let sample = Sample::univariate(vec![
            0.1, 0.4, -0.3, 0.9, 1.2, -0.8, 0.0, 0.55, -1.4, 2.2, 0.3, -0.15,
        ])
        .unwrap();
        let pk = ProductKernel::univariate(Kernel::gaussian());
        let grid = BandwidthGrid::geometric(0.03, 0.8, 8, &pk, sample.n()).unwrap();
        let lambdas = default_lambda_grid();
        let trace = scan_lambda(&sample, &pk, &grid, &lambdas).unwrap();
        for row in trace.rows.iter().step_by(7) {
            let table = crate::selection::select_bandwidth(
                &sample,
                &pk,
                &grid,
                &PenaltySpec::Family { lambda: row.lambda },
            )
            .unwrap();
            assert_eq!(table.selected_bandwidth(), &row.selected);
        }
    }

    #[test]
    fn scan_is_deterministic() {
        let sample = Sample::univariate(vec![0.5, -0.2, 1.1, 0.8, -0.6, 0.05, 1.9]).unwrap();
        let pk = ProductKernel::univariate(Kernel::gaussian());
        let grid = BandwidthGrid::geometric(0.05, 0.6, 6, &pk, sample.n()).unwrap();
        let lambdas = default_lambda_grid();
        let a = scan_lambda(&sample, &pk, &grid, &lambdas).unwrap();
        let b = scan_lambda(&sample, &pk, &grid, &lambdas).unwrap();
        assert_eq!(a, b);
    }
}
