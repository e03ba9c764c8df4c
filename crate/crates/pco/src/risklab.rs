//! Monte Carlo risk laboratory: registered test densities with exact
//! samplers, integrated squared error by quadrature, and the seeded
//! experiments that measure oracle ratios, minimal-penalty phase
//! transitions, and convergence-rate slopes.
//!
//! Replication `r` of an experiment draws from a ChaCha stream keyed by
//! `(seed, r)`, so runs are reproducible bit-for-bit and replications can be
//! distributed over workers in any order.

use crate::baselines::{self, BaselineSpec};
use crate::error::{Error, Result};
use crate::exec;
use crate::kde::{self, DensityEstimate, EvalGrid, Sample};
use crate::kernels::{Bandwidth, ProductKernel};
use crate::selection::{BandwidthGrid, PenaltySpec, SelectionEngine};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};

/// A registered univariate test density with exact sampler and known bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case")]
pub enum Density {
    StandardNormal,
    GaussianMixture { components: Vec<MixtureComponent> },
    Uniform { lo: f64, hi: f64 },
    Claw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub weight: f64,
    pub mean: f64,
    pub sd: f64,
}

fn claw_components() -> Vec<MixtureComponent> {
    // Standard claw mixture: a broad unit normal plus five narrow teeth.
    let mut comps = vec![MixtureComponent {
        weight: 0.5,
        mean: 0.0,
        sd: 1.0,
    }];
    for l in 0..5 {
        comps.push(MixtureComponent {
            weight: 0.1,
            mean: l as f64 / 2.0 - 1.0,
            sd: 0.1,
        });
    }
    comps
}

fn normal_pdf(x: f64, mean: f64, sd: f64) -> f64 {
    let z = (x - mean) / sd;
    (-0.5 * z * z).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt())
}

fn normal_cdf(x: f64, mean: f64, sd: f64) -> f64 {
    0.5 * (1.0 + libm::erf((x - mean) / (sd * std::f64::consts::SQRT_2)))
}

impl Density {
    /// Validated two-or-more component Gaussian mixture.
    pub fn gaussian_mixture(components: Vec<MixtureComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::invalid("mixture needs at least one component"));
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!(
                "mixture weights must sum to 1, got {total}"
            )));
        }
        for c in &components {
            if c.weight <= 0.0 || c.sd <= 0.0 || !c.mean.is_finite() {
                return Err(Error::invalid("bad mixture component"));
            }
        }
        Ok(Density::GaussianMixture { components })
    }

    /// The symmetric bimodal mixture used in the oracle experiments.
    pub fn bimodal() -> Self {
        Density::GaussianMixture {
            components: vec![
                MixtureComponent {
                    weight: 0.5,
                    mean: -1.0,
                    sd: 2.0 / 3.0,
                },
                MixtureComponent {
                    weight: 0.5,
                    mean: 1.0,
                    sd: 2.0 / 3.0,
                },
            ],
        }
    }

    fn mixture(&self) -> Option<Vec<MixtureComponent>> {
        match self {
            Density::StandardNormal => Some(vec![MixtureComponent {
                weight: 1.0,
                mean: 0.0,
                sd: 1.0,
            }]),
            Density::GaussianMixture { components } => Some(components.clone()),
            Density::Claw => Some(claw_components()),
            Density::Uniform { .. } => None,
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match self {
            Density::StandardNormal => normal_pdf(x, 0.0, 1.0),
            Density::GaussianMixture { components } => components
                .iter()
                .map(|c| c.weight * normal_pdf(x, c.mean, c.sd))
                .sum(),
            Density::Uniform { lo, hi } => {
                if x >= *lo && x <= *hi {
                    1.0 / (hi - lo)
                } else {
                    0.0
                }
            }
            Density::Claw => claw_components()
                .iter()
                .map(|c| c.weight * normal_pdf(x, c.mean, c.sd))
                .sum(),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Density::StandardNormal => normal_cdf(x, 0.0, 1.0),
            Density::GaussianMixture { components } => components
                .iter()
                .map(|c| c.weight * normal_cdf(x, c.mean, c.sd))
                .sum(),
            Density::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            Density::Claw => claw_components()
                .iter()
                .map(|c| c.weight * normal_cdf(x, c.mean, c.sd))
                .sum(),
        }
    }

    /// Known bound on the sup norm, by dense probing over the support.
    pub fn sup_bound(&self) -> f64 {
        match self {
            Density::StandardNormal => 0.3989422804014327,
            Density::Uniform { lo, hi } => 1.0 / (hi - lo),
            _ => {
                let (lo, hi) = effective_support(self);
                let probes = 8192;
                (0..=probes)
                    .map(|k| self.pdf(lo + (hi - lo) * k as f64 / probes as f64))
                    .fold(0.0, f64::max)
            }
        }
    }

    /// Draws one observation.
    pub fn sample_one(&self, rng: &mut impl Rng) -> f64 {
        match self {
            Density::Uniform { lo, hi } => lo + (hi - lo) * rng.gen::<f64>(),
            _ => {
                let comps = self.mixture().expect("mixture families");
                let mut u: f64 = rng.gen();
                let mut chosen = &comps[comps.len() - 1];
                for c in &comps {
                    if u < c.weight {
                        chosen = c;
                        break;
                    }
                    u -= c.weight;
                }
                let normal = Normal::new(chosen.mean, chosen.sd).expect("valid component");
                normal.sample(rng)
            }
        }
    }

    /// Draws an i.i.d. sample of size `n`.
    pub fn sample(&self, n: usize, rng: &mut impl Rng) -> Result<Sample> {
        Sample::univariate((0..n).map(|_| self.sample_one(rng)).collect())
    }

    /// Integrand breakpoints (support edges) for piecewise quadrature.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Density::Uniform { lo, hi } => vec![*lo, *hi],
            _ => Vec::new(),
        }
    }
}

/// Interval outside which the density carries mass below 1e-12 per tail.
pub fn effective_support(f: &Density) -> (f64, f64) {
    match f {
        Density::Uniform { lo, hi } => (*lo, *hi),
        _ => {
            let comps = f.mixture().expect("mixture families");
            let lo = comps
                .iter()
                .map(|c| c.mean - 9.0 * c.sd)
                .fold(f64::INFINITY, f64::min);
            let hi = comps
                .iter()
                .map(|c| c.mean + 9.0 * c.sd)
                .fold(f64::NEG_INFINITY, f64::max);
            (lo, hi)
        }
    }
}

/// Integrated squared error of a tabulated estimate against a registered
/// density, by quadrature over the estimate's grid.
///
/// Errors when the grid leaves more than 1e-3 of the density's mass
/// uncovered.
pub fn ise(estimate: &DensityEstimate, f: &Density) -> Result<f64> {
    if estimate.grid.dim() != 1 {
        return Err(Error::Unsupported(
            "integrated squared error is computed for univariate estimates".into(),
        ));
    }
    let axis = &estimate.grid.axes[0];
    let lo = axis.start;
    let hi = axis.start + axis.step * (axis.count - 1) as f64;
    let missing = f.cdf(lo) + (1.0 - f.cdf(hi));
    if missing > 1e-3 {
        return Err(Error::CoverageError { missing });
    }
    let points = axis.points();
    let squared: Vec<f64> = estimate
        .values
        .iter()
        .zip(&points)
        .map(|(&v, &x)| {
            let diff = v - f.pdf(x);
            diff * diff
        })
        .collect();
    Ok(estimate.grid.integrate(&squared))
}

/// One bandwidth-selection method entered in an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Method {
    Pco { penalty: PenaltySpec },
    Lepski { spec: BaselineSpec },
    Gl { spec: BaselineSpec },
    Lscv,
}

impl Method {
    pub fn label(&self) -> String {
        match self {
            Method::Pco { penalty } => match penalty {
                PenaltySpec::Family { lambda } => format!("pco(lambda={lambda})"),
                PenaltySpec::Minimal => "pco(minimal)".into(),
                PenaltySpec::Optimal => "pco(optimal)".into(),
            },
            Method::Lepski { .. } => "lepski".into(),
            Method::Gl { .. } => "gl".into(),
            Method::Lscv => "lscv".into(),
        }
    }
}

/// Per-method outcome of one replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodRep {
    pub rep: usize,
    pub selected: Bandwidth,
    pub ise: f64,
    /// `ise` relative to the best grid bandwidth in the same replication.
    pub oracle_ratio: f64,
}

/// Aggregated outcome of one method over all replications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: String,
    pub mean_ise: f64,
    pub median_ise: f64,
    pub median_oracle_ratio: f64,
    pub reps: Vec<MethodRep>,
}

/// Per-bandwidth risk statistics over all replications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandwidthRisk {
    pub bandwidth: Bandwidth,
    pub mean_ise: f64,
    pub median_ise: f64,
    pub q10_ise: f64,
    pub q90_ise: f64,
}

/// Monte Carlo risk report: grid risk curve, oracle bandwidth, per-method
/// oracle ratios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskReport {
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    pub grid_risk: Vec<BandwidthRisk>,
    /// Grid bandwidth minimizing the mean ISE over the replication set.
    pub oracle_bandwidth: Bandwidth,
    pub methods: Vec<MethodSummary>,
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let idx = pos.floor() as usize;
    let frac = pos - idx as f64;
    if idx + 1 < sorted.len() {
        sorted[idx] * (1.0 - frac) + sorted[idx + 1] * frac
    } else {
        sorted[idx]
    }
}

fn sorted_copy(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

pub(crate) fn median(values: &[f64]) -> f64 {
    percentile(&sorted_copy(values), 0.5)
}

fn mean(values: &[f64]) -> f64 {
    crate::numeric::compensated_sum(values) / values.len() as f64
}

/// RNG stream for replication `r` of a seeded experiment.
pub fn replication_rng(seed: u64, rep: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep as u64);
    rng
}

/// Number of grid points per axis used by experiment-grade ISE quadrature.
const ISE_GRID_POINTS: usize = 2049;

fn experiment_grid(f: &Density, h_max: &Bandwidth, kernel: &ProductKernel) -> EvalGrid {
    let (lo, hi) = effective_support(f);
    let pad = 4.0 * h_max.components()[0] * kernel.axis().support_halfwidth().min(4.0);
    EvalGrid {
        axes: vec![
            kde::GridAxis::new(lo - pad, hi + pad, ISE_GRID_POINTS).expect("valid grid"),
        ],
    }
}

struct RepOutcome {
    ises: Vec<f64>,
    selections: Vec<(Bandwidth, f64)>,
}

/// Seeded oracle experiment: per replication, the full grid risk curve and
/// each method's selected bandwidth with its realized ISE.
pub fn oracle_experiment(
    f: &Density,
    n: usize,
    kernel: &ProductKernel,
    grid: &BandwidthGrid,
    methods: &[Method],
    reps: usize,
    seed: u64,
) -> Result<RiskReport> {
    if reps < 50 {
        return Err(Error::invalid(format!(
            "oracle experiments need at least 50 replications, got {reps}"
        )));
    }
    if kernel.dim() != 1 {
        return Err(Error::Unsupported(
            "risk experiments are univariate".into(),
        ));
    }
    let engine = SelectionEngine::new(kernel, grid)?;
    let h_max = grid.largest();
    let eval_grid = experiment_grid(f, h_max, kernel);
    let outcomes: Vec<Result<RepOutcome>> = exec::map_indices(reps, |rep| {
        let mut rng = replication_rng(seed, rep);
        let sample = f.sample(n, &mut rng)?;
        let mut ises = Vec::with_capacity(grid.len());
        for h in grid.iter() {
            let est = kde::estimate_on_grid(&sample, kernel, h, &eval_grid)?;
            ises.push(ise(&est, f)?);
        }
        let mut selections = Vec::with_capacity(methods.len());
        for method in methods {
            let selected = match method {
                Method::Pco { penalty } => engine
                    .select(&sample, penalty)?
                    .selected_bandwidth()
                    .clone(),
                Method::Lepski { spec } => baselines::lepski_select(&sample, kernel, grid, spec)?,
                Method::Gl { spec } => baselines::gl_select(&sample, kernel, grid, spec)?,
                Method::Lscv => baselines::lscv_select(&sample, kernel, grid)?,
            };
            let est = kde::estimate_on_grid(&sample, kernel, &selected, &eval_grid)?;
            let selected_ise = ise(&est, f)?;
            selections.push((selected, selected_ise));
        }
        Ok(RepOutcome { ises, selections })
    });
    let outcomes: Vec<RepOutcome> = outcomes.into_iter().collect::<Result<_>>()?;

    let grid_risk: Vec<BandwidthRisk> = grid
        .iter()
        .enumerate()
        .map(|(j, h)| {
            let column: Vec<f64> = outcomes.iter().map(|o| o.ises[j]).collect();
            let sorted = sorted_copy(&column);
            BandwidthRisk {
                bandwidth: h.clone(),
                mean_ise: mean(&column),
                median_ise: percentile(&sorted, 0.5),
                q10_ise: percentile(&sorted, 0.1),
                q90_ise: percentile(&sorted, 0.9),
            }
        })
        .collect();
    let oracle_idx = grid_risk
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| a.mean_ise.partial_cmp(&b.mean_ise).unwrap())
        .map(|(i, _)| i)
        .expect("non-empty grid");

    let methods_out: Vec<MethodSummary> = methods
        .iter()
        .enumerate()
        .map(|(mi, method)| {
            let reps_out: Vec<MethodRep> = outcomes
                .iter()
                .enumerate()
                .map(|(rep, o)| {
                    let (selected, selected_ise) = o.selections[mi].clone();
                    let best = o.ises.iter().copied().fold(f64::INFINITY, f64::min);
                    MethodRep {
                        rep,
                        selected,
                        ise: selected_ise,
                        oracle_ratio: selected_ise / best,
                    }
                })
                .collect();
            let ises: Vec<f64> = reps_out.iter().map(|r| r.ise).collect();
            let ratios: Vec<f64> = reps_out.iter().map(|r| r.oracle_ratio).collect();
            MethodSummary {
                method: method.label(),
                mean_ise: mean(&ises),
                median_ise: median(&ises),
                median_oracle_ratio: median(&ratios),
                reps: reps_out,
            }
        })
        .collect();

    Ok(RiskReport {
        n,
        reps,
        seed,
        grid_risk,
        oracle_bandwidth: grid.get(oracle_idx).clone(),
        methods: methods_out,
    })
}

/// Frequency table of the minimal-penalty experiment: per negative lambda,
/// how often the selected volume stays within `C(lambda) = 2.1 - 1/lambda`
/// times the minimal volume.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimalPenaltyReport {
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    pub rows: Vec<MinimalPenaltyRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimalPenaltyRow {
    pub lambda: f64,
    /// Volume cap factor `2.1 - 1/lambda` of the overfitting regime.
    pub cap_factor: f64,
    /// Empirical frequency of `selected volume <= cap * minimal volume`.
    pub frequency: f64,
    pub selected_volumes: Vec<f64>,
}

pub fn minimal_penalty_experiment(
    f: &Density,
    n: usize,
    kernel: &ProductKernel,
    grid: &BandwidthGrid,
    lambdas: &[f64],
    reps: usize,
    seed: u64,
) -> Result<MinimalPenaltyReport> {
    if lambdas.is_empty() {
        return Err(Error::invalid("need at least one lambda"));
    }
    if let Some(bad) = lambdas.iter().find(|l| **l >= 0.0) {
        return Err(Error::invalid(format!(
            "minimal-penalty experiment takes negative lambdas, got {bad}"
        )));
    }
    if reps == 0 {
        return Err(Error::invalid("need at least one replication"));
    }
    let engine = SelectionEngine::new(kernel, grid)?;
    let volumes: Vec<Vec<f64>> = exec::map_indices(reps, |rep| {
        let mut rng = replication_rng(seed, rep);
        let sample = f.sample(n, &mut rng)?;
        let comparisons = engine.comparison_terms(&sample)?;
        lambdas
            .iter()
            .map(|&lambda| {
                let table =
                    engine.select_with_comparisons(&comparisons, &PenaltySpec::Family { lambda });
                Ok(table.selected_bandwidth().volume())
            })
            .collect::<Result<Vec<f64>>>()
    })
    .into_iter()
    .collect::<Result<_>>()?;

    let hmin_volume = grid.hmin().volume();
    let rows = lambdas
        .iter()
        .enumerate()
        .map(|(k, &lambda)| {
            let cap_factor = 2.1 - 1.0 / lambda;
            let selected: Vec<f64> = volumes.iter().map(|v| v[k]).collect();
            let hits = selected
                .iter()
                .filter(|&&v| v <= cap_factor * hmin_volume * (1.0 + 1e-12))
                .count();
            MinimalPenaltyRow {
                lambda,
                cap_factor,
                frequency: hits as f64 / reps as f64,
                selected_volumes: selected,
            }
        })
        .collect();
    Ok(MinimalPenaltyReport {
        n,
        reps,
        seed,
        rows,
    })
}

/// Convergence-rate experiment: log-log slope of the median ISE of the
/// PCO-selected estimator against the sample size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub seed: u64,
    pub reps: usize,
    pub rows: Vec<RateRow>,
    /// Least-squares slope of `log median ISE` on `log n`.
    pub slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub n: usize,
    pub median_ise: f64,
    pub median_volume: f64,
}

pub fn rate_experiment(
    f: &Density,
    kernel: &ProductKernel,
    n_list: &[usize],
    penalty: &PenaltySpec,
    reps: usize,
    seed: u64,
) -> Result<RateReport> {
    if n_list.len() < 4 {
        return Err(Error::invalid(
            "rate experiments need at least four sample sizes for a slope",
        ));
    }
    if reps == 0 {
        return Err(Error::invalid("need at least one replication"));
    }
    let mut rows = Vec::with_capacity(n_list.len());
    for (block, &n) in n_list.iter().enumerate() {
        let grid = BandwidthGrid::geometric_default(kernel, n)?;
        let engine = SelectionEngine::new(kernel, &grid)?;
        let eval_grid = experiment_grid(f, grid.largest(), kernel);
        let block_seed = seed.wrapping_add(block as u64);
        let outcomes: Vec<Result<(f64, f64)>> = exec::map_indices(reps, |rep| {
            let mut rng = replication_rng(block_seed, rep);
            let sample = f.sample(n, &mut rng)?;
            let table = engine.select(&sample, penalty)?;
            let selected = table.selected_bandwidth();
            let est = kde::estimate_on_grid(&sample, kernel, selected, &eval_grid)?;
            Ok((ise(&est, f)?, selected.volume()))
        });
        let outcomes: Vec<(f64, f64)> = outcomes.into_iter().collect::<Result<_>>()?;
        let ises: Vec<f64> = outcomes.iter().map(|o| o.0).collect();
        let vols: Vec<f64> = outcomes.iter().map(|o| o.1).collect();
        rows.push(RateRow {
            n,
            median_ise: median(&ises),
            median_volume: median(&vols),
        });
    }
    let xs: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.median_ise.ln()).collect();
    Ok(RateReport {
        seed,
        reps,
        rows,
        slope: least_squares_slope(&xs, &ys),
    })
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let cov: f64 = xs.iter().zip(ys).map(|(&x, &y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|&x| (x - mx) * (x - mx)).sum();
    cov / var
}
