//! Bandwidth selection by penalized comparison to the overfitting estimate.
//!
//! The criterion minimized over a bandwidth grid is
//! `Crit(h) = ||fhat_h - fhat_hmin||^2 + pen(h)`, where the comparison term
//! is expanded into a mean of pair interactions over observation pairs and
//! the penalty family is
//! `pen_lambda(h) = (lambda ||K_h||^2 - ||K_hmin - K_h||^2) / n`, with the
//! `minimal` and `optimal` variants differing from members of that family by
//! h-independent shifts only.
//!
//! [`SelectionEngine`] caches the per-bandwidth convolution evaluators and
//! norm scalars, so sweeps over penalty constants or Monte Carlo replications
//! pay the table-construction cost once. Grid elements are processed in
//! parallel; each one reduces its pair sum in a fixed order, so results do
//! not depend on the worker count.

use crate::error::{Error, Result};
use crate::exec;
use crate::kde::Sample;
use crate::kernels::{Bandwidth, ConvEvaluator, ProductKernel};
use crate::numeric::KahanSum;
use serde::{Deserialize, Serialize};

/// Validated, volume-sorted set of candidate bandwidths with its
/// coordinatewise minimum.
#[derive(Debug, Clone, PartialEq)]
pub struct BandwidthGrid {
    bandwidths: Vec<Bandwidth>,
    hmin: Bandwidth,
    n: usize,
    admissible: bool,
}

/// Hard cap on materialized product grids; `|H|` grows like `n^d`.
pub const MAX_GRID_ELEMENTS: usize = 100_000;

impl BandwidthGrid {
    /// Builds a grid from an explicit list. The list is sorted by volume
    /// (ties by components); `hmin` is the coordinatewise minimum of the
    /// per-axis projections. Violating the admissibility floor
    /// `prod hmin_j >= ||K||_inf ||K||_1 / n` sets a warning flag rather
    /// than failing: the minimal-penalty regime deliberately sits there.
    pub fn new(bandwidths: Vec<Bandwidth>, kernel: &ProductKernel, n: usize) -> Result<Self> {
        if bandwidths.is_empty() {
            return Err(Error::invalid("bandwidth grid must be non-empty"));
        }
        if n == 0 {
            return Err(Error::invalid("sample size for grid validation must be >= 1"));
        }
        let d = kernel.dim();
        if bandwidths.len() > MAX_GRID_ELEMENTS {
            return Err(Error::invalid(format!(
                "grid with {} elements exceeds the cap of {MAX_GRID_ELEMENTS}",
                bandwidths.len()
            )));
        }
        for h in &bandwidths {
            if h.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: h.dim(),
                });
            }
        }
        let mut sorted = bandwidths;
        sorted.sort_by(|a, b| {
            a.volume()
                .partial_cmp(&b.volume())
                .unwrap()
                .then_with(|| a.components().partial_cmp(b.components()).unwrap())
        });
        let hmin = Bandwidth::new(
            (0..d)
                .map(|j| {
                    sorted
                        .iter()
                        .map(|h| h.components()[j])
                        .fold(f64::INFINITY, f64::min)
                })
                .collect(),
        )?;
        let admissible = hmin.volume() >= kernel.admissibility_threshold(n);
        Ok(BandwidthGrid {
            bandwidths: sorted,
            hmin,
            n,
            admissible,
        })
    }

    /// Univariate geometric grid with `count` points from `lo` to `hi`.
    pub fn geometric(
        lo: f64,
        hi: f64,
        count: usize,
        kernel: &ProductKernel,
        n: usize,
    ) -> Result<Self> {
        if count == 0 {
            return Err(Error::invalid("grid count must be >= 1"));
        }
        if !(lo > 0.0 && hi >= lo) {
            return Err(Error::invalid(format!(
                "geometric grid needs 0 < lo <= hi, got [{lo}, {hi}]"
            )));
        }
        let points = geometric_points(lo, hi, count);
        let list = points
            .into_iter()
            .map(Bandwidth::scalar)
            .collect::<Result<Vec<_>>>()?;
        Self::new(list, kernel, n)
    }

    /// The default experiment grid: 30 geometric points from the
    /// admissibility floor (at least 1e-4) up to 1.
    pub fn geometric_default(kernel: &ProductKernel, n: usize) -> Result<Self> {
        let lo = kernel.admissibility_threshold(n).max(1e-4);
        Self::geometric(lo, 1.0, 30, kernel, n)
    }

    /// Materializes a product grid from per-axis bandwidth lists, capped at
    /// [`MAX_GRID_ELEMENTS`].
    pub fn product(axes: &[Vec<f64>], kernel: &ProductKernel, n: usize) -> Result<Self> {
        if axes.is_empty() || axes.iter().any(|a| a.is_empty()) {
            return Err(Error::invalid("every axis needs at least one bandwidth"));
        }
        let total: usize = axes.iter().map(|a| a.len()).product();
        if total > MAX_GRID_ELEMENTS {
            return Err(Error::invalid(format!(
                "product grid with {total} elements exceeds the cap of {MAX_GRID_ELEMENTS}"
            )));
        }
        let d = axes.len();
        let mut list = Vec::with_capacity(total);
        for flat in 0..total {
            let mut rem = flat;
            let mut components = vec![0.0; d];
            for j in (0..d).rev() {
                components[j] = axes[j][rem % axes[j].len()];
                rem /= axes[j].len();
            }
            list.push(Bandwidth::new(components)?);
        }
        Self::new(list, kernel, n)
    }

    pub fn len(&self) -> usize {
        self.bandwidths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bandwidths.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Bandwidth> {
        self.bandwidths.iter()
    }

    pub fn get(&self, index: usize) -> &Bandwidth {
        &self.bandwidths[index]
    }

    /// Coordinatewise minimal bandwidth (the overfitting reference).
    pub fn hmin(&self) -> &Bandwidth {
        &self.hmin
    }

    /// The largest-volume grid element.
    pub fn largest(&self) -> &Bandwidth {
        self.bandwidths.last().expect("non-empty grid")
    }

    /// False when the minimal volume sits below the admissibility floor
    /// `||K||_inf ||K||_1 / n`; recorded, never fatal.
    pub fn is_admissible(&self) -> bool {
        self.admissible
    }

    pub fn validation_n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.hmin.dim()
    }
}

/// Geometric ladder from `lo` to `hi` with `count` points.
pub fn geometric_points(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let ratio = (hi / lo).powf(1.0 / (count - 1) as f64);
    (0..count)
        .map(|k| {
            if k == count - 1 {
                hi
            } else {
                lo * ratio.powi(k as i32)
            }
        })
        .collect()
}

/// Penalty attached to the comparison criterion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum PenaltySpec {
    /// `pen_lambda(h) = (lambda ||K_h||^2 - ||K_hmin - K_h||^2) / n`.
    Family { lambda: f64 },
    /// `pen_min(h) = (2 <K_h, K_hmin> - ||K_h||^2) / n`; the level below
    /// which selection collapses onto the overfitting estimate.
    Minimal,
    /// `pen_opt(h) = 2 <K_h, K_hmin> / n`; the family at lambda = 1 up to a
    /// constant shift.
    Optimal,
}

/// Evaluates the penalty at one bandwidth.
pub fn penalty(
    spec: &PenaltySpec,
    kernel: &ProductKernel,
    h: &Bandwidth,
    hmin: &Bandwidth,
    n: usize,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("penalty needs a sample size of at least 1"));
    }
    let l2_h = kernel.l2_norm_scaled(h)?;
    let cross = kernel.cross_inner(h, hmin)?;
    let l2_hmin = kernel.l2_norm_scaled(hmin)?;
    Ok(penalty_from_scalars(spec, l2_h, cross, l2_hmin, h == hmin, n))
}

fn penalty_from_scalars(
    spec: &PenaltySpec,
    l2_h: f64,
    cross: f64,
    l2_hmin: f64,
    at_hmin: bool,
    n: usize,
) -> f64 {
    let nf = n as f64;
    match spec {
        PenaltySpec::Family { lambda } => {
            let diff = if at_hmin {
                0.0
            } else {
                (l2_hmin + l2_h - 2.0 * cross).max(0.0)
            };
            (lambda * l2_h - diff) / nf
        }
        PenaltySpec::Minimal => (2.0 * cross - l2_h) / nf,
        PenaltySpec::Optimal => 2.0 * cross / nf,
    }
}

/// One row of the selection artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionRow {
    pub bandwidth: Bandwidth,
    /// `||fhat_h - fhat_hmin||^2`, clamped to 0 when rounding leaves it
    /// within 1e-10 below zero.
    pub comparison: f64,
    pub penalty: f64,
    pub total: f64,
}

/// Per-bandwidth criterion table plus the selected index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionTable {
    pub rows: Vec<CriterionRow>,
    pub selected: usize,
    pub hmin: Bandwidth,
    pub spec: PenaltySpec,
    /// Set when the grid's minimal volume sits below the admissibility floor.
    pub admissibility_warning: bool,
}

impl CriterionTable {
    pub fn selected_bandwidth(&self) -> &Bandwidth {
        &self.rows[self.selected].bandwidth
    }

    pub fn selected_row(&self) -> &CriterionRow {
        &self.rows[self.selected]
    }
}

/// Internal consistency audit: totals decompose exactly and the comparison
/// term vanishes at the overfitting reference.
pub fn criterion_identity_check(table: &CriterionTable) -> Result<bool> {
    if table.rows.is_empty() {
        return Err(Error::invalid("criterion table has no rows"));
    }
    for row in &table.rows {
        if (row.total - (row.comparison + row.penalty)).abs() > 1e-12 {
            return Ok(false);
        }
        if row.bandwidth == table.hmin && row.comparison != 0.0 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Negative comparison values within this tolerance of zero are rounded up.
const COMPARISON_CLAMP: f64 = 1e-10;

/// Mean of a convolution evaluator over all observation pairs,
/// `(1/n^2) sum_{i,j} C(X_i - X_j)`, diagonal included.
///
/// Evaluators are even, so the sum runs over ordered pairs `i < j` of the
/// lexicographically sorted sample and is doubled; for the univariate case
/// the inner loop stops once the gap exceeds the evaluator's support.
pub(crate) fn mean_pair_conv(sample: &Sample, conv: &ConvEvaluator) -> f64 {
    let n = sample.n();
    let nf = n as f64;
    let mut acc = KahanSum::new();
    if sample.dim() == 1 {
        let xs = sample.flat_data();
        let axis = &conv.axes()[0];
        let cutoff = axis.cutoff();
        for i in 0..n {
            let xi = xs[i];
            for &xj in &xs[i + 1..] {
                let t = xj - xi;
                if t >= cutoff {
                    break;
                }
                acc.add(axis.eval(t));
            }
        }
    } else {
        let d = sample.dim();
        let mut diff = vec![0.0; d];
        for i in 0..n {
            let pi = sample.point(i);
            for j in (i + 1)..n {
                let pj = sample.point(j);
                for k in 0..d {
                    diff[k] = pi[k] - pj[k];
                }
                acc.add(conv.eval(&diff));
            }
        }
    }
    let diag = nf * conv.eval_at_zero();
    (diag + 2.0 * acc.total()) / (nf * nf)
}

/// `||fhat_h - fhat_hmin||^2` via the pair-sum identity
/// `(1/n^2) sum_{i,j} G(X_i - X_j)` with `G` the pair interaction.
pub fn comparison_term(
    sample: &Sample,
    kernel: &ProductKernel,
    h: &Bandwidth,
    hmin: &Bandwidth,
) -> Result<f64> {
    let d = sample.dim();
    if kernel.dim() != d || h.dim() != d || hmin.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: kernel.dim().max(h.dim()).max(hmin.dim()),
        });
    }
    if h == hmin {
        return Ok(0.0);
    }
    let s_hh = mean_pair_conv(sample, &kernel.conv_evaluator(h, h));
    let s_hm = mean_pair_conv(sample, &kernel.conv_evaluator(h, hmin));
    let s_mm = mean_pair_conv(sample, &kernel.conv_evaluator(hmin, hmin));
    Ok(clamp_comparison(s_hh - 2.0 * s_hm + s_mm))
}

fn clamp_comparison(value: f64) -> f64 {
    if (-COMPARISON_CLAMP..0.0).contains(&value) {
        0.0
    } else {
        value
    }
}

/// Cached selection machinery for one (kernel, grid) pair.
///
/// Construction tabulates every convolution evaluator and norm scalar the
/// criterion needs; [`SelectionEngine::select`] then costs one pair-sum pass
/// per grid element, and penalty sweeps reuse the same comparisons.
pub struct SelectionEngine<'a> {
    kernel: &'a ProductKernel,
    grid: &'a BandwidthGrid,
    diag: ConvEvaluator,
    per_element: Vec<ElementCache>,
    l2_hmin: f64,
}

struct ElementCache {
    conv_hh: ConvEvaluator,
    conv_hm: ConvEvaluator,
    l2: f64,
    cross: f64,
    at_hmin: bool,
}

impl<'a> SelectionEngine<'a> {
    pub fn new(kernel: &'a ProductKernel, grid: &'a BandwidthGrid) -> Result<Self> {
        if grid.dim() != kernel.dim() {
            return Err(Error::DimensionMismatch {
                expected: kernel.dim(),
                got: grid.dim(),
            });
        }
        let hmin = grid.hmin();
        let diag = kernel.conv_evaluator(hmin, hmin);
        let per_element = exec::map_indices(grid.len(), |j| {
            let h = grid.get(j);
            ElementCache {
                conv_hh: kernel.conv_evaluator(h, h),
                conv_hm: kernel.conv_evaluator(h, hmin),
                l2: kernel.l2_norm_scaled(h).expect("validated grid"),
                cross: kernel.cross_inner(h, hmin).expect("validated grid"),
                at_hmin: h == hmin,
            }
        });
        let l2_hmin = kernel.l2_norm_scaled(hmin)?;
        Ok(SelectionEngine {
            kernel,
            grid,
            diag,
            per_element,
            l2_hmin,
        })
    }

    pub fn grid(&self) -> &BandwidthGrid {
        self.grid
    }

    /// Comparison terms `||fhat_h - fhat_hmin||^2` for every grid element.
    pub fn comparison_terms(&self, sample: &Sample) -> Result<Vec<f64>> {
        if sample.dim() != self.kernel.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.kernel.dim(),
                got: sample.dim(),
            });
        }
        let s_mm = mean_pair_conv(sample, &self.diag);
        Ok(exec::map_slice(&self.per_element, |cache| {
            if cache.at_hmin {
                return 0.0;
            }
            let s_hh = mean_pair_conv(sample, &cache.conv_hh);
            let s_hm = mean_pair_conv(sample, &cache.conv_hm);
            clamp_comparison(s_hh - 2.0 * s_hm + s_mm)
        }))
    }

    /// Assembles the criterion table from precomputed comparison terms.
    pub fn select_with_comparisons_n(
        &self,
        comparisons: &[f64],
        spec: &PenaltySpec,
        n: usize,
    ) -> CriterionTable {
        assert_eq!(comparisons.len(), self.grid.len());
        let rows: Vec<CriterionRow> = self
            .per_element
            .iter()
            .zip(comparisons)
            .enumerate()
            .map(|(j, (cache, &comparison))| {
                let pen = penalty_from_scalars(
                    spec,
                    cache.l2,
                    cache.cross,
                    self.l2_hmin,
                    cache.at_hmin,
                    n,
                );
                CriterionRow {
                    bandwidth: self.grid.get(j).clone(),
                    comparison,
                    penalty: pen,
                    total: comparison + pen,
                }
            })
            .collect();
        let selected = argmin_rows(&rows);
        CriterionTable {
            rows,
            selected,
            hmin: self.grid.hmin().clone(),
            spec: *spec,
            admissibility_warning: !self.grid.is_admissible(),
        }
    }

    /// Like [`Self::select_with_comparisons_n`] with the grid's validation
    /// sample size.
    pub fn select_with_comparisons(
        &self,
        comparisons: &[f64],
        spec: &PenaltySpec,
    ) -> CriterionTable {
        self.select_with_comparisons_n(comparisons, spec, self.grid.validation_n())
    }

    /// Full selection: one pair-sum pass, then the penalized argmin.
    pub fn select(&self, sample: &Sample, spec: &PenaltySpec) -> Result<CriterionTable> {
        let comparisons = self.comparison_terms(sample)?;
        Ok(self.select_with_comparisons_n(&comparisons, spec, sample.n()))
    }
}

/// Argmin with ties broken toward the largest bandwidth volume.
fn argmin_rows(rows: &[CriterionRow]) -> usize {
    let mut best = 0;
    for (j, row) in rows.iter().enumerate().skip(1) {
        let better = row.total < rows[best].total
            || (row.total == rows[best].total
                && row.bandwidth.volume() > rows[best].bandwidth.volume());
        if better {
            best = j;
        }
    }
    best
}

/// Selects a bandwidth by minimizing the penalized comparison criterion.
pub fn select_bandwidth(
    sample: &Sample,
    kernel: &ProductKernel,
    grid: &BandwidthGrid,
    spec: &PenaltySpec,
) -> Result<CriterionTable> {
    SelectionEngine::new(kernel, grid)?.select(sample, spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kde;
    use crate::kernels::Kernel;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn gaussian_pk() -> ProductKernel {
        ProductKernel::univariate(Kernel::gaussian())
    }

    fn normal_sample(n: usize, seed: u64) -> Sample {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = rand_distr::Normal::new(0.0, 1.0).unwrap();
        Sample::univariate((0..n).map(|_| normal.sample(&mut rng)).collect()).unwrap()
    }

    #[test]
    fn comparison_term_is_zero_at_hmin() {
        let sample = normal_sample(20, 1);
        let pk = gaussian_pk();
        let h = Bandwidth::scalar(0.2).unwrap();
        assert_eq!(comparison_term(&sample, &pk, &h, &h).unwrap(), 0.0);
    }

    #[test]
    fn comparison_term_single_observation_is_diff_norm() {
        let sample = Sample::univariate(vec![0.37]).unwrap();
        let pk = gaussian_pk();
        let h = Bandwidth::scalar(0.5).unwrap();
        let hmin = Bandwidth::scalar(0.1).unwrap();
        let comp = comparison_term(&sample, &pk, &h, &hmin).unwrap();
        let diff = pk.diff_l2_norm(&h, &hmin).unwrap();
        assert!((comp - diff).abs() < 1e-12);
    }

    #[test]
    fn comparison_term_matches_grid_quadrature() {
        let sample = normal_sample(50, 7);
        let pk = gaussian_pk();
        let h = Bandwidth::scalar(0.5).unwrap();
        let hmin = Bandwidth::scalar(0.05).unwrap();
        let comp = comparison_term(&sample, &pk, &h, &hmin).unwrap();
        let grid = kde::grid_with(&sample, &h, 8193).unwrap();
        let est_h = kde::estimate_on_grid(&sample, &pk, &h, &grid).unwrap();
        let est_m = kde::estimate_on_grid(&sample, &pk, &hmin, &grid).unwrap();
        let oracle = kde::l2_distance_sq(&est_h, &est_m).unwrap();
        assert!(
            ((comp - oracle) / oracle).abs() < 1e-4,
            "pair sum {comp} vs quadrature {oracle}"
        );
    }

    #[test]
    fn penalty_examples_from_kernel_scalars() {
        let pk = gaussian_pk();
        let hmin = Bandwidth::scalar(0.1).unwrap();
        let n = 100;
        // At h = hmin the difference term vanishes.
        let at_min = penalty(&PenaltySpec::Family { lambda: 1.0 }, &pk, &hmin, &hmin, n).unwrap();
        let expected = pk.l2_norm_scaled(&hmin).unwrap() / n as f64;
        assert!((at_min - expected).abs() < 1e-15);

        let h = Bandwidth::scalar(0.5).unwrap();
        let fam = penalty(&PenaltySpec::Family { lambda: 1.0 }, &pk, &h, &hmin, n).unwrap();
        assert!((fam - (-0.01256168)).abs() < 1e-7, "family penalty {fam}");

        // optimal - minimal = ||K_h||^2 / n for every h.
        for hv in [0.05, 0.3, 0.9] {
            let hb = Bandwidth::scalar(hv).unwrap();
            let opt = penalty(&PenaltySpec::Optimal, &pk, &hb, &hmin, n).unwrap();
            let min = penalty(&PenaltySpec::Minimal, &pk, &hb, &hmin, n).unwrap();
            let l2 = pk.l2_norm_scaled(&hb).unwrap() / n as f64;
            assert!((opt - min - l2).abs() < 1e-15);
        }

        assert!(penalty(&PenaltySpec::Optimal, &pk, &h, &hmin, 0).is_err());
    }

    #[test]
    fn singleton_grid_selects_its_element() {
        let sample = normal_sample(30, 3);
        let pk = gaussian_pk();
        let grid = BandwidthGrid::new(
            vec![Bandwidth::scalar(0.4).unwrap()],
            &pk,
            sample.n(),
        )
        .unwrap();
        let table =
            select_bandwidth(&sample, &pk, &grid, &PenaltySpec::Family { lambda: 1.0 }).unwrap();
        assert_eq!(table.selected, 0);
        assert_eq!(table.selected_bandwidth().components()[0], 0.4);
    }

    #[test]
    fn selection_is_exhaustive_argmin_with_volume_tie_break() {
        let sample = normal_sample(60, 5);
        let pk = gaussian_pk();
        let grid = BandwidthGrid::geometric(0.02, 1.0, 12, &pk, sample.n()).unwrap();
        let table =
            select_bandwidth(&sample, &pk, &grid, &PenaltySpec::Family { lambda: 1.0 }).unwrap();
        for row in &table.rows {
            let selected = table.selected_row();
            assert!(
                selected.total < row.total
                    || (selected.total == row.total
                        && selected.bandwidth.volume() >= row.bandwidth.volume())
            );
        }
        assert!(criterion_identity_check(&table).unwrap());
    }

    #[test]
    fn additive_penalty_shift_leaves_selection_unchanged() {
        let sample = normal_sample(40, 11);
        let pk = gaussian_pk();
        let grid = BandwidthGrid::geometric(0.05, 1.0, 10, &pk, sample.n()).unwrap();
        let table =
            select_bandwidth(&sample, &pk, &grid, &PenaltySpec::Family { lambda: 0.7 }).unwrap();
        for shift in [-3.0, 1e-6, 42.0] {
            let shifted: Vec<CriterionRow> = table
                .rows
                .iter()
                .map(|r| CriterionRow {
                    bandwidth: r.bandwidth.clone(),
                    comparison: r.comparison,
                    penalty: r.penalty + shift,
                    total: r.total + shift,
                })
                .collect();
            assert_eq!(argmin_rows(&shifted), table.selected);
        }
    }

    #[test]
    fn penalty_mode_equivalences_hold_on_random_fixtures() {
        let pk = gaussian_pk();
        for seed in 0..10 {
            let sample = normal_sample(32, seed);
            let grid = BandwidthGrid::geometric(0.03, 0.8, 9, &pk, sample.n()).unwrap();
            let engine = SelectionEngine::new(&pk, &grid).unwrap();
            let comparisons = engine.comparison_terms(&sample).unwrap();
            let fam1 =
                engine.select_with_comparisons(&comparisons, &PenaltySpec::Family { lambda: 1.0 });
            let opt = engine.select_with_comparisons(&comparisons, &PenaltySpec::Optimal);
            assert_eq!(fam1.selected, opt.selected, "seed {seed}");
            let fam0 =
                engine.select_with_comparisons(&comparisons, &PenaltySpec::Family { lambda: 0.0 });
            let min = engine.select_with_comparisons(&comparisons, &PenaltySpec::Minimal);
            assert_eq!(fam0.selected, min.selected, "seed {seed}");
        }
    }

    #[test]
    fn comparison_scales_inversely_with_dilation() {
        let data = vec![0.4, -0.8, 1.3, 0.1, -0.2, 2.0, 0.9, -1.5];
        let pk = gaussian_pk();
        let h = Bandwidth::scalar(0.5).unwrap();
        let hmin = Bandwidth::scalar(0.08).unwrap();
        let base = comparison_term(
            &Sample::univariate(data.clone()).unwrap(),
            &pk,
            &h,
            &hmin,
        )
        .unwrap();
        let s = 3.0;
        let scaled = comparison_term(
            &Sample::univariate(data.iter().map(|x| x * s).collect()).unwrap(),
            &pk,
            &Bandwidth::scalar(0.5 * s).unwrap(),
            &Bandwidth::scalar(0.08 * s).unwrap(),
        )
        .unwrap();
        assert!(((scaled - base / s) / (base / s)).abs() < 1e-8);
    }

    #[test]
    fn identity_check_flags_perturbed_rows_and_empty_tables() {
        let sample = normal_sample(25, 2);
        let pk = gaussian_pk();
        let grid = BandwidthGrid::geometric(0.05, 0.5, 6, &pk, sample.n()).unwrap();
        let mut table =
            select_bandwidth(&sample, &pk, &grid, &PenaltySpec::Optimal).unwrap();
        assert!(criterion_identity_check(&table).unwrap());
        table.rows[2].total += 1e-6;
        assert!(!criterion_identity_check(&table).unwrap());
        table.rows.clear();
        assert!(criterion_identity_check(&table).is_err());
    }

    #[test]
    fn selection_is_deterministic() {
        let sample = normal_sample(80, 17);
        let pk = gaussian_pk();
        let grid = BandwidthGrid::geometric(0.02, 1.0, 20, &pk, sample.n()).unwrap();
        let a = select_bandwidth(&sample, &pk, &grid, &PenaltySpec::Optimal).unwrap();
        let b = select_bandwidth(&sample, &pk, &grid, &PenaltySpec::Optimal).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn grid_construction_sorts_and_validates() {
        let pk = gaussian_pk();
        let grid = BandwidthGrid::new(
            vec![
                Bandwidth::scalar(0.5).unwrap(),
                Bandwidth::scalar(0.1).unwrap(),
                Bandwidth::scalar(0.3).unwrap(),
            ],
            &pk,
            100,
        )
        .unwrap();
        let volumes: Vec<f64> = grid.iter().map(|h| h.volume()).collect();
        assert_eq!(volumes, vec![0.1, 0.3, 0.5]);
        assert_eq!(grid.hmin().components()[0], 0.1);
        assert!(grid.is_admissible());

        assert!(BandwidthGrid::new(vec![], &pk, 100).is_err());

        // A grid reaching below the admissibility floor flags but constructs.
        let tight = BandwidthGrid::geometric(1e-6, 0.5, 5, &pk, 100).unwrap();
        assert!(!tight.is_admissible());
    }

    #[test]
    fn product_grid_cap_and_hmin_synthesis() {
        let pk2 = ProductKernel::new(Kernel::gaussian(), 2).unwrap();
        let grid =
            BandwidthGrid::product(&[vec![0.2, 0.4], vec![0.3, 0.1]], &pk2, 50).unwrap();
        assert_eq!(grid.len(), 4);
        assert_eq!(grid.hmin().components(), &[0.2, 0.1]);

        let axis: Vec<f64> = (1..=400).map(|k| k as f64 * 1e-3).collect();
        assert!(BandwidthGrid::product(&[axis.clone(), axis], &pk2, 50).is_err());
    }

    #[test]
    fn multivariate_comparison_matches_quadrature() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let normal = rand_distr::Normal::new(0.0, 1.0).unwrap();
        let data: Vec<f64> = (0..60).map(|_| normal.sample(&mut rng)).collect();
        let sample = Sample::new(data, 2).unwrap();
        let pk = ProductKernel::new(Kernel::gaussian(), 2).unwrap();
        let h = Bandwidth::new(vec![0.6, 0.4]).unwrap();
        let hmin = Bandwidth::new(vec![0.15, 0.2]).unwrap();
        let comp = comparison_term(&sample, &pk, &h, &hmin).unwrap();
        let grid = kde::grid_with(&sample, &h, 257).unwrap();
        let est_h = kde::estimate_on_grid(&sample, &pk, &h, &grid).unwrap();
        let est_m = kde::estimate_on_grid(&sample, &pk, &hmin, &grid).unwrap();
        let oracle = kde::l2_distance_sq(&est_h, &est_m).unwrap();
        assert!(
            ((comp - oracle) / oracle).abs() < 1e-4,
            "pair sum {comp} vs quadrature {oracle}"
        );
    }
}
