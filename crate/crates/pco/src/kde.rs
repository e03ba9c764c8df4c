//! Kernel density estimator evaluation: pointwise, on grids, and the
//! population-level smoothing `f_h = K_h * f` for known test densities.
//!
//! This is the ground-truth path: direct O(n m) summation over observations
//! in a fixed order with compensated accumulation. Faster routes elsewhere in
//! the crate (pair-sum identities, interpolation tables) are tested against
//! quadrature on the grids produced here.

use crate::error::{Error, Result};
use crate::exec;
use crate::kernels::{Bandwidth, ProductKernel};
use crate::numeric::{integrate_uniform, KahanSum};
use crate::risklab::Density;
use crate::{quad, risklab};

/// An i.i.d. sample of d-dimensional observations, stored flat row-major.
///
/// Observations are normalized to lexicographic order at construction, so
/// every fixed-order reduction downstream is invariant under permutations of
/// the input.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    data: Vec<f64>,
    n: usize,
    d: usize,
}

impl Sample {
    /// Builds a sample from flat row-major data with `d` columns.
    pub fn new(data: Vec<f64>, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("sample dimension must be at least 1"));
        }
        if data.is_empty() || !data.len().is_multiple_of(d) {
            return Err(Error::invalid(format!(
                "sample data length {} is not a positive multiple of d={d}",
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite observation {bad}")));
        }
        let n = data.len() / d;
        let mut rows: Vec<&[f64]> = data.chunks(d).collect();
        rows.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let sorted: Vec<f64> = rows.into_iter().flatten().copied().collect();
        Ok(Sample {
            data: sorted,
            n,
            d,
        })
    }

    /// Convenience constructor for univariate data.
    pub fn univariate(values: Vec<f64>) -> Result<Self> {
        Self::new(values, 1)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    /// Flat row-major observations, in the normalized (sorted) order.
    pub fn flat_data(&self) -> &[f64] {
        &self.data
    }

    pub fn iter_points(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.d)
    }

    /// Per-axis (min, max) envelope of the observations.
    pub fn bounds(&self) -> Vec<(f64, f64)> {
        let mut bounds = vec![(f64::INFINITY, f64::NEG_INFINITY); self.d];
        for point in self.iter_points() {
            for (j, &x) in point.iter().enumerate() {
                bounds[j].0 = bounds[j].0.min(x);
                bounds[j].1 = bounds[j].1.max(x);
            }
        }
        bounds
    }
}

/// Evaluates `f_h(x) = (1/n) sum_i K_h(x - X_i)` at flat row-major `points`.
///
/// The sum over observations runs in the sample's fixed order with Kahan
/// compensation; query points may be evaluated concurrently.
pub fn evaluate(
    sample: &Sample,
    kernel: &ProductKernel,
    h: &Bandwidth,
    points: &[f64],
) -> Result<Vec<f64>> {
    let d = sample.dim();
    if kernel.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: kernel.dim(),
        });
    }
    if h.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: h.dim(),
        });
    }
    if !points.len().is_multiple_of(d) {
        return Err(Error::invalid(format!(
            "query data length {} is not a multiple of d={d}",
            points.len()
        )));
    }
    let m = points.len() / d;
    let inv_n = 1.0 / sample.n() as f64;
    if d == 1 {
        // Hot path shared by every experiment.
        let axis = kernel.axis();
        let hw = h.components()[0];
        let values = exec::map_indices(m, |q| {
            let x = points[q];
            let mut acc = KahanSum::new();
            for &xi in &sample.data {
                acc.add(axis.eval_scaled(hw, x - xi));
            }
            acc.total() * inv_n
        });
        return Ok(values);
    }
    let values = exec::map_indices(m, |q| {
        let mut diff = vec![0.0; d];
        let x = &points[q * d..(q + 1) * d];
        let mut acc = KahanSum::new();
        for point in sample.iter_points() {
            for j in 0..d {
                diff[j] = x[j] - point[j];
            }
            acc.add(kernel.eval(h, &diff));
        }
        acc.total() * inv_n
    });
    Ok(values)
}

/// An equispaced evaluation grid, one axis per dimension.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EvalGrid {
    pub axes: Vec<GridAxis>,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GridAxis {
    pub start: f64,
    pub step: f64,
    pub count: usize,
}

impl GridAxis {
    pub fn new(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if count < 2 || !lo.is_finite() || !hi.is_finite() || hi <= lo {
            return Err(Error::invalid("grid axis needs hi > lo and count >= 2"));
        }
        Ok(GridAxis {
            start: lo,
            step: (hi - lo) / (count - 1) as f64,
            count,
        })
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.count)
            .map(|k| self.start + k as f64 * self.step)
            .collect()
    }
}

impl EvalGrid {
    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat row-major list of grid points.
    pub fn flatten(&self) -> Vec<f64> {
        let d = self.dim();
        let total = self.len();
        let axis_points: Vec<Vec<f64>> = self.axes.iter().map(|a| a.points()).collect();
        let mut out = Vec::with_capacity(total * d);
        for flat in 0..total {
            let mut rem = flat;
            for j in (0..d).rev() {
                let c = self.axes[j].count;
                let idx = rem % c;
                rem /= c;
                out.push(axis_points[j][idx]);
            }
            let slot = out.len() - d;
            out[slot..].reverse();
        }
        out
    }

    /// Tensor quadrature of tabulated values over this grid (Simpson per
    /// axis when the axis count is odd, trapezoid otherwise).
    pub fn integrate(&self, values: &[f64]) -> f64 {
        assert_eq!(values.len(), self.len());
        match self.axes.len() {
            1 => integrate_uniform(values, self.axes[0].step),
            2 => {
                let (rows, cols) = (self.axes[0].count, self.axes[1].count);
                let row_integrals: Vec<f64> = (0..rows)
                    .map(|r| {
                        integrate_uniform(&values[r * cols..(r + 1) * cols], self.axes[1].step)
                    })
                    .collect();
                integrate_uniform(&row_integrals, self.axes[0].step)
            }
            d => panic!("grid integration implemented for d <= 2, got {d}"),
        }
    }
}

/// A kernel density estimate tabulated on an evaluation grid.
#[derive(Debug, Clone)]
pub struct DensityEstimate {
    pub bandwidth: Bandwidth,
    pub grid: EvalGrid,
    pub values: Vec<f64>,
}

/// Default evaluation grid: 1024 points per axis spanning the observations
/// plus a margin of four times the largest grid bandwidth on every side.
pub fn default_grid(sample: &Sample, h_max: &Bandwidth) -> Result<EvalGrid> {
    grid_with(sample, h_max, 1024)
}

/// Like [`default_grid`] with a caller-chosen per-axis point count (odd
/// counts give Simpson integration).
pub fn grid_with(sample: &Sample, h_max: &Bandwidth, count: usize) -> Result<EvalGrid> {
    let axes = sample
        .bounds()
        .iter()
        .zip(h_max.components())
        .map(|(&(lo, hi), &h)| GridAxis::new(lo - 4.0 * h, hi + 4.0 * h, count))
        .collect::<Result<Vec<_>>>()?;
    Ok(EvalGrid { axes })
}

/// Tabulates `f_h` on a grid.
pub fn estimate_on_grid(
    sample: &Sample,
    kernel: &ProductKernel,
    h: &Bandwidth,
    grid: &EvalGrid,
) -> Result<DensityEstimate> {
    let points = grid.flatten();
    let values = evaluate(sample, kernel, h, &points)?;
    Ok(DensityEstimate {
        bandwidth: h.clone(),
        grid: grid.clone(),
        values,
    })
}

/// Grid quadrature of the squared L2 distance between two estimates on a
/// shared grid. This is the slow independent route used to audit pair sums.
pub fn l2_distance_sq(a: &DensityEstimate, b: &DensityEstimate) -> Result<f64> {
    if a.grid != b.grid {
        return Err(Error::invalid(
            "estimates must share an evaluation grid for L2 distance",
        ));
    }
    let squared: Vec<f64> = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(&x, &y)| (x - y) * (x - y))
        .collect();
    Ok(a.grid.integrate(&squared))
}

/// Population smoothing `f_h(x) = (K_h * f)(x)` for a registered univariate
/// test density, by quadrature at tolerance 1e-6.
pub fn population_smoothing(
    f: &Density,
    kernel: &ProductKernel,
    h: &Bandwidth,
    points: &[f64],
) -> Result<Vec<f64>> {
    if kernel.dim() != 1 || h.dim() != 1 {
        return Err(Error::Unsupported(
            "population smoothing is defined for univariate densities".into(),
        ));
    }
    let hw = h.components()[0];
    let axis = kernel.axis();
    let half = hw * axis.support_halfwidth();
    let (flo, fhi) = risklab::effective_support(f);
    let kinks = axis.scale_breakpoints();
    let values = exec::map_indices(points.len(), |q| {
        let x = points[q];
        let lo = (x - half).max(flo);
        let hi = (x + half).min(fhi);
        let mut breaks = f.breakpoints();
        breaks.extend(kinks.iter().map(|b| x - b * hw));
        quad::integrate_piecewise(|y| axis.eval_scaled(hw, x - y) * f.pdf(y), lo, hi, &breaks)
    });
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::Kernel;

    fn gaussian_pk() -> ProductKernel {
        ProductKernel::univariate(Kernel::gaussian())
    }

    #[test]
    fn single_point_gaussian_at_origin() {
        let sample = Sample::univariate(vec![0.0]).unwrap();
        let h = Bandwidth::scalar(1.0).unwrap();
        let v = evaluate(&sample, &gaussian_pk(), &h, &[0.0]).unwrap();
        assert!((v[0] - 0.3989422804014327).abs() < 1e-15);
    }

    #[test]
    fn epanechnikov_support_excludes_unit_offsets() {
        let sample = Sample::univariate(vec![-1.0, 1.0]).unwrap();
        let pk = ProductKernel::univariate(Kernel::epanechnikov());
        let h = Bandwidth::scalar(1.0).unwrap();
        let v = evaluate(&sample, &pk, &h, &[0.0]).unwrap();
        assert_eq!(v[0], 0.0);
    }

    #[test]
    fn estimate_mass_is_one_on_covering_grid() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let normal = rand_distr::Normal::new(0.0, 1.0).unwrap();
        let data: Vec<f64> = (0..100).map(|_| normal.sample(&mut rng)).collect();
        let sample = Sample::univariate(data).unwrap();
        let h = Bandwidth::scalar(0.3).unwrap();
        let grid = EvalGrid {
            axes: vec![GridAxis::new(-6.0, 6.0, 2049).unwrap()],
        };
        let est = estimate_on_grid(&sample, &gaussian_pk(), &h, &grid).unwrap();
        let mass = grid.integrate(&est.values);
        assert!((mass - 1.0).abs() < 0.01, "mass {mass}");
        assert!(est.values.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn linearity_in_the_sample() {
        let a = vec![0.3, -0.2, 1.4];
        let b = vec![0.9, -1.1];
        let joint = Sample::univariate(a.iter().chain(&b).copied().collect()).unwrap();
        let sa = Sample::univariate(a.clone()).unwrap();
        let sb = Sample::univariate(b.clone()).unwrap();
        let pk = gaussian_pk();
        let h = Bandwidth::scalar(0.4).unwrap();
        let points = [-1.0, 0.0, 0.5, 2.0];
        let vj = evaluate(&joint, &pk, &h, &points).unwrap();
        let va = evaluate(&sa, &pk, &h, &points).unwrap();
        let vb = evaluate(&sb, &pk, &h, &points).unwrap();
        let (na, nb) = (a.len() as f64, b.len() as f64);
        for i in 0..points.len() {
            let mixed = (na * va[i] + nb * vb[i]) / (na + nb);
            assert!((vj[i] - mixed).abs() < 1e-12);
        }
    }

    #[test]
    fn translation_equivariance() {
        let data = vec![0.3, -0.2, 1.4, 0.9];
        let shift = 5.25;
        let sample = Sample::univariate(data.clone()).unwrap();
        let shifted =
            Sample::univariate(data.iter().map(|x| x + shift).collect()).unwrap();
        let pk = gaussian_pk();
        let h = Bandwidth::scalar(0.4).unwrap();
        let points = [-0.5, 0.1, 1.0];
        let moved: Vec<f64> = points.iter().map(|x| x + shift).collect();
        let v0 = evaluate(&sample, &pk, &h, &points).unwrap();
        let v1 = evaluate(&shifted, &pk, &h, &moved).unwrap();
        for i in 0..points.len() {
            assert!((v0[i] - v1[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn permutation_of_sample_is_exact() {
        let data = vec![0.7, -0.4, 2.2, 0.0, 1.1];
        let mut reversed = data.clone();
        reversed.reverse();
        let s1 = Sample::univariate(data).unwrap();
        let s2 = Sample::univariate(reversed).unwrap();
        assert_eq!(s1, s2);
    }

    #[test]
    fn population_smoothing_gaussian_identity() {
        let f = Density::StandardNormal;
        let pk = gaussian_pk();
        for h in [0.2, 0.7] {
            let hb = Bandwidth::scalar(h).unwrap();
            let smoothed = population_smoothing(&f, &pk, &hb, &[0.0]).unwrap();
            let expected = 1.0 / (2.0 * std::f64::consts::PI * (1.0 + h * h)).sqrt();
            assert!(
                (smoothed[0] - expected).abs() < 1e-6,
                "h={h}: {} vs {expected}",
                smoothed[0]
            );
        }
    }

    #[test]
    fn population_smoothing_approximate_identity() {
        let f = Density::StandardNormal;
        let pk = gaussian_pk();
        let hb = Bandwidth::scalar(1e-3).unwrap();
        let smoothed = population_smoothing(&f, &pk, &hb, &[0.0]).unwrap();
        let f0 = 0.3989422804014327;
        assert!((smoothed[0] - f0).abs() < 1e-3);
    }

    #[test]
    fn population_smoothing_uniform_interior() {
        let f = Density::Uniform { lo: 0.0, hi: 1.0 };
        let pk = gaussian_pk();
        let hb = Bandwidth::scalar(0.1).unwrap();
        let smoothed = population_smoothing(&f, &pk, &hb, &[0.5]).unwrap();
        assert!((smoothed[0] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn sample_validation_errors() {
        assert!(Sample::univariate(vec![]).is_err());
        assert!(Sample::univariate(vec![f64::NAN]).is_err());
        assert!(Sample::new(vec![1.0, 2.0, 3.0], 2).is_err());
        assert!(Sample::new(vec![1.0], 0).is_err());
    }

    #[test]
    fn grid_flatten_row_major_2d() {
        let grid = EvalGrid {
            axes: vec![
                GridAxis::new(0.0, 1.0, 2).unwrap(),
                GridAxis::new(10.0, 12.0, 3).unwrap(),
            ],
        };
        let flat = grid.flatten();
        assert_eq!(
            flat,
            vec![
                0.0, 10.0, 0.0, 11.0, 0.0, 12.0, //
                1.0, 10.0, 1.0, 11.0, 1.0, 12.0
            ]
        );
    }
}
