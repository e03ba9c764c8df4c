//! Kernel families, bandwidth rescalings, and the norms and inner products
//! entering every comparison criterion and penalty.
//!
//! A kernel is stored as a scale mixture of a base shape (Gaussian or
//! Epanechnikov): `K(u) = sum_i w_i (1/s_i) B(u/s_i)`. Plain kernels are the
//! single-term mixture; higher-order kernels built by [`Kernel::with_order`]
//! aggregate rescaled copies so that low-order moments cancel. The mixture
//! form gives closed-form L2 inner products for both bases and closed-form
//! convolutions for the Gaussian base; Epanechnikov convolutions at nonzero
//! offsets go through piecewise Gauss-Legendre quadrature.
//!
//! Everything is pure once constructed; evaluators can be shared freely
//! across threads.

use crate::error::{Error, Result};
use crate::numeric::InterpTable;
use crate::quad;

const INV_SQRT_2PI: f64 = 0.3989422804014327;

/// Effective half-support of the standard Gaussian shape, in bandwidth units.
/// Quadrature domains for Gaussian kernels are truncated here.
pub const GAUSSIAN_SUPPORT: f64 = 12.0;

/// Node count of the cached convolution tables used by O(n^2) pair sums.
pub(crate) const CONV_TABLE_NODES: usize = 4096;

/// Base kernel shapes. Both are symmetric, bounded, and integrate to one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseKernel {
    Gaussian,
    Epanechnikov,
}

impl BaseKernel {
    #[inline]
    fn eval(self, u: f64) -> f64 {
        match self {
            BaseKernel::Gaussian => INV_SQRT_2PI * (-0.5 * u * u).exp(),
            BaseKernel::Epanechnikov => {
                if u.abs() < 1.0 {
                    0.75 * (1.0 - u * u)
                } else {
                    0.0
                }
            }
        }
    }

    fn support_halfwidth(self) -> f64 {
        match self {
            BaseKernel::Gaussian => GAUSSIAN_SUPPORT,
            BaseKernel::Epanechnikov => 1.0,
        }
    }

    fn name(self) -> &'static str {
        match self {
            BaseKernel::Gaussian => "gaussian",
            BaseKernel::Epanechnikov => "epanechnikov",
        }
    }
}

/// Inner product of two rescaled base shapes, `<B_p, B_q>` with
/// `B_p(x) = (1/p) B(x/p)`. Closed form for both bases.
fn base_pair_inner(base: BaseKernel, p: f64, q: f64) -> f64 {
    match base {
        BaseKernel::Gaussian => {
            1.0 / (2.0 * std::f64::consts::PI * (p * p + q * q)).sqrt()
        }
        BaseKernel::Epanechnikov => {
            let (lo, hi) = if p <= q { (p, q) } else { (q, p) };
            let r = lo / hi;
            0.75 / hi * (1.0 - r * r / 5.0)
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct MixtureTerm {
    weight: f64,
    scale: f64,
}

/// A symmetric, integrable, bounded univariate kernel with cached norms.
#[derive(Debug, Clone)]
pub struct Kernel {
    base: BaseKernel,
    terms: Vec<MixtureTerm>,
    order: usize,
    id: String,
    l1: f64,
    sup: f64,
    l2sq: f64,
    support: f64,
}

impl Kernel {
    /// The standard Gaussian kernel.
    pub fn gaussian() -> Self {
        Self::plain(BaseKernel::Gaussian)
    }

    /// The Epanechnikov kernel `0.75 (1 - u^2)` on `[-1, 1]`.
    pub fn epanechnikov() -> Self {
        Self::plain(BaseKernel::Epanechnikov)
    }

    fn plain(base: BaseKernel) -> Self {
        let (l1, sup, l2sq) = match base {
            // ||K||_1 = 1, ||K||_inf = 1/sqrt(2 pi), ||K||^2 = 1/(2 sqrt(pi))
            BaseKernel::Gaussian => (1.0, INV_SQRT_2PI, 0.5 / std::f64::consts::PI.sqrt()),
            // ||K||_1 = 1, ||K||_inf = 3/4, ||K||^2 = 3/5
            BaseKernel::Epanechnikov => (1.0, 0.75, 0.6),
        };
        Kernel {
            base,
            terms: vec![MixtureTerm {
                weight: 1.0,
                scale: 1.0,
            }],
            order: 2,
            id: base.name().to_string(),
            l1,
            sup,
            l2sq,
            support: base.support_halfwidth(),
        }
    }

    /// Builds a kernel whose moments of orders `1..l-1` vanish, by
    /// aggregating rescaled copies of the base shape:
    /// `K_l(u) = sum_{i=1..m} C(m,i) (-1)^{i+1} (1/i) K(u/i)`.
    /// Symmetry cancels odd moments; the alternating binomial weights cancel
    /// even moments below `m`, so `m = l-1` (`l` even) or `m = l` suffices.
    pub fn with_order(base: BaseKernel, l: usize) -> Result<Self> {
        if l < 2 {
            return Err(Error::invalid(format!(
                "kernel order must be at least 2, got {l}"
            )));
        }
        let m = if l.is_multiple_of(2) { l - 1 } else { l };
        if m == 1 {
            let mut kernel = Self::plain(base);
            kernel.id = format!("order:{l}:{}", base.name());
            return Ok(kernel);
        }
        let terms: Vec<MixtureTerm> = (1..=m)
            .map(|i| MixtureTerm {
                weight: binomial(m, i) * if i % 2 == 1 { 1.0 } else { -1.0 },
                scale: i as f64,
            })
            .collect();
        let support = base.support_halfwidth() * m as f64;
        let mut kernel = Kernel {
            base,
            terms,
            order: l,
            id: format!("order:{l}:{}", base.name()),
            l1: 0.0,
            sup: 0.0,
            l2sq: 0.0,
            support,
        };
        kernel.l2sq = kernel.cross_inner_axis(1.0, 1.0);
        kernel.l1 = kernel.l1_by_quadrature();
        kernel.sup = kernel.sup_by_probe();
        Ok(kernel)
    }

    /// Parses the string identifiers `"gaussian"`, `"epanechnikov"`, and
    /// `"order:<l>:<base>"`.
    pub fn parse(id: &str) -> Result<Self> {
        match id {
            "gaussian" => Ok(Self::gaussian()),
            "epanechnikov" => Ok(Self::epanechnikov()),
            other => {
                let mut parts = other.split(':');
                if parts.next() != Some("order") {
                    return Err(Error::invalid(format!("unknown kernel id {other:?}")));
                }
                let l: usize = parts
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| Error::invalid(format!("bad kernel order in {other:?}")))?;
                let base = match parts.next() {
                    Some("gaussian") => BaseKernel::Gaussian,
                    Some("epanechnikov") => BaseKernel::Epanechnikov,
                    _ => {
                        return Err(Error::invalid(format!(
                            "unknown base kernel in {other:?}"
                        )))
                    }
                };
                if parts.next().is_some() {
                    return Err(Error::invalid(format!("unknown kernel id {other:?}")));
                }
                Self::with_order(base, l)
            }
        }
    }

    /// Pointwise value `K(u)`.
    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        let mut acc = 0.0;
        for term in &self.terms {
            acc += term.weight / term.scale * self.base.eval(u / term.scale);
        }
        acc
    }

    /// Rescaled value `K_h(u) = (1/h) K(u/h)`.
    #[inline]
    pub fn eval_scaled(&self, h: f64, u: f64) -> f64 {
        self.eval(u / h) / h
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn base(&self) -> BaseKernel {
        self.base
    }

    /// Moment-vanishing order: moments `1..order-1` vanish.
    pub fn order(&self) -> usize {
        self.order
    }

    /// Cached `||K||_1`.
    pub fn l1_norm(&self) -> f64 {
        self.l1
    }

    /// Cached `||K||_inf`.
    pub fn sup_norm(&self) -> f64 {
        self.sup
    }

    /// Cached `||K||^2`.
    pub fn l2_norm_sq(&self) -> f64 {
        self.l2sq
    }

    /// Half-width of the (possibly truncated) support, in bandwidth units.
    pub fn support_halfwidth(&self) -> f64 {
        self.support
    }

    /// `int u^k K(u) du` by quadrature; used to check the order construction.
    pub fn moment(&self, k: u32) -> f64 {
        let s = self.support;
        let breaks = self.scale_breakpoints();
        quad::integrate_piecewise(|u| u.powi(k as i32) * self.eval(u), -s, s, &breaks)
    }

    /// `<K_a, K_b>` for two rescalings of this kernel; closed form.
    pub fn cross_inner_axis(&self, a: f64, b: f64) -> f64 {
        let mut acc = 0.0;
        for ti in &self.terms {
            for tj in &self.terms {
                acc += ti.weight
                    * tj.weight
                    * base_pair_inner(self.base, a * ti.scale, b * tj.scale);
            }
        }
        acc
    }

    /// Convolution value `(K_a * K_b~)(t)`; exact path (closed form for the
    /// Gaussian base, piecewise quadrature for Epanechnikov). Even in `t`.
    pub(crate) fn conv_value_axis(&self, a: f64, b: f64, t: f64) -> f64 {
        match self.base {
            BaseKernel::Gaussian => {
                let mut acc = 0.0;
                for ti in &self.terms {
                    for tj in &self.terms {
                        let var = a * a * ti.scale * ti.scale + b * b * tj.scale * tj.scale;
                        acc += ti.weight * tj.weight * INV_SQRT_2PI / var.sqrt()
                            * (-0.5 * t * t / var).exp();
                    }
                }
                acc
            }
            BaseKernel::Epanechnikov => {
                let wa = a * self.support;
                let wb = b * self.support;
                let lo = (-wa).max(t - wb);
                let hi = wa.min(t + wb);
                if lo >= hi {
                    return 0.0;
                }
                let mut breaks = Vec::with_capacity(4 * self.terms.len());
                for term in &self.terms {
                    breaks.push(-a * term.scale);
                    breaks.push(a * term.scale);
                    breaks.push(t - b * term.scale);
                    breaks.push(t + b * term.scale);
                }
                quad::integrate_piecewise(
                    |x| self.eval_scaled(a, x) * self.eval_scaled(b, x - t),
                    lo,
                    hi,
                    &breaks,
                )
            }
        }
    }

    /// Evaluator for `(K_a * K_b~)(t)` suitable for O(n^2) inner loops: the
    /// plain Gaussian keeps its one-term closed form, every other family is
    /// tabulated once on `[0, width]` and linearly interpolated (the origin
    /// is a table node, so values at 0 are exact).
    pub(crate) fn conv_axis_evaluator(&self, a: f64, b: f64) -> AxisConv {
        if self.base == BaseKernel::Gaussian && self.terms.len() == 1 {
            let var = a * a + b * b;
            return AxisConv::Closed {
                amp: INV_SQRT_2PI / var.sqrt(),
                inv_two_var: 0.5 / var,
            };
        }
        let width = (a + b) * self.support;
        AxisConv::Table(InterpTable::build(width, CONV_TABLE_NODES, |t| {
            self.conv_value_axis(a, b, t)
        }))
    }

    /// Kink locations of the kernel shape (support edges of each mixture
    /// component), in bandwidth units; empty for smooth bases.
    pub(crate) fn scale_breakpoints(&self) -> Vec<f64> {
        match self.base {
            BaseKernel::Gaussian => Vec::new(),
            BaseKernel::Epanechnikov => self
                .terms
                .iter()
                .flat_map(|t| [t.scale, -t.scale])
                .collect(),
        }
    }

    /// `||K||_1` for sign-changing mixtures: locate the sign roots, then
    /// integrate `|K|` piecewise so every panel sees a smooth function.
    fn l1_by_quadrature(&self) -> f64 {
        let s = self.support;
        let mut breaks = self.scale_breakpoints();
        let probes = 4096;
        let step = s / probes as f64;
        let mut prev_x = 0.0;
        let mut prev_v = self.eval(0.0);
        for k in 1..=probes {
            let x = k as f64 * step;
            let v = self.eval(x);
            if prev_v != 0.0 && v != 0.0 && prev_v.signum() != v.signum() {
                let root = bisect_root(|u| self.eval(u), prev_x, x);
                breaks.push(root);
                breaks.push(-root);
            }
            prev_x = x;
            prev_v = v;
        }
        quad::integrate_piecewise(|u| self.eval(u).abs(), -s, s, &breaks)
    }

    /// `||K||_inf` by dense probing plus local ternary refinement.
    fn sup_by_probe(&self) -> f64 {
        let s = self.support;
        let probes = 8192;
        let step = s / probes as f64;
        let mut best_x = 0.0;
        let mut best = self.eval(0.0).abs();
        for k in 1..=probes {
            let x = k as f64 * step;
            let v = self.eval(x).abs();
            if v > best {
                best = v;
                best_x = x;
            }
        }
        let (mut lo, mut hi) = ((best_x - step).max(0.0), (best_x + step).min(s));
        for _ in 0..200 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if self.eval(m1).abs() < self.eval(m2).abs() {
                lo = m1;
            } else {
                hi = m2;
            }
        }
        self.eval(0.5 * (lo + hi)).abs().max(best)
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut value = 1.0;
    for i in 0..k {
        value = value * (n - i) as f64 / (i + 1) as f64;
    }
    value
}

fn bisect_root(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        let fmid = f(mid);
        if fmid == 0.0 {
            return mid;
        }
        if flo.signum() == fmid.signum() {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// A per-axis convolution evaluator `C(a, b, t) = (K_a * K_b~)(t)`.
#[derive(Debug, Clone)]
pub(crate) enum AxisConv {
    Closed { amp: f64, inv_two_var: f64 },
    Table(InterpTable),
}

impl AxisConv {
    #[inline]
    pub(crate) fn eval(&self, t: f64) -> f64 {
        match self {
            AxisConv::Closed { amp, inv_two_var } => amp * (-t * t * inv_two_var).exp(),
            AxisConv::Table(table) => table.eval(t),
        }
    }

    /// Gap beyond which the evaluator is identically (or sub-denormally)
    /// zero; lets sorted pair loops terminate early.
    #[inline]
    pub(crate) fn cutoff(&self) -> f64 {
        match self {
            // exp underflows to 0 past t^2 * inv_two_var > ~745.
            AxisConv::Closed { inv_two_var, .. } => (746.0 / inv_two_var).sqrt(),
            AxisConv::Table(table) => table.width(),
        }
    }
}

/// Product convolution evaluator for d-dimensional bandwidth pairs.
#[derive(Debug, Clone)]
pub(crate) struct ConvEvaluator {
    axes: Vec<AxisConv>,
}

impl ConvEvaluator {
    #[inline]
    pub(crate) fn eval(&self, t: &[f64]) -> f64 {
        let mut acc = 1.0;
        for (axis, &tj) in self.axes.iter().zip(t) {
            acc *= axis.eval(tj);
            if acc == 0.0 {
                return 0.0;
            }
        }
        acc
    }

    #[inline]
    pub(crate) fn eval_at_zero(&self) -> f64 {
        self.axes.iter().map(|a| a.eval(0.0)).product()
    }

    pub(crate) fn axes(&self) -> &[AxisConv] {
        &self.axes
    }
}

/// A vector of per-axis smoothing scales, all strictly positive and finite.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Bandwidth(Vec<f64>);

impl Bandwidth {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::invalid("bandwidth needs at least one component"));
        }
        for &h in &components {
            if !(h.is_finite() && h > 0.0) {
                return Err(Error::invalid(format!(
                    "bandwidth components must be positive and finite, got {h}"
                )));
            }
        }
        Ok(Bandwidth(components))
    }

    pub fn scalar(h: f64) -> Result<Self> {
        Self::new(vec![h])
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// The bandwidth volume `prod_j h_j`.
    pub fn volume(&self) -> f64 {
        self.0.iter().product()
    }

    /// Coordinatewise maximum, as in pairwise-comparison selection rules.
    pub fn join_max(&self, other: &Bandwidth) -> Bandwidth {
        Bandwidth(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(&a, &b)| a.max(b))
                .collect(),
        )
    }

    /// True when every component of `self` is `<=` the matching component.
    pub fn le_coordinatewise(&self, other: &Bandwidth) -> bool {
        self.0.iter().zip(&other.0).all(|(&a, &b)| a <= b)
    }
}

/// A d-variate product kernel; one shared univariate factor per axis.
#[derive(Debug, Clone)]
pub struct ProductKernel {
    axis: Kernel,
    dim: usize,
}

impl ProductKernel {
    pub fn new(axis: Kernel, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("kernel dimension must be at least 1"));
        }
        Ok(ProductKernel { axis, dim })
    }

    pub fn univariate(axis: Kernel) -> Self {
        ProductKernel { axis, dim: 1 }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn axis(&self) -> &Kernel {
        &self.axis
    }

    fn check_bandwidth(&self, h: &Bandwidth) -> Result<()> {
        if h.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: h.dim(),
            });
        }
        Ok(())
    }

    /// `K_h(x) = (prod h_j)^{-1} prod K(x_j / h_j)`.
    #[inline]
    pub fn eval(&self, h: &Bandwidth, x: &[f64]) -> f64 {
        let mut acc = 1.0;
        for (&hj, &xj) in h.components().iter().zip(x) {
            acc *= self.axis.eval_scaled(hj, xj);
            if acc == 0.0 {
                return 0.0;
            }
        }
        acc
    }

    /// `||K_h||^2 = ||K||^2 / prod h_j`, per-axis product; no quadrature.
    pub fn l2_norm_scaled(&self, h: &Bandwidth) -> Result<f64> {
        self.check_bandwidth(h)?;
        let mut acc = 1.0;
        for &hj in h.components() {
            acc *= self.axis.l2sq / hj;
        }
        Ok(acc)
    }

    /// `<K_h, K_h2>`, per-axis closed form.
    pub fn cross_inner(&self, h: &Bandwidth, h2: &Bandwidth) -> Result<f64> {
        self.check_bandwidth(h)?;
        self.check_bandwidth(h2)?;
        let mut acc = 1.0;
        for (&a, &b) in h.components().iter().zip(h2.components()) {
            acc *= self.axis.cross_inner_axis(a, b);
        }
        Ok(acc)
    }

    /// `||K_hmin - K_h||^2 = ||K_hmin||^2 + ||K_h||^2 - 2 <K_hmin, K_h>`,
    /// clamped at zero for identical arguments.
    pub fn diff_l2_norm(&self, h: &Bandwidth, hmin: &Bandwidth) -> Result<f64> {
        if h == hmin {
            return Ok(0.0);
        }
        let value = self.l2_norm_scaled(hmin)? + self.l2_norm_scaled(h)?
            - 2.0 * self.cross_inner(hmin, h)?;
        Ok(value.max(0.0))
    }

    /// The pair-interaction building block
    /// `G(t) = ((K_h - K_hmin) * (K_h~ - K_hmin~))(t)`, so that
    /// `||f_h - f_hmin||^2` of two estimates on one sample is the mean of
    /// `G` over all observation pairs.
    pub fn pair_interaction(&self, h: &Bandwidth, hmin: &Bandwidth, t: &[f64]) -> Result<f64> {
        self.check_bandwidth(h)?;
        self.check_bandwidth(hmin)?;
        if t.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: t.len(),
            });
        }
        let mut hh = 1.0;
        let mut hm = 1.0;
        let mut mm = 1.0;
        for ((&a, &b), &tj) in h
            .components()
            .iter()
            .zip(hmin.components())
            .zip(t.iter())
        {
            hh *= self.axis.conv_value_axis(a, a, tj);
            hm *= self.axis.conv_value_axis(a, b, tj);
            mm *= self.axis.conv_value_axis(b, b, tj);
        }
        Ok(hh - 2.0 * hm + mm)
    }

    /// Admissibility floor `||K||_inf ||K||_1 / n` for the
    /// d-variate product kernel.
    pub fn admissibility_threshold(&self, n: usize) -> f64 {
        (self.axis.sup * self.axis.l1).powi(self.dim as i32) / n as f64
    }

    pub(crate) fn conv_evaluator(&self, a: &Bandwidth, b: &Bandwidth) -> ConvEvaluator {
        ConvEvaluator {
            axes: a
                .components()
                .iter()
                .zip(b.components())
                .map(|(&aj, &bj)| self.axis.conv_axis_evaluator(aj, bj))
                .collect(),
        }
    }
}
