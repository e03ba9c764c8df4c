//! Deterministic composite Gauss-Legendre quadrature.
//!
//! All norm and inner-product caches in this crate are produced by the same
//! scheme: 64-node Gauss-Legendre panels, doubling the panel count until two
//! successive refinements agree to a relative tolerance. Integrands with
//! known kinks (compact-support kernels, absolute values) are split at their
//! breakpoints first so that every panel sees a smooth function.

use crate::numeric::KahanSum;
use std::sync::LazyLock;

const NODES: usize = 64;

/// Default relative tolerance for successive panel refinements.
pub const DEFAULT_REL_TOL: f64 = 1e-10;

/// Hard cap on panel doubling; smooth integrands converge far earlier.
const MAX_PANELS: usize = 1 << 14;

/// 64-point Gauss-Legendre nodes and weights on [-1, 1].
static GL64: LazyLock<Vec<(f64, f64)>> = LazyLock::new(|| gauss_legendre(NODES));

fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut rule = vec![(0.0, 0.0); n];
    let half = n.div_ceil(2);
    for i in 0..half {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() <= 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule[i] = (-x.abs(), w);
        rule[n - 1 - i] = (x.abs(), w);
    }
    rule
}

fn panel_sum(f: &impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let width = (b - a) / panels as f64;
    let mut acc = KahanSum::new();
    for p in 0..panels {
        let lo = a + p as f64 * width;
        let mid = lo + 0.5 * width;
        let scale = 0.5 * width;
        for &(x, w) in GL64.iter() {
            acc.add(w * f(mid + scale * x));
        }
    }
    acc.total() * 0.5 * (b - a) / panels as f64
}

/// Integrates `f` over `[a, b]`, doubling the panel count until successive
/// refinements differ by less than `rel_tol` relatively (with a tiny absolute
/// floor so that integrals which are exactly zero terminate).
pub fn integrate_tol(f: impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    if a >= b {
        return 0.0;
    }
    let mut panels = 2;
    let mut prev = panel_sum(&f, a, b, panels);
    while panels < MAX_PANELS {
        panels *= 2;
        let next = panel_sum(&f, a, b, panels);
        if (next - prev).abs() <= rel_tol * next.abs() + 1e-15 {
            return next;
        }
        prev = next;
    }
    prev
}

/// Integrates `f` over `[a, b]` at the default tolerance.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    integrate_tol(f, a, b, DEFAULT_REL_TOL)
}

/// Integrates `f` over `[a, b]` split at the given breakpoints, so that each
/// sub-interval is smooth. Breakpoints outside `(a, b)` are ignored.
pub fn integrate_piecewise(f: impl Fn(f64) -> f64, a: f64, b: f64, breaks: &[f64]) -> f64 {
    if a >= b {
        return 0.0;
    }
    let mut cuts: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.dedup();
    let mut acc = KahanSum::new();
    let mut lo = a;
    for cut in cuts {
        if cut - lo > 1e-300 {
            acc.add(integrate(&f, lo, cut));
        }
        lo = cut;
    }
    acc.add(integrate(&f, lo, b));
    acc.total()
}
