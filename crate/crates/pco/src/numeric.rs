//! Small numerical building blocks: compensated summation, composite
//! Newton-Cotes rules on equispaced grids, and linear interpolation tables.
//!
//! Everything here is deterministic and order-fixed so that results do not
//! depend on thread count.

/// Kahan-Babuska-Neumaier compensated accumulator.
///
/// Used wherever a long reduction feeds a quantity with a tolerance attached
/// (pair sums, kernel density evaluation, quadrature panels).
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.comp += (self.sum - t) + value;
        } else {
            self.comp += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Sums a slice in index order with compensation.
pub fn compensated_sum(values: &[f64]) -> f64 {
    let mut acc = KahanSum::new();
    for &v in values {
        acc.add(v);
    }
    acc.total()
}

/// Composite Simpson rule on an equispaced grid (odd number of points).
/// Falls back to the trapezoid rule when the point count is even.
pub fn integrate_uniform(values: &[f64], step: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    if n % 2 == 1 {
        let mut acc = KahanSum::new();
        acc.add(values[0]);
        acc.add(values[n - 1]);
        for (i, &v) in values.iter().enumerate().take(n - 1).skip(1) {
            acc.add(if i % 2 == 1 { 4.0 * v } else { 2.0 * v });
        }
        acc.total() * step / 3.0
    } else {
        let mut acc = KahanSum::new();
        acc.add(0.5 * values[0]);
        acc.add(0.5 * values[n - 1]);
        for &v in &values[1..n - 1] {
            acc.add(v);
        }
        acc.total() * step
    }
}

/// Uniform lookup table with linear interpolation on `[0, width]`.
///
/// The first node sits exactly at 0, so even functions tabulated on their
/// nonnegative half-axis are exact at the origin. Queries beyond `width`
/// return 0 (the tabulated functions have compact or truncated support).
#[derive(Debug, Clone)]
pub struct InterpTable {
    width: f64,
    inv_step: f64,
    values: Vec<f64>,
}

impl InterpTable {
    /// Tabulates `f` at `count` equispaced nodes on `[0, width]`.
    pub fn build(width: f64, count: usize, f: impl Fn(f64) -> f64) -> Self {
        assert!(count >= 2 && width > 0.0);
        let step = width / (count - 1) as f64;
        let values = (0..count).map(|k| f(k as f64 * step)).collect();
        Self {
            width,
            inv_step: 1.0 / step,
            values,
        }
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    /// Linear interpolation at `|t|`; zero outside the tabulated range.
    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        let t = t.abs();
        if t >= self.width {
            return 0.0;
        }
        let pos = t * self.inv_step;
        let idx = pos as usize;
        if idx + 1 >= self.values.len() {
            return self.values[self.values.len() - 1];
        }
        let frac = pos - idx as f64;
        self.values[idx] * (1.0 - frac) + self.values[idx + 1] * frac
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_recovers_small_terms() {
        let mut acc = KahanSum::new();
        acc.add(1.0);
        for _ in 0..10_000 {
            acc.add(1e-16);
        }
        assert!((acc.total() - (1.0 + 1e-12)).abs() < 1e-15);
    }

    #[test]
    fn simpson_integrates_cubics_exactly() {
        let n = 9;
        let step = 1.0 / (n - 1) as f64;
        let values: Vec<f64> = (0..n)
            .map(|i| {
                let x = i as f64 * step;
                x * x * x - 2.0 * x + 1.0
            })
            .collect();
        let exact = 0.25 - 1.0 + 1.0;
        assert!((integrate_uniform(&values, step) - exact).abs() < 1e-14);
    }

    #[test]
    fn interp_table_hits_nodes_and_clamps_tail() {
        let table = InterpTable::build(2.0, 4097, |t| (-t * t).exp());
        assert_eq!(table.eval(0.0), 1.0);
        assert!((table.eval(1.0) - (-1.0f64).exp()).abs() < 1e-7);
        assert_eq!(table.eval(5.0), 0.0);
        assert_eq!(table.eval(-1.0), table.eval(1.0));
    }
}
