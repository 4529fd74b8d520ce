//! Small statistical helpers shared by the campaigns and the test suite:
//! compensated summation, empirical summaries, the Kolmogorov–Smirnov
//! statistic, ordinary least squares, and a chi-square goodness-of-fit
//! p-value.

use std::collections::BTreeMap;

use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::erf::erfc;

/// Kahan–Babuška compensated accumulator. Sums of 10^6–10^7 terms appear
/// throughout the normalizers; plain summation loses digits there.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let y = x - self.compensation;
        let t = self.sum + y;
        self.compensation = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Arithmetic mean. Panics on an empty slice.
pub fn mean(xs: &[f64]) -> f64 {
    assert!(!xs.is_empty(), "mean of empty sample");
    let mut acc = KahanSum::new();
    for &x in xs {
        acc.add(x);
    }
    acc.value() / xs.len() as f64
}

/// Unbiased sample variance. Panics if fewer than two observations.
pub fn variance(xs: &[f64]) -> f64 {
    assert!(xs.len() >= 2, "variance needs at least two observations");
    let m = mean(xs);
    let mut acc = KahanSum::new();
    for &x in xs {
        acc.add((x - m) * (x - m));
    }
    acc.value() / (xs.len() - 1) as f64
}

/// Standard error of the sample mean.
pub fn standard_error(xs: &[f64]) -> f64 {
    (variance(xs) / xs.len() as f64).sqrt()
}

/// Nearest-rank empirical quantile: the smallest observation x such that at
/// least `q·n` observations are ≤ x. Deterministic and interpolation-free.
pub fn quantile(xs: &[f64], q: f64) -> f64 {
    assert!(!xs.is_empty(), "quantile of empty sample");
    assert!((0.0..=1.0).contains(&q), "quantile level must be in [0,1]");
    let mut sorted = xs.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("NaN in sample"));
    let rank = ((q * sorted.len() as f64).ceil() as usize).max(1);
    sorted[rank.min(sorted.len()) - 1]
}

/// Median, as the nearest-rank 0.5-quantile.
pub fn median(xs: &[f64]) -> f64 {
    quantile(xs, 0.5)
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Two-sided Kolmogorov–Smirnov statistic of `sample` against a continuous
/// CDF: sup over the sample of the distance between the empirical CDF and
/// the reference.
pub fn ks_statistic(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    assert!(!sample.is_empty(), "KS statistic of empty sample");
    let mut sorted = sample.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("NaN in sample"));
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let fx = cdf(x);
        d = d.max(fx - i as f64 / n).max((i + 1) as f64 / n - fx);
    }
    d
}

/// KS statistic against the standard normal.
pub fn ks_statistic_normal(sample: &[f64]) -> f64 {
    ks_statistic(sample, normal_cdf)
}

/// Least-squares slope of y on x. Panics if fewer than two points or if x
/// is constant.
pub fn regression_slope(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    assert!(x.len() >= 2, "regression needs at least two points");
    let mx = mean(x);
    let my = mean(y);
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
    }
    assert!(sxx > 0.0, "regression on constant x");
    sxy / sxx
}

/// Upper-tail chi-square p-value for observed counts against expected
/// counts (degrees of freedom = cells − 1).
pub fn chi_square_pvalue(observed: &[u64], expected: &[f64]) -> f64 {
    assert_eq!(observed.len(), expected.len());
    assert!(observed.len() >= 2, "chi-square needs at least two cells");
    let mut stat = 0.0;
    for (&o, &e) in observed.iter().zip(expected) {
        assert!(e > 0.0, "expected count must be positive");
        let diff = o as f64 - e;
        stat += diff * diff / e;
    }
    let dof = (observed.len() - 1) as f64;
    let chi = ChiSquared::new(dof).expect("valid degrees of freedom");
    1.0 - chi.cdf(stat)
}

/// Total variation distance between two discrete distributions given as
/// probability maps. Missing keys count as probability zero.
pub fn total_variation<K: Ord + Clone>(a: &BTreeMap<K, f64>, b: &BTreeMap<K, f64>) -> f64 {
    let mut keys: Vec<K> = a.keys().cloned().collect();
    keys.extend(b.keys().cloned());
    keys.sort();
    keys.dedup();
    let mut acc = 0.0;
    for k in &keys {
        let pa = a.get(k).copied().unwrap_or(0.0);
        let pb = b.get(k).copied().unwrap_or(0.0);
        acc += (pa - pb).abs();
    }
    acc / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-12;

    #[test]
    fn kahan_recovers_lost_digits() {
        // 1 + 1e-16 repeated: plain f64 summation never leaves 1.0.
        let mut acc = KahanSum::new();
        acc.add(1.0);
        for _ in 0..1_000_000 {
            acc.add(1e-16);
        }
        assert!((acc.value() - (1.0 + 1e-10)).abs() < 1e-13);
    }

    #[test]
    fn summary_statistics() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert!((mean(&xs) - 2.5).abs() < TOL);
        assert!((variance(&xs) - 5.0 / 3.0).abs() < TOL);
        assert_eq!(median(&xs), 2.0);
        assert_eq!(quantile(&xs, 0.05), 1.0);
        assert_eq!(quantile(&xs, 1.0), 4.0);
    }

    #[test]
    fn normal_cdf_reference_points() {
        assert!((normal_cdf(0.0) - 0.5).abs() < TOL);
        assert!((normal_cdf(1.959963984540054) - 0.975).abs() < 1e-9);
        assert!((normal_cdf(-1.959963984540054) - 0.025).abs() < 1e-9);
    }

    #[test]
    fn ks_statistic_hand_value() {
        // Empirical CDF of {0} vs uniform-on-[0,1] CDF: sup distance is 1.
        let d = ks_statistic(&[0.0], |x| x.clamp(0.0, 1.0));
        assert!((d - 1.0).abs() < TOL);
        // Two points at the quartiles of the uniform.
        let d = ks_statistic(&[0.25, 0.75], |x| x.clamp(0.0, 1.0));
        assert!((d - 0.25).abs() < TOL);
    }

    #[test]
    fn slope_of_exact_line() {
        let x = [1.0, 2.0, 3.0];
        let y = [2.0, 4.0, 6.0];
        assert!((regression_slope(&x, &y) - 2.0).abs() < TOL);
    }

    #[test]
    fn chi_square_extremes() {
        // Perfect agreement: statistic 0, p-value 1.
        let p = chi_square_pvalue(&[50, 50], &[50.0, 50.0]);
        assert!((p - 1.0).abs() < TOL);
        // Gross disagreement: p-value essentially 0.
        let p = chi_square_pvalue(&[100, 0], &[50.0, 50.0]);
        assert!(p < 1e-12);
    }

    #[test]
    fn total_variation_hand_values() {
        let mut a = BTreeMap::new();
        let mut b = BTreeMap::new();
        a.insert(1u32, 0.5);
        a.insert(2u32, 0.5);
        b.insert(1u32, 1.0);
        assert!((total_variation(&a, &b) - 0.5).abs() < TOL);
        assert!((total_variation(&a, &a) - 0.0).abs() < TOL);
    }
}
