//! Normalizing factors for the degree evolution.
//!
//! The degree of a fixed vertex grows multiplicatively: conditionally on
//! the past, step `s → s+1` scales the expected degree by
//! `1 + 1/s − f(s+1)/(2s)`. The product of those factors,
//!
//! ```text
//! φ(t) = ∏_{s=1}^{t−1} (1 + 1/s − f(s+1)/(2s)),
//! ```
//!
//! is the natural normalization: `d_t(i)/φ(t)` is a martingale. Two
//! companions matter as well: `ξ(t) = φ(t)/t`, which has a limit exactly
//! when Σ f(s)/s converges, and the k-th moment analogue
//!
//! ```text
//! φ_k(t) = ∏_{s=1}^{t−1} (1 + (k/s)(1 − f(s+1)/2) + (k(k−1)/(4s²))(1 − f(s+1))).
//! ```
//!
//! Everything is accumulated in log-space with compensated summation:
//! these products run over millions of factors and naive accumulation
//! loses the low digits the statistical gates rely on.

use std::io::Write;

use crate::edge_step::EdgeStepFunction;
use crate::stats::KahanSum;
use crate::{Error, Result};

/// Largest k for which φ_k tabulation is supported.
const K_MAX_LIMIT: u32 = 8;

/// Precomputed `log φ(t)`, `log ξ(t)`, and `log φ_k(t)` for `t = 1..=horizon`.
///
/// The table is immutable after construction and is shared read-only across
/// replicas. Values are exposed only within the horizon; there is no
/// on-demand extrapolation, so a generator and its normalizer can never
/// silently disagree about how far the table reaches.
#[derive(Clone, Debug)]
pub struct NormalizationTable {
    horizon: u64,
    k_max: u32,
    /// `log φ(t)` at index `t − 1`.
    log_phi: Vec<f64>,
    /// `log ξ(t)` at index `t − 1`, accumulated independently of `log_phi`
    /// from ξ's own factors `1 − f(r+1)/(2(r+1))`.
    log_xi: Vec<f64>,
    /// `log φ_k(t)`: row `k − 1`, index `t − 1`.
    log_phi_k: Vec<Vec<f64>>,
}

/// Result of [`NormalizationTable::xi_infinity`].
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct XiLimit {
    /// ξ evaluated at the table horizon.
    pub value: f64,
    /// Whether doubling the horizon moved ξ by less than the tolerance:
    /// `|ξ(horizon) − ξ(horizon/2)| < tolerance`. Functions whose ξ decays
    /// to zero do so slowly, which this flag reports honestly.
    pub converged: bool,
}

/// Log-factor of φ_k at step s with `u = f(s+1)`; `k = 1` recovers φ's own
/// factor, and the φ series below reuses this with `k = 1` so that the two
/// tabulations agree bit for bit.
#[inline]
fn log_factor_k(k: f64, s: f64, u: f64) -> f64 {
    let linear = (k / s) * (1.0 - 0.5 * u);
    let quadratic = (k * (k - 1.0)) * (1.0 - u) / (4.0 * s * s);
    (linear + quadratic).ln_1p()
}

impl NormalizationTable {
    /// Tabulates the factors for `t = 1..=horizon`; `k_max` may be 0 if the
    /// φ_k rows are not needed (they dominate the memory footprint).
    pub fn build(f: &EdgeStepFunction, horizon: u64, k_max: u32) -> Result<Self> {
        if horizon < 2 {
            return Err(Error::InvalidParameter(format!(
                "normalization horizon must be at least 2, got {horizon}"
            )));
        }
        if k_max > K_MAX_LIMIT {
            return Err(Error::InvalidParameter(format!(
                "k_max must be at most {K_MAX_LIMIT}, got {k_max}"
            )));
        }
        let n = horizon as usize;
        let mut log_phi = Vec::with_capacity(n);
        let mut log_xi = Vec::with_capacity(n);
        let mut log_phi_k: Vec<Vec<f64>> = (0..k_max).map(|_| Vec::with_capacity(n)).collect();

        let mut acc_phi = KahanSum::new();
        let mut acc_xi = KahanSum::new();
        let mut acc_k: Vec<KahanSum> = (0..k_max).map(|_| KahanSum::new()).collect();

        // t = 1: empty products.
        log_phi.push(0.0);
        log_xi.push(0.0);
        for row in &mut log_phi_k {
            row.push(0.0);
        }

        for s in 1..horizon {
            let u = f.evaluate(s + 1);
            let s_f = s as f64;
            acc_phi.add(log_factor_k(1.0, s_f, u));
            // ξ factor: 1 − f(s+1)/(2(s+1)); equal to φ's factor times
            // s/(s+1), accumulated independently as its own product.
            acc_xi.add((-u / (2.0 * (s_f + 1.0))).ln_1p());
            log_phi.push(acc_phi.value());
            log_xi.push(acc_xi.value());
            for (idx, (row, acc)) in log_phi_k.iter_mut().zip(acc_k.iter_mut()).enumerate() {
                acc.add(log_factor_k((idx + 1) as f64, s_f, u));
                row.push(acc.value());
            }
        }

        Ok(Self {
            horizon,
            k_max,
            log_phi,
            log_xi,
            log_phi_k,
        })
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn k_max(&self) -> u32 {
        self.k_max
    }

    fn index(&self, t: u64) -> Result<usize> {
        if t >= 1 && t <= self.horizon {
            Ok((t - 1) as usize)
        } else {
            Err(Error::OutOfHorizon {
                t,
                horizon: self.horizon,
            })
        }
    }

    /// `log φ(t)` for `1 ≤ t ≤ horizon`.
    pub fn log_phi(&self, t: u64) -> Result<f64> {
        Ok(self.log_phi[self.index(t)?])
    }

    /// `φ(t)` for `1 ≤ t ≤ horizon`.
    pub fn phi(&self, t: u64) -> Result<f64> {
        Ok(self.log_phi(t)?.exp())
    }

    /// `log ξ(t)` for `1 ≤ t ≤ horizon`.
    pub fn log_xi(&self, t: u64) -> Result<f64> {
        Ok(self.log_xi[self.index(t)?])
    }

    /// `ξ(t) = φ(t)/t` for `1 ≤ t ≤ horizon`.
    pub fn xi(&self, t: u64) -> Result<f64> {
        Ok(self.log_xi(t)?.exp())
    }

    /// `log φ_k(t)` for `1 ≤ k ≤ k_max`, `1 ≤ t ≤ horizon`.
    pub fn log_phi_k(&self, k: u32, t: u64) -> Result<f64> {
        if k == 0 || k > self.k_max {
            return Err(Error::InvalidParameter(format!(
                "phi_k is tabulated for k in 1..={}, got {k}",
                self.k_max
            )));
        }
        Ok(self.log_phi_k[(k - 1) as usize][self.index(t)?])
    }

    /// `φ_k(t)` for `1 ≤ k ≤ k_max`, `1 ≤ t ≤ horizon`.
    pub fn phi_k(&self, k: u32, t: u64) -> Result<f64> {
        Ok(self.log_phi_k(k, t)?.exp())
    }

    /// Estimates `ξ(∞) = lim φ(t)/t` by evaluating ξ at the horizon, with a
    /// doubling test for convergence. Meaningful as a finite limit only for
    /// functions satisfying `(S)`; otherwise the true limit is 0 and the
    /// flag reports the slow decay.
    pub fn xi_infinity(&self, tolerance: f64) -> XiLimit {
        assert!(
            tolerance > 0.0 && tolerance.is_finite(),
            "tolerance must be a positive real"
        );
        let value = self.log_xi[(self.horizon - 1) as usize].exp();
        let half = self.log_xi[(self.horizon / 2 - 1) as usize].exp();
        XiLimit {
            value,
            converged: (value - half).abs() < tolerance,
        }
    }

    /// Writes `(t, φ, ξ, φ_1..φ_k_max)` rows at logarithmically spaced t,
    /// for plotting.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        write!(w, "t,phi,xi")?;
        for k in 1..=self.k_max {
            write!(w, ",phi_{k}")?;
        }
        writeln!(w)?;
        for t in log_spaced_times(self.horizon) {
            write!(w, "{t},{},{}", self.phi(t)?, self.xi(t)?)?;
            for k in 1..=self.k_max {
                write!(w, ",{}", self.phi_k(k, t)?)?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Powers of two up to `horizon`, plus `horizon` itself.
pub fn log_spaced_times(horizon: u64) -> Vec<u64> {
    let mut times: Vec<u64> = std::iter::successors(Some(1u64), |t| t.checked_mul(2))
        .take_while(|&t| t <= horizon)
        .collect();
    if *times.last().expect("at least t=1") != horizon {
        times.push(horizon);
    }
    times
}
