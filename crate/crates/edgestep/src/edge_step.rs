//! Edge-step functions: the per-step probability of creating a new vertex.
//!
//! An edge-step function assigns to every step `t ≥ 1` a probability
//! `f(t) ∈ (0, 1]` that the step performs a vertex-step instead of an
//! edge-step. This module ships the parametric families used throughout
//! the suite, their partial sums `F` and inverse `F⁻¹`, and a classifier
//! for the regularity conditions the limit behaviour depends on:
//!
//! * `(V∞)`: `Σ_s f(s) = ∞` — the graph keeps acquiring vertices forever;
//! * `(S)`:  `Σ_s f(s)/s < ∞` — equivalent to linear max-degree growth;
//! * `RES(−γ)`: f decreases to zero and is regularly varying with
//!   index `−γ`, `γ ∈ [0, 1)`.

use serde::{Deserialize, Serialize};

use crate::stats::KahanSum;
use crate::{Error, Result};

/// Iteration budget for [`EdgeStepFunction::inverse_cumulative`]. Targets
/// whose preimage lies beyond this many terms are reported unreachable
/// rather than searched for unboundedly.
const INVERSE_SEARCH_BOUND: u64 = 100_000_000;

/// Extension rule for [`EdgeStepFunction::tabulated`] values beyond the
/// table length.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailRule {
    /// Repeat the last tabulated value forever (default).
    #[default]
    HoldLast,
    /// Continue with `f(n)·(t/n)^(−γ̂)`, where `γ̂` is a log-log least-squares
    /// fit over the last half of the table, clamped to `[0, 1]`.
    PowerExtrapolate,
}

#[derive(Clone, Debug, PartialEq)]
enum Family {
    Constant {
        p: f64,
    },
    PowerLaw {
        c: f64,
        gamma: f64,
    },
    LogPower {
        c: f64,
        gamma: f64,
        beta: f64,
    },
    Tabulated {
        values: Vec<f64>,
        tail_rule: TailRule,
        /// Fitted decay index used by `PowerExtrapolate` (0 for `HoldLast`).
        tail_gamma: f64,
    },
}

/// An edge-step function: immutable after construction, cheap to evaluate,
/// safe to share across replicas.
///
/// All families are clamped by `min(1, ·)` so the value is always a valid
/// probability, and parameter validation rejects anything that would make
/// `f(t) = 0` somewhere: the process needs strictly positive vertex-step
/// probabilities at every step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawEdgeStep", into = "RawEdgeStep")]
pub struct EdgeStepFunction {
    family: Family,
}

/// Serialized form; mirrors the `{family, params}` records accepted in run
/// configs. Conversion into [`EdgeStepFunction`] revalidates parameters, so
/// deserialization cannot construct an invalid function.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
enum RawEdgeStep {
    Constant {
        p: f64,
    },
    PowerLaw {
        c: f64,
        gamma: f64,
    },
    LogPower {
        c: f64,
        gamma: f64,
        beta: f64,
    },
    Tabulated {
        values: Vec<f64>,
        #[serde(default)]
        tail_rule: TailRule,
    },
}

impl TryFrom<RawEdgeStep> for EdgeStepFunction {
    type Error = Error;

    fn try_from(raw: RawEdgeStep) -> Result<Self> {
        match raw {
            RawEdgeStep::Constant { p } => Self::constant(p),
            RawEdgeStep::PowerLaw { c, gamma } => Self::power_law(c, gamma),
            RawEdgeStep::LogPower { c, gamma, beta } => Self::log_power(c, gamma, beta),
            RawEdgeStep::Tabulated { values, tail_rule } => Self::tabulated(values, tail_rule),
        }
    }
}

impl From<EdgeStepFunction> for RawEdgeStep {
    fn from(f: EdgeStepFunction) -> Self {
        match f.family {
            Family::Constant { p } => RawEdgeStep::Constant { p },
            Family::PowerLaw { c, gamma } => RawEdgeStep::PowerLaw { c, gamma },
            Family::LogPower { c, gamma, beta } => RawEdgeStep::LogPower { c, gamma, beta },
            Family::Tabulated {
                values, tail_rule, ..
            } => RawEdgeStep::Tabulated { values, tail_rule },
        }
    }
}

impl EdgeStepFunction {
    /// `f(t) = p` for all t.
    pub fn constant(p: f64) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "constant probability must lie in (0,1], got {p}"
            )));
        }
        Ok(Self {
            family: Family::Constant { p },
        })
    }

    /// `f(t) = min(1, c·t^(−γ))` with `c > 0` and `γ ∈ [0, 1)`.
    pub fn power_law(c: f64, gamma: f64) -> Result<Self> {
        validate_scale_and_gamma(c, gamma)?;
        Ok(Self {
            family: Family::PowerLaw { c, gamma },
        })
    }

    /// `f(t) = min(1, c·t^(−γ)·(log(t+1))^(−β))` with `c > 0`, `γ ∈ [0, 1)`
    /// and `β ≥ 0`.
    pub fn log_power(c: f64, gamma: f64, beta: f64) -> Result<Self> {
        validate_scale_and_gamma(c, gamma)?;
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "beta must be a finite nonnegative real, got {beta}"
            )));
        }
        Ok(Self {
            family: Family::LogPower { c, gamma, beta },
        })
    }

    /// `f(t) = values[t−1]` for `t` within the table, extended by
    /// `tail_rule` beyond it. Every tabulated value must lie in `(0, 1]`.
    pub fn tabulated(values: Vec<f64>, tail_rule: TailRule) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter(
                "tabulated edge-step function needs at least one value".into(),
            ));
        }
        if let Some((i, &v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v > 0.0 && **v <= 1.0))
        {
            return Err(Error::InvalidParameter(format!(
                "tabulated value at t={} must lie in (0,1], got {v}",
                i + 1
            )));
        }
        let tail_gamma = match tail_rule {
            TailRule::HoldLast => 0.0,
            TailRule::PowerExtrapolate => fit_decay_index(&values, values.len().div_ceil(2)),
        };
        Ok(Self {
            family: Family::Tabulated {
                values,
                tail_rule,
                tail_gamma,
            },
        })
    }

    /// Evaluates `f(t)`. Steps are 1-based; panics if `t == 0`.
    pub fn evaluate(&self, t: u64) -> f64 {
        assert!(t >= 1, "edge-step functions are defined for t >= 1");
        self.evaluate_real(t as f64)
    }

    /// Evaluates the analytic extension of `f` at a real argument `x ≥ 1`.
    /// Tabulated families evaluate at `floor(x)`. Used for thresholds that
    /// plug non-integer rates (such as `a_t`) into f.
    pub fn evaluate_real(&self, x: f64) -> f64 {
        assert!(x >= 1.0, "edge-step functions are defined for t >= 1");
        match &self.family {
            Family::Constant { p } => *p,
            Family::PowerLaw { c, gamma } => (c * x.powf(-gamma)).min(1.0),
            Family::LogPower { c, gamma, beta } => {
                (c * x.powf(-gamma) * (x + 1.0).ln().powf(-beta)).min(1.0)
            }
            Family::Tabulated {
                values,
                tail_rule,
                tail_gamma,
            } => {
                let t = x.floor() as u64;
                let n = values.len() as u64;
                if t <= n {
                    values[(t - 1) as usize]
                } else {
                    let last = values[values.len() - 1];
                    match tail_rule {
                        TailRule::HoldLast => last,
                        TailRule::PowerExtrapolate => {
                            (last * (t as f64 / n as f64).powf(-tail_gamma)).min(1.0)
                        }
                    }
                }
            }
        }
    }

    /// Partial sum `F(r) = Σ_{1 ≤ s ≤ r} f(s)` over integer s; the empty sum
    /// is 0. Compensated summation keeps million-term sums accurate.
    pub fn cumulative(&self, r: f64) -> f64 {
        assert!(r.is_finite() && r >= 0.0, "cumulative argument must be a finite nonnegative real");
        let n = r.floor() as u64;
        let mut acc = KahanSum::new();
        for s in 1..=n {
            acc.add(self.evaluate(s));
        }
        acc.value()
    }

    /// `F⁻¹(r)`: the smallest integer `s ≥ 1` with `F(s) ≥ r`. Satisfies the
    /// sandwich `r ≤ F(F⁻¹(r)) ≤ r + 1` because each term is at most 1.
    ///
    /// The search accumulates the same compensated sum as [`cumulative`],
    /// so the two functions are exactly consistent. Targets not reached
    /// within [`INVERSE_SEARCH_BOUND`] terms produce
    /// [`Error::UnreachableTarget`].
    ///
    /// [`cumulative`]: EdgeStepFunction::cumulative
    pub fn inverse_cumulative(&self, r: f64) -> Result<u64> {
        assert!(r.is_finite() && r >= 0.0, "inverse target must be a finite nonnegative real");
        let mut acc = KahanSum::new();
        for s in 1..=INVERSE_SEARCH_BOUND {
            acc.add(self.evaluate(s));
            if acc.value() >= r {
                return Ok(s);
            }
        }
        Err(Error::UnreachableTarget {
            target: r,
            searched: INVERSE_SEARCH_BOUND,
        })
    }

    /// Classifies which regularity conditions `f` satisfies. Analytic
    /// families are decided exactly from their parameters; tabulated
    /// functions are diagnosed from the table and its tail rule and may
    /// come back `Inconclusive`. `horizon` bounds the diagnostic window
    /// for tabulated data (at least 10^3 recommended there).
    pub fn classify(&self, horizon: u64) -> ConditionReport {
        match &self.family {
            Family::Constant { p } => ConditionReport::constant(*p),
            Family::PowerLaw { c, gamma } => {
                if *gamma == 0.0 {
                    // PowerLaw with γ=0 is the constant min(1, c).
                    ConditionReport::constant(c.min(1.0))
                } else {
                    ConditionReport {
                        v_infinity: Condition::Holds,
                        condition_s: Condition::Holds,
                        res_gamma: Some(*gamma),
                        is_constant_p: None,
                    }
                }
            }
            Family::LogPower { c, gamma, beta } => {
                if *gamma == 0.0 && *beta == 0.0 {
                    ConditionReport::constant(c.min(1.0))
                } else if *gamma > 0.0 {
                    ConditionReport {
                        v_infinity: Condition::Holds,
                        condition_s: Condition::Holds,
                        res_gamma: Some(*gamma),
                        is_constant_p: None,
                    }
                } else {
                    // γ = 0, β > 0: Σ 1/(s·log^β s) converges exactly when β > 1.
                    ConditionReport {
                        v_infinity: Condition::Holds,
                        condition_s: if *beta > 1.0 {
                            Condition::Holds
                        } else {
                            Condition::Fails
                        },
                        res_gamma: Some(0.0),
                        is_constant_p: None,
                    }
                }
            }
            Family::Tabulated {
                values,
                tail_rule,
                tail_gamma,
            } => classify_tabulated(values, *tail_rule, *tail_gamma, horizon),
        }
    }
}

fn validate_scale_and_gamma(c: f64, gamma: f64) -> Result<()> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "scale c must be a finite positive real, got {c}"
        )));
    }
    if !(gamma >= 0.0 && gamma < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "gamma must lie in [0,1), got {gamma}"
        )));
    }
    Ok(())
}

/// Least-squares decay index of `values` on a log-log scale over the window
/// starting at 1-based index `from`, clamped to `[0, 1]`.
fn fit_decay_index(values: &[f64], from: usize) -> f64 {
    let from = from.max(1);
    if values.len() < from + 1 {
        return 0.0;
    }
    let xs: Vec<f64> = (from..=values.len()).map(|t| (t as f64).ln()).collect();
    let ys: Vec<f64> = values[from - 1..].iter().map(|v| v.ln()).collect();
    let slope = crate::stats::regression_slope(&xs, &ys);
    (-slope).clamp(0.0, 1.0)
}

fn classify_tabulated(
    values: &[f64],
    tail_rule: TailRule,
    tail_gamma: f64,
    horizon: u64,
) -> ConditionReport {
    let all_equal = values.iter().all(|&v| v == values[0]);
    // Strict positivity means the hold-last tail always diverges in sum, so
    // (V∞) holds for every representable tabulated function; power
    // extrapolation clamps γ̂ ≤ 1, which still diverges.
    let v_infinity = Condition::Holds;
    let is_constant_p = if all_equal { Some(values[0]) } else { None };
    if horizon < 1_000 {
        // Too little data for the decay diagnostics to mean anything.
        return ConditionReport {
            v_infinity: Condition::Inconclusive,
            condition_s: Condition::Inconclusive,
            res_gamma: None,
            is_constant_p,
        };
    }
    match tail_rule {
        TailRule::HoldLast => ConditionReport {
            v_infinity,
            // A positive constant tail makes Σ f(s)/s a harmonic tail.
            condition_s: Condition::Fails,
            res_gamma: None,
            is_constant_p,
        },
        TailRule::PowerExtrapolate => {
            // Stability check: refit over the last quarter of the window the
            // construction-time fit used. Disagreement means the table has
            // not settled into a power regime.
            let window = (values.len() as u64).min(horizon) as usize;
            let refit = fit_decay_index(values, values.len() - window / 4 + 1);
            let stable = (refit - tail_gamma).abs() <= 0.2;
            let nonincreasing = values.windows(2).all(|w| w[1] <= w[0] + 1e-12);
            let condition_s = if !stable {
                Condition::Inconclusive
            } else if tail_gamma == 0.0 {
                Condition::Fails
            } else if tail_gamma > 0.05 {
                Condition::Holds
            } else {
                Condition::Inconclusive
            };
            let res_gamma = if stable && nonincreasing && tail_gamma > 0.0 {
                Some(tail_gamma)
            } else {
                None
            };
            ConditionReport {
                v_infinity,
                condition_s,
                res_gamma,
                is_constant_p,
            }
        }
    }
}

/// Truth value of a regularity condition; tabulated data may not decide.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    Holds,
    Fails,
    Inconclusive,
}

/// Which regularity conditions an edge-step function satisfies.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionReport {
    /// `(V∞)`: Σ f(s) diverges.
    pub v_infinity: Condition,
    /// `(S)`: Σ f(s)/s converges.
    pub condition_s: Condition,
    /// Regular-variation index when f belongs to `RES(−γ)`.
    pub res_gamma: Option<f64>,
    /// The constant value when f is (effectively) constant.
    pub is_constant_p: Option<f64>,
}

impl ConditionReport {
    fn constant(p: f64) -> Self {
        ConditionReport {
            v_infinity: Condition::Holds,
            // Σ p/s is a harmonic series.
            condition_s: Condition::Fails,
            res_gamma: None,
            is_constant_p: Some(p),
        }
    }
}

/// Prefix sums of f over a fixed horizon: O(1) cumulative lookups and
/// O(log horizon) inverse queries, for campaign code that evaluates `F⁻¹`
/// once per tracked vertex. Built once, read-only afterwards.
#[derive(Clone, Debug)]
pub struct CumulativeTable {
    /// `prefix[t] = F(t)`; `prefix[0] = 0`.
    prefix: Vec<f64>,
}

impl CumulativeTable {
    pub fn build(f: &EdgeStepFunction, horizon: u64) -> Self {
        let mut prefix = Vec::with_capacity(horizon as usize + 1);
        prefix.push(0.0);
        let mut acc = KahanSum::new();
        for s in 1..=horizon {
            acc.add(f.evaluate(s));
            prefix.push(acc.value());
        }
        Self { prefix }
    }

    pub fn horizon(&self) -> u64 {
        (self.prefix.len() - 1) as u64
    }

    /// `F(t)` for `t ≤ horizon`.
    pub fn cumulative(&self, t: u64) -> Result<f64> {
        self.prefix
            .get(t as usize)
            .copied()
            .ok_or(Error::OutOfHorizon {
                t,
                horizon: self.horizon(),
            })
    }

    /// Smallest `s` with `F(s) ≥ r`, by binary search over the prefix sums.
    pub fn inverse(&self, r: f64) -> Result<u64> {
        assert!(r.is_finite() && r >= 0.0, "inverse target must be a finite nonnegative real");
        if *self.prefix.last().expect("nonempty prefix") < r {
            return Err(Error::UnreachableTarget {
                target: r,
                searched: self.horizon(),
            });
        }
        let s = self.prefix.partition_point(|&v| v < r).max(1);
        Ok(s as u64)
    }
}
