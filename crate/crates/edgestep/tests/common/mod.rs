//! Shared oracle arithmetic for integration tests: exact rational products,
//! double-double (quad-precision) products, and an accurately differenced
//! log-Gamma ratio. Kept independent of the library's own log-space
//! accumulation so agreement between the two is evidence, not tautology.
#![allow(dead_code)]

use num_bigint::BigUint;
use num_traits::ToPrimitive;

/// A double-double value: an unevaluated sum `hi + lo` carrying roughly
/// 106 bits of precision. Only the operations the oracles need.
#[derive(Clone, Copy, Debug)]
pub struct Dd {
    hi: f64,
    lo: f64,
}

fn two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    let bb = s - a;
    Dd {
        hi: s,
        lo: (a - (s - bb)) + (b - bb),
    }
}

/// Requires |a| ≥ |b|.
fn quick_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd { hi: s, lo: b - (s - a) }
}

fn two_prod(a: f64, b: f64) -> Dd {
    let p = a * b;
    Dd {
        hi: p,
        lo: a.mul_add(b, -p),
    }
}

impl Dd {
    pub fn from_f64(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    /// `num / den` to double-double accuracy.
    pub fn from_quotient(num: f64, den: f64) -> Self {
        let q = num / den;
        let residual = q.mul_add(-den, num);
        quick_two_sum(q, residual / den)
    }

    pub fn add(self, other: Dd) -> Dd {
        let s = two_sum(self.hi, other.hi);
        quick_two_sum(s.hi, s.lo + self.lo + other.lo)
    }

    pub fn mul(self, other: Dd) -> Dd {
        let p = two_prod(self.hi, other.hi);
        quick_two_sum(p.hi, p.lo + self.hi * other.lo + self.lo * other.hi)
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

/// Rounds the exact ratio `num/den` of arbitrarily large positive integers
/// to f64, by scaling the quotient into a 64-bit window first. Relative
/// error is about 2⁻⁵³ regardless of operand size.
pub fn big_ratio_to_f64(num: &BigUint, den: &BigUint) -> f64 {
    assert!(num.bits() > 0 && den.bits() > 0, "ratio of positive integers");
    let shift = 64i64 - num.bits() as i64 + den.bits() as i64;
    let scaled = if shift >= 0 {
        num << shift as u64
    } else {
        num >> (-shift) as u64
    };
    let q = (scaled / den).to_f64().expect("64-bit quotient fits f64");
    q * 2f64.powi(-shift as i32)
}

/// Stirling-series correction `S(z)` with `ln Γ(z) = (z−½)ln z − z +
/// ½ln(2π) + S(z)`; accurate to ~10⁻¹⁴ for z ≥ 10.
fn stirling_correction(z: f64) -> f64 {
    let z2 = z * z;
    let mut term = 1.0 / (12.0 * z);
    let mut s = term;
    term /= z2;
    s -= term / 30.0; // 1/(360 z³)
    term /= z2;
    s += term / 105.0; // 1/(1260 z⁵)
    term /= z2;
    s -= term / 140.0; // 1/(1680 z⁷)
    term /= z2;
    s += term / 99.0; // 1/(1188 z⁹)
    s
}

/// `ln Γ(t + a) − ln Γ(t)` for large `t` and small `a`, computed without the
/// catastrophic cancellation of differencing two huge log-Gamma values:
/// the leading parts are expanded through `ln(1 + a/t)` analytically.
/// Requires `t ≥ 10` and `|a| ≤ 2`.
pub fn ln_gamma_ratio(t: f64, a: f64) -> f64 {
    assert!(t >= 10.0 && a.abs() <= 2.0);
    a * t.ln() + (t + a - 0.5) * (a / t).ln_1p() - a + stirling_correction(t + a)
        - stirling_correction(t)
}

#[cfg(test)]
mod self_checks {
    use super::*;

    #[test]
    fn dd_quotient_carries_extra_precision() {
        let third = Dd::from_quotient(1.0, 3.0);
        let reconstructed = third.mul(Dd::from_f64(3.0)).to_f64();
        assert_eq!(reconstructed, 1.0);
    }

    #[test]
    fn big_ratio_conversion_matches_small_cases() {
        let num = BigUint::from(355u32);
        let den = BigUint::from(113u32);
        assert!((big_ratio_to_f64(&num, &den) - 355.0 / 113.0).abs() < 1e-15);
        // A ratio far outside f64's naive num/den range.
        let big = BigUint::from(10u32).pow(400);
        let bigger = &big * BigUint::from(3u32);
        assert!((big_ratio_to_f64(&bigger, &big) - 3.0).abs() < 1e-14);
    }

    #[test]
    fn gamma_ratio_agrees_with_direct_log_gamma_at_moderate_t() {
        // Small enough t that direct differencing is still accurate.
        for t in [10.0, 50.0, 200.0] {
            for a in [0.5, 0.75, 0.875, 1.0] {
                let direct = statrs::function::gamma::ln_gamma(t + a)
                    - statrs::function::gamma::ln_gamma(t);
                let ours = ln_gamma_ratio(t, a);
                assert!((ours - direct).abs() < 1e-10, "t={t}, a={a}");
            }
        }
    }
}
