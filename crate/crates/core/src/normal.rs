//! Standard normal density, distribution and hazard functions.
//!
//! Both tails of the distribution are computed through `erfc`, so there is
//! no `1 - Φ` cancellation. The hazard (inverse Mills ratio) switches to a
//! continued fraction once the upper tail drops below `1e-15`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use libm::erfc;

/// Past this argument the upper tail is evaluated by continued fraction.
pub const CONTINUED_FRACTION_CUTOFF: f64 = 8.0;

/// Past this argument the conditioning tail is treated as an impossible
/// event. `Q(37) ≈ 5.7e-300` is close to the smallest normal double.
pub const DEGENERATE_CUTOFF: f64 = 37.0;

const CF_TERMS: u32 = 80;

#[inline]
pub fn pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// `Φ(x) = P(Z ≤ x)`.
#[inline]
pub fn cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// Upper tail `Q(x) = 1 − Φ(x) = P(Z > x)`.
#[inline]
pub fn sf(x: f64) -> f64 {
    0.5 * erfc(x * FRAC_1_SQRT_2)
}

/// Inverse Mills ratio `φ(x) / (1 − Φ(x))`, the hazard of the standard
/// normal. Positive and strictly increasing; tends to `x` as `x → ∞` and to
/// `0` as `x → −∞`.
pub fn upper_mills(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x > CONTINUED_FRACTION_CUTOFF {
        // Q(x)/φ(x) = 1/(x + 1/(x + 2/(x + 3/(x + ...)))), evaluated backwards.
        let mut t = x;
        for k in (1..=CF_TERMS).rev() {
            t = x + f64::from(k) / t;
        }
        return t;
    }
    let tail = sf(x);
    if tail == 0.0 {
        return x;
    }
    pdf(x) / tail
}

/// `φ(x) / Φ(x)`, the hazard of the reflected distribution.
#[inline]
pub fn lower_mills(x: f64) -> f64 {
    upper_mills(-x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        assert_eq!(cdf(0.0), 0.5);
        assert!((sf(1.0) - 0.158_655_253_931_457_05).abs() < 1e-16);
        assert!((cdf(-1.959_963_984_540_054) - 0.025).abs() < 1e-16);
        // Q(10) from the erfc tables.
        assert!((sf(10.0) / 7.619_853_024_160_527e-24 - 1.0).abs() < 1e-13);
        assert!((pdf(0.0) - 0.398_942_280_401_432_7).abs() < 1e-17);
    }

    #[test]
    fn mills_at_zero() {
        assert!((upper_mills(0.0) - 2.0 * pdf(0.0)).abs() < 1e-15);
    }

    #[test]
    fn continued_fraction_matches_direct_ratio_at_cutoff() {
        for &x in &[7.5, 8.0, 8.000_001, 9.0, 12.0, 20.0] {
            let direct = pdf(x) / sf(x);
            let mut t = x;
            for k in (1..=CF_TERMS).rev() {
                t = x + f64::from(k) / t;
            }
            assert!((direct / t - 1.0).abs() < 1e-12, "x={x}: {direct} vs {t}");
        }
    }

    #[test]
    fn mills_is_increasing_and_bounded() {
        let mut prev = upper_mills(-40.0);
        let mut x = -40.0;
        while x < 40.0 {
            x += 0.01;
            let m = upper_mills(x);
            assert!(m >= prev, "not monotone at {x}");
            // x < λ(x) < x + 1/x for x > 0.
            if x > 0.5 {
                assert!(m > x && m < x + 1.0 / x);
            }
            prev = m;
        }
    }
}
