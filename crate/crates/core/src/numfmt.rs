//! Number rendering shared by reports and DOT export.
//!
//! Two conventions, fixed so golden-file tests stay byte-stable:
//!
//! - decimals are printed with at most 12 significant digits, trailing zeros
//!   trimmed;
//! - quantities that stem from small-denominator rational inputs are also
//!   shown as exact reduced fractions, reconstructed with denominator at most
//!   [`MAX_FRACTION_DENOMINATOR`] and absolute error at most 1e-9.

/// Largest denominator considered when reconstructing a fraction.
pub const MAX_FRACTION_DENOMINATOR: u64 = 1_000_000;

/// Absolute tolerance for fraction reconstruction.
pub const FRACTION_TOLERANCE: f64 = 1e-9;

/// Render `x` as a decimal with at most 12 significant digits.
pub fn sig12(x: f64) -> String {
    significant(x, 12)
}

/// Render `x` as a decimal with at most `digits` significant digits,
/// trimming trailing zeros.
pub fn significant(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (digits as i32 - 1 - magnitude).clamp(0, 32) as usize;
    let mut s = format!("{x:.decimals$}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    // Avoid the "-0" rendering when rounding kills the sign.
    if s == "-0" {
        s = "0".to_string();
    }
    s
}

/// Best rational approximation of `x` with denominator at most `max_den`,
/// accepted only when it lies within `tol` of `x`.
///
/// Uses the continued-fraction convergents of `|x|` plus the final
/// semiconvergent, which together contain the best approximation under a
/// denominator bound.
pub fn approx_fraction(x: f64, max_den: u64, tol: f64) -> Option<(i64, u64)> {
    if !x.is_finite() || max_den == 0 {
        return None;
    }
    let negative = x < 0.0;
    let target = x.abs();
    if target > i64::MAX as f64 / 2.0 {
        return None;
    }

    // Convergents p/q of the continued fraction of `target`.
    let (mut p0, mut q0): (i128, i128) = (1, 0);
    let (mut p1, mut q1): (i128, i128) = (target.floor() as i128, 1);
    let mut frac = target - target.floor();
    let mut best = (p1, q1);

    for _ in 0..64 {
        if frac.abs() < 1e-18 {
            break;
        }
        let t = 1.0 / frac;
        let a = t.floor() as i128;
        frac = t - t.floor();
        let (p2, q2) = match (
            a.checked_mul(p1).and_then(|v| v.checked_add(p0)),
            a.checked_mul(q1).and_then(|v| v.checked_add(q0)),
        ) {
            (Some(p2), Some(q2)) => (p2, q2),
            _ => break,
        };
        if q2 as u128 > max_den as u128 {
            // Final semiconvergent: largest coefficient keeping q <= max_den.
            let a_cut = (max_den as i128 - q0) / q1.max(1);
            if a_cut >= 1 {
                let ps = a_cut * p1 + p0;
                let qs = a_cut * q1 + q0;
                let d_semi = (target - ps as f64 / qs as f64).abs();
                let d_best = (target - best.0 as f64 / best.1 as f64).abs();
                if d_semi < d_best {
                    best = (ps, qs);
                }
            }
            break;
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        best = (p1, q1);
    }

    let (p, q) = best;
    if q <= 0 || q as u128 > max_den as u128 {
        return None;
    }
    let value = p as f64 / q as f64;
    if (value - target).abs() > tol {
        return None;
    }
    let p = i64::try_from(if negative { -p } else { p }).ok()?;
    Some((p, q as u64))
}

/// Render `x` as a reduced fraction string under the crate-wide bounds, when
/// one exists (`"1/3"`, `"2"` for integers).
pub fn fraction_string(x: f64) -> Option<String> {
    let (p, q) = approx_fraction(x, MAX_FRACTION_DENOMINATOR, FRACTION_TOLERANCE)?;
    Some(if q == 1 {
        format!("{p}")
    } else {
        format!("{p}/{q}")
    })
}

/// Reconstruct every entry of a probability vector as a fraction, and verify
/// the reconstruction sums exactly to 1.
///
/// The exact-sum check rejects spurious reconstructions of genuinely
/// irrational vectors; callers fall back to decimals when it fails.
pub fn fraction_probabilities(probs: &[f64]) -> Option<Vec<(i64, u64)>> {
    let fractions: Option<Vec<(i64, u64)>> = probs
        .iter()
        .map(|&p| approx_fraction(p, MAX_FRACTION_DENOMINATOR, FRACTION_TOLERANCE))
        .collect();
    let fractions = fractions?;
    // Sum p_i/q_i exactly over a common denominator, with overflow checks.
    let mut lcm: u128 = 1;
    for &(_, q) in &fractions {
        lcm = lcm.checked_mul(u128::from(q) / gcd(lcm, u128::from(q)))?;
        if lcm > u128::MAX / 2 {
            return None;
        }
    }
    let mut numerator_sum: i128 = 0;
    for &(p, q) in &fractions {
        let scale = (lcm / u128::from(q)) as i128;
        numerator_sum = numerator_sum.checked_add(i128::from(p).checked_mul(scale)?)?;
    }
    if numerator_sum >= 0 && numerator_sum as u128 == lcm {
        Some(fractions)
    } else {
        None
    }
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

/// Render `x` as its fraction when one reconstructs, else as a 12-digit
/// decimal.
pub fn fraction_or_decimal(x: f64) -> String {
    fraction_string(x).unwrap_or_else(|| sig12(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digit_rendering() {
        assert_eq!(sig12(0.0), "0");
        assert_eq!(sig12(0.5), "0.5");
        assert_eq!(sig12(2.0_f64), "2");
        assert_eq!(sig12(10.0_f64.log2()), "3.32192809489");
        assert_eq!(sig12(1.0 / 3.0), "0.333333333333");
        assert_eq!(sig12(-0.25), "-0.25");
        assert_eq!(significant(1234.5678, 6), "1234.57");
    }

    #[test]
    fn reconstructs_simple_fractions() {
        assert_eq!(approx_fraction(0.5, 1_000_000, 1e-9), Some((1, 2)));
        assert_eq!(approx_fraction(1.0 / 3.0, 1_000_000, 1e-9), Some((1, 3)));
        assert_eq!(approx_fraction(-0.3, 1_000_000, 1e-9), Some((-3, 10)));
        assert_eq!(approx_fraction(3.0, 1_000_000, 1e-9), Some((3, 1)));
        assert_eq!(approx_fraction(13.0 / 30.0, 1_000_000, 1e-9), Some((13, 30)));
    }

    #[test]
    fn respects_denominator_bound() {
        // 1/1000003 needs a denominator above the bound; nothing within
        // tolerance has a small one.
        assert_eq!(approx_fraction(1.0 / 1_000_003.0, 1_000_000, 1e-12), None);
        assert_eq!(approx_fraction(1.0 / 7.0, 6, 1e-9), None);
        assert_eq!(approx_fraction(1.0 / 7.0, 7, 1e-9), Some((1, 7)));
    }

    #[test]
    fn probability_vectors_must_sum_to_one_exactly() {
        let probs = vec![1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0];
        let fractions = fraction_probabilities(&probs).unwrap();
        assert_eq!(fractions, vec![(1, 3), (1, 3), (1, 3)]);
        // Entries reconstruct individually but the reconstruction does not
        // sum to 1, so the vector rendering falls back to decimals.
        assert!(fraction_probabilities(&[0.5, 0.25]).is_none());
    }

    #[test]
    fn fraction_strings() {
        assert_eq!(fraction_string(0.1).as_deref(), Some("1/10"));
        assert_eq!(fraction_string(2.0).as_deref(), Some("2"));
        assert_eq!(fraction_or_decimal(0.25), "1/4");
    }
}
