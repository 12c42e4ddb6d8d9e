//! Bessel-function ratios behind the backstepping gain kernels.
//!
//! The kernels only ever need `I1(z)/z` and `J1(z)/z`, whose singularity at
//! `z = 0` is removable. Both are evaluated from the squared argument
//! `z2 = z²` so that no square root of a slightly negative rounding residue
//! is ever taken:
//!
//! ```text
//! I1(z)/z = ½ Σ_{m≥0} ( z2/4)^m / (m! (m+1)!)
//! J1(z)/z = ½ Σ_{m≥0} (-z2/4)^m / (m! (m+1)!)
//! ```
//!
//! The `I1` terms are all positive and sum in plain `f64`. The alternating
//! `J1` series cancels by a factor of roughly `I1(z)/|J1(z)|`, which already
//! exceeds 1e4 at `z = 10`, so beyond `z2 = 16` it is accumulated in
//! double-double arithmetic. Past `z2 = 1600` the cancellation would eat the
//! extra precision too, and `J1` switches to its Hankel asymptotic expansion.

use crate::error::{Error, Result};

/// Largest squared argument accepted by either ratio.
pub const MAX_Z2: f64 = 1.0e4;

/// Above this squared argument `J1(z)/z` uses the asymptotic expansion.
const J1_ASYMPTOTIC_Z2: f64 = 1600.0;

/// Up to here the `J1` cancellation costs at most about two digits, so
/// plain double accumulation is enough.
const J1_PLAIN_Z2: f64 = 16.0;

const MAX_TERMS: usize = 400;

/// `I1(√z2)/√z2` for `z2 ≥ 0`; equals 1/2 at `z2 = 0`.
pub fn bessel_i1_ratio(z2: f64) -> Result<f64> {
    check_arg(z2, "bessel_i1_ratio")?;
    Ok(plain_series(z2, 1.0))
}

/// `J1(√z2)/√z2` for `z2 ≥ 0`; equals 1/2 at `z2 = 0`.
pub fn bessel_j1_ratio(z2: f64) -> Result<f64> {
    check_arg(z2, "bessel_j1_ratio")?;
    if z2 > J1_ASYMPTOTIC_Z2 {
        let z = z2.sqrt();
        return Ok(j1_hankel(z) / z);
    }
    if z2 <= J1_PLAIN_Z2 {
        return Ok(plain_series(z2, -1.0));
    }
    Ok(ratio_series(z2, -1.0))
}

fn check_arg(z2: f64, name: &str) -> Result<()> {
    if z2.is_nan() || z2 < 0.0 {
        return Err(Error::Domain(format!("{name}: squared argument {z2} is negative")));
    }
    if z2 > MAX_Z2 {
        return Err(Error::Domain(format!(
            "{name}: squared argument {z2} exceeds the supported cap {MAX_Z2}"
        )));
    }
    Ok(())
}

/// Ascending series in plain `f64`. Exact enough for the all-positive `I1`
/// series and for `J1` at small arguments; the gain kernels call this in the
/// inner loops.
fn plain_series(z2: f64, sign: f64) -> f64 {
    let q = sign * z2 * 0.25;
    let mut term = 0.5;
    let mut sum = 0.5;
    let peak = 0.5 * z2.sqrt();
    for m in 1..MAX_TERMS {
        let mf = m as f64;
        term *= q / (mf * (mf + 1.0));
        sum += term;
        if mf > peak && term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// Ascending series with sign `+1` (modified) or `-1` (ordinary).
fn ratio_series(z2: f64, sign: f64) -> f64 {
    let q = Dd::from(sign * z2 * 0.25);
    let mut term = Dd::from(0.5);
    let mut sum = term;
    // Terms grow until m ≈ z/2, so only test for convergence past the peak.
    let peak = 0.5 * z2.sqrt();
    for m in 1..MAX_TERMS {
        let mf = m as f64;
        term = term.mul(q).div_f64(mf * (mf + 1.0));
        sum = sum.add(term);
        if mf > peak && term.hi.abs() <= 1e-17 * sum.hi.abs() {
            break;
        }
    }
    sum.to_f64()
}

/// Hankel expansion of `J1(z)` for large `z`.
fn j1_hankel(z: f64) -> f64 {
    let mu = 4.0;
    let eight_z = 8.0 * z;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    for k in 1..40 {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (k as f64 * eight_z);
        let signed = if (k / 2) % 2 == 0 { term } else { -term };
        if k % 2 == 1 {
            q += signed;
        } else {
            p += signed;
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    let chi = z - 0.75 * std::f64::consts::PI;
    (2.0 / (std::f64::consts::PI * z)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// Unevaluated sum `hi + lo` carrying roughly 32 significant digits.
#[derive(Debug, Clone, Copy)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl From<f64> for Dd {
    fn from(v: f64) -> Self {
        Dd { hi: v, lo: 0.0 }
    }
}

impl Dd {
    fn two_sum(a: f64, b: f64) -> (f64, f64) {
        let s = a + b;
        let bb = s - a;
        (s, (a - (s - bb)) + (b - bb))
    }

    fn quick_two_sum(a: f64, b: f64) -> Dd {
        let s = a + b;
        Dd { hi: s, lo: b - (s - a) }
    }

    fn add(self, o: Dd) -> Dd {
        let (s, e) = Self::two_sum(self.hi, o.hi);
        let (t, f) = Self::two_sum(self.lo, o.lo);
        let r = Self::quick_two_sum(s, e + t);
        Self::quick_two_sum(r.hi, r.lo + f)
    }

    fn mul(self, o: Dd) -> Dd {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p);
        Self::quick_two_sum(p, e + (self.hi * o.lo + self.lo * o.hi))
    }

    fn div_f64(self, d: f64) -> Dd {
        let q1 = self.hi / d;
        // remainder self - q1*d, computed exactly for the leading part
        let p = q1 * d;
        let e = q1.mul_add(d, -p);
        let r = (self.hi - p - e + self.lo) / d;
        Self::quick_two_sum(q1, r)
    }

    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Plain f64 series, kept only as a sanity oracle for small arguments.
    fn naive_series(z2: f64, sign: f64, terms: usize) -> f64 {
        let mut term = 0.5;
        let mut sum = term;
        for m in 1..terms {
            let mf = m as f64;
            term *= sign * z2 * 0.25 / (mf * (mf + 1.0));
            sum += term;
        }
        sum
    }

    #[test]
    fn limits_at_zero() {
        assert_eq!(bessel_i1_ratio(0.0).unwrap(), 0.5);
        assert_eq!(bessel_j1_ratio(0.0).unwrap(), 0.5);
    }

    #[test]
    fn known_values() {
        // I1(1), I1(2)/2, J1(1) from a 30-term series oracle
        let cases = [
            (1.0, naive_series(1.0, 1.0, 30), 0.565_159_103_992_485),
            (4.0, naive_series(4.0, 1.0, 30), 0.795_318_427_318_665),
        ];
        for (z2, oracle, frozen) in cases {
            let v = bessel_i1_ratio(z2).unwrap();
            assert!((v - oracle).abs() < 1e-15);
            assert!((v - frozen).abs() < 1e-14);
        }
        let j = bessel_j1_ratio(1.0).unwrap();
        assert!((j - 0.440_050_585_744_933_5).abs() < 1e-15);
    }

    #[test]
    fn j1_ratio_vanishes_at_first_zero() {
        // first positive zero of J1, located by bisection on the series itself
        let (mut lo, mut hi) = (3.5_f64, 4.0_f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if naive_series(mid * mid, -1.0, 60) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let root = 0.5 * (lo + hi);
        assert!((root - 3.831_705_970_207_512).abs() < 1e-12);
        assert!(bessel_j1_ratio(root * root).unwrap().abs() < 1e-14);
    }

    #[test]
    fn series_and_asymptotic_branches_agree() {
        let z2 = J1_ASYMPTOTIC_Z2 * 1.05;
        let series = ratio_series(z2, -1.0);
        let asym = j1_hankel(z2.sqrt()) / z2.sqrt();
        assert!((series - asym).abs() < 1e-15, "{series} vs {asym}");
    }

    #[test]
    fn plain_and_double_double_branches_agree() {
        for z2 in [0.3, 2.7, 9.0, J1_PLAIN_Z2] {
            assert!((plain_series(z2, -1.0) - ratio_series(z2, -1.0)).abs() < 1e-16);
            assert!((plain_series(z2, 1.0) - ratio_series(z2, 1.0)).abs() < 1e-15 * plain_series(z2, 1.0));
        }
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(bessel_i1_ratio(-1e-3), Err(Error::Domain(_))));
        assert!(matches!(bessel_j1_ratio(-1.0), Err(Error::Domain(_))));
        assert!(matches!(bessel_i1_ratio(MAX_Z2 * 2.0), Err(Error::Domain(_))));
        assert!(matches!(bessel_j1_ratio(f64::NAN), Err(Error::Domain(_))));
        assert!(bessel_i1_ratio(MAX_Z2).unwrap().is_finite());
        assert!(bessel_j1_ratio(MAX_Z2).unwrap().is_finite());
    }
}
