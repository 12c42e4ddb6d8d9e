//! Backstepping kernels and the Volterra transforms built on them.
//!
//! These only serve the diagnostic layer: the closed loop needs the control
//! law and the observer gain, never the transformed fields. Profiles are
//! sampled on the normalized grid `ξ_i = i/N` mapped to `[0, s]`, and every
//! integral `∫ₓ^s K(x, y) f(y) dy` is a trapezoid sum over nodes `j ≥ i`.
//!
//! * error pair: `ũ = w̃ + ∫ P w̃`, `w̃ = ũ - ∫ Q ũ`, with
//!   `P = (λ/α) y I1(z)/z`, `Q = (λ/α) y J1(z)/z`, `z² = (λ/α)(y² - x²)`;
//! * controller pair: `ŵ = û - (c/α) ∫ (x - y) û + (c/β)(s - x) X` and
//!   `û = ŵ + (β/α) ∫ ψ(x - y) ŵ + ψ(x - s) X`, with
//!   `ψ(x) = (c/β) √(α/c) sin(√(c/α) x)`.

use crate::error::{Error, Result};
use crate::specfun::{bessel_i1_ratio, bessel_j1_ratio};

fn kernel_arg(x: f64, y: f64, lambda: f64, alpha: f64) -> Result<f64> {
    if !(0.0 <= x && x <= y) {
        return Err(Error::Domain(format!("kernel needs 0 ≤ x ≤ y, got x = {x}, y = {y}")));
    }
    Ok(lambda / alpha * (y - x) * (y + x))
}

/// Direct-transform kernel `P(x, y)`, m⁻¹.
pub fn kernel_p(x: f64, y: f64, lambda: f64, alpha: f64) -> Result<f64> {
    let z2 = kernel_arg(x, y, lambda, alpha)?;
    Ok(lambda / alpha * y * bessel_i1_ratio(z2)?)
}

/// Inverse-transform kernel `Q(x, y)`, m⁻¹.
pub fn kernel_q(x: f64, y: f64, lambda: f64, alpha: f64) -> Result<f64> {
    let z2 = kernel_arg(x, y, lambda, alpha)?;
    Ok(lambda / alpha * y * bessel_j1_ratio(z2)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    P,
    Q,
}

/// Kernel values on the upper triangle `{(ξ_i s, ξ_j s) : i ≤ j}`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelField {
    pub kind: KernelKind,
    pub s: f64,
    /// `rows[i][j - i] = K(ξ_i s, ξ_j s)`.
    rows: Vec<Vec<f64>>,
}

impl KernelField {
    pub fn new(kind: KernelKind, n: usize, s: f64, lambda: f64, alpha: f64) -> Result<Self> {
        let eval = match kind {
            KernelKind::P => kernel_p,
            KernelKind::Q => kernel_q,
        };
        let node = |i: usize| if i == n { s } else { s * i as f64 / n as f64 };
        let rows = (0..=n)
            .map(|i| (i..=n).map(|j| eval(node(i), node(j), lambda, alpha)).collect())
            .collect::<Result<Vec<Vec<f64>>>>()?;
        Ok(Self { kind, s, rows })
    }

    pub fn grid_n(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i][j - i]
    }

    /// `∫_{x_i}^s K(x_i, y) f(y) dy` at every node.
    pub fn integrate(&self, f: &[f64]) -> Vec<f64> {
        let n = self.grid_n();
        let h = self.s / n as f64;
        self.rows
            .iter()
            .enumerate()
            .map(|(i, row)| volterra_row(row, &f[i..], h))
            .collect()
    }
}

fn volterra_row(kernel: &[f64], f: &[f64], h: f64) -> f64 {
    let m = kernel.len();
    if m < 2 {
        return 0.0;
    }
    let inner: f64 = (1..m - 1).map(|j| kernel[j] * f[j]).sum();
    h * (0.5 * (kernel[0] * f[0] + kernel[m - 1] * f[m - 1]) + inner)
}

fn check_len(f: &[f64]) -> Result<usize> {
    if f.len() < 3 {
        return Err(Error::Domain(format!("field needs at least 3 samples, got {}", f.len())));
    }
    Ok(f.len() - 1)
}

/// `w + ∫ₓ^s P(x, y) w(y) dy`.
pub fn apply_direct(w: &[f64], s: f64, lambda: f64, alpha: f64) -> Result<Vec<f64>> {
    let n = check_len(w)?;
    let kernel = KernelField::new(KernelKind::P, n, s, lambda, alpha)?;
    Ok(w.iter().zip(kernel.integrate(w)).map(|(a, b)| a + b).collect())
}

/// `u - ∫ₓ^s Q(x, y) u(y) dy`.
pub fn apply_inverse(u: &[f64], s: f64, lambda: f64, alpha: f64) -> Result<Vec<f64>> {
    let n = check_len(u)?;
    let kernel = KernelField::new(KernelKind::Q, n, s, lambda, alpha)?;
    Ok(u.iter().zip(kernel.integrate(u)).map(|(a, b)| a - b).collect())
}

/// `ψ(x) = (c/β) √(α/c) sin(√(c/α) x)`; odd in `x`.
pub fn psi(x: f64, c: f64, alpha: f64, beta: f64) -> f64 {
    if c == 0.0 {
        return 0.0;
    }
    let omega = (c / alpha).sqrt();
    c / beta / omega * (omega * x).sin()
}

/// Controller transform `ŵ = û - (c/α) ∫ₓ^s (x - y) û dy + (c/β)(s - x) X`.
pub fn controller_transform(u: &[f64], x_err: f64, s: f64, c: f64, alpha: f64, beta: f64) -> Result<Vec<f64>> {
    let n = check_len(u)?;
    let h = s / n as f64;
    let node = |i: usize| s * i as f64 / n as f64;
    Ok((0..=n)
        .map(|i| {
            let x = node(i);
            let kernel: Vec<f64> = (i..=n).map(|j| x - node(j)).collect();
            u[i] - c / alpha * volterra_row(&kernel, &u[i..], h) + c / beta * (s - x) * x_err
        })
        .collect())
}

/// Inverse controller transform `û = ŵ + (β/α) ∫ₓ^s ψ(x - y) ŵ dy + ψ(x - s) X`.
pub fn controller_inverse(w: &[f64], x_err: f64, s: f64, c: f64, alpha: f64, beta: f64) -> Result<Vec<f64>> {
    let n = check_len(w)?;
    let h = s / n as f64;
    let node = |i: usize| s * i as f64 / n as f64;
    Ok((0..=n)
        .map(|i| {
            let x = node(i);
            let kernel: Vec<f64> = (i..=n).map(|j| psi(x - node(j), c, alpha, beta)).collect();
            w[i] + beta / alpha * volterra_row(&kernel, &w[i..], h) + psi(x - s, c, alpha, beta) * x_err
        })
        .collect())
}

/// `∫₀^s P(x, s) dx` by composite Simpson on 64 panels.
pub fn kernel_p_integral(s: f64, lambda: f64, alpha: f64) -> Result<f64> {
    const PANELS: usize = 64;
    if lambda == 0.0 {
        return Ok(0.0);
    }
    let h = s / PANELS as f64;
    let mut acc = kernel_p(0.0, s, lambda, alpha)? + kernel_p(s, s, lambda, alpha)?;
    for i in 1..PANELS {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * kernel_p(i as f64 * h, s, lambda, alpha)?;
    }
    Ok(acc * h / 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observer::observer_gain;
    use crate::params::PhysicalParams;

    const LAMBDA: f64 = 0.001;

    fn alpha() -> f64 {
        PhysicalParams::zinc().alpha()
    }

    #[test]
    fn kernel_diagonal_and_zero_gain() {
        let a = alpha();
        for y in [0.0, 0.1, 0.35] {
            assert!((kernel_p(y, y, LAMBDA, a).unwrap() - LAMBDA * y / (2.0 * a)).abs() < 1e-14);
            assert!((kernel_q(y, y, LAMBDA, a).unwrap() - LAMBDA * y / (2.0 * a)).abs() < 1e-14);
            assert_eq!(kernel_p(0.0, y, 0.0, a).unwrap(), 0.0);
            assert_eq!(kernel_q(0.0, y, 0.0, a).unwrap(), 0.0);
        }
        assert!(matches!(kernel_p(0.2, 0.1, LAMBDA, a), Err(Error::Domain(_))));
        assert!(kernel_q(0.2, 0.1, LAMBDA, a).is_err());
    }

    #[test]
    fn observer_gain_is_scaled_kernel() {
        let a = alpha();
        for x in [0.0, 0.07, 0.2, 0.3] {
            let p = kernel_p(x, 0.3, LAMBDA, a).unwrap();
            let g = observer_gain(x, 0.3, LAMBDA, a).unwrap();
            assert!((g + a * p).abs() < 1e-15 * p.abs().max(1.0));
        }
    }

    #[test]
    fn q_never_exceeds_p() {
        let a = alpha();
        let field_p = KernelField::new(KernelKind::P, 40, 0.35, 0.05, a).unwrap();
        let field_q = KernelField::new(KernelKind::Q, 40, 0.35, 0.05, a).unwrap();
        for i in 0..=40 {
            for j in i..=40 {
                assert!(field_q.get(i, j) <= field_p.get(i, j));
                assert!(field_p.get(i, j) >= 0.0);
            }
        }
    }

    #[test]
    fn zero_field_and_zero_gain() {
        let a = alpha();
        let zero = vec![0.0; 21];
        assert!(apply_direct(&zero, 0.3, LAMBDA, a).unwrap().iter().all(|&v| v == 0.0));
        assert!(apply_inverse(&zero, 0.3, LAMBDA, a).unwrap().iter().all(|&v| v == 0.0));
        let f: Vec<f64> = (0..=20).map(|i| (i as f64 * 0.3).cos()).collect();
        assert_eq!(apply_direct(&f, 0.3, 0.0, a).unwrap(), f);
        assert_eq!(apply_inverse(&f, 0.3, 0.0, a).unwrap(), f);
    }

    #[test]
    fn psi_basics() {
        let (a, b) = (alpha(), PhysicalParams::zinc().beta());
        let c = 0.001;
        assert_eq!(psi(0.0, c, a, b), 0.0);
        let h = 1e-6;
        let slope = (psi(h, c, a, b) - psi(-h, c, a, b)) / (2.0 * h);
        assert!((slope - c / b).abs() < 1e-8 * c / b);
        assert_eq!(psi(-0.1, c, a, b), -psi(0.1, c, a, b));
    }

    #[test]
    fn controller_transform_boundaries() {
        let (a, b) = (alpha(), PhysicalParams::zinc().beta());
        let zero = vec![0.0; 11];
        assert!(controller_transform(&zero, 0.0, 0.2, 0.001, a, b).unwrap().iter().all(|&v| v == 0.0));
        assert!(controller_inverse(&zero, 0.0, 0.2, 0.001, a, b).unwrap().iter().all(|&v| v == 0.0));
        let u: Vec<f64> = (0..=10).map(|i| 1.0 - (i as f64 / 10.0).powi(2)).collect();
        let w = controller_transform(&u, -0.1, 0.2, 0.001, a, b).unwrap();
        assert_eq!(*w.last().unwrap(), 0.0);
    }

    #[test]
    fn kernel_integral_matches_fine_trapezoid() {
        let a = alpha();
        let s = 0.3;
        let n = 4000;
        let h = s / n as f64;
        let mut trap = 0.0;
        for i in 0..=n {
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            trap += w * kernel_p(i as f64 * h, s, LAMBDA, a).unwrap();
        }
        trap *= h;
        assert!((kernel_p_integral(s, LAMBDA, a).unwrap() - trap).abs() < 1e-6);
    }
}
