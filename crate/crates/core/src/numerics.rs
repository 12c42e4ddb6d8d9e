//! Grid-level numerical kernels shared by the plant, the observer and the
//! diagnostics: the Thomas tridiagonal solver, trapezoid quadrature on the
//! uniform normalized grid, and the finite-difference stencils.

use crate::error::{Error, Result};

/// Solve a tridiagonal system in place with the Thomas algorithm.
///
/// `lower[i]` multiplies `x[i-1]` in row `i` (`lower[0]` is ignored) and
/// `upper[i]` multiplies `x[i+1]` (`upper[n-1]` is ignored). On return `rhs`
/// holds the solution.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &mut [f64]) -> Result<()> {
    let n = rhs.len();
    if n == 0 || diag.len() != n || lower.len() != n || upper.len() != n {
        return Err(Error::Numerical(format!(
            "tridiagonal size mismatch: rhs {n}, diag {}, lower {}, upper {}",
            diag.len(),
            lower.len(),
            upper.len()
        )));
    }
    let mut c_prime = vec![0.0; n];
    let mut pivot = diag[0];
    if pivot == 0.0 || !pivot.is_finite() {
        return Err(Error::Numerical("zero pivot in tridiagonal solve".into()));
    }
    c_prime[0] = upper[0] / pivot;
    rhs[0] /= pivot;
    for i in 1..n {
        pivot = diag[i] - lower[i] * c_prime[i - 1];
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(Error::Numerical(format!("zero pivot in tridiagonal solve at row {i}")));
        }
        c_prime[i] = upper[i] / pivot;
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= c_prime[i] * rhs[i + 1];
    }
    if rhs.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite value in tridiagonal solution".into()));
    }
    Ok(())
}

/// Composite trapezoid rule for samples on a uniform grid with spacing `h`.
pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => {
            let interior: f64 = values[1..n - 1].iter().sum();
            h * (0.5 * (values[0] + values[n - 1]) + interior)
        }
    }
}

/// Trapezoid rule applied to `f(values[i])` without allocating.
pub fn trapezoid_map(values: &[f64], h: f64, f: impl Fn(f64) -> f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => {
            let interior: f64 = values[1..n - 1].iter().map(|&v| f(v)).sum();
            h * (0.5 * (f(values[0]) + f(values[n - 1])) + interior)
        }
    }
}

/// Second-order one-sided derivative at the right end of a uniform grid:
/// `(3 f_N - 4 f_{N-1} + f_{N-2}) / (2h)`.
pub fn right_slope(values: &[f64], h: f64) -> f64 {
    let n = values.len() - 1;
    (3.0 * values[n] - 4.0 * values[n - 1] + values[n - 2]) / (2.0 * h)
}

/// Second-order one-sided derivative at the left end of a uniform grid.
pub fn left_slope(values: &[f64], h: f64) -> f64 {
    (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h)
}

/// Derivative at every node: central differences inside, second-order
/// one-sided differences at both ends.
pub fn gradient(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    assert!(n >= 3, "gradient needs at least three samples");
    let mut out = Vec::with_capacity(n);
    out.push(left_slope(values, h));
    out.extend(values.windows(3).map(|w| (w[2] - w[0]) / (2.0 * h)));
    out.push(right_slope(values, h));
    out
}

/// Normalized grid coordinates `ξ_i = i / n`, `i = 0..=n`.
pub fn unit_grid(n: usize) -> Vec<f64> {
    (0..=n).map(|i| i as f64 / n as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_matches_dense_solution() {
        // [2 -1 0; -1 2 -1; 0 -1 2] x = [1 0 1] -> x = [1 1 1]
        let lower = [0.0, -1.0, -1.0];
        let diag = [2.0, 2.0, 2.0];
        let upper = [-1.0, -1.0, 0.0];
        let mut rhs = [1.0, 0.0, 1.0];
        solve_tridiagonal(&lower, &diag, &upper, &mut rhs).unwrap();
        for v in rhs {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn tridiagonal_rejects_zero_pivot() {
        let mut rhs = [1.0, 1.0];
        let err = solve_tridiagonal(&[0.0, 1.0], &[0.0, 1.0], &[1.0, 0.0], &mut rhs);
        assert!(matches!(err, Err(Error::Numerical(_))));
    }

    #[test]
    fn trapezoid_exact_for_linear() {
        let xs = unit_grid(10);
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 2.0 * x).collect();
        assert!((trapezoid(&ys, 0.1) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn one_sided_slopes_exact_for_quadratics() {
        let h = 0.125;
        let xs = unit_grid(8);
        let ys: Vec<f64> = xs.iter().map(|x| (1.0 - x) * (1.0 - x) + 0.5 * x).collect();
        assert!((right_slope(&ys, h) - 0.5).abs() < 1e-12);
        assert!((left_slope(&ys, h) - (-2.0 + 0.5)).abs() < 1e-12);
        let g = gradient(&ys, h);
        for (x, d) in xs.iter().zip(&g) {
            assert!((d - (-2.0 * (1.0 - x) + 0.5)).abs() < 1e-12);
        }
    }
}
