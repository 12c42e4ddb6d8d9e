//! The true one-phase Stefan system on a boundary-immobilized grid.
//!
//! With `ξ = x / s(t)` the liquid domain `[0, s(t)]` maps onto `[0, 1]` and
//! `u = T - Tm` obeys
//!
//! ```text
//! u_t = (α/s²) u_ξξ + (ξ ṡ / s) u_ξ,   u_ξ(0) = -(q_c/k) s,   u(1) = 0,
//! ṡ   = -(β/s) u_ξ(1).
//! ```
//!
//! Diffusion and the front-fixing convection term are backward Euler with
//! central differences and a ghost node for the flux condition. For a given
//! convection velocity the step is linear; the interface is advanced by
//! explicit Euler with the flux of the freshly computed profile, and the two
//! are iterated until the velocity used in the convection term is the one the
//! interface moves with. Without that agreement the discrete energy balance
//! picks up a first-order error in `dt` from the velocity lag.

use crate::error::{Error, Result};
use crate::numerics::{right_slope, solve_tridiagonal};
use crate::params::{PhysicalParams, ScenarioConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct PlantState {
    /// Time, s.
    pub t: f64,
    /// Interface position, m.
    pub s: f64,
    /// Interface velocity from the last step, m·s⁻¹.
    pub sdot: f64,
    /// `u = T - Tm` at `ξ_i = i/N`, `i = 0..=N`; the last sample is pinned to 0.
    pub theta: Vec<f64>,
}

/// Per-step numerical indicators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    /// `dt · max|ξ ṡ/s| / Δξ` for the convection velocity used in the step.
    pub convection_cfl: f64,
    /// Passes needed to make the convection velocity and the Stefan update agree.
    pub iterations: usize,
}

/// Warning threshold for [`StepInfo::convection_cfl`].
pub const CFL_WARN: f64 = 0.5;

const MAX_COUPLING_ITERS: usize = 50;
const COUPLING_TOL: f64 = 1e-13;

impl PlantState {
    /// Linear initial profile `u(x, 0) = H (s0 - x)`.
    pub fn new(cfg: &ScenarioConfig, p: &PhysicalParams) -> Self {
        let theta = linear_profile(cfg.grid_n, cfg.h, cfg.s0);
        let mut st = Self { t: 0.0, s: cfg.s0, sdot: 0.0, theta };
        st.sdot = -p.beta() * st.interface_flux();
        st
    }

    pub fn grid_n(&self) -> usize {
        self.theta.len() - 1
    }

    /// `u_x` at the interface from the one-sided three-point stencil, K·m⁻¹.
    pub fn interface_flux(&self) -> f64 {
        right_slope(&self.theta, 1.0 / self.grid_n() as f64) / self.s
    }

    /// Advance by `dt` with boundary heat flux `qc` (W·m⁻²).
    ///
    /// The convection velocity and the Stefan update are iterated to a
    /// common `ṡ`, starting from the velocity of the previous step.
    pub fn step(&mut self, qc: f64, dt: f64, p: &PhysicalParams) -> Result<StepInfo> {
        let h = 1.0 / self.grid_n() as f64;
        let t = self.t + dt;
        let mut sdot = self.sdot;
        for iterations in 1..=MAX_COUPLING_ITERS {
            let next = advance_profile(&self.theta, self.s, sdot, -qc / p.k, None, p.alpha(), dt)?;
            let updated = -p.beta() * right_slope(&next, h) / self.s;
            let change = (updated - sdot).abs();
            sdot = updated;
            let s = self.s + dt * sdot;
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::BlowUp { t, reason: format!("interface position became {s}") });
            }
            if change <= COUPLING_TOL * sdot.abs() || change == 0.0 {
                let info = StepInfo { convection_cfl: convection_cfl(self.s, sdot, self.grid_n(), dt), iterations };
                self.theta = next;
                self.sdot = sdot;
                self.s = s;
                self.t = t;
                return Ok(info);
            }
        }
        Err(Error::Numerical(format!(
            "interface velocity did not settle within {MAX_COUPLING_ITERS} iterations at t = {t} s (last {sdot})"
        )))
    }
}

/// `slope · s0 · (1 - ξ_i)` on `n + 1` nodes.
pub fn linear_profile(n: usize, slope: f64, s0: f64) -> Vec<f64> {
    let mut v: Vec<f64> = (0..=n).map(|i| slope * s0 * (1.0 - i as f64 / n as f64)).collect();
    v[n] = 0.0;
    v
}

pub(crate) fn convection_cfl(s: f64, sdot: f64, n: usize, dt: f64) -> f64 {
    dt * (sdot / s).abs() * n as f64
}

/// One step of the front-fixed heat equation shared by the plant and the
/// observer.
///
/// `extent` is the physical length the grid is mapped onto during the step,
/// `velocity` the interface velocity used in the convection term,
/// `slope_at_origin` the imposed `u_x(0)` (K·m⁻¹) and `source` an optional
/// explicit source in K·s⁻¹ per node.
pub(crate) fn advance_profile(
    theta: &[f64],
    extent: f64,
    velocity: f64,
    slope_at_origin: f64,
    source: Option<&[f64]>,
    alpha: f64,
    dt: f64,
) -> Result<Vec<f64>> {
    let n = theta.len() - 1;
    let h = 1.0 / n as f64;
    let r = alpha / (extent * extent) * dt / (h * h);
    let drift = velocity / extent;
    let ghost_slope = slope_at_origin * extent;

    let mut lower = vec![-r; n];
    let diag = vec![1.0 + 2.0 * r; n];
    let mut upper = vec![-r; n];
    let mut rhs = theta[..n].to_vec();

    upper[0] = -2.0 * r;
    rhs[0] -= 2.0 * r * h * ghost_slope;
    for i in 1..n {
        let c = 0.5 * dt * i as f64 * drift;
        lower[i] += c;
        upper[i] -= c;
    }
    if let Some(src) = source {
        for (r, s) in rhs.iter_mut().zip(src) {
            *r += dt * s;
        }
    }
    lower[0] = 0.0;
    upper[n - 1] = 0.0;

    solve_tridiagonal(&lower, &diag, &upper, &mut rhs)?;
    rhs.push(0.0);
    Ok(rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::trapezoid;

    fn unit_params() -> PhysicalParams {
        PhysicalParams::new(1.0, 1.0, 1.0, 1.0, 0.0).unwrap()
    }

    #[test]
    fn initial_profile_samples() {
        let cfg = ScenarioConfig { grid_n: 4, h: 100.0, s0: 0.01, ..ScenarioConfig::zinc_reference() };
        let st = PlantState::new(&cfg, &PhysicalParams::zinc());
        let expected = [1.0, 0.75, 0.5, 0.25, 0.0];
        for (a, b) in st.theta.iter().zip(expected) {
            assert!((a - b).abs() < 1e-14);
        }
        assert_eq!(st.s, 0.01);
        assert_eq!(*st.theta.last().unwrap(), 0.0);

        let flat = ScenarioConfig { h: 0.0, ..cfg };
        assert!(PlantState::new(&flat, &PhysicalParams::zinc()).theta.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn zero_state_is_an_equilibrium() {
        let cfg = ScenarioConfig { h: 0.0, grid_n: 20, ..ScenarioConfig::zinc_reference() };
        let p = PhysicalParams::zinc();
        let mut st = PlantState::new(&cfg, &p);
        let before = st.clone();
        st.step(0.0, 0.1, &p).unwrap();
        assert_eq!(st.theta, before.theta);
        assert_eq!(st.s, before.s);
        assert_eq!(st.sdot, 0.0);
    }

    #[test]
    fn interface_flux_stencils() {
        let n = 10;
        let s = 0.3;
        let xs: Vec<f64> = (0..=n).map(|i| s * i as f64 / n as f64).collect();
        let linear = PlantState { t: 0.0, s, sdot: 0.0, theta: xs.iter().map(|x| 7.0 * (s - x)).collect() };
        assert!((linear.interface_flux() + 7.0).abs() < 1e-12);
        let quad = PlantState { theta: xs.iter().map(|x| (s - x) * (s - x)).collect(), ..linear.clone() };
        assert!(quad.interface_flux().abs() < 1e-12);
        let zero = PlantState { theta: vec![0.0; n + 1], ..linear };
        assert_eq!(zero.interface_flux(), 0.0);
    }

    #[test]
    fn matched_flux_keeps_linear_profile_and_speed() {
        // u = A (s - x) with q_c = k A satisfies the flux condition exactly;
        // it is only quasi-steady while the Péclet number β A s / α is small
        let p = PhysicalParams::new(1.0, 1.0, 1.0, 1000.0, 0.0).unwrap();
        let a = 2.0;
        let s = 1.0;
        let n = 200;
        let theta: Vec<f64> = (0..=n).map(|i| a * s * (1.0 - i as f64 / n as f64)).collect();
        let mut st = PlantState { t: 0.0, s, sdot: p.beta() * a, theta };
        st.step(p.k * a, 1e-4, &p).unwrap();
        let expected = p.beta() * a;
        assert!((st.sdot - expected).abs() / expected < 1e-2, "sdot = {}", st.sdot);
    }

    #[test]
    fn dirichlet_node_stays_pinned_and_interface_advances() {
        let p = PhysicalParams::zinc();
        let cfg = ScenarioConfig { grid_n: 32, ..ScenarioConfig::zinc_reference() };
        let mut st = PlantState::new(&cfg, &p);
        let mut last = st.s;
        for _ in 0..200 {
            st.step(200.0, 0.01, &p).unwrap();
            assert_eq!(*st.theta.last().unwrap(), 0.0);
            assert!(st.s > last);
            last = st.s;
            assert!(st.theta.iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn one_step_energy_balance() {
        // Δ[(1/α)∫u dx + s/β] = dt q_c / k up to O(Δξ²) once the convection
        // velocity and the Stefan update agree
        let p = PhysicalParams::zinc();
        let qc = 150.0;
        let dt = 1e-3;
        let residual = |n: usize| {
            let cfg = ScenarioConfig { grid_n: n, ..ScenarioConfig::zinc_reference() };
            let mut st = PlantState::new(&cfg, &p);
            let energy = |st: &PlantState| {
                st.s * trapezoid(&st.theta, 1.0 / st.grid_n() as f64) / p.alpha() + st.s / p.beta()
            };
            let e0 = energy(&st);
            st.step(qc, dt, &p).unwrap();
            (energy(&st) - e0 - dt * qc / p.k).abs()
        };
        let (coarse, fine) = (residual(400), residual(800));
        assert!(fine < 0.05 * dt * qc / p.k, "residual {fine}");
        assert!(coarse / fine > 3.0, "{coarse} -> {fine}");
    }

    #[test]
    fn rejects_negative_interface() {
        let p = unit_params();
        let n = 16;
        // strongly negative interior temperatures pull the front backwards
        let theta: Vec<f64> = (0..=n).map(|i| if i == n { 0.0 } else { -1e6 }).collect();
        let mut st = PlantState { t: 0.0, s: 0.01, sdot: 0.0, theta };
        assert!(matches!(st.step(0.0, 1.0, &p), Err(Error::BlowUp { .. })));
    }
}
