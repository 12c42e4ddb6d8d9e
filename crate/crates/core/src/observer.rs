//! Backstepping temperature observer driven only by the interface position.
//!
//! The observer is a copy of the plant model with output injection
//!
//! ```text
//! û_t = α û_xx - P1(x, Y) (Ẏ/β + û_x(Y)),   P1(x, s) = -λ s I1(z)/z,
//! z²  = (λ/α)(s² - x²),
//! ```
//!
//! run on the same normalized grid as the plant, rescaled to the measured
//! interface `Y(t)` at every step. Since profiles are stored in `ξ = x/Y`,
//! no re-interpolation is needed when the measured extent moves.

use crate::error::{Error, Result};
use crate::numerics::right_slope;
use crate::params::{PhysicalParams, ScenarioConfig};
use crate::plant::{advance_profile, linear_profile};
use crate::specfun::bessel_i1_ratio;

/// Observer gain `P1(x, s) = -λ s I1(√z2)/√z2` with `z2 = (λ/α)(s² - x²)`.
pub fn observer_gain(x: f64, s: f64, lambda: f64, alpha: f64) -> Result<f64> {
    if !(0.0..=s).contains(&x) {
        return Err(Error::Domain(format!("observer gain needs 0 ≤ x ≤ s, got x = {x}, s = {s}")));
    }
    let z2 = lambda / alpha * (s - x) * (s + x);
    Ok(-lambda * s * bessel_i1_ratio(z2)?)
}

/// `P1(ξ_i s, s)` at every node of an `n`-interval grid.
pub fn gain_profile(n: usize, s: f64, lambda: f64, alpha: f64) -> Result<Vec<f64>> {
    (0..=n)
        .map(|i| {
            let x = if i == n { s } else { s * i as f64 / n as f64 };
            observer_gain(x, s, lambda, alpha)
        })
        .collect()
}

/// Backward difference of two interface measurements.
pub fn estimate_interface_velocity(y_now: f64, y_prev: f64, dt: f64) -> f64 {
    (y_now - y_prev) / dt
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObserverState {
    /// Time, s.
    pub t: f64,
    /// Most recent measurement `Y(t)`, m.
    pub y_prev: f64,
    /// Interface-velocity estimate `Ẏ` over the last step, m·s⁻¹; it is also
    /// the front-fixing convection velocity of that step.
    pub ydot: f64,
    /// Extent the current profile was advanced on; the innovation divides
    /// the ξ-slope by it, matching the plant's Stefan update.
    pub scale: f64,
    /// `û = T̂ - Tm` at `ξ_i = i/N`; the last sample is pinned to 0.
    pub theta_hat: Vec<f64>,
}

impl ObserverState {
    /// Initial estimate `û(x, 0) = Ĥ (s0 - x)` with the model-consistent
    /// velocity `-β û_x(s0, 0)`.
    pub fn new(cfg: &ScenarioConfig, p: &PhysicalParams) -> Self {
        let theta_hat = linear_profile(cfg.grid_n, cfg.h_hat, cfg.s0);
        let mut ob = Self { t: 0.0, y_prev: cfg.s0, ydot: 0.0, scale: cfg.s0, theta_hat };
        ob.ydot = -p.beta() * ob.interface_flux();
        ob
    }

    pub fn grid_n(&self) -> usize {
        self.theta_hat.len() - 1
    }

    /// `û_x` at the measured interface, K·m⁻¹.
    pub fn interface_flux(&self) -> f64 {
        right_slope(&self.theta_hat, 1.0 / self.grid_n() as f64) / self.y_prev
    }

    /// Measurement mismatch `Ẏ/β + û_x(Y)` that drives the injection.
    pub fn innovation(&self, beta: f64) -> f64 {
        self.ydot / beta + right_slope(&self.theta_hat, 1.0 / self.grid_n() as f64) / self.scale
    }

    /// Assimilate the measurement `y_now` taken `dt` after the previous one,
    /// with the heat flux `qc` that acted on the plant over the interval.
    /// The injection uses the innovation at the start of the interval; the
    /// measured displacement over the interval sets the convection velocity.
    ///
    /// `smoothing` is the exponential-smoothing weight on the previous
    /// velocity estimate; 0 returns the raw backward difference.
    pub fn step(
        &mut self,
        y_now: f64,
        qc: f64,
        dt: f64,
        lambda: f64,
        smoothing: f64,
        p: &PhysicalParams,
    ) -> Result<()> {
        if !(y_now.is_finite() && y_now > 0.0) {
            return Err(Error::BlowUp { t: self.t + dt, reason: format!("measurement Y = {y_now}") });
        }
        let alpha = p.alpha();
        let extent = self.y_prev;
        let innovation = self.innovation(p.beta());
        let source: Vec<f64> = gain_profile(self.grid_n(), extent, lambda, alpha)?
            .into_iter()
            .map(|g| -g * innovation)
            .collect();
        let raw = estimate_interface_velocity(y_now, self.y_prev, dt);
        let ydot = (1.0 - smoothing) * raw + smoothing * self.ydot;
        let next = advance_profile(&self.theta_hat, extent, ydot, -qc / p.k, Some(&source), alpha, dt)?;

        self.ydot = ydot;
        self.theta_hat = next;
        self.scale = extent;
        self.y_prev = y_now;
        self.t += dt;
        Ok(())
    }
}
