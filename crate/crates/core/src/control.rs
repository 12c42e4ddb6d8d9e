//! Feedback laws and energy bookkeeping.
//!
//! Both laws share one formula,
//! `q_c = -c k ( (1/α) ∫₀^L v dx + (L - s_r)/β )`, evaluated on the plant
//! profile (state feedback) or on the observer estimate with the measured
//! extent (output feedback). Integrals use the grid trapezoid rule, which is
//! exact for the linear initial profiles.

use crate::error::{Error, Result};
use crate::numerics::trapezoid;
use crate::observer::ObserverState;
use crate::params::{PhysicalParams, ScenarioConfig};
use crate::plant::PlantState;
use crate::transforms::kernel_p_integral;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlOutput {
    /// Boundary heat flux, W·m⁻².
    pub qc: f64,
    /// `(1/α) ∫ v dx + L/β` of the profile the law was evaluated on.
    pub internal_energy: f64,
}

/// `∫₀^extent v dx` for a profile sampled on the normalized grid.
pub fn profile_integral(theta: &[f64], extent: f64) -> f64 {
    extent * trapezoid(theta, 1.0 / (theta.len() - 1) as f64)
}

/// `(1/α) ∫₀^s u dx + s/β`; its rate of change equals `q_c/k`.
pub fn internal_energy(theta: &[f64], extent: f64, p: &PhysicalParams) -> f64 {
    profile_integral(theta, extent) / p.alpha() + extent / p.beta()
}

fn feedback_law(theta: &[f64], extent: f64, cfg: &ScenarioConfig, p: &PhysicalParams) -> ControlOutput {
    let integral = profile_integral(theta, extent);
    let qc = -cfg.c * p.k * (integral / p.alpha() + (extent - cfg.sr) / p.beta());
    ControlOutput { qc, internal_energy: integral / p.alpha() + extent / p.beta() }
}

/// Full-state law on the plant profile and interface.
pub fn state_feedback(st: &PlantState, cfg: &ScenarioConfig, p: &PhysicalParams) -> ControlOutput {
    feedback_law(&st.theta, st.s, cfg, p)
}

/// Observer-based law using the estimate and the measurement `y_now`.
pub fn output_feedback(ob: &ObserverState, y_now: f64, cfg: &ScenarioConfig, p: &PhysicalParams) -> ControlOutput {
    feedback_law(&ob.theta_hat, y_now, cfg, p)
}

/// One logged point of the control signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QcSample {
    pub t: f64,
    pub qc: f64,
    pub s: f64,
    /// Estimation-error slope `ũ_x(s, t)`, K·m⁻¹.
    pub error_flux: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QcResidual {
    pub t: f64,
    /// Forward difference `(q_{i+1} - q_i)/Δt`.
    pub qc_rate: f64,
    /// `q̇_c + c q_c - c k (1 + ∫₀^s P(x, s) dx) ũ_x(s)`.
    pub residual: f64,
    /// `q̇_c + c q_c`; non-negative whenever the error slope is.
    pub inequality_margin: f64,
}

/// Residual of the control-rate identity
/// `q̇_c = -c q_c + c k (1 + ∫₀^s P(x, s) dx) ũ_x(s, t)` along a trace.
pub fn qc_ode_residual(samples: &[QcSample], c: f64, k: f64, lambda: f64, alpha: f64) -> Result<Vec<QcResidual>> {
    if samples.len() < 3 {
        return Err(Error::Trace(format!("control-rate check needs at least 3 samples, got {}", samples.len())));
    }
    samples
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            let qc_rate = (b.qc - a.qc) / (b.t - a.t);
            let gain = 1.0 + kernel_p_integral(a.s, lambda, alpha)?;
            let margin = qc_rate + c * a.qc;
            Ok(QcResidual {
                t: a.t,
                qc_rate,
                residual: margin - c * k * gain * a.error_flux,
                inequality_margin: margin,
            })
        })
        .collect()
}
