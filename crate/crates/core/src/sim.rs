//! Closed-loop integration and the post-run analysis.
//!
//! Loop ordering, for `n = 0, 1, …`:
//!
//! 1. the plant advances from `t_n` to `t_{n+1}` under `q_c(t_n)`;
//! 2. the interface `Y(t_{n+1}) = s(t_{n+1})` is measured and the observer
//!    assimilates it, advancing under the same `q_c(t_n)`;
//! 3. `q_c(t_{n+1})` is computed from the plant (state feedback) or from the
//!    observer state that has just absorbed `Y(t_{n+1})` (output feedback).
//!
//! The observer runs in both modes so the estimation error is always logged.

use std::fmt::Write as _;

use log::{debug, warn};

use crate::config::RunSettings;
use crate::control::{internal_energy, output_feedback, state_feedback, ControlOutput};
use crate::diagnostics::{
    fit_decay_rate, grid_tolerance, h1_norm_sq, lyapunov_constants, lyapunov_sample, max_envelope_excess,
    max_lyapunov_rate, monitor_constraints, ConstraintReport, LyapunovConstants, LyapunovSample,
};
use crate::error::{Error, Result};
use crate::numerics::right_slope;
use crate::observer::ObserverState;
use crate::params::{
    lambda_upper_bound, setpoint_lower_bound, ControlMode, PhysicalParams, ScenarioConfig, ValidationReport,
};
use crate::plant::{PlantState, CFL_WARN};
use crate::trace::TraceRecord;

/// The run stops with a blow-up once the interface passes this fraction of
/// `domain_length`.
pub const DOMAIN_CAP: f64 = 0.95;

/// Everything a closed-loop run produces.
#[derive(Debug)]
pub struct RunOutput {
    pub trace: Vec<TraceRecord>,
    pub checkpoints: Vec<LyapunovSample>,
    pub constants: LyapunovConstants,
    /// Minimum over steps of `(q_{n+1} - q_n)/dt + c q_n`, W·m⁻²·s⁻¹, and
    /// the time `t_n` where it occurs.
    pub min_qc_margin: (f64, f64),
    pub max_cfl: f64,
    /// Steps whose convection CFL number exceeded [`CFL_WARN`].
    pub cfl_warnings: usize,
    /// Runtime failure; the trace holds everything logged before it.
    pub failure: Option<Error>,
}

fn control(mode: ControlMode, plant: &PlantState, ob: &ObserverState, cfg: &ScenarioConfig, p: &PhysicalParams) -> ControlOutput {
    match mode {
        ControlMode::StateFeedback => state_feedback(plant, cfg, p),
        ControlMode::OutputFeedback => output_feedback(ob, plant.s, cfg, p),
    }
}

struct Recorder<'a> {
    cfg: &'a ScenarioConfig,
    p: &'a PhysicalParams,
    settings: &'a RunSettings,
    constants: LyapunovConstants,
    trace: Vec<TraceRecord>,
    checkpoints: Vec<LyapunovSample>,
}

impl Recorder<'_> {
    fn record(&mut self, plant: &PlantState, ob: &ObserverState, qc: f64, heat_in: f64, checkpoint: bool) -> Result<()> {
        let n = plant.grid_n();
        let err: Vec<f64> = plant.theta.iter().zip(&ob.theta_hat).map(|(u, uh)| u - uh).collect();
        let mode = self.settings.h1_mode;
        let (mut v, mut vtot) = (f64::NAN, f64::NAN);
        if checkpoint {
            let sample =
                lyapunov_sample(plant.t, plant.s, &ob.theta_hat, &err, self.cfg, self.p, &self.constants, mode)?;
            v = sample.v;
            vtot = sample.vtot;
            self.checkpoints.push(sample);
        }
        self.trace.push(TraceRecord {
            t: plant.t,
            s: plant.s,
            sdot: plant.sdot,
            qc,
            t0: self.p.tm + plant.theta[0],
            that0: self.p.tm + ob.theta_hat[0],
            ttilde0: err[0],
            h1_u: h1_norm_sq(&plant.theta, plant.s, mode),
            h1_err: h1_norm_sq(&err, plant.s, mode),
            err_flux: right_slope(&err, 1.0 / n as f64) / plant.s,
            energy: internal_energy(&plant.theta, plant.s, self.p),
            heat_in,
            u_min: plant.theta.iter().copied().fold(f64::INFINITY, f64::min),
            err_max: err.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            v,
            vtot,
        });
        Ok(())
    }
}

/// Integrate the closed loop without checking the design restrictions.
///
/// Errors are returned only for malformed numerics; anything that goes wrong
/// during the integration ends the run and is reported in
/// [`RunOutput::failure`].
pub fn simulate(cfg: &ScenarioConfig, p: &PhysicalParams, settings: &RunSettings) -> Result<RunOutput> {
    cfg.check_numerics()?;
    p.derive_diffusivities()?;
    settings.check()?;

    let mut plant = PlantState::new(cfg, p);
    let mut ob = ObserverState::new(cfg, p);
    let mut rec = Recorder {
        cfg,
        p,
        settings,
        constants: lyapunov_constants(cfg, p, settings.lyapunov_d),
        trace: Vec::with_capacity(cfg.steps() / settings.record_every + 2),
        checkpoints: Vec::new(),
    };
    let mut qc = control(cfg.mode, &plant, &ob, cfg, p).qc;
    let mut heat_in = 0.0;
    let mut min_qc_margin = (f64::INFINITY, 0.0);
    let mut max_cfl: f64 = 0.0;
    let mut cfl_warnings = 0;

    let mut failure = rec.record(&plant, &ob, qc, heat_in, true).err();
    let steps = cfg.steps();
    for n in 1..=steps {
        if failure.is_some() {
            break;
        }
        let outcome = (|| -> Result<f64> {
            let info = plant.step(qc, cfg.dt, p)?;
            if let Some(len) = cfg.domain_length {
                if plant.s >= DOMAIN_CAP * len {
                    return Err(Error::BlowUp {
                        t: plant.t,
                        reason: format!("interface {} m reached {DOMAIN_CAP} of the domain length {len} m", plant.s),
                    });
                }
            }
            max_cfl = max_cfl.max(info.convection_cfl);
            if info.convection_cfl > CFL_WARN {
                if cfl_warnings == 0 {
                    warn!("convection CFL {:.3} exceeds {CFL_WARN} at t = {} s", info.convection_cfl, plant.t);
                }
                cfl_warnings += 1;
            }
            ob.step(plant.s, qc, cfg.dt, cfg.lambda, cfg.ydot_smoothing, p)?;
            Ok(control(cfg.mode, &plant, &ob, cfg, p).qc)
        })();
        match outcome {
            Ok(next) => {
                heat_in += qc * cfg.dt / p.k;
                let margin = (next - qc) / cfg.dt + cfg.c * qc;
                if margin < min_qc_margin.0 {
                    min_qc_margin = (margin, plant.t - cfg.dt);
                }
                qc = next;
                if n % settings.record_every == 0 || n == steps {
                    let checkpoint = n % settings.checkpoint_every == 0 || n == steps;
                    failure = rec.record(&plant, &ob, qc, heat_in, checkpoint).err();
                }
            }
            Err(e) => failure = Some(e),
        }
    }
    if let Some(e) = &failure {
        warn!("run stopped: {e}");
    }
    debug!("{} trace rows, {} checkpoints", rec.trace.len(), rec.checkpoints.len());
    Ok(RunOutput {
        trace: rec.trace,
        checkpoints: rec.checkpoints,
        constants: rec.constants,
        min_qc_margin,
        max_cfl,
        cfl_warnings,
        failure,
    })
}

/// Relative energy-balance residual `|ΔE - (1/k)∫q_c dt| / |ΔE|` between
/// the first and last trace rows.
pub fn energy_residual(trace: &[TraceRecord]) -> f64 {
    match (trace.first(), trace.last()) {
        (Some(a), Some(b)) => {
            let de = b.energy - a.energy;
            (de - (b.heat_in - a.heat_in)).abs() / de.abs()
        }
        _ => f64::NAN,
    }
}

/// Post-run checks, all pure functions of the [`RunOutput`].
#[derive(Debug)]
pub struct Analysis {
    pub constraints: ConstraintReport,
    /// Fitted decay rate of `‖ũ‖²_{H1}` over `t > 0`, s⁻¹.
    pub error_decay_rate: Result<f64>,
    pub energy_residual: f64,
    pub max_lyapunov_rate: f64,
    pub max_envelope_excess: f64,
}

pub fn analyze(out: &RunOutput, cfg: &ScenarioConfig) -> Analysis {
    let tol = grid_tolerance(cfg.grid_n, cfg.dt);
    let (t, v): (Vec<f64>, Vec<f64>) = out.trace.iter().skip(1).map(|r| (r.t, r.h1_err)).unzip();
    Analysis {
        constraints: monitor_constraints(&out.trace, cfg.sr, tol),
        error_decay_rate: fit_decay_rate(&t, &v),
        energy_residual: energy_residual(&out.trace),
        max_lyapunov_rate: max_lyapunov_rate(&out.checkpoints),
        max_envelope_excess: max_envelope_excess(&out.checkpoints, &out.constants, cfg.sr),
    }
}

/// Plain-text run report. Contains no timestamps, so it is reproducible.
pub fn render_summary(
    cfg: &ScenarioConfig,
    p: &PhysicalParams,
    validation: &ValidationReport,
    out: &RunOutput,
    an: &Analysis,
) -> String {
    let mut s = String::new();
    let (alpha, beta) = (p.alpha(), p.beta());
    let _ = writeln!(s, "mode: {}", cfg.mode);
    let _ = writeln!(s, "alpha = {alpha:.10e} m^2/s, beta = {beta:.10e} m^2/(K s)");
    if let Ok(b) = lambda_upper_bound(cfg, alpha) {
        let _ = writeln!(s, "lambda bound = {b:.10e} 1/s (lambda = {})", cfg.lambda);
    }
    let _ = writeln!(s, "setpoint bound = {:.10e} m (sr = {})", setpoint_lower_bound(cfg, alpha, beta), cfg.sr);
    let _ = writeln!(s, "\n[validation]\n{validation}");

    let _ = writeln!(s, "[run]");
    let _ = writeln!(s, "grid_n = {}, dt = {} s, t_end = {} s", cfg.grid_n, cfg.dt, cfg.t_end);
    match (&out.failure, out.trace.last()) {
        (Some(e), _) => {
            let _ = writeln!(s, "status: FAILED ({e})");
        }
        (None, _) => {
            let _ = writeln!(s, "status: completed");
        }
    }
    if let (Some(first), Some(last)) = (out.trace.first(), out.trace.last()) {
        let _ = writeln!(s, "s: {:.6} m -> {:.6} m at t = {} s", first.s, last.s, last.t);
        let _ = writeln!(s, "qc: {:.6} -> {:.6} W/m^2", first.qc, last.qc);
        let _ = writeln!(s, "Ttilde(0): {:.6e} -> {:.6e} K", first.ttilde0, last.ttilde0);
    }
    let _ = writeln!(s, "max convection CFL = {:.4} ({} steps above {CFL_WARN})", out.max_cfl, out.cfl_warnings);

    let _ = writeln!(s, "\n[constraints]");
    let _ = writeln!(s, "tolerance = {:.3e} K", an.constraints.tolerance);
    match an.constraints.first_violation {
        None => {
            let _ = writeln!(s, "all constraints hold at {} logged steps", an.constraints.flags.len());
        }
        Some((t, name)) => {
            let _ = writeln!(s, "first violation: {name} at t = {t} s");
        }
    }
    let _ = writeln!(
        s,
        "min (dqc/dt + c qc) = {:.6e} W/(m^2 s) at t = {} s",
        out.min_qc_margin.0, out.min_qc_margin.1
    );

    let _ = writeln!(s, "\n[estimation error]");
    match &an.error_decay_rate {
        Ok(r) => {
            let _ = writeln!(s, "fitted H1 decay rate = {r:.6e} 1/s");
        }
        Err(e) => {
            let _ = writeln!(s, "fitted H1 decay rate unavailable: {e}");
        }
    }

    let _ = writeln!(s, "\n[energy]");
    let _ = writeln!(s, "relative balance residual = {:.6e}", an.energy_residual);

    let k = &out.constants;
    let _ = writeln!(s, "\n[lyapunov]");
    let _ = writeln!(s, "p = {:.6e}, a = {:.6e}, b = {:.6e}, d = {:.6e}", k.p, k.a, k.b, k.d);
    let _ = writeln!(s, "checkpoints = {}", out.checkpoints.len());
    let _ = writeln!(s, "max dV/dt = {:.6e}", an.max_lyapunov_rate);
    let _ = writeln!(s, "max Vtot - envelope = {:.6e}", an.max_envelope_excess);
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn short(mode: ControlMode) -> ScenarioConfig {
        ScenarioConfig { mode, grid_n: 40, dt: 0.2, t_end: 200.0, ..ScenarioConfig::zinc_reference() }
    }

    #[test]
    fn short_run_logs_every_record() {
        let cfg = short(ControlMode::OutputFeedback);
        let settings = RunSettings { record_every: 5, checkpoint_every: 50, ..RunSettings::default() };
        let out = simulate(&cfg, &PhysicalParams::zinc(), &settings).unwrap();
        assert!(out.failure.is_none());
        assert_eq!(out.trace.len(), 1000 / 5 + 1);
        assert_eq!(out.checkpoints.len(), 1000 / 50 + 1);
        assert!(out.trace.windows(2).all(|w| w[1].t > w[0].t));
        assert!(out.trace[1].v.is_nan() && !out.trace[10].v.is_nan());
        assert_eq!(out.trace[0].ttilde0, (100.0 - 1000.0) * 0.01);
    }

    #[test]
    fn domain_cap_stops_the_run() {
        let cfg = ScenarioConfig { domain_length: Some(0.0125), ..short(ControlMode::StateFeedback) };
        let out = simulate(&cfg, &PhysicalParams::zinc(), &RunSettings::default()).unwrap();
        assert!(matches!(out.failure, Some(Error::BlowUp { .. })));
        assert!(out.trace.last().unwrap().s < 0.95 * 0.0125);
    }

    #[test]
    fn analysis_is_pure() {
        let cfg = short(ControlMode::StateFeedback);
        let out = simulate(&cfg, &PhysicalParams::zinc(), &RunSettings::default()).unwrap();
        let a = analyze(&out, &cfg);
        let b = analyze(&out, &cfg);
        assert_eq!(a.constraints, b.constraints);
        assert_eq!(a.energy_residual.to_bits(), b.energy_residual.to_bits());
        assert!(a.energy_residual < 1e-2);
    }
}
