//! Norms, Lyapunov functionals, constraint monitors and decay-rate fits.
//!
//! Everything here is a pure function of states or traces, so re-running a
//! diagnostic on the same input always reproduces the same report.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{gradient, trapezoid_map};
use crate::params::{PhysicalParams, ScenarioConfig};
use crate::trace::TraceRecord;
use crate::transforms::{apply_inverse, controller_transform};

/// Which terms enter `‖f‖²_{H1}`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum H1Mode {
    /// `∫ f² dx + ∫ f_x² dx`.
    #[default]
    Full,
    /// `∫ f_x² dx` only (Poincaré-equivalent with `f(s) = 0`).
    GradientOnly,
}

/// Squared H1 norm of a field sampled on the normalized grid over `[0, s]`.
pub fn h1_norm_sq(f: &[f64], s: f64, mode: H1Mode) -> f64 {
    let n = f.len() - 1;
    let dx = s / n as f64;
    let grad = gradient(f, dx);
    let grad_sq = trapezoid_map(&grad, dx, |v| v * v);
    match mode {
        H1Mode::Full => trapezoid_map(f, dx, |v| v * v) + grad_sq,
        H1Mode::GradientOnly => grad_sq,
    }
}

/// Weights of the closed-loop Lyapunov functional.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovConstants {
    /// Weight on `X²`: `c α / (16 β² s_r)`.
    pub p: f64,
    /// Exponent rate `max{s_r², 16 c s_r / α}`.
    pub a: f64,
    /// Decay rate `min{α/(8 s_r²), c, 2λ}`.
    pub b: f64,
    /// Weight on the observer-error functional. Any positive value serves for
    /// monitoring; the default `max(1, a s_r)` is arbitrary.
    pub d: f64,
}

pub fn lyapunov_constants(cfg: &ScenarioConfig, params: &PhysicalParams, d: Option<f64>) -> LyapunovConstants {
    let (alpha, beta) = (params.alpha(), params.beta());
    let sr = cfg.sr;
    let p = cfg.c * alpha / (16.0 * beta * beta * sr);
    let a = (sr * sr).max(16.0 * cfg.c * sr / alpha);
    let b = (alpha / (8.0 * sr * sr)).min(cfg.c).min(2.0 * cfg.lambda);
    LyapunovConstants { p, a, b, d: d.unwrap_or_else(|| (a * sr).max(1.0)) }
}

/// Lyapunov functionals at one checkpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovSample {
    pub t: f64,
    pub s: f64,
    /// `X = s - s_r`.
    pub x_err: f64,
    pub h1_what: f64,
    pub h1_wtilde: f64,
    /// `½ ‖w̃‖²_{H1}`.
    pub v1_tilde: f64,
    /// `½ ‖ŵ‖²_{H1} + (p/2) X² + d Ṽ1`.
    pub vtot: f64,
    /// `V_tot e^{-a s}`.
    pub v: f64,
    /// `max w̃`; non-positive up to grid error when the error stays negative.
    pub wtilde_max: f64,
}

/// Transform the estimate and the estimation error into target coordinates
/// and evaluate the functionals.
#[allow(clippy::too_many_arguments)]
pub fn lyapunov_sample(
    t: f64,
    s: f64,
    uhat: &[f64],
    utilde: &[f64],
    cfg: &ScenarioConfig,
    params: &PhysicalParams,
    consts: &LyapunovConstants,
    mode: H1Mode,
) -> Result<LyapunovSample> {
    let (alpha, beta) = (params.alpha(), params.beta());
    let x_err = s - cfg.sr;
    let what = controller_transform(uhat, x_err, s, cfg.c, alpha, beta)?;
    let wtilde = apply_inverse(utilde, s, cfg.lambda, alpha)?;
    let h1_what = h1_norm_sq(&what, s, mode);
    let h1_wtilde = h1_norm_sq(&wtilde, s, mode);
    let v1_tilde = 0.5 * h1_wtilde;
    let vtot = 0.5 * h1_what + 0.5 * consts.p * x_err * x_err + consts.d * v1_tilde;
    Ok(LyapunovSample {
        t,
        s,
        x_err,
        h1_what,
        h1_wtilde,
        v1_tilde,
        vtot,
        v: vtot * (-consts.a * s).exp(),
        wtilde_max: wtilde.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    })
}

/// Largest forward-difference rate `(V_{i+1} - V_i)/Δt`; non-positive for a
/// non-increasing sequence.
pub fn max_lyapunov_rate(samples: &[LyapunovSample]) -> f64 {
    samples
        .windows(2)
        .map(|w| (w[1].v - w[0].v) / (w[1].t - w[0].t))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Largest `V_tot(t) - e^{a s_r} V_tot(0) e^{-b t}` over the checkpoints.
pub fn max_envelope_excess(samples: &[LyapunovSample], consts: &LyapunovConstants, sr: f64) -> f64 {
    let Some(first) = samples.first() else {
        return f64::NEG_INFINITY;
    };
    let scale = (consts.a * sr).exp() * first.vtot;
    samples
        .iter()
        .map(|c| c.vtot - scale * (-consts.b * (c.t - first.t)).exp())
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Physical-constraint flags for one logged step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConstraintFlags {
    pub qc_positive: bool,
    pub s_increasing: bool,
    pub s_below_sr: bool,
    pub u_nonnegative: bool,
    pub error_nonpositive: bool,
}

impl ConstraintFlags {
    pub fn all(&self) -> bool {
        self.qc_positive && self.s_increasing && self.s_below_sr && self.u_nonnegative && self.error_nonpositive
    }

    fn first_failure(&self) -> Option<&'static str> {
        [
            (self.qc_positive, "qc_positive"),
            (self.s_increasing, "s_increasing"),
            (self.s_below_sr, "s_below_sr"),
            (self.u_nonnegative, "u_nonnegative"),
            (self.error_nonpositive, "error_nonpositive"),
        ]
        .into_iter()
        .find(|(ok, _)| !ok)
        .map(|(_, name)| name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintReport {
    /// One entry per trace row.
    pub flags: Vec<ConstraintFlags>,
    /// Temperature tolerance applied to the sign checks, K.
    pub tolerance: f64,
    /// Time and name of the first failed flag.
    pub first_violation: Option<(f64, &'static str)>,
}

impl ConstraintReport {
    pub fn passed(&self) -> bool {
        self.first_violation.is_none()
    }
}

/// Coefficient of the sign-check tolerance `ε = C (Δξ² + dt)`, K (with `dt`
/// in seconds).
pub const GRID_TOLERANCE_COEFF: f64 = 1e-3;

pub fn grid_tolerance(grid_n: usize, dt: f64) -> f64 {
    let h = 1.0 / grid_n as f64;
    GRID_TOLERANCE_COEFF * (h * h + dt)
}

/// Evaluate the physical constraints at every trace row.
///
/// `s_increasing` is judged on the logged interface velocity, so it also
/// applies to the first row; the sign checks on `u` and `ũ` allow `tolerance`.
pub fn monitor_constraints(trace: &[TraceRecord], sr: f64, tolerance: f64) -> ConstraintReport {
    let mut first_violation = None;
    let flags = trace
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let moved = i == 0 || r.s > trace[i - 1].s;
            let f = ConstraintFlags {
                qc_positive: r.qc > 0.0,
                s_increasing: r.sdot > 0.0 && moved,
                s_below_sr: r.s < sr,
                u_nonnegative: r.u_min >= -tolerance,
                error_nonpositive: r.err_max <= tolerance,
            };
            if first_violation.is_none() {
                first_violation = f.first_failure().map(|name| (r.t, name));
            }
            f
        })
        .collect();
    ConstraintReport { flags, tolerance, first_violation }
}

/// Least-squares slope of `ln v` against `t` over the final half of the
/// series, negated.
pub fn fit_decay_rate(t: &[f64], v: &[f64]) -> Result<f64> {
    if t.len() != v.len() || t.len() < 10 {
        return Err(Error::Domain(format!(
            "decay fit needs at least 10 paired samples, got {} times and {} values",
            t.len(),
            v.len()
        )));
    }
    if let Some(bad) = v.iter().find(|&&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::Domain(format!("decay fit needs positive samples, got {bad}")));
    }
    let start = t.len() / 2;
    let ts = &t[start..];
    let ls: Vec<f64> = v[start..].iter().map(|x| x.ln()).collect();
    let m = ts.len() as f64;
    let t_mean = ts.iter().sum::<f64>() / m;
    let l_mean = ls.iter().sum::<f64>() / m;
    let (mut num, mut den) = (0.0, 0.0);
    for (ti, li) in ts.iter().zip(&ls) {
        num += (ti - t_mean) * (li - l_mean);
        den += (ti - t_mean) * (ti - t_mean);
    }
    Ok(-num / den)
}
