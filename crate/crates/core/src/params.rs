//! Material constants, scenario configuration and the admissibility checks
//! that must pass before a closed-loop run is started.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Material constants of the liquid phase. SI units, temperatures in K.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Density, kg·m⁻³.
    pub rho: f64,
    /// Heat capacity, J·kg⁻¹·K⁻¹.
    pub cp: f64,
    /// Thermal conductivity, W·m⁻¹·K⁻¹.
    pub k: f64,
    /// Latent heat of fusion, J·kg⁻¹.
    pub dh: f64,
    /// Melting temperature, K.
    pub tm: f64,
}

impl PhysicalParams {
    pub fn new(rho: f64, cp: f64, k: f64, dh: f64, tm: f64) -> Result<Self> {
        let p = Self { rho, cp, k, dh, tm };
        p.check()?;
        Ok(p)
    }

    /// Zinc with the latent heat entered as 111.961 J·kg⁻¹, the value the
    /// reference scenario and its bounds are built on (β ≈ 1.577e-4).
    pub fn zinc() -> Self {
        Self { rho: 6570.0, cp: 389.5687, k: 116.0, dh: 111.961, tm: 692.68 }
    }

    /// Zinc with the handbook latent heat 111 961 J·kg⁻¹ (β ≈ 1.577e-7).
    pub fn zinc_handbook() -> Self {
        Self { dh: 111_961.0, ..Self::zinc() }
    }

    fn check(&self) -> Result<()> {
        for (name, v) in [("rho", self.rho), ("cp", self.cp), ("k", self.k), ("dh", self.dh)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be finite and strictly positive, got {v}")));
            }
        }
        if !self.tm.is_finite() {
            return Err(Error::Config(format!("tm must be finite, got {}", self.tm)));
        }
        Ok(())
    }

    /// Thermal diffusivity `k/(ρ C_p)`, m²·s⁻¹.
    pub fn alpha(&self) -> f64 {
        self.k / (self.rho * self.cp)
    }

    /// Stefan coefficient `k/(ρ ΔH*)`, m²·K⁻¹·s⁻¹.
    pub fn beta(&self) -> f64 {
        self.k / (self.rho * self.dh)
    }

    /// `(α, β)` after checking every constant is positive.
    pub fn derive_diffusivities(&self) -> Result<(f64, f64)> {
        self.check()?;
        Ok((self.alpha(), self.beta()))
    }
}

/// Which feedback law closes the loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlMode {
    /// Full-state law using the simulated temperature profile.
    StateFeedback,
    /// Observer-based law using only the interface measurement.
    OutputFeedback,
}

impl fmt::Display for ControlMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ControlMode::StateFeedback => "state_feedback",
            ControlMode::OutputFeedback => "output_feedback",
        })
    }
}

/// Scenario and time-integration settings for one closed-loop run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub mode: ControlMode,
    /// Initial interface position, m.
    pub s0: f64,
    /// Slope bound of the true initial profile `T0 - Tm = H (s0 - x)`, K·m⁻¹.
    pub h: f64,
    /// Slope of the initial estimate `T̂0 - Tm = Ĥ (s0 - x)`, K·m⁻¹.
    pub h_hat: f64,
    /// Controller gain, s⁻¹.
    pub c: f64,
    /// Observer gain, s⁻¹.
    pub lambda: f64,
    /// Interface setpoint, m.
    pub sr: f64,
    /// Number of grid intervals; profiles carry `grid_n + 1` samples.
    pub grid_n: usize,
    /// Time step, s.
    pub dt: f64,
    /// Simulation horizon, s.
    pub t_end: f64,
    /// Exponential smoothing factor for the interface-velocity estimate (0 = off).
    pub ydot_smoothing: f64,
    /// Physical length of the sample; the run aborts once `s ≥ 0.95 L`.
    pub domain_length: Option<f64>,
}

impl ScenarioConfig {
    /// The zinc strip scenario: `s0 = 1 cm`, `H = 100`, `Ĥ = 1000`,
    /// `c = λ = 0.001`, `s_r = 0.35 m`.
    pub fn zinc_reference() -> Self {
        Self {
            mode: ControlMode::OutputFeedback,
            s0: 0.01,
            h: 100.0,
            h_hat: 1000.0,
            c: 0.001,
            lambda: 0.001,
            sr: 0.35,
            grid_n: 200,
            dt: 0.05,
            t_end: 8000.0,
            ydot_smoothing: 0.0,
            domain_length: None,
        }
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    /// Minimal structural checks, without the design restrictions.
    pub fn check_numerics(&self) -> Result<()> {
        if !(self.s0.is_finite() && self.s0 > 0.0) {
            return Err(Error::Config(format!("s0 must be positive, got {}", self.s0)));
        }
        if self.grid_n < 8 {
            return Err(Error::Config(format!("grid_n must be at least 8, got {}", self.grid_n)));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end.is_finite() && self.t_end > self.dt) {
            return Err(Error::Config(format!("t_end must exceed dt, got {}", self.t_end)));
        }
        if !(0.0..1.0).contains(&self.ydot_smoothing) {
            return Err(Error::Config(format!(
                "ydot_smoothing must lie in [0, 1), got {}",
                self.ydot_smoothing
            )));
        }
        Ok(())
    }
}

/// `(4α/s0²)(1 - H/Ĥ)`: the observer gain must stay strictly below this.
pub fn lambda_upper_bound(cfg: &ScenarioConfig, alpha: f64) -> Result<f64> {
    if cfg.h_hat.is_nan() || cfg.h_hat <= 0.0 || cfg.h_hat < cfg.h {
        return Err(Error::Config(format!(
            "lambda bound needs Ĥ ≥ H with Ĥ > 0 (Ĥ = {}, H = {})",
            cfg.h_hat, cfg.h
        )));
    }
    Ok(4.0 * alpha / (cfg.s0 * cfg.s0) * (1.0 - cfg.h / cfg.h_hat))
}

/// `s0 + β s0² Ĥ / (2α)`: the setpoint must lie strictly above this.
pub fn setpoint_lower_bound(cfg: &ScenarioConfig, alpha: f64, beta: f64) -> f64 {
    cfg.s0 + beta * cfg.s0 * cfg.s0 * cfg.h_hat / (2.0 * alpha)
}

/// Individual admissibility conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Restriction {
    PhysicalParams,
    Numerics,
    InitialBound,
    InitialEstimateShape,
    EstimateSlope,
    LambdaBound,
    SetpointBound,
    InitialControlPositive,
}

impl Restriction {
    pub fn name(&self) -> &'static str {
        match self {
            Restriction::PhysicalParams => "physical_params",
            Restriction::Numerics => "numerics",
            Restriction::InitialBound => "initial_bound",
            Restriction::InitialEstimateShape => "initial_estimate_shape",
            Restriction::EstimateSlope => "estimate_slope",
            Restriction::LambdaBound => "lambda_bound",
            Restriction::SetpointBound => "setpoint_bound",
            Restriction::InitialControlPositive => "initial_control_positive",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub restriction: Restriction,
    pub passed: bool,
    /// Configured value being tested (NaN when not applicable).
    pub value: f64,
    /// Computed bound (NaN when not applicable).
    pub bound: f64,
    pub detail: String,
}

/// Outcome of [`validate_scenario`]: one entry per restriction.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn get(&self, r: Restriction) -> Option<&Check> {
        self.checks.iter().find(|c| c.restriction == r)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{:<5} {:<26} value={:<14.6e} bound={:<14.6e} {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.restriction.name(),
                c.value,
                c.bound,
                c.detail
            )?;
        }
        Ok(())
    }
}

/// Check every restriction the closed-loop guarantees rely on. Never fails
/// early: each condition gets its own entry.
pub fn validate_scenario(cfg: &ScenarioConfig, p: &PhysicalParams) -> ValidationReport {
    let mut checks = Vec::new();
    let mut push = |restriction, passed, value, bound, detail: String| {
        checks.push(Check { restriction, passed, value, bound, detail })
    };

    let diffusivities = p.derive_diffusivities();
    match &diffusivities {
        Ok((a, b)) => push(
            Restriction::PhysicalParams,
            true,
            f64::NAN,
            f64::NAN,
            format!("alpha = {a:.6e} m^2/s, beta = {b:.6e}"),
        ),
        Err(e) => push(Restriction::PhysicalParams, false, f64::NAN, f64::NAN, e.to_string()),
    }

    match cfg.check_numerics() {
        Ok(()) => push(Restriction::Numerics, true, f64::NAN, f64::NAN, "grid and step sizes valid".into()),
        Err(e) => push(Restriction::Numerics, false, f64::NAN, f64::NAN, e.to_string()),
    }

    push(
        Restriction::InitialBound,
        cfg.h.is_finite() && cfg.h > 0.0,
        cfg.h,
        0.0,
        "H > 0".into(),
    );
    push(
        Restriction::InitialEstimateShape,
        cfg.h_hat.is_finite() && cfg.h_hat > 0.0,
        cfg.h_hat,
        0.0,
        "initial estimate is Tm + Ĥ (s0 - x) with finite Ĥ > 0".into(),
    );
    push(
        Restriction::EstimateSlope,
        cfg.h_hat > cfg.h,
        cfg.h_hat,
        cfg.h,
        "Ĥ > H".into(),
    );

    let Ok((alpha, beta)) = diffusivities else {
        return ValidationReport { checks };
    };

    match lambda_upper_bound(cfg, alpha) {
        Ok(bound) => push(
            Restriction::LambdaBound,
            cfg.lambda >= 0.0 && cfg.lambda < bound,
            cfg.lambda,
            bound,
            "0 ≤ lambda < (4 alpha / s0^2)(1 - H/Ĥ)".into(),
        ),
        Err(e) => push(Restriction::LambdaBound, false, cfg.lambda, f64::NAN, e.to_string()),
    }

    let sr_bound = setpoint_lower_bound(cfg, alpha, beta);
    push(
        Restriction::SetpointBound,
        cfg.sr > sr_bound,
        cfg.sr,
        sr_bound,
        "sr > s0 + beta s0^2 Ĥ / (2 alpha)".into(),
    );

    let slope = match cfg.mode {
        ControlMode::OutputFeedback => cfg.h_hat,
        ControlMode::StateFeedback => cfg.h,
    };
    let integral = slope * cfg.s0 * cfg.s0 / 2.0;
    let qc0 = -cfg.c * p.k * (integral / alpha + (cfg.s0 - cfg.sr) / beta);
    push(
        Restriction::InitialControlPositive,
        cfg.c > 0.0 && qc0 > 0.0,
        qc0,
        0.0,
        format!("q_c(0) > 0 with c > 0 ({} law)", cfg.mode),
    );

    ValidationReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn zinc_diffusivities() {
        let (a, b) = PhysicalParams::zinc().derive_diffusivities().unwrap();
        // 116 / (6570 * 389.5687), 116 / (6570 * 111.961)
        assert!(rel(a, 4.532_194_751_929_537e-5) < 1e-12);
        assert!(rel(b, 1.576_978_785_162_701_4e-4) < 1e-12);
        let (_, b_handbook) = PhysicalParams::zinc_handbook().derive_diffusivities().unwrap();
        assert!(rel(b_handbook, 1.576_978_785_162_701_5e-7) < 1e-12);
    }

    #[test]
    fn unit_and_linear_cases() {
        let p = PhysicalParams::new(1.0, 1.0, 1.0, 1.0, 0.0).unwrap();
        assert_eq!(p.derive_diffusivities().unwrap(), (1.0, 1.0));
        let doubled = PhysicalParams { k: 2.0 * p.k, ..p };
        assert_eq!(doubled.derive_diffusivities().unwrap(), (2.0, 2.0));
    }

    #[test]
    fn rejects_non_positive_constants() {
        assert!(PhysicalParams::new(0.0, 1.0, 1.0, 1.0, 0.0).is_err());
        assert!(PhysicalParams::new(1.0, 1.0, -1.0, 1.0, 0.0).is_err());
        let bad = PhysicalParams { dh: 0.0, ..PhysicalParams::zinc() };
        assert!(matches!(bad.derive_diffusivities(), Err(Error::Config(_))));
    }

    #[test]
    fn lambda_bound_values() {
        let cfg = ScenarioConfig::zinc_reference();
        let alpha = PhysicalParams::zinc().alpha();
        let bound = lambda_upper_bound(&cfg, alpha).unwrap();
        assert!(rel(bound, 1.631_590_110_694_633) < 1e-12);

        let equal = ScenarioConfig { h_hat: cfg.h, ..cfg.clone() };
        assert_eq!(lambda_upper_bound(&equal, alpha).unwrap(), 0.0);

        let flat = ScenarioConfig { h: 0.0, ..cfg.clone() };
        assert!(rel(lambda_upper_bound(&flat, alpha).unwrap(), 4.0 * alpha / 1e-4) < 1e-15);

        let inverted = ScenarioConfig { h_hat: 50.0, ..cfg };
        assert!(lambda_upper_bound(&inverted, alpha).is_err());
    }

    #[test]
    fn setpoint_bound_values() {
        let cfg = ScenarioConfig::zinc_reference();
        let p = PhysicalParams::zinc();
        let bound = setpoint_lower_bound(&cfg, p.alpha(), p.beta());
        assert!(rel(bound, 0.183_975_178_856_923_4) < 1e-12);
        let tiny = ScenarioConfig { h_hat: 1e-12, ..cfg.clone() };
        assert!((setpoint_lower_bound(&tiny, p.alpha(), p.beta()) - cfg.s0).abs() < 1e-12);
        // for the linear initial profile the energy-based setpoint bound
        // s0 + (beta/alpha) H s0^2/2 is weaker than the Ĥ-based one
        let energy_bound = cfg.s0 + p.beta() / p.alpha() * cfg.h * cfg.s0 * cfg.s0 / 2.0;
        assert!(energy_bound <= bound);
    }

    #[test]
    fn reference_scenario_validates() {
        let report = validate_scenario(&ScenarioConfig::zinc_reference(), &PhysicalParams::zinc());
        assert!(report.passed(), "{report}");
        let handbook = validate_scenario(&ScenarioConfig::zinc_reference(), &PhysicalParams::zinc_handbook());
        assert!(handbook.passed(), "{handbook}");
    }

    #[test]
    fn perturbed_scenarios_name_the_failure() {
        let p = PhysicalParams::zinc();
        let high_gain = ScenarioConfig { lambda: 2.0, ..ScenarioConfig::zinc_reference() };
        let report = validate_scenario(&high_gain, &p);
        let names: Vec<_> = report.failures().map(|c| c.restriction).collect();
        assert_eq!(names, vec![Restriction::LambdaBound]);

        let low_setpoint = ScenarioConfig { sr: 0.05, ..ScenarioConfig::zinc_reference() };
        let report = validate_scenario(&low_setpoint, &p);
        let names: Vec<_> = report.failures().map(|c| c.restriction).collect();
        assert_eq!(names, vec![Restriction::SetpointBound, Restriction::InitialControlPositive]);

        let flat_estimate = ScenarioConfig { h_hat: 100.0, ..ScenarioConfig::zinc_reference() };
        let report = validate_scenario(&flat_estimate, &p);
        assert!(!report.get(Restriction::EstimateSlope).unwrap().passed);
        assert!(!report.get(Restriction::LambdaBound).unwrap().passed);
    }

    #[test]
    fn validation_is_pure() {
        let cfg = ScenarioConfig { sr: 0.1, ..ScenarioConfig::zinc_reference() };
        let p = PhysicalParams::zinc();
        let a = validate_scenario(&cfg, &p);
        let b = validate_scenario(&cfg, &p);
        assert_eq!(format!("{a}"), format!("{b}"));
        assert_eq!(a.passed(), b.passed());
    }
}
