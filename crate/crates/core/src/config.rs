//! Scenario files: flat `key = value` sections `[physical]`, `[scenario]`,
//! `[numerics]` and `[output]`, parsed as TOML.
//!
//! ```text
//! [physical]
//! rho = 6570.0
//! cp = 389.5687
//! k = 116.0
//! dh = 111.961
//! tm = 692.68
//!
//! [scenario]
//! mode = "output_feedback"
//! s0 = 0.01
//! H = 100.0
//! Hhat = 1000.0
//! c = 0.001
//! lambda = 0.001
//! sr = 0.35
//!
//! [numerics]
//! grid_n = 200
//! dt = 0.05
//! t_end = 8000.0
//!
//! [output]
//! trace = "trace.csv"
//! summary = "summary.txt"
//! checkpoints = "checkpoints.csv"
//! record_every = 10
//! ```
//!
//! Optional keys: `scenario.domain_length`, `numerics.ydot_smoothing`,
//! `numerics.checkpoint_every` (default 50), `numerics.h1_norm`
//! (`"full"` or `"gradient_only"`) and `numerics.lyapunov_d`.

use std::fs;
use std::path::Path;

use serde::Deserialize;

use crate::diagnostics::H1Mode;
use crate::error::{Error, Result};
use crate::params::{ControlMode, PhysicalParams, ScenarioConfig};

pub const DEFAULT_CHECKPOINT_EVERY: usize = 50;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    physical: PhysicalParams,
    scenario: RawScenario,
    numerics: RawNumerics,
    output: OutputFiles,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    mode: ControlMode,
    s0: f64,
    #[serde(rename = "H")]
    h: f64,
    #[serde(rename = "Hhat")]
    h_hat: f64,
    c: f64,
    lambda: f64,
    sr: f64,
    domain_length: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNumerics {
    grid_n: usize,
    dt: f64,
    t_end: f64,
    #[serde(default)]
    ydot_smoothing: f64,
    checkpoint_every: Option<usize>,
    #[serde(default)]
    h1_norm: H1Mode,
    lyapunov_d: Option<f64>,
}

/// Artifact names, relative to the output directory.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputFiles {
    pub trace: String,
    pub summary: String,
    pub checkpoints: String,
    /// Write every `record_every`-th step to the trace.
    pub record_every: usize,
}

/// Sampling and diagnostic settings that do not affect the dynamics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSettings {
    pub record_every: usize,
    /// Steps between Lyapunov checkpoints; a multiple of `record_every`.
    pub checkpoint_every: usize,
    pub h1_mode: H1Mode,
    pub lyapunov_d: Option<f64>,
}

impl RunSettings {
    pub fn check(&self) -> Result<()> {
        if self.record_every == 0 || self.checkpoint_every == 0 {
            return Err(Error::Config("record_every and checkpoint_every must be positive".into()));
        }
        if !self.checkpoint_every.is_multiple_of(self.record_every) {
            return Err(Error::Config(format!(
                "checkpoint_every ({}) must be a multiple of record_every ({})",
                self.checkpoint_every, self.record_every
            )));
        }
        if let Some(d) = self.lyapunov_d {
            if !(d.is_finite() && d > 0.0) {
                return Err(Error::Config(format!("lyapunov_d must be positive, got {d}")));
            }
        }
        Ok(())
    }
}

impl Default for RunSettings {
    fn default() -> Self {
        Self { record_every: 10, checkpoint_every: DEFAULT_CHECKPOINT_EVERY, h1_mode: H1Mode::Full, lyapunov_d: None }
    }
}

/// A fully parsed scenario file.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub physical: PhysicalParams,
    pub scenario: ScenarioConfig,
    pub settings: RunSettings,
    pub output: OutputFiles,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let sc = raw.scenario;
        let nu = raw.numerics;
        let cfg = RunConfig {
            physical: raw.physical,
            scenario: ScenarioConfig {
                mode: sc.mode,
                s0: sc.s0,
                h: sc.h,
                h_hat: sc.h_hat,
                c: sc.c,
                lambda: sc.lambda,
                sr: sc.sr,
                grid_n: nu.grid_n,
                dt: nu.dt,
                t_end: nu.t_end,
                ydot_smoothing: nu.ydot_smoothing,
                domain_length: sc.domain_length,
            },
            settings: RunSettings {
                record_every: raw.output.record_every,
                checkpoint_every: nu.checkpoint_every.unwrap_or(DEFAULT_CHECKPOINT_EVERY),
                h1_mode: nu.h1_norm,
                lyapunov_d: nu.lyapunov_d,
            },
            output: raw.output,
        };
        cfg.physical.derive_diffusivities()?;
        cfg.scenario.check_numerics()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// CI preset: halves `H`, `Ĥ`, `t_end` and `grid_n` (at least 8) and
    /// doubles `dt`.
    pub fn fast(mut self) -> Self {
        let sc = &mut self.scenario;
        sc.h *= 0.5;
        sc.h_hat *= 0.5;
        sc.t_end *= 0.5;
        sc.dt *= 2.0;
        sc.grid_n = (sc.grid_n / 2).max(8);
        self
    }

    /// The bundled zinc scenario with default artifact names.
    pub fn zinc_reference() -> Self {
        Self {
            physical: PhysicalParams::zinc(),
            scenario: ScenarioConfig::zinc_reference(),
            settings: RunSettings::default(),
            output: OutputFiles {
                trace: "trace.csv".into(),
                summary: "summary.txt".into(),
                checkpoints: "checkpoints.csv".into(),
                record_every: RunSettings::default().record_every,
            },
        }
    }
}
