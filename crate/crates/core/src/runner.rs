//! Scenario execution behind the command-line interface: validation, the
//! closed-loop run, and artifact writing.

use std::fs;
use std::path::{Path, PathBuf};
use std::thread;

use log::info;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::params::{validate_scenario, ValidationReport};
use crate::sim::{analyze, render_summary, simulate, Analysis, RunOutput};
use crate::trace::{write_checkpoint_csv, write_trace_csv};

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Exit {
    Success = 0,
    Failure = 1,
    InvalidConfig = 2,
    BlowUp = 3,
}

impl Exit {
    pub fn code(self) -> i32 {
        self as i32
    }

    pub fn of_error(e: &Error) -> Self {
        match e {
            Error::Config(_) => Exit::InvalidConfig,
            Error::BlowUp { .. } | Error::Numerical(_) => Exit::BlowUp,
            _ => Exit::Failure,
        }
    }
}

#[derive(Debug)]
pub struct ScenarioOutcome {
    pub exit: Exit,
    pub validation: ValidationReport,
    /// Absent when validation failed and nothing was run.
    pub run: Option<(RunOutput, Analysis)>,
    pub summary: String,
    pub summary_path: PathBuf,
}

/// Validate, run and write the trace, checkpoint and summary files into
/// `out_dir`. A failed validation writes only the summary.
pub fn run_scenario(cfg: &RunConfig, out_dir: &Path) -> Result<ScenarioOutcome> {
    fs::create_dir_all(out_dir)?;
    let validation = validate_scenario(&cfg.scenario, &cfg.physical);
    let summary_path = out_dir.join(&cfg.output.summary);
    if !validation.passed() {
        let summary = format!("validation failed; no simulation was run\n\n{validation}");
        fs::write(&summary_path, &summary)?;
        return Ok(ScenarioOutcome { exit: Exit::InvalidConfig, validation, run: None, summary, summary_path });
    }

    info!("running {} steps in {} mode", cfg.scenario.steps(), cfg.scenario.mode);
    let out = simulate(&cfg.scenario, &cfg.physical, &cfg.settings)?;
    let analysis = analyze(&out, &cfg.scenario);
    write_trace_csv(&out_dir.join(&cfg.output.trace), &out.trace, &analysis.constraints.flags)?;
    write_checkpoint_csv(&out_dir.join(&cfg.output.checkpoints), &out.checkpoints)?;
    let summary = render_summary(&cfg.scenario, &cfg.physical, &validation, &out, &analysis);
    fs::write(&summary_path, &summary)?;
    let exit = out.failure.as_ref().map_or(Exit::Success, Exit::of_error);
    Ok(ScenarioOutcome { exit, validation, run: Some((out, analysis)), summary, summary_path })
}

/// Run independent scenarios concurrently, each into `out_dir/<name>`.
pub fn sweep(jobs: &[(String, RunConfig)], out_dir: &Path) -> Vec<(String, Result<ScenarioOutcome>)> {
    thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|(name, cfg)| {
                let dir = out_dir.join(name);
                (name.clone(), scope.spawn(move || run_scenario(cfg, &dir)))
            })
            .collect();
        handles
            .into_iter()
            .map(|(name, h)| {
                let res = h.join().unwrap_or_else(|_| Err(Error::Numerical(format!("scenario {name} panicked"))));
                (name, res)
            })
            .collect()
    })
}
