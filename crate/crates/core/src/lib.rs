//! Simulation and verification of observer-based boundary control for the
//! one-phase Stefan problem.
//!
//! The plant is the moving-boundary heat equation with the Stefan condition
//! at the melting front. A backstepping observer reconstructs the liquid
//! temperature from the interface position alone, and the feedback law
//! drives the interface to a setpoint by heating the fixed boundary. The
//! diagnostic layer checks the physical constraints, energy conservation,
//! the sign and decay of the estimation error and the Lyapunov functionals
//! along a run.

pub mod config;
pub mod control;
pub mod diagnostics;
pub mod error;
pub mod numerics;
pub mod observer;
pub mod params;
pub mod plant;
pub mod runner;
pub mod sim;
pub mod specfun;
pub mod trace;
pub mod transforms;

pub use config::{RunConfig, RunSettings};
pub use error::{Error, Result};
pub use params::{validate_scenario, ControlMode, PhysicalParams, ScenarioConfig, ValidationReport};
pub use runner::{run_scenario, Exit};
pub use sim::{analyze, simulate, RunOutput};
