//! Data-driven model reference adaptive control for discrete-time LTI
//! systems.
//!
//! The controller knows only the reference model `(A_m, B_m)` and the
//! measured input/state data of an otherwise unknown plant `(A_s, B_s)`.
//! It monitors when the data become rich enough to determine the model
//! reference controller uniquely (the informative time), injects targeted
//! exploration inputs when they are not, and runs a gradient adaptive law
//! on sigma-gated data buffers afterwards.
//!
//! Module map:
//! - [`lti_models`]: plants, reference models, gain matching.
//! - [`informativity`]: trajectories, data-rank conditions, informative
//!   time tracking, gain extraction from data.
//! - [`adaptive_controller`]: data buffers, the adaptive parameter and its
//!   update, input selection.
//! - [`sim_harness`]: closed-loop simulation, presets, file I/O, plots.

pub mod adaptive_controller;
pub mod error;
pub mod informativity;
pub mod linalg;
pub mod lti_models;
pub mod sim_harness;

pub use adaptive_controller::{ControllerConfig, DataBuffers, InputMode, ThetaState};
pub use error::{Error, Result};
pub use informativity::{InformativeTimeTracker, Trajectory};
pub use lti_models::{GainPair, ReferenceModel, StateSpacePlant};
pub use sim_harness::{
    run, run_traced, ReferenceSpec, RunOutcome, RunReport, Scenario, StepRecord, Verdict,
};
