//! Synthetic daily-activity population generation for evacuation studies.
//!
//! The pipeline turns per-subgroup activity distributions, duration weights
//! and geocoded locations into per-agent day plans (activities, start times,
//! locations), optionally annotates each agent with bushfire-response
//! attributes, and can replay the annotated population through a desk-scale
//! threshold/alert scenario engine.
//!
//! Modules follow the pipeline stages:
//!
//! - [`model`] — scenario inputs: configuration, domain types, loading and
//!   cross-validation.
//! - [`schedule`] — distribution tables → start-probability matrices →
//!   per-agent activity sequences with jittered start times.
//! - [`places`] — locality-centroid gravity selection with pseudo-distance
//!   self-weighting; capped home assignment.
//! - [`behaviour`] — per-agent threshold/dependant/refuge attribute drawing.
//! - [`respond`] — alert delivery, barometers, goal-plan execution and the
//!   tick-driven scenario engine.
//! - [`validate`] — occupancy reconstruction and distribution-error reports.
//! - [`io`] — location/refuge CSV ingestion and MATSim-style population XML.
//! - [`generate`] — end-to-end orchestration (parallel by default, sequential
//!   without the `parallel` feature).

pub mod behaviour;
pub mod generate;
pub mod io;
pub mod model;
pub mod places;
pub mod respond;
pub mod rng;
pub mod schedule;
pub mod validate;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Configuration or input-data problem (bad file content, violated
    /// invariant, infeasible request). Maps to CLI exit code 2.
    #[error("{0}")]
    Input(String),
    /// Failure while producing output or running a stage.
    #[error("{0}")]
    Runtime(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub fn runtime(msg: impl Into<String>) -> Self {
        Error::Runtime(msg.into())
    }

    /// True when the error stems from user-supplied input rather than the run
    /// itself; the CLI maps this to exit code 2.
    pub fn is_input(&self) -> bool {
        matches!(self, Error::Input(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
