//! Config-driven experiments on top of `felix_core`: phase diagrams of the
//! two-player games, prosociality dynamics on complete and random graphs,
//! and commons-game sweeps, each written out as CSV plus a manifest that
//! reproduces the run.

pub mod config;
pub mod error;
pub mod run;
pub mod summary;
pub mod table;

pub use config::{ExperimentConfig, Kind, Overrides};
pub use error::ExpError;
pub use run::{run_experiment, RunOutput};
