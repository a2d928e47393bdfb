//! Experiment harness for the online k-median with outliers engine: CSV
//! ingestion, stream replay, an offline baseline for cost ratios, and the
//! per-step log.

pub mod baseline;
pub mod error;
pub mod experiment;
pub mod ingest;
pub mod log;
pub mod synthetic;
pub mod verify;

pub use error::{BenchError, Result};
pub use experiment::{run_experiment, run_on_points, BaselineSpec, ExperimentOutcome, ExperimentSpec};
pub use log::{emit_log_csv, read_log, StepLogRow};
