//! Experiment configuration, sweep expansion and execution with CSV/JSON output.

mod config;
mod run;

pub use config::{
    apply_override, apply_overrides, sweep_schedule, Checks, EstimateSection, ExperimentConfig, ExperimentKind,
    PicardSection, RunSpec,
};
pub use run::{run_experiment, thread_cap, CheckResult, RunManifest, RunRecord, RunStatus, ARTIFACT_VERSION};
