//! Experiment harness, configuration files and CLI plumbing around
//! [`bvm_core`].
//!
//! Experiments are deterministic functions of their configuration: every
//! replicate owns an RNG stream derived from `(seed, replicate index)` and
//! partial results are merged in index order, so the output does not depend
//! on the number of worker threads.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds_config;
pub mod config;
pub mod critdim;
pub mod design;
pub mod error;
pub mod glm_check;
pub mod output;
pub mod stats;
pub mod sweep;

pub use bounds_config::{bounds_from_json, run_bounds, BoundsConfig};
pub use config::{CritdimConfig, ExperimentConfig, GlmCheckConfig, Regime, SweepConfig, SweepPair};
pub use critdim::{run_critdim, CritdimResult, CritdimSummary};
pub use error::{BvmError, ConfigError, Result};
pub use glm_check::{run_glm_check, GlmCheckResult, GlmCheckSummary};
pub use output::Artifacts;
pub use sweep::{run_sweep, SweepResult, SweepSummary};

/// Runs any experiment and renders its output files.
pub fn run_experiment(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<Artifacts> {
    match cfg {
        ExperimentConfig::Critdim(c) => run_critdim(c, threads)?.artifacts(),
        ExperimentConfig::Sweep(c) => run_sweep(c, threads)?.artifacts(),
        ExperimentConfig::GlmCheck(c) => run_glm_check(c)?.artifacts(),
    }
}
