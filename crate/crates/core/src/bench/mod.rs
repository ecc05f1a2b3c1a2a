//! Experiment harnesses: neighborhood redundancy, sample efficiency, and
//! report emission.

pub mod artifacts;
pub mod beta;
pub mod efficiency;
pub mod preset;
pub mod report;
pub mod runner;

pub use artifacts::{read_train, read_transfer, write_train, write_transfer, ArtifactError};
pub use beta::{estimate_beta, mean_std, BetaConfig, BetaProgram, BetaReport};
pub use efficiency::{
    checkpoint_schedule, compare_modes, head_to_head, mean_ci95, run_sample_efficiency, sign_test,
    ComparisonRow, EfficiencyConfig, EfficiencyResults, SeedRuns, SignTest,
};
pub use preset::{load_map, setups, ExperimentConfig, Preset, SetupError, SpaceKind};
pub use report::{emit_report, git_blob_hash, pooled_beta, BetaRun, Report, ReportError, ReportInput};
pub use runner::{map_inputs, run_beta, run_efficiency, run_train, BenchError};

#[cfg(test)]
mod tests;
