//! Experiment drivers over an [`ExperimentConfig`].

use thiserror::Error;

use super::artifacts::ArtifactError;
use super::beta::estimate_beta;
use super::efficiency::{run_sample_efficiency, EfficiencyResults};
use super::preset::{load_map, ExperimentConfig, SetupError, SpaceKind};
use super::report::{BetaRun, ReportError, ReportInput};
use crate::dsl::SampleError;
use crate::library::Library;
use crate::selfplay::{train, SelfPlayError, TrainOutput};
use crate::space::SemanticSpace;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Setup(#[from] SetupError),
    #[error(transparent)]
    SelfPlay(#[from] SelfPlayError),
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error(transparent)]
    Artifact(#[from] ArtifactError),
    #[error(transparent)]
    Report(#[from] ReportError),
}

/// Content hashes of the named maps.
pub fn map_inputs(maps: &[String]) -> Result<Vec<ReportInput>, SetupError> {
    maps.iter()
        .map(|m| Ok(ReportInput::new(format!("map {m}"), load_map(m)?.to_document().as_bytes())))
        .collect()
}

pub fn run_train(config: &ExperimentConfig, seed: u64) -> Result<TrainOutput, BenchError> {
    Ok(train(&config.syntax_space(), &config.train_config(seed)?)?)
}

/// Beta of `space` for every beta seed. The library space uses `library`
/// when given, otherwise the library of a training run with the same seed.
pub fn run_beta(
    config: &ExperimentConfig,
    space: SpaceKind,
    library: Option<&Library>,
) -> Result<(Vec<BetaRun>, Vec<ReportInput>), BenchError> {
    let mut runs = Vec::new();
    let mut inputs = map_inputs(&config.beta_maps)?;
    for seed in config.beta_seed_list() {
        let beta = config.beta_config(seed)?;
        let report = match space {
            SpaceKind::Syntax => estimate_beta(&config.syntax_space(), &beta)?,
            SpaceKind::Liss => {
                let trained;
                let library = match library {
                    Some(l) => l.clone(),
                    None => {
                        trained = run_train(config, seed)?;
                        trained.library.clone()
                    }
                };
                inputs.push(ReportInput::new(format!("library seed {seed}"), library.to_text().as_bytes()));
                let liss = SemanticSpace {
                    syntax: config.syntax_space(),
                    library,
                    epsilon: config.beta_epsilon,
                    continual_growth: false,
                };
                estimate_beta(&liss, &beta)?
            }
        };
        runs.push(BetaRun { seed, report });
    }
    Ok((runs, inputs))
}

pub fn run_efficiency(config: &ExperimentConfig) -> Result<(EfficiencyResults, Vec<ReportInput>), BenchError> {
    let mut maps = config.test_maps.clone();
    maps.push(config.train_map.clone());
    let inputs = map_inputs(&maps)?;
    Ok((run_sample_efficiency(&config.efficiency_config()?)?, inputs))
}

