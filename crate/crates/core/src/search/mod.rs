//! Stochastic hill climbing over a search space, with match-based
//! evaluation of candidate programs.

pub mod evaluate;
pub mod shc;

pub use evaluate::{
    evaluate_policy, Evaluation, Evaluator, EvaluatorError, GameEvaluator, LogReservoir,
    DEFAULT_GAMES_PER_EVAL, FAULT_SCORE,
};
pub use shc::{
    shc, Budget, Checkpoint, SearchError, SearchTrace, ShcConfig, ShcOutcome, DEFAULT_K,
    DEFAULT_SECONDS, STALE_LIMIT,
};


/// Seed for a named sub-task of a seeded run.
pub fn derive_seed(seed: u64, tag: &str, index: u64) -> u64 {
    let mut bytes = Vec::with_capacity(16 + tag.len());
    bytes.extend_from_slice(&seed.to_le_bytes());
    bytes.extend_from_slice(&index.to_le_bytes());
    bytes.extend_from_slice(tag.as_bytes());
    xxhash_rust::xxh3::xxh3_64(&bytes)
}

#[cfg(test)]
mod tests;
