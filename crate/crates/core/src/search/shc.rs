use std::collections::HashMap;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::evaluate::Evaluator;
use crate::dsl::{Ast, SampleError};
use crate::space::SearchSpace;

pub const DEFAULT_K: usize = 1000;
pub const DEFAULT_SECONDS: f64 = 400.0;
/// Consecutive cached evaluations after which a search gives up.
pub const STALE_LIMIT: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Budget {
    Games(u64),
    Seconds(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShcConfig {
    /// Neighbors evaluated per iteration.
    pub k: usize,
    pub budget: Budget,
    pub seed: u64,
    /// Replaces the space's initial candidate on the first restart only.
    pub initial_candidate: Option<Ast>,
    /// Stops after this many evaluations, cached ones included.
    pub max_candidates: Option<u64>,
}

impl Default for ShcConfig {
    fn default() -> Self {
        ShcConfig {
            k: DEFAULT_K,
            budget: Budget::Seconds(DEFAULT_SECONDS),
            seed: 0,
            initial_candidate: None,
            max_candidates: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub games: u64,
    pub best_eval: f64,
    pub best: Ast,
    pub restarts: u64,
    pub candidates: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SearchTrace {
    pub checkpoints: Vec<Checkpoint>,
}

impl SearchTrace {
    fn push(&mut self, c: Checkpoint) {
        match self.checkpoints.last_mut() {
            Some(last) if last.games == c.games => *last = c,
            _ => self.checkpoints.push(c),
        }
    }

    pub fn last(&self) -> Option<&Checkpoint> {
        self.checkpoints.last()
    }

    /// Latest checkpoint that had used at most `games` games.
    pub fn at_games(&self, games: u64) -> Option<&Checkpoint> {
        self.checkpoints.iter().take_while(|c| c.games <= games).last()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("games,best_eval,restarts,candidates\n");
        for c in &self.checkpoints {
            let _ = writeln!(out, "{},{:.6},{},{}", c.games, c.best_eval, c.restarts, c.candidates);
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct ShcOutcome {
    pub best: Ast,
    pub best_eval: f64,
    pub trace: SearchTrace,
    /// Distinct programs evaluated with their scores, in the order first seen.
    pub evaluated: Vec<(Ast, f64)>,
    pub games: u64,
    pub restarts: u64,
    pub candidates: u64,
    /// Neighbor batches generated.
    pub iterations: u64,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SearchError {
    #[error("budget {budget:?} cannot pay for one evaluation of {needed} games")]
    BudgetTooSmall { budget: Budget, needed: u64 },
    #[error("at least one neighbor per iteration is required")]
    NoNeighbors,
    #[error(transparent)]
    Sample(#[from] SampleError),
}

struct Run<'a> {
    space: &'a mut dyn SearchSpace,
    evaluator: &'a mut dyn Evaluator,
    config: &'a ShcConfig,
    started: Instant,
    cache: HashMap<Ast, f64>,
    evaluated: Vec<(Ast, f64)>,
    games: u64,
    candidates: u64,
    restarts: u64,
    stale: u64,
    best: Option<(Ast, f64)>,
    trace: SearchTrace,
}

impl Run<'_> {
    fn exhausted(&self) -> bool {
        let over = match self.config.budget {
            Budget::Games(b) => self.games + self.evaluator.games_per_eval() > b,
            Budget::Seconds(s) => self.started.elapsed() >= Duration::from_secs_f64(s),
        };
        over || self.stale >= STALE_LIMIT
            || self.config.max_candidates.is_some_and(|m| self.candidates >= m)
    }

    fn evaluate(&mut self, program: &Ast) -> f64 {
        self.candidates += 1;
        if let Some(&score) = self.cache.get(program) {
            self.stale += 1;
            return score;
        }
        self.stale = 0;
        let eval = self.evaluator.evaluate(program);
        self.games += eval.games;
        self.cache.insert(program.clone(), eval.score);
        self.evaluated.push((program.clone(), eval.score));
        self.space.record_candidate(program);
        if self.best.as_ref().is_none_or(|(_, b)| eval.score > *b) {
            self.best = Some((program.clone(), eval.score));
            self.checkpoint();
        }
        eval.score
    }

    fn checkpoint(&mut self) {
        let (best, best_eval) = self.best.clone().expect("evaluated at least once");
        self.trace.push(Checkpoint {
            games: self.games,
            best_eval,
            best,
            restarts: self.restarts,
            candidates: self.candidates,
        });
    }
}

/// Stochastic hill climbing with restarts. Each iteration evaluates `k`
/// neighbors of the current program and moves to the best one if it is
/// strictly better; otherwise the search restarts from a fresh initial
/// candidate. Returns the best program seen across all restarts.
pub fn shc(
    space: &mut dyn SearchSpace,
    evaluator: &mut dyn Evaluator,
    config: &ShcConfig,
) -> Result<ShcOutcome, SearchError> {
    if config.k == 0 {
        return Err(SearchError::NoNeighbors);
    }
    let needed = evaluator.games_per_eval();
    let too_small = match config.budget {
        Budget::Games(b) => b < needed,
        Budget::Seconds(s) => s.is_nan() || s <= 0.0,
    };
    if too_small {
        return Err(SearchError::BudgetTooSmall {
            budget: config.budget,
            needed,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut run = Run {
        space,
        evaluator,
        config,
        started: Instant::now(),
        cache: HashMap::new(),
        evaluated: Vec::new(),
        games: 0,
        candidates: 0,
        restarts: 0,
        stale: 0,
        best: None,
        trace: SearchTrace::default(),
    };
    let mut current = match &config.initial_candidate {
        Some(p) => p.clone(),
        None => run.space.initial(&mut rng)?,
    };
    let mut current_eval = run.evaluate(&current);
    let mut iterations = 0;
    while !run.exhausted() {
        iterations += 1;
        let neighbors = run.space.neighbors(&current, config.k, &mut rng)?;
        let mut best_neighbor: Option<(Ast, f64)> = None;
        for n in neighbors {
            if run.exhausted() {
                break;
            }
            let score = run.evaluate(&n);
            if best_neighbor.as_ref().is_none_or(|(_, b)| score > *b) {
                best_neighbor = Some((n, score));
            }
        }
        match best_neighbor {
            Some((n, score)) if score > current_eval => {
                current = n;
                current_eval = score;
            }
            _ => {
                run.restarts += 1;
                if !run.exhausted() {
                    current = run.space.initial(&mut rng)?;
                    current_eval = run.evaluate(&current);
                }
            }
        }
        run.checkpoint();
    }
    run.checkpoint();
    let (best, best_eval) = run.best.clone().expect("evaluated at least once");
    Ok(ShcOutcome {
        best,
        best_eval,
        trace: run.trace,
        evaluated: run.evaluated,
        games: run.games,
        restarts: run.restarts,
        candidates: run.candidates,
        iterations,
    })
}
