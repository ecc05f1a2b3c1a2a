use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::dsl::Ast;
use crate::engine::{
    play_match_observed, winning_rate, ActionAssignment, GameState, MatchResult, MatchSetup,
    Policy, Side, StateLog,
};
use crate::interp::{policy, CompileError, ProgramPolicy};

pub const DEFAULT_GAMES_PER_EVAL: u64 = 2;
/// Score of a candidate that faults or cannot be compiled.
pub const FAULT_SCORE: f64 = -1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    /// Winning rate plus a tiebreak in (-0.5, 0.5) from the score margin.
    pub score: f64,
    pub winning_rate: f64,
    pub games: u64,
    pub faulted: bool,
}

pub trait Evaluator {
    /// Games consumed by every call to [`Evaluator::evaluate`].
    fn games_per_eval(&self) -> u64;

    fn evaluate(&mut self, candidate: &Ast) -> Evaluation;
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum EvaluatorError {
    #[error("opponent does not compile: {0}")]
    Opponent(#[from] CompileError),
    #[error("games per evaluation must be a positive even number, got {0}")]
    GamesPerEval(u64),
    #[error("no maps to play on")]
    NoMaps,
}

/// Plays `games_per_eval` matches of `candidate` against `opponent`, taking
/// turns at the two start slots and cycling through `setups` every two games.
pub fn evaluate_policy(
    candidate: &Ast,
    opponent: &dyn Fn() -> Box<dyn Policy>,
    setups: &[MatchSetup],
    games_per_eval: u64,
    mut record: impl FnMut() -> Option<StateLog>,
) -> (Evaluation, Vec<MatchResult>, Vec<StateLog>) {
    let fault = Evaluation {
        score: FAULT_SCORE,
        winning_rate: 0.0,
        games: games_per_eval,
        faulted: true,
    };
    let Ok(cand) = policy(candidate) else {
        return (fault, Vec::new(), Vec::new());
    };
    let mut results = Vec::with_capacity(games_per_eval as usize);
    let mut logs = Vec::new();
    for g in 0..games_per_eval {
        let setup = &setups[(g / 2) as usize % setups.len()];
        let slot = (g % 2) as usize;
        let mut me = cand.clone();
        let mut them = opponent();
        let result = match record() {
            Some(mut log) => {
                let mut observe = |s: &GameState, _: &[ActionAssignment; 2]| {
                    if s.units_of(0).any(|u| u.is_idle()) {
                        log.push(s.clone());
                    }
                    true
                };
                let r = play_match_observed(&mut me, them.as_mut(), setup, slot, Some(&mut observe));
                logs.push(log);
                r
            }
            None => play_match_observed(&mut me, them.as_mut(), setup, slot, None),
        };
        results.push(result);
    }
    if results.iter().any(|r| r.faults[r.slot_of(Side::First)]) {
        return (fault, results, logs);
    }
    let rate = winning_rate(&results, Side::First).expect("at least one game");
    let margin: i64 = results.iter().map(|r| r.margin(Side::First)).sum();
    let total: i64 = results.iter().map(|r| r.score[0] + r.score[1]).sum();
    let tiebreak = 0.5 * margin as f64 / (total.abs() as f64 + 1.0);
    let eval = Evaluation {
        score: rate + tiebreak,
        winning_rate: rate,
        games: games_per_eval,
        faulted: false,
    };
    (eval, results, logs)
}

/// Uniform sample of match logs, kept as the matches are played. Only states
/// in which player 0 has an idle unit are recorded.
#[derive(Debug, Clone)]
pub struct LogReservoir {
    capacity: usize,
    seen: u64,
    logs: Vec<StateLog>,
    rng: ChaCha8Rng,
}

impl LogReservoir {
    pub fn new(capacity: usize, seed: u64) -> LogReservoir {
        LogReservoir {
            capacity,
            seen: 0,
            logs: Vec::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Decides whether the next match is kept, and where.
    fn admit(&mut self) -> Option<usize> {
        self.seen += 1;
        if self.logs.len() < self.capacity {
            self.logs.push(Vec::new());
            return Some(self.logs.len() - 1);
        }
        let j = self.rng.gen_range(0..self.seen) as usize;
        (j < self.capacity).then_some(j)
    }

    fn store(&mut self, slot: usize, log: StateLog) {
        self.logs[slot] = log;
    }

    pub fn matches_seen(&self) -> u64 {
        self.seen
    }

    pub fn logs(&self) -> &[StateLog] {
        &self.logs
    }

    pub fn into_logs(self) -> Vec<StateLog> {
        self.logs
    }
}

/// Evaluates candidates by playing a fixed program opponent.
#[derive(Debug, Clone)]
pub struct GameEvaluator {
    setups: Vec<MatchSetup>,
    opponent: ProgramPolicy,
    games_per_eval: u64,
    reservoir: Option<LogReservoir>,
}

impl GameEvaluator {
    pub fn new(setups: Vec<MatchSetup>, opponent: &Ast) -> Result<GameEvaluator, EvaluatorError> {
        if setups.is_empty() {
            return Err(EvaluatorError::NoMaps);
        }
        Ok(GameEvaluator {
            setups,
            opponent: policy(opponent)?,
            games_per_eval: DEFAULT_GAMES_PER_EVAL,
            reservoir: None,
        })
    }

    pub fn with_games_per_eval(mut self, games: u64) -> Result<GameEvaluator, EvaluatorError> {
        if games == 0 || !games.is_multiple_of(2) {
            return Err(EvaluatorError::GamesPerEval(games));
        }
        self.games_per_eval = games;
        Ok(self)
    }

    /// Keeps a uniform sample of up to `capacity` match logs.
    pub fn with_log_capture(mut self, capacity: usize, seed: u64) -> GameEvaluator {
        self.reservoir = Some(LogReservoir::new(capacity, seed));
        self
    }

    pub fn reservoir(&self) -> Option<&LogReservoir> {
        self.reservoir.as_ref()
    }

    pub fn take_reservoir(&mut self) -> Option<LogReservoir> {
        self.reservoir.take()
    }

    /// Evaluation plus the individual match results.
    pub fn evaluate_detailed(&mut self, candidate: &Ast) -> (Evaluation, Vec<MatchResult>) {
        let opponent = self.opponent.clone();
        let make = move || -> Box<dyn Policy> { Box::new(opponent.clone()) };
        let mut slots = Vec::new();
        let reservoir = &mut self.reservoir;
        let (eval, results, logs) =
            evaluate_policy(candidate, &make, &self.setups, self.games_per_eval, || {
                let slot = reservoir.as_mut()?.admit()?;
                slots.push(slot);
                Some(Vec::new())
            });
        if let Some(r) = self.reservoir.as_mut() {
            for (slot, log) in slots.into_iter().zip(logs) {
                r.store(slot, log);
            }
        }
        (eval, results)
    }
}

impl Evaluator for GameEvaluator {
    fn games_per_eval(&self) -> u64 {
        self.games_per_eval
    }

    fn evaluate(&mut self, candidate: &Ast) -> Evaluation {
        self.evaluate_detailed(candidate).0
    }
}
