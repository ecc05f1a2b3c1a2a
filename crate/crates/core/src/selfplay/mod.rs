//! Iterated best response: self-play training runs that produce a policy,
//! the corpus of programs searched, and match logs for state pools.

use std::collections::HashSet;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::dsl::{parse, Ast, Grammar};
use crate::engine::{play_match_observed, ActionAssignment, GameState, MatchSetup, StateLog};
use crate::interp::policy;
use crate::library::{build_library, harvest_pool, Library, LibraryError, StatePool, DEFAULT_POOL_CAP};
use crate::search::{
    derive_seed, shc, Budget, EvaluatorError, GameEvaluator, SearchError, SearchTrace, ShcConfig,
    DEFAULT_GAMES_PER_EVAL, FAULT_SCORE,
};
use crate::space::{SearchSpace, SemanticSpace, SyntaxSpace, DEFAULT_EPSILON};

pub const DEFAULT_ITERATIONS: usize = 5;
/// A best response scoring below this against its opponent is discarded.
pub const ACCEPT_SCORE: f64 = 50.0;
/// Most matches played between best responses to fill a state pool.
pub const MAX_POOL_MATCHES: usize = 64;

#[derive(Debug, Error)]
pub enum SelfPlayError {
    #[error("at least one iteration is required")]
    NoIterations,
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Evaluator(#[from] EvaluatorError),
    #[error(transparent)]
    Library(#[from] LibraryError),
    #[error("liss transfer needs a completed training run")]
    MissingLibrary,
    #[error("policy does not compile: {0}")]
    Policy(String),
}

#[derive(Debug, Clone)]
pub struct IbrConfig {
    pub iterations: usize,
    /// Search settings of every best-response call; the seed is the run seed.
    pub shc: ShcConfig,
    pub setups: Vec<MatchSetup>,
    pub initial_opponent: Ast,
    pub games_per_eval: u64,
}

impl IbrConfig {
    pub fn new(setups: Vec<MatchSetup>, shc: ShcConfig) -> IbrConfig {
        IbrConfig {
            iterations: DEFAULT_ITERATIONS,
            shc,
            setups,
            initial_opponent: parse("empty").expect("empty program"),
            games_per_eval: DEFAULT_GAMES_PER_EVAL,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Iteration {
    pub opponent: Ast,
    /// Best program the search found.
    pub best_response: Ast,
    pub best_eval: f64,
    /// Policy carried into the next iteration.
    pub policy: Ast,
    pub trace: SearchTrace,
    pub games: u64,
}

#[derive(Debug, Clone)]
pub struct TrainingArtifacts {
    pub final_policy: Ast,
    /// Distinct programs that played without faulting, in search order.
    pub corpus: Vec<Ast>,
    pub iterations: Vec<Iteration>,
    pub games: u64,
}

impl TrainingArtifacts {
    pub fn traces(&self) -> impl Iterator<Item = &SearchTrace> {
        self.iterations.iter().map(|i| &i.trace)
    }

    /// Policy in force after `games` games: the latest completed iteration's.
    pub fn policy_at(&self, games: u64, initial: &Ast) -> Ast {
        let mut used = 0;
        let mut current = initial.clone();
        for it in &self.iterations {
            used += it.games;
            if used > games {
                break;
            }
            current = it.policy.clone();
        }
        current
    }
}

/// Iteration `i` searches for a best response to the policy of iteration
/// `i - 1`, the first one to `initial_opponent`.
pub fn run_ibr(
    space: &mut dyn SearchSpace,
    config: &IbrConfig,
) -> Result<TrainingArtifacts, SelfPlayError> {
    if config.iterations == 0 {
        return Err(SelfPlayError::NoIterations);
    }
    let mut opponent = config.initial_opponent.clone();
    let mut corpus = Vec::new();
    let mut seen = HashSet::new();
    let mut iterations = Vec::with_capacity(config.iterations);
    let mut games = 0;
    for i in 0..config.iterations {
        let mut evaluator = GameEvaluator::new(config.setups.clone(), &opponent)?
            .with_games_per_eval(config.games_per_eval)?;
        let shc_config = ShcConfig {
            seed: derive_seed(config.shc.seed, "ibr", i as u64),
            ..config.shc.clone()
        };
        let out = shc(space, &mut evaluator, &shc_config)?;
        let checkpointed: HashSet<&Ast> = out.trace.checkpoints.iter().map(|c| &c.best).collect();
        for (program, score) in &out.evaluated {
            let keep = *score > FAULT_SCORE || checkpointed.contains(program);
            if keep && seen.insert(program.clone()) {
                corpus.push(program.clone());
            }
        }
        let policy = if out.best_eval >= ACCEPT_SCORE {
            out.best.clone()
        } else {
            opponent.clone()
        };
        games += out.games;
        iterations.push(Iteration {
            opponent: opponent.clone(),
            best_response: out.best,
            best_eval: out.best_eval,
            policy: policy.clone(),
            trace: out.trace,
            games: out.games,
        });
        opponent = policy;
    }
    Ok(TrainingArtifacts {
        final_policy: opponent,
        corpus,
        iterations,
        games,
    })
}

/// Logs of matches between randomly paired best responses, from random
/// start slots, until `cap` states are logged. Only states in which player 0
/// has an idle unit are kept.
pub fn best_response_logs(
    artifacts: &TrainingArtifacts,
    setups: &[MatchSetup],
    cap: usize,
    seed: u64,
) -> Result<Vec<StateLog>, SelfPlayError> {
    let mut policies: Vec<&Ast> = Vec::new();
    for it in &artifacts.iterations {
        if !policies.contains(&&it.policy) {
            policies.push(&it.policy);
        }
    }
    let compiled = policies
        .iter()
        .map(|p| policy(p).map_err(|e| SelfPlayError::Policy(e.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut logs = Vec::new();
    let mut states = 0;
    for _ in 0..MAX_POOL_MATCHES {
        if states >= cap {
            break;
        }
        let a = rng.gen_range(0..compiled.len());
        let b = rng.gen_range(0..compiled.len());
        let setup = &setups[rng.gen_range(0..setups.len())];
        let slot = rng.gen_range(0..2);
        let mut log = Vec::new();
        let mut observe = |s: &GameState, _: &[ActionAssignment; 2]| {
            if s.units_of(0).any(|u| u.is_idle()) {
                log.push(s.clone());
            }
            true
        };
        let (mut first, mut second) = (compiled[a].clone(), compiled[b].clone());
        play_match_observed(&mut first, &mut second, setup, slot, Some(&mut observe));
        states += log.len();
        logs.push(log);
    }
    Ok(logs)
}

/// Output of a training run: the self-play artifacts plus the state pool and
/// library derived from them.
#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub artifacts: TrainingArtifacts,
    pub logs: Vec<StateLog>,
    pub pool: Arc<StatePool>,
    pub library: Library,
}

#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub ibr: IbrConfig,
    pub pool_cap: usize,
}

impl TrainConfig {
    pub fn new(ibr: IbrConfig) -> TrainConfig {
        TrainConfig {
            ibr,
            pool_cap: DEFAULT_POOL_CAP,
        }
    }
}

/// Self-play in the syntax space, then a library built from everything the
/// searches evaluated.
pub fn train(space: &SyntaxSpace, config: &TrainConfig) -> Result<TrainOutput, SelfPlayError> {
    let mut space = space.clone();
    let artifacts = run_ibr(&mut space, &config.ibr)?;
    let seed = config.ibr.shc.seed;
    let logs = best_response_logs(
        &artifacts,
        &config.ibr.setups,
        config.pool_cap,
        derive_seed(seed, "pool-matches", 0),
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "pool", 0));
    let pool = Arc::new(harvest_pool(&logs, config.pool_cap, &mut rng));
    let library = build_library(&artifacts.corpus, pool.clone())?;
    Ok(TrainOutput {
        artifacts,
        logs,
        pool,
        library,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TransferMode {
    /// Fresh search in the syntax space.
    Syntax,
    /// Syntax space, every best-response search starting from the trained policy.
    SyntaxInit,
    /// Library-induced space grown from the training run.
    Liss,
}

impl TransferMode {
    pub const ALL: [TransferMode; 3] = [TransferMode::Syntax, TransferMode::SyntaxInit, TransferMode::Liss];

    pub fn name(self) -> &'static str {
        match self {
            TransferMode::Syntax => "syntax",
            TransferMode::SyntaxInit => "syntax-init",
            TransferMode::Liss => "liss",
        }
    }
}

impl std::fmt::Display for TransferMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TransferMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "syntax" => Ok(TransferMode::Syntax),
            "syntax-init" | "syntax_init" => Ok(TransferMode::SyntaxInit),
            "liss" => Ok(TransferMode::Liss),
            other => Err(format!("unknown transfer mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TransferConfig {
    pub mode: TransferMode,
    /// Self-play on the test maps. A game budget is split evenly over iterations.
    pub ibr: IbrConfig,
    pub grammar: Grammar,
    pub z: usize,
    pub cap: usize,
    pub epsilon: f64,
    pub continual_growth: bool,
}

impl TransferConfig {
    pub fn new(mode: TransferMode, ibr: IbrConfig) -> TransferConfig {
        TransferConfig {
            mode,
            ibr,
            grammar: Grammar::full(),
            z: crate::space::DEFAULT_Z,
            cap: crate::space::DEFAULT_CAP,
            epsilon: DEFAULT_EPSILON,
            continual_growth: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TransferOutcome {
    pub mode: TransferMode,
    pub artifacts: TrainingArtifacts,
    /// Library sizes before and after the run (liss mode only).
    pub library_growth: Option<(usize, usize)>,
}

/// Self-play on the test maps in the space selected by `config.mode`.
/// `train` is read only by the syntax-init and liss modes.
pub fn transfer(
    train: Option<&TrainOutput>,
    config: &TransferConfig,
) -> Result<TransferOutcome, SelfPlayError> {
    let mut ibr = config.ibr.clone();
    if let Budget::Games(total) = ibr.shc.budget {
        ibr.shc.budget = Budget::Games(total / ibr.iterations.max(1) as u64);
    }
    let syntax = SyntaxSpace {
        grammar: config.grammar.clone(),
        z: config.z,
        cap: config.cap,
    };
    match config.mode {
        TransferMode::Syntax => {
            ibr.shc.initial_candidate = None;
            let artifacts = run_ibr(&mut syntax.clone(), &ibr)?;
            Ok(TransferOutcome {
                mode: config.mode,
                artifacts,
                library_growth: None,
            })
        }
        TransferMode::SyntaxInit => {
            let train = train.ok_or(SelfPlayError::MissingLibrary)?;
            ibr.shc.initial_candidate = Some(train.artifacts.final_policy.clone());
            let artifacts = run_ibr(&mut syntax.clone(), &ibr)?;
            Ok(TransferOutcome {
                mode: config.mode,
                artifacts,
                library_growth: None,
            })
        }
        TransferMode::Liss => {
            let train = train.ok_or(SelfPlayError::MissingLibrary)?;
            ibr.shc.initial_candidate = None;
            let mut space = SemanticSpace {
                syntax,
                library: train.library.clone(),
                epsilon: config.epsilon,
                continual_growth: config.continual_growth,
            };
            let before = space.library.len();
            let artifacts = run_ibr(&mut space, &ibr)?;
            Ok(TransferOutcome {
                mode: config.mode,
                artifacts,
                library_growth: Some((before, space.library.len())),
            })
        }
    }
}

/// Trains on one configuration, then runs the transfer.
pub fn train_then_transfer(
    train_config: &TrainConfig,
    transfer_config: &TransferConfig,
) -> Result<(Option<TrainOutput>, TransferOutcome), SelfPlayError> {
    let trained = match transfer_config.mode {
        TransferMode::Syntax => None,
        _ => Some(train(&SyntaxSpace::new(transfer_config.grammar.clone()), train_config)?),
    };
    let outcome = transfer(trained.as_ref(), transfer_config)?;
    Ok((trained, outcome))
}
