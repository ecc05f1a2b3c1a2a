use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::dsl::Ast;
use crate::engine::MatchSetup;
use crate::search::{Budget, GameEvaluator};
use crate::selfplay::{
    train, transfer, SelfPlayError, TrainConfig, TrainingArtifacts, TrainOutput, TransferConfig, TransferMode,
    TransferOutcome,
};
use crate::space::SyntaxSpace;

#[derive(Debug, Clone)]
pub struct EfficiencyConfig {
    pub seeds: Vec<u64>,
    pub modes: Vec<TransferMode>,
    /// Training run template; its seed is replaced per run.
    pub train: TrainConfig,
    /// Transfer template; mode and seed are replaced per run.
    pub transfer: TransferConfig,
    /// Total games each transfer run may play on the test maps.
    pub game_budget: u64,
}

/// One seed's runs in every mode.
#[derive(Debug, Clone)]
pub struct SeedRuns {
    pub seed: u64,
    pub trained: Option<TrainOutput>,
    pub runs: BTreeMap<TransferMode, TransferOutcome>,
}

/// Winning rate of `mode` against `opponent` at one checkpoint, per seed of
/// `mode`, each averaged over the opponent's seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub games: u64,
    pub mode: TransferMode,
    pub opponent: TransferMode,
    pub per_seed: Vec<f64>,
    pub mean: f64,
    pub ci95: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignTest {
    pub wins: usize,
    pub losses: usize,
    pub ties: usize,
    /// One-sided binomial p-value of at least `wins` successes.
    pub p_value: f64,
}

#[derive(Debug, Clone)]
pub struct EfficiencyResults {
    pub seeds: Vec<u64>,
    pub checkpoints: Vec<u64>,
    pub rows: Vec<ComparisonRow>,
    pub runs: Vec<SeedRuns>,
}

impl EfficiencyResults {
    pub fn row(&self, games: u64, mode: TransferMode, opponent: TransferMode) -> Option<&ComparisonRow> {
        self.rows
            .iter()
            .find(|r| r.games == games && r.mode == mode && r.opponent == opponent)
    }

    pub fn final_row(&self, mode: TransferMode, opponent: TransferMode) -> Option<&ComparisonRow> {
        self.row(*self.checkpoints.last()?, mode, opponent)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("games,mode,opponent");
        for s in &self.seeds {
            let _ = write!(out, ",seed_{s}");
        }
        out.push_str(",mean,ci95_low,ci95_high\n");
        for r in &self.rows {
            let _ = write!(out, "{},{},{}", r.games, r.mode, r.opponent);
            for v in &r.per_seed {
                let _ = write!(out, ",{v:.4}");
            }
            let _ = writeln!(out, ",{:.4},{:.4},{:.4}", r.mean, r.ci95.0, r.ci95.1);
        }
        out
    }
}

/// Mean and normal-approximation 95% interval.
pub fn mean_ci95(xs: &[f64]) -> (f64, (f64, f64)) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (0.0, (0.0, 0.0));
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, (mean, mean));
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    let half = 1.96 * (var / n).sqrt();
    (mean, (mean - half, mean + half))
}

/// Sign test of per-seed winning rates against 50, ties dropped.
pub fn sign_test(values: &[f64]) -> SignTest {
    let wins = values.iter().filter(|v| **v > 50.0).count();
    let losses = values.iter().filter(|v| **v < 50.0).count();
    let ties = values.len() - wins - losses;
    let n = wins + losses;
    let p_value = (wins..=n).map(|k| binomial(n, k)).sum::<f64>() / 2f64.powi(n as i32);
    SignTest {
        wins,
        losses,
        ties,
        p_value,
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Winning rate of `a` against `b` over both start slots of every map.
pub fn head_to_head(a: &Ast, b: &Ast, setups: &[MatchSetup]) -> Result<f64, SelfPlayError> {
    let games = 2 * setups.len() as u64;
    let mut eval = GameEvaluator::new(setups.to_vec(), b)?.with_games_per_eval(games)?;
    Ok(eval.evaluate_detailed(a).0.winning_rate)
}

/// Game counts at which modes are compared: the ends of the transfer
/// iterations.
pub fn checkpoint_schedule(game_budget: u64, iterations: usize) -> Vec<u64> {
    let iterations = iterations.max(1) as u64;
    let per_iteration = game_budget / iterations;
    (1..=iterations).map(|i| i * per_iteration).collect()
}

/// Plays the policies every pair of modes held at each checkpoint against
/// each other. `runs[mode][j]` is the run of the `j`-th seed.
pub fn compare_modes(
    runs: &BTreeMap<TransferMode, Vec<TrainingArtifacts>>,
    checkpoints: &[u64],
    setups: &[MatchSetup],
    initial: &Ast,
) -> Result<Vec<ComparisonRow>, SelfPlayError> {
    let mut rows = Vec::new();
    for &games in checkpoints {
        let at = |mode: TransferMode| -> Vec<Ast> {
            runs[&mode].iter().map(|a| a.policy_at(games, initial)).collect()
        };
        for &mode in runs.keys() {
            for &opponent in runs.keys() {
                if mode == opponent {
                    continue;
                }
                let (mine, theirs) = (at(mode), at(opponent));
                let mut per_seed = Vec::with_capacity(mine.len());
                for a in &mine {
                    let mut total = 0.0;
                    for b in &theirs {
                        total += head_to_head(a, b, setups)?;
                    }
                    per_seed.push(total / theirs.len() as f64);
                }
                let (mean, ci95) = mean_ci95(&per_seed);
                rows.push(ComparisonRow {
                    games,
                    mode,
                    opponent,
                    per_seed,
                    mean,
                    ci95,
                });
            }
        }
    }
    Ok(rows)
}

/// Runs every mode for every seed, then plays the policies each mode held
/// at matched game counts against each other.
pub fn run_sample_efficiency(config: &EfficiencyConfig) -> Result<EfficiencyResults, SelfPlayError> {
    let mut runs = Vec::with_capacity(config.seeds.len());
    for &seed in &config.seeds {
        let needs_train = config.modes.iter().any(|m| *m != TransferMode::Syntax);
        let trained = if needs_train {
            let mut tc = config.train.clone();
            tc.ibr.shc.seed = seed;
            Some(train(&SyntaxSpace::new(config.transfer.grammar.clone()), &tc)?)
        } else {
            None
        };
        let mut by_mode = BTreeMap::new();
        for &mode in &config.modes {
            let mut tc = config.transfer.clone();
            tc.mode = mode;
            tc.ibr.shc.seed = seed;
            tc.ibr.shc.budget = Budget::Games(config.game_budget);
            let input = if mode == TransferMode::Syntax { None } else { trained.as_ref() };
            by_mode.insert(mode, transfer(input, &tc)?);
        }
        runs.push(SeedRuns {
            seed,
            trained,
            runs: by_mode,
        });
    }
    let checkpoints = checkpoint_schedule(config.game_budget, config.transfer.ibr.iterations);
    let by_mode: BTreeMap<TransferMode, Vec<TrainingArtifacts>> = config
        .modes
        .iter()
        .map(|&m| (m, runs.iter().map(|r| r.runs[&m].artifacts.clone()).collect()))
        .collect();
    let rows = compare_modes(
        &by_mode,
        &checkpoints,
        &config.transfer.ibr.setups,
        &config.transfer.ibr.initial_opponent,
    )?;
    Ok(EfficiencyResults {
        seeds: config.seeds.clone(),
        checkpoints,
        rows,
        runs,
    })
}
