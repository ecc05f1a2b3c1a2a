//! Named experiment configurations and their key-value form.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use super::beta::{BetaConfig, DESK_NEIGHBORS, DESK_PROGRAMS, PAPER_NEIGHBORS, PAPER_PROGRAMS};
use super::efficiency::EfficiencyConfig;
use crate::config::{parse_value, ConfigError, KeyValues, FORMAT_VERSION};
use crate::dsl::Grammar;
use crate::engine::{load_shipped, GameMap, MatchSetup, StatsTable};
use crate::library::DEFAULT_POOL_CAP;
use crate::search::{Budget, ShcConfig, DEFAULT_GAMES_PER_EVAL};
use crate::selfplay::{IbrConfig, TrainConfig, TransferConfig, TransferMode, DEFAULT_ITERATIONS};
use crate::space::{SyntaxSpace, DEFAULT_CAP, DEFAULT_EPSILON, DEFAULT_Z};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Desk,
    Paper,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Desk => "desk",
            Preset::Paper => "paper",
        }
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "desk" => Ok(Preset::Desk),
            "paper" => Ok(Preset::Paper),
            other => Err(format!("unknown preset `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceKind {
    Syntax,
    Liss,
}

impl SpaceKind {
    pub fn name(self) -> &'static str {
        match self {
            SpaceKind::Syntax => "syntax",
            SpaceKind::Liss => "liss",
        }
    }
}

impl FromStr for SpaceKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "syntax" => Ok(SpaceKind::Syntax),
            "liss" => Ok(SpaceKind::Liss),
            other => Err(format!("unknown space `{other}`")),
        }
    }
}

#[derive(Debug, Error)]
pub enum SetupError {
    #[error("map `{0}`: {1}")]
    Map(String, String),
    #[error("no maps configured for {0}")]
    NoMaps(&'static str),
}

/// Every knob of the training, transfer and beta experiments.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub preset: Preset,
    pub seed: u64,
    pub space: SpaceKind,
    pub k: usize,
    pub z: usize,
    pub cap: usize,
    pub epsilon: f64,
    pub continual_growth: bool,
    /// Library file used instead of training one.
    pub library_path: Option<PathBuf>,
    pub pool_cap: usize,
    pub games_per_eval: u64,
    pub train_map: String,
    pub train_iterations: usize,
    /// Budget of each best-response search during training.
    pub train_budget: Budget,
    pub test_maps: Vec<String>,
    pub test_iterations: usize,
    /// Total games of one transfer run.
    pub game_budget: u64,
    pub beta_programs: usize,
    pub beta_neighbors: usize,
    pub beta_maps: Vec<String>,
    pub beta_seeds: usize,
    /// Probability of a syntax move in the library space under beta.
    pub beta_epsilon: f64,
    /// Seeds of the sample-efficiency comparison.
    pub seeds: usize,
}

impl ExperimentConfig {
    pub fn preset(preset: Preset) -> ExperimentConfig {
        let desk = ExperimentConfig {
            preset,
            seed: 0,
            space: SpaceKind::Syntax,
            k: 50,
            z: DEFAULT_Z,
            cap: DEFAULT_CAP,
            epsilon: DEFAULT_EPSILON,
            continual_growth: true,
            library_path: None,
            pool_cap: DEFAULT_POOL_CAP,
            games_per_eval: DEFAULT_GAMES_PER_EVAL,
            train_map: "basesworkers_24x24".into(),
            train_iterations: DEFAULT_ITERATIONS,
            train_budget: Budget::Games(800),
            test_maps: vec!["nwr_9x8".into()],
            test_iterations: DEFAULT_ITERATIONS,
            game_budget: 4000,
            beta_programs: DESK_PROGRAMS,
            beta_neighbors: DESK_NEIGHBORS,
            beta_maps: vec!["nwr_9x8".into(), "lmo_16x8".into()],
            beta_seeds: 3,
            beta_epsilon: 0.0,
            seeds: 5,
        };
        match preset {
            Preset::Desk => desk,
            Preset::Paper => ExperimentConfig {
                k: 1000,
                train_budget: Budget::Seconds(400.0),
                game_budget: 100_000,
                beta_programs: PAPER_PROGRAMS,
                beta_neighbors: PAPER_NEIGHBORS,
                beta_maps: vec!["nwr_9x8".into(), "lmo_16x8".into(), "brr_24x24".into()],
                beta_seeds: 30,
                seeds: 30,
                ..desk
            },
        }
    }

    /// Starts from the document's `preset` (desk when absent) and applies
    /// every other key on top.
    pub fn from_key_values(kv: &KeyValues) -> Result<ExperimentConfig, ConfigError> {
        let preset = match kv.iter().find(|(k, _)| *k == "preset") {
            Some((k, v)) => parse_value::<Preset>(k, v)?,
            None => Preset::Desk,
        };
        let mut config = ExperimentConfig::preset(preset);
        config.apply(kv)?;
        Ok(config)
    }

    pub fn from_text(text: &str) -> Result<ExperimentConfig, ConfigError> {
        ExperimentConfig::from_key_values(&KeyValues::parse(text)?)
    }

    /// Overrides fields named in `kv`; `preset` is ignored.
    pub fn apply(&mut self, kv: &KeyValues) -> Result<(), ConfigError> {
        for (key, value) in kv.iter() {
            self.set(key, value)?;
        }
        self.validate()
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let list = |v: &str| -> Vec<String> {
            v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect()
        };
        match key {
            "preset" => {}
            "seed" => self.seed = parse_value(key, value)?,
            "space" => self.space = parse_value(key, value)?,
            "k" => self.k = parse_value(key, value)?,
            "z" => self.z = parse_value(key, value)?,
            "cap" => self.cap = parse_value(key, value)?,
            "epsilon" => self.epsilon = parse_value(key, value)?,
            "continual_growth" => self.continual_growth = parse_value(key, value)?,
            "library_path" => {
                self.library_path = (!value.is_empty()).then(|| PathBuf::from(value));
            }
            "pool_cap" => self.pool_cap = parse_value(key, value)?,
            "games_per_eval" => self.games_per_eval = parse_value(key, value)?,
            "train_map" => self.train_map = value.to_string(),
            "train_iterations" => self.train_iterations = parse_value(key, value)?,
            "train_games" => self.train_budget = Budget::Games(parse_value(key, value)?),
            "train_seconds" => self.train_budget = Budget::Seconds(parse_value(key, value)?),
            "test_maps" => self.test_maps = list(value),
            "test_iterations" => self.test_iterations = parse_value(key, value)?,
            "game_budget" => self.game_budget = parse_value(key, value)?,
            "beta_programs" => self.beta_programs = parse_value(key, value)?,
            "beta_neighbors" => self.beta_neighbors = parse_value(key, value)?,
            "beta_maps" => self.beta_maps = list(value),
            "beta_seeds" => self.beta_seeds = parse_value(key, value)?,
            "beta_epsilon" => self.beta_epsilon = parse_value(key, value)?,
            "seeds" => self.seeds = parse_value(key, value)?,
            other => return Err(ConfigError::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |key: &str, message: &str| ConfigError::InvalidValue {
            key: key.to_string(),
            message: message.to_string(),
        };
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(invalid("epsilon", "must lie in [0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.beta_epsilon) {
            return Err(invalid("beta_epsilon", "must lie in [0, 1]"));
        }
        if self.k == 0 {
            return Err(invalid("k", "must be positive"));
        }
        if self.z > self.cap {
            return Err(invalid("z", "must not exceed cap"));
        }
        if self.games_per_eval == 0 || !self.games_per_eval.is_multiple_of(2) {
            return Err(invalid("games_per_eval", "must be even and positive"));
        }
        if self.train_iterations == 0 || self.test_iterations == 0 {
            return Err(invalid("train_iterations", "iterations must be positive"));
        }
        if self.beta_neighbors == 0 {
            return Err(invalid("beta_neighbors", "must be positive"));
        }
        Ok(())
    }

    /// Key-value snapshot; parsing it back yields an equal config.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "format: {FORMAT_VERSION}");
        let _ = writeln!(out, "preset: {}", self.preset.name());
        let _ = writeln!(out, "seed: {}", self.seed);
        let _ = writeln!(out, "space: {}", self.space.name());
        let _ = writeln!(out, "k: {}", self.k);
        let _ = writeln!(out, "z: {}", self.z);
        let _ = writeln!(out, "cap: {}", self.cap);
        let _ = writeln!(out, "epsilon: {}", self.epsilon);
        let _ = writeln!(out, "continual_growth: {}", self.continual_growth);
        match &self.library_path {
            Some(p) => writeln!(out, "library_path: {}", p.display()),
            None => writeln!(out, "library_path:"),
        }
        .expect("string write");
        let _ = writeln!(out, "pool_cap: {}", self.pool_cap);
        let _ = writeln!(out, "games_per_eval: {}", self.games_per_eval);
        let _ = writeln!(out, "train_map: {}", self.train_map);
        let _ = writeln!(out, "train_iterations: {}", self.train_iterations);
        match self.train_budget {
            Budget::Games(g) => writeln!(out, "train_games: {g}"),
            Budget::Seconds(s) => writeln!(out, "train_seconds: {s}"),
        }
        .expect("string write");
        let _ = writeln!(out, "test_maps: {}", self.test_maps.join(","));
        let _ = writeln!(out, "test_iterations: {}", self.test_iterations);
        let _ = writeln!(out, "game_budget: {}", self.game_budget);
        let _ = writeln!(out, "beta_programs: {}", self.beta_programs);
        let _ = writeln!(out, "beta_neighbors: {}", self.beta_neighbors);
        let _ = writeln!(out, "beta_maps: {}", self.beta_maps.join(","));
        let _ = writeln!(out, "beta_seeds: {}", self.beta_seeds);
        let _ = writeln!(out, "beta_epsilon: {}", self.beta_epsilon);
        let _ = writeln!(out, "seeds: {}", self.seeds);
        out
    }

    pub fn syntax_space(&self) -> SyntaxSpace {
        SyntaxSpace {
            grammar: Grammar::full(),
            z: self.z,
            cap: self.cap,
        }
    }

    fn shc(&self, seed: u64, budget: Budget) -> ShcConfig {
        ShcConfig {
            k: self.k,
            budget,
            seed,
            ..ShcConfig::default()
        }
    }

    pub fn train_config(&self, seed: u64) -> Result<TrainConfig, SetupError> {
        let setups = setups(std::slice::from_ref(&self.train_map), "training")?;
        let mut ibr = IbrConfig::new(setups, self.shc(seed, self.train_budget));
        ibr.iterations = self.train_iterations;
        ibr.games_per_eval = self.games_per_eval;
        Ok(TrainConfig {
            ibr,
            pool_cap: self.pool_cap,
        })
    }

    pub fn transfer_config(&self, mode: TransferMode, seed: u64) -> Result<TransferConfig, SetupError> {
        let setups = setups(&self.test_maps, "transfer")?;
        let mut ibr = IbrConfig::new(setups, self.shc(seed, Budget::Games(self.game_budget)));
        ibr.iterations = self.test_iterations;
        ibr.games_per_eval = self.games_per_eval;
        let mut config = TransferConfig::new(mode, ibr);
        config.z = self.z;
        config.cap = self.cap;
        config.epsilon = self.epsilon;
        config.continual_growth = self.continual_growth;
        Ok(config)
    }

    pub fn beta_config(&self, seed: u64) -> Result<BetaConfig, SetupError> {
        Ok(BetaConfig {
            n_programs: self.beta_programs,
            n_neighbors: self.beta_neighbors,
            setups: setups(&self.beta_maps, "beta")?,
            seed,
        })
    }

    pub fn efficiency_config(&self) -> Result<EfficiencyConfig, SetupError> {
        Ok(EfficiencyConfig {
            seeds: (self.seed..self.seed + self.seeds as u64).collect(),
            modes: TransferMode::ALL.to_vec(),
            train: self.train_config(self.seed)?,
            transfer: self.transfer_config(TransferMode::Liss, self.seed)?,
            game_budget: self.game_budget,
        })
    }

    pub fn beta_seed_list(&self) -> Vec<u64> {
        (self.seed..self.seed + self.beta_seeds as u64).collect()
    }
}

/// Loads a shipped map by name, or a map file by path.
pub fn load_map(name: &str) -> Result<GameMap, SetupError> {
    if let Ok(map) = load_shipped(name) {
        return Ok(map);
    }
    let text = std::fs::read_to_string(name).map_err(|e| SetupError::Map(name.into(), e.to_string()))?;
    GameMap::parse(&text).map_err(|e| SetupError::Map(name.into(), e.to_string()))
}

pub fn setups(maps: &[String], purpose: &'static str) -> Result<Vec<MatchSetup>, SetupError> {
    if maps.is_empty() {
        return Err(SetupError::NoMaps(purpose));
    }
    let stats = Arc::new(StatsTable::default());
    maps.iter()
        .map(|m| Ok(MatchSetup::new(Arc::new(load_map(m)?), stats.clone())))
        .collect()
}
