//! On-disk layout of training and transfer runs.
//!
//! A training directory holds `policy.mrl`, `corpus/NNNNNN.mrl`,
//! `pool.states`, `library.lib`, `trace.csv` and `config.txt`. A transfer
//! directory holds `policy.mrl`, `trace.csv`, `iterations.csv`,
//! `iterations/N.mrl` and `config.txt`.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use thiserror::Error;

use crate::dsl::{parse, pretty, Ast};
use crate::library::{Library, StatePool};
use crate::selfplay::{Iteration, TrainOutput, TrainingArtifacts, TransferOutcome};

#[derive(Debug, Error)]
pub enum ArtifactError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {message}")]
    Invalid { path: PathBuf, message: String },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> ArtifactError + '_ {
    move |source| ArtifactError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn invalid(path: &Path, message: impl ToString) -> ArtifactError {
    ArtifactError::Invalid {
        path: path.to_path_buf(),
        message: message.to_string(),
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), ArtifactError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    fs::write(path, contents).map_err(io_err(path))
}

pub fn read_file(path: &Path) -> Result<String, ArtifactError> {
    fs::read_to_string(path).map_err(io_err(path))
}

fn read_program(path: &Path) -> Result<Ast, ArtifactError> {
    parse(&read_file(path)?).map_err(|e| invalid(path, e))
}

/// Per-iteration search traces, one row per checkpoint.
pub fn iterations_trace_csv(artifacts: &TrainingArtifacts) -> String {
    let mut out = String::from("iteration,games,best_eval,restarts,candidates\n");
    for (i, it) in artifacts.iterations.iter().enumerate() {
        for c in &it.trace.checkpoints {
            let _ = writeln!(out, "{i},{},{:.6},{},{}", c.games, c.best_eval, c.restarts, c.candidates);
        }
    }
    out
}

pub fn write_train(dir: &Path, out: &TrainOutput, config_text: &str) -> Result<(), ArtifactError> {
    write_file(&dir.join("policy.mrl"), &pretty(&out.artifacts.final_policy))?;
    let corpus = dir.join("corpus");
    if corpus.exists() {
        fs::remove_dir_all(&corpus).map_err(io_err(&corpus))?;
    }
    for (i, p) in out.artifacts.corpus.iter().enumerate() {
        write_file(&corpus.join(format!("{i:06}.mrl")), &pretty(p))?;
    }
    write_file(&dir.join("pool.states"), &out.pool.to_json())?;
    write_file(&dir.join("library.lib"), &out.library.to_text())?;
    write_file(&dir.join("trace.csv"), &iterations_trace_csv(&out.artifacts))?;
    write_file(&dir.join("config.txt"), config_text)
}

pub fn read_pool(path: &Path) -> Result<Arc<StatePool>, ArtifactError> {
    let pool = StatePool::from_json(&read_file(path)?).map_err(|e| invalid(path, e))?;
    Ok(Arc::new(pool))
}

pub fn read_library(path: &Path, pool: Arc<StatePool>) -> Result<Library, ArtifactError> {
    Library::from_text(&read_file(path)?, pool).map_err(|e| invalid(path, e))
}

/// Restores a training directory. Per-iteration records and match logs are
/// not kept on disk and come back empty.
pub fn read_train(dir: &Path) -> Result<TrainOutput, ArtifactError> {
    let final_policy = read_program(&dir.join("policy.mrl"))?;
    let corpus_dir = dir.join("corpus");
    let mut files: Vec<PathBuf> = fs::read_dir(&corpus_dir)
        .map_err(io_err(&corpus_dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "mrl"))
        .collect();
    files.sort();
    let corpus = files.iter().map(|f| read_program(f)).collect::<Result<Vec<_>, _>>()?;
    let pool = read_pool(&dir.join("pool.states"))?;
    let library = read_library(&dir.join("library.lib"), pool.clone())?;
    Ok(TrainOutput {
        artifacts: TrainingArtifacts {
            final_policy,
            corpus,
            iterations: Vec::new(),
            games: 0,
        },
        logs: Vec::new(),
        pool,
        library,
    })
}

pub fn write_transfer(dir: &Path, outcome: &TransferOutcome, config_text: &str) -> Result<(), ArtifactError> {
    let artifacts = &outcome.artifacts;
    write_file(&dir.join("policy.mrl"), &pretty(&artifacts.final_policy))?;
    write_file(&dir.join("trace.csv"), &iterations_trace_csv(artifacts))?;
    let mut table = String::from("iteration,games,best_eval,accepted\n");
    for (i, it) in artifacts.iterations.iter().enumerate() {
        let accepted = it.policy == it.best_response;
        let _ = writeln!(table, "{i},{},{:.6},{accepted}", it.games, it.best_eval);
        write_file(&dir.join("iterations").join(format!("{i}.mrl")), &pretty(&it.policy))?;
    }
    write_file(&dir.join("iterations.csv"), &table)?;
    write_file(&dir.join("config.txt"), config_text)
}

/// Restores the policy sequence of a transfer directory, enough to replay
/// which policy was in force after any number of games.
pub fn read_transfer(dir: &Path, initial: &Ast) -> Result<TrainingArtifacts, ArtifactError> {
    let table_path = dir.join("iterations.csv");
    let table = read_file(&table_path)?;
    let mut iterations = Vec::new();
    let mut opponent = initial.clone();
    let mut games = 0;
    for line in table.lines().skip(1).filter(|l| !l.is_empty()) {
        let cols: Vec<&str> = line.split(',').collect();
        let [i, g, eval, _] = cols[..] else {
            return Err(invalid(&table_path, format!("bad row `{line}`")));
        };
        let g: u64 = g.parse().map_err(|e| invalid(&table_path, e))?;
        let best_eval: f64 = eval.parse().map_err(|e| invalid(&table_path, e))?;
        let policy = read_program(&dir.join("iterations").join(format!("{i}.mrl")))?;
        games += g;
        iterations.push(Iteration {
            opponent: opponent.clone(),
            best_response: policy.clone(),
            best_eval,
            policy: policy.clone(),
            trace: Default::default(),
            games: g,
        });
        opponent = policy;
    }
    Ok(TrainingArtifacts {
        final_policy: opponent,
        corpus: Vec::new(),
        iterations,
        games,
    })
}
