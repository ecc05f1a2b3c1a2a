use thiserror::Error;
use xxhash_rust::xxh3::xxh3_128;

use super::exec::{interpret, ExecContext, DEFAULT_STEP_BUDGET};
use super::program::{compile, compile_condition, CompileError};
use crate::dsl::{Ast, Nonterminal};
use crate::engine::{ActionAssignment, GameState, Player};

/// Per-state behavior digests of a program over a fixed state pool.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActionSignature(pub Vec<u128>);

impl ActionSignature {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Single digest of the whole vector.
    pub fn digest(&self) -> u128 {
        let mut bytes = Vec::with_capacity(self.0.len() * 16);
        for d in &self.0 {
            bytes.extend_from_slice(&d.to_le_bytes());
        }
        xxh3_128(&bytes)
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SignatureError {
    #[error("program faults on pool state {0}")]
    NonExecutable(usize),
    #[error(transparent)]
    Compile(#[from] CompileError),
}

/// What a program does on one state: the full assignment for statements and
/// commands, the truth value for conditions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Behavior {
    Actions(ActionAssignment),
    Truth(bool),
}

impl Behavior {
    pub fn digest(&self) -> u128 {
        match self {
            Behavior::Actions(a) => assignment_digest(a),
            Behavior::Truth(b) => *b as u128,
        }
    }
}

pub fn assignment_digest(a: &ActionAssignment) -> u128 {
    let mut bytes = Vec::with_capacity(8 + a.len() * 12);
    a.encode(&mut bytes);
    xxh3_128(&bytes)
}

/// Behaviors of an S-, C- or B-rooted program on each pool state. Conditions
/// are evaluated with no bound unit.
pub fn behaviors(
    program: &Ast,
    pool: &[GameState],
    player: Player,
) -> Result<Vec<Behavior>, SignatureError> {
    if program.nonterminal() == Nonterminal::B {
        let cond = compile_condition(program)?;
        return Ok(pool
            .iter()
            .map(|s| Behavior::Truth(ExecContext::new(s, player, DEFAULT_STEP_BUDGET).eval(&cond, None)))
            .collect());
    }
    let compiled = compile(program)?;
    pool.iter()
        .enumerate()
        .map(|(i, s)| {
            interpret(&compiled, s, player)
                .map(Behavior::Actions)
                .map_err(|_| SignatureError::NonExecutable(i))
        })
        .collect()
}

pub fn signature(
    program: &Ast,
    pool: &[GameState],
    player: Player,
) -> Result<ActionSignature, SignatureError> {
    Ok(ActionSignature(
        behaviors(program, pool, player)?.iter().map(Behavior::digest).collect(),
    ))
}
