use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Arc;

use rand::Rng;
use thiserror::Error;

use super::pool::StatePool;
use crate::config::FORMAT_VERSION;
use crate::dsl::{parse_as, pretty, Ast, Nonterminal};
use crate::engine::Player;
use crate::interp::{signature, ActionSignature};

/// Nonterminal classes a library stores.
pub const CLASSES: [Nonterminal; 3] = [Nonterminal::S, Nonterminal::C, Nonterminal::B];

fn class_slot(nt: Nonterminal) -> Option<usize> {
    CLASSES.iter().position(|c| *c == nt)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LibraryEntry {
    pub class: Nonterminal,
    pub program: Ast,
    pub signature: ActionSignature,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InsertOutcome {
    Inserted,
    Duplicate,
    NonExecutable,
    /// Root class is not stored (literal nonterminals).
    Excluded,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum LibraryError {
    #[error("state pool is empty")]
    EmptyPool,
    #[error("no library entries rooted at {0}")]
    NoneAvailable(Nonterminal),
}

/// Programs with pairwise distinct behavior over a fixed state pool, grouped
/// by root class. The first program to show a behavior represents it.
#[derive(Debug, Clone)]
pub struct Library {
    pool: Arc<StatePool>,
    player: Player,
    entries: Vec<LibraryEntry>,
    by_class: [Vec<usize>; 3],
    index: HashMap<(Nonterminal, u128), Vec<usize>>,
    /// Programs already tried, with whether they were executable.
    seen: HashMap<Ast, bool>,
}

impl Library {
    /// Empty library whose signatures are computed for player 0.
    pub fn new(pool: Arc<StatePool>) -> Result<Library, LibraryError> {
        if pool.is_empty() {
            return Err(LibraryError::EmptyPool);
        }
        Ok(Library {
            pool,
            player: 0,
            entries: Vec::new(),
            by_class: Default::default(),
            index: HashMap::new(),
            seen: HashMap::new(),
        })
    }

    pub fn pool(&self) -> &Arc<StatePool> {
        &self.pool
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[LibraryEntry] {
        &self.entries
    }

    pub fn class_len(&self, class: Nonterminal) -> usize {
        class_slot(class).map_or(0, |i| self.by_class[i].len())
    }

    pub fn class_entries(&self, class: Nonterminal) -> impl Iterator<Item = &LibraryEntry> {
        let ids: &[usize] = class_slot(class).map_or(&[], |i| &self.by_class[i]);
        ids.iter().map(|&i| &self.entries[i])
    }

    pub fn contains_signature(&self, class: Nonterminal, sig: &ActionSignature) -> bool {
        self.index
            .get(&(class, sig.digest()))
            .is_some_and(|ids| ids.iter().any(|&i| self.entries[i].signature == *sig))
    }

    /// Adds `program` if its behavior is new for its root class.
    pub fn try_insert(&mut self, program: &Ast) -> InsertOutcome {
        let class = program.nonterminal();
        let Some(slot) = class_slot(class) else {
            return InsertOutcome::Excluded;
        };
        if let Some(&executable) = self.seen.get(program) {
            return if executable {
                InsertOutcome::Duplicate
            } else {
                InsertOutcome::NonExecutable
            };
        }
        let sig = match signature(program, self.pool.states(), self.player) {
            Ok(sig) => sig,
            Err(_) => {
                self.seen.insert(program.clone(), false);
                return InsertOutcome::NonExecutable;
            }
        };
        self.seen.insert(program.clone(), true);
        if self.contains_signature(class, &sig) {
            return InsertOutcome::Duplicate;
        }
        let id = self.entries.len();
        self.index.entry((class, sig.digest())).or_default().push(id);
        self.by_class[slot].push(id);
        self.entries.push(LibraryEntry {
            class,
            program: program.clone(),
            signature: sig,
        });
        InsertOutcome::Inserted
    }

    /// Offers every S-, C- and B-rooted subtree of `program`, in pre-order.
    pub fn insert_subtrees(&mut self, program: &Ast) -> usize {
        let mut added = 0;
        for sub in program.subtrees() {
            if class_slot(sub.nonterminal()).is_some() && self.try_insert(&sub) == InsertOutcome::Inserted {
                added += 1;
            }
        }
        added
    }

    /// Uniform draw among the entries rooted at `class`.
    pub fn sample_replacement<R: Rng + ?Sized>(
        &self,
        class: Nonterminal,
        rng: &mut R,
    ) -> Result<&Ast, LibraryError> {
        let ids: &[usize] = class_slot(class).map_or(&[], |i| &self.by_class[i]);
        if ids.is_empty() {
            return Err(LibraryError::NoneAvailable(class));
        }
        Ok(&self.entries[ids[rng.gen_range(0..ids.len())]].program)
    }

    /// Versioned text form: a header, then one block per entry.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "format: {FORMAT_VERSION}");
        let _ = writeln!(out, "pool: {:032x}", self.pool.fingerprint());
        let _ = writeln!(out, "entries: {}", self.entries.len());
        for e in &self.entries {
            out.push('\n');
            let _ = writeln!(out, "class: {}", e.class);
            let _ = writeln!(out, "signature: {:032x}", e.signature.digest());
            out.push_str(&pretty(&e.program));
        }
        out
    }

    /// Reads a library written by [`Library::to_text`], recomputing every
    /// signature over `pool` and checking it against the file.
    pub fn from_text(text: &str, pool: Arc<StatePool>) -> Result<Library, LibraryFileError> {
        let bad = |m: String| LibraryFileError::Malformed(m);
        let mut blocks = text.split("\n\n");
        let header = blocks.next().unwrap_or_default();
        let mut lines = header.lines();
        if lines.next() != Some(&format!("format: {FORMAT_VERSION}")) {
            return Err(bad("missing `format: 1` header".into()));
        }
        let fingerprint = lines
            .next()
            .and_then(|l| l.strip_prefix("pool: "))
            .and_then(|h| u128::from_str_radix(h, 16).ok())
            .ok_or_else(|| bad("missing pool fingerprint".into()))?;
        if fingerprint != pool.fingerprint() {
            return Err(LibraryFileError::PoolMismatch);
        }
        let count: usize = lines
            .next()
            .and_then(|l| l.strip_prefix("entries: "))
            .and_then(|n| n.parse().ok())
            .ok_or_else(|| bad("missing entry count".into()))?;
        let mut lib = Library::new(pool).map_err(|_| LibraryFileError::Malformed("empty pool".into()))?;
        for (i, block) in blocks.filter(|b| !b.trim().is_empty()).enumerate() {
            let mut lines = block.lines();
            let class = lines
                .next()
                .and_then(|l| l.strip_prefix("class: "))
                .and_then(Nonterminal::from_name)
                .ok_or_else(|| bad(format!("entry {i}: missing class")))?;
            let digest = lines
                .next()
                .and_then(|l| l.strip_prefix("signature: "))
                .and_then(|h| u128::from_str_radix(h, 16).ok())
                .ok_or_else(|| bad(format!("entry {i}: missing signature")))?;
            let body: Vec<&str> = lines.collect();
            let program = parse_as(&body.join("\n"), class)
                .map_err(|e| bad(format!("entry {i}: {e}")))?;
            match lib.try_insert(&program) {
                InsertOutcome::Inserted => {}
                other => return Err(LibraryFileError::Entry(i, format!("{other:?}"))),
            }
            if lib.entries[lib.entries.len() - 1].signature.digest() != digest {
                return Err(LibraryFileError::Entry(i, "signature differs".into()));
            }
        }
        if lib.len() != count {
            return Err(bad(format!("expected {count} entries, found {}", lib.len())));
        }
        Ok(lib)
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum LibraryFileError {
    #[error("malformed library file: {0}")]
    Malformed(String),
    #[error("library was built on a different state pool")]
    PoolMismatch,
    #[error("entry {0} does not verify: {1}")]
    Entry(usize, String),
}

/// Builds a library from searched programs. Every S-, C- and B-rooted subtree
/// of every program, in corpus then pre-order, is kept iff its behavior over
/// the pool is new.
pub fn build_library(corpus: &[Ast], pool: Arc<StatePool>) -> Result<Library, LibraryError> {
    let mut lib = Library::new(pool)?;
    for program in corpus {
        lib.insert_subtrees(program);
    }
    Ok(lib)
}
