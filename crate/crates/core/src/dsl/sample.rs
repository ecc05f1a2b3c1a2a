use rand::Rng;
use thiserror::Error;

use super::ast::{Ast, Node};
use super::grammar::{production, Grammar, Nonterminal, Symbol};

pub const DEFAULT_MAX_SIZE: usize = 100;
pub const DEFAULT_MAX_REJECTIONS: usize = 10_000;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SampleError {
    #[error("no derivation within size bounds after {0} attempts")]
    BudgetExhausted(usize),
    #[error("invalid size bounds: min {min}, max {max}")]
    InvalidBounds { min: usize, max: usize },
    #[error("grammar has no productions for {0}")]
    NoProductions(Nonterminal),
    #[error("program has no nonterminal nodes")]
    NothingToRegrow,
}

/// Rejection counts from one sampling call.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SampleStats {
    pub attempts: usize,
    pub too_small: usize,
    pub too_large: usize,
}

/// One uniform random derivation of `nt`, abandoned as soon as it would
/// exceed `max_size` nodes.
pub fn derive<R: Rng + ?Sized>(
    grammar: &Grammar,
    nt: Nonterminal,
    max_size: usize,
    rng: &mut R,
) -> Result<Option<Node>, SampleError> {
    let mut remaining = max_size;
    expand(grammar, nt, &mut remaining, rng)
}

fn expand<R: Rng + ?Sized>(
    grammar: &Grammar,
    nt: Nonterminal,
    remaining: &mut usize,
    rng: &mut R,
) -> Result<Option<Node>, SampleError> {
    if *remaining == 0 {
        return Ok(None);
    }
    *remaining -= 1;
    let rules = grammar.rules_for(nt);
    if rules.is_empty() {
        return Err(SampleError::NoProductions(nt));
    }
    let rule = rules[rng.gen_range(0..rules.len())];
    let prod = production(rule);
    let mut children = Vec::with_capacity(prod.rhs.len());
    for sym in prod.rhs {
        match sym {
            Symbol::Terminal(t) => {
                if *remaining == 0 {
                    return Ok(None);
                }
                *remaining -= 1;
                children.push(Node::Leaf(t));
            }
            Symbol::Nonterminal(child) => match expand(grammar, *child, remaining, rng)? {
                Some(node) => children.push(node),
                None => return Ok(None),
            },
        }
    }
    Ok(Some(Node::Rule { rule, children }))
}

/// Uniform derivation from the grammar's start symbol with
/// `min_size <= size <= max_size`, resampling from scratch on violation.
pub fn sample_program<R: Rng + ?Sized>(
    grammar: &Grammar,
    min_size: usize,
    max_size: usize,
    rng: &mut R,
) -> Result<Ast, SampleError> {
    sample_program_with_stats(grammar, min_size, max_size, DEFAULT_MAX_REJECTIONS, rng)
        .map(|(ast, _)| ast)
}

pub fn sample_program_with_stats<R: Rng + ?Sized>(
    grammar: &Grammar,
    min_size: usize,
    max_size: usize,
    max_rejections: usize,
    rng: &mut R,
) -> Result<(Ast, SampleStats), SampleError> {
    if min_size < 1 || max_size < min_size {
        return Err(SampleError::InvalidBounds {
            min: min_size,
            max: max_size,
        });
    }
    let mut stats = SampleStats::default();
    while stats.attempts < max_rejections {
        stats.attempts += 1;
        match derive(grammar, grammar.start(), max_size, rng)? {
            None => stats.too_large += 1,
            Some(node) if node.size() < min_size => stats.too_small += 1,
            Some(node) => return Ok((Ast::new(node), stats)),
        }
    }
    Err(SampleError::BudgetExhausted(stats.attempts))
}

/// Picks a nonterminal node uniformly and replaces its subtree with a fresh
/// derivation of the same symbol, keeping the program within `max_size`.
pub fn regrow_subtree<R: Rng + ?Sized>(
    grammar: &Grammar,
    program: &Ast,
    rng: &mut R,
    max_size: usize,
) -> Result<Ast, SampleError> {
    let nodes = program.nonterminal_nodes();
    if nodes.is_empty() {
        return Err(SampleError::NothingToRegrow);
    }
    let (index, _) = nodes[rng.gen_range(0..nodes.len())];
    regrow_at(grammar, program, index, rng, max_size)
}

/// Regrows the subtree at a given pre-order index.
pub fn regrow_at<R: Rng + ?Sized>(
    grammar: &Grammar,
    program: &Ast,
    index: usize,
    rng: &mut R,
    max_size: usize,
) -> Result<Ast, SampleError> {
    let old = program.node_at(index).ok_or(SampleError::NothingToRegrow)?;
    let nt = old.nonterminal().ok_or(SampleError::NothingToRegrow)?;
    let rest = program.size() - old.size();
    if rest >= max_size {
        return Err(SampleError::InvalidBounds {
            min: rest + 1,
            max: max_size,
        });
    }
    for _ in 0..DEFAULT_MAX_REJECTIONS {
        if let Some(node) = derive(grammar, nt, max_size - rest, rng)? {
            return Ok(program.replaced(index, node));
        }
    }
    Err(SampleError::BudgetExhausted(DEFAULT_MAX_REJECTIONS))
}
