//! The policy language: grammar, derivation trees, sampling, and syntax.

pub mod ast;
pub mod enumerate;
pub mod grammar;
pub mod sample;
pub mod syntax;

pub use ast::{Ast, Node};
pub use enumerate::enumerate_programs;
pub use grammar::{Grammar, GrammarError, Nonterminal, Production, RuleId, Symbol};
pub use sample::{
    derive, regrow_at, regrow_subtree, sample_program, sample_program_with_stats, SampleError,
    SampleStats, DEFAULT_MAX_REJECTIONS, DEFAULT_MAX_SIZE,
};
pub use syntax::{parse, parse_as, pretty, ParseError};
