//! Executes programs against game states and summarizes their behavior.

pub mod exec;
pub mod program;
pub mod signature;

pub use exec::{
    eval_bool, interpret, interpret_with_budget, ExecContext, ProgramPolicy, StepBudgetExceeded,
    DEFAULT_STEP_BUDGET,
};
pub use program::{compile, compile_condition, Command, CompileError, Cond, Criterion, Program, Stmt};
pub use signature::{assignment_digest, behaviors, signature, ActionSignature, Behavior, SignatureError};

use crate::dsl::Ast;

/// Compiles an S- or C-rooted program into a match policy.
pub fn policy(program: &Ast) -> Result<ProgramPolicy, CompileError> {
    compile(program).map(ProgramPolicy::new)
}

#[cfg(test)]
mod tests;
