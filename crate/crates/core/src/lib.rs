//! Program synthesis for grid RTS policies over syntax-based and
//! library-induced semantic search spaces.

pub mod config;
pub mod engine;
pub mod dsl;
pub mod interp;
pub mod library;
pub mod space;
pub mod search;
pub mod selfplay;
pub mod bench;

#[cfg(test)]
mod testkit;
