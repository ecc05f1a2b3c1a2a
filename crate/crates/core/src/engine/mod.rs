//! Deterministic two-player grid RTS simulator.

pub mod map;
pub mod matchplay;
pub mod random;
pub mod state;
pub mod stats;
pub mod unit;

pub use map::{load_shipped, GameMap, MapError, StartUnit, SHIPPED_MAPS};
pub use matchplay::{
    play_match, play_match_logged, play_match_observed, run_match, winning_rate, winning_rate_of, EmptyResults,
    MatchResult, MatchSetup, NullPolicy, Observer, Outcome, Policy, PolicyFault, Side, StateLog, Verdict,
};
pub use random::RandomPolicy;
pub use state::{GameState, PathScratch, Pile, TickReport};
pub use stats::{StatsTable, UnitStats};
pub use unit::{
    opponent, Action, ActionAssignment, Busy, Direction, Order, Player, Pos, Unit, UnitCommand,
    UnitId, UnitKind,
};
