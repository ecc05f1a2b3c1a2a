use std::sync::Arc;

use thiserror::Error;

use super::map::GameMap;
use super::state::GameState;
use super::stats::StatsTable;
use super::unit::{opponent, ActionAssignment, Player};

/// Raised by a policy that cannot produce an assignment for a state.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("policy fault: {message}")]
pub struct PolicyFault {
    pub message: String,
}

pub trait Policy {
    /// Commands for the idle units of `player`.
    fn act(&mut self, state: &GameState, player: Player) -> Result<ActionAssignment, PolicyFault>;

    /// True when `act` depends only on the state's configuration and not on
    /// the clock. Two stationary policies facing a frozen board will keep it
    /// frozen, which lets matches skip to their tick limit.
    fn is_stationary(&self) -> bool {
        false
    }
}

/// Never issues a command.
#[derive(Debug, Clone, Copy, Default)]
pub struct NullPolicy;

impl Policy for NullPolicy {
    fn act(&mut self, _: &GameState, _: Player) -> Result<ActionAssignment, PolicyFault> {
        Ok(ActionAssignment::new())
    }

    fn is_stationary(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Win(Player),
    Draw,
}

/// The two policies handed to [`play_match`], independent of where they start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    First,
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Win,
    Draw,
    Loss,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchResult {
    pub outcome: Outcome,
    pub ticks_played: u32,
    /// Cost-weighted live units plus stockpile, per player slot.
    pub score: [i64; 2],
    /// Player slot occupied by the first policy.
    pub first_slot: Player,
    /// Which player slots faulted.
    pub faults: [bool; 2],
}

impl MatchResult {
    pub fn slot_of(&self, side: Side) -> Player {
        match side {
            Side::First => self.first_slot,
            Side::Second => opponent(self.first_slot),
        }
    }

    pub fn verdict(&self, side: Side) -> Verdict {
        match self.outcome {
            Outcome::Draw => Verdict::Draw,
            Outcome::Win(p) if p == self.slot_of(side) => Verdict::Win,
            Outcome::Win(_) => Verdict::Loss,
        }
    }

    /// Score of `side` minus the opponent's.
    pub fn margin(&self, side: Side) -> i64 {
        let p = self.slot_of(side);
        self.score[p] - self.score[opponent(p)]
    }
}

#[derive(Debug, Clone, Copy, Error, PartialEq, Eq)]
#[error("winning rate of an empty result list")]
pub struct EmptyResults;

/// Victories plus half the draws, as a percentage of all matches.
pub fn winning_rate(results: &[MatchResult], side: Side) -> Result<f64, EmptyResults> {
    let verdicts: Vec<Verdict> = results.iter().map(|r| r.verdict(side)).collect();
    winning_rate_of(&verdicts)
}

pub fn winning_rate_of(verdicts: &[Verdict]) -> Result<f64, EmptyResults> {
    if verdicts.is_empty() {
        return Err(EmptyResults);
    }
    let wins = verdicts.iter().filter(|v| **v == Verdict::Win).count() as f64;
    let draws = verdicts.iter().filter(|v| **v == Verdict::Draw).count() as f64;
    Ok((wins + draws / 2.0) / verdicts.len() as f64 * 100.0)
}

/// Everything fixed about a match except the policies.
#[derive(Debug, Clone)]
pub struct MatchSetup {
    pub map: Arc<GameMap>,
    pub stats: Arc<StatsTable>,
    pub rng_stream_id: u64,
}

impl MatchSetup {
    pub fn new(map: Arc<GameMap>, stats: Arc<StatsTable>) -> MatchSetup {
        MatchSetup {
            map,
            stats,
            rng_stream_id: 0,
        }
    }

    pub fn initial_state(&self) -> GameState {
        let mut s = GameState::initial(self.map.clone(), self.stats.clone());
        s.rng_stream_id = self.rng_stream_id;
        s
    }
}

/// Per-tick hook: sees each state and the assignments chosen for it.
/// Returning `false` abandons the match.
pub type Observer<'a> = &'a mut dyn FnMut(&GameState, &[ActionAssignment; 2]) -> bool;

/// Runs a match between the policies in player slots 0 and 1. Returns `None`
/// only when the observer abandons it.
pub fn run_match(
    setup: &MatchSetup,
    players: [&mut dyn Policy; 2],
    mut observer: Option<Observer<'_>>,
) -> Option<MatchResult> {
    let [p0, p1] = players;
    let mut policies: [&mut dyn Policy; 2] = [p0, p1];
    let stationary = policies.iter().all(|p| p.is_stationary());
    let max_ticks = setup.map.max_ticks;
    let mut state = setup.initial_state();
    let finish = |state: &GameState, outcome: Outcome, ticks: u32, faults: [bool; 2]| MatchResult {
        outcome,
        ticks_played: ticks,
        score: [state.score(0), state.score(1)],
        first_slot: 0,
        faults,
    };
    loop {
        if let Some(outcome) = elimination(&state) {
            return Some(finish(&state, outcome, state.tick, [false; 2]));
        }
        if state.tick >= max_ticks {
            return Some(finish(&state, Outcome::Draw, state.tick, [false; 2]));
        }
        let mut assignments = [ActionAssignment::new(), ActionAssignment::new()];
        let mut faults = [false; 2];
        for (player, policy) in policies.iter_mut().enumerate() {
            if !state.units_of(player).any(|u| u.is_idle()) {
                continue;
            }
            match policy.act(&state, player) {
                Ok(a) => assignments[player] = a,
                Err(_) => faults[player] = true,
            }
        }
        match faults {
            [true, true] => return Some(finish(&state, Outcome::Draw, state.tick, faults)),
            [true, false] => return Some(finish(&state, Outcome::Win(1), state.tick, faults)),
            [false, true] => return Some(finish(&state, Outcome::Win(0), state.tick, faults)),
            _ => {}
        }
        if let Some(obs) = observer.as_mut() {
            if !obs(&state, &assignments) {
                return None;
            }
        }
        let report = state.step(&assignments);
        if stationary && !report.changed && report.deaths == 0 {
            // Nothing moved and nothing will: the board is a fixed point.
            return Some(finish(&state, Outcome::Draw, max_ticks, [false; 2]));
        }
    }
}

fn elimination(state: &GameState) -> Option<Outcome> {
    match (state.unit_count(0) > 0, state.unit_count(1) > 0) {
        (true, true) => None,
        (true, false) => Some(Outcome::Win(0)),
        (false, true) => Some(Outcome::Win(1)),
        (false, false) => Some(Outcome::Draw),
    }
}

/// The states a match visited, in order.
pub type StateLog = Vec<GameState>;

/// Plays `first` from player slot `start_slot` against `second`.
pub fn play_match(
    first: &mut dyn Policy,
    second: &mut dyn Policy,
    setup: &MatchSetup,
    start_slot: Player,
) -> MatchResult {
    play_match_observed(first, second, setup, start_slot, None)
}

/// Like [`play_match`], also returning every state the match passed through.
pub fn play_match_logged(
    first: &mut dyn Policy,
    second: &mut dyn Policy,
    setup: &MatchSetup,
    start_slot: Player,
) -> (MatchResult, StateLog) {
    let mut log = Vec::new();
    let mut record = |s: &GameState, _: &[ActionAssignment; 2]| {
        log.push(s.clone());
        true
    };
    let result = play_match_observed(first, second, setup, start_slot, Some(&mut record));
    (result, log)
}

/// [`play_match`] with an observer called before every tick. The observer
/// must not abandon the match.
pub fn play_match_observed(
    first: &mut dyn Policy,
    second: &mut dyn Policy,
    setup: &MatchSetup,
    start_slot: Player,
    observer: Option<Observer<'_>>,
) -> MatchResult {
    let players: [&mut dyn Policy; 2] = if start_slot == 0 {
        [first, second]
    } else {
        [second, first]
    };
    let mut result = run_match(setup, players, observer).expect("match not abandoned");
    result.first_slot = start_slot;
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::map::load_shipped;

    fn result(outcome: Outcome) -> MatchResult {
        MatchResult {
            outcome,
            ticks_played: 1,
            score: [0, 0],
            first_slot: 0,
            faults: [false; 2],
        }
    }

    #[test]
    fn winning_rate_counts_half_draws() {
        let mut results = vec![result(Outcome::Win(0)); 2];
        results.push(result(Outcome::Draw));
        results.extend(vec![result(Outcome::Win(1)); 7]);
        assert_eq!(winning_rate(&results, Side::First).unwrap(), 25.0);
        assert_eq!(winning_rate(&results, Side::Second).unwrap(), 75.0);
        assert_eq!(winning_rate(&vec![result(Outcome::Draw); 10], Side::First).unwrap(), 50.0);
        assert_eq!(winning_rate(&vec![result(Outcome::Win(0)); 10], Side::First).unwrap(), 100.0);
        assert_eq!(winning_rate(&[], Side::First), Err(EmptyResults));
    }

    #[test]
    fn idle_match_is_a_draw_at_the_tick_limit() {
        let map = Arc::new(load_shipped("nwr_9x8").unwrap());
        let setup = MatchSetup::new(map.clone(), Arc::new(StatsTable::default()));
        for slot in [0, 1] {
            let r = play_match(&mut NullPolicy, &mut NullPolicy, &setup, slot);
            assert_eq!(r.outcome, Outcome::Draw);
            assert_eq!(r.ticks_played, map.max_ticks);
            assert_eq!(r.score[0], r.score[1]);
        }
    }

    struct Faulty;

    impl Policy for Faulty {
        fn act(&mut self, _: &GameState, _: Player) -> Result<ActionAssignment, PolicyFault> {
            Err(PolicyFault {
                message: "boom".into(),
            })
        }
    }

    #[test]
    fn faulting_player_loses() {
        let map = Arc::new(load_shipped("nwr_9x8").unwrap());
        let setup = MatchSetup::new(map, Arc::new(StatsTable::default()));
        let r = play_match(&mut Faulty, &mut NullPolicy, &setup, 1);
        assert_eq!(r.verdict(Side::First), Verdict::Loss);
        assert_eq!(r.outcome, Outcome::Win(0));
        assert_eq!(r.faults, [false, true]);
        let r = play_match(&mut Faulty, &mut Faulty, &setup, 0);
        assert_eq!(r.outcome, Outcome::Draw);
    }
}
