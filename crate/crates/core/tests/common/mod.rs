#![allow(dead_code)]

use std::collections::HashSet;
use std::sync::Arc;

use liss::engine::{
    load_shipped, run_match, ActionAssignment, GameState, MatchResult, MatchSetup, Outcome,
    Policy, StatsTable, UnitKind,
};

pub fn setup(stem: &str) -> MatchSetup {
    MatchSetup::new(
        Arc::new(load_shipped(stem).unwrap()),
        Arc::new(StatsTable::default()),
    )
}

pub fn script(name: &str) -> String {
    std::fs::read_to_string(format!("{}/scripts/{name}.mrl", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

fn check_state(s: &GameState) -> Result<(), String> {
    let map = s.map();
    let mut cells = HashSet::new();
    for u in &s.units {
        if !cells.insert(u.pos) {
            return Err(format!("tick {}: two units on {}", s.tick, u.pos));
        }
        if !map.in_bounds(u.pos) || map.is_wall(u.pos) || s.pile_at(u.pos).is_some() {
            return Err(format!("tick {}: unit {} on a blocked cell", s.tick, u.id));
        }
        if u.hp <= 0 || u.hp > s.stats().get(u.kind).hit_points {
            return Err(format!("tick {}: unit {} has hp {}", s.tick, u.id, u.hp));
        }
        if u.carrying > 0 && u.kind != UnitKind::Worker {
            return Err(format!("tick {}: non-worker {} carries", s.tick, u.id));
        }
    }
    if s.resources.iter().any(|r| *r < 0) {
        return Err(format!("tick {}: negative stockpile", s.tick));
    }
    Ok(())
}

/// Steps a match tick by tick checking the engine invariants, then replays
/// it through the match runner and checks the outcome agrees.
pub fn checked_match(
    setup: &MatchSetup,
    make: &mut dyn FnMut() -> [Box<dyn Policy>; 2],
) -> Result<MatchResult, String> {
    let mut policies = make();
    let mut state = setup.initial_state();
    check_state(&state)?;
    let max = setup.map.max_ticks;
    while state.unit_count(0) > 0 && state.unit_count(1) > 0 && state.tick < max {
        let mut a = [ActionAssignment::new(), ActionAssignment::new()];
        for p in 0..2 {
            if state.units_of(p).any(|u| u.is_idle()) {
                a[p] = policies[p].act(&state, p).map_err(|e| e.to_string())?;
            }
        }
        let before = state.total_resource_value();
        let replay = state.apply_tick(&a);
        let report = state.step(&a);
        if replay != state {
            return Err(format!("tick {}: transition not deterministic", state.tick));
        }
        check_state(&state)?;
        let after = state.total_resource_value();
        if after > before || (after < before && report.deaths == 0) {
            return Err(format!("tick {}: resources {before} -> {after} without a death", state.tick));
        }
    }
    if state.tick > max {
        return Err("match exceeded max_ticks".into());
    }
    let [mut p0, mut p1] = make();
    let result = run_match(setup, [p0.as_mut(), p1.as_mut()], None).unwrap();
    let expected = match (state.unit_count(0) > 0, state.unit_count(1) > 0) {
        (true, false) => Outcome::Win(0),
        (false, true) => Outcome::Win(1),
        _ => Outcome::Draw,
    };
    if result.outcome != expected || result.ticks_played != state.tick {
        return Err(format!(
            "runner disagrees: {:?} at {} vs {:?} at {}",
            result.outcome, result.ticks_played, expected, state.tick
        ));
    }
    if let Outcome::Win(p) = result.outcome {
        if state.unit_count(1 - p) != 0 {
            return Err("winner's opponent still has units".into());
        }
    }
    Ok(result)
}

/// Programs sampled as the syntax space does, each checked for parse/pretty
/// round trips, size bounds and neighbor validity.
pub fn grammar_properties(count: usize, seed: u64) -> Vec<String> {
    use liss::dsl::{parse, pretty};
    use liss::space::{edit_site, SearchSpace, SyntaxSpace};
    use rand::SeedableRng;

    let space = SyntaxSpace::default();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    for i in 0..count {
        let p = match space.initial(&mut rng) {
            Ok(p) => p,
            Err(e) => {
                failures.push(format!("program {i}: {e}"));
                continue;
            }
        };
        let text = pretty(&p);
        match parse(&text) {
            Ok(q) if q == p => {}
            Ok(_) => failures.push(format!("program {i}: round trip changed\n{text}")),
            Err(e) => failures.push(format!("program {i}: {e}\n{text}")),
        }
        if p.size() < space.z || p.size() > space.cap || !p.is_complete() {
            failures.push(format!("program {i}: size {} outside [{}, {}]", p.size(), space.z, space.cap));
        }
        let n = match space.neighbor(&p, &mut rng) {
            Ok(n) => n,
            Err(e) => {
                failures.push(format!("program {i}: neighbor failed: {e}"));
                continue;
            }
        };
        if !n.is_complete() || n.size() > space.cap || n.nonterminal() != p.nonterminal() {
            failures.push(format!("program {i}: invalid neighbor of size {}", n.size()));
        }
        if parse(&pretty(&n)).ok().as_ref() != Some(&n) {
            failures.push(format!("program {i}: neighbor does not round trip"));
        }
        if let Some((index, _)) = edit_site(&p, &n) {
            let (a, b) = (p.node_at(index).unwrap(), n.node_at(index).unwrap());
            if a.nonterminal() != b.nonterminal() {
                failures.push(format!("program {i}: edit changes the symbol at node {index}"));
            }
        }
    }
    failures
}

/// State pool from the shipped rush scripts on NoWhereToRun.
pub fn rush_pool() -> Arc<liss::library::StatePool> {
    use liss::dsl::parse;
    use liss::engine::play_match_logged;
    use liss::interp::policy;
    use rand::SeedableRng;

    let setup = setup("nwr_9x8");
    let rush = parse(&script("worker_rush")).unwrap();
    let light = parse(&script("light_rush")).unwrap();
    let logs: Vec<_> = (0..2)
        .map(|slot| {
            let mut a = policy(&rush).unwrap();
            let mut b = policy(&light).unwrap();
            play_match_logged(&mut a, &mut b, &setup, slot).1
        })
        .collect();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    Arc::new(liss::library::harvest_pool(&logs, 400, &mut rng))
}

/// Assignments a statement program issues on each state.
pub fn actions(program: &liss::dsl::Ast, states: &[GameState]) -> Option<Vec<String>> {
    observed(program, states)
}

/// Behavior of a program on every pool state through the policy and
/// condition entry points, or `None` when it faults.
fn observed(program: &liss::dsl::Ast, states: &[GameState]) -> Option<Vec<String>> {
    use liss::dsl::Nonterminal;
    use liss::interp::{compile_condition, eval_bool, policy};

    if program.nonterminal() == Nonterminal::B {
        let cond = compile_condition(program).ok()?;
        return Some(states.iter().map(|s| eval_bool(&cond, s, 0, None).to_string()).collect());
    }
    let p = policy(program).ok()?;
    states
        .iter()
        .map(|s| p.clone().act(s, 0).ok().map(|a| format!("{a:?}")))
        .collect()
}

/// Builds the library of every program up to `max_size` nodes and compares
/// it with grouping every S-, C- and B-rooted subtree by its behavior
/// vector, first occurrence representing its group. Returns the entry
/// count and the mismatches.
pub fn library_oracle(max_size: usize) -> (usize, Vec<String>) {
    use liss::dsl::{enumerate_programs, Grammar, Nonterminal};
    use liss::library::build_library;

    let pool = rush_pool();
    let corpus = enumerate_programs(&Grammar::full(), max_size);
    let library = build_library(&corpus, pool.clone()).unwrap();
    let mut seen = HashSet::new();
    let mut groups: Vec<(Nonterminal, Vec<String>)> = Vec::new();
    let mut expected = Vec::new();
    for program in &corpus {
        for sub in program.subtrees() {
            let class = sub.nonterminal();
            if !matches!(class, Nonterminal::S | Nonterminal::C | Nonterminal::B) || !seen.insert(sub.clone()) {
                continue;
            }
            let Some(behavior) = observed(&sub, pool.states()) else {
                continue;
            };
            if !groups.iter().any(|(c, b)| *c == class && *b == behavior) {
                groups.push((class, behavior));
                expected.push(sub);
            }
        }
    }
    let actual: Vec<_> = library.entries().iter().map(|e| e.program.clone()).collect();
    let mut mismatches = Vec::new();
    if actual.len() != expected.len() {
        mismatches.push(format!("{} entries, oracle has {}", actual.len(), expected.len()));
    }
    for (i, (a, e)) in actual.iter().zip(&expected).enumerate() {
        if a != e {
            mismatches.push(format!("entry {i}: `{a}` vs oracle `{e}`"));
        }
    }
    (actual.len(), mismatches)
}

/// Matches between random policies on the small shipped maps, checked
/// tick by tick.
pub fn random_matches(count: u64) -> Vec<String> {
    use liss::engine::RandomPolicy;

    let setups = [setup("nwr_9x8"), setup("lmo_16x8"), setup("ins_15x14")];
    let mut failures = Vec::new();
    for i in 0..count {
        let s = &setups[(i % 3) as usize];
        let r = checked_match(s, &mut || {
            [
                Box::new(RandomPolicy::new(2 * i)) as Box<dyn Policy>,
                Box::new(RandomPolicy::new(2 * i + 1)),
            ]
        });
        if let Err(e) = r {
            failures.push(format!("match {i}: {e}"));
        }
    }
    failures
}
