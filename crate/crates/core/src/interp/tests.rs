use std::sync::Arc;

use super::*;
use crate::dsl::{parse, parse_as, Nonterminal};
use crate::engine::{
    load_shipped, ActionAssignment, GameState, Pos, StatsTable, UnitCommand, UnitKind,
};

fn nwr() -> GameState {
    GameState::initial(
        Arc::new(load_shipped("nwr_9x8").unwrap()),
        Arc::new(StatsTable::default()),
    )
}

fn run(text: &str, state: &GameState) -> ActionAssignment {
    interpret(&compile(&parse(text).unwrap()).unwrap(), state, 0).unwrap()
}

fn cond(text: &str) -> Cond {
    compile_condition(&parse_as(text, Nonterminal::B).unwrap()).unwrap()
}

#[test]
fn harvest_loop_sends_the_worker_to_the_nearest_pile() {
    // Player 0: Base (id 0) at 1,1 and Worker (id 1) at 1,2. Piles at 0,0 and
    // 4,2 are both 3 cells away; the first listed wins the tie.
    let s = nwr();
    let a = run("for(Unit u) u.harvest(1)", &s);
    assert_eq!(a.get(1), Some(UnitCommand::Harvest(Pos::new(0, 0))));
    assert_eq!(a.get(0), Some(UnitCommand::Idle));
    assert_eq!(a.len(), 2);
}

#[test]
fn empty_program_idles_everyone() {
    let s = nwr();
    let a = run("empty", &s);
    assert!(a.iter().all(|(_, c)| c == UnitCommand::Idle));
    assert_eq!(a.len(), 2);
}

#[test]
fn earlier_loops_take_priority() {
    let s = nwr();
    let a = run("for(Unit u) u.attack(Closest) ; for(Unit u) u.idle()", &s);
    // The Worker (id 1) pursues the enemy Worker at 7,5.
    assert_eq!(a.get(1), Some(UnitCommand::MoveToward(Pos::new(7, 5))));
    assert_eq!(a.get(0), Some(UnitCommand::Idle));
}

#[test]
fn start_state_conditions() {
    let s = nwr();
    assert!(eval_bool(&cond("u.HasNumberOfUnits(Worker,1)"), &s, 0, None));
    assert!(!eval_bool(&cond("u.HasNumberOfUnits(Worker,2)"), &s, 0, None));
    assert!(eval_bool(&cond("u.HasLessNumberOfUnits(Barracks,25)"), &s, 0, None));
    assert!(!eval_bool(&cond("u.CanAttack()"), &s, 0, Some(0)));
    assert!(eval_bool(&cond("u.CanAttack()"), &s, 0, Some(1)));
    assert!(!eval_bool(&cond("u.CanAttack()"), &s, 0, None));
    assert!(eval_bool(&cond("u.CanHarvest()"), &s, 0, Some(1)));
    assert!(eval_bool(&cond("u.HasUnitThatKillsInOneAttack()"), &s, 0, None));
    assert!(!eval_bool(&cond("u.HasUnitWithinDistFromOp(5)"), &s, 0, None));
    // Manhattan distance between the two Workers is 6 + 3.
    assert!(eval_bool(&cond("u.HasUnitWithinDistFromOp(9)"), &s, 0, None));
    assert!(!eval_bool(&cond("u.HasUnitInOpponentRange()"), &s, 0, None));
}

#[test]
fn base_trains_toward_the_enemy() {
    // Base at 1,1; the enemy Base at 7,6 is reached fastest by going Right
    // (first of the tied Right and Down).
    let s = nwr();
    let a = run("u.train(Worker,EnemyDir,3)", &s);
    assert_eq!(a.get(0), Some(UnitCommand::Produce(UnitKind::Worker, crate::engine::Direction::Right)));
    // Count target already met.
    let a = run("u.train(Worker,Up,1)", &s);
    assert_eq!(a.get(0), Some(UnitCommand::Idle));
    // A Barracks costs exactly the stockpile of 5; Up is the Base's cell so
    // the Worker falls back to Right.
    let a = run("u.build(Barracks,Up,1)", &s);
    assert_eq!(a.get(1), Some(UnitCommand::Produce(UnitKind::Barracks, crate::engine::Direction::Right)));
    // A Base costs 10.
    let a = run("u.build(Base,Up,2)", &s);
    assert_eq!(a.get(1), Some(UnitCommand::Idle));
}

#[test]
fn equivalent_programs_share_signatures() {
    let s = nwr();
    let mut pool = vec![s.clone()];
    let mut state = s;
    let worker_rush = compile(&parse(include_str!("../../scripts/worker_rush.mrl")).unwrap()).unwrap();
    for _ in 0..300 {
        let a = [interpret(&worker_rush, &state, 0).unwrap(), interpret(&worker_rush, &state, 1).unwrap()];
        state.step(&a);
        pool.push(state.clone());
    }
    let sig = |t: &str| signature(&parse(t).unwrap(), &pool, 0).unwrap();
    assert_eq!(sig("if(u.IsBuilder()) then u.idle() else u.idle()"), sig("u.idle()"));
    assert_eq!(sig("if(u.HasNumberOfUnits(Base,100)) then u.train(Worker,Up,5)"), sig("empty"));
    assert_ne!(sig("u.harvest(1)"), sig("empty"));
    let c = signature(&parse_as("u.idle()", Nonterminal::C).unwrap(), &pool, 0).unwrap();
    assert_eq!(c, sig("u.idle()"));
    assert_eq!(c.len(), pool.len());
}

#[test]
fn runaway_nesting_is_not_executable() {
    let s = nwr();
    let mut text = "u.idle()".to_string();
    for _ in 0..18 {
        text = format!("for(Unit u) {{ {text} }}");
    }
    let program = compile(&parse(&text).unwrap()).unwrap();
    assert!(interpret(&program, &s, 0).is_err());
    assert!(matches!(
        signature(&parse(&text).unwrap(), std::slice::from_ref(&s), 0),
        Err(SignatureError::NonExecutable(0))
    ));
    assert!(interpret_with_budget(&compile(&parse("u.idle()").unwrap()).unwrap(), &s, 0, 2).is_err());
}

#[test]
fn interpretation_is_pure() {
    let s = nwr();
    let before = s.clone();
    let a = run("for(Unit u) { u.harvest(5) u.train(Worker,Down,4) u.moveAway() }", &s);
    let b = run("for(Unit u) { u.harvest(5) u.train(Worker,Down,4) u.moveAway() }", &s);
    assert_eq!(a, b);
    assert_eq!(s, before);
}
