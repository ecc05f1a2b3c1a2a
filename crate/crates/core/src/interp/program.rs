use thiserror::Error;

use crate::dsl::grammar::{
    bool_rule, command_rule, literal_index, production, Nonterminal, COMMAND, DIRECTIONS, EMPTY,
    FOR, IF, IF_ELSE, NUMBERS, SEQ,
};
use crate::dsl::{Ast, Node};
use crate::engine::{Direction, UnitKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetDir {
    /// Toward the nearest enemy Base.
    Enemy,
    Fixed(Direction),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criterion {
    Strongest,
    Weakest,
    Closest,
    Farthest,
    LessHealthy,
    MostHealthy,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Team {
    Ally,
    Enemy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cond {
    HasUnits(UnitKind, i32),
    OpponentHasUnits(UnitKind, i32),
    HasFewerUnits(UnitKind, i32),
    UnitsAttacking(i32),
    WithinDistance(i32),
    WorkersHarvesting(i32),
    IsType(UnitKind),
    IsBuilder,
    CanAttack,
    KillsInOneAttack,
    OpponentKillsInOneAttack,
    InOpponentRange,
    OpponentInRange,
    CanHarvest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Build(UnitKind, TargetDir, i32),
    Train(UnitKind, TargetDir, i32),
    MoveToUnit(Team, Criterion),
    Attack(Criterion),
    Harvest(i32),
    Idle,
    MoveAway,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stmt {
    Seq(Box<Stmt>, Box<Stmt>),
    For(Box<Stmt>),
    If(Cond, Box<Stmt>, Option<Box<Stmt>>),
    Command(Command),
    Empty,
}

/// An executable form of an S- or C-rooted program.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub body: Stmt,
    /// True when some command picks targets at random.
    pub uses_random: bool,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum CompileError {
    #[error("cannot execute a program rooted at {0}")]
    UnsupportedRoot(Nonterminal),
    #[error("incomplete derivation")]
    Incomplete,
}

pub fn compile(ast: &Ast) -> Result<Program, CompileError> {
    let body = match ast.nonterminal() {
        Nonterminal::S => stmt(ast.root())?,
        Nonterminal::C => Stmt::Command(command(ast.root())?),
        other => return Err(CompileError::UnsupportedRoot(other)),
    };
    let uses_random = mentions_random(&body);
    Ok(Program { body, uses_random })
}

pub fn compile_condition(ast: &Ast) -> Result<Cond, CompileError> {
    match ast.nonterminal() {
        Nonterminal::B => cond(ast.root()),
        other => Err(CompileError::UnsupportedRoot(other)),
    }
}

fn mentions_random(s: &Stmt) -> bool {
    match s {
        Stmt::Seq(a, b) => mentions_random(a) || mentions_random(b),
        Stmt::For(b) => mentions_random(b),
        Stmt::If(_, a, b) => mentions_random(a) || b.as_deref().is_some_and(mentions_random),
        Stmt::Command(Command::MoveToUnit(_, Criterion::Random) | Command::Attack(Criterion::Random)) => true,
        Stmt::Command(_) | Stmt::Empty => false,
    }
}

fn arg(node: &Node, i: usize) -> Result<&Node, CompileError> {
    node.args().nth(i).ok_or(CompileError::Incomplete)
}

fn stmt(node: &Node) -> Result<Stmt, CompileError> {
    Ok(match node.rule().ok_or(CompileError::Incomplete)? {
        SEQ => Stmt::Seq(Box::new(stmt(arg(node, 0)?)?), Box::new(stmt(arg(node, 1)?)?)),
        FOR => Stmt::For(Box::new(stmt(arg(node, 0)?)?)),
        IF => Stmt::If(cond(arg(node, 0)?)?, Box::new(stmt(arg(node, 1)?)?), None),
        IF_ELSE => Stmt::If(
            cond(arg(node, 0)?)?,
            Box::new(stmt(arg(node, 1)?)?),
            Some(Box::new(stmt(arg(node, 2)?)?)),
        ),
        COMMAND => Stmt::Command(command(arg(node, 0)?)?),
        EMPTY => Stmt::Empty,
        _ => return Err(CompileError::Incomplete),
    })
}

fn literal(node: &Node, nt: Nonterminal) -> Result<usize, CompileError> {
    let rule = node.rule().ok_or(CompileError::Incomplete)?;
    if production(rule).lhs != nt {
        return Err(CompileError::Incomplete);
    }
    Ok(literal_index(rule))
}

fn kind(node: &Node) -> Result<UnitKind, CompileError> {
    // Grammar order: Base, Barracks, Ranged, Heavy, Light, Worker.
    const KINDS: [UnitKind; 6] = [
        UnitKind::Base,
        UnitKind::Barracks,
        UnitKind::Ranged,
        UnitKind::Heavy,
        UnitKind::Light,
        UnitKind::Worker,
    ];
    Ok(KINDS[literal(node, Nonterminal::T)?])
}

fn number(node: &Node) -> Result<i32, CompileError> {
    Ok(NUMBERS[literal(node, Nonterminal::N)?])
}

fn direction(node: &Node) -> Result<TargetDir, CompileError> {
    let i = literal(node, Nonterminal::D)?;
    Ok(match DIRECTIONS[i] {
        "Up" => TargetDir::Fixed(Direction::Up),
        "Down" => TargetDir::Fixed(Direction::Down),
        "Right" => TargetDir::Fixed(Direction::Right),
        "Left" => TargetDir::Fixed(Direction::Left),
        _ => TargetDir::Enemy,
    })
}

fn criterion(node: &Node) -> Result<Criterion, CompileError> {
    const CRITERIA: [Criterion; 7] = [
        Criterion::Strongest,
        Criterion::Weakest,
        Criterion::Closest,
        Criterion::Farthest,
        Criterion::LessHealthy,
        Criterion::MostHealthy,
        Criterion::Random,
    ];
    Ok(CRITERIA[literal(node, Nonterminal::Op)?])
}

fn team(node: &Node) -> Result<Team, CompileError> {
    Ok(match literal(node, Nonterminal::Tp)? {
        0 => Team::Ally,
        _ => Team::Enemy,
    })
}

fn cond(node: &Node) -> Result<Cond, CompileError> {
    let rule = node.rule().ok_or(CompileError::Incomplete)?;
    if production(rule).lhs != Nonterminal::B {
        return Err(CompileError::Incomplete);
    }
    let i = rule - bool_rule(1) + 1;
    Ok(match i {
        1 => Cond::HasUnits(kind(arg(node, 0)?)?, number(arg(node, 1)?)?),
        2 => Cond::OpponentHasUnits(kind(arg(node, 0)?)?, number(arg(node, 1)?)?),
        3 => Cond::HasFewerUnits(kind(arg(node, 0)?)?, number(arg(node, 1)?)?),
        4 => Cond::UnitsAttacking(number(arg(node, 0)?)?),
        5 => Cond::WithinDistance(number(arg(node, 0)?)?),
        6 => Cond::WorkersHarvesting(number(arg(node, 0)?)?),
        7 => Cond::IsType(kind(arg(node, 0)?)?),
        8 => Cond::IsBuilder,
        9 => Cond::CanAttack,
        10 => Cond::KillsInOneAttack,
        11 => Cond::OpponentKillsInOneAttack,
        12 => Cond::InOpponentRange,
        13 => Cond::OpponentInRange,
        _ => Cond::CanHarvest,
    })
}

fn command(node: &Node) -> Result<Command, CompileError> {
    let rule = node.rule().ok_or(CompileError::Incomplete)?;
    if production(rule).lhs != Nonterminal::C {
        return Err(CompileError::Incomplete);
    }
    let i = rule - command_rule(1) + 1;
    Ok(match i {
        1 => Command::Build(kind(arg(node, 0)?)?, direction(arg(node, 1)?)?, number(arg(node, 2)?)?),
        2 => Command::Train(kind(arg(node, 0)?)?, direction(arg(node, 1)?)?, number(arg(node, 2)?)?),
        3 => Command::MoveToUnit(team(arg(node, 0)?)?, criterion(arg(node, 1)?)?),
        4 => Command::Attack(criterion(arg(node, 0)?)?),
        5 => Command::Harvest(number(arg(node, 0)?)?),
        6 => Command::Idle,
        _ => Command::MoveAway,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{parse, parse_as};

    #[test]
    fn compiles_literals_in_grammar_order() {
        let p = compile(&parse("u.train(Heavy,Right,50) u.build(Worker,EnemyDir,0)").unwrap()).unwrap();
        let Stmt::Seq(a, b) = p.body else { panic!() };
        assert_eq!(*a, Stmt::Command(Command::Train(UnitKind::Heavy, TargetDir::Fixed(Direction::Right), 50)));
        assert_eq!(*b, Stmt::Command(Command::Build(UnitKind::Worker, TargetDir::Enemy, 0)));
        assert!(!p.uses_random);
        assert!(compile(&parse("for(Unit u) u.attack(Random)").unwrap()).unwrap().uses_random);
    }

    #[test]
    fn roots() {
        let c = parse_as("u.moveToUnit(Enemy,LessHealthy)", Nonterminal::C).unwrap();
        assert_eq!(
            compile(&c).unwrap().body,
            Stmt::Command(Command::MoveToUnit(Team::Enemy, Criterion::LessHealthy))
        );
        let b = parse_as("u.is_Type(Ranged)", Nonterminal::B).unwrap();
        assert_eq!(compile_condition(&b).unwrap(), Cond::IsType(UnitKind::Ranged));
        assert!(compile(&b).is_err());
    }
}
