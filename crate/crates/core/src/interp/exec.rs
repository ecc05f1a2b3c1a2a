use thiserror::Error;
use xxhash_rust::xxh3::xxh3_64;

use super::program::{Command, Cond, Criterion, Program, Stmt, TargetDir, Team};
use crate::engine::{
    ActionAssignment, Direction, GameState, Player, Policy, PolicyFault, Pos, StatsTable,
    Unit, UnitCommand, UnitId, UnitKind,
};

pub const DEFAULT_STEP_BUDGET: u64 = 100_000;

#[derive(Debug, Clone, Copy, Error, PartialEq, Eq)]
#[error("interpreter step budget of {0} exceeded")]
pub struct StepBudgetExceeded(pub u64);

impl From<StepBudgetExceeded> for PolicyFault {
    fn from(e: StepBudgetExceeded) -> Self {
        PolicyFault {
            message: e.to_string(),
        }
    }
}

/// Runs `program` for `player` with the default step budget.
pub fn interpret(
    program: &Program,
    state: &GameState,
    player: Player,
) -> Result<ActionAssignment, StepBudgetExceeded> {
    interpret_with_budget(program, state, player, DEFAULT_STEP_BUDGET)
}

/// Runs `program` for `player`. Statements execute in order and the first
/// command given to an idle unit sticks. Idle units left without a command
/// are assigned `Idle`; busy units are never assigned.
pub fn interpret_with_budget(
    program: &Program,
    state: &GameState,
    player: Player,
    budget: u64,
) -> Result<ActionAssignment, StepBudgetExceeded> {
    let mut ctx = ExecContext::new(state, player, budget);
    ctx.exec(&program.body, None)?;
    Ok(ctx.finish())
}

/// Evaluates a condition, optionally with a bound unit.
pub fn eval_bool(cond: &Cond, state: &GameState, player: Player, current: Option<UnitId>) -> bool {
    let mut ctx = ExecContext::new(state, player, DEFAULT_STEP_BUDGET);
    let current = current.and_then(|id| state.unit_index(id));
    ctx.eval(cond, current)
}

/// Mutable state of one interpretation pass over a fixed game state.
pub struct ExecContext<'s> {
    state: &'s GameState,
    stats: &'s StatsTable,
    player: Player,
    own: Vec<usize>,
    enemies: Vec<usize>,
    assignment: ActionAssignment,
    step_budget: u64,
    initial_budget: u64,
    own_counts: [i32; 6],
    enemy_counts: [i32; 6],
    in_production: [i32; 6],
    pending_production: [i32; 6],
    committed: i32,
    harvesting: i32,
    pending_harvest: i32,
    attacking: i32,
    blocked: Option<Vec<bool>>,
}

impl<'s> ExecContext<'s> {
    pub fn new(state: &'s GameState, player: Player, step_budget: u64) -> ExecContext<'s> {
        let mut ctx = ExecContext {
            state,
            stats: state.stats(),
            player,
            own: Vec::new(),
            enemies: Vec::new(),
            assignment: ActionAssignment::new(),
            step_budget,
            initial_budget: step_budget,
            own_counts: [0; 6],
            enemy_counts: [0; 6],
            in_production: [0; 6],
            pending_production: [0; 6],
            committed: 0,
            harvesting: 0,
            pending_harvest: 0,
            attacking: 0,
            blocked: None,
        };
        for (i, u) in state.units.iter().enumerate() {
            if u.player() == player {
                ctx.own.push(i);
                ctx.own_counts[u.kind.index()] += 1;
                if let Some(k) = u.producing() {
                    ctx.in_production[k.index()] += 1;
                }
                if u.kind == UnitKind::Worker && u.is_harvesting() {
                    ctx.harvesting += 1;
                }
                if u.is_attacking() {
                    ctx.attacking += 1;
                }
            } else {
                ctx.enemies.push(i);
                ctx.enemy_counts[u.kind.index()] += 1;
            }
        }
        ctx
    }

    pub fn step_budget(&self) -> u64 {
        self.step_budget
    }

    fn charge(&mut self) -> Result<(), StepBudgetExceeded> {
        if self.step_budget == 0 {
            return Err(StepBudgetExceeded(self.initial_budget));
        }
        self.step_budget -= 1;
        Ok(())
    }

    pub fn finish(mut self) -> ActionAssignment {
        for &i in &self.own {
            let u = &self.state.units[i];
            if u.is_idle() {
                self.assignment.assign(u.id, UnitCommand::Idle);
            }
        }
        self.assignment
    }

    pub fn exec(&mut self, stmt: &Stmt, current: Option<usize>) -> Result<(), StepBudgetExceeded> {
        self.charge()?;
        match stmt {
            Stmt::Seq(a, b) => {
                self.exec(a, current)?;
                self.exec(b, current)?;
            }
            Stmt::For(body) => {
                for k in 0..self.own.len() {
                    let u = self.own[k];
                    self.exec(body, Some(u))?;
                }
            }
            Stmt::If(cond, then, otherwise) => {
                if self.eval(cond, current) {
                    self.exec(then, current)?;
                } else if let Some(e) = otherwise {
                    self.exec(e, current)?;
                }
            }
            Stmt::Command(cmd) => match current {
                Some(u) => {
                    self.charge()?;
                    self.act(*cmd, u);
                }
                None => {
                    for k in 0..self.own.len() {
                        self.charge()?;
                        let u = self.own[k];
                        self.act(*cmd, u);
                    }
                }
            },
            Stmt::Empty => {}
        }
        Ok(())
    }

    fn unit(&self, i: usize) -> &'s Unit {
        &self.state.units[i]
    }

    pub fn eval(&mut self, cond: &Cond, current: Option<usize>) -> bool {
        let cur = current.map(|i| self.unit(i));
        let state = self.state;
        let stats = self.stats;
        let own = || state.units.iter().filter(|u| u.player() == self.player);
        let foe = || state.units.iter().filter(|u| u.player() != self.player);
        match *cond {
            Cond::HasUnits(k, n) => self.own_counts[k.index()] >= n,
            Cond::OpponentHasUnits(k, n) => self.enemy_counts[k.index()] >= n,
            Cond::HasFewerUnits(k, n) => self.own_counts[k.index()] < n,
            Cond::UnitsAttacking(n) => self.attacking >= n,
            Cond::WithinDistance(n) => own().any(|a| foe().any(|e| a.pos.manhattan(e.pos) <= n)),
            Cond::WorkersHarvesting(n) => self.harvesting >= n,
            Cond::IsType(k) => cur.is_some_and(|u| u.kind == k),
            Cond::IsBuilder => cur.is_some_and(|u| u.kind == UnitKind::Worker),
            Cond::CanAttack => cur.is_some_and(|u| stats.get(u.kind).can_attack()),
            Cond::KillsInOneAttack => own().any(|a| {
                let dmg = stats.get(a.kind).attack_damage;
                dmg > 0 && foe().any(|e| e.hp <= dmg)
            }),
            Cond::OpponentKillsInOneAttack => foe().any(|a| {
                let dmg = stats.get(a.kind).attack_damage;
                dmg > 0 && own().any(|e| e.hp <= dmg)
            }),
            Cond::InOpponentRange => foe().any(|a| {
                let s = stats.get(a.kind);
                s.can_attack() && own().any(|e| a.pos.manhattan(e.pos) <= s.attack_range)
            }),
            Cond::OpponentInRange => own().any(|a| {
                let s = stats.get(a.kind);
                s.can_attack() && foe().any(|e| a.pos.manhattan(e.pos) <= s.attack_range)
            }),
            Cond::CanHarvest => cur.is_some_and(|u| {
                u.kind == UnitKind::Worker && stats.get(u.kind).harvest_amount > 0 && u.carrying == 0
            }),
        }
    }

    fn free(&mut self, p: Pos) -> bool {
        let state = self.state;
        let blocked = self.blocked.get_or_insert_with(|| state.occupancy());
        state.is_free(blocked, p)
    }

    fn reserve(&mut self, p: Pos) {
        let idx = self.state.map().cell_index(p);
        if let Some(b) = self.blocked.as_mut() {
            b[idx] = true;
        }
    }

    fn give(&mut self, unit: &Unit, cmd: UnitCommand) {
        self.assignment.assign(unit.id, cmd);
    }

    fn act(&mut self, cmd: Command, i: usize) {
        let unit = self.unit(i);
        if !unit.is_idle() || self.assignment.get(unit.id).is_some() {
            return;
        }
        let s = self.stats.get(unit.kind);
        match cmd {
            Command::Build(kind, dir, n) => {
                if unit.kind == UnitKind::Worker {
                    self.produce(unit, kind, dir, n);
                }
            }
            Command::Train(kind, dir, n) => {
                if unit.kind.is_stationary() {
                    self.produce(unit, kind, dir, n);
                }
            }
            Command::MoveToUnit(team, crit) => {
                if unit.kind.is_stationary() {
                    return;
                }
                let pool: Vec<usize> = match team {
                    Team::Ally => self.own.iter().copied().filter(|&j| j != i).collect(),
                    Team::Enemy => self.enemies.clone(),
                };
                if let Some(t) = self.choose(&pool, unit, crit) {
                    let target = self.unit(t).pos;
                    if unit.pos.manhattan(target) > 1 {
                        self.give(unit, UnitCommand::MoveToward(target));
                    }
                }
            }
            Command::Attack(crit) => {
                if !s.can_attack() {
                    return;
                }
                let pool = self.enemies.clone();
                if let Some(t) = self.choose(&pool, unit, crit) {
                    let target = self.unit(t);
                    if unit.pos.manhattan(target.pos) <= s.attack_range {
                        self.give(unit, UnitCommand::Attack(target.id));
                    } else if !unit.kind.is_stationary() {
                        self.give(unit, UnitCommand::MoveToward(target.pos));
                    }
                }
            }
            Command::Harvest(n) => {
                if unit.kind != UnitKind::Worker
                    || s.harvest_amount == 0
                    || self.harvesting + self.pending_harvest >= n
                {
                    return;
                }
                let cmd = if unit.carrying > 0 {
                    self.own
                        .iter()
                        .map(|&j| self.unit(j))
                        .filter(|b| b.kind == UnitKind::Base)
                        .min_by_key(|b| (unit.pos.manhattan(b.pos), b.id))
                        .map(|b| UnitCommand::ReturnResources(b.id))
                } else {
                    self.state
                        .piles
                        .iter()
                        .filter(|p| p.amount > 0)
                        .min_by_key(|p| unit.pos.manhattan(p.pos))
                        .map(|p| UnitCommand::Harvest(p.pos))
                };
                if let Some(cmd) = cmd {
                    self.pending_harvest += 1;
                    self.give(unit, cmd);
                }
            }
            Command::Idle => {
                let in_range = if s.can_attack() {
                    self.enemies
                        .iter()
                        .map(|&j| self.unit(j))
                        .filter(|e| unit.pos.manhattan(e.pos) <= s.attack_range)
                        .min_by_key(|e| (unit.pos.manhattan(e.pos), e.id))
                } else {
                    None
                };
                match in_range {
                    Some(e) => self.give(unit, UnitCommand::Attack(e.id)),
                    None => self.give(unit, UnitCommand::Idle),
                }
            }
            Command::MoveAway => {
                if unit.kind.is_stationary() {
                    return;
                }
                let Some(base) = self
                    .own
                    .iter()
                    .map(|&j| self.unit(j))
                    .filter(|b| b.kind == UnitKind::Base)
                    .min_by_key(|b| (unit.pos.manhattan(b.pos), b.id))
                else {
                    return;
                };
                let here = unit.pos.manhattan(base.pos);
                let mut best: Option<(i32, Direction)> = None;
                for dir in Direction::ALL {
                    let to = unit.pos.step(dir);
                    let d = to.manhattan(base.pos);
                    if d > here && best.is_none_or(|(bd, _)| d > bd) && self.free(to) {
                        best = Some((d, dir));
                    }
                }
                if let Some((_, dir)) = best {
                    self.reserve(unit.pos.step(dir));
                    self.give(unit, UnitCommand::Move(dir));
                }
            }
        }
    }

    fn produce(&mut self, unit: &Unit, kind: UnitKind, dir: TargetDir, n: i32) {
        if !unit.kind.can_produce(kind) {
            return;
        }
        let k = kind.index();
        if self.own_counts[k] + self.in_production[k] + self.pending_production[k] >= n {
            return;
        }
        let cost = self.stats.get(kind).cost;
        if self.state.resources[self.player] - self.committed < cost {
            return;
        }
        let preferred = match dir {
            TargetDir::Fixed(d) => d,
            TargetDir::Enemy => self.enemy_direction(unit),
        };
        let choice = std::iter::once(preferred)
            .chain(Direction::ALL)
            .find(|&d| self.free(unit.pos.step(d)));
        if let Some(d) = choice {
            self.reserve(unit.pos.step(d));
            self.pending_production[k] += 1;
            self.committed += cost;
            self.give(unit, UnitCommand::Produce(kind, d));
        }
    }

    /// Neighbor direction closest to the nearest enemy Base (any enemy unit
    /// if no Base is left).
    fn enemy_direction(&self, unit: &Unit) -> Direction {
        let enemies = self.enemies.iter().map(|&j| self.unit(j));
        let nearest = enemies
            .clone()
            .filter(|e| e.kind == UnitKind::Base)
            .min_by_key(|e| (unit.pos.manhattan(e.pos), e.id))
            .or_else(|| enemies.min_by_key(|e| (unit.pos.manhattan(e.pos), e.id)));
        let Some(target) = nearest else {
            return Direction::Up;
        };
        Direction::ALL
            .into_iter()
            .min_by_key(|&d| unit.pos.step(d).manhattan(target.pos))
            .expect("four directions")
    }

    fn choose(&self, pool: &[usize], from: &Unit, crit: Criterion) -> Option<usize> {
        if pool.is_empty() {
            return None;
        }
        if crit == Criterion::Random {
            let mut bytes = Vec::with_capacity(24);
            bytes.extend_from_slice(&self.state.rng_stream_id.to_le_bytes());
            bytes.extend_from_slice(&self.state.tick.to_le_bytes());
            bytes.extend_from_slice(&(self.player as u32).to_le_bytes());
            bytes.extend_from_slice(&from.id.to_le_bytes());
            return Some(pool[(xxh3_64(&bytes) % pool.len() as u64) as usize]);
        }
        let key = |j: usize| -> i64 {
            let u = self.unit(j);
            let dmg = self.stats.get(u.kind).attack_damage as i64;
            let dist = from.pos.manhattan(u.pos) as i64;
            match crit {
                Criterion::Strongest => -dmg,
                Criterion::Weakest => dmg,
                Criterion::Closest => dist,
                Criterion::Farthest => -dist,
                Criterion::LessHealthy => u.hp as i64,
                Criterion::MostHealthy => -(u.hp as i64),
                Criterion::Random => unreachable!(),
            }
        };
        // Pool is in ascending id order, and min_by_key keeps the first minimum.
        pool.iter().copied().min_by_key(|&j| key(j))
    }
}

/// A compiled program acting as a match policy.
#[derive(Debug, Clone)]
pub struct ProgramPolicy {
    program: Program,
    budget: u64,
}

impl ProgramPolicy {
    pub fn new(program: Program) -> ProgramPolicy {
        ProgramPolicy {
            program,
            budget: DEFAULT_STEP_BUDGET,
        }
    }

    pub fn with_budget(mut self, budget: u64) -> ProgramPolicy {
        self.budget = budget;
        self
    }

    pub fn program(&self) -> &Program {
        &self.program
    }
}

impl Policy for ProgramPolicy {
    fn act(&mut self, state: &GameState, player: Player) -> Result<ActionAssignment, PolicyFault> {
        Ok(interpret_with_budget(&self.program, state, player, self.budget)?)
    }

    fn is_stationary(&self) -> bool {
        !self.program.uses_random
    }
}
