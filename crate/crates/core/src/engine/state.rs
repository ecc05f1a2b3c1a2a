use std::collections::VecDeque;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::map::GameMap;
use super::stats::StatsTable;
use super::unit::{
    Action, ActionAssignment, Busy, Direction, Order, Player, Pos, Unit, UnitCommand, UnitId,
    UnitKind,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Pile {
    pub pos: Pos,
    pub amount: i32,
}

/// Full simulator state. Units are kept sorted by id, and new units always get
/// a larger id than every existing one.
#[derive(Debug, Clone)]
pub struct GameState {
    pub tick: u32,
    map: Arc<GameMap>,
    stats: Arc<StatsTable>,
    pub units: Vec<Unit>,
    pub piles: Vec<Pile>,
    pub resources: [i32; 2],
    pub next_id: UnitId,
    /// Seed label for stochastic choices made by policies (the `Random` criterion).
    pub rng_stream_id: u64,
}

impl PartialEq for GameState {
    fn eq(&self, other: &Self) -> bool {
        self.tick == other.tick && self.same_configuration(other)
    }
}

impl Eq for GameState {}

/// What happened during one call to [`GameState::step`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TickReport {
    pub deaths: usize,
    /// False when no unit was busy during the tick, so nothing but the clock moved.
    pub changed: bool,
}

impl GameState {
    pub fn initial(map: Arc<GameMap>, stats: Arc<StatsTable>) -> GameState {
        let units: Vec<Unit> = map
            .start_units
            .iter()
            .enumerate()
            .map(|(i, s)| Unit {
                id: i as UnitId,
                owner: s.owner,
                kind: s.kind,
                pos: s.pos,
                hp: stats.get(s.kind).hit_points,
                carrying: 0,
                busy: None,
            })
            .collect();
        GameState {
            tick: 0,
            next_id: units.len() as UnitId,
            units,
            piles: map
                .piles
                .iter()
                .map(|&(pos, amount)| Pile { pos, amount })
                .collect(),
            resources: map.start_resources,
            rng_stream_id: 0,
            map,
            stats,
        }
    }

    /// Rebuilds a state from its parts; used when loading state pools.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        map: Arc<GameMap>,
        stats: Arc<StatsTable>,
        tick: u32,
        units: Vec<Unit>,
        piles: Vec<Pile>,
        resources: [i32; 2],
        next_id: UnitId,
        rng_stream_id: u64,
    ) -> GameState {
        let mut units = units;
        units.sort_by_key(|u| u.id);
        GameState {
            tick,
            map,
            stats,
            units,
            piles,
            resources,
            next_id,
            rng_stream_id,
        }
    }

    pub fn map(&self) -> &Arc<GameMap> {
        &self.map
    }

    pub fn stats(&self) -> &Arc<StatsTable> {
        &self.stats
    }

    /// Equality ignoring the clock.
    pub fn same_configuration(&self, other: &Self) -> bool {
        (Arc::ptr_eq(&self.map, &other.map) || self.map == other.map)
            && (Arc::ptr_eq(&self.stats, &other.stats) || self.stats == other.stats)
            && self.units == other.units
            && self.piles == other.piles
            && self.resources == other.resources
            && self.next_id == other.next_id
            && self.rng_stream_id == other.rng_stream_id
    }

    pub fn unit(&self, id: UnitId) -> Option<&Unit> {
        self.unit_index(id).map(|i| &self.units[i])
    }

    pub fn unit_index(&self, id: UnitId) -> Option<usize> {
        self.units.binary_search_by_key(&id, |u| u.id).ok()
    }

    pub fn units_of(&self, player: Player) -> impl Iterator<Item = &Unit> {
        self.units.iter().filter(move |u| u.player() == player)
    }

    pub fn unit_count(&self, player: Player) -> usize {
        self.units_of(player).count()
    }

    pub fn pile_at(&self, pos: Pos) -> Option<&Pile> {
        self.piles.iter().find(|p| p.pos == pos)
    }

    /// Tiebreak score: cost-weighted live units plus stockpiled resources.
    pub fn score(&self, player: Player) -> i64 {
        let units: i64 = self
            .units_of(player)
            .map(|u| self.stats.get(u.kind).cost as i64)
            .sum();
        units + self.resources[player] as i64
    }

    /// Resources anywhere in the world: piles, carried loads, stockpiles, the
    /// cost of every live unit and of every unit under production.
    pub fn total_resource_value(&self) -> i64 {
        let piles: i64 = self.piles.iter().map(|p| p.amount as i64).sum();
        let units: i64 = self
            .units
            .iter()
            .map(|u| {
                let own = self.stats.get(u.kind).cost as i64 + u.carrying as i64;
                let building = u.producing().map_or(0, |k| self.stats.get(k).cost as i64);
                own + building
            })
            .sum();
        piles + units + self.resources[0] as i64 + self.resources[1] as i64
    }

    /// Cells that a new action may move into or produce onto.
    pub fn occupancy(&self) -> Vec<bool> {
        let map = &*self.map;
        let mut blocked = vec![false; map.cells()];
        for y in 0..map.height {
            for x in 0..map.width {
                let p = Pos::new(x, y);
                if map.is_wall(p) {
                    blocked[map.cell_index(p)] = true;
                }
            }
        }
        for p in &self.piles {
            blocked[map.cell_index(p.pos)] = true;
        }
        for u in &self.units {
            blocked[map.cell_index(u.pos)] = true;
            if let Some(busy) = &u.busy {
                match busy.action {
                    Action::Move { to } | Action::Produce { at: to, .. } => {
                        blocked[map.cell_index(to)] = true
                    }
                    _ => {}
                }
            }
        }
        blocked
    }

    pub fn is_free(&self, blocked: &[bool], p: Pos) -> bool {
        self.map.in_bounds(p) && !blocked[self.map.cell_index(p)]
    }

    /// Pure transition.
    pub fn apply_tick(&self, assignments: &[ActionAssignment; 2]) -> GameState {
        let mut next = self.clone();
        next.step(assignments);
        next
    }

    /// In-place transition: idle units adopt their commands (ascending id),
    /// every busy unit advances one tick, completed actions resolve, the dead
    /// are removed and the clock advances. Illegal commands are dropped.
    pub fn step(&mut self, assignments: &[ActionAssignment; 2]) -> TickReport {
        let mut blocked = self.occupancy();
        let mut scratch = PathScratch::default();

        for i in 0..self.units.len() {
            if self.units[i].busy.is_some() {
                continue;
            }
            let unit = &self.units[i];
            let Some(cmd) = assignments[unit.player()].get(unit.id) else {
                continue;
            };
            if let Some(busy) = self.start_action(i, cmd, &blocked, &mut scratch) {
                match busy.action {
                    Action::Move { to } | Action::Produce { at: to, .. } => {
                        let c = self.map.cell_index(to);
                        blocked[c] = true;
                    }
                    _ => {}
                }
                if let Action::Produce { kind, .. } = busy.action {
                    let owner = self.units[i].player();
                    self.resources[owner] -= self.stats.get(kind).cost;
                }
                self.units[i].busy = Some(busy);
            }
        }

        let mut changed = false;
        let mut completed = Vec::new();
        for (i, u) in self.units.iter_mut().enumerate() {
            if let Some(busy) = &mut u.busy {
                changed = true;
                busy.remaining -= 1;
                if busy.remaining == 0 {
                    completed.push(i);
                }
            }
        }

        // Attacks resolve simultaneously against the pre-resolution state.
        let mut damage = vec![0i32; self.units.len()];
        for &i in &completed {
            let u = &self.units[i];
            if let Some(Busy {
                action: Action::Attack { target },
                ..
            }) = u.busy
            {
                if let Some(t) = self.unit_index(target) {
                    let s = self.stats.get(u.kind);
                    if u.pos.manhattan(self.units[t].pos) <= s.attack_range {
                        damage[t] += s.attack_damage;
                    }
                }
            }
        }
        for (u, d) in self.units.iter_mut().zip(&damage) {
            u.hp -= d;
        }

        let mut spawned = Vec::new();
        for &i in &completed {
            let busy = self.units[i].busy.take().expect("completed unit is busy");
            if self.units[i].hp <= 0 {
                continue;
            }
            match busy.action {
                Action::Move { to } => self.units[i].pos = to,
                Action::Attack { .. } => {}
                Action::Harvest { pile } => {
                    let amount = self.stats.get(self.units[i].kind).harvest_amount;
                    if let Some(p) = self.piles.iter_mut().find(|p| p.pos == pile) {
                        let taken = amount.min(p.amount);
                        p.amount -= taken;
                        self.units[i].carrying += taken;
                    }
                }
                Action::Return { base } => {
                    if self.unit(base).is_some_and(|b| b.hp > 0) {
                        let owner = self.units[i].player();
                        self.resources[owner] += self.units[i].carrying;
                        self.units[i].carrying = 0;
                    }
                }
                Action::Produce { kind, at } => {
                    spawned.push(Unit {
                        id: self.next_id,
                        owner: self.units[i].owner,
                        kind,
                        pos: at,
                        hp: self.stats.get(kind).hit_points,
                        carrying: 0,
                        busy: None,
                    });
                    self.next_id += 1;
                }
            }
        }
        self.piles.retain(|p| p.amount > 0);

        let before = self.units.len();
        self.units.retain(|u| u.hp > 0);
        let deaths = before - self.units.len();
        self.units.extend(spawned);
        self.tick += 1;
        TickReport { deaths, changed }
    }

    fn start_action(
        &self,
        i: usize,
        cmd: UnitCommand,
        blocked: &[bool],
        scratch: &mut PathScratch,
    ) -> Option<Busy> {
        let unit = &self.units[i];
        let stats = self.stats.get(unit.kind);
        let mobile = !unit.kind.is_stationary();
        let moving = |to: Pos, order: Order| Busy {
            action: Action::Move { to },
            order,
            remaining: stats.move_period,
        };
        match cmd {
            UnitCommand::Idle => None,
            UnitCommand::Move(dir) => {
                let to = unit.pos.step(dir);
                (mobile && self.is_free(blocked, to)).then(|| moving(to, Order::Move))
            }
            UnitCommand::MoveToward(target) => {
                if !mobile {
                    return None;
                }
                let reach = if self.is_free(blocked, target) { 0 } else { 1 };
                let dir = self.path_step(unit.pos, target, reach, blocked, scratch)?;
                Some(moving(unit.pos.step(dir), Order::MoveToward))
            }
            UnitCommand::Harvest(pile) => {
                if stats.harvest_amount == 0 || unit.carrying > 0 {
                    return None;
                }
                self.pile_at(pile).filter(|p| p.amount > 0)?;
                if unit.pos.manhattan(pile) == 1 {
                    Some(Busy {
                        action: Action::Harvest { pile },
                        order: Order::Harvest,
                        remaining: stats.harvest_period,
                    })
                } else {
                    let dir = self.path_step(unit.pos, pile, 1, blocked, scratch)?;
                    Some(moving(unit.pos.step(dir), Order::Harvest))
                }
            }
            UnitCommand::ReturnResources(base) => {
                if unit.carrying == 0 {
                    return None;
                }
                let b = self.unit(base)?;
                if b.owner != unit.owner || b.kind != UnitKind::Base {
                    return None;
                }
                if unit.pos.manhattan(b.pos) == 1 {
                    Some(Busy {
                        action: Action::Return { base },
                        order: Order::Return,
                        remaining: stats.return_period,
                    })
                } else {
                    let dir = self.path_step(unit.pos, b.pos, 1, blocked, scratch)?;
                    Some(moving(unit.pos.step(dir), Order::Return))
                }
            }
            UnitCommand::Produce(kind, dir) => {
                let at = unit.pos.step(dir);
                let cost = self.stats.get(kind).cost;
                (unit.kind.can_produce(kind)
                    && self.resources[unit.player()] >= cost
                    && self.is_free(blocked, at))
                .then(|| Busy {
                    action: Action::Produce { kind, at },
                    order: Order::Produce,
                    remaining: self.stats.get(kind).produce_period,
                })
            }
            UnitCommand::Attack(target) => {
                let t = self.unit(target)?;
                (stats.can_attack()
                    && t.owner != unit.owner
                    && unit.pos.manhattan(t.pos) <= stats.attack_range)
                    .then_some(Busy {
                        action: Action::Attack { target },
                        order: Order::Attack,
                        remaining: stats.attack_period,
                    })
            }
        }
    }

    /// First step of a shortest path from `from` to any free cell within
    /// Manhattan distance `reach` of `target`. `None` when already there or
    /// unreachable. Neighbors expand in `Direction::ALL` order.
    pub fn path_step(
        &self,
        from: Pos,
        target: Pos,
        reach: i32,
        blocked: &[bool],
        scratch: &mut PathScratch,
    ) -> Option<Direction> {
        if from.manhattan(target) <= reach {
            return None;
        }
        let map = &*self.map;
        scratch.first.clear();
        scratch.first.resize(map.cells(), None);
        scratch.queue.clear();
        let start = map.cell_index(from);
        scratch.first[start] = Some(Direction::Up);
        for dir in Direction::ALL {
            let p = from.step(dir);
            if self.is_free(blocked, p) {
                let c = map.cell_index(p);
                scratch.first[c] = Some(dir);
                if p.manhattan(target) <= reach {
                    return Some(dir);
                }
                scratch.queue.push_back(p);
            }
        }
        while let Some(p) = scratch.queue.pop_front() {
            let origin = scratch.first[map.cell_index(p)];
            for dir in Direction::ALL {
                let q = p.step(dir);
                if !self.is_free(blocked, q) {
                    continue;
                }
                let c = map.cell_index(q);
                if scratch.first[c].is_some() {
                    continue;
                }
                scratch.first[c] = origin;
                if q.manhattan(target) <= reach {
                    return origin;
                }
                scratch.queue.push_back(q);
            }
        }
        None
    }
}

#[derive(Default)]
pub struct PathScratch {
    first: Vec<Option<Direction>>,
    queue: VecDeque<Pos>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::map::GameMap;

    fn state(doc: &str) -> GameState {
        GameState::initial(
            Arc::new(GameMap::parse(doc).unwrap()),
            Arc::new(StatsTable::default()),
        )
    }

    const ARENA: &str = "format: 1\nname: Arena\nsize: 5x3\nmax_ticks: 100\nstart_resources: 5,5\ngrid:\nbw..R\n.....\n...WB\nresources:\n4,0: 10\n";

    fn assign(pairs: &[(UnitId, UnitCommand)]) -> ActionAssignment {
        pairs.iter().copied().collect()
    }

    #[test]
    fn single_move_completes_after_move_period() {
        let s = state(ARENA);
        let w = s.units.iter().find(|u| u.kind == UnitKind::Worker && u.owner == 0).unwrap().id;
        let orders = [assign(&[(w, UnitCommand::Move(Direction::Right))]), ActionAssignment::new()];
        let mut next = s.apply_tick(&orders);
        let u = next.unit(w).unwrap();
        assert_eq!(u.pos, Pos::new(1, 0));
        assert_eq!(u.busy.unwrap().remaining, 7);
        for _ in 1..8 {
            next = next.apply_tick(&orders);
        }
        assert_eq!(next.unit(w).unwrap().pos, Pos::new(2, 0));
        assert!(next.unit(w).unwrap().is_idle());
        assert_eq!(next.tick, 8);
    }

    #[test]
    fn empty_assignments_only_advance_clock() {
        let s = state(ARENA);
        let next = s.apply_tick(&[ActionAssignment::new(), ActionAssignment::new()]);
        assert_eq!(next.tick, 1);
        assert!(next.same_configuration(&s));
    }

    #[test]
    fn light_kills_adjacent_worker() {
        let doc = "format: 1\nname: Duel\nsize: 3x1\nmax_ticks: 100\nstart_resources: 0,0\ngrid:\n.W.\nresources:\nunits:\n0 Light 0,0\n";
        let s = state(doc);
        let light = s.units.iter().find(|u| u.kind == UnitKind::Light).unwrap().id;
        let worker = s.units.iter().find(|u| u.kind == UnitKind::Worker).unwrap().id;
        let orders = [assign(&[(light, UnitCommand::Attack(worker))]), ActionAssignment::new()];
        let mut s = s;
        for _ in 0..4 {
            s.step(&orders);
            assert!(s.unit(worker).is_some());
        }
        let report = s.step(&orders);
        assert_eq!(report.deaths, 1);
        assert!(s.unit(worker).is_none());
    }

    #[test]
    fn mutual_kill_resolves_simultaneously() {
        let doc = "format: 1\nname: Duel\nsize: 2x1\nmax_ticks: 100\nstart_resources: 0,0\ngrid:\nwW\nresources:\n";
        let mut s = state(doc);
        let orders = [assign(&[(0, UnitCommand::Attack(1))]), assign(&[(1, UnitCommand::Attack(0))])];
        for _ in 0..5 {
            s.step(&orders);
        }
        assert!(s.units.is_empty());
    }

    #[test]
    fn harvest_and_return_conserve_resources() {
        let mut s = state(ARENA);
        let total = s.total_resource_value();
        // Player 1 worker sits at (3,2); the pile is at (4,0).
        let w = s.units.iter().find(|u| u.kind == UnitKind::Worker && u.owner == 1).unwrap().id;
        let base = s.units.iter().find(|u| u.kind == UnitKind::Base && u.owner == 1).unwrap().id;
        for _ in 0..200 {
            let u = s.unit(w).unwrap();
            let cmd = if u.carrying > 0 {
                UnitCommand::ReturnResources(base)
            } else {
                UnitCommand::Harvest(Pos::new(4, 0))
            };
            s.step(&[ActionAssignment::new(), assign(&[(w, cmd)])]);
            assert_eq!(s.total_resource_value(), total);
        }
        assert!(s.resources[1] > 5);
    }

    #[test]
    fn production_reserves_cell_and_spends_resources() {
        let mut s = state(ARENA);
        let base = s.units.iter().find(|u| u.kind == UnitKind::Base && u.owner == 0).unwrap().id;
        let orders = [assign(&[(base, UnitCommand::Produce(UnitKind::Worker, Direction::Down))]), ActionAssignment::new()];
        s.step(&orders);
        assert_eq!(s.resources[0], 4);
        assert!(!s.is_free(&s.occupancy(), Pos::new(0, 1)));
        for _ in 1..50 {
            s.step(&orders);
        }
        assert_eq!(s.units_of(0).filter(|u| u.kind == UnitKind::Worker).count(), 2);
        let newest = s.units.last().unwrap();
        assert_eq!(newest.pos, Pos::new(0, 1));
        assert_eq!(newest.id, s.next_id - 1);
    }

    #[test]
    fn illegal_commands_are_dropped() {
        let s = state(ARENA);
        let base = s.units.iter().find(|u| u.kind == UnitKind::Base && u.owner == 0).unwrap().id;
        let orders = [
            assign(&[
                (base, UnitCommand::Move(Direction::Down)),
                (1, UnitCommand::Produce(UnitKind::Light, Direction::Down)),
            ]),
            ActionAssignment::new(),
        ];
        let next = s.apply_tick(&orders);
        assert!(next.same_configuration(&s));
    }

    #[test]
    fn path_step_routes_around_walls() {
        let doc = "format: 1\nname: Maze\nsize: 5x3\nmax_ticks: 100\nstart_resources: 0,0\ngrid:\nw.#..\n..#..\n....W\nresources:\n";
        let s = state(doc);
        let blocked = s.occupancy();
        let dir = s.path_step(Pos::new(0, 0), Pos::new(4, 0), 0, &blocked, &mut PathScratch::default());
        assert!(matches!(dir, Some(Direction::Right) | Some(Direction::Down)));
        let mut p = Pos::new(0, 0);
        let mut steps = 0;
        while let Some(d) = s.path_step(p, Pos::new(4, 0), 0, &blocked, &mut PathScratch::default()) {
            p = p.step(d);
            steps += 1;
            assert!(steps < 20);
        }
        assert_eq!(p, Pos::new(4, 0));
        assert_eq!(steps, 8);
    }
}
