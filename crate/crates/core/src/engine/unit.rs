use std::fmt;

use serde::{Deserialize, Serialize};

pub type UnitId = u32;

/// Player index, either 0 or 1.
pub type Player = usize;

pub fn opponent(player: Player) -> Player {
    1 - player
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum UnitKind {
    Base,
    Barracks,
    Worker,
    Light,
    Heavy,
    Ranged,
}

impl UnitKind {
    pub const ALL: [UnitKind; 6] = [
        UnitKind::Base,
        UnitKind::Barracks,
        UnitKind::Worker,
        UnitKind::Light,
        UnitKind::Heavy,
        UnitKind::Ranged,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_stationary(self) -> bool {
        matches!(self, UnitKind::Base | UnitKind::Barracks)
    }

    /// Production rules: Base trains Workers, Barracks trains combat units,
    /// Workers build the two structures.
    pub fn can_produce(self, product: UnitKind) -> bool {
        match self {
            UnitKind::Base => product == UnitKind::Worker,
            UnitKind::Barracks => {
                matches!(product, UnitKind::Light | UnitKind::Heavy | UnitKind::Ranged)
            }
            UnitKind::Worker => matches!(product, UnitKind::Base | UnitKind::Barracks),
            _ => false,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            UnitKind::Base => "Base",
            UnitKind::Barracks => "Barracks",
            UnitKind::Worker => "Worker",
            UnitKind::Light => "Light",
            UnitKind::Heavy => "Heavy",
            UnitKind::Ranged => "Ranged",
        }
    }

    pub fn from_name(name: &str) -> Option<UnitKind> {
        UnitKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(name))
    }
}

impl fmt::Display for UnitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pos {
    pub x: i32,
    pub y: i32,
}

impl Pos {
    pub const fn new(x: i32, y: i32) -> Pos {
        Pos { x, y }
    }

    pub fn manhattan(self, other: Pos) -> i32 {
        (self.x - other.x).abs() + (self.y - other.y).abs()
    }

    pub fn step(self, dir: Direction) -> Pos {
        let (dx, dy) = dir.delta();
        Pos::new(self.x + dx, self.y + dy)
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.x, self.y)
    }
}

/// Grid directions. `ALL` is also the tie-break order (Up > Right > Down > Left).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    Up,
    Right,
    Down,
    Left,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::Up,
        Direction::Right,
        Direction::Down,
        Direction::Left,
    ];

    pub fn delta(self) -> (i32, i32) {
        match self {
            Direction::Up => (0, -1),
            Direction::Right => (1, 0),
            Direction::Down => (0, 1),
            Direction::Left => (-1, 0),
        }
    }
}

/// The in-progress action a busy unit is carrying out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    Move { to: Pos },
    Attack { target: UnitId },
    Harvest { pile: Pos },
    Return { base: UnitId },
    Produce { kind: UnitKind, at: Pos },
}

/// Which command started the current action. A Worker walking toward a pile
/// is busy with a `Move` action but its order is `Harvest`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Order {
    Move,
    MoveToward,
    Harvest,
    Return,
    Produce,
    Attack,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Busy {
    pub action: Action,
    pub order: Order,
    pub remaining: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Unit {
    pub id: UnitId,
    pub owner: u8,
    pub kind: UnitKind,
    pub pos: Pos,
    pub hp: i32,
    pub carrying: i32,
    pub busy: Option<Busy>,
}

impl Unit {
    pub fn player(&self) -> Player {
        self.owner as Player
    }

    pub fn is_idle(&self) -> bool {
        self.busy.is_none()
    }

    /// True while the unit is walking to, harvesting from, or returning from a pile.
    pub fn is_harvesting(&self) -> bool {
        matches!(
            self.busy,
            Some(Busy {
                order: Order::Harvest | Order::Return,
                ..
            })
        )
    }

    pub fn is_attacking(&self) -> bool {
        matches!(
            self.busy,
            Some(Busy {
                action: Action::Attack { .. },
                ..
            })
        )
    }

    pub fn producing(&self) -> Option<UnitKind> {
        match self.busy {
            Some(Busy {
                action: Action::Produce { kind, .. },
                ..
            }) => Some(kind),
            _ => None,
        }
    }
}

/// A command handed to an idle unit for the current tick.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum UnitCommand {
    Idle,
    Move(Direction),
    Harvest(Pos),
    ReturnResources(UnitId),
    Produce(UnitKind, Direction),
    Attack(UnitId),
    MoveToward(Pos),
}

impl UnitCommand {
    /// Stable byte encoding used for signature digests.
    pub fn encode(&self, out: &mut Vec<u8>) {
        fn pos(out: &mut Vec<u8>, p: Pos) {
            out.extend_from_slice(&(p.x as i16).to_le_bytes());
            out.extend_from_slice(&(p.y as i16).to_le_bytes());
        }
        match *self {
            UnitCommand::Idle => out.push(0),
            UnitCommand::Move(d) => out.extend_from_slice(&[1, d as u8]),
            UnitCommand::Harvest(p) => {
                out.push(2);
                pos(out, p);
            }
            UnitCommand::ReturnResources(id) => {
                out.push(3);
                out.extend_from_slice(&id.to_le_bytes());
            }
            UnitCommand::Produce(k, d) => out.extend_from_slice(&[4, k as u8, d as u8]),
            UnitCommand::Attack(id) => {
                out.push(5);
                out.extend_from_slice(&id.to_le_bytes());
            }
            UnitCommand::MoveToward(p) => {
                out.push(6);
                pos(out, p);
            }
        }
    }
}

/// One player's unit→command map for a tick. Entries are kept sorted by unit id
/// and a unit, once assigned, keeps its first command.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ActionAssignment {
    entries: Vec<(UnitId, UnitCommand)>,
}

impl ActionAssignment {
    pub fn new() -> ActionAssignment {
        ActionAssignment::default()
    }

    /// Assigns `command` to `unit` unless it already has one. Returns whether
    /// the write happened.
    pub fn assign(&mut self, unit: UnitId, command: UnitCommand) -> bool {
        match self.entries.binary_search_by_key(&unit, |e| e.0) {
            Ok(_) => false,
            Err(at) => {
                self.entries.insert(at, (unit, command));
                true
            }
        }
    }

    pub fn get(&self, unit: UnitId) -> Option<UnitCommand> {
        self.entries
            .binary_search_by_key(&unit, |e| e.0)
            .ok()
            .map(|i| self.entries[i].1)
    }

    pub fn iter(&self) -> impl Iterator<Item = (UnitId, UnitCommand)> + '_ {
        self.entries.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn encode(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&(self.entries.len() as u32).to_le_bytes());
        for (id, cmd) in &self.entries {
            out.extend_from_slice(&id.to_le_bytes());
            cmd.encode(out);
        }
    }
}

impl FromIterator<(UnitId, UnitCommand)> for ActionAssignment {
    fn from_iter<I: IntoIterator<Item = (UnitId, UnitCommand)>>(iter: I) -> Self {
        let mut a = ActionAssignment::new();
        for (id, cmd) in iter {
            a.assign(id, cmd);
        }
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_writer_wins() {
        let mut a = ActionAssignment::new();
        assert!(a.assign(7, UnitCommand::Attack(3)));
        assert!(!a.assign(7, UnitCommand::Idle));
        assert!(a.assign(2, UnitCommand::Idle));
        assert_eq!(a.get(7), Some(UnitCommand::Attack(3)));
        assert_eq!(a.iter().map(|e| e.0).collect::<Vec<_>>(), vec![2, 7]);
    }

    #[test]
    fn production_rules() {
        assert!(UnitKind::Base.can_produce(UnitKind::Worker));
        assert!(!UnitKind::Base.can_produce(UnitKind::Light));
        assert!(UnitKind::Barracks.can_produce(UnitKind::Ranged));
        assert!(UnitKind::Worker.can_produce(UnitKind::Barracks));
        assert!(!UnitKind::Light.can_produce(UnitKind::Worker));
        assert_eq!(UnitKind::from_name("heavy"), Some(UnitKind::Heavy));
    }
}
