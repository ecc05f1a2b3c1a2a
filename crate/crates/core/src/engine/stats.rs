use std::fmt::Write as _;

use crate::config::{parse_value, ConfigError, KeyValues, FORMAT_VERSION};

use super::unit::UnitKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnitStats {
    pub hit_points: i32,
    pub cost: i32,
    pub attack_damage: i32,
    /// Manhattan distance.
    pub attack_range: i32,
    pub move_period: u32,
    pub attack_period: u32,
    /// Ticks needed to produce a unit of this kind.
    pub produce_period: u32,
    pub harvest_period: u32,
    pub return_period: u32,
    pub harvest_amount: i32,
}

impl UnitStats {
    pub fn can_attack(&self) -> bool {
        self.attack_damage > 0
    }
}

/// Per-kind stats. Defaults follow the familiar MicroRTS numbers; every value
/// can be overridden from a key-value document (`Worker.cost: 1`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StatsTable {
    stats: [UnitStats; 6],
}

const FIELDS: [&str; 10] = [
    "hit_points",
    "cost",
    "attack_damage",
    "attack_range",
    "move_period",
    "attack_period",
    "produce_period",
    "harvest_period",
    "return_period",
    "harvest_amount",
];

impl Default for StatsTable {
    fn default() -> Self {
        let base = UnitStats {
            hit_points: 1,
            cost: 1,
            attack_damage: 0,
            attack_range: 1,
            move_period: 8,
            attack_period: 5,
            produce_period: 100,
            harvest_period: 20,
            return_period: 10,
            harvest_amount: 0,
        };
        let stats = [
            UnitStats {
                hit_points: 10,
                cost: 10,
                produce_period: 250,
                ..base
            },
            UnitStats {
                hit_points: 4,
                cost: 5,
                produce_period: 200,
                ..base
            },
            UnitStats {
                hit_points: 1,
                cost: 1,
                attack_damage: 1,
                produce_period: 50,
                harvest_amount: 1,
                ..base
            },
            UnitStats {
                hit_points: 4,
                cost: 2,
                attack_damage: 2,
                produce_period: 100,
                ..base
            },
            UnitStats {
                hit_points: 8,
                cost: 3,
                attack_damage: 4,
                produce_period: 120,
                ..base
            },
            UnitStats {
                hit_points: 1,
                cost: 2,
                attack_damage: 1,
                attack_range: 3,
                produce_period: 100,
                ..base
            },
        ];
        StatsTable { stats }
    }
}

impl StatsTable {
    pub fn get(&self, kind: UnitKind) -> &UnitStats {
        &self.stats[kind.index()]
    }

    pub fn get_mut(&mut self, kind: UnitKind) -> &mut UnitStats {
        &mut self.stats[kind.index()]
    }

    /// Parses overrides on top of the defaults.
    pub fn parse(text: &str) -> Result<StatsTable, ConfigError> {
        let kv = KeyValues::parse(text)?;
        let mut table = StatsTable::default();
        for (key, value) in kv.iter() {
            let (kind, field) = key
                .split_once('.')
                .ok_or_else(|| ConfigError::UnknownKey(key.to_string()))?;
            let kind =
                UnitKind::from_name(kind).ok_or_else(|| ConfigError::UnknownKey(key.to_string()))?;
            let s = table.get_mut(kind);
            match field {
                "hit_points" => s.hit_points = parse_value(key, value)?,
                "cost" => s.cost = parse_value(key, value)?,
                "attack_damage" => s.attack_damage = parse_value(key, value)?,
                "attack_range" => s.attack_range = parse_value(key, value)?,
                "move_period" => s.move_period = parse_value(key, value)?,
                "attack_period" => s.attack_period = parse_value(key, value)?,
                "produce_period" => s.produce_period = parse_value(key, value)?,
                "harvest_period" => s.harvest_period = parse_value(key, value)?,
                "return_period" => s.return_period = parse_value(key, value)?,
                "harvest_amount" => s.harvest_amount = parse_value(key, value)?,
                _ => return Err(ConfigError::UnknownKey(key.to_string())),
            }
        }
        table.validate()?;
        Ok(table)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |kind: UnitKind, message: &str| ConfigError::InvalidValue {
            key: kind.name().to_string(),
            message: message.to_string(),
        };
        for kind in UnitKind::ALL {
            let s = self.get(kind);
            if s.hit_points <= 0 {
                return Err(bad(kind, "hit_points must be positive"));
            }
            if s.cost < 0 || s.attack_damage < 0 || s.harvest_amount < 0 {
                return Err(bad(kind, "cost, damage and harvest amount must be nonnegative"));
            }
            if s.attack_range < 1 {
                return Err(bad(kind, "attack_range must be positive"));
            }
            if [
                s.move_period,
                s.attack_period,
                s.produce_period,
                s.harvest_period,
                s.return_period,
            ]
            .contains(&0)
            {
                return Err(bad(kind, "periods must be at least 1"));
            }
            let ranged = kind == UnitKind::Ranged;
            if s.can_attack() && ranged != (s.attack_range > 1) {
                return Err(bad(kind, "only Ranged units attack from farther than 1 cell"));
            }
        }
        Ok(())
    }

    pub fn to_document(&self) -> String {
        let mut out = format!("format: {FORMAT_VERSION}\n");
        for kind in UnitKind::ALL {
            let s = self.get(kind);
            let values = [
                s.hit_points as i64,
                s.cost as i64,
                s.attack_damage as i64,
                s.attack_range as i64,
                s.move_period as i64,
                s.attack_period as i64,
                s.produce_period as i64,
                s.harvest_period as i64,
                s.return_period as i64,
                s.harvest_amount as i64,
            ];
            for (field, value) in FIELDS.iter().zip(values) {
                let _ = writeln!(out, "{}.{}: {}", kind.name(), field, value);
            }
        }
        out
    }
}
