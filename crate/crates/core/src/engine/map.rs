//! ASCII map documents.
//!
//! ```text
//! format: 1
//! name: NoWhereToRun
//! size: 9x8
//! max_ticks: 3000
//! start_resources: 5,5
//! grid:
//! b........
//! ...
//! resources:
//! 0,2: 20
//! units:
//! 0 Light 3,4
//! ```
//!
//! Grid cells: `.` empty, `#` wall, `R` resource pile, `b`/`B` Base,
//! `w`/`W` Worker, `x`/`X` Barracks (lowercase player 0, uppercase player 1).
//! Every `R` needs an amount in the `resources:` footer. The optional `units:`
//! footer places units of any kind as `<owner> <Kind> <x>,<y>`.

use std::fmt::Write as _;

use thiserror::Error;

use super::unit::{Pos, UnitKind};
use crate::config::FORMAT_VERSION;

#[derive(Debug, Error, PartialEq)]
pub enum MapError {
    #[error("map parse error at {line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("map invariant violated: {0}")]
    Invariant(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StartUnit {
    pub owner: u8,
    pub kind: UnitKind,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameMap {
    pub name: String,
    pub width: i32,
    pub height: i32,
    walls: Vec<bool>,
    /// Sorted row-major.
    pub piles: Vec<(Pos, i32)>,
    /// Sorted row-major.
    pub start_units: Vec<StartUnit>,
    pub start_resources: [i32; 2],
    pub max_ticks: u32,
}

fn row_major(p: Pos) -> (i32, i32) {
    (p.y, p.x)
}

fn grid_char(owner: u8, kind: UnitKind) -> Option<char> {
    let c = match kind {
        UnitKind::Base => 'b',
        UnitKind::Worker => 'w',
        UnitKind::Barracks => 'x',
        _ => return None,
    };
    Some(if owner == 0 { c } else { c.to_ascii_uppercase() })
}

impl GameMap {
    pub fn in_bounds(&self, p: Pos) -> bool {
        p.x >= 0 && p.y >= 0 && p.x < self.width && p.y < self.height
    }

    pub fn cell_index(&self, p: Pos) -> usize {
        (p.y * self.width + p.x) as usize
    }

    pub fn is_wall(&self, p: Pos) -> bool {
        self.walls[self.cell_index(p)]
    }

    pub fn cells(&self) -> usize {
        (self.width * self.height) as usize
    }

    pub fn parse(text: &str) -> Result<GameMap, MapError> {
        Parser::new(text).parse()
    }

    /// Canonical document: fixed header order, pile and unit footers sorted
    /// row-major.
    pub fn to_document(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "format: {FORMAT_VERSION}");
        let _ = writeln!(out, "name: {}", self.name);
        let _ = writeln!(out, "size: {}x{}", self.width, self.height);
        let _ = writeln!(out, "max_ticks: {}", self.max_ticks);
        let _ = writeln!(
            out,
            "start_resources: {},{}",
            self.start_resources[0], self.start_resources[1]
        );
        out.push_str("grid:\n");
        let mut rows: Vec<Vec<char>> =
            vec![vec!['.'; self.width as usize]; self.height as usize];
        for y in 0..self.height {
            for x in 0..self.width {
                if self.is_wall(Pos::new(x, y)) {
                    rows[y as usize][x as usize] = '#';
                }
            }
        }
        for (p, _) in &self.piles {
            rows[p.y as usize][p.x as usize] = 'R';
        }
        let mut extra = Vec::new();
        for u in &self.start_units {
            match grid_char(u.owner, u.kind) {
                Some(c) => rows[u.pos.y as usize][u.pos.x as usize] = c,
                None => extra.push(*u),
            }
        }
        for row in rows {
            out.extend(row);
            out.push('\n');
        }
        out.push_str("resources:\n");
        for (p, amount) in &self.piles {
            let _ = writeln!(out, "{}: {}", p, amount);
        }
        if !extra.is_empty() {
            out.push_str("units:\n");
            for u in extra {
                let _ = writeln!(out, "{} {} {}", u.owner, u.kind, u.pos);
            }
        }
        out
    }

    fn validate(&self) -> Result<(), MapError> {
        let inv = |m: String| Err(MapError::Invariant(m));
        if self.width <= 0 || self.height <= 0 {
            return inv("map dimensions must be positive".into());
        }
        if self.max_ticks == 0 {
            return inv("max_ticks must be positive".into());
        }
        if self.start_resources.iter().any(|r| *r < 0) {
            return inv("start resources must be nonnegative".into());
        }
        let mut occupied = vec![false; self.cells()];
        for (p, amount) in &self.piles {
            if !self.in_bounds(*p) {
                return inv(format!("resource pile at {p} is outside the map"));
            }
            if *amount <= 0 {
                return inv(format!("resource pile at {p} must hold a positive amount"));
            }
            if self.is_wall(*p) {
                return inv(format!("resource pile at {p} is on a wall"));
            }
            let i = self.cell_index(*p);
            if occupied[i] {
                return inv(format!("two resource piles at {p}"));
            }
            occupied[i] = true;
        }
        for u in &self.start_units {
            if !self.in_bounds(u.pos) {
                return inv(format!("{} at {} is outside the map", u.kind, u.pos));
            }
            if self.is_wall(u.pos) {
                return inv(format!("{} at {} is on a wall", u.kind, u.pos));
            }
            let i = self.cell_index(u.pos);
            if occupied[i] {
                return inv(format!("cell {} holds more than one object", u.pos));
            }
            occupied[i] = true;
        }
        for player in 0..2u8 {
            if !self.start_units.iter().any(|u| u.owner == player) {
                return inv(format!("player {player} has no starting units"));
            }
        }
        Ok(())
    }
}

struct Parser<'a> {
    lines: Vec<(usize, &'a str)>,
    at: usize,
}

fn perr<T>(line: usize, column: usize, message: impl Into<String>) -> Result<T, MapError> {
    Err(MapError::Parse {
        line,
        column,
        message: message.into(),
    })
}

fn parse_pos(s: &str, line: usize) -> Result<Pos, MapError> {
    let (x, y) = match s.split_once(',') {
        Some(p) => p,
        None => return perr(line, 1, format!("expected `x,y`, found `{s}`")),
    };
    match (x.trim().parse(), y.trim().parse()) {
        (Ok(x), Ok(y)) => Ok(Pos::new(x, y)),
        _ => perr(line, 1, format!("invalid coordinates `{s}`")),
    }
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        let lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim_end()))
            .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with(';'))
            .collect();
        Parser { lines, at: 0 }
    }

    fn next(&mut self) -> Option<(usize, &'a str)> {
        let l = self.lines.get(self.at).copied();
        self.at += 1;
        l
    }

    fn last_line(&self) -> usize {
        self.lines.last().map(|l| l.0).unwrap_or(0)
    }

    fn header(&mut self, key: &str) -> Result<(usize, &'a str), MapError> {
        let Some((n, line)) = self.next() else {
            return perr(self.last_line() + 1, 1, format!("expected `{key}:`"));
        };
        match line.split_once(':') {
            Some((k, v)) if k.trim() == key => Ok((n, v.trim())),
            _ => perr(n, 1, format!("expected `{key}:`, found `{line}`")),
        }
    }

    fn parse(mut self) -> Result<GameMap, MapError> {
        let (n, v) = self.header("format")?;
        if v != FORMAT_VERSION.to_string() {
            return perr(n, 9, format!("unsupported format `{v}`"));
        }
        let (_, name) = self.header("name")?;
        let (n, size) = self.header("size")?;
        let (width, height) = match size.split_once('x') {
            Some((w, h)) => match (w.trim().parse::<i32>(), h.trim().parse::<i32>()) {
                (Ok(w), Ok(h)) if w > 0 && h > 0 => (w, h),
                _ => return perr(n, 7, format!("invalid size `{size}`")),
            },
            None => return perr(n, 7, format!("expected `WxH`, found `{size}`")),
        };
        let (n, max_ticks) = self.header("max_ticks")?;
        let max_ticks: u32 = match max_ticks.parse() {
            Ok(t) => t,
            Err(_) => return perr(n, 12, format!("invalid max_ticks `{max_ticks}`")),
        };
        let (n, res) = self.header("start_resources")?;
        let start_resources = match res.split_once(',') {
            Some((a, b)) => match (a.trim().parse(), b.trim().parse()) {
                (Ok(a), Ok(b)) => [a, b],
                _ => return perr(n, 18, format!("invalid start_resources `{res}`")),
            },
            None => return perr(n, 18, format!("expected `P0,P1`, found `{res}`")),
        };
        let (n, rest) = self.header("grid")?;
        if !rest.is_empty() {
            return perr(n, 6, "unexpected text after `grid:`");
        }

        let mut walls = vec![false; (width * height) as usize];
        let mut pile_cells = Vec::new();
        let mut start_units = Vec::new();
        for y in 0..height {
            let Some((n, row)) = self.next() else {
                return perr(self.last_line() + 1, 1, format!("expected {height} grid rows"));
            };
            let chars: Vec<char> = row.chars().collect();
            if chars.len() != width as usize {
                return perr(
                    n,
                    1,
                    format!("grid row has {} cells, expected {width}", chars.len()),
                );
            }
            for (x, c) in chars.into_iter().enumerate() {
                let pos = Pos::new(x as i32, y);
                let unit = |owner: u8, kind| StartUnit { owner, kind, pos };
                match c {
                    '.' => {}
                    '#' => walls[(y * width) as usize + x] = true,
                    'R' => pile_cells.push(pos),
                    'b' => start_units.push(unit(0, UnitKind::Base)),
                    'B' => start_units.push(unit(1, UnitKind::Base)),
                    'w' => start_units.push(unit(0, UnitKind::Worker)),
                    'W' => start_units.push(unit(1, UnitKind::Worker)),
                    'x' => start_units.push(unit(0, UnitKind::Barracks)),
                    'X' => start_units.push(unit(1, UnitKind::Barracks)),
                    other => return perr(n, x + 1, format!("unknown cell character `{other}`")),
                }
            }
        }

        let mut piles = Vec::new();
        let mut section = None;
        while let Some((n, line)) = self.next() {
            let t = line.trim();
            if t == "resources:" || t == "units:" {
                section = Some(t);
                continue;
            }
            match section {
                Some("resources:") => {
                    let Some((p, amount)) = t.split_once(':') else {
                        return perr(n, 1, format!("expected `x,y: amount`, found `{t}`"));
                    };
                    let pos = parse_pos(p, n)?;
                    let amount: i32 = match amount.trim().parse() {
                        Ok(a) => a,
                        Err(_) => return perr(n, p.len() + 2, "invalid pile amount"),
                    };
                    if !pile_cells.contains(&pos) {
                        return perr(n, 1, format!("no `R` cell at {pos}"));
                    }
                    if piles.iter().any(|(q, _)| *q == pos) {
                        return perr(n, 1, format!("duplicate amount for pile {pos}"));
                    }
                    piles.push((pos, amount));
                }
                Some("units:") => {
                    let parts: Vec<&str> = t.split_whitespace().collect();
                    if parts.len() != 3 {
                        return perr(n, 1, format!("expected `<owner> <Kind> x,y`, found `{t}`"));
                    }
                    let owner = match parts[0] {
                        "0" => 0,
                        "1" => 1,
                        o => return perr(n, 1, format!("invalid owner `{o}`")),
                    };
                    let Some(kind) = UnitKind::from_name(parts[1]) else {
                        return perr(n, parts[0].len() + 2, format!("unknown unit kind `{}`", parts[1]));
                    };
                    let pos = parse_pos(parts[2], n)?;
                    start_units.push(StartUnit { owner, kind, pos });
                }
                _ => return perr(n, 1, format!("unexpected line `{t}`")),
            }
        }
        if let Some(missing) = pile_cells.iter().find(|p| !piles.iter().any(|(q, _)| q == *p)) {
            return Err(MapError::Invariant(format!(
                "resource pile at {missing} has no amount"
            )));
        }
        piles.sort_by_key(|(p, _)| row_major(*p));
        start_units.sort_by_key(|u| row_major(u.pos));

        let map = GameMap {
            name: name.to_string(),
            width,
            height,
            walls,
            piles,
            start_units,
            start_resources,
            max_ticks,
        };
        map.validate()?;
        Ok(map)
    }
}

/// Shipped map documents, by file stem.
pub const SHIPPED_MAPS: [(&str, &str); 7] = [
    ("nwr_9x8", include_str!("../../maps/nwr_9x8.map")),
    ("ins_15x14", include_str!("../../maps/ins_15x14.map")),
    ("lmo_16x8", include_str!("../../maps/lmo_16x8.map")),
    ("brr_24x24", include_str!("../../maps/brr_24x24.map")),
    ("chb_32x32", include_str!("../../maps/chb_32x32.map")),
    ("bbb_64x64", include_str!("../../maps/bbb_64x64.map")),
    ("basesworkers_24x24", include_str!("../../maps/basesworkers_24x24.map")),
];

pub fn shipped_document(stem: &str) -> Option<&'static str> {
    SHIPPED_MAPS.iter().find(|(s, _)| *s == stem).map(|(_, d)| *d)
}

/// Loads a shipped map by file stem (`nwr_9x8`) or by map name (`NoWhereToRun`).
pub fn load_shipped(name: &str) -> Result<GameMap, MapError> {
    if let Some(doc) = shipped_document(name) {
        return GameMap::parse(doc);
    }
    for (_, doc) in SHIPPED_MAPS {
        let map = GameMap::parse(doc)?;
        if map.name.eq_ignore_ascii_case(name) {
            return Ok(map);
        }
    }
    Err(MapError::Invariant(format!("no shipped map named `{name}`")))
}
