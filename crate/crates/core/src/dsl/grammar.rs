use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Nonterminal {
    S,
    B,
    C,
    T,
    N,
    D,
    Op,
    Tp,
}

impl Nonterminal {
    pub const ALL: [Nonterminal; 8] = [
        Nonterminal::S,
        Nonterminal::B,
        Nonterminal::C,
        Nonterminal::T,
        Nonterminal::N,
        Nonterminal::D,
        Nonterminal::Op,
        Nonterminal::Tp,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Nonterminal::S => "S",
            Nonterminal::B => "B",
            Nonterminal::C => "C",
            Nonterminal::T => "T",
            Nonterminal::N => "N",
            Nonterminal::D => "D",
            Nonterminal::Op => "Op",
            Nonterminal::Tp => "Tp",
        }
    }

    pub fn from_name(name: &str) -> Option<Nonterminal> {
        Nonterminal::ALL.into_iter().find(|n| n.name() == name)
    }

    /// Nonterminals whose expansions are single literals.
    pub fn is_literal(self) -> bool {
        !matches!(self, Nonterminal::S | Nonterminal::B | Nonterminal::C)
    }
}

impl fmt::Display for Nonterminal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symbol {
    Terminal(&'static str),
    Nonterminal(Nonterminal),
}

pub type RuleId = u16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Production {
    pub id: RuleId,
    pub lhs: Nonterminal,
    pub rhs: &'static [Symbol],
}

impl Production {
    /// The terminal that names this production (`for`, `b3`, `Worker`, ...).
    pub fn head(&self) -> &'static str {
        self.rhs
            .iter()
            .find_map(|s| match s {
                Symbol::Terminal(t) => Some(*t),
                Symbol::Nonterminal(_) => None,
            })
            .unwrap_or("")
    }

    /// Nonterminal symbols on the right-hand side, in order.
    pub fn arguments(&self) -> impl Iterator<Item = Nonterminal> + '_ {
        self.rhs.iter().filter_map(|s| match s {
            Symbol::Nonterminal(n) => Some(*n),
            Symbol::Terminal(_) => None,
        })
    }
}

pub const SEQ: RuleId = 0;
pub const FOR: RuleId = 1;
pub const IF: RuleId = 2;
pub const IF_ELSE: RuleId = 3;
pub const COMMAND: RuleId = 4;
pub const EMPTY: RuleId = 5;
const B_BASE: RuleId = 6;
const C_BASE: RuleId = 20;
const T_BASE: RuleId = 27;
const N_BASE: RuleId = 33;
const D_BASE: RuleId = 49;
const OP_BASE: RuleId = 54;
const TP_BASE: RuleId = 61;

/// Rule id of boolean function `b{i}`, 1-based.
pub const fn bool_rule(i: u16) -> RuleId {
    B_BASE + i - 1
}

/// Rule id of command function `c{i}`, 1-based.
pub const fn command_rule(i: u16) -> RuleId {
    C_BASE + i - 1
}

use Nonterminal as Nt;
use Symbol::{Nonterminal as N, Terminal as K};

const S_: Symbol = N(Nt::S);
const B_: Symbol = N(Nt::B);
const C_: Symbol = N(Nt::C);
const T_: Symbol = N(Nt::T);
const N_: Symbol = N(Nt::N);
const D_: Symbol = N(Nt::D);
const OP_: Symbol = N(Nt::Op);
const TP_: Symbol = N(Nt::Tp);

const fn p(id: RuleId, lhs: Nonterminal, rhs: &'static [Symbol]) -> Production {
    Production { id, lhs, rhs }
}

pub const UNIT_TYPES: [&str; 6] = ["Base", "Barracks", "Ranged", "Heavy", "Light", "Worker"];
pub const NUMBERS: [i32; 16] = [0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 15, 20, 25, 50, 100];
pub const DIRECTIONS: [&str; 5] = ["EnemyDir", "Up", "Down", "Right", "Left"];
pub const CRITERIA: [&str; 7] = [
    "Strongest",
    "Weakest",
    "Closest",
    "Farthest",
    "LessHealthy",
    "MostHealthy",
    "Random",
];
pub const PLAYERS: [&str; 2] = ["Ally", "Enemy"];

/// Every production of the policy language, indexed by rule id.
pub static PRODUCTIONS: [Production; 63] = [
    p(SEQ, Nt::S, &[S_, S_]),
    p(FOR, Nt::S, &[K("for"), S_]),
    p(IF, Nt::S, &[K("if"), B_, K("then"), S_]),
    p(IF_ELSE, Nt::S, &[K("if"), B_, K("then"), S_, K("else"), S_]),
    p(COMMAND, Nt::S, &[C_]),
    p(EMPTY, Nt::S, &[K("empty")]),
    p(6, Nt::B, &[K("b1"), T_, N_]),
    p(7, Nt::B, &[K("b2"), T_, N_]),
    p(8, Nt::B, &[K("b3"), T_, N_]),
    p(9, Nt::B, &[K("b4"), N_]),
    p(10, Nt::B, &[K("b5"), N_]),
    p(11, Nt::B, &[K("b6"), N_]),
    p(12, Nt::B, &[K("b7"), T_]),
    p(13, Nt::B, &[K("b8")]),
    p(14, Nt::B, &[K("b9")]),
    p(15, Nt::B, &[K("b10")]),
    p(16, Nt::B, &[K("b11")]),
    p(17, Nt::B, &[K("b12")]),
    p(18, Nt::B, &[K("b13")]),
    p(19, Nt::B, &[K("b14")]),
    p(20, Nt::C, &[K("c1"), T_, D_, N_]),
    p(21, Nt::C, &[K("c2"), T_, D_, N_]),
    p(22, Nt::C, &[K("c3"), TP_, OP_]),
    p(23, Nt::C, &[K("c4"), OP_]),
    p(24, Nt::C, &[K("c5"), N_]),
    p(25, Nt::C, &[K("c6")]),
    p(26, Nt::C, &[K("c7")]),
    p(27, Nt::T, &[K("Base")]),
    p(28, Nt::T, &[K("Barracks")]),
    p(29, Nt::T, &[K("Ranged")]),
    p(30, Nt::T, &[K("Heavy")]),
    p(31, Nt::T, &[K("Light")]),
    p(32, Nt::T, &[K("Worker")]),
    p(33, Nt::N, &[K("0")]),
    p(34, Nt::N, &[K("1")]),
    p(35, Nt::N, &[K("2")]),
    p(36, Nt::N, &[K("3")]),
    p(37, Nt::N, &[K("4")]),
    p(38, Nt::N, &[K("5")]),
    p(39, Nt::N, &[K("6")]),
    p(40, Nt::N, &[K("7")]),
    p(41, Nt::N, &[K("8")]),
    p(42, Nt::N, &[K("9")]),
    p(43, Nt::N, &[K("10")]),
    p(44, Nt::N, &[K("15")]),
    p(45, Nt::N, &[K("20")]),
    p(46, Nt::N, &[K("25")]),
    p(47, Nt::N, &[K("50")]),
    p(48, Nt::N, &[K("100")]),
    p(49, Nt::D, &[K("EnemyDir")]),
    p(50, Nt::D, &[K("Up")]),
    p(51, Nt::D, &[K("Down")]),
    p(52, Nt::D, &[K("Right")]),
    p(53, Nt::D, &[K("Left")]),
    p(54, Nt::Op, &[K("Strongest")]),
    p(55, Nt::Op, &[K("Weakest")]),
    p(56, Nt::Op, &[K("Closest")]),
    p(57, Nt::Op, &[K("Farthest")]),
    p(58, Nt::Op, &[K("LessHealthy")]),
    p(59, Nt::Op, &[K("MostHealthy")]),
    p(60, Nt::Op, &[K("Random")]),
    p(61, Nt::Tp, &[K("Ally")]),
    p(62, Nt::Tp, &[K("Enemy")]),
];

pub fn production(id: RuleId) -> &'static Production {
    &PRODUCTIONS[id as usize]
}

/// Index of a literal rule within its nonterminal (`Worker` is 5 in T).
pub fn literal_index(id: RuleId) -> usize {
    let base = match production(id).lhs {
        Nt::T => T_BASE,
        Nt::N => N_BASE,
        Nt::D => D_BASE,
        Nt::Op => OP_BASE,
        Nt::Tp => TP_BASE,
        Nt::B => B_BASE,
        Nt::C => C_BASE,
        Nt::S => 0,
    };
    (id - base) as usize
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum GrammarError {
    #[error("nonterminal {0} is reachable but has no productions")]
    Unproductive(Nonterminal),
}

/// A start symbol plus the productions available for each nonterminal.
/// Restricted grammars keep a subset of the full rule table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grammar {
    start: Nonterminal,
    rules: [Vec<RuleId>; 8],
}

impl Default for Grammar {
    fn default() -> Self {
        Grammar::full()
    }
}

impl Grammar {
    pub fn full() -> Grammar {
        Grammar::restricted(Nt::S, |_| true).expect("full grammar is productive")
    }

    /// Keeps the productions accepted by `keep`. Every nonterminal reachable
    /// from `start` must retain at least one production.
    pub fn restricted(
        start: Nonterminal,
        keep: impl Fn(&Production) -> bool,
    ) -> Result<Grammar, GrammarError> {
        let mut rules: [Vec<RuleId>; 8] = Default::default();
        for p in PRODUCTIONS.iter().filter(|p| keep(p)) {
            rules[p.lhs.index()].push(p.id);
        }
        let g = Grammar { start, rules };
        let mut seen = [false; 8];
        let mut stack = vec![start];
        while let Some(nt) = stack.pop() {
            if std::mem::replace(&mut seen[nt.index()], true) {
                continue;
            }
            if g.rules_for(nt).is_empty() {
                return Err(GrammarError::Unproductive(nt));
            }
            for &r in g.rules_for(nt) {
                stack.extend(production(r).arguments());
            }
        }
        Ok(g)
    }

    pub fn start(&self) -> Nonterminal {
        self.start
    }

    pub fn with_start(&self, start: Nonterminal) -> Result<Grammar, GrammarError> {
        let rules = self.rules.clone();
        Grammar::restricted(start, |p| rules[p.lhs.index()].contains(&p.id))
    }

    pub fn rules_for(&self, nt: Nonterminal) -> &[RuleId] {
        &self.rules[nt.index()]
    }

    pub fn contains(&self, rule: RuleId) -> bool {
        self.rules_for(production(rule).lhs).contains(&rule)
    }
}
