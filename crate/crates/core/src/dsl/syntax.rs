//! Concrete syntax for programs (`.mrl` files).
//!
//! ```text
//! for(Unit u) {
//!     if(u.CanAttack()) then {
//!         u.attack(Closest)
//!     } else {
//!         u.harvest(1)
//!     }
//! }
//! ```
//!
//! Layout is free: whitespace and `;` separate statements, `{ ... }` groups a
//! sequence, and a loop or branch body is a single statement or a braced
//! block. `then` and a trailing `:` after a condition are optional, as is the
//! `u.` prefix on calls. Function names match case-insensitively. `#` starts
//! a comment. `empty` is the empty statement.

use std::fmt;

use thiserror::Error;

use super::ast::{Ast, Node};
use super::grammar::{
    bool_rule, command_rule, production, Nonterminal, Production, RuleId, COMMAND, EMPTY, FOR, IF,
    IF_ELSE, PRODUCTIONS, SEQ,
};

/// Display names of b1..b14 followed by accepted aliases.
const BOOL_NAMES: [&[&str]; 14] = [
    &["HasNumberOfUnits"],
    &["OpponentHasNumberOfUnits"],
    &["HasLessNumberOfUnits"],
    &["HaveQtdUnitsAttacking"],
    &["HasUnitWithinDistanceFromOpponent", "HasUnitWithinDistFromOp"],
    &["HasNumberOfWorkersHarvesting"],
    &["is_Type", "IsType"],
    &["IsBuilder"],
    &["CanAttack"],
    &["HasUnitThatKillsInOneAttack"],
    &[
        "OpponentHasUnitThatKillsUnitInOneAttack",
        "OpHasUnitKillsInOneAttack",
    ],
    &["HasUnitInOpponentRange"],
    &["OpponentHasUnitInPlayerRange"],
    &["CanHarvest"],
];

const COMMAND_NAMES: [&str; 7] = [
    "build",
    "train",
    "moveToUnit",
    "attack",
    "harvest",
    "idle",
    "moveAway",
];

pub fn function_name(rule: RuleId) -> &'static str {
    let prod = production(rule);
    match prod.lhs {
        Nonterminal::B => BOOL_NAMES[(rule - bool_rule(1)) as usize][0],
        Nonterminal::C => COMMAND_NAMES[(rule - command_rule(1)) as usize],
        _ => prod.head(),
    }
}

fn lookup_function(name: &str) -> Option<RuleId> {
    for (i, names) in BOOL_NAMES.iter().enumerate() {
        if names.iter().any(|n| n.eq_ignore_ascii_case(name)) {
            return Some(bool_rule(i as u16 + 1));
        }
    }
    for (i, n) in COMMAND_NAMES.iter().enumerate() {
        if n.eq_ignore_ascii_case(name) {
            return Some(command_rule(i as u16 + 1));
        }
    }
    // Raw grammar names (`b3`, `c6`) are accepted too.
    PRODUCTIONS
        .iter()
        .find(|p| matches!(p.lhs, Nonterminal::B | Nonterminal::C) && p.head().eq_ignore_ascii_case(name))
        .map(|p| p.id)
}

fn literals(nt: Nonterminal) -> impl Iterator<Item = &'static Production> {
    PRODUCTIONS.iter().filter(move |p| p.lhs == nt)
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub expected: Vec<String>,
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "line {}, column {}: expected {}, found {}",
            self.line,
            self.column,
            self.expected.join(" or "),
            self.found
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Word(String),
    Punct(char),
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

impl Token {
    fn describe(&self) -> String {
        match &self.tok {
            Tok::Word(w) => format!("`{w}`"),
            Tok::Punct(c) => format!("`{c}`"),
            Tok::Eof => "end of input".to_string(),
        }
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(&self.tok, Tok::Word(s) if s.eq_ignore_ascii_case(w))
    }

    fn is_punct(&self, c: char) -> bool {
        self.tok == Tok::Punct(c)
    }
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let column = i + 1;
            if c == '#' {
                break;
            }
            if c.is_whitespace() {
                i += 1;
            } else if c.is_ascii_alphanumeric() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push(Token {
                    tok: Tok::Word(chars[start..i].iter().collect()),
                    line: ln + 1,
                    column,
                });
            } else if "(){},;:.".contains(c) {
                out.push(Token {
                    tok: Tok::Punct(c),
                    line: ln + 1,
                    column,
                });
                i += 1;
            } else {
                return Err(ParseError {
                    line: ln + 1,
                    column,
                    expected: vec!["a name, number or punctuation".into()],
                    found: format!("`{c}`"),
                });
            }
        }
    }
    let line = text.lines().count().max(1);
    let column = text.lines().last().map_or(0, |l| l.chars().count()) + 1;
    out.push(Token {
        tok: Tok::Eof,
        line,
        column,
    });
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

const STATEMENT_START: [&str; 5] = ["`for`", "`if`", "`empty`", "`{`", "a command"];

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek_at(&self, offset: usize) -> &Token {
        &self.tokens[(self.pos + offset).min(self.tokens.len() - 1)]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error<S: ToString>(&self, expected: impl IntoIterator<Item = S>) -> ParseError {
        let t = self.peek();
        ParseError {
            line: t.line,
            column: t.column,
            expected: expected.into_iter().map(|s| s.to_string()).collect(),
            found: t.describe(),
        }
    }

    fn expect_punct(&mut self, c: char) -> Result<(), ParseError> {
        if self.peek().is_punct(c) {
            self.bump();
            Ok(())
        } else {
            Err(self.error([format!("`{c}`")]))
        }
    }

    fn expect_word(&mut self, w: &str) -> Result<(), ParseError> {
        if self.peek().is_word(w) {
            self.bump();
            Ok(())
        } else {
            Err(self.error([format!("`{w}`")]))
        }
    }

    fn skip_separators(&mut self) {
        while self.peek().is_punct(';') {
            self.bump();
        }
    }

    fn sequence(&mut self, closing: Option<char>) -> Result<Node, ParseError> {
        let mut stmts = Vec::new();
        loop {
            self.skip_separators();
            let at_end = match closing {
                Some(c) => self.peek().is_punct(c),
                None => self.peek().tok == Tok::Eof,
            };
            if at_end {
                break;
            }
            stmts.push(self.statement()?);
        }
        let Some(last) = stmts.pop() else {
            return Err(self.error(STATEMENT_START));
        };
        Ok(stmts
            .into_iter()
            .rev()
            .fold(last, |rest, s| Node::apply(SEQ, vec![s, rest])))
    }

    fn statement(&mut self) -> Result<Node, ParseError> {
        self.skip_separators();
        let t = self.peek().clone();
        if t.is_punct('{') {
            self.bump();
            let seq = self.sequence(Some('}'))?;
            self.expect_punct('}')?;
            return Ok(seq);
        }
        if t.is_word("for") && self.peek_at(1).is_punct('(') {
            self.bump();
            self.expect_punct('(')?;
            self.expect_word("Unit")?;
            match self.peek().tok {
                Tok::Word(_) => {
                    self.bump();
                }
                _ => return Err(self.error(["a loop variable"])),
            }
            self.expect_punct(')')?;
            if self.peek().is_punct(':') {
                self.bump();
            }
            let body = self.body()?;
            return Ok(Node::apply(FOR, vec![body]));
        }
        if t.is_word("if") && self.peek_at(1).is_punct('(') {
            self.bump();
            self.expect_punct('(')?;
            let cond = self.call(Nonterminal::B)?;
            self.expect_punct(')')?;
            let mut optional = vec!["`then`", "`:`"];
            if self.peek().is_word("then") {
                self.bump();
                optional.remove(0);
            }
            if self.peek().is_punct(':') {
                self.bump();
                optional.clear();
            }
            let then = self.body().map_err(|mut e| {
                if e.expected == STATEMENT_START {
                    e.expected = optional.iter().chain(STATEMENT_START.iter()).map(|s| s.to_string()).collect();
                }
                e
            })?;
            if self.peek().is_word("else") {
                self.bump();
                if self.peek().is_punct(':') {
                    self.bump();
                }
                let otherwise = self.body()?;
                return Ok(Node::apply(IF_ELSE, vec![cond, then, otherwise]));
            }
            return Ok(Node::apply(IF, vec![cond, then]));
        }
        if t.is_word("empty") {
            self.bump();
            return Ok(Node::apply(EMPTY, vec![]));
        }
        if matches!(t.tok, Tok::Word(_)) {
            let cmd = self.call(Nonterminal::C)?;
            return Ok(Node::apply(COMMAND, vec![cmd]));
        }
        Err(self.error(STATEMENT_START))
    }

    fn body(&mut self) -> Result<Node, ParseError> {
        self.skip_separators();
        if matches!(self.peek().tok, Tok::Eof) || self.peek().is_punct('}') || self.peek().is_word("else") {
            return Err(self.error(STATEMENT_START));
        }
        self.statement()
    }

    /// `[u.]name(args)` for a B or C function.
    fn call(&mut self, kind: Nonterminal) -> Result<Node, ParseError> {
        let what = if kind == Nonterminal::B { "a condition" } else { "a command" };
        if self.peek().is_word("u") && self.peek_at(1).is_punct('.') {
            self.bump();
            self.bump();
        }
        let name = match &self.peek().tok {
            Tok::Word(w) => w.clone(),
            _ => return Err(self.error([what])),
        };
        let rule = match lookup_function(&name) {
            Some(r) if production(r).lhs == kind => r,
            _ => return Err(self.error([what])),
        };
        self.bump();
        self.expect_punct('(')?;
        let mut args = Vec::new();
        for (i, nt) in production(rule).arguments().enumerate() {
            if i > 0 {
                self.expect_punct(',')?;
            }
            args.push(self.literal(nt)?);
        }
        self.expect_punct(')')?;
        Ok(Node::apply(rule, args))
    }

    fn literal(&mut self, nt: Nonterminal) -> Result<Node, ParseError> {
        if let Tok::Word(w) = &self.peek().tok {
            if let Some(p) = literals(nt).find(|p| p.head().eq_ignore_ascii_case(w)) {
                self.bump();
                return Ok(Node::apply(p.id, vec![]));
            }
        }
        Err(self.error(literals(nt).map(|p| format!("`{}`", p.head()))))
    }
}

/// Parses a program rooted at S.
pub fn parse(text: &str) -> Result<Ast, ParseError> {
    parse_as(text, Nonterminal::S)
}

/// Parses text whose root is `nt`: a statement sequence for S, a single call
/// for B and C, a literal otherwise.
pub fn parse_as(text: &str, nt: Nonterminal) -> Result<Ast, ParseError> {
    let mut p = Parser {
        tokens: lex(text)?,
        pos: 0,
    };
    let node = match nt {
        Nonterminal::S => p.sequence(None)?,
        Nonterminal::B | Nonterminal::C => {
            let n = p.call(nt)?;
            p.skip_separators();
            n
        }
        _ => p.literal(nt)?,
    };
    if p.peek().tok != Tok::Eof {
        return Err(p.error(["end of input"]));
    }
    Ok(Ast::new(node))
}

/// Canonical text of a program. `parse_as(pretty(p), root)` rebuilds `p`.
pub fn pretty(program: &Ast) -> String {
    let mut out = String::new();
    let root = program.root();
    match program.nonterminal() {
        Nonterminal::S => write_sequence(root, 0, &mut out),
        _ => {
            write_call(root, &mut out);
            out.push('\n');
        }
    }
    out
}

fn indent(level: usize, out: &mut String) {
    for _ in 0..level {
        out.push_str("    ");
    }
}

fn write_sequence(node: &Node, level: usize, out: &mut String) {
    if node.rule() == Some(SEQ) {
        let first = node.arg(0);
        if first.rule() == Some(SEQ) {
            indent(level, out);
            out.push_str("{\n");
            write_sequence(first, level + 1, out);
            indent(level, out);
            out.push_str("}\n");
        } else {
            write_sequence(first, level, out);
        }
        write_sequence(node.arg(1), level, out);
        return;
    }
    indent(level, out);
    match node.rule().expect("statement node") {
        FOR => {
            out.push_str("for(Unit u) {\n");
            write_sequence(node.arg(0), level + 1, out);
            indent(level, out);
            out.push_str("}\n");
        }
        rule @ (IF | IF_ELSE) => {
            out.push_str("if(");
            write_call(node.arg(0), out);
            out.push_str(") then {\n");
            write_sequence(node.arg(1), level + 1, out);
            indent(level, out);
            if rule == IF_ELSE {
                out.push_str("} else {\n");
                write_sequence(node.arg(2), level + 1, out);
                indent(level, out);
            }
            out.push_str("}\n");
        }
        COMMAND => {
            write_call(node.arg(0), out);
            out.push('\n');
        }
        EMPTY => out.push_str("empty\n"),
        other => unreachable!("rule {other} is not a statement"),
    }
}

fn write_call(node: &Node, out: &mut String) {
    let rule = node.rule().expect("call node");
    if production(rule).lhs.is_literal() {
        out.push_str(production(rule).head());
        return;
    }
    out.push_str("u.");
    out.push_str(function_name(rule));
    out.push('(');
    for (i, arg) in node.args().enumerate() {
        if i > 0 {
            out.push(',');
        }
        write_call(arg, out);
    }
    out.push(')');
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::grammar::command_rule;

    #[test]
    fn parses_harvest_loop_by_hand_derivation() {
        let ast = parse("for(Unit u) u.harvest(1)").unwrap();
        let one = Node::apply(34, vec![]);
        let expected = Node::apply(
            FOR,
            vec![Node::apply(COMMAND, vec![Node::apply(command_rule(5), vec![one])])],
        );
        assert_eq!(ast.root(), &expected);
        assert_eq!(ast.size(), 7);
    }

    #[test]
    fn idle_prints_as_method_call() {
        let ast = Ast::new(Node::apply(command_rule(6), vec![]));
        assert_eq!(pretty(&ast), "u.idle()\n");
        assert_eq!(parse_as("u.idle()", Nonterminal::C).unwrap(), ast);
    }

    #[test]
    fn missing_then_branch_is_an_error() {
        let err = parse("if(u.canAttack())").unwrap_err();
        assert_eq!(err.line, 1);
        assert!(err.expected.iter().any(|e| e.contains("then")));
        assert_eq!(err.found, "end of input");
    }

    #[test]
    fn accepts_listing_style() {
        let text = "for(Unit u)\n  if(u.HasUnitWithinDistFromOp(25)):\n    empty\n  else\n    u.attack(Weakest)\n";
        let ast = parse(text).unwrap();
        assert_eq!(ast.root().rule(), Some(FOR));
        assert_eq!(ast.root().arg(0).rule(), Some(IF_ELSE));
        assert!(parse("u.train(Heavy,Right,50); c6()").is_ok());
    }

    #[test]
    fn sequences_round_trip_in_both_nestings() {
        let a = Node::apply(COMMAND, vec![Node::apply(command_rule(6), vec![])]);
        let b = Node::apply(EMPTY, vec![]);
        let left = Ast::new(Node::apply(SEQ, vec![Node::apply(SEQ, vec![a.clone(), b.clone()]), a.clone()]));
        let right = Ast::new(Node::apply(SEQ, vec![a.clone(), Node::apply(SEQ, vec![b, a])]));
        assert_ne!(pretty(&left), pretty(&right));
        assert_eq!(parse(&pretty(&left)).unwrap(), left);
        assert_eq!(parse(&pretty(&right)).unwrap(), right);
    }

    #[test]
    fn errors_name_expected_literals() {
        let err = parse("u.harvest(11)").unwrap_err();
        assert_eq!(err.column, 11);
        assert!(err.expected.contains(&"`15`".to_string()));
        assert!(parse("u.fly()").is_err());
        assert!(parse("").is_err());
    }
}
