use std::fmt;

use super::grammar::{production, Nonterminal, RuleId, Symbol};

/// A derivation-tree node: a production application or a terminal leaf.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Node {
    Rule { rule: RuleId, children: Vec<Node> },
    Leaf(&'static str),
}

impl Node {
    /// Applies `rule`, filling its nonterminal slots from `args` in order.
    ///
    /// # Panics
    /// When `args` does not match the rule's nonterminal arguments.
    pub fn apply(rule: RuleId, args: Vec<Node>) -> Node {
        let prod = production(rule);
        let mut args = args.into_iter();
        let children = prod
            .rhs
            .iter()
            .map(|s| match s {
                Symbol::Terminal(t) => Node::Leaf(t),
                Symbol::Nonterminal(nt) => {
                    let child = args.next().expect("missing argument");
                    assert_eq!(child.nonterminal(), Some(*nt), "argument kind");
                    child
                }
            })
            .collect();
        assert!(args.next().is_none(), "too many arguments");
        Node::Rule { rule, children }
    }

    pub fn rule(&self) -> Option<RuleId> {
        match self {
            Node::Rule { rule, .. } => Some(*rule),
            Node::Leaf(_) => None,
        }
    }

    pub fn nonterminal(&self) -> Option<Nonterminal> {
        self.rule().map(|r| production(r).lhs)
    }

    pub fn children(&self) -> &[Node] {
        match self {
            Node::Rule { children, .. } => children,
            Node::Leaf(_) => &[],
        }
    }

    /// Children that are derivations rather than terminals.
    pub fn args(&self) -> impl Iterator<Item = &Node> {
        self.children().iter().filter(|c| matches!(c, Node::Rule { .. }))
    }

    pub fn arg(&self, i: usize) -> &Node {
        self.args().nth(i).expect("argument index")
    }

    /// Number of nodes, leaves included.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(Node::size).sum::<usize>()
    }

    /// Checks that every node matches its production.
    pub fn is_complete(&self) -> bool {
        match self {
            Node::Leaf(_) => false,
            Node::Rule { rule, children } => {
                let prod = production(*rule);
                prod.rhs.len() == children.len()
                    && prod.rhs.iter().zip(children).all(|(s, c)| match (s, c) {
                        (Symbol::Terminal(t), Node::Leaf(l)) => t == l,
                        (Symbol::Nonterminal(nt), c @ Node::Rule { .. }) => {
                            c.nonterminal() == Some(*nt) && c.is_complete()
                        }
                        _ => false,
                    })
            }
        }
    }

    fn visit<'a>(&'a self, index: &mut usize, f: &mut impl FnMut(usize, &'a Node)) {
        f(*index, self);
        *index += 1;
        for c in self.children() {
            c.visit(index, f);
        }
    }
}

/// A program: a derivation tree rooted at any nonterminal (usually S).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ast {
    root: Node,
}

impl Ast {
    /// # Panics
    /// When `root` is a bare leaf.
    pub fn new(root: Node) -> Ast {
        assert!(root.rule().is_some(), "an Ast is rooted at a nonterminal");
        Ast { root }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn into_root(self) -> Node {
        self.root
    }

    pub fn nonterminal(&self) -> Nonterminal {
        self.root.nonterminal().expect("rooted at a nonterminal")
    }

    pub fn size(&self) -> usize {
        self.root.size()
    }

    pub fn is_complete(&self) -> bool {
        self.root.is_complete()
    }

    /// Pre-order indices of nonterminal nodes with their symbols.
    pub fn nonterminal_nodes(&self) -> Vec<(usize, Nonterminal)> {
        let mut out = Vec::new();
        let mut i = 0;
        self.root.visit(&mut i, &mut |idx, n| {
            if let Some(nt) = n.nonterminal() {
                out.push((idx, nt));
            }
        });
        out
    }

    /// Node at a pre-order index (leaves included).
    pub fn node_at(&self, index: usize) -> Option<&Node> {
        let mut found = None;
        let mut i = 0;
        self.root.visit(&mut i, &mut |idx, n| {
            if idx == index {
                found = Some(n);
            }
        });
        found
    }

    /// Copy with the subtree at `index` replaced.
    ///
    /// # Panics
    /// When `index` is out of range or the replacement has a different root symbol.
    pub fn replaced(&self, index: usize, replacement: Node) -> Ast {
        fn go(node: &Node, index: &mut usize, target: usize, repl: &mut Option<Node>) -> Node {
            if *index == target {
                *index += node.size();
                return repl.take().expect("single replacement");
            }
            *index += 1;
            match node {
                Node::Leaf(l) => Node::Leaf(l),
                Node::Rule { rule, children } => Node::Rule {
                    rule: *rule,
                    children: children.iter().map(|c| go(c, index, target, repl)).collect(),
                },
            }
        }
        let old = self.node_at(index).expect("node index in range");
        assert_eq!(old.nonterminal(), replacement.nonterminal(), "same root symbol");
        let mut repl = Some(replacement);
        let root = go(&self.root, &mut 0, index, &mut repl);
        Ast { root }
    }

    /// All subtrees rooted at a nonterminal, in pre-order, as standalone programs.
    pub fn subtrees(&self) -> Vec<Ast> {
        let mut out = Vec::new();
        let mut i = 0;
        self.root.visit(&mut i, &mut |_, n| {
            if n.rule().is_some() {
                out.push(Ast { root: n.clone() });
            }
        });
        out
    }
}

impl From<Node> for Ast {
    fn from(root: Node) -> Ast {
        Ast::new(root)
    }
}

impl fmt::Display for Ast {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::syntax::pretty(self))
    }
}
