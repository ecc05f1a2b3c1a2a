//! Search spaces: an initial-candidate generator plus a neighborhood
//! function over programs.

use rand::{Rng, RngCore};

use crate::dsl::{regrow_subtree, sample_program, Ast, Grammar, SampleError, DEFAULT_MAX_SIZE};
use crate::library::Library;

pub const DEFAULT_Z: usize = 4;
pub const DEFAULT_CAP: usize = DEFAULT_MAX_SIZE;
pub const DEFAULT_EPSILON: f64 = 0.20;
/// Oversized library substitutions tolerated before a syntax move is used.
pub const LIBRARY_MOVE_TRIES: usize = 50;

pub trait SearchSpace {
    fn name(&self) -> &'static str;

    fn grammar(&self) -> &Grammar;

    /// Minimum size of initial candidates.
    fn z(&self) -> usize;

    /// Maximum size of every program the space produces.
    fn cap(&self) -> usize;

    fn initial(&self, rng: &mut dyn RngCore) -> Result<Ast, SampleError> {
        sample_program(self.grammar(), self.z(), self.cap(), rng)
    }

    fn neighbor(&self, current: &Ast, rng: &mut dyn RngCore) -> Result<Ast, SampleError>;

    /// `k` independently generated neighbors of `current`.
    fn neighbors(
        &self,
        current: &Ast,
        k: usize,
        rng: &mut dyn RngCore,
    ) -> Result<Vec<Ast>, SampleError> {
        (0..k).map(|_| self.neighbor(current, rng)).collect()
    }

    /// Observes a program that search has evaluated.
    fn record_candidate(&mut self, _evaluated: &Ast) {}
}

/// Neighbors regrow one random subtree from the grammar.
#[derive(Debug, Clone)]
pub struct SyntaxSpace {
    pub grammar: Grammar,
    pub z: usize,
    pub cap: usize,
}

impl SyntaxSpace {
    pub fn new(grammar: Grammar) -> SyntaxSpace {
        SyntaxSpace {
            grammar,
            z: DEFAULT_Z,
            cap: DEFAULT_CAP,
        }
    }
}

impl Default for SyntaxSpace {
    fn default() -> Self {
        SyntaxSpace::new(Grammar::full())
    }
}

impl SearchSpace for SyntaxSpace {
    fn name(&self) -> &'static str {
        "syntax"
    }

    fn grammar(&self) -> &Grammar {
        &self.grammar
    }

    fn z(&self) -> usize {
        self.z
    }

    fn cap(&self) -> usize {
        self.cap
    }

    fn neighbor(&self, current: &Ast, rng: &mut dyn RngCore) -> Result<Ast, SampleError> {
        regrow_subtree(&self.grammar, current, rng, self.cap)
    }
}

/// Neighbors replace one subtree with a library program of the same root
/// class, or, with probability `epsilon`, regrow it as in [`SyntaxSpace`].
#[derive(Debug, Clone)]
pub struct SemanticSpace {
    pub syntax: SyntaxSpace,
    pub library: Library,
    pub epsilon: f64,
    pub continual_growth: bool,
}

impl SemanticSpace {
    pub fn new(grammar: Grammar, library: Library) -> SemanticSpace {
        SemanticSpace {
            syntax: SyntaxSpace::new(grammar),
            library,
            epsilon: DEFAULT_EPSILON,
            continual_growth: true,
        }
    }

    pub fn library(&self) -> &Library {
        &self.library
    }

    /// Substitutes a library program at a node whose class has entries.
    /// `None` when no such node exists or every try exceeds the size cap.
    pub fn library_move(&self, current: &Ast, rng: &mut dyn RngCore) -> Option<Ast> {
        let nodes: Vec<_> = current
            .nonterminal_nodes()
            .into_iter()
            .filter(|&(_, nt)| self.library.class_len(nt) > 0)
            .collect();
        if nodes.is_empty() {
            return None;
        }
        for _ in 0..LIBRARY_MOVE_TRIES {
            let (index, nt) = nodes[rng.gen_range(0..nodes.len())];
            let replacement = self.library.sample_replacement(nt, rng).ok()?;
            let old = current.node_at(index)?.size();
            if current.size() - old + replacement.size() <= self.syntax.cap {
                return Some(current.replaced(index, replacement.root().clone()));
            }
        }
        None
    }
}

impl SearchSpace for SemanticSpace {
    fn name(&self) -> &'static str {
        "liss"
    }

    fn grammar(&self) -> &Grammar {
        &self.syntax.grammar
    }

    fn z(&self) -> usize {
        self.syntax.z
    }

    fn cap(&self) -> usize {
        self.syntax.cap
    }

    fn neighbor(&self, current: &Ast, rng: &mut dyn RngCore) -> Result<Ast, SampleError> {
        if !rng.gen_bool(self.epsilon) {
            if let Some(n) = self.library_move(current, rng) {
                return Ok(n);
            }
        }
        self.syntax.neighbor(current, rng)
    }

    fn record_candidate(&mut self, evaluated: &Ast) {
        if self.continual_growth {
            self.library.insert_subtrees(evaluated);
        }
    }
}

/// Degenerate space whose only neighbor of a program is itself.
#[derive(Debug, Clone, Default)]
pub struct IdentitySpace {
    pub syntax: SyntaxSpace,
}

impl SearchSpace for IdentitySpace {
    fn name(&self) -> &'static str {
        "identity"
    }

    fn grammar(&self) -> &Grammar {
        &self.syntax.grammar
    }

    fn z(&self) -> usize {
        self.syntax.z
    }

    fn cap(&self) -> usize {
        self.syntax.cap
    }

    fn neighbor(&self, current: &Ast, _rng: &mut dyn RngCore) -> Result<Ast, SampleError> {
        Ok(current.clone())
    }
}

/// Pre-order index and depth of the deepest node whose subtree contains
/// every difference between `a` and `b`; `None` when they are equal.
pub fn edit_site(a: &Ast, b: &Ast) -> Option<(usize, usize)> {
    if a == b {
        return None;
    }
    let (mut x, mut y) = (a.root(), b.root());
    let (mut index, mut depth) = (0, 0);
    loop {
        if x.rule() != y.rule() || x.children().len() != y.children().len() {
            return Some((index, depth));
        }
        let mut differing = (0..x.children().len()).filter(|&i| x.children()[i] != y.children()[i]);
        let (Some(c), None) = (differing.next(), differing.next()) else {
            return Some((index, depth));
        };
        index += 1 + x.children()[..c].iter().map(|n| n.size()).sum::<usize>();
        depth += 1;
        x = &x.children()[c];
        y = &y.children()[c];
    }
}
