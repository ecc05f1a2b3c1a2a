use std::collections::HashMap;
use std::rc::Rc;

use super::ast::{Ast, Node};
use super::grammar::{production, Grammar, Nonterminal, Symbol};

/// Every complete derivation from the grammar's start symbol with at most
/// `max_size` nodes, ordered by size, then rule id, then children.
pub fn enumerate_programs(grammar: &Grammar, max_size: usize) -> Vec<Ast> {
    let mut memo = Enumerator {
        grammar,
        memo: HashMap::new(),
    };
    let mut out = Vec::new();
    for size in 1..=max_size {
        out.extend(memo.exact(grammar.start(), size).iter().cloned().map(Ast::new));
    }
    out
}

struct Enumerator<'g> {
    grammar: &'g Grammar,
    memo: HashMap<(Nonterminal, usize), Rc<Vec<Node>>>,
}

impl Enumerator<'_> {
    /// Derivations of `nt` with exactly `size` nodes.
    fn exact(&mut self, nt: Nonterminal, size: usize) -> Rc<Vec<Node>> {
        if let Some(v) = self.memo.get(&(nt, size)) {
            return v.clone();
        }
        let mut out = Vec::new();
        for &rule in self.grammar.rules_for(nt) {
            let rhs = production(rule).rhs;
            let leaves = rhs.iter().filter(|s| matches!(s, Symbol::Terminal(_))).count();
            let args: Vec<Nonterminal> = production(rule).arguments().collect();
            let Some(budget) = size.checked_sub(1 + leaves) else {
                continue;
            };
            let mut partial = Vec::new();
            self.fill(&args, budget, &mut partial, &mut |children: &[Node]| {
                let mut it = children.iter().cloned();
                let kids = rhs
                    .iter()
                    .map(|s| match s {
                        Symbol::Terminal(t) => Node::Leaf(t),
                        Symbol::Nonterminal(_) => it.next().expect("argument"),
                    })
                    .collect();
                out.push(Node::Rule { rule, children: kids });
            });
        }
        let out = Rc::new(out);
        self.memo.insert((nt, size), out.clone());
        out
    }

    fn fill(
        &mut self,
        args: &[Nonterminal],
        budget: usize,
        partial: &mut Vec<Node>,
        emit: &mut dyn FnMut(&[Node]),
    ) {
        let Some((&first, rest)) = args.split_first() else {
            if budget == 0 {
                emit(partial);
            }
            return;
        };
        // Each remaining argument needs at least two nodes.
        let reserve = 2 * rest.len();
        if budget < 2 + reserve {
            return;
        }
        for size in 2..=budget - reserve {
            let options = self.exact(first, size);
            for node in options.iter() {
                partial.push(node.clone());
                self.fill(rest, budget - size, partial, emit);
                partial.pop();
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::syntax::pretty;
    use std::collections::HashSet;

    #[test]
    fn small_sizes_by_hand() {
        let g = Grammar::full();
        assert!(enumerate_programs(&g, 0).is_empty());
        assert!(enumerate_programs(&g, 1).is_empty());
        let two: Vec<String> = enumerate_programs(&g, 2).iter().map(pretty).collect();
        assert_eq!(two, vec!["empty\n"]);
        let three: Vec<String> = enumerate_programs(&g, 3).iter().map(pretty).collect();
        assert_eq!(three, vec!["empty\n", "u.idle()\n", "u.moveAway()\n"]);
    }

    #[test]
    fn size_five_counts() {
        // empty; idle; moveAway; for(empty); for(c6|c7) via 5 nodes;
        // c5 with 16 numbers; c4 with 7 criteria; seq(empty, empty).
        let all = enumerate_programs(&Grammar::full(), 5);
        assert_eq!(all.len(), 1 + 2 + 1 + 2 + 16 + 7 + 1);
        let unique: HashSet<_> = all.iter().collect();
        assert_eq!(unique.len(), all.len());
        assert!(all.iter().all(|a| a.size() <= 5 && a.is_complete()));
    }
}
