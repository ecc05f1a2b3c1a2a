use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::dsl::grammar::{command_rule, COMMAND, EMPTY, FOR, SEQ};
use crate::dsl::{enumerate_programs, parse, Ast, Grammar, Nonterminal};
use crate::engine::{load_shipped, MatchSetup, StatsTable};
use crate::space::{SearchSpace, SyntaxSpace};

/// Scores by a fixed function, one game per call.
struct Toy<F: FnMut(&Ast) -> f64>(F);

impl<F: FnMut(&Ast) -> f64> Evaluator for Toy<F> {
    fn games_per_eval(&self) -> u64 {
        1
    }

    fn evaluate(&mut self, candidate: &Ast) -> Evaluation {
        Evaluation {
            score: (self.0)(candidate),
            winning_rate: 0.0,
            games: 1,
            faulted: false,
        }
    }
}

fn setup(stem: &str) -> MatchSetup {
    MatchSetup::new(
        Arc::new(load_shipped(stem).unwrap()),
        Arc::new(StatsTable::default()),
    )
}

fn games(k: usize, budget: u64, seed: u64) -> ShcConfig {
    ShcConfig {
        k,
        budget: Budget::Games(budget),
        seed,
        ..ShcConfig::default()
    }
}

fn small_grammar() -> Grammar {
    Grammar::restricted(Nonterminal::S, |p| {
        [SEQ, FOR, COMMAND, EMPTY].contains(&p.id)
            || [command_rule(6), command_rule(7)].contains(&p.id)
    })
    .unwrap()
}

fn assert_trace_laws(out: &ShcOutcome, budget: u64) {
    let cps = &out.trace.checkpoints;
    assert!(!cps.is_empty());
    for w in cps.windows(2) {
        assert!(w[0].games < w[1].games);
        assert!(w[0].best_eval <= w[1].best_eval);
    }
    assert!(cps.iter().all(|c| c.best_eval <= out.best_eval));
    assert!(out.games <= budget);
    assert_eq!(cps.last().unwrap().games, out.games);
}

#[test]
fn size_reward_climbs_to_the_cap() {
    let mut space = SyntaxSpace {
        cap: 12,
        ..SyntaxSpace::default()
    };
    let mut eval = Toy(|a: &Ast| a.size() as f64);
    let out = shc(&mut space, &mut eval, &games(20, 3000, 1)).unwrap();
    assert_trace_laws(&out, 3000);
    assert_eq!(out.best_eval, 12.0);
    assert_eq!(out.best.size(), 12);
}

#[test]
fn flat_landscape_restarts_every_iteration() {
    let mut space = SyntaxSpace::default();
    let mut eval = Toy(|_: &Ast| 1.0);
    let out = shc(&mut space, &mut eval, &games(5, 200, 2)).unwrap();
    assert!(out.iterations > 5);
    assert_eq!(out.restarts, out.iterations);
    assert_trace_laws(&out, 200);
}

#[test]
fn fixed_seed_reproduces_the_trace() {
    let run = |seed| {
        let mut space = SyntaxSpace::default();
        let mut eval = Toy(|a: &Ast| -((a.size() as f64) - 9.0).abs());
        shc(&mut space, &mut eval, &games(10, 500, seed)).unwrap()
    };
    let (a, b) = (run(7), run(7));
    assert_eq!(a.trace, b.trace);
    assert_eq!(a.trace.to_csv(), b.trace.to_csv());
    assert_eq!(a.best, b.best);
    assert!(a.trace.to_csv().starts_with("games,best_eval,restarts,candidates\n"));
}

#[test]
fn hill_climbing_accepts_only_strict_improvements() {
    let mut space = SyntaxSpace {
        cap: 20,
        ..SyntaxSpace::default()
    };
    let mut seen = Vec::new();
    let mut eval = Toy(|a: &Ast| {
        seen.push(a.clone());
        (a.size() % 7) as f64
    });
    let out = shc(&mut space, &mut eval, &games(8, 400, 3)).unwrap();
    assert_trace_laws(&out, 400);
    let programs: Vec<Ast> = out.evaluated.iter().map(|(p, _)| p.clone()).collect();
    assert_eq!(programs, seen);
    let distinct: std::collections::HashSet<_> = seen.iter().collect();
    assert_eq!(distinct.len(), seen.len());
}

#[test]
fn budget_errors() {
    let mut space = SyntaxSpace::default();
    let mut eval = Toy(|_: &Ast| 0.0);
    let mut cfg = games(1, 0, 0);
    assert!(matches!(shc(&mut space, &mut eval, &cfg), Err(SearchError::BudgetTooSmall { .. })));
    cfg.budget = Budget::Seconds(0.0);
    assert!(matches!(shc(&mut space, &mut eval, &cfg), Err(SearchError::BudgetTooSmall { .. })));
    cfg.budget = Budget::Games(1);
    cfg.k = 0;
    assert_eq!(shc(&mut space, &mut eval, &cfg).unwrap_err(), SearchError::NoNeighbors);
    cfg.k = 3;
    let out = shc(&mut space, &mut eval, &cfg).unwrap();
    assert_eq!(out.games, 1);
    cfg.budget = Budget::Seconds(0.05);
    assert!(shc(&mut space, &mut eval, &cfg).unwrap().games >= 1);
}

#[test]
fn initial_candidate_is_evaluated_first() {
    let mut space = SyntaxSpace::default();
    let start = parse("for(Unit u) u.harvest(3)").unwrap();
    let mut first = None;
    let mut eval = Toy(|a: &Ast| {
        first.get_or_insert_with(|| a.clone());
        0.0
    });
    let cfg = ShcConfig {
        initial_candidate: Some(start.clone()),
        ..games(4, 20, 0)
    };
    shc(&mut space, &mut eval, &cfg).unwrap();
    assert_eq!(first, Some(start));
}

#[test]
fn finds_a_target_on_a_small_grammar() {
    let mut space = SyntaxSpace::new(small_grammar());
    space.cap = 14;
    let target = parse("for(Unit u) { u.moveAway() u.idle() }").unwrap();
    assert!(target.size() <= 14);
    assert!(enumerate_programs(space.grammar(), 14).contains(&target));
    let mut found = 0;
    for seed in 0..20 {
        let t = target.clone();
        let mut eval = Toy(move |a: &Ast| if *a == t { 1.0 } else { 0.0 });
        let cfg = ShcConfig {
            max_candidates: Some(50_000),
            ..games(20, u64::MAX, seed)
        };
        if shc(&mut space, &mut eval, &cfg).unwrap().best == target {
            found += 1;
        }
    }
    assert!(found >= 18, "{found}/20");
}

#[test]
fn match_evaluation() {
    let nwr = setup("nwr_9x8");
    let rush = parse(include_str!("../../scripts/worker_rush.mrl")).unwrap();
    let empty = parse("empty").unwrap();

    let mut mirror = GameEvaluator::new(vec![nwr.clone()], &rush).unwrap();
    let e = mirror.evaluate(&rush);
    assert_eq!(e.score, 50.0);
    assert_eq!(e.games, 2);

    let mut vs_rush = GameEvaluator::new(vec![nwr.clone()], &rush).unwrap();
    let e = vs_rush.evaluate(&empty);
    assert_eq!(e.winning_rate, 0.0);
    assert!(e.score < 0.0 && e.score > -0.5);
    let e = GameEvaluator::new(vec![nwr.clone()], &empty).unwrap().evaluate(&rush);
    assert_eq!(e.winning_rate, 100.0);
    assert!(e.score > 100.0 && e.score < 100.5);

    let mut deep = "u.idle()".to_string();
    for _ in 0..18 {
        deep = format!("for(Unit u) {{ {deep} }}");
    }
    let e = vs_rush.evaluate(&parse(&deep).unwrap());
    assert!(e.faulted);
    assert_eq!(e.score, FAULT_SCORE);
    assert_eq!(e.games, 2);

    let mut four = GameEvaluator::new(vec![nwr.clone(), setup("lmo_16x8")], &empty)
        .unwrap()
        .with_games_per_eval(4)
        .unwrap();
    let (e, results) = four.evaluate_detailed(&rush);
    assert_eq!(e.games, 4);
    assert_eq!(results.len(), 4);
    assert_eq!(results.iter().map(|r| r.first_slot).collect::<Vec<_>>(), vec![0, 1, 0, 1]);
    assert!(GameEvaluator::new(vec![nwr.clone()], &empty).unwrap().with_games_per_eval(3).is_err());
    assert_eq!(GameEvaluator::new(vec![], &empty).unwrap_err(), EvaluatorError::NoMaps);
}

#[test]
fn reservoir_keeps_decision_states() {
    let light = parse(include_str!("../../scripts/light_rush.mrl")).unwrap();
    let mut eval = GameEvaluator::new(vec![setup("nwr_9x8")], &light)
        .unwrap()
        .with_log_capture(3, 9);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let space = SyntaxSpace::default();
    for _ in 0..6 {
        let p = space.initial(&mut rng).unwrap();
        eval.evaluate(&p);
    }
    let r = eval.reservoir().unwrap();
    assert_eq!(r.matches_seen(), 12);
    assert_eq!(r.logs().len(), 3);
    for log in r.logs() {
        assert!(!log.is_empty());
        assert!(log.iter().all(|s| s.units_of(0).any(|u| u.is_idle())));
    }
}
