mod common;

use liss::dsl::{parse, pretty, regrow_at, regrow_subtree, Grammar};
use liss::space::{SearchSpace, SyntaxSpace};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn sampled_programs_satisfy_grammar_properties() {
    let failures = common::grammar_properties(2000, 11);
    assert!(failures.is_empty(), "{failures:#?}");
}

#[test]
fn regrowth_picks_nodes_uniformly() {
    let g = Grammar::full();
    let p = parse("for(Unit u) if(u.is_Type(Worker)) then u.harvest(5) else u.attack(Closest)").unwrap();
    let n = p.nonterminal_nodes().len();
    let draws = 20_000;
    let mut counts = vec![0usize; n];
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..draws {
        // Replaying each candidate site from the same state identifies the
        // node that was regrown.
        let before = rng.clone();
        let neighbor = regrow_subtree(&g, &p, &mut rng, 100).unwrap();
        let mut probe = before.clone();
        let chosen = probe.gen_range(0..n);
        let (index, _) = p.nonterminal_nodes()[chosen];
        assert_eq!(regrow_at(&g, &p, index, &mut probe, 100).unwrap(), neighbor);
        counts[chosen] += 1;
    }
    let expected = draws as f64 / n as f64;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    // 99.9th percentile of chi-square with n - 1 = 9 degrees of freedom.
    assert_eq!(n, 10);
    assert!(chi2 < 27.88, "chi2 {chi2}, counts {counts:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn pretty_output_parses_back(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = SyntaxSpace::default().initial(&mut rng).unwrap();
        prop_assert_eq!(parse(&pretty(&p)).unwrap(), p);
    }

    #[test]
    fn neighbors_stay_within_bounds(seed in any::<u64>(), cap in 8usize..60) {
        let space = SyntaxSpace { cap, ..SyntaxSpace::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = space.initial(&mut rng).unwrap();
        prop_assert!(p.size() >= space.z && p.size() <= cap);
        for n in space.neighbors(&p, 8, &mut rng).unwrap() {
            prop_assert!(n.is_complete() && n.size() <= cap);
        }
    }
}
