mod common;

use std::collections::HashMap;

use liss::dsl::Ast;
use liss::interp::signature;
use liss::space::{SearchSpace, SyntaxSpace};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn library_matches_brute_force_grouping() {
    let (entries, mismatches) = common::library_oracle(5);
    assert!(entries > 0);
    assert!(mismatches.is_empty(), "{mismatches:#?}");
}

#[test]
fn equal_signatures_mean_equal_actions() {
    let pool = common::rush_pool();
    let space = SyntaxSpace::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut by_signature: HashMap<_, Vec<Ast>> = HashMap::new();
    for _ in 0..300 {
        let p = space.initial(&mut rng).unwrap();
        if let Ok(sig) = signature(&p, pool.states(), 0) {
            by_signature.entry(sig).or_default().push(p);
        }
    }
    let mut checked = 0;
    for group in by_signature.values().filter(|g| g.len() > 1) {
        let first = common::actions(&group[0], pool.states());
        for other in &group[1..] {
            assert_eq!(common::actions(other, pool.states()), first, "{}\nvs\n{}", group[0], other);
            checked += 1;
        }
    }
    assert!(checked > 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn signatures_are_deterministic(seed in any::<u64>()) {
        let pool = common::rush_pool();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = SyntaxSpace::default().initial(&mut rng).unwrap();
        let a = signature(&p, pool.states(), 0);
        let b = signature(&p, pool.states(), 0);
        prop_assert_eq!(a.clone(), b);
        if let Ok(sig) = a {
            prop_assert_eq!(sig.len(), pool.len());
        }
    }
}
