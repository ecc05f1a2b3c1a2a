//! Shared fixtures for unit tests.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dsl::parse;
use crate::engine::{load_shipped, play_match_logged, MatchSetup, StateLog, StatsTable};
use crate::interp::policy;
use crate::library::{harvest_pool, StatePool};

pub fn nwr() -> MatchSetup {
    MatchSetup::new(
        Arc::new(load_shipped("nwr_9x8").unwrap()),
        Arc::new(StatsTable::default()),
    )
}

/// Logs of the two shipped rush scripts playing each other from both slots.
pub fn rush_logs() -> Vec<StateLog> {
    let setup = nwr();
    let rush = parse(include_str!("../scripts/worker_rush.mrl")).unwrap();
    let light = parse(include_str!("../scripts/light_rush.mrl")).unwrap();
    (0..2)
        .map(|slot| {
            let mut a = policy(&rush).unwrap();
            let mut b = policy(&light).unwrap();
            play_match_logged(&mut a, &mut b, &setup, slot).1
        })
        .collect()
}

pub fn rush_pool(cap: usize) -> Arc<StatePool> {
    Arc::new(harvest_pool(&rush_logs(), cap, &mut ChaCha8Rng::seed_from_u64(1)))
}
