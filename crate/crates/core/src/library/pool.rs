use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use xxhash_rust::xxh3::xxh3_128;

use crate::config::FORMAT_VERSION;
use crate::engine::{GameMap, GameState, Pile, StateLog, StatsTable, Unit, UnitId};

pub const DEFAULT_POOL_CAP: usize = 400;

/// Fixed, ordered set of states that signatures are computed over.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StatePool {
    states: Vec<GameState>,
    /// Index of the match log each state came from.
    sources: Vec<usize>,
}

impl StatePool {
    pub fn new(states: Vec<GameState>) -> StatePool {
        let sources = vec![0; states.len()];
        StatePool { states, sources }
    }

    pub fn states(&self) -> &[GameState] {
        &self.states
    }

    pub fn sources(&self) -> &[usize] {
        &self.sources
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Content hash of the serialized pool.
    pub fn fingerprint(&self) -> u128 {
        xxh3_128(self.to_json().as_bytes())
    }

    pub fn to_json(&self) -> String {
        let mut maps: Vec<Arc<GameMap>> = Vec::new();
        let mut states = Vec::with_capacity(self.states.len());
        for (s, &source) in self.states.iter().zip(&self.sources) {
            let map = match maps.iter().position(|m| **m == **s.map()) {
                Some(i) => i,
                None => {
                    maps.push(s.map().clone());
                    maps.len() - 1
                }
            };
            states.push(StateRecord {
                map,
                source,
                tick: s.tick,
                units: s.units.clone(),
                piles: s.piles.clone(),
                resources: s.resources,
                next_id: s.next_id,
                rng_stream_id: s.rng_stream_id,
            });
        }
        let stats = self
            .states
            .first()
            .map(|s| s.stats().to_document())
            .unwrap_or_else(|| StatsTable::default().to_document());
        let file = PoolFile {
            format: FORMAT_VERSION,
            stats,
            maps: maps.iter().map(|m| m.to_document()).collect(),
            states,
        };
        serde_json::to_string(&file).expect("pool serializes")
    }

    pub fn from_json(text: &str) -> Result<StatePool, PoolFileError> {
        let file: PoolFile = serde_json::from_str(text)?;
        if file.format != FORMAT_VERSION {
            return Err(PoolFileError::Format(file.format));
        }
        let stats = Arc::new(
            StatsTable::parse(&file.stats).map_err(|e| PoolFileError::Content(e.to_string()))?,
        );
        let maps: Vec<Arc<GameMap>> = file
            .maps
            .iter()
            .map(|d| GameMap::parse(d).map(Arc::new))
            .collect::<Result<_, _>>()
            .map_err(|e| PoolFileError::Content(e.to_string()))?;
        let mut pool = StatePool::new(Vec::new());
        for r in file.states {
            let map = maps
                .get(r.map)
                .ok_or_else(|| PoolFileError::Content(format!("unknown map index {}", r.map)))?;
            pool.states.push(GameState::from_parts(
                map.clone(),
                stats.clone(),
                r.tick,
                r.units,
                r.piles,
                r.resources,
                r.next_id,
                r.rng_stream_id,
            ));
            pool.sources.push(r.source);
        }
        Ok(pool)
    }
}

#[derive(Debug, Error)]
pub enum PoolFileError {
    #[error("malformed pool file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported pool format {0}")]
    Format(u32),
    #[error("invalid pool content: {0}")]
    Content(String),
}

#[derive(Serialize, Deserialize)]
struct PoolFile {
    format: u32,
    stats: String,
    maps: Vec<String>,
    states: Vec<StateRecord>,
}

#[derive(Serialize, Deserialize)]
struct StateRecord {
    map: usize,
    source: usize,
    tick: u32,
    units: Vec<Unit>,
    piles: Vec<Pile>,
    resources: [i32; 2],
    next_id: UnitId,
    rng_stream_id: u64,
}

/// Visits the match logs in random order and appends their states, in match
/// order, until `cap` states are collected.
pub fn harvest_pool<R: Rng + ?Sized>(logs: &[StateLog], cap: usize, rng: &mut R) -> StatePool {
    let mut order: Vec<usize> = (0..logs.len()).collect();
    order.shuffle(rng);
    let mut pool = StatePool::new(Vec::new());
    'outer: for i in order {
        for s in &logs[i] {
            if pool.states.len() >= cap {
                break 'outer;
            }
            pool.states.push(s.clone());
            pool.sources.push(i);
        }
    }
    pool
}
