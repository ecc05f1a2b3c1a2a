use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dsl::{Ast, SampleError};
use crate::engine::{run_match, ActionAssignment, GameState, MatchSetup, Policy};
use crate::interp::{policy, ProgramPolicy};
use crate::search::derive_seed;
use crate::space::SearchSpace;

pub const DESK_PROGRAMS: usize = 20;
pub const DESK_NEIGHBORS: usize = 200;
pub const PAPER_PROGRAMS: usize = 50;
pub const PAPER_NEIGHBORS: usize = 1000;

#[derive(Debug, Clone)]
pub struct BetaConfig {
    pub n_programs: usize,
    pub n_neighbors: usize,
    pub setups: Vec<MatchSetup>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BetaProgram {
    pub program: Ast,
    pub identical: usize,
    pub neighbors: usize,
}

impl BetaProgram {
    pub fn fraction(&self) -> f64 {
        self.identical as f64 / self.neighbors as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BetaReport {
    pub space: String,
    pub programs: Vec<BetaProgram>,
    pub mean: f64,
    /// Population standard deviation of the per-program fractions.
    pub std: f64,
}

impl BetaReport {
    pub fn from_programs(space: &str, programs: Vec<BetaProgram>) -> BetaReport {
        let fractions: Vec<f64> = programs.iter().map(BetaProgram::fraction).collect();
        let (mean, std) = mean_std(&fractions);
        BetaReport {
            space: space.to_string(),
            programs,
            mean,
            std,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("program,identical,neighbors,fraction\n");
        for (i, p) in self.programs.iter().enumerate() {
            out.push_str(&format!("{i},{},{},{:.6}\n", p.identical, p.neighbors, p.fraction()));
        }
        out
    }
}

pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Player-0 assignments of `p` against `opponent`, one per tick. `None`
/// when `p` faults.
pub(super) fn trajectory(p: &ProgramPolicy, opponent: &ProgramPolicy, setup: &MatchSetup) -> Option<Vec<ActionAssignment>> {
    let mut out = Vec::new();
    let mut observe = |_: &GameState, a: &[ActionAssignment; 2]| {
        out.push(a[0].clone());
        true
    };
    let (mut me, mut them) = (p.clone(), opponent.clone());
    let players: [&mut dyn Policy; 2] = [&mut me, &mut them];
    let result = run_match(setup, players, Some(&mut observe))?;
    (!result.faults[0]).then_some(out)
}

/// Replays `candidate` against `opponent`, stopping at the first tick whose
/// assignment differs from `reference`.
fn follows(
    candidate: &ProgramPolicy,
    opponent: &ProgramPolicy,
    setup: &MatchSetup,
    reference: &[ActionAssignment],
) -> bool {
    let mut tick = 0;
    let mut observe = |_: &GameState, a: &[ActionAssignment; 2]| {
        let same = reference.get(tick) == Some(&a[0]);
        tick += 1;
        same
    };
    let (mut me, mut them) = (candidate.clone(), opponent.clone());
    let players: [&mut dyn Policy; 2] = [&mut me, &mut them];
    match run_match(setup, players, Some(&mut observe)) {
        Some(result) => !result.faults[0] && tick == reference.len(),
        None => false,
    }
}

/// Whether `candidate` issues exactly the trajectories in `references`.
/// Non-executable candidates are never identical.
fn identical(
    candidate: &Ast,
    opponent: &ProgramPolicy,
    setups: &[MatchSetup],
    references: &[Option<Vec<ActionAssignment>>],
) -> bool {
    let Ok(c) = policy(candidate) else {
        return false;
    };
    setups.iter().zip(references).all(|(setup, r)| match r {
        Some(r) => follows(&c, opponent, setup, r),
        None => false,
    })
}

/// Fraction of neighbors behaving identically to their program, where
/// behavior is the full per-tick action trajectory on every map against
/// another neighbor of the same program.
pub fn estimate_beta(space: &dyn SearchSpace, config: &BetaConfig) -> Result<BetaReport, SampleError> {
    let mut program_rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, "beta-programs", 0));
    let mut programs = Vec::with_capacity(config.n_programs);
    for i in 0..config.n_programs {
        let p = space.initial(&mut program_rng)?;
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, "beta-neighbors", i as u64));
        let mut neighbors = space.neighbors(&p, config.n_neighbors + 1, &mut rng)?;
        let opponent_ast = neighbors.pop().expect("k + 1 neighbors");
        let count = match (policy(&p), policy(&opponent_ast)) {
            (Ok(pp), Ok(opponent)) => {
                let references: Vec<_> = config
                    .setups
                    .iter()
                    .map(|s| trajectory(&pp, &opponent, s))
                    .collect();
                neighbors
                    .iter()
                    .filter(|n| identical(n, &opponent, &config.setups, &references))
                    .count()
            }
            _ => 0,
        };
        programs.push(BetaProgram {
            program: p,
            identical: count,
            neighbors: config.n_neighbors,
        });
    }
    Ok(BetaReport::from_programs(space.name(), programs))
}
