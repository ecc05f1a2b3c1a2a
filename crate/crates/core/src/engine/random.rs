use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::matchplay::{Policy, PolicyFault};
use super::state::GameState;
use super::unit::{ActionAssignment, Direction, Player, Pos, UnitCommand, UnitKind};

/// Issues a uniformly random command, legal or not, to every idle unit.
#[derive(Debug, Clone)]
pub struct RandomPolicy {
    rng: ChaCha8Rng,
}

impl RandomPolicy {
    pub fn new(seed: u64) -> RandomPolicy {
        RandomPolicy {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl Policy for RandomPolicy {
    fn act(&mut self, state: &GameState, player: Player) -> Result<ActionAssignment, PolicyFault> {
        let rng = &mut self.rng;
        let ids: Vec<_> = state.units.iter().map(|u| u.id).collect();
        let map = state.map();
        let mut out = ActionAssignment::new();
        for u in state.units_of(player).filter(|u| u.is_idle()) {
            let dir = *Direction::ALL.choose(rng).expect("directions");
            let cell = Pos::new(rng.gen_range(0..map.width), rng.gen_range(0..map.height));
            let cmd = match rng.gen_range(0..7) {
                0 => UnitCommand::Idle,
                1 => UnitCommand::Move(dir),
                2 => match state.piles.choose(rng) {
                    Some(p) => UnitCommand::Harvest(p.pos),
                    None => UnitCommand::Harvest(cell),
                },
                3 => UnitCommand::ReturnResources(*ids.choose(rng).expect("live units")),
                4 => UnitCommand::Produce(*UnitKind::ALL.choose(rng).expect("kinds"), dir),
                5 => UnitCommand::Attack(*ids.choose(rng).expect("live units")),
                _ => UnitCommand::MoveToward(cell),
            };
            out.assign(u.id, cmd);
        }
        Ok(out)
    }
}
