use alloc::string::String;
use alloc::vec::Vec;

use super::action::TransAction;
use super::config::EngineConfig;
use super::observe::{observe_symbolic, SymbolicObs};
use super::reward::dense_reward_f64;
use super::rules::advance;
use super::state::GameState;
use crate::error::Result;
use crate::game::{MarkovGame, Outcome, Side};

/// MiniBrawl as a [`MarkovGame`] over the configured legal action set.
#[derive(Debug, Clone)]
pub struct MiniBrawl {
    pub config: EngineConfig,
    actions: Vec<TransAction>,
}

impl MiniBrawl {
    pub fn new(config: EngineConfig) -> Result<MiniBrawl> {
        config.validate()?;
        let actions = config.legal_actions();
        Ok(MiniBrawl { config, actions })
    }

    pub fn actions(&self) -> &[TransAction] {
        &self.actions
    }

    pub fn action(&self, index: usize) -> TransAction {
        self.actions[index]
    }

    pub fn action_index(&self, a: TransAction) -> Option<usize> {
        self.actions.iter().position(|&x| x == a)
    }
}

impl MarkovGame for MiniBrawl {
    type State = GameState;
    type Obs = SymbolicObs;

    fn num_actions(&self) -> usize {
        self.actions.len()
    }

    fn action_name(&self, action: usize) -> String {
        self.actions[action].name()
    }

    fn initial_state(&self) -> GameState {
        GameState::reset(&self.config).expect("validated at construction")
    }

    fn transition(&self, state: &GameState, left: usize, right: usize) -> GameState {
        advance(state, self.actions[left], self.actions[right], &self.config).expect("transition from a terminal state")
    }

    fn outcome(&self, state: &GameState) -> Option<Outcome> {
        if state.terminal {
            state.winner
        } else {
            None
        }
    }

    fn observe(&self, state: &GameState, side: Side) -> SymbolicObs {
        observe_symbolic(state, side, &self.config)
    }

    fn shaped_rewards(&self, prev: &GameState, next: &GameState) -> [f64; 2] {
        [
            dense_reward_f64(prev, next, Side::Left, &self.config),
            dense_reward_f64(prev, next, Side::Right, &self.config),
        ]
    }

    fn config_text(&self) -> String {
        self.config.to_text()
    }
}
