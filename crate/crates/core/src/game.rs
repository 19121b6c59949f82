//! Finite-horizon two-player zero-sum Markov games.

use alloc::string::String;
use core::fmt::{self, Debug};
use core::hash::Hash;

use crate::num::{q, Q};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Left, Side::Right];

    pub fn index(self) -> usize {
        match self {
            Side::Left => 0,
            Side::Right => 1,
        }
    }

    pub fn opponent(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }

    pub fn parse(s: &str) -> Option<Side> {
        match s {
            "left" => Some(Side::Left),
            "right" => Some(Side::Right),
            _ => None,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Result of a finished episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    LeftWins,
    RightWins,
    Draw,
}

impl Outcome {
    pub fn winner(self) -> Option<Side> {
        match self {
            Outcome::LeftWins => Some(Side::Left),
            Outcome::RightWins => Some(Side::Right),
            Outcome::Draw => None,
        }
    }

    pub fn from_winner(winner: Option<Side>) -> Outcome {
        match winner {
            Some(Side::Left) => Outcome::LeftWins,
            Some(Side::Right) => Outcome::RightWins,
            None => Outcome::Draw,
        }
    }

    /// Sparse terminal reward: +1 for the winner, -1 for the loser.
    pub fn sparse(self, side: Side) -> i32 {
        match self.winner() {
            Some(w) if w == side => 1,
            Some(_) => -1,
            None => 0,
        }
    }

    /// Twice the match score of `side` (win = 2, draw = 1, loss = 0).
    pub fn score2(self, side: Side) -> u64 {
        (self.sparse(side) + 1) as u64
    }

    pub fn score(self, side: Side) -> Q {
        q(self.score2(side) as i64, 2)
    }

    pub fn name(self) -> &'static str {
        match self {
            Outcome::LeftWins => "left",
            Outcome::RightWins => "right",
            Outcome::Draw => "draw",
        }
    }

    pub fn parse(s: &str) -> Option<Outcome> {
        match s {
            "left" => Some(Outcome::LeftWins),
            "right" => Some(Outcome::RightWins),
            "draw" => Some(Outcome::Draw),
            _ => None,
        }
    }
}

/// A finite-horizon two-player Markov game with simultaneous moves and a
/// shared action set.
///
/// Every path from the initial state to a given state must have the same
/// length (the step count is a function of the state). The exact solvers rely
/// on this to process states layer by layer.
pub trait MarkovGame: Sync {
    type State: Clone + Eq + Hash + Debug + Send + Sync + 'static;
    type Obs: Clone + Eq + Hash + Ord + Debug + Send + Sync + ObsKey + 'static;

    fn num_actions(&self) -> usize;
    fn action_name(&self, action: usize) -> String;
    fn initial_state(&self) -> Self::State;
    /// Successor of a non-terminal state.
    fn transition(&self, state: &Self::State, left: usize, right: usize) -> Self::State;
    /// `Some` exactly when the state is terminal.
    fn outcome(&self, state: &Self::State) -> Option<Outcome>;
    fn observe(&self, state: &Self::State, side: Side) -> Self::Obs;
    /// Shaped per-step rewards used for training, indexed by side.
    fn shaped_rewards(&self, prev: &Self::State, next: &Self::State) -> [f64; 2];
    /// Identifier of the game configuration, used to tag checkpoints.
    fn config_text(&self) -> String;
}

/// Canonical text key of an observation (used by checkpoint files).
pub trait ObsKey: Sized {
    fn key(&self) -> String;
    fn parse_key(key: &str) -> Option<Self>;
}

impl ObsKey for () {
    fn key(&self) -> String {
        String::from("-")
    }

    fn parse_key(key: &str) -> Option<Self> {
        (key == "-").then_some(())
    }
}
