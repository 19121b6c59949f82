//! One-shot matrix games embedded as single-step Markov games.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::game::{MarkovGame, Outcome, Side};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MatrixState {
    Start,
    Done(Outcome),
}

/// Both players pick one of the named actions; `outcomes[a][b]` decides the
/// result when the left player picks `a` and the right player `b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatrixGame {
    pub names: Vec<String>,
    pub outcomes: Vec<Vec<Outcome>>,
}

impl MatrixGame {
    pub fn new(names: Vec<String>, outcomes: Vec<Vec<Outcome>>) -> Result<MatrixGame> {
        let n = names.len();
        if n == 0 {
            return Err(Error::Empty("action set"));
        }
        if outcomes.len() != n || outcomes.iter().any(|r| r.len() != n) {
            return Err(Error::Invalid(format!("outcome table must be {n}x{n}")));
        }
        Ok(MatrixGame { names, outcomes })
    }

    /// Rock, paper, scissors.
    pub fn rock_paper_scissors() -> MatrixGame {
        use Outcome::{Draw as D, LeftWins as L, RightWins as R};
        MatrixGame {
            names: ["rock", "paper", "scissors"].iter().map(|s| String::from(*s)).collect(),
            outcomes: alloc::vec![alloc::vec![D, R, L], alloc::vec![L, D, R], alloc::vec![R, L, D]],
        }
    }

    pub fn action_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

impl MarkovGame for MatrixGame {
    type State = MatrixState;
    type Obs = ();

    fn num_actions(&self) -> usize {
        self.names.len()
    }

    fn action_name(&self, action: usize) -> String {
        self.names[action].clone()
    }

    fn initial_state(&self) -> MatrixState {
        MatrixState::Start
    }

    fn transition(&self, state: &MatrixState, left: usize, right: usize) -> MatrixState {
        assert_eq!(*state, MatrixState::Start, "transition from a terminal state");
        MatrixState::Done(self.outcomes[left][right])
    }

    fn outcome(&self, state: &MatrixState) -> Option<Outcome> {
        match state {
            MatrixState::Start => None,
            MatrixState::Done(o) => Some(*o),
        }
    }

    fn observe(&self, _state: &MatrixState, _side: Side) {}

    fn shaped_rewards(&self, _prev: &MatrixState, next: &MatrixState) -> [f64; 2] {
        match next {
            MatrixState::Done(o) => [o.sparse(Side::Left) as f64, o.sparse(Side::Right) as f64],
            MatrixState::Start => [0.0, 0.0],
        }
    }

    fn config_text(&self) -> String {
        let mut s = String::from("matrix_game\n");
        for (name, row) in self.names.iter().zip(&self.outcomes) {
            let cells: Vec<&str> = row.iter().map(|o| o.name()).collect();
            s.push_str(&format!("{name} = {}\n", cells.join(",")));
        }
        s
    }
}
