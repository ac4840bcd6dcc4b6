//! Game contract shared by both search engines, plus the concrete games.

pub mod calibration;
pub mod eval;
pub mod othello;
pub mod tree_game;

use std::fmt::Debug;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use calibration::{calibrate_q, Bucket, CalibrationError, PositionSample, QCalibration};
pub use eval::EvalModel;
pub use othello::{Board, Othello, OthelloMove};
pub use tree_game::TreeGame;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    First,
    Second,
}

impl Side {
    pub fn opponent(self) -> Side {
        match self {
            Side::First => Side::Second,
            Side::Second => Side::First,
        }
    }

    /// +1 for the first player, -1 for the second.
    pub fn sign(self) -> f64 {
        match self {
            Side::First => 1.0,
            Side::Second => -1.0,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum GameError {
    #[error("illegal move {0}")]
    IllegalMove(String),
    #[error("cannot parse {0:?}")]
    Parse(String),
}

/// Two-player zero-sum game with deterministic, pure move application.
///
/// Scores and static evaluations are reported from the first player's point of
/// view; searches reorient them to the root player.
pub trait Game {
    type State: Clone + Debug;
    type Move: Copy + Eq + Debug;

    fn side_to_move(&self, state: &Self::State) -> Side;

    /// Every successor move. Empty exactly when the state is terminal; a
    /// mandatory pass is returned as the single move.
    fn successors(&self, state: &Self::State) -> Vec<Self::Move>;

    fn apply(&self, state: &Self::State, mv: Self::Move) -> Result<Self::State, GameError>;

    fn is_terminal(&self, state: &Self::State) -> bool;

    fn terminal_score(&self, state: &Self::State) -> f64;

    fn evaluate(&self, state: &Self::State) -> f64;

    /// Game-phase coordinate used to bucket successor statistics.
    fn phase(&self, state: &Self::State) -> u32;

    /// Exact score for terminal states, static evaluation otherwise, from the
    /// point of view of `side`.
    fn value_for(&self, state: &Self::State, side: Side) -> f64 {
        let v = if self.is_terminal(state) {
            self.terminal_score(state)
        } else {
            self.evaluate(state)
        };
        v * side.sign()
    }

    fn move_label(&self, mv: Self::Move) -> String {
        format!("{mv:?}")
    }
}
