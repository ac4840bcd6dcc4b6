//! Fixed-depth alpha-beta over the same game contract and evaluator.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{Game, Side};

#[derive(Debug, Error, PartialEq)]
pub enum AbError {
    #[error("search depth must be at least 1")]
    ZeroDepth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum MoveOrdering {
    /// Successors in the game's order.
    None,
    /// Successors sorted by static value, best for the mover first, wherever at
    /// least two plies remain.
    #[default]
    StaticEval,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbConfig {
    pub depth: u32,
    pub ordering: MoveOrdering,
}

impl AbConfig {
    pub fn new(depth: u32) -> Result<Self, AbError> {
        if depth == 0 {
            return Err(AbError::ZeroDepth);
        }
        Ok(Self { depth, ordering: MoveOrdering::StaticEval })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbStats {
    /// Successor states generated.
    pub nodes: usize,
    /// States scored at the horizon or at game end.
    pub leaves: usize,
    pub wall_time: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AbOutcome<M> {
    pub best: M,
    /// Minimax value at the configured depth, root player's view. NaN for a
    /// forced move, which is returned without search.
    pub value: f64,
    pub stats: AbStats,
}

struct Searcher<'a, G> {
    game: &'a G,
    root_side: Side,
    ordering: MoveOrdering,
    nodes: usize,
    leaves: usize,
}

impl<G: Game> Searcher<'_, G> {
    /// Successors of `state`, ordered for the mover when `depth` allows it.
    fn children(&mut self, state: &G::State, depth: u32) -> Vec<(G::Move, G::State)> {
        let mut kids: Vec<(G::Move, G::State)> = self
            .game
            .successors(state)
            .into_iter()
            .map(|mv| {
                let child = self.game.apply(state, mv).expect("successor listed by the game must be legal");
                (mv, child)
            })
            .collect();
        self.nodes += kids.len();
        if self.ordering == MoveOrdering::StaticEval && depth >= 2 {
            let maximizing = self.game.side_to_move(state) == self.root_side;
            let mut keyed: Vec<(f64, (G::Move, G::State))> = kids
                .into_iter()
                .map(|k| (self.game.value_for(&k.1, self.root_side), k))
                .collect();
            keyed.sort_by(|a, b| {
                let o = a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal);
                if maximizing {
                    o.reverse()
                } else {
                    o
                }
            });
            kids = keyed.into_iter().map(|(_, k)| k).collect();
        }
        kids
    }

    fn search(&mut self, state: &G::State, depth: u32, mut alpha: f64, mut beta: f64) -> f64 {
        if depth == 0 || self.game.is_terminal(state) {
            self.leaves += 1;
            return self.game.value_for(state, self.root_side);
        }
        let maximizing = self.game.side_to_move(state) == self.root_side;
        if self.ordering == MoveOrdering::StaticEval && depth >= 2 {
            let kids = self.children(state, depth);
            let mut best = if maximizing { f64::NEG_INFINITY } else { f64::INFINITY };
            for (_, child) in &kids {
                let v = self.search(child, depth - 1, alpha, beta);
                if maximizing {
                    best = best.max(v);
                    alpha = alpha.max(v);
                } else {
                    best = best.min(v);
                    beta = beta.min(v);
                }
                if alpha >= beta {
                    break;
                }
            }
            return best;
        }
        // Generate lazily so cut-off successors are never counted.
        let mut best = if maximizing { f64::NEG_INFINITY } else { f64::INFINITY };
        for mv in self.game.successors(state) {
            let child = self.game.apply(state, mv).expect("successor listed by the game must be legal");
            self.nodes += 1;
            let v = self.search(&child, depth - 1, alpha, beta);
            if maximizing {
                best = best.max(v);
                alpha = alpha.max(v);
            } else {
                best = best.min(v);
                beta = beta.min(v);
            }
            if alpha >= beta {
                break;
            }
        }
        best
    }
}

/// Best move for the player to move at `state`, searching `config.depth` plies.
/// Returns `None` for terminal positions.
pub fn alphabeta_search<G: Game>(game: &G, state: &G::State, config: &AbConfig) -> Option<AbOutcome<G::Move>> {
    let started = Instant::now();
    let moves = game.successors(state);
    if moves.is_empty() {
        return None;
    }
    if moves.len() == 1 {
        return Some(AbOutcome {
            best: moves[0],
            value: f64::NAN,
            stats: AbStats { nodes: 0, leaves: 0, wall_time: started.elapsed() },
        });
    }
    let mut s = Searcher {
        game,
        root_side: game.side_to_move(state),
        ordering: config.ordering,
        nodes: 0,
        leaves: 0,
    };
    let kids = if config.ordering == MoveOrdering::StaticEval && config.depth >= 2 {
        s.children(state, config.depth)
    } else {
        let kids: Vec<_> = moves
            .iter()
            .map(|&mv| (mv, game.apply(state, mv).expect("successor listed by the game must be legal")))
            .collect();
        s.nodes += kids.len();
        kids
    };
    let mut best: Option<(G::Move, f64)> = None;
    let mut alpha = f64::NEG_INFINITY;
    for (mv, child) in &kids {
        let v = s.search(child, config.depth - 1, alpha, f64::INFINITY);
        if best.is_none_or(|(_, bv)| v > bv) {
            best = Some((*mv, v));
        }
        alpha = alpha.max(v);
    }
    let (best, value) = best.expect("at least two moves");
    Some(AbOutcome {
        best,
        value,
        stats: AbStats { nodes: s.nodes, leaves: s.leaves, wall_time: started.elapsed() },
    })
}
