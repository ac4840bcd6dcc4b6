//! The metareasoning loop: expand whatever has the highest positive net value,
//! then move.

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dist::{NormalParams, OrderStats};
use crate::game::{Game, QCalibration, Side};
use crate::scalar::Real;
use crate::tree::{NodeId, NodeKind, NodeSpec, SearchTree, TopLevel};

use super::{candidate_order, choose, score_node, ComputationCandidate, Decision, StopReason, VocParams};

/// Order in which a node's unexpanded successors are generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum SuccessorOrder {
    /// Uniformly at random, driven by the search's RNG.
    #[default]
    Random,
    /// In the order the game lists them.
    GameOrder,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchStats {
    /// Successor states generated and statically evaluated.
    pub evaluations: usize,
    /// Expansions performed by the loop.
    pub iterations: usize,
    /// Benefit computations performed.
    pub candidates_scored: usize,
    pub stop: StopReason,
    pub wall_time: Duration,
    pub tree_nodes: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep<T> {
    pub iteration: usize,
    /// Every scored candidate, best first.
    pub candidates: Vec<ComputationCandidate<T>>,
    pub decision: Decision<T>,
}

#[derive(Debug, Clone)]
pub struct SearchOutcome<M, T> {
    pub best: M,
    /// Value of the chosen move at the end of the search (root player's view).
    pub value: T,
    pub stats: SearchStats,
    pub trace: Vec<TraceStep<T>>,
    pub tree: SearchTree<T>,
    /// Move leading to each top-level node, in tree order.
    pub root_moves: Vec<M>,
}

struct Engine<'a, G: Game, T: Real> {
    game: &'a G,
    stats: &'a OrderStats<T>,
    calibration: &'a QCalibration,
    params: &'a VocParams<T>,
    root_side: Side,
    tree: SearchTree<T>,
    states: Vec<G::State>,
    pending: Vec<Vec<G::Move>>,
    top_of: Vec<NodeId>,
    /// Latest score per node; `None` when it must be recomputed.
    cache: Vec<Option<Option<ComputationCandidate<T>>>>,
    evaluations: usize,
    candidates_scored: usize,
}

impl<G: Game, T: Real> Engine<'_, G, T> {
    fn add_node<R: Rng + ?Sized>(&mut self, parent: NodeId, state: G::State, rng: &mut R) -> NodeId {
        let mut moves = self.game.successors(&state);
        let value = self.game.value_for(&state, self.root_side);
        let spec = if moves.is_empty() {
            NodeSpec::exact(T::lit(value))
        } else {
            let kind = self.tree.node(parent).kind.opposite();
            // The calibration is in the mover's frame; min nodes belong to the opponent.
            let mover_value = if kind == NodeKind::Max { value } else { -value };
            let mq = self.calibration.mover_q(self.game.phase(&state), moves.len(), mover_value);
            let mean = if kind == NodeKind::Max { mq.mean } else { -mq.mean };
            NodeSpec::frontier(moves.len(), NormalParams { mean: T::lit(mean), std: T::lit(mq.std) })
        };
        match self.params.ordering {
            SuccessorOrder::Random => moves.shuffle(rng),
            SuccessorOrder::GameOrder => moves.reverse(),
        }
        let id = self.tree.add_child(self.stats, parent, spec);
        self.states.push(state);
        self.pending.push(moves);
        self.top_of.push(if parent == SearchTree::<T>::ROOT { id } else { self.top_of[parent] });
        self.cache.push(None);
        self.evaluations += 1;
        id
    }

    fn expand<R: Rng + ?Sized>(&mut self, id: NodeId, steps: usize, rng: &mut R) {
        for _ in 0..steps {
            let Some(mv) = self.pending[id].pop() else {
                break;
            };
            let child = self
                .game
                .apply(&self.states[id], mv)
                .expect("successor listed by the game must be legal");
            self.add_node(id, child, rng);
        }
        self.tree.backup_path(self.stats, id);
    }

    fn invalidate(&mut self, before: Option<TopLevel<T>>, expanded: NodeId) {
        let after = self.tree.top_level();
        if self.params.full_rescore || before != after {
            self.tree.refresh_relevance(self.stats, None);
            self.cache.iter_mut().for_each(|c| *c = None);
        } else {
            let top = self.top_of[expanded];
            self.tree.refresh_relevance(self.stats, Some(top));
            for (id, c) in self.cache.iter_mut().enumerate().skip(1) {
                if self.top_of[id] == top {
                    *c = None;
                }
            }
        }
    }

    fn candidates(&mut self) -> Vec<ComputationCandidate<T>> {
        let Some(top) = self.tree.top_level() else {
            return Vec::new();
        };
        for id in 1..self.tree.len() {
            if self.cache[id].is_none() {
                let scored = score_node(self.stats, &self.tree, id, &top, self.params);
                if scored.is_some() {
                    self.candidates_scored += 1;
                }
                self.cache[id] = Some(scored);
            }
        }
        self.cache.iter().filter_map(|c| c.clone().flatten()).collect()
    }
}

/// Chooses a move for the player to move at `root`.
///
/// Returns `None` for terminal positions. A forced move is returned without
/// evaluating anything.
pub fn mgss2_search<G: Game, T: Real, R: Rng + ?Sized>(
    game: &G,
    root: &G::State,
    stats: &OrderStats<T>,
    calibration: &QCalibration,
    params: &VocParams<T>,
    rng: &mut R,
) -> Option<SearchOutcome<G::Move, T>> {
    let started = Instant::now();
    let root_moves = game.successors(root);
    if root_moves.is_empty() {
        return None;
    }
    let mut engine = Engine {
        game,
        stats,
        calibration,
        params,
        root_side: game.side_to_move(root),
        tree: SearchTree::new(root_moves.len()),
        states: vec![root.clone()],
        pending: vec![Vec::new()],
        top_of: vec![SearchTree::<T>::ROOT],
        cache: vec![Some(None)],
        evaluations: 0,
        candidates_scored: 0,
    };
    if root_moves.len() == 1 {
        return Some(SearchOutcome {
            best: root_moves[0],
            value: T::nan(),
            stats: SearchStats {
                evaluations: 0,
                iterations: 0,
                candidates_scored: 0,
                stop: StopReason::ForcedMove,
                wall_time: started.elapsed(),
                tree_nodes: 1,
            },
            trace: Vec::new(),
            tree: engine.tree,
            root_moves,
        });
    }
    for &mv in &root_moves {
        let child = game.apply(root, mv).expect("successor listed by the game must be legal");
        engine.add_node(SearchTree::<T>::ROOT, child, rng);
    }
    engine.tree.backup_path(stats, SearchTree::<T>::ROOT);
    engine.tree.refresh_relevance(stats, None);

    let mut trace = Vec::new();
    let mut iterations = 0;
    let stop = loop {
        let cap_left = params.max_evaluations.map(|cap| cap.saturating_sub(engine.evaluations));
        if cap_left == Some(0) {
            break StopReason::EvaluationCap;
        }
        let mut candidates = engine.candidates();
        let decision = choose(&candidates);
        if params.trace {
            candidates.sort_by(candidate_order);
            trace.push(TraceStep { iteration: iterations, candidates, decision: decision.clone() });
        }
        match decision {
            Decision::Stop(reason) => break reason,
            Decision::Expand(c) => {
                let before = engine.tree.top_level();
                let steps = cap_left.map_or(c.steps, |left| c.steps.min(left));
                engine.expand(c.node, steps, rng);
                engine.invalidate(before, c.node);
                iterations += 1;
            }
        }
    };

    let top = engine.tree.top_level().expect("root has children");
    let index = engine.tree.top_level_nodes().iter().position(|&c| c == top.best).expect("best is a root child");
    Some(SearchOutcome {
        best: root_moves[index],
        value: top.alpha,
        stats: SearchStats {
            evaluations: engine.evaluations,
            iterations,
            candidates_scored: engine.candidates_scored,
            stop,
            wall_time: started.elapsed(),
            tree_nodes: engine.tree.len(),
        },
        trace,
        tree: engine.tree,
        root_moves,
    })
}
