//! Explicit game trees with fixed leaf scores, for exercising the searches on
//! instances small enough to solve exhaustively.

use rand::Rng;

use crate::game::{Game, GameError, Side};

#[derive(Debug, Clone)]
pub struct TreeGameNode {
    pub children: Vec<usize>,
    /// Exact score for leaves, static evaluation for interior nodes
    /// (first player's point of view).
    pub value: f64,
    pub depth: u32,
}

#[derive(Debug, Clone)]
pub struct TreeGame {
    pub nodes: Vec<TreeGameNode>,
}

impl TreeGame {
    pub const ROOT: usize = 0;

    /// Complete tree of the given branching and depth; `leaf` supplies the score
    /// of each leaf in left-to-right order, `interior` the static value of each
    /// interior node in creation order.
    pub fn uniform(
        branching: usize,
        depth: u32,
        mut leaf: impl FnMut(usize) -> f64,
        mut interior: impl FnMut(usize) -> f64,
    ) -> Self {
        let mut nodes = vec![TreeGameNode { children: Vec::new(), value: 0.0, depth: 0 }];
        let mut frontier = vec![0usize];
        let mut interior_count = 0;
        let mut leaf_count = 0;
        for d in 0..depth {
            let mut next = Vec::new();
            for &id in &frontier {
                nodes[id].value = interior(interior_count);
                interior_count += 1;
                for _ in 0..branching {
                    let child = nodes.len();
                    nodes.push(TreeGameNode { children: Vec::new(), value: 0.0, depth: d + 1 });
                    nodes[id].children.push(child);
                    next.push(child);
                }
            }
            frontier = next;
        }
        for &id in &frontier {
            nodes[id].value = leaf(leaf_count);
            leaf_count += 1;
        }
        Self { nodes }
    }

    /// Random tree: every interior node has `min_branch..=max_branch` children,
    /// all leaves sit at `depth`, leaf scores are uniform on `[-1, 1)` and interior
    /// static values are the mean of their leaves plus noise.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, depth: u32, min_branch: usize, max_branch: usize, noise: f64) -> Self {
        let mut nodes = vec![TreeGameNode { children: Vec::new(), value: 0.0, depth: 0 }];
        let mut frontier = vec![0usize];
        for d in 0..depth {
            let mut next = Vec::new();
            for &id in &frontier {
                let b = rng.random_range(min_branch..=max_branch);
                for _ in 0..b {
                    let child = nodes.len();
                    nodes.push(TreeGameNode { children: Vec::new(), value: 0.0, depth: d + 1 });
                    nodes[id].children.push(child);
                    next.push(child);
                }
            }
            frontier = next;
        }
        for &id in &frontier {
            nodes[id].value = rng.random_range(-1.0..1.0);
        }
        for id in (0..nodes.len()).rev() {
            if !nodes[id].children.is_empty() {
                let kids = &nodes[id].children;
                let mean = kids.iter().map(|&c| nodes[c].value).sum::<f64>() / kids.len() as f64;
                nodes[id].value = mean + noise * rng.random_range(-1.0..1.0);
            }
        }
        Self { nodes }
    }

    /// Plain minimax value of `node` from the first player's point of view.
    pub fn minimax(&self, node: usize) -> f64 {
        let n = &self.nodes[node];
        if n.children.is_empty() {
            return n.value;
        }
        let vals = n.children.iter().map(|&c| self.minimax(c));
        if n.depth % 2 == 0 {
            vals.fold(f64::NEG_INFINITY, f64::max)
        } else {
            vals.fold(f64::INFINITY, f64::min)
        }
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.children.is_empty()).count()
    }
}

impl Game for TreeGame {
    type State = usize;
    type Move = usize;

    fn side_to_move(&self, state: &usize) -> Side {
        if self.nodes[*state].depth % 2 == 0 {
            Side::First
        } else {
            Side::Second
        }
    }

    fn successors(&self, state: &usize) -> Vec<usize> {
        (0..self.nodes[*state].children.len()).collect()
    }

    fn apply(&self, state: &usize, mv: usize) -> Result<usize, GameError> {
        self.nodes[*state]
            .children
            .get(mv)
            .copied()
            .ok_or_else(|| GameError::IllegalMove(format!("{mv} at node {state}")))
    }

    fn is_terminal(&self, state: &usize) -> bool {
        self.nodes[*state].children.is_empty()
    }

    fn terminal_score(&self, state: &usize) -> f64 {
        self.nodes[*state].value
    }

    fn evaluate(&self, state: &usize) -> f64 {
        self.nodes[*state].value
    }

    fn phase(&self, state: &usize) -> u32 {
        self.nodes[*state].depth
    }
}
