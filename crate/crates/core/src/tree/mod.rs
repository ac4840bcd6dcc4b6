//! Partially expanded game tree whose nodes back up values through `b<`/`b>`
//! instead of min/max.
//!
//! The root is a max node that is always fully expanded; its children are the
//! top-level moves. Every other node may have only some of its successors
//! evaluated, in which case its value is the expectation of the final extremum
//! under the node's successor model `q`.

mod path;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

pub use path::{PathContext, Stage, StageChain};

use crate::dist::{NormalParams, OrderStats};
use crate::scalar::Real;

pub type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeKind {
    Max,
    Min,
}

impl NodeKind {
    pub fn opposite(self) -> Self {
        match self {
            NodeKind::Max => NodeKind::Min,
            NodeKind::Min => NodeKind::Max,
        }
    }

    /// min or max of two values, matching the node kind.
    pub fn combine<T: Real>(self, a: T, b: T) -> T {
        match self {
            NodeKind::Max => a.max(b),
            NodeKind::Min => a.min(b),
        }
    }

    /// Identity of [`combine`](Self::combine): the extremum of nothing.
    pub fn empty_extremum<T: Real>(self) -> T {
        match self {
            NodeKind::Max => T::neg_infinity(),
            NodeKind::Min => T::infinity(),
        }
    }

    pub fn backup<T: Real>(self, stats: &OrderStats<T>, remaining: usize, q: &NormalParams<T>, m: T) -> T {
        match self {
            NodeKind::Max => stats.backup_max(remaining, q, m),
            NodeKind::Min => stats.backup_min(remaining, q, m),
        }
    }

    /// Expected extremum of `remaining` fresh draws; `m` when nothing is left.
    pub fn expected_extremum<T: Real>(self, stats: &OrderStats<T>, remaining: usize, q: &NormalParams<T>) -> T {
        self.backup(stats, remaining, q, self.empty_extremum())
    }
}

/// What a new node looks like when it is added to the tree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeSpec<T> {
    /// Total successor count `n`.
    pub total: usize,
    pub q: NormalParams<T>,
    /// Known exact value (terminal positions).
    pub exact: Option<T>,
}

impl<T: Real> NodeSpec<T> {
    pub fn frontier(total: usize, q: NormalParams<T>) -> Self {
        Self { total, q, exact: None }
    }

    pub fn exact(value: T) -> Self {
        Self { total: 0, q: NormalParams::exact(value), exact: Some(value) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchNode<T> {
    pub kind: NodeKind,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
    pub total: usize,
    pub q: NormalParams<T>,
    pub exact: Option<T>,
    pub value: T,
    pub depth: usize,
    /// Level the node's value must pass to influence its top-level ancestor.
    pub gamma: T,
    /// Furthest its top-level ancestor can be pushed by an unbounded change.
    pub delta: T,
    pub relevant: bool,
}

impl<T: Real> SearchNode<T> {
    pub fn evaluated(&self) -> usize {
        self.children.len()
    }

    /// `l = n - k`
    pub fn unexpanded(&self) -> usize {
        self.total - self.children.len()
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    /// Can this node have another successor generated?
    pub fn is_expandable(&self) -> bool {
        !self.is_exact() && self.unexpanded() > 0
    }
}

/// Outcome of the relevance tests for one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Relevance<T> {
    /// Expanding this node can change the top-level choice.
    pub relevant: bool,
    /// Expanding something below it still can.
    pub subtree_open: bool,
    pub gamma: T,
    pub delta: T,
}

/// Best top-level move and the values that decide whether it can change.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TopLevel<T> {
    pub best: NodeId,
    pub alpha: T,
    pub alpha2: T,
}

#[derive(Debug, Clone)]
pub struct SearchTree<T> {
    nodes: Vec<SearchNode<T>>,
}

impl<T: Real> SearchTree<T> {
    pub const ROOT: NodeId = 0;

    /// A root max node with `top_level_moves` successors, none generated yet.
    pub fn new(top_level_moves: usize) -> Self {
        let root = SearchNode {
            kind: NodeKind::Max,
            parent: None,
            children: Vec::new(),
            total: top_level_moves,
            q: NormalParams::exact(T::zero()),
            exact: None,
            value: T::neg_infinity(),
            depth: 0,
            gamma: T::neg_infinity(),
            delta: T::infinity(),
            relevant: true,
        };
        Self { nodes: vec![root] }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> &SearchNode<T> {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[SearchNode<T>] {
        &self.nodes
    }

    pub fn top_level_nodes(&self) -> &[NodeId] {
        &self.nodes[Self::ROOT].children
    }

    /// Appends a successor of `parent`. Its value is set from `spec`; ancestors
    /// are not updated (see [`backup_path`](Self::backup_path)).
    pub fn add_child(&mut self, stats: &OrderStats<T>, parent: NodeId, spec: NodeSpec<T>) -> NodeId {
        let p = &self.nodes[parent];
        assert!(p.unexpanded() > 0, "node {parent} has no unexpanded successors");
        assert!(!p.is_exact(), "node {parent} is exact");
        let id = self.nodes.len();
        let kind = p.kind.opposite();
        let depth = p.depth + 1;
        let mut node = SearchNode {
            kind,
            parent: Some(parent),
            children: Vec::new(),
            total: spec.total,
            q: spec.q,
            exact: spec.exact,
            value: T::zero(),
            depth,
            gamma: T::neg_infinity(),
            delta: T::infinity(),
            relevant: true,
        };
        node.value = Self::value_of(stats, &node, &[]);
        self.nodes.push(node);
        self.nodes[parent].children.push(id);
        id
    }

    /// Extremum of the evaluated children's current values (`min_k` / `max_k`).
    pub fn extremum(&self, id: NodeId) -> T {
        let n = &self.nodes[id];
        n.children
            .iter()
            .fold(n.kind.empty_extremum(), |acc, &c| n.kind.combine(acc, self.nodes[c].value))
    }

    fn value_of(stats: &OrderStats<T>, node: &SearchNode<T>, child_values: &[T]) -> T {
        if let Some(v) = node.exact {
            return v;
        }
        let l = node.total - child_values.len();
        if child_values.is_empty() && l == 0 {
            return node.q.mean;
        }
        let ext = child_values
            .iter()
            .fold(node.kind.empty_extremum(), |acc, &v| node.kind.combine(acc, v));
        if child_values.is_empty() {
            node.kind.expected_extremum(stats, l, &node.q)
        } else {
            node.kind.backup(stats, l, &node.q, ext)
        }
    }

    /// Value implied by the node's current children: `b_{l,q}(extremum_k)`, the
    /// expected extremum when nothing has been evaluated, or the exact value.
    pub fn node_value(&self, stats: &OrderStats<T>, id: NodeId) -> T {
        let n = &self.nodes[id];
        if id == Self::ROOT {
            return self.extremum(id);
        }
        let vals: Vec<T> = n.children.iter().map(|&c| self.nodes[c].value).collect();
        Self::value_of(stats, n, &vals)
    }

    /// Recomputes stored values from `id` up to the root.
    pub fn backup_path(&mut self, stats: &OrderStats<T>, id: NodeId) {
        let mut cur = Some(id);
        while let Some(c) = cur {
            let v = self.node_value(stats, c);
            self.nodes[c].value = v;
            cur = self.nodes[c].parent;
        }
    }

    /// Recomputes every stored value bottom-up.
    pub fn recompute_values(&mut self, stats: &OrderStats<T>) {
        // Children always have larger ids than their parents.
        for id in (0..self.nodes.len()).rev() {
            let v = self.node_value(stats, id);
            self.nodes[id].value = v;
        }
    }

    /// Extremum over the other evaluated children of `parent` (`bound` in the
    /// propagation function); the empty extremum when `child` is alone.
    pub fn sibling_bound(&self, parent: NodeId, child: NodeId) -> T {
        let p = &self.nodes[parent];
        p.children
            .iter()
            .filter(|&&c| c != child)
            .fold(p.kind.empty_extremum(), |acc, &c| p.kind.combine(acc, self.nodes[c].value))
    }

    pub fn top_level(&self) -> Option<TopLevel<T>> {
        let kids = self.top_level_nodes();
        let mut best: Option<NodeId> = None;
        for &c in kids {
            if best.is_none_or(|b| self.nodes[c].value > self.nodes[b].value) {
                best = Some(c);
            }
        }
        let best = best?;
        let alpha2 = kids
            .iter()
            .filter(|&&c| c != best)
            .fold(T::neg_infinity(), |acc, &c| acc.max(self.nodes[c].value));
        Some(TopLevel { best, alpha: self.nodes[best].value, alpha2 })
    }

    /// The depth-1 ancestor of `id` (itself when `id` is top-level).
    pub fn top_ancestor(&self, id: NodeId) -> NodeId {
        assert_ne!(id, Self::ROOT);
        let mut cur = id;
        while let Some(p) = self.nodes[cur].parent {
            if p == Self::ROOT {
                return cur;
            }
            cur = p;
        }
        unreachable!("non-root node without a top-level ancestor")
    }

    /// Ancestor chain of `id` from the top-level node down to its parent, with
    /// each ancestor's sibling bound relative to the path.
    pub fn path_context(&self, id: NodeId, top: &TopLevel<T>) -> PathContext<T> {
        assert_ne!(id, Self::ROOT);
        let mut stages = Vec::with_capacity(self.nodes[id].depth);
        let mut child = id;
        while let Some(p) = self.nodes[child].parent {
            if p == Self::ROOT {
                break;
            }
            let pn = &self.nodes[p];
            stages.push(Stage {
                node: p,
                kind: pn.kind,
                remaining: pn.unexpanded(),
                q: pn.q,
                bound: self.sibling_bound(p, child),
            });
            child = p;
        }
        stages.reverse();
        PathContext {
            stages,
            alpha: top.alpha,
            alpha2: top.alpha2,
            in_best: child == top.best,
        }
    }

    /// Recomputes gamma, delta and the relevance flag for the subtree under the
    /// top-level node `top_node`, or for every node when `top_node` is `None`.
    pub fn refresh_relevance(&mut self, stats: &OrderStats<T>, top_node: Option<NodeId>) {
        let Some(top) = self.top_level() else {
            return;
        };
        let roots: Vec<NodeId> = match top_node {
            Some(t) => vec![t],
            None => self.top_level_nodes().to_vec(),
        };
        // Each entry carries whether every ancestor left its subtree open.
        let mut stack: Vec<(NodeId, Vec<Stage<T>>, bool)> =
            roots.into_iter().map(|r| (r, Vec::new(), true)).collect();
        while let Some((id, stages, open_above)) = stack.pop() {
            let in_best = self.top_ancestor(id) == top.best;
            let path = PathContext { stages, alpha: top.alpha, alpha2: top.alpha2, in_best };
            let r = if open_above {
                self.relevance_tests(stats, id, &path)
            } else {
                Relevance { relevant: false, subtree_open: false, gamma: T::nan(), delta: T::nan() }
            };
            {
                let n = &mut self.nodes[id];
                n.relevant = r.relevant;
                n.gamma = r.gamma;
                n.delta = r.delta;
            }
            let node = &self.nodes[id];
            for &c in node.children.iter().rev() {
                let mut child_stages = path.stages.clone();
                child_stages.push(Stage {
                    node: id,
                    kind: node.kind,
                    remaining: node.unexpanded(),
                    q: node.q,
                    bound: self.sibling_bound(id, c),
                });
                stack.push((c, child_stages, r.subtree_open));
            }
        }
    }

    /// Tests 2-4 for a node whose ancestors all left their subtrees open, with
    /// the bounds oriented toward the direction of change that matters for the
    /// node's top-level ancestor.
    pub fn relevance_tests(&self, stats: &OrderStats<T>, id: NodeId, path: &PathContext<T>) -> Relevance<T> {
        let n = &self.nodes[id];
        let parent = n.parent.expect("non-root node");
        let has_parent_stage = parent != Self::ROOT;
        let (decides, can_pass_gamma, delta_ok, gamma, delta) = if !path.in_best {
            // Only increases of the top-level value matter.
            let gamma = path.gamma_bound_up(stats);
            let delta = path.delta_bound_up(stats);
            let lowest_known = !(has_parent_stage && n.kind == NodeKind::Max)
                || n.value <= self.sibling_bound(parent, id);
            let can_pass_gamma = n.kind != NodeKind::Min || self.extremum(id) > gamma;
            (lowest_known, can_pass_gamma, delta > path.alpha, gamma, delta)
        } else {
            // Only decreases of the best move's value matter.
            let gamma = path.gamma_bound_down(stats);
            let delta = path.delta_bound_down(stats);
            let highest_known = !(has_parent_stage && n.kind == NodeKind::Min)
                || n.value >= self.sibling_bound(parent, id);
            let can_pass_gamma = n.kind != NodeKind::Max || self.extremum(id) < gamma;
            (highest_known, can_pass_gamma, delta < path.alpha2, gamma, delta)
        };
        // The extremum only limits this node's own expansions: work below it
        // moves the extremum itself.
        let subtree_open = decides && delta_ok;
        Relevance { relevant: subtree_open && can_pass_gamma, subtree_open, gamma, delta }
    }

    /// Relevance of one node computed from scratch along its ancestor chain.
    pub fn is_relevant(&self, stats: &OrderStats<T>, id: NodeId) -> bool {
        let Some(top) = self.top_level() else {
            return false;
        };
        let mut ancestors = Vec::new();
        let mut cur = id;
        while let Some(p) = self.nodes[cur].parent {
            if p == Self::ROOT {
                break;
            }
            ancestors.push(p);
            cur = p;
        }
        ancestors
            .into_iter()
            .all(|a| self.relevance_tests(stats, a, &self.path_context(a, &top)).subtree_open)
            && self.relevance_tests(stats, id, &self.path_context(id, &top)).relevant
    }

    /// Indented text dump of values, bounds and relevance.
    pub fn dump(&self, label: impl Fn(NodeId) -> String) -> String {
        let mut out = String::new();
        let mut stack = vec![Self::ROOT];
        while let Some(id) = stack.pop() {
            let n = &self.nodes[id];
            let kind = match n.kind {
                NodeKind::Max => "max",
                NodeKind::Min => "min",
            };
            let _ = writeln!(
                out,
                "{:indent$}#{id} {} {kind} n={} k={} value={:.4} q=({:.3},{:.3}) gamma={:.4} delta={:.4} {}{}",
                "",
                label(id),
                n.total,
                n.evaluated(),
                n.value,
                n.q.mean,
                n.q.std,
                n.gamma,
                n.delta,
                if n.relevant { "relevant" } else { "irrelevant" },
                if n.is_exact() { " exact" } else { "" },
                indent = 2 * n.depth
            );
            for &c in n.children.iter().rev() {
                stack.push(c);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests;
