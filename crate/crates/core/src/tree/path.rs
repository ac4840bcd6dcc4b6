//! The chain of ancestors between a node and its top-level move, and the maps
//! that carry a value change along it.

use crate::dist::{NormalParams, OrderStats};
use crate::scalar::{Extended, Real};

use super::{NodeId, NodeKind};

/// One backup step. A value `x` arriving from below leaves as
/// `b_{remaining,q}(extremum(bound, x))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stage<T> {
    pub node: NodeId,
    pub kind: NodeKind,
    pub remaining: usize,
    pub q: NormalParams<T>,
    /// Extremum of the other evaluated children of `node`.
    pub bound: T,
}

impl<T: Real> Stage<T> {
    pub fn apply(&self, stats: &OrderStats<T>, x: T) -> T {
        self.kind.backup(stats, self.remaining, &self.q, self.kind.combine(self.bound, x))
    }

    /// The same stage with the sibling bound dropped.
    pub fn unbounded(&self) -> Self {
        Self { bound: self.kind.empty_extremum(), ..*self }
    }

    /// Limit of the output as the input runs off toward the side the stage
    /// flattens: `apply(+inf)` for min stages, `apply(-inf)` for max stages.
    pub fn saturation(&self, stats: &OrderStats<T>) -> T {
        match self.kind {
            NodeKind::Min => self.apply(stats, T::infinity()),
            NodeKind::Max => self.apply(stats, T::neg_infinity()),
        }
    }

    /// `sup { x : apply(x) <= y }` on the extended line.
    pub fn preimage_below(&self, stats: &OrderStats<T>, y: Extended<T>) -> Extended<T> {
        let Extended::Finite(v) = y else {
            return y;
        };
        match self.kind {
            NodeKind::Min => {
                if v >= self.apply(stats, T::infinity()) {
                    Extended::PosInf
                } else {
                    stats.inverse_min_extended(self.remaining, &self.q, y)
                }
            }
            NodeKind::Max => {
                if v < self.apply(stats, T::neg_infinity()) {
                    Extended::NegInf
                } else {
                    stats.inverse_max_extended(self.remaining, &self.q, y)
                }
            }
        }
    }

    /// `inf { x : apply(x) >= y }` on the extended line.
    pub fn preimage_above(&self, stats: &OrderStats<T>, y: Extended<T>) -> Extended<T> {
        let Extended::Finite(v) = y else {
            return y;
        };
        match self.kind {
            NodeKind::Min => {
                if v > self.apply(stats, T::infinity()) {
                    Extended::PosInf
                } else {
                    stats.inverse_min_extended(self.remaining, &self.q, y)
                }
            }
            NodeKind::Max => {
                if v <= self.apply(stats, T::neg_infinity()) {
                    Extended::NegInf
                } else {
                    stats.inverse_max_extended(self.remaining, &self.q, y)
                }
            }
        }
    }
}

/// Outermost-first composition of stages, optionally clamped at the top.
///
/// Every stage is continuous and nondecreasing, so the generalized inverses
/// compose stage by stage.
#[derive(Debug, Clone, PartialEq)]
pub struct StageChain<T> {
    pub stages: Vec<Stage<T>>,
    pub clamp: Option<(T, T)>,
}

impl<T: Real> StageChain<T> {
    pub fn new(stages: Vec<Stage<T>>) -> Self {
        Self { stages, clamp: None }
    }

    pub fn eval(&self, stats: &OrderStats<T>, x: T) -> T {
        let v = self.stages.iter().rev().fold(x, |v, st| st.apply(stats, v));
        match self.clamp {
            Some((lo, hi)) => v.max(lo).min(hi),
            None => v,
        }
    }

    pub fn preimage_below(&self, stats: &OrderStats<T>, y: T) -> T {
        let mut y = Extended::from_scalar(y);
        if let (Some((lo, hi)), Extended::Finite(v)) = (self.clamp, y) {
            if v < lo {
                return T::neg_infinity();
            }
            if v >= hi {
                return T::infinity();
            }
        }
        for st in &self.stages {
            y = st.preimage_below(stats, y);
        }
        y.to_scalar()
    }

    pub fn preimage_above(&self, stats: &OrderStats<T>, y: T) -> T {
        let mut y = Extended::from_scalar(y);
        if let (Some((lo, hi)), Extended::Finite(v)) = (self.clamp, y) {
            if v > hi {
                return T::infinity();
            }
            if v <= lo {
                return T::neg_infinity();
            }
        }
        for st in &self.stages {
            y = st.preimage_above(stats, y);
        }
        y.to_scalar()
    }
}

/// Ancestors of a node from its top-level move (first) down to its parent
/// (last), together with the top-level values the node is judged against.
#[derive(Debug, Clone, PartialEq)]
pub struct PathContext<T> {
    pub stages: Vec<Stage<T>>,
    /// Value of the current best move.
    pub alpha: T,
    /// Best value among the other top-level moves.
    pub alpha2: T,
    /// Whether the path lies under the current best move.
    pub in_best: bool,
}

impl<T: Real> PathContext<T> {
    /// `f`: new top-level value when the node at the bottom of the path takes
    /// value `x` and nothing else changes.
    pub fn compose_f(&self, stats: &OrderStats<T>, x: T) -> T {
        self.stages.iter().rev().fold(x, |v, st| st.apply(stats, v))
    }

    /// `f` with every sibling bound dropped.
    pub fn compose_pure(&self, stats: &OrderStats<T>, x: T) -> T {
        self.stages.iter().rev().fold(x, |v, st| st.unbounded().apply(stats, v))
    }

    pub fn chain(&self) -> StageChain<T> {
        StageChain::new(self.stages.clone())
    }

    fn chain_from(&self, from: usize) -> StageChain<T> {
        StageChain::new(self.stages[from..].to_vec())
    }

    /// Largest level, in the units of the node at the bottom, that some max
    /// ancestor's other children already cover. A value that stays at or below
    /// it cannot move the top level.
    pub fn gamma_bound_up(&self, stats: &OrderStats<T>) -> T {
        self.stages
            .iter()
            .enumerate()
            .filter(|(_, st)| st.kind == NodeKind::Max)
            .map(|(i, st)| self.chain_from(i + 1).preimage_below(stats, st.bound))
            .fold(T::neg_infinity(), T::max)
    }

    /// Mirror of [`gamma_bound_up`](Self::gamma_bound_up) for drops absorbed by
    /// min ancestors.
    pub fn gamma_bound_down(&self, stats: &OrderStats<T>) -> T {
        self.stages
            .iter()
            .enumerate()
            .filter(|(_, st)| st.kind == NodeKind::Min)
            .map(|(i, st)| self.chain_from(i + 1).preimage_above(stats, st.bound))
            .fold(T::infinity(), T::min)
    }

    /// Top-level value reached if the bottom node's value went to `+inf`.
    pub fn delta_bound_up(&self, stats: &OrderStats<T>) -> T {
        self.compose_f(stats, T::infinity())
    }

    /// Top-level value reached if the bottom node's value went to `-inf`.
    pub fn delta_bound_down(&self, stats: &OrderStats<T>) -> T {
        self.compose_f(stats, T::neg_infinity())
    }
}
