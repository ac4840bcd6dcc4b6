//! Value of computation: what generating more successors of a node is expected
//! to gain at the top level, and the rule that picks the next expansion.

mod search;

pub use search::{mgss2_search, SearchOutcome, SearchStats, SuccessorOrder, TraceStep};

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dist::quadrature::integrate;
use crate::dist::{MaxStatModel, MinStatModel, NormalParams, OrderStats};
use crate::scalar::Real;
use crate::tree::{NodeId, NodeKind, PathContext, SearchTree, Stage, StageChain, TopLevel};

#[derive(Debug, Error, PartialEq)]
pub enum VocError {
    #[error("invalid search parameters: {0}")]
    InvalidParams(String),
}

/// How the propagation function is evaluated inside the benefit integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum FMode {
    /// Full nested composition along the path at every quadrature point.
    #[default]
    Exact,
    /// Only the most constraining backup stage, clamped to the path's range.
    SingleStage,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VocParams<T> {
    /// Cost of one successor evaluation, in evaluation units.
    pub kappa: T,
    /// Successor counts considered per computation; the one with the best
    /// benefit per successor wins. Sizes above a node's remaining count mean
    /// "all of them".
    pub batch_sizes: Vec<usize>,
    /// Absolute quadrature tolerance per unit of the target's `q` spread.
    pub quad_tol: T,
    pub f_mode: FMode,
    /// Cap the boundary point-mass term at the path's saturation level too.
    pub cap_point_mass: bool,
    pub max_evaluations: Option<usize>,
    /// Rescore every candidate after each expansion instead of only the
    /// affected subtree.
    pub full_rescore: bool,
    pub ordering: SuccessorOrder,
    /// Record every step's candidate list.
    pub trace: bool,
}

impl<T: Real> VocParams<T> {
    pub fn new(kappa: T) -> Result<Self, VocError> {
        let p = Self {
            kappa,
            batch_sizes: vec![1],
            quad_tol: T::lit(1e-7),
            f_mode: FMode::Exact,
            cap_point_mass: true,
            max_evaluations: None,
            full_rescore: false,
            ordering: SuccessorOrder::Random,
            trace: false,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), VocError> {
        if !(self.kappa > T::zero()) {
            return Err(VocError::InvalidParams(format!("kappa must be positive, got {}", self.kappa)));
        }
        if self.batch_sizes.is_empty() || self.batch_sizes.contains(&0) {
            return Err(VocError::InvalidParams("batch sizes must be nonempty and at least 1".into()));
        }
        if !(self.quad_tol > T::zero()) {
            return Err(VocError::InvalidParams("quadrature tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// Where the expected gain comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BenefitCase {
    /// No outcome of the expansion can change the decision; benefit is 0.
    Absorbed,
    /// The gain grows across the whole reachable range.
    Interior,
    /// Part of the outcomes hit the path's saturation level and gain a constant.
    Capped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseTag {
    pub case: BenefitCase,
    pub under_best: bool,
    pub kind: NodeKind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Benefit<T> {
    pub value: T,
    pub case: BenefitCase,
}

impl<T: Real> Benefit<T> {
    fn zero() -> Self {
        Self { value: T::zero(), case: BenefitCase::Absorbed }
    }
}

/// The node to be expanded, seen from its own position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Target<T> {
    pub node: NodeId,
    pub kind: NodeKind,
    /// `min_k` or `max_k` of the evaluated children; the empty extremum if none.
    pub extremum: T,
    pub remaining: usize,
    pub q: NormalParams<T>,
}

impl<T: Real> Target<T> {
    pub fn of(tree: &SearchTree<T>, id: NodeId) -> Self {
        let n = tree.node(id);
        Self { node: id, kind: n.kind, extremum: tree.extremum(id), remaining: n.unexpanded(), q: n.q }
    }

    /// The map from the extremum of `s` new draws to the node's new value.
    pub fn g_stage(&self, s: usize) -> Stage<T> {
        Stage {
            node: self.node,
            kind: self.kind,
            remaining: self.remaining - s,
            q: self.q,
            bound: self.extremum,
        }
    }

    fn draw_cdf(&self, s: usize, x: T) -> T {
        match self.kind {
            NodeKind::Min => MinStatModel::new(self.q, s).cdf(x),
            NodeKind::Max => MaxStatModel::new(self.q, s).cdf(x),
        }
    }

    fn draw_pdf(&self, s: usize, x: T) -> T {
        let p = match self.kind {
            NodeKind::Min => MinStatModel::new(self.q, s).pdf(x),
            NodeKind::Max => MaxStatModel::new(self.q, s).pdf(x),
        };
        p.unwrap_or_else(|_| T::zero())
    }
}

/// `g`: the target's value once the extremum of the `s` new successors is `m`.
pub fn g_map<T: Real>(stats: &OrderStats<T>, target: &Target<T>, s: usize, m: T) -> T {
    target.g_stage(s).apply(stats, m)
}

/// The path stage that dominates the filtering: the one whose saturation level
/// sits nearest the window of top-level values that matter.
pub fn critical_stage<T: Real>(stats: &OrderStats<T>, path: &PathContext<T>) -> Option<Stage<T>> {
    let (lo, hi) = if path.in_best {
        (path.delta_bound_down(stats), path.alpha2)
    } else {
        (path.alpha, path.delta_bound_up(stats))
    };
    let mut best: Option<(T, Stage<T>)> = None;
    for st in path.stages.iter().filter(|st| st.remaining > 0) {
        let sat = st.unbounded().saturation(stats);
        let dist = if sat < lo {
            lo - sat
        } else if sat > hi {
            sat - hi
        } else {
            T::zero()
        };
        if best.as_ref().is_none_or(|(d, _)| dist < *d) {
            best = Some((dist, *st));
        }
    }
    best.map(|(_, st)| st.unbounded())
}

struct BenefitMap<T> {
    chain: StageChain<T>,
    /// Composition used for the boundary term when it is not capped.
    uncapped: StageChain<T>,
    uncapped_floor: T,
    uncapped_ceiling: T,
}

fn benefit_map<T: Real>(stats: &OrderStats<T>, path: &PathContext<T>, g: Stage<T>, mode: FMode) -> BenefitMap<T> {
    let lo = path.delta_bound_down(stats);
    let hi = path.delta_bound_up(stats);
    let (chain, pure_stages) = match mode {
        FMode::Exact => {
            let mut stages = path.stages.clone();
            stages.push(g);
            let mut pure: Vec<Stage<T>> = path.stages.iter().map(Stage::unbounded).collect();
            pure.push(g);
            (StageChain::new(stages), pure)
        }
        FMode::SingleStage => {
            let mut stages: Vec<Stage<T>> = critical_stage(stats, path).into_iter().collect();
            stages.push(g);
            let chain = StageChain { stages: stages.clone(), clamp: Some((lo, hi)) };
            (chain, stages)
        }
    };
    BenefitMap { chain, uncapped: StageChain::new(pure_stages), uncapped_floor: lo, uncapped_ceiling: hi }
}

/// Expected improvement in the top-level decision from generating `s` more
/// successors of `target`, whose ancestors are described by `path`.
///
/// Off the best move the gain is how far the target's top-level ancestor ends
/// up above `alpha`; under the best move it is how far the best move ends up
/// below `alpha2`. Outcomes are the extremum of the `s` new draws: a density on
/// the side of the current extremum that can move the node, and a point mass
/// where the draws leave the extremum alone.
pub fn expected_benefit<T: Real>(
    stats: &OrderStats<T>,
    path: &PathContext<T>,
    target: &Target<T>,
    s: usize,
    params: &VocParams<T>,
) -> Benefit<T> {
    assert!(s >= 1 && s <= target.remaining, "s = {s} with {} remaining", target.remaining);
    assert!(!target.q.is_exact(), "target has no spread");
    let map = benefit_map(stats, path, target.g_stage(s), params.f_mode);
    let up = !path.in_best;
    let theta = if up { path.alpha } else { path.alpha2 };
    let gain = |v: T| if up { (v - theta).max(T::zero()) } else { (theta - v).max(T::zero()) };
    let e = target.extremum;

    // Continuous part lives on one side of `e`, within the model's support.
    let (a, b, a_ext, b_ext) = match target.kind {
        NodeKind::Min => (target.q.lo(), e.min(target.q.hi()), T::neg_infinity(), e),
        NodeKind::Max => (e.max(target.q.lo()), target.q.hi(), e, T::infinity()),
    };
    let tol = params.quad_tol * target.q.std;
    let pdf = |u: T| target.draw_pdf(s, u);

    let (continuous, case) = if up {
        let top = map.chain.eval(stats, b_ext);
        if top <= theta {
            (T::zero(), BenefitCase::Absorbed)
        } else {
            let start = a.max(map.chain.preimage_below(stats, theta));
            let cap = map.chain.preimage_above(stats, top);
            let end = b.min(cap);
            let mut total = T::zero();
            if start < end {
                total = total + integrate(|u| gain(map.chain.eval(stats, u)) * pdf(u), start, end, tol);
            }
            let flat_from = start.max(cap);
            if flat_from < b {
                total = total + (top - theta) * (target.draw_cdf(s, b) - target.draw_cdf(s, flat_from));
            }
            let case = if cap < b { BenefitCase::Capped } else { BenefitCase::Interior };
            (total, case)
        }
    } else {
        let bottom = map.chain.eval(stats, a_ext);
        if bottom >= theta {
            (T::zero(), BenefitCase::Absorbed)
        } else {
            let end = b.min(map.chain.preimage_above(stats, theta));
            let cap = map.chain.preimage_below(stats, bottom);
            let start = a.max(cap);
            let mut total = T::zero();
            if start < end {
                total = total + integrate(|u| gain(map.chain.eval(stats, u)) * pdf(u), start, end, tol);
            }
            let flat_to = end.min(cap);
            if a < flat_to {
                total = total + (theta - bottom) * (target.draw_cdf(s, flat_to) - target.draw_cdf(s, a));
            }
            let case = if cap > a { BenefitCase::Capped } else { BenefitCase::Interior };
            (total, case)
        }
    };

    // Boundary term: the new draws do not pass the current extremum.
    let point_mass = if e.is_finite() {
        match target.kind {
            NodeKind::Min => T::one() - target.draw_cdf(s, e),
            NodeKind::Max => target.draw_cdf(s, e),
        }
    } else {
        T::zero()
    };
    let point_gain = if point_mass > T::zero() {
        let v = if params.cap_point_mass || case != BenefitCase::Capped {
            map.chain.eval(stats, e)
        } else if up {
            map.uncapped.eval(stats, e).max(map.uncapped_floor)
        } else {
            map.uncapped.eval(stats, e).min(map.uncapped_ceiling)
        };
        gain(v)
    } else {
        T::zero()
    };

    if case == BenefitCase::Absorbed && point_gain == T::zero() {
        return Benefit::zero();
    }
    let value = (continuous + point_mass * point_gain).max(T::zero());
    let case = if case == BenefitCase::Absorbed { BenefitCase::Interior } else { case };
    Benefit { value, case }
}

/// A scored expansion of one node.
#[derive(Debug, Clone, PartialEq)]
pub struct ComputationCandidate<T> {
    pub node: NodeId,
    pub path: PathContext<T>,
    pub tag: CaseTag,
    pub benefit: T,
    /// Successors generated by this computation.
    pub steps: usize,
    pub net_value: T,
    pub depth: usize,
}

pub fn net_value<T: Real>(benefit: T, steps: usize, kappa: T) -> T {
    benefit - kappa * T::from_usize_lossy(steps)
}

/// Scores expanding `id`, or `None` when it is not an expansion candidate
/// (irrelevant, exact, or out of successors).
pub fn score_node<T: Real>(
    stats: &OrderStats<T>,
    tree: &SearchTree<T>,
    id: NodeId,
    top: &TopLevel<T>,
    params: &VocParams<T>,
) -> Option<ComputationCandidate<T>> {
    let n = tree.node(id);
    if id == SearchTree::<T>::ROOT || !n.relevant || !n.is_expandable() || n.q.is_exact() {
        return None;
    }
    let path = tree.path_context(id, top);
    let target = Target::of(tree, id);
    let mut best: Option<(usize, Benefit<T>)> = None;
    let mut sizes: Vec<usize> = params.batch_sizes.iter().map(|&s| s.min(target.remaining)).collect();
    sizes.sort_unstable();
    sizes.dedup();
    for s in sizes {
        let b = expected_benefit(stats, &path, &target, s, params);
        let rate = b.value / T::from_usize_lossy(s);
        let better = match &best {
            None => true,
            Some((bs, bb)) => {
                let best_rate = bb.value / T::from_usize_lossy(*bs);
                rate > best_rate || (rate == best_rate && s < *bs)
            }
        };
        if better {
            best = Some((s, b));
        }
    }
    let (steps, b) = best?;
    Some(ComputationCandidate {
        node: id,
        tag: CaseTag { case: b.case, under_best: path.in_best, kind: n.kind },
        path,
        benefit: b.value,
        steps,
        net_value: net_value(b.value, steps, params.kappa),
        depth: n.depth,
    })
}

/// Higher net value first, then shallower, then older.
pub fn candidate_order<T: Real>(a: &ComputationCandidate<T>, b: &ComputationCandidate<T>) -> Ordering {
    b.net_value
        .partial_cmp(&a.net_value)
        .unwrap_or(Ordering::Equal)
        .then(a.depth.cmp(&b.depth))
        .then(a.node.cmp(&b.node))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    /// Only one legal move at the root.
    ForcedMove,
    /// Best candidate's net value was not positive.
    NoPositiveValue,
    /// No relevant node had successors left to generate.
    EmptyFrontier,
    /// Evaluation budget reached.
    EvaluationCap,
}

impl StopReason {
    pub fn label(self) -> &'static str {
        match self {
            StopReason::ForcedMove => "forced",
            StopReason::NoPositiveValue => "no-positive-value",
            StopReason::EmptyFrontier => "empty-frontier",
            StopReason::EvaluationCap => "evaluation-cap",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Decision<T> {
    Expand(ComputationCandidate<T>),
    Stop(StopReason),
}

/// Best candidate among `candidates`, or the reason to stop.
pub fn choose<T: Real>(candidates: &[ComputationCandidate<T>]) -> Decision<T> {
    match candidates.iter().min_by(|a, b| candidate_order(a, b)) {
        None => Decision::Stop(StopReason::EmptyFrontier),
        Some(c) if c.net_value > T::zero() => Decision::Expand(c.clone()),
        Some(_) => Decision::Stop(StopReason::NoPositiveValue),
    }
}

/// Refreshes relevance, scores every relevant frontier node and picks the
/// expansion with the highest net value. Also returns how many were scored.
pub fn select_computation<T: Real>(
    stats: &OrderStats<T>,
    tree: &mut SearchTree<T>,
    params: &VocParams<T>,
) -> (Decision<T>, Vec<ComputationCandidate<T>>) {
    tree.refresh_relevance(stats, None);
    let Some(top) = tree.top_level() else {
        return (Decision::Stop(StopReason::EmptyFrontier), Vec::new());
    };
    let candidates: Vec<_> =
        (1..tree.len()).filter_map(|id| score_node(stats, tree, id, &top, params)).collect();
    (choose(&candidates), candidates)
}
