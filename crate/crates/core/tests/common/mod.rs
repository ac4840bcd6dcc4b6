//! Shared fixtures for the integration tests: random micro-trees with known q
//! everywhere and brute-force Monte Carlo oracles over them.
#![allow(dead_code)]

use std::io::Write;
use std::sync::OnceLock;

use mgss::dist::{NormalParams, OrderStats};
use mgss::tree::{NodeId, NodeKind, NodeSpec, SearchTree};
use rand::Rng;
use rand_distr::{Distribution, Normal};

pub fn stats() -> &'static OrderStats<f64> {
    static S: OnceLock<OrderStats<f64>> = OnceLock::new();
    S.get_or_init(OrderStats::default)
}

/// One result line, written past the test harness's output capture.
pub fn report(criterion: u32, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "criterion {criterion:>2} {verdict}: {detail}");
}

pub fn q(mean: f64, std: f64) -> NormalParams<f64> {
    NormalParams::new(mean, std).unwrap()
}

fn random_q<R: Rng + ?Sized>(rng: &mut R) -> NormalParams<f64> {
    q(rng.random_range(-1.0..1.0), rng.random_range(0.3..1.5))
}

fn grow<R: Rng + ?Sized>(t: &mut SearchTree<f64>, rng: &mut R, parent: NodeId, depth: usize) {
    let s = stats();
    if rng.random_bool(0.15) {
        t.add_child(s, parent, NodeSpec::exact(rng.random_range(-1.5..1.5)));
        return;
    }
    let n = rng.random_range(1..=4);
    let id = t.add_child(s, parent, NodeSpec::frontier(n, random_q(rng)));
    if depth < 3 {
        let k = rng.random_range(0..=n);
        for _ in 0..k {
            grow(t, rng, id, depth + 1);
        }
    }
}

/// Random partially expanded tree: 2 to 4 top-level moves, nodes down to
/// depth 3, branching at most 4, every frontier node with its own q.
pub fn micro_tree<R: Rng + ?Sized>(rng: &mut R) -> SearchTree<f64> {
    let top = rng.random_range(2..=4);
    let mut t = SearchTree::new(top);
    for _ in 0..top {
        grow(&mut t, rng, SearchTree::<f64>::ROOT, 1);
    }
    t.recompute_values(stats());
    t.refresh_relevance(stats(), None);
    t
}

fn backup(kind: NodeKind, remaining: usize, q: &NormalParams<f64>, m: f64) -> f64 {
    match kind {
        NodeKind::Min => stats().backup_min(remaining, q, m),
        NodeKind::Max => stats().backup_max(remaining, q, m),
    }
}

fn combine(kind: NodeKind, a: f64, b: f64) -> f64 {
    match kind {
        NodeKind::Min => a.min(b),
        NodeKind::Max => a.max(b),
    }
}

fn empty(kind: NodeKind) -> f64 {
    match kind {
        NodeKind::Min => f64::INFINITY,
        NodeKind::Max => f64::NEG_INFINITY,
    }
}

/// Top-level values after `id` gains successors valued `draws`, recomputed by
/// walking the backups up from `id`.
pub fn top_values_after(t: &SearchTree<f64>, id: NodeId, draws: &[f64]) -> Vec<f64> {
    let n = t.node(id);
    let ext = n
        .children
        .iter()
        .map(|&c| t.node(c).value)
        .chain(draws.iter().copied())
        .fold(empty(n.kind), |a, b| combine(n.kind, a, b));
    let mut val = backup(n.kind, n.unexpanded() - draws.len(), &n.q, ext);
    let mut child = id;
    while let Some(p) = t.node(child).parent {
        if p == SearchTree::<f64>::ROOT {
            break;
        }
        let pn = t.node(p);
        let ext = pn
            .children
            .iter()
            .map(|&c| if c == child { val } else { t.node(c).value })
            .fold(empty(pn.kind), |a, b| combine(pn.kind, a, b));
        val = backup(pn.kind, pn.unexpanded(), &pn.q, ext);
        child = p;
    }
    t.top_level_nodes()
        .iter()
        .map(|&c| if c == child { val } else { t.node(c).value })
        .collect()
}

/// First index of the largest value.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Mean gain in top-level decision value from generating `s` successors of
/// `id`: the new best value minus the new value of the current choice.
pub fn mc_benefit<R: Rng + ?Sized>(t: &SearchTree<f64>, id: NodeId, s: usize, trials: usize, rng: &mut R) -> f64 {
    let q = t.node(id).q;
    let normal = Normal::new(q.mean, q.std).unwrap();
    let before = argmax(&t.top_level_nodes().iter().map(|&c| t.node(c).value).collect::<Vec<_>>());
    let mut draws = vec![0.0; s];
    let mut total = 0.0;
    for _ in 0..trials {
        draws.iter_mut().for_each(|d| *d = normal.sample(rng));
        let after = top_values_after(t, id, &draws);
        let best = after.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        total += best - after[before];
    }
    total / trials as f64
}

/// Whether any of `trials` simulated expansions of `id` by `s` successors
/// changes the chosen top-level move.
pub fn expansion_flips_choice<R: Rng + ?Sized>(
    t: &SearchTree<f64>,
    id: NodeId,
    s: usize,
    trials: usize,
    rng: &mut R,
) -> bool {
    let q = t.node(id).q;
    let normal = Normal::new(q.mean, q.std).unwrap();
    let before = argmax(&t.top_level_nodes().iter().map(|&c| t.node(c).value).collect::<Vec<_>>());
    let mut draws = vec![0.0; s];
    (0..trials).any(|_| {
        draws.iter_mut().for_each(|d| *d = normal.sample(rng));
        argmax(&top_values_after(t, id, &draws)) != before
    })
}

/// Standard normal cdf from the complementary error function.
pub fn phi_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

pub fn phi_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Composite Simpson rule with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}
