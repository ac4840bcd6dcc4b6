use super::*;
use crate::dist::normal::{std_cdf, std_pdf};
use crate::scalar::Extended;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use std::sync::OnceLock;

fn stats() -> &'static OrderStats<f64> {
    static S: OnceLock<OrderStats<f64>> = OnceLock::new();
    S.get_or_init(OrderStats::default)
}

fn q(mean: f64, std: f64) -> NormalParams<f64> {
    NormalParams::new(mean, std).unwrap()
}

/// `E[min(m, u)]` for one draw `u ~ N(mu, sigma)`.
fn one_draw_min(m: f64, mu: f64, sigma: f64) -> f64 {
    let z = (m - mu) / sigma;
    m - ((m - mu) * std_cdf(z) + sigma * std_pdf(z))
}

/// Root with move A exact at `a` and move B a min node with q = N(1, 0.5),
/// three successors of which 0.8 and 1.2 are known.
fn t1(a: f64) -> (SearchTree<f64>, NodeId, NodeId) {
    let s = stats();
    let mut t = SearchTree::new(2);
    let na = t.add_child(s, SearchTree::<f64>::ROOT, NodeSpec::exact(a));
    let nb = t.add_child(s, SearchTree::<f64>::ROOT, NodeSpec::frontier(3, q(1.0, 0.5)));
    t.add_child(s, nb, NodeSpec::exact(0.8));
    t.add_child(s, nb, NodeSpec::exact(1.2));
    t.backup_path(s, nb);
    t.refresh_relevance(s, None);
    (t, na, nb)
}

#[test]
fn fully_expanded_min_node_is_plain_min() {
    let s = stats();
    let mut t = SearchTree::new(1);
    let b = t.add_child(s, 0, NodeSpec::frontier(2, q(1.0, 0.5)));
    t.add_child(s, b, NodeSpec::exact(0.8));
    t.add_child(s, b, NodeSpec::exact(1.2));
    t.backup_path(s, b);
    assert_eq!(t.node(b).value, 0.8);
    assert_eq!(t.node(0).value, 0.8);
}

#[test]
fn partially_expanded_min_node_uses_backup() {
    let (t, _, b) = t1(0.9);
    let want = one_draw_min(0.8, 1.0, 0.5);
    assert!((t.node(b).value - want).abs() < 1e-4, "{} vs {want}", t.node(b).value);
    assert!((t.node(b).value - 0.685).abs() < 1e-3);
    assert!(t.node(b).value <= t.extremum(b));
}

#[test]
fn exact_node_keeps_score() {
    let (t, a, _) = t1(0.9);
    assert_eq!(t.node(a).value, 0.9);
}

#[test]
fn unexpanded_node_uses_expected_extremum() {
    let s = stats();
    let mut t = SearchTree::new(1);
    let b = t.add_child(s, 0, NodeSpec::frontier(10, q(0.0, 1.0)));
    assert!((t.node(b).value + 1.5387527).abs() < 1e-4);
    let c = t.add_child(s, b, NodeSpec::frontier(2, q(0.0, 1.0)));
    assert!((t.node(c).value - 1.0 / std::f64::consts::PI.sqrt()).abs() < 1e-4);
}

#[test]
fn sibling_bounds() {
    let s = stats();
    let mut t = SearchTree::new(1);
    let b = t.add_child(s, 0, NodeSpec::frontier(4, q(1.0, 0.5)));
    let kids: Vec<_> = [1.1, 0.9, 1.4].iter().map(|&v| t.add_child(s, b, NodeSpec::exact(v))).collect();
    t.backup_path(s, b);
    assert_eq!(t.sibling_bound(b, kids[0]), 0.9);
    assert_eq!(t.sibling_bound(b, kids[1]), 1.1);

    let mut t = SearchTree::new(1);
    let b = t.add_child(s, 0, NodeSpec::frontier(4, q(1.0, 0.5)));
    let only = t.add_child(s, b, NodeSpec::exact(1.0));
    assert_eq!(t.sibling_bound(b, only), f64::INFINITY);

    let (t, a, nb) = t1(0.9);
    assert_eq!(t.sibling_bound(0, nb), t.node(a).value);
}

#[test]
fn empty_path_is_identity() {
    let (t, _, b) = t1(0.9);
    let top = t.top_level().unwrap();
    let p = t.path_context(b, &top);
    assert!(p.stages.is_empty());
    for x in [-3.0, 0.1, 7.0] {
        assert_eq!(p.compose_f(stats(), x), x);
    }
    assert_eq!(p.delta_bound_up(stats()), f64::INFINITY);
    assert_eq!(p.gamma_bound_up(stats()), f64::NEG_INFINITY);
}

#[test]
fn single_max_stage_without_bound_passes_through() {
    let st = Stage { node: 0, kind: NodeKind::Max, remaining: 0, q: q(0.0, 1.0), bound: f64::NEG_INFINITY };
    let p = PathContext { stages: vec![st], alpha: 0.0, alpha2: 0.0, in_best: false };
    for x in [-2.0, 0.0, 3.5] {
        assert_eq!(p.compose_f(stats(), x), x);
    }
}

#[test]
fn gamma_from_a_single_max_bound() {
    let s = stats();
    let top = Stage { node: 1, kind: NodeKind::Min, remaining: 0, q: q(0.0, 1.0), bound: f64::INFINITY };
    let mid = Stage { node: 2, kind: NodeKind::Max, remaining: 0, q: q(0.0, 1.0), bound: 0.3 };
    let p = PathContext { stages: vec![top, mid], alpha: 1.0, alpha2: 0.0, in_best: false };
    assert_eq!(p.gamma_bound_up(s), 0.3);
    // Scan: the top level does not move until x passes 0.3.
    let base = p.compose_f(s, -5.0);
    for i in 0..=100 {
        let x = -5.0 + 0.053 * i as f64;
        let v = p.compose_f(s, x);
        if x <= 0.3 {
            assert_eq!(v, base);
        } else {
            assert!(v > base);
        }
    }
}

#[test]
fn gamma_through_partial_stages_is_exact_preimage() {
    let s = stats();
    let top = Stage { node: 1, kind: NodeKind::Min, remaining: 2, q: q(0.2, 0.7), bound: 1.1 };
    let mid = Stage { node: 2, kind: NodeKind::Max, remaining: 3, q: q(-0.4, 0.6), bound: 0.5 };
    let low = Stage { node: 3, kind: NodeKind::Min, remaining: 1, q: q(0.6, 0.5), bound: 2.0 };
    let p = PathContext { stages: vec![top, mid, low], alpha: 1.0, alpha2: 0.0, in_best: false };
    let gamma = p.gamma_bound_up(s);
    assert!(gamma.is_finite());
    let chain = StageChain::new(vec![low]);
    assert!(chain.eval(s, gamma - 1e-3) <= 0.5 + 1e-9);
    assert!(chain.eval(s, gamma + 1e-3) > 0.5);
}

#[test]
fn delta_from_a_single_min_bound() {
    let st = Stage { node: 1, kind: NodeKind::Min, remaining: 0, q: q(0.0, 1.0), bound: 0.7 };
    let p = PathContext { stages: vec![st], alpha: 0.8, alpha2: 0.0, in_best: false };
    assert_eq!(p.delta_bound_up(stats()), 0.7);
}

#[test]
fn delta_below_alpha_makes_node_irrelevant() {
    let s = stats();
    // B: min node, one known child (a max node) and one more to come, plus a
    // sibling at 0.7 capping B.
    let mut t = SearchTree::new(2);
    t.add_child(s, 0, NodeSpec::exact(0.8));
    let b = t.add_child(s, 0, NodeSpec::frontier(2, q(1.0, 0.3)));
    t.add_child(s, b, NodeSpec::exact(0.7));
    let c = t.add_child(s, b, NodeSpec::frontier(3, q(1.0, 0.3)));
    t.backup_path(s, c);
    t.refresh_relevance(s, None);
    assert!(t.node(c).delta <= 0.7);
    assert!(!t.node(c).relevant);
    assert!(!t.is_relevant(s, c));
}

#[test]
fn top_level_nodes_pass_test_one() {
    let (t, a, b) = t1(0.9);
    // A is exact; B is judged on its own bounds only.
    assert!(t.node(a).relevant);
    // B's min_k is 0.8 and gamma is -inf, so it is relevant even though its
    // expansion cannot help (that is the benefit's job).
    assert!(t.node(b).relevant);
}

#[test]
fn max_node_above_sibling_is_irrelevant() {
    let s = stats();
    let mut t = SearchTree::new(2);
    t.add_child(s, 0, NodeSpec::exact(0.6));
    let b = t.add_child(s, 0, NodeSpec::frontier(3, q(1.0, 0.4)));
    let low = t.add_child(s, b, NodeSpec::frontier(2, q(0.2, 0.4)));
    let high = t.add_child(s, b, NodeSpec::frontier(2, q(0.9, 0.4)));
    t.backup_path(s, high);
    t.refresh_relevance(s, None);
    assert!(t.node(low).value < t.node(high).value);
    assert!(!t.node(high).relevant);
    assert!(t.node(low).relevant);

    // Under the best move only drops matter, so the higher max node counts.
    let mut t = SearchTree::new(2);
    t.add_child(s, 0, NodeSpec::exact(-5.0));
    let b = t.add_child(s, 0, NodeSpec::frontier(3, q(0.5, 0.4)));
    t.add_child(s, b, NodeSpec::frontier(2, q(0.2, 0.4)));
    let high = t.add_child(s, b, NodeSpec::frontier(2, q(0.9, 0.4)));
    t.backup_path(s, high);
    t.refresh_relevance(s, None);
    assert!(t.node(high).relevant);
}

#[test]
fn min_node_below_gamma_is_irrelevant() {
    let s = stats();
    let mut t = SearchTree::new(2);
    t.add_child(s, 0, NodeSpec::exact(5.0));
    let b = t.add_child(s, 0, NodeSpec::frontier(1, q(0.0, 0.3)));
    let m = t.add_child(s, b, NodeSpec::frontier(3, q(0.0, 0.3)));
    let strong = t.add_child(s, m, NodeSpec::exact(1.0));
    let weak = t.add_child(s, m, NodeSpec::frontier(2, q(0.0, 0.3)));
    t.add_child(s, weak, NodeSpec::exact(-0.5));
    t.backup_path(s, weak);
    t.refresh_relevance(s, None);
    let top = t.top_level().unwrap();
    let path = t.path_context(weak, &top);
    let gamma = path.gamma_bound_up(s);
    assert!(gamma >= 1.0 - 1e-9, "gamma {gamma}");
    assert!(t.extremum(weak) < gamma);
    assert!(!t.node(weak).relevant);
    assert!(t.node(strong).relevant || t.node(strong).is_exact());
}

/// A max node whose known maximum sits far above the level that matters cannot
/// get there by its own expansions, but its children still can.
#[test]
fn extremum_test_does_not_close_the_subtree() {
    let s = stats();
    let mut t = SearchTree::new(2);
    t.add_child(s, SearchTree::<f64>::ROOT, NodeSpec::exact(-0.6));
    let b = t.add_child(s, SearchTree::<f64>::ROOT, NodeSpec::frontier(2, q(0.0, 1.0)));
    let x = t.add_child(s, b, NodeSpec::frontier(2, q(0.0, 1.0)));
    let z = t.add_child(s, x, NodeSpec::frontier(1, q(0.7, 0.6)));
    t.add_child(s, x, NodeSpec::exact(-2.0));
    t.add_child(s, b, NodeSpec::exact(-0.5));
    t.recompute_values(s);
    t.refresh_relevance(s, None);
    assert_eq!(t.top_level().unwrap().best, b);
    assert!(t.node(x).value > -0.5);
    assert!(!t.node(x).relevant);
    assert!(t.node(z).relevant);
    assert!(t.is_relevant(s, z));
    assert!(!t.is_relevant(s, x));
}

#[test]
fn expansion_keeping_min_raises_value() {
    let s = stats();
    let mut t = SearchTree::new(1);
    let b = t.add_child(s, 0, NodeSpec::frontier(4, q(1.0, 0.5)));
    t.add_child(s, b, NodeSpec::exact(0.8));
    t.backup_path(s, b);
    let before = t.node(b).value;
    t.add_child(s, b, NodeSpec::exact(1.3));
    t.backup_path(s, b);
    assert!(t.node(b).value >= before);
    t.add_child(s, b, NodeSpec::exact(1.0));
    t.add_child(s, b, NodeSpec::exact(2.0));
    t.backup_path(s, b);
    assert_eq!(t.node(b).value, 0.8);
}

#[test]
fn node_martingale_under_one_more_draw() {
    let s = stats();
    let (mu, sigma, l, m) = (0.4, 0.6, 4usize, 0.7);
    let qq = q(mu, sigma);
    let before = s.backup_min(l, &qq, m);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let normal = Normal::new(mu, sigma).unwrap();
    let n = 100_000;
    let mean = (0..n)
        .map(|_| s.backup_min(l - 1, &qq, m.min(normal.sample(&mut rng))))
        .sum::<f64>()
        / n as f64;
    assert!((mean - before).abs() < 3e-3, "{mean} vs {before}");
}

#[test]
fn all_exhausted_tree_matches_minimax() {
    let s = stats();
    let mut t = SearchTree::new(2);
    let a = t.add_child(s, 0, NodeSpec::frontier(2, q(0.0, 1.0)));
    let b = t.add_child(s, 0, NodeSpec::frontier(2, q(0.0, 1.0)));
    let mut leaves = [3.0, -1.0, 2.0, 4.0, 0.5, 1.5, -2.0, 6.0].into_iter();
    for top in [a, b] {
        for _ in 0..2 {
            let m = t.add_child(s, top, NodeSpec::frontier(2, q(0.0, 1.0)));
            for _ in 0..2 {
                t.add_child(s, m, NodeSpec::exact(leaves.next().unwrap()));
            }
        }
    }
    t.recompute_values(s);
    // a = min(max(3,-1), max(2,4)) = 3, b = min(1.5, 6) = 1.5.
    assert_eq!(t.node(a).value, 3.0);
    assert_eq!(t.node(b).value, 1.5);
    assert_eq!(t.node(0).value, 3.0);
}

#[test]
fn incremental_and_full_backup_agree() {
    let s = stats();
    let mut t = SearchTree::new(2);
    let a = t.add_child(s, 0, NodeSpec::frontier(3, q(0.1, 0.4)));
    t.add_child(s, 0, NodeSpec::frontier(2, q(0.0, 0.4)));
    let m = t.add_child(s, a, NodeSpec::frontier(2, q(0.3, 0.4)));
    let leaf = t.add_child(s, m, NodeSpec::frontier(4, q(0.2, 0.4)));
    t.backup_path(s, leaf);
    let incremental: Vec<f64> = t.nodes().iter().map(|n| n.value).collect();
    t.recompute_values(s);
    let full: Vec<f64> = t.nodes().iter().map(|n| n.value).collect();
    assert_eq!(incremental, full);
}

#[test]
fn dump_lists_every_node() {
    let (t, _, _) = t1(0.9);
    let d = t.dump(|id| format!("n{id}"));
    assert_eq!(d.lines().count(), t.len());
    assert!(d.contains("  #2 n2 min"));
}

#[test]
fn preimages_of_saturating_stage_are_infinite() {
    let s = stats();
    let st = Stage { node: 0, kind: NodeKind::Min, remaining: 3, q: q(0.0, 1.0), bound: f64::INFINITY };
    let sat = st.saturation(s);
    assert_eq!(st.preimage_below(s, Extended::Finite(sat + 0.1)), Extended::PosInf);
    assert_eq!(st.preimage_above(s, Extended::Finite(sat + 0.1)), Extended::PosInf);
    let Extended::Finite(x) = st.preimage_below(s, Extended::Finite(sat - 0.5)) else {
        panic!("finite preimage expected")
    };
    assert!((st.apply(s, x) - (sat - 0.5)).abs() < 1e-5);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn compose_f_is_monotone(
        spec in prop::collection::vec((0usize..4, -1.0f64..1.0, 0.1f64..1.0, -1.5f64..1.5), 1..5),
        x in -3.0f64..3.0,
        dx in 0.0f64..1.0,
    ) {
        let stages: Vec<Stage<f64>> = spec
            .iter()
            .enumerate()
            .map(|(i, &(l, mu, sd, bound))| Stage {
                node: i + 1,
                kind: if i % 2 == 0 { NodeKind::Min } else { NodeKind::Max },
                remaining: l,
                q: q(mu, sd),
                bound,
            })
            .collect();
        let p = PathContext { stages, alpha: 0.0, alpha2: 0.0, in_best: false };
        let s = stats();
        prop_assert!(p.compose_f(s, x + dx) >= p.compose_f(s, x) - 1e-12);
        let lo = p.delta_bound_down(s);
        let hi = p.delta_bound_up(s);
        let v = p.compose_f(s, x);
        prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
    }

    #[test]
    fn preimage_below_brackets_level(
        spec in prop::collection::vec((0usize..4, -1.0f64..1.0, 0.2f64..1.0, -1.0f64..1.0), 1..4),
        y in -1.5f64..1.5,
    ) {
        let stages: Vec<Stage<f64>> = spec
            .iter()
            .enumerate()
            .map(|(i, &(l, mu, sd, bound))| Stage {
                node: i + 1,
                kind: if i % 2 == 0 { NodeKind::Min } else { NodeKind::Max },
                remaining: l,
                q: q(mu, sd),
                bound,
            })
            .collect();
        let s = stats();
        let chain = StageChain::new(stages);
        let x = chain.preimage_below(s, y);
        if x.is_finite() {
            prop_assert!(chain.eval(s, x - 1e-4) <= y + 1e-6);
            prop_assert!(chain.eval(s, x + 1e-4) > y - 1e-6);
        } else if x == f64::INFINITY {
            prop_assert!(chain.eval(s, 50.0) <= y + 1e-6);
        } else {
            prop_assert!(chain.eval(s, -50.0) > y - 1e-6);
        }
    }
}
