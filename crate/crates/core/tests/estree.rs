mod common;

use common::*;
use dyncover::estree::EsError;
use dyncover::{DynGraph, EsTree, Induced, SsspAnswer, UpdateOp, INF};
use proptest::prelude::*;

fn check_exact(t: &EsTree, g: &DynGraph) {
    let truth = oracle_dist(g, t.root());
    for v in g.vertices() {
        let want = truth[v].filter(|&d| d <= t.depth()).unwrap_or(INF);
        assert_eq!(t.dist(v), want, "label of {v}");
        if let Some(p) = t.path(v) {
            assert_eq!(g.walk_length(&p.vertices, &p.edges), Some(want));
        }
    }
    t.audit(g).unwrap();
}

// s=0, a=1, b=2 as a path through supernodes
#[test]
fn path_labels() {
    let g = DynGraph::general(3, &[(0, 1, 1), (1, 2, 1)], 5).unwrap();
    let t = EsTree::build(&g, 0, 5).unwrap();
    assert_eq!((t.dist(0), t.dist(1), t.dist(2)), (0, 1, 2));
    let SsspAnswer::Path(p) = t.query(0) else { panic!() };
    assert!(p.edges.is_empty() && p.len == 0);
}

#[test]
fn depth_bound_violation() {
    let g = DynGraph::general(2, &[(0, 1, 7)], 9).unwrap();
    assert!(matches!(EsTree::build(&g, 0, 5), Err(EsError::DepthBoundViolated { .. })));
}

#[test]
fn alternate_route_survives() {
    // s-a-b and s-c-b, all unit
    let mut g = DynGraph::general(4, &[(0, 1, 1), (1, 2, 1), (0, 3, 1), (3, 2, 1)], 5).unwrap();
    let mut t = EsTree::build(&g, 0, 5).unwrap();
    let r = g.apply(&UpdateOp::DeleteEdge(1)).unwrap();
    t.on_update(&g, &r.change);
    assert_eq!(t.dist(2), 2);
    assert_eq!(t.parent(2), Some((3, 3)));
    assert_eq!(t.total_increment(), 0);
}

#[test]
fn deleting_root_edge_disconnects() {
    let mut g = DynGraph::general(3, &[(0, 1, 1), (1, 2, 1)], 5).unwrap();
    let mut t = EsTree::build(&g, 0, 5).unwrap();
    let r = g.apply(&UpdateOp::DeleteEdge(0)).unwrap();
    t.on_update(&g, &r.change);
    assert_eq!((t.dist(1), t.dist(2)), (INF, INF));
    assert_eq!(t.query(2), SsspAnswer::BeyondDepth);
    assert_eq!(t.drain_departed(), vec![1, 2]);
    assert!(t.increments(1) <= 5 && t.increments(2) <= 5);
}

#[test]
fn full_split_changes_nothing() {
    let mut r = rng(11);
    let mut g = random_bipartite(&mut r, 10, 5, 25, 3, 3);
    let mut t = EsTree::build(&g, 0, 12).unwrap();
    let before: Vec<u64> = (0..g.num_slots()).map(|v| t.dist(v)).collect();
    for u in 10..15 {
        let edges: Vec<_> = g.incident(u).collect();
        if edges.is_empty() {
            continue;
        }
        let rc = g.apply(&UpdateOp::SupernodeSplit { u, edges }).unwrap();
        t.on_update(&g, &rc.change);
    }
    for (v, &d) in before.iter().enumerate() {
        assert_eq!(t.dist(v), d);
    }
    check_exact(&t, &g);
}

#[test]
fn random_forty_vertex_build() {
    let mut r = rng(5);
    let g = random_bipartite(&mut r, 24, 16, 90, 5, 5);
    for root in [0, 7, 30] {
        check_exact(&EsTree::build(&g, root, 14).unwrap(), &g);
    }
}

#[test]
fn two_hundred_deletions_with_queries() {
    let mut r = rng(6);
    let mut g = random_bipartite(&mut r, 24, 16, 260, 4, 4);
    let mut t = EsTree::build(&g, 3, 20).unwrap();
    for _ in 0..200 {
        let e = g.edges().nth(r.gen_range_usize(g.num_live_edges())).unwrap();
        let rc = g.apply(&UpdateOp::DeleteEdge(e)).unwrap();
        t.on_update(&g, &rc.change);
        check_exact(&t, &g);
    }
}

trait GenRange {
    fn gen_range_usize(&mut self, n: usize) -> usize;
}
impl GenRange for rand_chacha::ChaCha8Rng {
    fn gen_range_usize(&mut self, n: usize) -> usize {
        rand::Rng::gen_range(self, 0..n)
    }
}

#[test]
fn induced_view_tracks_subgraph() {
    let mut r = rng(9);
    let mut g = random_bipartite(&mut r, 20, 10, 50, 3, 3);
    let mut mask = vec![false; g.num_slots()];
    for v in (0..20).step_by(2).chain(20..30) {
        mask[v] = true;
    }
    let mut t = EsTree::build(&Induced { g: &g, mask: &mask }, 0, 15).unwrap();
    for _ in 0..30 {
        let Some(op) = random_op(&g, &mut r) else { break };
        if let UpdateOp::DeleteIsolatedVertex(0) = op {
            continue;
        }
        let rc = g.apply(&op).unwrap();
        if let dyncover::Change::Split { from, new, .. } = rc.change {
            mask.resize(g.num_slots(), false);
            mask[new] = mask[from];
        }
        let view = Induced { g: &g, mask: &mask };
        t.on_update(&view, &rc.change);
        t.audit(&view).unwrap();
        let mut sub = DynGraph::general(g.num_slots(), &[], 3).unwrap();
        for (_, a, b, l) in g.edge_list() {
            if mask[a] && mask[b] {
                sub.add_edge(a, b, l).unwrap();
            }
        }
        let truth = oracle_dist(&sub, 0);
        for v in 0..g.num_slots() {
            if view_live(&g, &mask, v) {
                assert_eq!(t.dist(v), truth[v].filter(|&d| d <= 15).unwrap_or(INF));
            }
        }
    }
}

fn view_live(g: &DynGraph, mask: &[bool], v: usize) -> bool {
    mask[v] && g.has_vertex(v)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]
    #[test]
    fn exact_monotone_and_bounded(seed in 0u64..10_000, depth in 4u64..30) {
        let mut r = rng(seed);
        let mut g = random_bipartite(&mut r, 30, 20, 80, 4, 4);
        let mut t = EsTree::build(&g, 0, depth).unwrap();
        let mut prev: Vec<u64> = (0..g.num_slots()).map(|v| t.dist(v)).collect();
        for _ in 0..120 {
            let Some(op) = random_op(&g, &mut r) else { break };
            if op == UpdateOp::DeleteIsolatedVertex(0) {
                continue;
            }
            let rc = g.apply(&op).unwrap();
            t.on_update(&g, &rc.change);
            check_exact(&t, &g);
            for v in 0..prev.len() {
                if g.has_vertex(v) {
                    prop_assert!(t.dist(v) >= prev[v]);
                }
            }
            prev = (0..g.num_slots()).map(|v| t.dist(v)).collect();
        }
        for v in 0..g.num_slots() {
            prop_assert!(t.increments(v) <= depth);
        }
    }
}
