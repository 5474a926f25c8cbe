mod common;

use common::*;
use dyncover::cluster::AlgSlow;
use dyncover::cover::{Cluster, ClusterEvent, ClusterOracle, NcSession, OracleFactory, QueryError, SessionOptions};
use dyncover::params::CoverConsts;
use dyncover::{Change, DynGraph, UpdateOp};
use std::collections::BTreeSet;

fn whole(g: &DynGraph) -> Cluster {
    let mut mask = vec![false; g.num_slots()];
    let members: BTreeSet<_> = g.vertices().collect();
    for &v in &members {
        mask[v] = true;
    }
    Cluster { id: 0, mask, weight: g.num_live_regular() as u64, members, w0: 0, beta0: 0.0, parent: None }
}

/// Applies `op` to the graph and forwards it to an oracle that owns the whole graph.
fn drive(g: &mut DynGraph, c: &mut Cluster, o: &mut dyn ClusterOracle, op: &UpdateOp) {
    let rc = g.apply(op).unwrap();
    c.mask.resize(g.num_slots(), false);
    let ev = match rc.change {
        Change::EdgeDeleted { e, a, b, len } => ClusterEvent::Shrink { edges: vec![(a, b, len, e)], vertices: vec![] },
        Change::VertexDeleted(v) => {
            c.mask[v] = false;
            c.members.remove(&v);
            if g.is_regular(v) {
                c.weight -= 1;
            }
            ClusterEvent::Shrink { edges: vec![], vertices: vec![v] }
        }
        Change::Split { new, .. } => {
            c.mask[new] = true;
            c.members.insert(new);
            ClusterEvent::Split { new }
        }
    };
    o.on_event(g, c, &ev);
}

#[test]
fn quiet_cluster_answers_exactly() {
    let mut r = rng(3);
    let g = random_bipartite(&mut r, 12, 6, 24, 3, 3);
    let c = whole(&g);
    let o = AlgSlow::new(&g, &c, 1000);
    assert_eq!(o.flag(), None);
    for a in g.regular_vertices() {
        let truth = oracle_dist(&g, a);
        for b in g.regular_vertices() {
            match o.short_path(&g, &c, a, b) {
                Ok(p) => assert_eq!(Some(p.len), truth[b]),
                Err(e) => assert_eq!((e, truth[b]), (QueryError::Unreachable(a, b), None)),
            }
        }
    }
}

#[test]
fn bridge_deletion_flags_cross_pair() {
    // 0,1 on supernode 4; 2,3 on supernode 5; bridge 1-5
    let edges = [(0, 4, 1), (1, 4, 1), (2, 5, 1), (3, 5, 1), (1, 5, 1)];
    let mut g = DynGraph::bipartite(4, 2, &edges, 1).unwrap();
    let mut c = whole(&g);
    let mut o = AlgSlow::new(&g, &c, 100);
    assert_eq!(o.flag(), None);
    drive(&mut g, &mut c, &mut o, &UpdateOp::DeleteEdge(4));
    let (x, y) = o.flag().unwrap();
    assert_eq!((x, y), (0, 2));
    assert_eq!(o.short_path(&g, &c, 0, 1), Err(QueryError::QueryWhileFlagged(0)));
}

#[test]
fn far_pair_flags_at_depth() {
    // path of regular vertices 0..5 through supernodes, depth 6 covers 3 hops
    let mut edges = Vec::new();
    for i in 0..5 {
        edges.push((i, 6 + i, 1));
        edges.push((i + 1, 6 + i, 1));
    }
    let g = DynGraph::bipartite(6, 5, &edges, 1).unwrap();
    let o = AlgSlow::new(&g, &whole(&g), 6);
    assert_eq!(o.flag(), Some((0, 4)));
}

#[test]
fn paths_stay_valid_under_updates() {
    let mut r = rng(60);
    let mut g = random_bipartite(&mut r, 60, 30, 130, 2, 2);
    let mut c = whole(&g);
    let alpha_d = 400;
    let mut o = AlgSlow::new(&g, &c, alpha_d);
    for step in 0..300 {
        let Some(op) = random_op(&g, &mut r) else { break };
        drive(&mut g, &mut c, &mut o, &op);
        let flagged = o.flag();
        for a in g.regular_vertices().step_by(7) {
            let truth = oracle_dist(&g, a);
            if let Some((x, y)) = flagged {
                assert!(oracle_dist(&g, x)[y].map_or(true, |d| d > alpha_d), "step {step}");
                continue;
            }
            for b in g.regular_vertices() {
                let p = o.short_path(&g, &c, a, b).unwrap();
                assert!(p.len <= alpha_d);
                assert_eq!(g.walk_length(&p.vertices, &p.edges), Some(p.len));
                assert_eq!(Some(p.len), truth[b]);
            }
        }
    }
}

#[test]
fn session_with_slow_oracle() {
    for seed in 0..4 {
        let mut r = rng(500 + seed);
        let g = random_bipartite(&mut r, 60, 35, 110, 2, 2);
        let k = CoverConsts::new(2, 60, None);
        let factory: OracleFactory = Box::new(|g, c, k| Box::new(AlgSlow::new(g, c, k.flag_dist())));
        let opts = SessionOptions { check_budget: true, check_flags: true };
        let mut s = NcSession::new(g, k.clone(), factory, opts).unwrap();
        for _ in 0..120 {
            let Some(op) = random_op(s.graph(), &mut r) else { break };
            s.apply(&op).unwrap();
            assert!(s.verify().is_empty());
            for a in s.graph().regular_vertices().step_by(5).collect::<Vec<_>>() {
                let c = s.cluster(s.covering(a).unwrap());
                for b in c.regular(s.graph()).collect::<Vec<_>>() {
                    let p = s.short_path(a, b).unwrap();
                    assert!(p.len <= k.flag_dist());
                    assert_eq!(s.graph().walk_length(&p.vertices, &p.edges), Some(p.len));
                }
            }
        }
        assert!(s.budget_violations().is_empty());
    }
}

use dyncover::cluster::{classify_cluster, full_factory, Classification, FullOracle, GoodCluster, GoodParams};
use dyncover::pseudocut::{audit_witness, PseudocutConfig};

fn complete_bipartite(n: usize) -> DynGraph {
    let edges: Vec<_> = (0..n).flat_map(|a| (0..n).map(move |s| (a, n + s, 1))).collect();
    DynGraph::bipartite(n, n, &edges, 1).unwrap()
}

fn path_general(n: usize) -> DynGraph {
    let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1, 1)).collect();
    DynGraph::general(n, &edges, 1).unwrap()
}

/// Parameters putting a 12-regular-vertex cluster in the type-2 regime.
fn type2_params() -> GoodParams {
    let mut p = GoodParams::new(0.035, 512);
    p.d_hat_scale = 0.0;
    p
}

fn small_consts(w: u64) -> CoverConsts {
    CoverConsts::new(1, w, Some(1.0))
}

fn audit_balls(g: &DynGraph, cut: &BTreeSet<usize>, r: u64, limit: u64) {
    let kept: Vec<_> = g.edge_list().into_iter().filter(|(e, ..)| !cut.contains(e)).map(|(_, a, b, l)| (a, b, l)).collect();
    for x in g.vertices() {
        let d = dyncover_oracle::dijkstra(g.num_slots(), &kept, x);
        let w = g.vertices().filter(|&v| g.is_regular(v) && d[v].map_or(false, |d| d <= r)).count() as u64;
        assert!(w <= limit);
    }
}

#[test]
fn type1_threshold() {
    let edges = [(0, 4, 1), (1, 4, 1), (2, 4, 1), (3, 4, 1)];
    let g = DynGraph::bipartite(4, 1, &edges, 1).unwrap();
    let cfg = PseudocutConfig::new(0.2, 1 << 10, 10);
    assert!(matches!(classify_cluster(&g, &whole(&g), &cfg), Classification::Type1Good));
}

#[test]
fn dense_cluster_is_type2() {
    let g = complete_bipartite(12);
    let cfg = type2_params().pseudocut_config(&small_consts(12));
    match classify_cluster(&g, &whole(&g), &cfg) {
        Classification::Type2Good(w) => {
            audit_witness(&w).unwrap();
            let x = &w.expander.graph;
            assert!(w.edges.len() as f64 >= 12.0 / cfg.rho() / 4.0);
            if x.n() <= 16 {
                let e: Vec<_> = x.live_edges().map(|e| x.endpoints(e)).collect();
                let (cut, size) = dyncover_oracle::expansion(x.n(), &e).unwrap().unwrap();
                assert_eq!(w.expander.cert.phi(), cut as f64 / size as f64);
            }
            for p in &w.paths {
                let h = w.sub.to_host(&g, p);
                assert_eq!(g.walk_length(&h.vertices, &h.edges), Some(h.len));
            }
        }
        other => panic!("{:?}", std::mem::discriminant(&other)),
    }
}

#[test]
fn long_path_is_bad() {
    let g = path_general(200);
    let cfg = PseudocutConfig::new(0.05, 1 << 12, 50);
    match classify_cluster(&g, &whole(&g), &cfg) {
        Classification::Bad(b) => {
            assert!((b.cut.len() as f64) < 200.0 / cfg.rho());
            audit_balls(&g, &b.cut.edges, b.cut.d_hat, b.cut.limit());
        }
        _ => panic!("expected bad"),
    }
}

fn check_queries(g: &DynGraph, c: &Cluster, o: &dyn ClusterOracle, bound: u64) {
    if o.flag().is_some() {
        return;
    }
    for a in c.regular(g) {
        let truth = oracle_dist(g, a);
        for b in c.regular(g) {
            match o.short_path(g, c, a, b) {
                Ok(p) => {
                    assert_eq!(g.walk_length(&p.vertices, &p.edges), Some(p.len));
                    assert_eq!((p.first(), p.last()), (a, b));
                    assert!(p.len <= bound, "{} > {bound}", p.len);
                    assert!(Some(p.len) >= truth[b]);
                }
                Err(e) => assert!(truth[b].is_none(), "{e}"),
            }
        }
    }
}

#[test]
fn type2_zero_updates_answers_via_witness() {
    let g = complete_bipartite(12);
    let c = whole(&g);
    let k = small_consts(12);
    let o = GoodCluster::new(&g, &c, &k, &type2_params());
    assert!(o.is_type2());
    assert_eq!(o.flag(), None);
    check_queries(&g, &c, &o, o.length_bound());
    assert_eq!(o.stats().query_fallbacks.get(), 0);
}

#[test]
fn witness_deletions_force_reclassification() {
    let mut g = complete_bipartite(12);
    let mut c = whole(&g);
    let k = small_consts(12);
    let mut o = GoodCluster::new(&g, &c, &k, &type2_params());
    assert!(o.is_type2());
    let mut steps = 0;
    while o.is_type2() && steps < 100 {
        let Some(&e) = o.witness_edges().first() else { break };
        drive(&mut g, &mut c, &mut o, &UpdateOp::DeleteEdge(e));
        steps += 1;
        if let Some((x, y)) = o.flag() {
            assert!(oracle_dist(&g, x)[y].map_or(true, |d| d > k.flag_dist()));
        } else if o.bad_flag().is_none() {
            check_queries(&g, &c, &o, o.length_bound());
        }
    }
    assert!(o.stats().reclassifications >= 2);
    assert_eq!(o.stats().query_fallbacks.get(), 0);
}

#[test]
fn full_oracle_bad_at_start_is_slow() {
    let mut g = path_general(40);
    let mut c = whole(&g);
    let mut params = GoodParams::new(0.03, 1 << 12);
    params.d_hat_scale = 0.0;
    let k = small_consts(40);
    let mut full = FullOracle::new(&g, &c, &k, &params);
    let mut slow = AlgSlow::new(&g, &c, k.flag_dist());
    assert_eq!(full.name(), "full/slow");
    assert_eq!(full.handovers(), 1);
    for e in [5, 20, 33] {
        drive(&mut g, &mut c, &mut full, &UpdateOp::DeleteEdge(e));
        slow.on_event(&g, &c, &ClusterEvent::Shrink { edges: vec![(e, e + 1, 1, e)], vertices: vec![] });
        assert_eq!(full.flag(), slow.flag());
    }
}

#[test]
fn good_then_bad_handover() {
    let mut g = complete_bipartite(12);
    let mut c = whole(&g);
    let k = small_consts(12);
    let mut o = FullOracle::new(&g, &c, &k, &type2_params());
    assert_eq!(o.name(), "full/good/type2");
    // keep a spanning path 0-s0-1-s1-...; delete everything else
    let n = 12;
    let keep: BTreeSet<usize> = (0..n).flat_map(|i| [i * n + i, if i + 1 < n { (i + 1) * n + i } else { usize::MAX }]).collect();
    let doomed: Vec<usize> = g.edges().filter(|e| !keep.contains(e)).collect();
    for e in doomed {
        drive(&mut g, &mut c, &mut o, &UpdateOp::DeleteEdge(e));
        if let Some((x, y)) = o.flag() {
            assert!(oracle_dist(&g, x)[y].map_or(true, |d| d > k.flag_dist()));
        }
        check_queries(&g, &c, &o, o.length_bound().max(k.flag_dist()));
    }
    assert_eq!(o.handovers(), 1);
    assert_eq!(o.name(), "full/slow");
}

#[test]
fn cover_with_full_oracle() {
    let mut r = rng(900);
    let g = random_bipartite(&mut r, 300, 90, 520, 2, 2);
    let k = CoverConsts::new(2, 300, None);
    let opts = SessionOptions { check_budget: true, check_flags: true };
    let mut s = NcSession::new(g, k.clone(), full_factory(GoodParams::new(0.5, 600)), opts).unwrap();
    for step in 0..150 {
        let Some(op) = random_op(s.graph(), &mut r) else { break };
        s.apply(&op).unwrap();
        assert!(s.verify().is_empty(), "step {step}");
        if step % 10 == 0 {
            for a in s.graph().regular_vertices().step_by(13).collect::<Vec<_>>() {
                let c = s.cluster(s.covering(a).unwrap());
                for b in c.regular(s.graph()).step_by(7).collect::<Vec<_>>() {
                    let p = s.short_path(a, b).unwrap();
                    assert!(p.len <= k.flag_dist());
                    assert_eq!(s.graph().walk_length(&p.vertices, &p.edges), Some(p.len));
                }
            }
        }
    }
    assert!(s.budget_violations().is_empty());
}
