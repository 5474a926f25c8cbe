mod common;

use common::*;
use dyncover::cover::Cluster;
use dyncover::pseudocut::*;
use dyncover::{DynGraph, EdgeId, INF};
use std::collections::BTreeSet;

fn path(n: usize) -> DynGraph {
    let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1, 1)).collect();
    DynGraph::general(n, &edges, 1).unwrap()
}

/// Every ball of radius `r` in `g` minus `cut` weighs at most `limit`.
fn oracle_balls(g: &DynGraph, cut: &BTreeSet<EdgeId>, r: u64, limit: u64) {
    let kept: Vec<_> = g.edge_list().into_iter().filter(|(e, ..)| !cut.contains(e)).map(|(_, a, b, l)| (a, b, l)).collect();
    for x in g.vertices() {
        let dist = dyncover_oracle::dijkstra(g.num_slots(), &kept, x);
        let w = g.vertices().filter(|&v| g.is_regular(v) && dist[v].map_or(false, |d| d <= r)).count() as u64;
        assert!(w <= limit, "ball of {x} weighs {w} > {limit}");
    }
}

fn oracle_witness(g: &DynGraph, w: &GoodWitness) {
    audit_witness(w).unwrap();
    let x = &w.expander.graph;
    let terms = w.terminals();
    let mut load = vec![0u64; w.sub.graph.num_edge_slots()];
    for e in x.live_edges() {
        let p = &w.paths[e];
        assert_eq!(w.sub.graph.walk_length(&p.vertices, &p.edges), Some(p.len));
        let (a, b) = x.endpoints(e);
        assert_eq!((p.first(), p.last()), (terms[a], terms[b]));
        assert!(p.len <= w.d2);
        for &f in &p.edges {
            load[f] += 1;
        }
        let h = w.sub.to_host(g, p);
        assert_eq!(g.walk_length(&h.vertices, &h.edges), Some(h.len));
        assert!(h.len <= p.len);
    }
    assert!(load.iter().all(|&l| l <= w.eta));
    assert_eq!(load.iter().copied().max().unwrap_or(0), w.congestion);
    if x.n() <= 16 && x.n() >= 2 {
        let edges: Vec<_> = x.live_edges().map(|e| x.endpoints(e)).collect();
        let (c, s) = dyncover_oracle::expansion(x.n(), &edges).unwrap().unwrap();
        assert!(w.expander.cert.is_exact());
        assert_eq!(w.expander.cert.phi(), c as f64 / s as f64);
        assert!(c > 0);
    }
}

#[test]
fn rho_one_gives_empty_cut() {
    let mut r = rng(1);
    let g = DynGraph::general(20, &random_regular(&mut r, 20, 3).into_iter().map(|(a, b)| (a, b, 1)).collect::<Vec<_>>(), 1).unwrap();
    let p = initial_pseudocut(&g, &Cluster::whole(&g), 1.0, 100).unwrap();
    assert!(p.is_empty());
    oracle_balls(&g, &p.edges, INF, p.limit());
}

#[test]
fn path_partition() {
    let g = path(16);
    let c = Cluster::whole(&g);
    let p = initial_pseudocut(&g, &c, 4.0, INF / 64).unwrap();
    assert_eq!(p.limit(), 4);
    assert_eq!(p.edges, BTreeSet::from([3, 7, 11]));
    oracle_balls(&g, &p.edges, INF, 4);
    audit_pseudocut(&g, &c, &p).unwrap();
}

#[test]
fn concentrated_weight_rejected() {
    let edges: Vec<_> = (1..8).map(|i| (0, i, 1)).collect();
    let g = DynGraph::general(8, &edges, 1).unwrap();
    let err = initial_pseudocut(&g, &Cluster::whole(&g), 4.0, 5).unwrap_err();
    assert!(matches!(err, PseudocutError::WeightTooConcentrated { max: 1, .. }));
}

#[test]
fn invalid_input_detected() {
    let g = path(16);
    let c = Cluster::whole(&g);
    let p = Pseudocut { edges: BTreeSet::from([7]), d_hat: 3, rho: 4.0, weight: 16 };
    let mut cfg = PseudocutConfig::new(0.5, 16, 3);
    cfg.audit = true;
    assert!(matches!(shrink_or_witness(&g, &c, &p, &cfg), Err(PseudocutError::InvalidPseudocutInput { .. })));
}

#[test]
fn single_edge_witness() {
    let g = path(2);
    let c = Cluster::whole(&g);
    let p = Pseudocut { edges: BTreeSet::from([0]), d_hat: 5, rho: 2.0, weight: 2 };
    let (step, stats) = shrink_or_witness(&g, &c, &p, &PseudocutConfig::new(1.0, 2, 5)).unwrap();
    assert!(stats.single);
    let Step::Witness(w) = step else { panic!("expected witness") };
    assert_eq!(w.edges, vec![0]);
    assert_eq!(w.expander.graph.n(), 1);
    assert!(w.paths.is_empty());
    oracle_witness(&g, &w);
}

#[test]
fn long_path_shrinks() {
    let g = path(60);
    let c = Cluster::whole(&g);
    let mut p = Pseudocut { edges: (0..59).collect(), d_hat: 1, rho: 4.0, weight: 60 };
    let mut cfg = PseudocutConfig::new(1.0, 4, 1);
    cfg.d2_factor = 1;
    cfg.audit = true;
    let mut steps = 0;
    loop {
        let (step, _) = shrink_or_witness(&g, &c, &p, &cfg).unwrap();
        match step {
            Step::Smaller(q) => {
                assert!(q.len() < p.len());
                oracle_balls(&g, &q.edges, q.d_hat, q.limit());
                p = q;
                steps += 1;
            }
            Step::Witness(w) => {
                oracle_witness(&g, &w);
                break;
            }
        }
    }
    assert!(steps >= 1);
    // at the end every cut edge sits between regions of weight near 15
    assert!(p.len() <= 8, "{}", p.len());
}

#[test]
fn expander_cluster_gives_witness() {
    for seed in 0..4 {
        let mut r = rng(40 + seed);
        let g = DynGraph::general(16, &random_regular(&mut r, 16, 3).into_iter().map(|(a, b)| (a, b, 1)).collect::<Vec<_>>(), 1).unwrap();
        let c = Cluster::whole(&g);
        let cfg = PseudocutConfig::new(0.5, 16, 1000);
        let out = find_pseudocut_and_expander(&g, &c, &cfg).unwrap();
        oracle_balls(&g, &out.cut.edges, cfg.d_hat, out.cut.limit());
        let w = out.witness.expect("non-empty cut has a witness");
        assert!(!out.stats.single_witness);
        assert!(w.edges.len() * 4 >= out.cut.len(), "{} of {}", w.edges.len(), out.cut.len());
        oracle_witness(&g, &w);
    }
}

#[test]
fn barbell_terminates_audited() {
    let mut r = rng(77);
    let mut edges: Vec<(usize, usize, u64)> = Vec::new();
    for (off, blob) in [(0, random_regular(&mut r, 36, 3)), (44, random_regular(&mut r, 36, 3))] {
        edges.extend(blob.into_iter().map(|(a, b)| (a + off, b + off, 1)));
    }
    for i in 35..44 {
        edges.push((i, i + 1, 1));
    }
    let g = DynGraph::general(80, &edges, 1).unwrap();
    let c = Cluster::whole(&g);
    for d_hat in [2, 6, 40] {
        let cfg = PseudocutConfig::new(0.5, 64, d_hat);
        let out = find_pseudocut_and_expander(&g, &c, &cfg).unwrap();
        oracle_balls(&g, &out.cut.edges, d_hat, out.cut.limit());
        assert!(out.stats.sizes.windows(2).all(|w| w[1] < w[0]));
        oracle_witness(&g, &out.witness.unwrap());
    }
}

#[test]
fn bipartite_cluster_weights_regular_only() {
    let mut r = rng(3);
    let g = random_bipartite(&mut r, 40, 10, 90, 4, 4);
    let c = Cluster::whole(&g);
    assert_eq!(c.weight, 40);
    let cfg = PseudocutConfig::new(0.5, 16, 8);
    let out = find_pseudocut_and_expander(&g, &c, &cfg).unwrap();
    oracle_balls(&g, &out.cut.edges, 8, 10);
    if let Some(w) = &out.witness {
        oracle_witness(&g, w);
    }
}
