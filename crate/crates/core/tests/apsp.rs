mod common;

use common::*;
use dyncover::apsp::{ApspError, ApspOptions, ApspSession, OracleKind};
use dyncover::{DynGraph, UpdateOp, Walk};
use proptest::prelude::*;
use rand::Rng;

fn opts(kappa: Option<f64>, oracle: OracleKind) -> ApspOptions {
    ApspOptions { kappa, oracle, check_budget: false, ..ApspOptions::default() }
}

fn general_dist(n: usize, edges: &[(usize, usize, u64)], alive: &[bool], s: usize) -> Vec<Option<u64>> {
    let live: Vec<_> = edges.iter().zip(alive).filter(|(_, &a)| a).map(|(&e, _)| e).collect();
    dyncover_oracle::dijkstra(n, &live, s)
}

fn check_general_walk(edges: &[(usize, usize, u64)], alive: &[bool], w: &Walk, x: usize, y: usize) {
    assert_eq!((w.first(), w.last()), (x, y));
    let mut len = 0;
    for (i, &e) in w.edges.iter().enumerate() {
        assert!(alive[e], "walk uses deleted edge {e}");
        let (a, b, l) = edges[e];
        let (u, v) = (w.vertices[i], w.vertices[i + 1]);
        assert!((a, b) == (u, v) || (a, b) == (v, u));
        len += l;
    }
    assert_eq!(len, w.len);
}

/// Checks the sandwich for one pair and returns the stretch of the estimate.
fn check_pair(s: &mut ApspSession, edges: &[(usize, usize, u64)], alive: &[bool], truth: Option<u64>, x: usize, y: usize) -> f64 {
    let a = s.alpha();
    match (s.dist_query(x, y), truth) {
        (Ok(est), Some(d)) => {
            assert!(d <= est.value, "{x}-{y}: dist {d} > estimate {}", est.value);
            assert!(est.lower <= d, "{x}-{y}: lower bound {} > dist {d}", est.lower);
            assert!(est.value <= 2 * a * d.max(0), "{x}-{y}: estimate {} > 2*{a}*{d}", est.value);
            let w = s.shortest_path_query(x, y).unwrap();
            check_general_walk(edges, alive, &w, x, y);
            assert!(w.len <= est.value);
            if d == 0 {
                1.0
            } else {
                est.value as f64 / d as f64
            }
        }
        (Err(ApspError::Disconnected(..)), None) => 1.0,
        (r, t) => panic!("{x}-{y}: {r:?} vs truth {t:?}"),
    }
}

#[test]
fn adjacent_pair_and_self() {
    let edges = [(0, 1, 1)];
    let mut s = ApspSession::general(2, &edges, ApspOptions::default()).unwrap();
    let e = s.dist_query(0, 1).unwrap();
    assert!(e.value >= 1 && e.value <= 2 * s.alpha());
    assert_eq!(e.scale, 0);
    assert_eq!(s.dist_query(1, 1).unwrap().value, 0);
    let w = s.shortest_path_query(0, 1).unwrap();
    assert_eq!((w.vertices, w.edges, w.len), (vec![0, 1], vec![0], 1));
}

#[test]
fn path_graph_across() {
    let n = 30;
    let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1, 1 + (i as u64 % 3))).collect();
    let alive = vec![true; edges.len()];
    for kappa in [None, Some(1.0)] {
        let mut s = ApspSession::general(n, &edges, opts(kappa, OracleKind::Full)).unwrap();
        for (x, y) in [(0, n - 1), (3, 17), (10, 11)] {
            let d = general_dist(n, &edges, &alive, x)[y];
            check_pair(&mut s, &edges, &alive, d, x, y);
        }
    }
}

#[test]
fn deleting_shortest_path_reroutes_then_disconnects() {
    // cycle 0-1-2-3-4-5-0; 0 to 2 via 1 is shortest
    let edges: Vec<_> = (0..6).map(|i| (i, (i + 1) % 6, 1)).collect();
    let mut alive = vec![true; 6];
    let mut s = ApspSession::general(6, &edges, opts(Some(1.0), OracleKind::Full)).unwrap();
    let w = s.shortest_path_query(0, 2).unwrap();
    assert_eq!(w.vertices, vec![0, 1, 2]);
    s.apply(&UpdateOp::DeleteEdge(1)).unwrap();
    alive[1] = false;
    let w = s.shortest_path_query(0, 2).unwrap();
    check_general_walk(&edges, &alive, &w, 0, 2);
    assert_eq!(w.vertices, vec![0, 5, 4, 3, 2]);
    s.apply(&UpdateOp::DeleteEdge(4)).unwrap();
    assert_eq!(s.dist_query(0, 2), Err(ApspError::Disconnected(0, 2)));
    assert!(matches!(s.shortest_path_query(0, 2), Err(ApspError::Disconnected(0, 2))));
}

fn random_general(r: &mut impl Rng, n: usize, m: usize, maxlen: u64) -> Vec<(usize, usize, u64)> {
    let mut edges: Vec<_> = (1..n).map(|v| (r.gen_range(0..v), v, r.gen_range(1..=maxlen))).collect();
    while edges.len() < m {
        let (a, b) = (r.gen_range(0..n), r.gen_range(0..n));
        if a != b {
            edges.push((a.min(b), a.max(b), r.gen_range(1..=maxlen)));
        }
    }
    edges
}

fn interleaved(seed: u64, n: usize, m: usize, steps: usize, kappa: Option<f64>, oracle: OracleKind) -> f64 {
    let mut r = rng(seed);
    let edges = random_general(&mut r, n, m, 4);
    let mut alive = vec![true; m];
    let mut s = ApspSession::general(n, &edges, opts(kappa, oracle)).unwrap();
    let mut worst: f64 = 1.0;
    for _ in 0..steps {
        if r.gen_bool(0.5) {
            let live: Vec<usize> = (0..m).filter(|&e| alive[e]).collect();
            if let Some(&e) = live.get(r.gen_range(0..live.len().max(1))) {
                s.apply(&UpdateOp::DeleteEdge(e)).unwrap();
                alive[e] = false;
            }
        } else {
            let (x, y) = (r.gen_range(0..n), r.gen_range(0..n));
            let d = general_dist(n, &edges, &alive, x)[y];
            worst = worst.max(check_pair(&mut s, &edges, &alive, d, x, y));
        }
    }
    worst
}

#[test]
fn interleaved_sandwich_default_kappa() {
    for seed in 0..2 {
        interleaved(seed, 40, 70, 120, None, OracleKind::Full);
    }
}

#[test]
fn interleaved_sandwich_small_kappa() {
    for seed in 10..13 {
        interleaved(seed, 40, 70, 120, Some(1.0), OracleKind::Full);
    }
}

#[test]
fn interleaved_with_slow_clusters() {
    interleaved(20, 60, 110, 150, Some(1.0), OracleKind::Slow);
}

#[test]
fn bipartite_front_with_splits() {
    let mut r = rng(33);
    let g = random_bipartite(&mut r, 30, 12, 60, 3, 3);
    let mut shadow = g.clone();
    let mut s = ApspSession::bipartite(g, opts(Some(1.0), OracleKind::Full)).unwrap();
    for step in 0..80 {
        let Some(op) = random_op(&shadow, &mut r) else { break };
        shadow.apply(&op).unwrap();
        s.apply(&op).unwrap();
        let regs: Vec<usize> = shadow.regular_vertices().collect();
        for &x in regs.iter().step_by(5) {
            let truth = oracle_dist(&shadow, x);
            for &y in regs.iter().step_by(3) {
                match s.dist_query(x, y) {
                    Ok(e) => {
                        let d = truth[y].expect("connected");
                        assert!(d <= e.value && e.value <= 2 * s.alpha() * d.max(1), "step {step}");
                        assert!(e.lower <= d);
                        let w = s.shortest_path_query(x, y).unwrap();
                        assert_eq!(shadow.walk_length(&w.vertices, &w.edges), Some(w.len));
                        assert!(w.len <= e.value);
                    }
                    Err(ApspError::Disconnected(..)) => assert_eq!(truth[y], None),
                    Err(e) => panic!("{e}"),
                }
            }
        }
    }
}

#[test]
fn rejects_bad_vertices() {
    let g = DynGraph::bipartite(2, 1, &[(0, 2, 1), (1, 2, 1)], 1).unwrap();
    let mut s = ApspSession::bipartite(g, ApspOptions::default()).unwrap();
    assert_eq!(s.dist_query(0, 2), Err(ApspError::NotQueryVertex(2)));
    let mut t = ApspSession::general(3, &[(0, 1, 1)], ApspOptions::default()).unwrap();
    assert_eq!(t.dist_query(0, 2), Err(ApspError::Disconnected(0, 2)));
    assert_eq!(t.dist_query(0, 7), Err(ApspError::NotQueryVertex(7)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]
    #[test]
    fn sandwich_on_small_graphs(seed in 0u64..1000, n in 3usize..12, extra in 0usize..10) {
        let mut r = rng(seed);
        let edges = random_general(&mut r, n, n - 1 + extra, 5);
        let alive = vec![true; edges.len()];
        let mut s = ApspSession::general(n, &edges, opts(Some(1.0), OracleKind::Full)).unwrap();
        for x in 0..n {
            let truth = general_dist(n, &edges, &alive, x);
            for y in 0..n {
                check_pair(&mut s, &edges, &alive, truth[y], x, y);
            }
        }
    }
}
