mod common;

use common::*;
use dyncover::expander::hierarchy::{walk_vertices, ExpanderSession, Hierarchy, HierarchyConfig};
use dyncover::expander::{
    certify, cut_matching, cut_player, embed_expander, matching_player, matching_round, prune, shortest_expander_path_bound,
    Certificate, CmgConfig, CutPlayerOutcome, EmbedConfig, Expander, ExpanderError, Multigraph, Pruner, RoundOutcome,
};
use dyncover::{DynGraph, INF};

fn complete(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect()
}

fn exact_phi(n: usize, edges: &[(usize, usize)]) -> f64 {
    let (c, s) = dyncover_oracle::expansion(n, edges).unwrap().unwrap();
    c as f64 / s as f64
}

/// Edges of `g` restricted to `keep`, reindexed.
fn restrict(g: &Multigraph, keep: &[usize]) -> (usize, Vec<(usize, usize)>) {
    let mut pos = vec![usize::MAX; g.n()];
    for (i, &v) in keep.iter().enumerate() {
        pos[v] = i;
    }
    let edges = g
        .live_edges()
        .map(|e| g.endpoints(e))
        .filter(|&(a, b)| pos[a] != usize::MAX && pos[b] != usize::MAX)
        .map(|(a, b)| (pos[a], pos[b]))
        .collect();
    (keep.len(), edges)
}

#[test]
fn path_bound_formula() {
    assert_eq!(shortest_expander_path_bound(2, 1, 1.0), 8);
    assert_eq!(shortest_expander_path_bound(16, 3, 0.5), 192);
}

#[test]
fn certified_expander_diameter_within_bound() {
    let mut r = rng(12);
    let edges = random_regular(&mut r, 12, 3);
    let x = Expander::new(Multigraph::from_edges(12, &edges));
    let Certificate::BruteForce { cut, size } = x.cert else { panic!() };
    assert_eq!(Some((cut, size)).map(|(c, s)| c as f64 / s as f64), Some(exact_phi(12, &edges)));
    let diam = x.graph.hop_diameter(&[true; 12]).unwrap() as u64;
    assert!(diam <= shortest_expander_path_bound(12, x.max_degree, x.cert.phi()));
}

#[test]
fn certificates_match_oracle() {
    for seed in 0..10 {
        let mut r = rng(seed);
        let n = 6 + (seed as usize % 8);
        let edges = random_regular(&mut r, n, 3 + (n % 2));
        let cert = certify(&Multigraph::from_edges(n, &edges), &vec![true; n]);
        assert!(cert.is_exact());
        assert_eq!(cert.phi(), exact_phi(n, &edges));
    }
    assert_eq!(certify(&Multigraph::from_edges(3, &complete(3)), &[true; 3]).phi(), 2.0);
}

#[test]
fn matching_round_examples() {
    // a=0, x=1, b=2
    let g = DynGraph::general(3, &[(0, 1, 1), (1, 2, 1)], 5).unwrap();
    let RoundOutcome::Paths(ps) = matching_round(&g, &[0], &[2], 2, 1) else { panic!() };
    assert_eq!(ps.len(), 1);
    assert_eq!(ps[0].walk.vertices, vec![0, 1, 2]);
    let RoundOutcome::Cut { removed, a, b, .. } = matching_round(&g, &[0], &[2], 1, 1) else { panic!() };
    assert!(removed.is_empty());
    assert_eq!((a, b), (vec![0], vec![2]));
}

fn audit_round(g: &DynGraph, out: &RoundOutcome, a: &[usize], b: &[usize], d: u64, eta: u64) {
    match out {
        RoundOutcome::Paths(ps) => {
            assert!(2 * ps.len() >= a.len());
            let mut load = vec![0u64; g.num_edge_slots()];
            for p in ps {
                assert!(p.walk.len <= d);
                assert_eq!(g.walk_length(&p.walk.vertices, &p.walk.edges), Some(p.walk.len));
                assert_eq!((p.walk.first(), p.walk.last()), (p.a, p.b));
                for &e in &p.walk.edges {
                    load[e] += 1;
                }
            }
            assert!(load.iter().all(|&l| l <= eta));
        }
        RoundOutcome::Cut { removed, a: a2, b: b2, .. } => {
            assert!(2 * a2.len() > a.len() && 2 * b2.len() >= b.len() - a.len() / 2);
            assert!(removed.len() as u64 * eta <= a.len() as u64 * d);
            let kept: Vec<_> = oracle_edges(g)
                .into_iter()
                .zip(g.edge_list())
                .filter(|(_, (e, ..))| !removed.contains(e))
                .map(|(x, _)| x)
                .collect();
            for &x in a2 {
                let dist = dyncover_oracle::dijkstra(g.num_slots(), &kept, x);
                for &y in b2 {
                    assert!(dist[y].map_or(true, |d2| d2 > d), "{x}->{y}");
                }
            }
        }
    }
}

#[test]
fn matching_round_random_audit() {
    for seed in 0..10 {
        let mut r = rng(seed);
        let edges = random_regular(&mut r, 50, 3);
        let wedges: Vec<_> = edges.iter().map(|&(a, b)| (a, b, 1 + (a + b) as u64 % 3)).collect();
        let g = DynGraph::general(50, &wedges, 10).unwrap();
        let a: Vec<usize> = (0..12).collect();
        let b: Vec<usize> = (30..50).collect();
        for (d, eta) in [(3, 1), (6, 2), (20, 3)] {
            let out = matching_round(&g, &a, &b, d, eta);
            audit_round(&g, &out, &a, &b, d, eta);
        }
    }
}

#[test]
fn matching_player_cases() {
    let mut r = rng(4);
    let edges: Vec<_> = random_regular(&mut r, 16, 3).into_iter().map(|(a, b)| (a, b, 1)).collect();
    let g = DynGraph::general(16, &edges, 1).unwrap();
    let a: Vec<usize> = (0..8).collect();
    let b: Vec<usize> = (8..16).collect();
    let r0 = matching_player(&g, &a, &b, 16, 64, a.len());
    assert!(r0.paths.is_empty() && r0.cut.is_none());
    let full = matching_player(&g, &a, &b, 16, 64, 0);
    assert!(full.cut.is_none());
    assert_eq!(full.paths.len(), 8);
    // bottleneck: two cliques joined by a single edge, low congestion
    let mut e2: Vec<_> = complete(6).into_iter().map(|(a, b)| (a, b, 1)).collect();
    e2.extend(complete(6).into_iter().map(|(a, b)| (a + 6, b + 6, 1)));
    e2.push((0, 6, 1));
    let g2 = DynGraph::general(12, &e2, 1).unwrap();
    let a2: Vec<usize> = (0..6).collect();
    let b2: Vec<usize> = (6..12).collect();
    let rr = matching_player(&g2, &a2, &b2, 4, 1, 0);
    let cut = rr.cut.expect("bottleneck must cut");
    assert!(cut.removed.len() <= 1);
    let kept: Vec<_> = g2.edge_list().into_iter().filter(|(e, ..)| !cut.removed.contains(e)).map(|(_, a, b, l)| (a, b, l)).collect();
    for &x in &cut.a {
        let d = dyncover_oracle::dijkstra(12, &kept, x);
        assert!(cut.b.iter().all(|&y| d[y].map_or(true, |v| v > 4)));
    }
}

#[test]
fn cut_player_examples() {
    let k4 = Multigraph::from_edges(4, &complete(4));
    match cut_player(&k4, &[true; 4], 0.5) {
        CutPlayerOutcome::ExpanderCore { core, cert } => {
            assert_eq!(core, vec![0, 1, 2, 3]);
            assert_eq!(cert, Certificate::BruteForce { cut: 4, size: 2 });
        }
        other => panic!("{other:?}"),
    }
    let mut e: Vec<_> = complete(4);
    e.extend(complete(4).into_iter().map(|(a, b)| (a + 4, b + 4)));
    e.push((0, 4));
    let bar = Multigraph::from_edges(8, &e);
    match cut_player(&bar, &[true; 8], 0.5) {
        CutPlayerOutcome::BalancedSparseCut { a, b, cut } => {
            assert_eq!(cut, 1);
            assert_eq!(a.len() + b.len(), 8);
            assert!(a.len() >= 2 && b.len() >= 2);
        }
        other => panic!("{other:?}"),
    }
    let two = Multigraph::from_edges(2, &[(0, 1)]);
    assert!(matches!(cut_player(&two, &[true; 2], 0.5), CutPlayerOutcome::ExpanderCore { .. }));
}

fn host_router<'a>(g: &'a DynGraph, terms: &'a [usize], d: u64, eta: u64) -> impl FnMut(&[usize], &[usize]) -> dyncover::expander::Routing + 'a {
    move |a: &[usize], b: &[usize]| {
        let ta: Vec<usize> = a.iter().map(|&i| terms[i]).collect();
        let tb: Vec<usize> = b.iter().map(|&i| terms[i]).collect();
        let mut r = matching_player(g, &ta, &tb, d, eta, 0);
        for p in &mut r.paths {
            p.a = terms.iter().position(|&t| t == p.a).unwrap();
            p.b = terms.iter().position(|&t| t == p.b).unwrap();
        }
        r
    }
}

#[test]
fn cut_matching_on_small_hosts() {
    let k5: Vec<_> = complete(5).into_iter().map(|(a, b)| (a, b, 1)).collect();
    let g = DynGraph::general(5, &k5, 1).unwrap();
    let terms = [0, 1, 2, 3];
    let res = cut_matching(4, &CmgConfig::default(), &mut host_router(&g, &terms, 4, 8));
    assert_eq!(res.fake, 0);
    let edges: Vec<_> = res.x.live_edges().map(|e| res.x.endpoints(e)).collect();
    assert!(exact_phi(4, &edges) >= res.cert.phi() && res.cert.is_exact());
    assert!(res.cert.phi() >= CmgConfig::default().phi);
    for e in res.x.live_edges() {
        let w = res.paths[e].as_ref().unwrap();
        let (a, b) = res.x.endpoints(e);
        assert_eq!(g.walk_length(&w.vertices, &w.edges), Some(w.len));
        assert_eq!((w.first(), w.last()), (terms[a], terms[b]));
    }
    let pair = cut_matching(2, &CmgConfig::default(), &mut host_router(&g, &terms, 4, 8));
    assert_eq!(pair.x.num_live_edges(), 1);
    assert_eq!(pair.cert.phi(), 1.0);
}

#[test]
fn cut_matching_round_count() {
    let mut r = rng(33);
    let edges: Vec<_> = random_regular(&mut r, 12, 3).into_iter().map(|(a, b)| (a, b, 1)).collect();
    let g = DynGraph::general(12, &edges, 1).unwrap();
    let terms: Vec<usize> = (0..12).collect();
    let cfg = CmgConfig::default();
    let res = cut_matching(12, &cfg, &mut host_router(&g, &terms, 40, 40));
    assert!(res.rounds as f64 <= cfg.c_hat * (12f64).log2().ceil());
    assert_eq!(res.fake, 0);
    assert!(res.cert.is_exact() && res.cert.phi() >= cfg.phi);
}

fn check_prune_bullets(x: &Multigraph, p: &Pruner, prev: &[usize], i: usize, phi: f64) {
    let s = p.pruned();
    assert!(prev.iter().all(|v| s.contains(v)), "pruned set shrank");
    let delta = p.delta() as f64;
    assert!(s.len() as f64 <= 8.0 * i as f64 * delta / phi);
    assert!(p.boundary() <= 4 * i);
    let keep: Vec<usize> = (0..x.n()).filter(|&v| !p.is_pruned(v)).collect();
    if keep.len() >= 2 {
        let (n, e) = restrict(p.graph(), &keep);
        assert!(exact_phi(n, &e) >= phi / (6.0 * delta) - 1e-12);
    }
}

#[test]
fn prune_examples() {
    let k6 = Multigraph::from_edges(6, &complete(6));
    assert_eq!(prune(&k6, 3.0, &[]).unwrap(), vec![Vec::<usize>::new()]);
    assert!(matches!(prune(&k6, 3.0, &[0]), Err(ExpanderError::StreamTooLong { .. })));
    let mut p = Pruner::new(k6.clone(), 3.0, 14);
    p.delete_unchecked(0);
    check_prune_bullets(&k6, &p, &[], 1, 3.0);
}

#[test]
fn prune_full_stream() {
    for seed in 0..5 {
        let mut r = rng(70 + seed);
        let edges = random_regular(&mut r, 14, 6);
        let x = Multigraph::from_edges(14, &edges);
        let phi = exact_phi(14, &edges);
        let mut p = Pruner::new(x.clone(), phi, 14);
        let mut prev = Vec::new();
        for i in 1..=p.limit() {
            let e = (i * 7 + seed as usize) % edges.len();
            if !p.graph().is_alive(e) {
                continue;
            }
            p.delete(e).unwrap();
            check_prune_bullets(&x, &p, &prev, i, phi);
            prev = p.pruned();
        }
    }
}

#[test]
fn embed_small_and_medium() {
    let mut r = rng(5);
    let edges = random_regular(&mut r, 32, 3);
    let host = Multigraph::from_edges(32, &edges);
    let active = vec![true; 32];
    let phi = 0.2;
    let (x2, emb2, kept2) = embed_expander(&host, &active, &[3, 17], phi, &EmbedConfig::default()).unwrap();
    assert_eq!((x2.graph.num_live_edges(), kept2), (1, vec![0, 1]));
    assert!(emb2.max_len() as u64 <= shortest_expander_path_bound(32, 3, phi));
    let terms: Vec<usize> = (0..8).map(|i| i * 4).collect();
    let (x, emb, kept) = embed_expander(&host, &active, &terms, phi, &EmbedConfig::default()).unwrap();
    assert_eq!(kept.len(), x.graph.n());
    let mut recount = vec![0u64; host.num_edge_slots()];
    for e in x.graph.live_edges() {
        let (a, b) = x.graph.endpoints(e);
        let vs = walk_vertices(&host, terms[kept[a]], &emb.paths[e]);
        assert_eq!(*vs.last().unwrap(), terms[kept[b]]);
        assert_eq!(vs, emb.vertices[e]);
        for &h in &emb.paths[e] {
            recount[h] += 1;
        }
    }
    assert_eq!(recount, emb.congestion);
    let logn = 5.0;
    assert!(emb.max_len() as f64 <= 8.0 * 3.0 * logn / phi);
    assert!(x.max_degree as f64 <= 8.0 * (8f64).log2() * 2.0);
    if x.graph.n() <= 16 {
        let ed: Vec<_> = x.graph.live_edges().map(|e| x.graph.endpoints(e)).collect();
        assert_eq!(x.cert.phi(), exact_phi(x.graph.n(), &ed));
    }
}

#[test]
fn embed_whole_host_certified() {
    let mut r = rng(8);
    let edges = random_regular(&mut r, 12, 3);
    let host = Multigraph::from_edges(12, &edges);
    let terms: Vec<usize> = (0..12).collect();
    let (x, _, kept) = embed_expander(&host, &[true; 12], &terms, 0.3, &EmbedConfig::default()).unwrap();
    assert!(x.cert.is_exact());
    let ed: Vec<_> = x.graph.live_edges().map(|e| x.graph.endpoints(e)).collect();
    assert_eq!(x.cert.phi(), exact_phi(kept.len(), &ed));
}

fn check_walk(g: &Multigraph, x: usize, y: usize, edges: &[usize]) {
    let vs = walk_vertices(g, x, edges);
    assert_eq!(*vs.last().unwrap(), y);
    for &e in edges {
        assert!(g.is_alive(e));
    }
}

#[test]
fn hierarchy_single_level() {
    let mut r = rng(9);
    let edges = random_regular(&mut r, 16, 3);
    let cfg = HierarchyConfig { eps: 1.0, ..HierarchyConfig::default() };
    let mut h = Hierarchy::new(Multigraph::from_edges(16, &edges), 0.3, cfg).unwrap();
    assert_eq!(h.level_sizes(), vec![16]);
    assert_eq!(h.query(4, 4).unwrap(), Vec::<usize>::new());
    let p = h.query(0, 9).unwrap();
    check_walk(h.graph(), 0, 9, &p);
}

#[test]
fn hierarchy_under_deletions() {
    for seed in 0..3 {
        let mut r = rng(200 + seed);
        let n = 24;
        let edges = random_regular(&mut r, n, 3);
        let x = Multigraph::from_edges(n, &edges);
        let phi = certify(&x, &vec![true; n]).phi();
        let cfg = HierarchyConfig { eps: 0.5, ..HierarchyConfig::default() };
        let mut h = Hierarchy::new(x, phi, cfg).unwrap();
        assert!(h.level_sizes().len() >= 2);
        let mut deleted = 0;
        for i in 0..10 {
            let e = (i * 5 + seed as usize) % edges.len();
            if !h.graph().is_alive(e) {
                continue;
            }
            deleted += 1;
            match h.delete_edge(e) {
                Ok(()) | Err(ExpanderError::BudgetExhausted) => {}
                Err(err) => panic!("{err}"),
            }
            let live: Vec<usize> = (0..n).filter(|&v| !h.is_pruned(v)).collect();
            assert!(live.len() + 8 * 3 * deleted >= n || h.pruned().len() as f64 <= 8.0 * deleted as f64 * 3.0 / phi);
            for &a in live.iter().step_by(3) {
                for &b in &live {
                    let p = h.query(a, b).unwrap();
                    check_walk(h.graph(), a, b, &p);
                    assert!((p.len() as f64) <= h.length_bound());
                }
            }
        }
    }
}

#[test]
fn expander_session_host_lists() {
    // host: cycle of 8 with lengths 1; expander on 4 anchors embedded so that
    // host edge 0 carries three embedding paths
    let cyc: Vec<_> = (0..8).map(|i| (i, (i + 1) % 8, 1)).collect();
    let host = DynGraph::general(8, &cyc, 1).unwrap();
    let anchors = vec![0, 1, 2, 6];
    let x = Multigraph::from_edges(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
    let hp = vec![vec![0], vec![0, 1], vec![7, 6], vec![1], vec![0, 7, 6], vec![2, 3, 4, 5]];
    let hv = vec![vec![0, 1], vec![0, 1, 2], vec![0, 7, 6], vec![1, 2], vec![1, 0, 7, 6], vec![2, 3, 4, 5, 6]];
    let cfg = HierarchyConfig { eps: 1.0, ..HierarchyConfig::default() };
    let mut s = ExpanderSession::new(x, anchors, 1.0, hp, hv, 100, cfg).unwrap();
    assert_eq!(s.live(), vec![0, 1, 2, 3]);
    assert_eq!(s.carried_by(0), &[0, 1, 4]);
    let w = s.query(&host, 1, 3).unwrap();
    assert_eq!((w.first(), w.last()), (1, 6));
    assert_eq!(host.walk_length(&w.vertices, &w.edges), Some(w.len));
    let before = s.hierarchy().graph().num_live_edges();
    let _ = s.on_host_update(Some(0), 1);
    assert_eq!(before - s.hierarchy().graph().num_live_edges(), 3);
    let mut host2 = host.clone();
    host2.apply(&dyncover::UpdateOp::DeleteEdge(0)).unwrap();
    for a in s.live() {
        for b in s.live() {
            if let Ok(w) = s.query(&host2, a, b) {
                assert_eq!(host2.walk_length(&w.vertices, &w.edges), Some(w.len));
                assert!(w.len < INF);
            }
        }
    }
}
