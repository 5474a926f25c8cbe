mod common;

use common::*;
use dyncover::cover::{
    proc_cut, proc_cut_bidir, Cluster, ClusterEvent, ClusterOracle, CoverError, QueryError, CutOutcome, CutResult, DijkstraOracle,
    NcSession, OracleFactory, SessionOptions, DISTINGUISHED,
};
use dyncover::params::CoverConsts;
use dyncover::{DynGraph, VertexId, Walk, INF};
use proptest::prelude::*;
use std::collections::BTreeMap;

fn whole(g: &DynGraph) -> Cluster {
    let mut mask = vec![false; g.num_slots()];
    let members: std::collections::BTreeSet<_> = g.vertices().collect();
    for &v in &members {
        mask[v] = true;
    }
    Cluster { id: 0, mask, weight: g.num_live_regular() as u64, members, w0: 0, beta0: 0.0, parent: None }
}

fn zero(_: VertexId) -> u32 {
    0
}

/// v0..v10 alternating regular/super; regular v_{2i} is vertex i, super
/// v_{2j+1} is vertex 6+j.
fn path11() -> (DynGraph, Vec<VertexId>) {
    let ids: Vec<VertexId> = (0..11).map(|k| if k % 2 == 0 { k / 2 } else { 6 + k / 2 }).collect();
    let edges: Vec<_> = (0..10).map(|k| (ids[k], ids[k + 1], 1)).collect();
    let edges: Vec<_> = edges.into_iter().map(|(a, b, l)| if a < 6 { (a, b, l) } else { (b, a, l) }).collect();
    (DynGraph::bipartite(6, 5, &edges, 1).unwrap(), ids)
}

#[test]
fn path_cut_layer_two() {
    let (g, ids) = path11();
    let c = whole(&g);
    let k = CoverConsts::new(1, 6, Some(1.0));
    assert_eq!(k.cap, 22);
    let CutOutcome::Cut(res) = proc_cut(&g, &c, ids[0], &k, &zero).unwrap() else { panic!("expected a cut") };
    assert_eq!(res.layer, 2);
    let mut want: Vec<_> = ids[0..5].to_vec();
    want.sort();
    assert_eq!(res.c_prime, want);
    let mut gone: Vec<_> = ids[0..3].to_vec();
    gone.sort();
    assert_eq!(res.removed, gone);
}

#[test]
fn star_fails() {
    let edges: Vec<_> = (0..8).map(|v| (v, 8, 1)).collect();
    let g = DynGraph::bipartite(8, 1, &edges, 1).unwrap();
    let k = CoverConsts::new(1, 8, Some(1.0));
    assert!(matches!(proc_cut(&g, &whole(&g), 3, &k, &zero).unwrap(), CutOutcome::Fail { .. }));
}

#[test]
fn missing_center_rejected() {
    let (g, _) = path11();
    let mut c = whole(&g);
    c.mask[2] = false;
    let k = CoverConsts::new(1, 6, Some(1.0));
    assert_eq!(proc_cut(&g, &c, 2, &k, &zero), Err(CoverError::VertexNotInCluster(2, 0)));
}

#[test]
fn disconnected_cut_default_kappa() {
    // two components of 3 regular vertices each
    let edges = [(0, 6, 1), (1, 6, 1), (2, 6, 1), (3, 7, 1), (4, 7, 1), (5, 7, 1)];
    let g = DynGraph::bipartite(6, 2, &edges, 1).unwrap();
    let k = CoverConsts::new(1, 6, None);
    let CutOutcome::Cut(res) = proc_cut(&g, &whole(&g), 0, &k, &zero).unwrap() else { panic!() };
    assert_eq!(res.c_prime, vec![0, 1, 2, 6]);
    assert_eq!(res.removed, res.c_prime);
}

/// Independent reference: distances by the oracle crate, layers and prefix
/// sums recomputed from scratch.
fn reference_cut(g: &DynGraph, c: &Cluster, x: VertexId, k: &CoverConsts, cls: &dyn Fn(VertexId) -> u32) -> Option<(u64, Vec<VertexId>)> {
    let edges: Vec<_> = oracle_edges(g).into_iter().filter(|&(a, b, _)| c.contains(a) && c.contains(b)).collect();
    let dist = dyncover_oracle::dijkstra(g.num_slots(), &edges, x);
    let layer = |d: u64| if d == 0 { 1 } else { d.div_ceil(2 * k.d) };
    let reach: Vec<(VertexId, u64)> = c.members.iter().filter_map(|&v| dist[v].map(|d| (v, layer(d)))).collect();
    let top = reach.iter().map(|p| p.1).max().unwrap();
    for i in 1..=top + 1 {
        let w = |lo: u64, hi: u64, j: u32| {
            reach.iter().filter(|&&(v, l)| l >= lo && l <= hi && g.is_regular(v) && cls(v) >= j).count() as f64
        };
        if 2.0 * w(1, i, 0) > c.weight as f64 {
            return None;
        }
        if i > 1 && (0..=k.r).all(|j| w(i, i, j) * k.kappa <= w(1, i - 1, j)) {
            return Some((i, reach.iter().filter(|p| p.1 <= i).map(|p| p.0).collect()));
        }
    }
    unreachable!("the layer after exhaustion is empty")
}

fn check_cut(g: &DynGraph, c: &Cluster, res: &CutResult, k: &CoverConsts) {
    let truth = dyncover_oracle::dijkstra(
        g.num_slots(),
        &oracle_edges(g).into_iter().filter(|&(a, b, _)| c.contains(a) && c.contains(b)).collect::<Vec<_>>(),
        res.center,
    );
    for (&v, &d) in &res.dist {
        assert_eq!(Some(d), truth[v]);
        assert!(d <= 2 * k.d * res.layer);
    }
    assert!(res.layer <= k.cap);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eligibility_matches_reference(seed in 0u64..10_000, kappa in 1u32..4, salt in 0usize..7) {
        let mut r = rng(seed);
        let g = random_bipartite(&mut r, 14, 9, 24, 2, 2);
        let c = whole(&g);
        let k = CoverConsts::new(2, 14, Some(kappa as f64 / 2.0));
        let cls = |v: VertexId| ((v * 7 + salt) % 4) as u32;
        for x in g.regular_vertices() {
            let got = proc_cut(&g, &c, x, &k, &cls).unwrap();
            let want = reference_cut(&g, &c, x, &k, &cls);
            match (got, want) {
                (CutOutcome::Fail { .. }, None) => {}
                (CutOutcome::Cut(res), Some((layer, members))) => {
                    prop_assert_eq!(res.layer, layer);
                    prop_assert_eq!(&res.c_prime, &members);
                    check_cut(&g, &c, &res, &k);
                }
                (a, b) => prop_assert!(false, "got {:?}, want {:?}", a, b),
            }
        }
    }
}

#[test]
fn bidirectional_cut_on_barbell() {
    // two stars joined by a path of 12 regular vertices
    let mut edges = Vec::new();
    for v in 0..6 {
        edges.push((v, 30, 1));
        edges.push((6 + v, 31, 1));
    }
    let mut prev = 30;
    for i in 0..12 {
        let reg = 12 + i;
        edges.push((reg, prev, 1));
        let next = if i == 11 { 31 } else { 32 + i };
        edges.push((reg, next, 1));
        prev = next;
    }
    let g = DynGraph::bipartite(24, 43 - 24, &edges, 1).unwrap();
    let c = whole(&g);
    let k = CoverConsts::new(1, 24, Some(1.0));
    let res = proc_cut_bidir(&g, &c, 0, 6, &k, &zero).unwrap();
    check_cut(&g, &c, &res, &k);
    let one = proc_cut(&g, &c, res.center, &k, &zero).unwrap();
    assert_eq!(one, CutOutcome::Cut(res.clone()));
    assert!(!(res.removed.contains(&0) && res.removed.contains(&6)));
}

#[test]
fn bidirectional_both_fail() {
    let edges: Vec<_> = (0..8).map(|v| (v, 8, 1)).collect();
    let g = DynGraph::bipartite(8, 1, &edges, 1).unwrap();
    let k = CoverConsts::new(1, 8, Some(1.0));
    assert_eq!(proc_cut_bidir(&g, &whole(&g), 0, 1, &k, &zero), Err(CoverError::PreconditionUnmet(0)));
}

/// Flags the first regular pair of a cluster farther apart than the flag
/// distance, recomputed from scratch after every event.
struct ExactFlagger {
    flag: Option<(VertexId, VertexId)>,
    limit: u64,
}

impl ExactFlagger {
    fn scan(&mut self, g: &DynGraph, c: &Cluster) {
        self.flag = None;
        let reg: Vec<_> = c.regular(g).collect();
        for &a in &reg {
            let d = c.dijkstra(g, a, self.limit);
            if let Some(&b) = reg.iter().find(|b| !d.contains_key(b)) {
                self.flag = Some((a, b));
                return;
            }
        }
    }
}

impl ClusterOracle for ExactFlagger {
    fn on_event(&mut self, g: &DynGraph, c: &Cluster, _: &ClusterEvent) {
        self.scan(g, c);
    }
    fn flag(&self) -> Option<(VertexId, VertexId)> {
        self.flag
    }
    fn short_path(&self, g: &DynGraph, c: &Cluster, a: VertexId, b: VertexId) -> Result<Walk, QueryError> {
        dyncover::cover::cluster_shortest_path(g, c, a, b)
    }
    fn name(&self) -> String {
        "exact".into()
    }
}

fn exact_factory() -> OracleFactory {
    Box::new(|g, c, k| {
        let mut o = ExactFlagger { flag: None, limit: k.flag_dist() };
        o.scan(g, c);
        Box::new(o)
    })
}

fn dijkstra_factory() -> OracleFactory {
    Box::new(|_, _, _| Box::new(DijkstraOracle))
}

#[test]
fn init_cover_is_valid() {
    for seed in 0..20 {
        let mut r = rng(seed);
        let g = random_bipartite(&mut r, 40, 25, 70, 3, 3);
        let w = g.num_live_regular() as u64;
        for kappa in [Some(1.0), None] {
            let k = CoverConsts::new(3, w, kappa);
            let s = NcSession::new(g.clone(), k.clone(), dijkstra_factory(), SessionOptions::default()).unwrap();
            assert_eq!(s.verify(), Vec::<String>::new(), "seed {seed}");
            assert!(s.stats().bad_iterations <= 1);
            let carved: u64 = s.clusters().iter().skip(1).map(|c| c.w0).sum();
            assert!(carved <= 2 * w, "seed {seed}: carved weight {carved}");
            for v in g.regular_vertices() {
                let c = s.cluster(s.covering(v).unwrap());
                for (u, d) in oracle_dist(&g, v).into_iter().enumerate() {
                    if d.is_some_and(|d| d <= k.d) {
                        assert!(c.contains(u));
                    }
                }
            }
        }
    }
}

fn regular_diameter(g: &DynGraph, c: &Cluster) -> u64 {
    let reg: Vec<_> = c.regular(g).collect();
    let mut best = 0;
    for &a in &reg {
        let d = c.dijkstra(g, a, INF - 1);
        for b in &reg {
            best = best.max(d.get(b).copied().unwrap_or(INF));
        }
    }
    best
}

#[test]
fn session_under_updates() {
    for seed in 0..12 {
        let mut r = rng(100 + seed);
        let g = random_bipartite(&mut r, 30, 20, 55, 2, 2);
        let k = CoverConsts::new(2, 30, None);
        let opts = SessionOptions { check_budget: true, check_flags: true };
        let mut s = NcSession::new(g, k.clone(), exact_factory(), opts).unwrap();
        for _ in 0..80 {
            let Some(op) = random_op(s.graph(), &mut r) else { break };
            s.apply(&op).unwrap();
            assert_eq!(s.verify(), Vec::<String>::new(), "seed {seed}");
            for c in s.clusters() {
                assert!(regular_diameter(s.graph(), c) <= k.flag_dist());
            }
        }
        assert!(s.budget_violations().is_empty(), "{:?}", s.budget_violations());
        assert!(s.stats().flags > 0 || s.stats().steps < 80);
    }
}

#[test]
fn cluster_lists_match_edges() {
    let mut r = rng(7);
    let g = random_bipartite(&mut r, 20, 12, 40, 2, 2);
    let k = CoverConsts::new(2, 20, Some(1.0));
    let s = NcSession::new(g, k, dijkstra_factory(), SessionOptions::default()).unwrap();
    for e in s.graph().edges() {
        let ed = s.graph().edge(e);
        let want: Vec<_> = s.clusters().iter().filter(|c| c.contains(ed.a) && c.contains(ed.b)).map(|c| c.id).collect();
        assert_eq!(s.clusters_of_edge(e), want);
    }
    let mut counts = BTreeMap::new();
    for v in s.graph().vertices() {
        counts.insert(v, s.cluster_list(v).len());
    }
    assert!(counts.values().all(|&n| n >= 1));
    assert!(s.cluster_list(0).contains(&DISTINGUISHED) || s.covering(0).is_some());
}

#[test]
fn short_path_lies_in_cluster() {
    let mut r = rng(11);
    let g = random_bipartite(&mut r, 20, 12, 40, 2, 2);
    let k = CoverConsts::new(2, 20, Some(1.0));
    let s = NcSession::new(g, k, dijkstra_factory(), SessionOptions::default()).unwrap();
    for a in s.graph().regular_vertices().collect::<Vec<_>>() {
        let c = s.cluster(s.covering(a).unwrap());
        for b in c.regular(s.graph()).collect::<Vec<_>>() {
            let Ok(p) = s.short_path(a, b) else { continue };
            assert!(p.vertices.iter().all(|&v| c.contains(v)));
            assert_eq!(s.graph().walk_length(&p.vertices, &p.edges), Some(p.len));
        }
    }
}
