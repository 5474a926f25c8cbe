#![allow(dead_code)]

use dyncover::{DynGraph, UpdateOp, VertexId};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random bipartite graph; every regular vertex gets at least one edge.
pub fn random_bipartite(rng: &mut ChaCha8Rng, nr: usize, ns: usize, m: usize, d: u64, maxlen: u64) -> DynGraph {
    let mut edges = Vec::new();
    for v in 0..nr {
        edges.push((v, nr + rng.gen_range(0..ns), rng.gen_range(1..=maxlen)));
    }
    while edges.len() < m {
        edges.push((rng.gen_range(0..nr), nr + rng.gen_range(0..ns), rng.gen_range(1..=maxlen)));
    }
    DynGraph::bipartite(nr, ns, &edges, d).unwrap()
}

/// A random valid update for `g`, if one exists.
pub fn random_op(g: &DynGraph, rng: &mut ChaCha8Rng) -> Option<UpdateOp> {
    let isolated: Vec<VertexId> = g.vertices().filter(|&v| g.degree(v) == 0).collect();
    let supers: Vec<VertexId> = g.vertices().filter(|&v| !g.is_regular(v) && g.degree(v) > 0).collect();
    let edges: Vec<_> = g.edges().collect();
    let roll = rng.gen_range(0..10);
    if roll == 0 && !isolated.is_empty() {
        return Some(UpdateOp::DeleteIsolatedVertex(*isolated.choose(rng).unwrap()));
    }
    if roll <= 2 && !supers.is_empty() {
        let u = *supers.choose(rng).unwrap();
        let inc: Vec<_> = g.incident(u).collect();
        let k = rng.gen_range(1..=inc.len());
        let mut pick: Vec<_> = inc.choose_multiple(rng, k).copied().collect();
        pick.sort();
        return Some(UpdateOp::SupernodeSplit { u, edges: pick });
    }
    if !edges.is_empty() {
        return Some(UpdateOp::DeleteEdge(*edges.choose(rng).unwrap()));
    }
    isolated.first().map(|&v| UpdateOp::DeleteIsolatedVertex(v))
}

pub fn oracle_edges(g: &DynGraph) -> Vec<(usize, usize, u64)> {
    g.edge_list().into_iter().map(|(_, a, b, l)| (a, b, l)).collect()
}

pub fn oracle_dist(g: &DynGraph, s: VertexId) -> Vec<Option<u64>> {
    dyncover_oracle::dijkstra(g.num_slots(), &oracle_edges(g), s)
}

/// Random simple `d`-regular multigraph edges on `n` vertices (pairing
/// model, retried until simple and connected).
pub fn random_regular(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<(usize, usize)> {
    'outer: loop {
        let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat(v).take(d)).collect();
        stubs.shuffle(rng);
        let mut seen = std::collections::BTreeSet::new();
        let mut edges = Vec::new();
        for p in stubs.chunks(2) {
            let (a, b) = (p[0].min(p[1]), p[0].max(p[1]));
            if a == b || !seen.insert((a, b)) {
                continue 'outer;
            }
            edges.push((a, b));
        }
        let comps = dyncover_oracle::components(n, &edges);
        if comps.iter().all(|&c| c == comps[0]) {
            return edges;
        }
    }
}
