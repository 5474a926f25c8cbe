//! Seeded graph and update-stream generators.

use dyncover::text::StreamItem;
use dyncover::{DynGraph, UpdateOp, VertexId};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Bipartite edges `(regular, global super id, len)`; every regular vertex
/// gets at least one edge.
pub fn random_bipartite(r: &mut ChaCha8Rng, nr: usize, ns: usize, m: usize, maxlen: u64) -> Vec<(usize, usize, u64)> {
    let mut edges: Vec<_> = (0..nr).map(|v| (v, nr + r.gen_range(0..ns), r.gen_range(1..=maxlen))).collect();
    while edges.len() < m {
        edges.push((r.gen_range(0..nr), nr + r.gen_range(0..ns), r.gen_range(1..=maxlen)));
    }
    edges
}

/// Connected general graph: a random spanning tree plus random extra edges
/// (parallel edges allowed, no loops).
pub fn random_general(r: &mut ChaCha8Rng, n: usize, m: usize, maxlen: u64) -> Vec<(usize, usize, u64)> {
    let mut edges: Vec<_> = (1..n).map(|v| (r.gen_range(0..v), v, r.gen_range(1..=maxlen))).collect();
    while edges.len() < m && n >= 2 {
        let (a, b) = (r.gen_range(0..n), r.gen_range(0..n));
        if a != b {
            edges.push((a.min(b), a.max(b), r.gen_range(1..=maxlen)));
        }
    }
    edges
}

/// Simple connected `d`-regular graph. Stubs are paired one random pair at
/// a time, skipping pairs that would form a loop or a parallel edge, and the
/// attempt restarts when the remaining stubs admit no valid pair.
pub fn random_regular(r: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<(usize, usize)> {
    assert!(n > d && (n * d) % 2 == 0, "no simple {d}-regular graph on {n} vertices");
    'outer: loop {
        let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat(v).take(d)).collect();
        let mut seen = BTreeSet::new();
        let mut edges = Vec::new();
        while !stubs.is_empty() {
            let ok = |i: usize, j: usize| stubs[i] != stubs[j] && !seen.contains(&(stubs[i].min(stubs[j]), stubs[i].max(stubs[j])));
            let mut pick = None;
            for _ in 0..4 * stubs.len() {
                let (i, j) = (r.gen_range(0..stubs.len()), r.gen_range(0..stubs.len()));
                if ok(i, j) {
                    pick = Some((i, j));
                    break;
                }
            }
            if pick.is_none() {
                let valid: Vec<(usize, usize)> = (0..stubs.len()).flat_map(|i| (i + 1..stubs.len()).map(move |j| (i, j))).filter(|&(i, j)| ok(i, j)).collect();
                pick = valid.choose(r).copied();
            }
            let Some((i, j)) = pick else { continue 'outer };
            let (a, b) = (stubs[i].min(stubs[j]), stubs[i].max(stubs[j]));
            seen.insert((a, b));
            edges.push((a, b));
            stubs.swap_remove(i.max(j));
            stubs.swap_remove(i.min(j));
        }
        let comps = dyncover_oracle::components(n, &edges);
        if comps.iter().all(|&c| c == comps[0]) {
            return edges;
        }
    }
}

pub fn complete(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect()
}

pub fn circulant(n: usize, jumps: &[usize]) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for v in 0..n {
        for &j in jumps {
            let w = (v + j) % n;
            if j % n != 0 && (2 * j != n || v < w) {
                edges.push((v.min(w), v.max(w)));
            }
        }
    }
    edges
}

pub fn grid(w: usize, h: usize) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let v = y * w + x;
            if x + 1 < w {
                edges.push((v, v + 1));
            }
            if y + 1 < h {
                edges.push((v, v + w));
            }
        }
    }
    edges
}

/// Two random 3-regular blobs joined by a path of `bridge` edges.
pub fn barbell(r: &mut ChaCha8Rng, blob: usize, bridge: usize) -> (usize, Vec<(usize, usize)>) {
    let mut edges = random_regular(r, blob, 3);
    edges.extend(random_regular(r, blob, 3).into_iter().map(|(a, b)| (a + blob, b + blob)));
    let mut n = 2 * blob;
    let mut prev = 0;
    for _ in 1..bridge {
        edges.push((prev, n));
        prev = n;
        n += 1;
    }
    edges.push((prev, blob));
    (n, edges)
}

/// A random valid update for `g`, if one exists. `keep` is never deleted.
pub fn random_op(g: &DynGraph, r: &mut ChaCha8Rng, keep: Option<VertexId>) -> Option<UpdateOp> {
    let isolated: Vec<VertexId> = g.vertices().filter(|&v| g.degree(v) == 0 && Some(v) != keep).collect();
    let supers: Vec<VertexId> = g.vertices().filter(|&v| !g.is_regular(v) && g.degree(v) > 0).collect();
    let edges: Vec<_> = g.edges().collect();
    let roll = r.gen_range(0..10);
    if roll == 0 && !isolated.is_empty() {
        return Some(UpdateOp::DeleteIsolatedVertex(*isolated.choose(r).unwrap()));
    }
    if roll <= 2 && !supers.is_empty() {
        let u = *supers.choose(r).unwrap();
        let inc: Vec<_> = g.incident(u).collect();
        let k = r.gen_range(1..=inc.len());
        let mut pick: Vec<_> = inc.choose_multiple(r, k).copied().collect();
        pick.sort();
        return Some(UpdateOp::SupernodeSplit { u, edges: pick });
    }
    if !edges.is_empty() {
        return Some(UpdateOp::DeleteEdge(*edges.choose(r).unwrap()));
    }
    isolated.first().map(|&v| UpdateOp::DeleteIsolatedVertex(v))
}

/// Mixed stream of up to `updates` valid updates simulated on a copy of
/// `g`, with a query after each update with probability `p_query`.
pub fn mixed_stream(
    g: &DynGraph,
    r: &mut ChaCha8Rng,
    updates: usize,
    p_query: f64,
    keep: Option<VertexId>,
) -> Vec<StreamItem> {
    let mut g = g.clone();
    let mut out = Vec::new();
    for _ in 0..updates {
        let Some(op) = random_op(&g, r, keep) else { break };
        g.apply(&op).expect("generated op is valid");
        out.push(StreamItem::Update(op));
        if r.gen_bool(p_query) {
            if let Some(q) = random_query(&g, r) {
                out.push(q);
            }
        }
    }
    out
}

fn random_query(g: &DynGraph, r: &mut ChaCha8Rng) -> Option<StreamItem> {
    let regs: Vec<VertexId> = g.regular_vertices().collect();
    let x = *regs.choose(r)?;
    let y = *regs.choose(r)?;
    Some(if r.gen_bool(0.5) { StreamItem::Query(x, y) } else { StreamItem::Path(x, y) })
}

/// Deletions of random live edges of a general graph interleaved with
/// queries, `steps` items in total.
pub fn deletion_stream(n: usize, m: usize, r: &mut ChaCha8Rng, steps: usize, p_delete: f64) -> Vec<StreamItem> {
    let mut live: Vec<usize> = (0..m).collect();
    let mut out = Vec::new();
    while out.len() < steps {
        if !live.is_empty() && r.gen_bool(p_delete) {
            let i = r.gen_range(0..live.len());
            out.push(StreamItem::Update(UpdateOp::DeleteEdge(live.swap_remove(i))));
        } else {
            let (x, y) = (r.gen_range(0..n), r.gen_range(0..n));
            out.push(if r.gen_bool(0.5) { StreamItem::Query(x, y) } else { StreamItem::Path(x, y) });
        }
    }
    out
}

/// Adversarial stream: each deletion removes an edge of a current shortest
/// path between a random pair, followed by a query on that pair.
pub fn adversarial_stream(n: usize, edges: &[(usize, usize, u64)], r: &mut ChaCha8Rng, steps: usize) -> Vec<StreamItem> {
    let mut alive = vec![true; edges.len()];
    let mut out = Vec::new();
    let mut tries = 0;
    while out.len() < steps && tries < 20 * steps {
        tries += 1;
        let (x, y) = (r.gen_range(0..n), r.gen_range(0..n));
        let Some(path) = shortest_edges(n, edges, &alive, x, y) else {
            out.push(StreamItem::Query(x, y));
            continue;
        };
        if path.is_empty() {
            continue;
        }
        let e = path[r.gen_range(0..path.len())];
        alive[e] = false;
        out.push(StreamItem::Update(UpdateOp::DeleteEdge(e)));
        if out.len() < steps {
            out.push(StreamItem::Path(x, y));
        }
    }
    out
}

/// Edge ids of one shortest `x`-`y` path among live edges.
fn shortest_edges(n: usize, edges: &[(usize, usize, u64)], alive: &[bool], x: usize, y: usize) -> Option<Vec<usize>> {
    let live: Vec<(usize, usize, u64)> = edges.iter().zip(alive).filter(|(_, &a)| a).map(|(&e, _)| e).collect();
    let ids: Vec<usize> = (0..edges.len()).filter(|&e| alive[e]).collect();
    let dx = dyncover_oracle::dijkstra(n, &live, x);
    dx[y]?;
    let dy = dyncover_oracle::dijkstra(n, &live, y);
    let mut out = Vec::new();
    let mut v = x;
    while v != y {
        let dv = dy[v]?;
        let (i, w) = live.iter().enumerate().find_map(|(i, &(a, b, l))| {
            let w = if a == v { b } else if b == v { a } else { return None };
            (dy[w].map(|d| d + l) == Some(dv)).then_some((i, w))
        })?;
        out.push(ids[i]);
        v = w;
    }
    Some(out)
}

/// Deletion sequence of distinct edge ids, at most `len` long.
pub fn edge_deletions(m: usize, r: &mut ChaCha8Rng, len: usize) -> Vec<usize> {
    let mut ids: Vec<usize> = (0..m).collect();
    ids.shuffle(r);
    ids.truncate(len);
    ids
}

/// `g n m` text with explicit lengths.
pub fn write_weighted(n: usize, edges: &[(usize, usize, u64)]) -> String {
    let mut out = format!("g {} {}\n", n, edges.len());
    for (i, &(a, b, l)) in edges.iter().enumerate() {
        out.push_str(&format!("e {i} {a} {b} {l}\n"));
    }
    out
}

/// Random demand pairs with distinct endpoints.
pub fn random_pairs(r: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    while out.len() < k {
        let (s, t) = (r.gen_range(0..n), r.gen_range(0..n));
        if s != t {
            out.push((s, t));
        }
    }
    out
}
