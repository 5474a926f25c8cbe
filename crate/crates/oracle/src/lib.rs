//! Slow, exact reference algorithms. Nothing here depends on `dyncover`;
//! graphs are plain edge lists `(a, b, len)` over vertices `0..n`.

mod lp;

pub use lp::{frac_mcf, lp_max, LpResult};
use num_rational::BigRational;

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use thiserror::Error;

pub type Edge = (usize, usize, u64);

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("oracle limit exceeded: {0}")]
    LimitExceeded(String),
}

pub fn dijkstra(n: usize, edges: &[Edge], s: usize) -> Vec<Option<u64>> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b, l) in edges {
        adj[a].push((b, l));
        adj[b].push((a, l));
    }
    let mut dist = vec![None; n];
    let mut pq = BinaryHeap::new();
    pq.push(Reverse((0u64, s)));
    while let Some(Reverse((d, v))) = pq.pop() {
        if dist[v].is_some() {
            continue;
        }
        dist[v] = Some(d);
        for &(w, l) in &adj[v] {
            if dist[w].is_none() {
                pq.push(Reverse((d + l, w)));
            }
        }
    }
    dist
}

pub fn bellman_ford(n: usize, edges: &[Edge], s: usize) -> Vec<Option<u64>> {
    let mut dist: Vec<Option<u64>> = vec![None; n];
    dist[s] = Some(0);
    for _ in 0..n {
        let mut changed = false;
        for &(a, b, l) in edges {
            for (x, y) in [(a, b), (b, a)] {
                if let Some(dx) = dist[x] {
                    if dist[y].map_or(true, |dy| dx + l < dy) {
                        dist[y] = Some(dx + l);
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    dist
}

/// Floyd-Warshall.
pub fn all_pairs(n: usize, edges: &[Edge]) -> Vec<Vec<Option<u64>>> {
    let mut d = vec![vec![None; n]; n];
    for (v, row) in d.iter_mut().enumerate() {
        row[v] = Some(0);
    }
    for &(a, b, l) in edges {
        for (x, y) in [(a, b), (b, a)] {
            if d[x][y].map_or(true, |c| l < c) {
                d[x][y] = Some(l);
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            let Some(ik) = d[i][k] else { continue };
            for j in 0..n {
                if let Some(kj) = d[k][j] {
                    if d[i][j].map_or(true, |c| ik + kj < c) {
                        d[i][j] = Some(ik + kj);
                    }
                }
            }
        }
    }
    d
}

/// Vertices within distance `r` of `s`, sorted.
pub fn ball(n: usize, edges: &[Edge], s: usize, r: u64) -> Vec<usize> {
    bellman_ford(n, edges, s)
        .iter()
        .enumerate()
        .filter(|(_, d)| d.map_or(false, |d| d <= r))
        .map(|(v, _)| v)
        .collect()
}

/// Radius-`r` balls around each source, sorted. One adjacency build,
/// Dijkstra cut off at `r` per source.
pub fn balls(n: usize, edges: &[Edge], sources: &[usize], r: u64) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b, l) in edges {
        adj[a].push((b, l));
        adj[b].push((a, l));
    }
    let mut dist: Vec<Option<u64>> = vec![None; n];
    sources
        .iter()
        .map(|&s| {
            let mut seen = Vec::new();
            let mut pq = BinaryHeap::new();
            pq.push(Reverse((0u64, s)));
            while let Some(Reverse((d, v))) = pq.pop() {
                if dist[v].is_some() {
                    continue;
                }
                dist[v] = Some(d);
                seen.push(v);
                for &(w, l) in &adj[v] {
                    if dist[w].is_none() && d + l <= r {
                        pq.push(Reverse((d + l, w)));
                    }
                }
            }
            for &v in &seen {
                dist[v] = None;
            }
            seen.sort_unstable();
            seen
        })
        .collect()
}

pub fn components(n: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for &(a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    (0..n).map(|v| find(&mut parent, v)).collect()
}

/// Exact edge expansion `min |E(S, V-S)| / min(|S|, |V-S|)` as a fraction,
/// by enumerating every bipartition. `None` for graphs with fewer than 2 vertices.
pub fn expansion(n: usize, edges: &[(usize, usize)]) -> Result<Option<(u64, u64)>, OracleError> {
    sparsest(n, edges, |s, _| s.count_ones() as u64)
}

/// Exact conductance `min |E(S, V-S)| / min(vol S, vol V-S)`.
pub fn conductance(n: usize, edges: &[(usize, usize)]) -> Result<Option<(u64, u64)>, OracleError> {
    let mut deg = vec![0u64; n];
    for &(a, b) in edges {
        deg[a] += 1;
        deg[b] += 1;
    }
    sparsest(n, edges, move |s, _| {
        (0..n).filter(|v| s >> v & 1 == 1).map(|v| deg[v]).sum()
    })
}

fn sparsest(
    n: usize,
    edges: &[(usize, usize)],
    size: impl Fn(u32, usize) -> u64,
) -> Result<Option<(u64, u64)>, OracleError> {
    if n > 20 {
        return Err(OracleError::LimitExceeded(format!("expansion on {n} vertices")));
    }
    if n < 2 {
        return Ok(None);
    }
    let full: u32 = (1u32 << n) - 1;
    let mut best: Option<(u64, u64)> = None;
    // vertex n-1 always on the complement side: each cut is seen once
    for s in 1..(1u32 << (n - 1)) {
        let cut = edges
            .iter()
            .filter(|&&(a, b)| (s >> a & 1) != (s >> b & 1))
            .count() as u64;
        let den = size(s, n).min(size(full & !s, n));
        if den == 0 {
            continue;
        }
        if best.map_or(true, |(bn, bd)| (cut as u128) * (bd as u128) < (bn as u128) * (den as u128)) {
            best = Some((cut, den));
        }
    }
    Ok(best.or(Some((0, 1))))
}

/// Every simple path from `s` to `t` as a list of edge indices, at most `max_paths`.
pub fn simple_paths(
    n: usize,
    edges: &[(usize, usize)],
    s: usize,
    t: usize,
    max_paths: usize,
) -> Result<Vec<Vec<usize>>, OracleError> {
    let mut adj = vec![Vec::new(); n];
    for (i, &(a, b)) in edges.iter().enumerate() {
        adj[a].push((b, i));
        adj[b].push((a, i));
    }
    let mut out = Vec::new();
    let mut seen = vec![false; n];
    let mut stack = Vec::new();
    fn go(
        v: usize,
        t: usize,
        adj: &[Vec<(usize, usize)>],
        seen: &mut [bool],
        stack: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
        max: usize,
    ) -> bool {
        if v == t {
            out.push(stack.clone());
            return out.len() <= max;
        }
        seen[v] = true;
        for &(w, e) in &adj[v] {
            if !seen[w] {
                stack.push(e);
                if !go(w, t, adj, seen, stack, out, max) {
                    return false;
                }
                stack.pop();
            }
        }
        seen[v] = false;
        true
    }
    if s == t {
        return Ok(vec![vec![]]);
    }
    if !go(s, t, &adj, &mut seen, &mut stack, &mut out, max_paths) {
        return Err(OracleError::LimitExceeded(format!("more than {max_paths} paths")));
    }
    Ok(out)
}

/// Smallest number of edges whose removal separates every pair.
pub fn brute_multicut(
    n: usize,
    edges: &[(usize, usize)],
    pairs: &[(usize, usize)],
) -> Result<usize, OracleError> {
    let m = edges.len();
    if m > 20 {
        return Err(OracleError::LimitExceeded(format!("multicut over {m} edges")));
    }
    let mut best = m;
    for mask in 0u32..(1u32 << m) {
        let k = mask.count_ones() as usize;
        if k >= best {
            continue;
        }
        let kept: Vec<(usize, usize)> = (0..m)
            .filter(|i| mask >> i & 1 == 0)
            .map(|i| edges[i])
            .collect();
        let comp = components(n, &kept);
        if pairs.iter().all(|&(s, t)| comp[s] != comp[t]) {
            best = k;
        }
    }
    Ok(best)
}

pub fn to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}
