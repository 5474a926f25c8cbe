//! Adapters from `dyncover` types to the reference oracles.

use dyncover::expander::Multigraph;
use dyncover::{DynGraph, EdgeId, VertexId, Walk};
use nalgebra::{DMatrix, SymmetricEigen};

pub fn edge_list(g: &DynGraph) -> Vec<(usize, usize, u64)> {
    g.edge_list().into_iter().map(|(_, a, b, l)| (a, b, l)).collect()
}

pub fn dist_from(g: &DynGraph, s: VertexId) -> Vec<Option<u64>> {
    dyncover_oracle::dijkstra(g.num_slots(), &edge_list(g), s)
}

/// Checks that `w` is a walk of live edges of `g` from `x` to `y` with the
/// stated length.
pub fn check_walk(g: &DynGraph, w: &Walk, x: VertexId, y: VertexId) -> Result<(), String> {
    if w.vertices.first() != Some(&x) || w.vertices.last() != Some(&y) {
        return Err(format!("walk ends {:?}..{:?}, want {x}..{y}", w.vertices.first(), w.vertices.last()));
    }
    match g.walk_length(&w.vertices, &w.edges) {
        Some(l) if l == w.len => Ok(()),
        Some(l) => Err(format!("walk length {l} but reported {}", w.len)),
        None => Err(format!("not a walk of live edges: {:?}", w.edges)),
    }
}

/// Same as [`check_walk`] for a general edge list with liveness flags.
pub fn check_general_walk(edges: &[(usize, usize, u64)], alive: &[bool], w: &Walk, x: usize, y: usize) -> Result<(), String> {
    if w.vertices.first() != Some(&x) || w.vertices.last() != Some(&y) || w.vertices.len() != w.edges.len() + 1 {
        return Err(format!("walk shape wrong for {x}..{y}"));
    }
    let mut len = 0;
    for (i, &e) in w.edges.iter().enumerate() {
        if e >= edges.len() || !alive[e] {
            return Err(format!("walk uses dead edge {e}"));
        }
        let (a, b, l) = edges[e];
        let (u, v) = (w.vertices[i], w.vertices[i + 1]);
        if (a, b) != (u, v) && (a, b) != (v, u) {
            return Err(format!("edge {e} does not join {u} and {v}"));
        }
        len += l;
    }
    if len != w.len {
        return Err(format!("walk length {len} but reported {}", w.len));
    }
    Ok(())
}

/// Checks an edge sequence from `x` in a multigraph and returns its end.
pub fn multigraph_walk_end(g: &Multigraph, x: usize, edges: &[EdgeId]) -> Result<usize, String> {
    let mut v = x;
    for &e in edges {
        if e >= g.num_edge_slots() || !g.is_alive(e) {
            return Err(format!("dead edge {e}"));
        }
        let (a, b) = g.endpoints(e);
        v = if a == v {
            b
        } else if b == v {
            a
        } else {
            return Err(format!("edge {e} not incident to {v}"));
        };
    }
    Ok(v)
}

/// Live edges of `g` restricted to `keep`, reindexed to `0..keep.len()`.
pub fn restrict(g: &Multigraph, keep: &[usize]) -> Vec<(usize, usize)> {
    let mut pos = vec![usize::MAX; g.n()];
    for (i, &v) in keep.iter().enumerate() {
        pos[v] = i;
    }
    g.live_edges()
        .map(|e| g.endpoints(e))
        .filter(|&(a, b)| pos[a] != usize::MAX && pos[b] != usize::MAX)
        .map(|(a, b)| (pos[a], pos[b]))
        .collect()
}

/// Exact edge expansion by enumeration, `None` when too large or trivial.
pub fn brute_expansion(n: usize, edges: &[(usize, usize)]) -> Option<f64> {
    match dyncover_oracle::expansion(n, edges) {
        Ok(Some((c, s))) => Some(c as f64 / s as f64),
        _ => None,
    }
}

/// `lambda_2(L) / 2`, a lower bound on edge expansion.
pub fn spectral_expansion_bound(n: usize, edges: &[(usize, usize)]) -> f64 {
    if n < 2 {
        return 0.0;
    }
    let mut l = DMatrix::<f64>::zeros(n, n);
    for &(a, b) in edges {
        l[(a, a)] += 1.0;
        l[(b, b)] += 1.0;
        l[(a, b)] -= 1.0;
        l[(b, a)] -= 1.0;
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(l).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    // margin for floating-point error in the eigensolver
    (ev[1] / 2.0 - 1e-9).max(0.0)
}
