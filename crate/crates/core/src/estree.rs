//! Even-Shiloach trees: bounded-depth single-source shortest paths under
//! edge deletions, isolated-vertex deletions and supernode splits.

use crate::graph::{Change, DynGraph, EdgeId, VertexId, Walk, INF};
use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};
use thiserror::Error;

/// Read access to an undirected graph whose vertex slots never shrink.
pub trait Topology {
    fn slots(&self) -> usize;
    fn is_live(&self, v: VertexId) -> bool;
    /// Calls `f(neighbor, length, edge tag)` for every live edge at `v`.
    fn for_each_neighbor<F: FnMut(VertexId, u64, EdgeId)>(&self, v: VertexId, f: F);
}

impl Topology for DynGraph {
    fn slots(&self) -> usize {
        self.num_slots()
    }
    fn is_live(&self, v: VertexId) -> bool {
        self.has_vertex(v)
    }
    fn for_each_neighbor<F: FnMut(VertexId, u64, EdgeId)>(&self, v: VertexId, mut f: F) {
        for e in self.incident(v) {
            let ed = self.edge(e);
            f(ed.other(v), ed.len, e);
        }
    }
}

/// The subgraph of `g` induced by the vertices whose `mask` entry is set.
#[derive(Clone, Copy)]
pub struct Induced<'a> {
    pub g: &'a DynGraph,
    pub mask: &'a [bool],
}

impl Induced<'_> {
    fn inside(&self, v: VertexId) -> bool {
        v < self.mask.len() && self.mask[v]
    }
}

impl Topology for Induced<'_> {
    fn slots(&self) -> usize {
        self.g.num_slots()
    }
    fn is_live(&self, v: VertexId) -> bool {
        self.inside(v) && self.g.has_vertex(v)
    }
    fn for_each_neighbor<F: FnMut(VertexId, u64, EdgeId)>(&self, v: VertexId, mut f: F) {
        if !self.inside(v) {
            return;
        }
        for e in self.g.incident(v) {
            let ed = self.g.edge(e);
            let w = ed.other(v);
            if self.inside(w) {
                f(w, ed.len, e);
            }
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EsError {
    #[error("edge {edge} of length {len} exceeds depth bound {depth}")]
    DepthBoundViolated { edge: EdgeId, len: u64, depth: u64 },
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SsspAnswer {
    BeyondDepth,
    Path(Walk),
}

/// A removed edge as seen by the tree: endpoints, length, tag.
pub type RemovedEdge = (VertexId, VertexId, u64, EdgeId);

type Entry = (u64, VertexId, EdgeId);

/// Labels and parent pointers only; supports and parents are found by
/// scanning neighbours, always taking the smallest `(key, vertex, edge)`.
#[derive(Clone, Debug)]
pub struct EsTree {
    root: VertexId,
    depth: u64,
    lam: Vec<u64>,
    parent: Vec<Option<(VertexId, EdgeId)>>,
    increments: Vec<u64>,
    total_increment: u64,
    departed: Vec<VertexId>,
    root_alive: bool,
    // scratch for `repair`, all clear between calls
    raised: Vec<bool>,
    tent: Vec<u64>,
}

/// Smallest `(lam[w] + len, w, e)` over in-tree neighbours `w` of `v`
/// passing `keep`.
fn best_entry<T: Topology>(topo: &T, lam: &[u64], v: VertexId, keep: impl Fn(VertexId) -> bool) -> Option<Entry> {
    let mut best: Option<Entry> = None;
    topo.for_each_neighbor(v, |w, len, e| {
        if lam[w] != INF && keep(w) {
            let cand = (lam[w] + len, w, e);
            if best.map_or(true, |b| cand < b) {
                best = Some(cand);
            }
        }
    });
    best
}

impl EsTree {
    pub fn build<T: Topology>(topo: &T, root: VertexId, depth: u64) -> Result<Self, EsError> {
        if !topo.is_live(root) {
            return Err(EsError::UnknownVertex(root));
        }
        let n = topo.slots();
        let mut viol = None;
        for v in 0..n {
            if topo.is_live(v) {
                topo.for_each_neighbor(v, |_, len, e| {
                    if len > depth && viol.is_none() {
                        viol = Some(EsError::DepthBoundViolated { edge: e, len, depth });
                    }
                });
            }
        }
        if let Some(err) = viol {
            return Err(err);
        }
        let mut t = EsTree {
            root,
            depth,
            lam: vec![INF; n],
            parent: vec![None; n],
            increments: vec![0; n],
            total_increment: 0,
            departed: Vec::new(),
            root_alive: true,
            raised: vec![false; n],
            tent: vec![INF; n],
        };
        let mut order = Vec::new();
        let mut pq = BinaryHeap::new();
        pq.push(Reverse((0u64, root)));
        while let Some(Reverse((d, v))) = pq.pop() {
            if t.lam[v] != INF {
                continue;
            }
            t.lam[v] = d;
            order.push(v);
            let lam = &t.lam;
            topo.for_each_neighbor(v, |w, len, _| {
                if lam[w] == INF && d + len <= depth {
                    pq.push(Reverse((d + len, w)));
                }
            });
        }
        for v in order {
            if v != root {
                let (k, p, e) = best_entry(topo, &t.lam, v, |_| true).expect("reached vertex has a predecessor");
                debug_assert_eq!(k, t.lam[v]);
                t.parent[v] = Some((p, e));
            }
        }
        Ok(t)
    }

    pub fn root(&self) -> VertexId {
        self.root
    }

    pub fn depth(&self) -> u64 {
        self.depth
    }

    pub fn root_alive(&self) -> bool {
        self.root_alive
    }

    /// Current label: the exact distance when at most the depth bound, else `INF`.
    pub fn dist(&self, v: VertexId) -> u64 {
        self.lam.get(v).copied().unwrap_or(INF)
    }

    pub fn in_tree(&self, v: VertexId) -> bool {
        self.dist(v) != INF
    }

    pub fn parent(&self, v: VertexId) -> Option<(VertexId, EdgeId)> {
        self.parent.get(v).copied().flatten()
    }

    pub fn increments(&self, v: VertexId) -> u64 {
        self.increments.get(v).copied().unwrap_or(0)
    }

    pub fn total_increment(&self) -> u64 {
        self.total_increment
    }

    /// Vertices that left the tree since the last call, in departure order.
    pub fn drain_departed(&mut self) -> Vec<VertexId> {
        std::mem::take(&mut self.departed)
    }

    /// Live vertices of `topo` outside the tree.
    pub fn out_of_tree<T: Topology>(&self, topo: &T) -> Vec<VertexId> {
        (0..topo.slots()).filter(|&v| topo.is_live(v) && !self.in_tree(v)).collect()
    }

    pub fn query(&self, x: VertexId) -> SsspAnswer {
        match self.path(x) {
            Some(p) => SsspAnswer::Path(p),
            None => SsspAnswer::BeyondDepth,
        }
    }

    /// Tree path from the root to `x`.
    pub fn path(&self, x: VertexId) -> Option<Walk> {
        let len = self.dist(x);
        if len == INF {
            return None;
        }
        let mut vertices = vec![x];
        let mut edges = Vec::new();
        let mut v = x;
        while let Some((p, e)) = self.parent[v] {
            vertices.push(p);
            edges.push(e);
            v = p;
        }
        vertices.reverse();
        edges.reverse();
        Some(Walk { vertices, edges, len })
    }

    fn grow(&mut self, n: usize) {
        if self.lam.len() < n {
            self.lam.resize(n, INF);
            self.parent.resize(n, None);
            self.increments.resize(n, 0);
            self.raised.resize(n, false);
            self.tent.resize(n, INF);
        }
    }

    pub fn on_update<T: Topology>(&mut self, topo: &T, change: &Change) {
        match change {
            Change::EdgeDeleted { e, a, b, len } => self.delete_edges(topo, &[(*a, *b, *len, *e)]),
            Change::VertexDeleted(v) => self.delete_vertex(*v),
            Change::Split { new, .. } => self.split(topo, *new),
        }
    }

    /// Process a batch of edges already gone from `topo`.
    pub fn delete_edges<T: Topology>(&mut self, topo: &T, removed: &[RemovedEdge]) {
        self.grow(topo.slots());
        let mut cand = BTreeSet::new();
        for &(a, b, _, tag) in removed {
            for (x, y) in [(a, b), (b, a)] {
                if x >= self.lam.len() || y >= self.lam.len() {
                    continue;
                }
                if self.parent[y] == Some((x, tag)) {
                    self.parent[y] = None;
                    cand.insert((self.lam[y], y));
                }
            }
        }
        if !cand.is_empty() {
            self.repair(topo, cand);
        }
    }

    fn repair<T: Topology>(&mut self, topo: &T, mut cand: BTreeSet<(u64, VertexId)>) {
        // vertices whose distance strictly increases, in discovery order
        let mut r: Vec<VertexId> = Vec::new();
        while let Some((l, z)) = cand.pop_first() {
            if self.raised[z] {
                continue;
            }
            let raised = &self.raised;
            let support = best_entry(topo, &self.lam, z, |w| !raised[w]).filter(|&(k, _, _)| k == l);
            if let Some((_, w, e)) = support {
                self.parent[z] = Some((w, e));
                continue;
            }
            self.raised[z] = true;
            r.push(z);
            let parent = &self.parent;
            let lam = &self.lam;
            topo.for_each_neighbor(z, |c, _, e| {
                if parent[c] == Some((z, e)) {
                    cand.insert((lam[c], c));
                }
            });
        }
        if r.is_empty() {
            return;
        }
        r.sort_unstable();
        let old: Vec<u64> = r.iter().map(|&z| self.lam[z]).collect();
        for &z in &r {
            self.lam[z] = INF;
            self.parent[z] = None;
        }
        let mut pq = BinaryHeap::new();
        for &z in &r {
            if let Some((k, _, _)) = best_entry(topo, &self.lam, z, |_| true) {
                self.tent[z] = k;
                pq.push(Reverse((k, z)));
            }
        }
        while let Some(Reverse((d, z))) = pq.pop() {
            if d > self.depth {
                break;
            }
            if self.lam[z] != INF || self.tent[z] != d {
                continue;
            }
            self.lam[z] = d;
            let (k, p, e) = best_entry(topo, &self.lam, z, |_| true).expect("settled vertex has a predecessor");
            debug_assert_eq!(k, d);
            self.parent[z] = Some((p, e));
            let (lam, raised, tent) = (&self.lam, &self.raised, &mut self.tent);
            topo.for_each_neighbor(z, |x, len, _| {
                if raised[x] && lam[x] == INF {
                    let nd = d + len;
                    if nd < tent[x] {
                        tent[x] = nd;
                        pq.push(Reverse((nd, x)));
                    }
                }
            });
        }
        for (&z, &o) in r.iter().zip(&old) {
            self.raised[z] = false;
            self.tent[z] = INF;
            let new = self.lam[z];
            let inc = if new == INF {
                self.departed.push(z);
                self.depth + 1 - o
            } else {
                debug_assert!(new >= o);
                new - o
            };
            self.increments[z] += inc;
            self.total_increment += inc;
        }
    }

    /// `v` must already be isolated in the topology.
    pub fn delete_vertex(&mut self, v: VertexId) {
        if v >= self.lam.len() {
            return;
        }
        if v == self.root {
            self.root_alive = false;
            for x in 0..self.lam.len() {
                if self.lam[x] != INF {
                    if x != v {
                        self.departed.push(x);
                    }
                    self.lam[x] = INF;
                }
                self.parent[x] = None;
            }
            return;
        }
        self.lam[v] = INF;
        self.parent[v] = None;
    }

    /// A new vertex `new` appeared as a copy of part of an existing supernode.
    /// Its distance is fixed by its neighbours and no other label changes.
    pub fn split<T: Topology>(&mut self, topo: &T, new: VertexId) {
        self.grow(topo.slots());
        if !topo.is_live(new) || !self.root_alive {
            return;
        }
        let Some((k, p, e)) = best_entry(topo, &self.lam, new, |_| true) else { return };
        if k > self.depth {
            return;
        }
        self.lam[new] = k;
        self.parent[new] = Some((p, e));
    }

    /// Checks labels against the neighbour minimum and every parent link.
    pub fn audit<T: Topology>(&self, topo: &T) -> Result<(), String> {
        for x in 0..topo.slots().min(self.lam.len()) {
            if !topo.is_live(x) {
                continue;
            }
            let want = if x == self.root && self.root_alive {
                0
            } else {
                best_entry(topo, &self.lam, x, |_| true).map_or(INF, |b| b.0)
            };
            let want = if want > self.depth { INF } else { want };
            if self.lam[x] != want {
                return Err(format!("label of {x} is {} but neighbours give {want}", self.lam[x]));
            }
            if self.lam[x] != INF && x != self.root {
                let Some((p, e)) = self.parent[x] else {
                    return Err(format!("{x} in tree without parent"));
                };
                let mut ok = false;
                topo.for_each_neighbor(x, |y, len, tag| {
                    if y == p && tag == e && self.lam[p] != INF && self.lam[p] + len == self.lam[x] {
                        ok = true;
                    }
                });
                if !ok {
                    return Err(format!("parent link of {x} is not tight"));
                }
            }
        }
        Ok(())
    }
}
