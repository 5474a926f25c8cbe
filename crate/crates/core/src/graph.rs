//! Dynamic bipartite graph with regular vertices and supernodes.
//!
//! Vertex ids are global: regular vertices come first, supernodes after,
//! and supernodes created by splits are appended.

use serde::{Deserialize, Serialize};
use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};
use thiserror::Error;

pub type VertexId = usize;
pub type EdgeId = usize;
pub const INF: u64 = u64::MAX;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("invalid update: {0}")]
    InvalidUpdate(String),
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("unknown edge {0}")]
    UnknownEdge(EdgeId),
    #[error("invalid edge: {0}")]
    InvalidEdge(String),
    #[error("dynamic degree bound {mu} exceeded at vertex {v}")]
    DegreeBound { v: VertexId, mu: u64 },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Kind {
    Regular,
    Super,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Edge {
    pub a: VertexId,
    pub b: VertexId,
    pub len: u64,
    pub copy_of: Option<EdgeId>,
    pub alive: bool,
}

impl Edge {
    pub fn other(&self, v: VertexId) -> VertexId {
        if self.a == v {
            self.b
        } else {
            self.a
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum UpdateOp {
    DeleteEdge(EdgeId),
    DeleteIsolatedVertex(VertexId),
    SupernodeSplit { u: VertexId, edges: Vec<EdgeId> },
}

impl UpdateOp {
    pub fn cost(&self) -> u64 {
        match self {
            UpdateOp::DeleteEdge(_) => 1,
            _ => 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Change {
    EdgeDeleted { e: EdgeId, a: VertexId, b: VertexId, len: u64 },
    VertexDeleted(VertexId),
    /// `copies` pairs each original edge with its copy at `new`.
    Split { from: VertexId, new: VertexId, copies: Vec<(EdgeId, EdgeId)> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UpdateReceipt {
    pub change: Change,
    pub cost: u64,
}

/// A walk given by its vertex sequence and the edges between consecutive vertices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Walk {
    pub vertices: Vec<VertexId>,
    pub edges: Vec<EdgeId>,
    pub len: u64,
}

impl Walk {
    pub fn single(v: VertexId) -> Self {
        Walk { vertices: vec![v], edges: vec![], len: 0 }
    }

    pub fn reversed(mut self) -> Self {
        self.vertices.reverse();
        self.edges.reverse();
        self
    }

    /// Appends `other`, which must start where `self` ends.
    pub fn join(mut self, other: Walk) -> Self {
        debug_assert_eq!(self.vertices.last(), other.vertices.first());
        self.vertices.extend_from_slice(&other.vertices[1..]);
        self.edges.extend(other.edges);
        self.len += other.len;
        self
    }

    pub fn first(&self) -> VertexId {
        self.vertices[0]
    }

    pub fn last(&self) -> VertexId {
        *self.vertices.last().unwrap()
    }
}

#[derive(Clone, Debug, Default)]
pub enum Weighting {
    /// Regular vertices weigh 1, supernodes 0.
    #[default]
    Unit,
    Custom(Vec<u64>),
}

#[derive(Clone, Debug)]
pub struct DynGraph {
    kind: Vec<Kind>,
    alive: Vec<bool>,
    adj: Vec<BTreeSet<EdgeId>>,
    by_len: Vec<BTreeSet<(u64, EdgeId)>>,
    edges: Vec<Edge>,
    d: u64,
    bipartite: bool,
    lifetime: Vec<u64>,
    mu: Option<u64>,
    n_regular0: usize,
    live_edges: usize,
    live_regular: usize,
    total_cost: u64,
}

impl DynGraph {
    /// Empty graph with distance threshold `d`. With `bipartite` set every
    /// edge must join a regular vertex to a supernode.
    pub fn new(d: u64, bipartite: bool) -> Self {
        DynGraph {
            kind: Vec::new(),
            alive: Vec::new(),
            adj: Vec::new(),
            by_len: Vec::new(),
            edges: Vec::new(),
            d,
            bipartite,
            lifetime: Vec::new(),
            mu: None,
            n_regular0: 0,
            live_edges: 0,
            live_regular: 0,
            total_cost: 0,
        }
    }

    /// `n_reg` regular vertices `0..n_reg`, then `n_super` supernodes.
    pub fn bipartite(
        n_reg: usize,
        n_super: usize,
        edges: &[(VertexId, VertexId, u64)],
        d: u64,
    ) -> Result<Self, GraphError> {
        let mut g = DynGraph::new(d, true);
        for _ in 0..n_reg {
            g.add_vertex(Kind::Regular);
        }
        for _ in 0..n_super {
            g.add_vertex(Kind::Super);
        }
        for &(a, b, l) in edges {
            g.add_edge(a, b, l)?;
        }
        Ok(g)
    }

    /// Non-bipartite graph on `n` regular vertices.
    pub fn general(n: usize, edges: &[(VertexId, VertexId, u64)], d: u64) -> Result<Self, GraphError> {
        let mut g = DynGraph::new(d, false);
        for _ in 0..n {
            g.add_vertex(Kind::Regular);
        }
        for &(a, b, l) in edges {
            g.add_edge(a, b, l)?;
        }
        Ok(g)
    }

    /// Bipartite graph obtained from a general graph by placing a new regular
    /// vertex on every edge; the original vertices become supernodes. Both
    /// halves keep the original length. Regular vertex `i` sits on edge `i`;
    /// original vertex `v` becomes vertex `m + v`.
    pub fn subdivide(n: usize, edges: &[(VertexId, VertexId, u64)], d: u64) -> Result<Self, GraphError> {
        let m = edges.len();
        let mut half = Vec::with_capacity(2 * m);
        for (i, &(a, b, l)) in edges.iter().enumerate() {
            half.push((i, m + a, l));
            half.push((i, m + b, l));
        }
        DynGraph::bipartite(m, n, &half, d)
    }

    pub fn add_vertex(&mut self, kind: Kind) -> VertexId {
        self.kind.push(kind);
        self.alive.push(true);
        self.adj.push(BTreeSet::new());
        self.by_len.push(BTreeSet::new());
        self.lifetime.push(0);
        if kind == Kind::Regular {
            self.live_regular += 1;
            self.n_regular0 += 1;
        }
        self.kind.len() - 1
    }

    /// Construction-time edge insertion.
    pub fn add_edge(&mut self, a: VertexId, b: VertexId, len: u64) -> Result<EdgeId, GraphError> {
        for v in [a, b] {
            if !self.has_vertex(v) {
                return Err(GraphError::UnknownVertex(v));
            }
        }
        if len == 0 || len > self.d {
            return Err(GraphError::InvalidEdge(format!("length {len} outside 1..={}", self.d)));
        }
        if a == b {
            return Err(GraphError::InvalidEdge(format!("self-loop at {a}")));
        }
        let (a, b) = if self.bipartite {
            match (self.kind[a], self.kind[b]) {
                (Kind::Regular, Kind::Super) => (a, b),
                (Kind::Super, Kind::Regular) => (b, a),
                _ => return Err(GraphError::InvalidEdge(format!("({a},{b}) is not regular-supernode"))),
            }
        } else {
            (a, b)
        };
        Ok(self.push_edge(a, b, len, None))
    }

    fn push_edge(&mut self, a: VertexId, b: VertexId, len: u64, copy_of: Option<EdgeId>) -> EdgeId {
        let id = self.edges.len();
        self.edges.push(Edge { a, b, len, copy_of, alive: true });
        self.adj[a].insert(id);
        self.adj[b].insert(id);
        self.by_len[a].insert((len, id));
        self.by_len[b].insert((len, id));
        self.lifetime[a] += 1;
        self.lifetime[b] += 1;
        self.live_edges += 1;
        id
    }

    /// Removes every isolated supernode, returning them. Used at load time.
    pub fn drop_isolated_supernodes(&mut self) -> Vec<VertexId> {
        let mut out = Vec::new();
        for v in 0..self.kind.len() {
            if self.alive[v] && self.kind[v] == Kind::Super && self.adj[v].is_empty() {
                self.alive[v] = false;
                out.push(v);
            }
        }
        out
    }

    /// Declare the dynamic degree bound. Fails if some vertex already exceeds it.
    pub fn set_mu(&mut self, mu: u64) -> Result<(), GraphError> {
        for v in 0..self.kind.len() {
            if self.kind[v] == Kind::Regular && self.lifetime[v] > mu {
                return Err(GraphError::DegreeBound { v, mu });
            }
        }
        self.mu = Some(mu);
        Ok(())
    }

    pub fn mu(&self) -> Option<u64> {
        self.mu
    }

    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn is_bipartite(&self) -> bool {
        self.bipartite
    }

    pub fn num_slots(&self) -> usize {
        self.kind.len()
    }

    pub fn num_edge_slots(&self) -> usize {
        self.edges.len()
    }

    pub fn num_live_edges(&self) -> usize {
        self.live_edges
    }

    pub fn num_live_regular(&self) -> usize {
        self.live_regular
    }

    /// Regular vertices ever created; they all exist from construction.
    pub fn initial_regular(&self) -> usize {
        self.n_regular0
    }

    pub fn total_cost(&self) -> u64 {
        self.total_cost
    }

    pub fn has_vertex(&self, v: VertexId) -> bool {
        v < self.alive.len() && self.alive[v]
    }

    pub fn kind(&self, v: VertexId) -> Kind {
        self.kind[v]
    }

    pub fn is_regular(&self, v: VertexId) -> bool {
        self.kind[v] == Kind::Regular
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e]
    }

    pub fn has_edge(&self, e: EdgeId) -> bool {
        e < self.edges.len() && self.edges[e].alive
    }

    pub fn incident(&self, v: VertexId) -> impl Iterator<Item = EdgeId> + '_ {
        self.adj[v].iter().copied()
    }

    /// Incident edges ordered by `(length, id)`, strictly after `after`.
    pub fn incident_by_len(
        &self,
        v: VertexId,
        after: Option<(u64, EdgeId)>,
    ) -> impl Iterator<Item = (u64, EdgeId)> + '_ {
        use std::ops::Bound::{Excluded, Unbounded};
        let lo = match after {
            Some(k) => Excluded(k),
            None => Unbounded,
        };
        self.by_len[v].range((lo, Unbounded)).copied()
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adj[v].len()
    }

    pub fn lifetime_degree(&self, v: VertexId) -> u64 {
        self.lifetime[v]
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.kind.len()).filter(move |&v| self.alive[v])
    }

    pub fn regular_vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertices().filter(move |&v| self.kind[v] == Kind::Regular)
    }

    pub fn edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        (0..self.edges.len()).filter(move |&e| self.edges[e].alive)
    }

    pub fn weight(&self, v: VertexId, w: &Weighting) -> u64 {
        match w {
            Weighting::Unit => u64::from(self.kind[v] == Kind::Regular),
            Weighting::Custom(ws) => ws.get(v).copied().unwrap_or(0),
        }
    }

    pub fn total_weight(&self, w: &Weighting) -> u64 {
        self.vertices().map(|v| self.weight(v, w)).sum()
    }

    pub fn check(&self, op: &UpdateOp) -> Result<(), GraphError> {
        match op {
            UpdateOp::DeleteEdge(e) => {
                if !self.has_edge(*e) {
                    return Err(GraphError::InvalidUpdate(format!("edge {e} is not present")));
                }
            }
            UpdateOp::DeleteIsolatedVertex(v) => {
                if !self.has_vertex(*v) {
                    return Err(GraphError::InvalidUpdate(format!("vertex {v} is not present")));
                }
                if !self.adj[*v].is_empty() {
                    return Err(GraphError::InvalidUpdate(format!("vertex {v} is not isolated")));
                }
            }
            UpdateOp::SupernodeSplit { u, edges } => {
                if !self.has_vertex(*u) || self.kind[*u] != Kind::Super {
                    return Err(GraphError::InvalidUpdate(format!("{u} is not a supernode")));
                }
                if edges.is_empty() {
                    return Err(GraphError::InvalidUpdate("empty split set".into()));
                }
                let set: BTreeSet<_> = edges.iter().collect();
                if set.len() != edges.len() {
                    return Err(GraphError::InvalidUpdate("repeated edge in split set".into()));
                }
                for e in edges {
                    if !self.adj[*u].contains(e) {
                        return Err(GraphError::InvalidUpdate(format!("edge {e} is not incident to {u}")));
                    }
                }
                if let Some(mu) = self.mu {
                    for e in edges {
                        let v = self.edges[*e].other(*u);
                        if self.lifetime[v] + 1 > mu {
                            return Err(GraphError::DegreeBound { v, mu });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn apply(&mut self, op: &UpdateOp) -> Result<UpdateReceipt, GraphError> {
        self.check(op)?;
        let change = match op {
            UpdateOp::DeleteEdge(e) => {
                let (a, b, len) = (self.edges[*e].a, self.edges[*e].b, self.edges[*e].len);
                self.edges[*e].alive = false;
                self.adj[a].remove(e);
                self.adj[b].remove(e);
                self.by_len[a].remove(&(len, *e));
                self.by_len[b].remove(&(len, *e));
                self.live_edges -= 1;
                Change::EdgeDeleted { e: *e, a, b, len }
            }
            UpdateOp::DeleteIsolatedVertex(v) => {
                self.alive[*v] = false;
                if self.kind[*v] == Kind::Regular {
                    self.live_regular -= 1;
                }
                Change::VertexDeleted(*v)
            }
            UpdateOp::SupernodeSplit { u, edges } => {
                let new = self.add_vertex(Kind::Super);
                let mut copies = Vec::with_capacity(edges.len());
                for &e in edges {
                    let (v, len) = (self.edges[e].other(*u), self.edges[e].len);
                    let c = if self.bipartite { self.push_edge(v, new, len, Some(e)) } else { self.push_edge(new, v, len, Some(e)) };
                    copies.push((e, c));
                }
                Change::Split { from: *u, new, copies }
            }
        };
        self.total_cost += op.cost();
        Ok(UpdateReceipt { change, cost: op.cost() })
    }

    /// Exact distances from `s` over live edges; `INF` when unreachable.
    pub fn dijkstra(&self, s: VertexId) -> Vec<u64> {
        self.dijkstra_bounded(s, INF)
    }

    /// Distances from `s`, explored only up to `r` (farther vertices get `INF`).
    pub fn dijkstra_bounded(&self, s: VertexId, r: u64) -> Vec<u64> {
        let mut dist = vec![INF; self.num_slots()];
        let mut pq = BinaryHeap::new();
        pq.push(Reverse((0u64, s)));
        while let Some(Reverse((d, v))) = pq.pop() {
            if dist[v] != INF {
                continue;
            }
            dist[v] = d;
            for &e in &self.adj[v] {
                let ed = &self.edges[e];
                let w = ed.other(v);
                let nd = d + ed.len;
                if dist[w] == INF && nd <= r {
                    pq.push(Reverse((nd, w)));
                }
            }
        }
        dist
    }

    pub fn dist(&self, a: VertexId, b: VertexId) -> u64 {
        self.dijkstra(a)[b]
    }

    /// `B(v, r)`: every vertex within distance `r` of `v`, ascending.
    pub fn ball(&self, v: VertexId, r: u64) -> Result<Vec<VertexId>, GraphError> {
        if !self.has_vertex(v) {
            return Err(GraphError::UnknownVertex(v));
        }
        let d = self.dijkstra_bounded(v, r);
        Ok((0..d.len()).filter(|&x| d[x] <= r).collect())
    }

    /// Live edges as `(a, b, len)` with their ids.
    pub fn edge_list(&self) -> Vec<(EdgeId, VertexId, VertexId, u64)> {
        self.edges().map(|e| (e, self.edges[e].a, self.edges[e].b, self.edges[e].len)).collect()
    }

    /// Whether the vertex sequence and edge sequence form a walk in the
    /// current graph, and its total length.
    pub fn walk_length(&self, vertices: &[VertexId], edges: &[EdgeId]) -> Option<u64> {
        if vertices.is_empty() || edges.len() + 1 != vertices.len() {
            return None;
        }
        if !self.has_vertex(vertices[0]) {
            return None;
        }
        let mut total = 0;
        for (i, &e) in edges.iter().enumerate() {
            if !self.has_edge(e) {
                return None;
            }
            let ed = &self.edges[e];
            let (x, y) = (vertices[i], vertices[i + 1]);
            if !((ed.a == x && ed.b == y) || (ed.a == y && ed.b == x)) {
                return None;
            }
            total += ed.len;
        }
        Some(total)
    }
}
