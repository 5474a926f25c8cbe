//! Expander toolkit: certificates, the cut-matching game, expander pruning
//! and embeddings of small expanders into large ones.

pub mod hierarchy;

use crate::estree::EsTree;
use crate::graph::{DynGraph, EdgeId, Kind, UpdateOp, VertexId, Walk};
use serde::Serialize;
use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExpanderError {
    #[error("deletion stream of length {len} exceeds the pruning limit {limit}")]
    StreamTooLong { len: usize, limit: usize },
    #[error("vertex {0} has been pruned")]
    QueryOnPrunedVertex(usize),
    #[error("the expander session has used up its update budget")]
    BudgetExhausted,
    #[error("no path between {0} and {1}")]
    NoPath(usize, usize),
}

/// Unweighted multigraph on `0..n` with edge deletions.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Multigraph {
    n: usize,
    edges: Vec<(usize, usize)>,
    alive: Vec<bool>,
    #[serde(skip)]
    adj: Vec<Vec<usize>>,
}

impl Multigraph {
    pub fn new(n: usize) -> Self {
        Multigraph { n, edges: Vec::new(), alive: Vec::new(), adj: vec![Vec::new(); n] }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut g = Multigraph::new(n);
        for &(a, b) in edges {
            g.add_edge(a, b);
        }
        g
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn add_edge(&mut self, a: usize, b: usize) -> usize {
        let id = self.edges.len();
        self.edges.push((a, b));
        self.alive.push(true);
        self.adj[a].push(id);
        if b != a {
            self.adj[b].push(id);
        }
        id
    }

    pub fn delete_edge(&mut self, e: usize) -> bool {
        std::mem::replace(&mut self.alive[e], false)
    }

    pub fn is_alive(&self, e: usize) -> bool {
        self.alive[e]
    }

    pub fn endpoints(&self, e: usize) -> (usize, usize) {
        self.edges[e]
    }

    pub fn num_edge_slots(&self) -> usize {
        self.edges.len()
    }

    pub fn live_edges(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.edges.len()).filter(|&e| self.alive[e])
    }

    pub fn num_live_edges(&self) -> usize {
        self.alive.iter().filter(|&&a| a).count()
    }

    pub fn incident(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[v].iter().copied().filter(|&e| self.alive[e])
    }

    pub fn degree(&self, v: usize) -> usize {
        self.incident(v).count()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    pub fn other(&self, e: usize, v: usize) -> usize {
        let (a, b) = self.edges[e];
        if a == v {
            b
        } else {
            a
        }
    }

    /// Live edges with one endpoint in `side` and the other in `active` minus `side`.
    pub fn cut_size(&self, side: &[bool], active: &[bool]) -> usize {
        self.live_edges()
            .filter(|&e| {
                let (a, b) = self.edges[e];
                active[a] && active[b] && side[a] != side[b]
            })
            .count()
    }

    /// Fewest-edge path from `x` to `y` inside `active`, as edge ids.
    pub fn bfs_path(&self, x: usize, y: usize, active: &[bool]) -> Option<Vec<usize>> {
        if !active[x] || !active[y] {
            return None;
        }
        let mut prev: Vec<Option<usize>> = vec![None; self.n];
        let mut seen = vec![false; self.n];
        seen[x] = true;
        let mut q = VecDeque::from([x]);
        while let Some(v) = q.pop_front() {
            if v == y {
                break;
            }
            for e in self.incident(v) {
                let w = self.other(e, v);
                if active[w] && !seen[w] {
                    seen[w] = true;
                    prev[w] = Some(e);
                    q.push_back(w);
                }
            }
        }
        if !seen[y] {
            return None;
        }
        let mut path = Vec::new();
        let mut v = y;
        while v != x {
            let e = prev[v].unwrap();
            path.push(e);
            v = self.other(e, v);
        }
        path.reverse();
        Some(path)
    }

    /// Largest fewest-edge distance among active vertices, or `None` if
    /// the active part is disconnected.
    pub fn hop_diameter(&self, active: &[bool]) -> Option<usize> {
        let mut best = 0;
        for s in (0..self.n).filter(|&v| active[v]) {
            let mut dist = vec![usize::MAX; self.n];
            dist[s] = 0;
            let mut q = VecDeque::from([s]);
            while let Some(v) = q.pop_front() {
                for e in self.incident(v) {
                    let w = self.other(e, v);
                    if active[w] && dist[w] == usize::MAX {
                        dist[w] = dist[v] + 1;
                        q.push_back(w);
                    }
                }
            }
            for v in (0..self.n).filter(|&v| active[v]) {
                if dist[v] == usize::MAX {
                    return None;
                }
                best = best.max(dist[v]);
            }
        }
        Some(best)
    }
}

/// A sparsity value `cut / size`, compared exactly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Ratio {
    pub cut: u64,
    pub size: u64,
}

impl Ratio {
    pub fn value(&self) -> f64 {
        self.cut as f64 / self.size as f64
    }

    pub fn less_than(&self, phi: f64) -> bool {
        (self.cut as f64) < phi * self.size as f64
    }
}

impl PartialOrd for Ratio {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ratio {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.cut as u128 * other.size as u128).cmp(&(other.cut as u128 * self.size as u128))
    }
}

/// A cut of the active vertex set: `side` is the smaller part.
#[derive(Clone, Debug, Serialize)]
pub struct SparseCut {
    pub side: Vec<usize>,
    pub ratio: Ratio,
}

/// Largest active-vertex count for which cuts are enumerated exhaustively.
pub const BRUTE_LIMIT: usize = 16;

fn active_list(active: &[bool]) -> Vec<usize> {
    (0..active.len()).filter(|&v| active[v]).collect()
}

/// Exhaustive minimum over bipartitions of `|E(A,B)| / min(|A|,|B|)`,
/// restricted to cuts whose smaller side has at least `min_side` vertices.
pub fn brute_sparsest(g: &Multigraph, active: &[bool], min_side: usize) -> Option<SparseCut> {
    let vs = active_list(active);
    let k = vs.len();
    assert!(k <= 24, "exhaustive cut search on {k} vertices");
    if k < 2 {
        return None;
    }
    let mut pos = vec![usize::MAX; g.n()];
    for (i, &v) in vs.iter().enumerate() {
        pos[v] = i;
    }
    let edges: Vec<(usize, usize)> = g
        .live_edges()
        .map(|e| g.endpoints(e))
        .filter(|&(a, b)| active[a] && active[b] && a != b)
        .map(|(a, b)| (pos[a], pos[b]))
        .collect();
    let mut best: Option<(Ratio, u32)> = None;
    // the last vertex always stays outside the mask
    for mask in 1u32..(1u32 << (k - 1)) {
        let s = mask.count_ones() as usize;
        let small = s.min(k - s);
        if small < min_side.max(1) {
            continue;
        }
        let cut = edges.iter().filter(|&&(a, b)| ((mask >> a) & 1) != ((mask >> b) & 1)).count() as u64;
        let r = Ratio { cut, size: small as u64 };
        if best.map_or(true, |(b, _)| r < b) {
            best = Some((r, mask));
        }
    }
    best.map(|(ratio, mask)| {
        let inside: Vec<usize> = (0..k).filter(|&i| (mask >> i) & 1 == 1).map(|i| vs[i]).collect();
        let side = if 2 * inside.len() <= k {
            inside
        } else {
            (0..k).filter(|&i| (mask >> i) & 1 == 0).map(|i| vs[i]).collect()
        };
        SparseCut { side, ratio }
    })
}

/// Approximate Fiedler ordering by deterministic power iteration on the
/// lazy random walk, then the best prefix cut with smaller side at least
/// `min_side`.
pub fn sweep_sparsest(g: &Multigraph, active: &[bool], min_side: usize) -> Option<SparseCut> {
    let vs = active_list(active);
    let k = vs.len();
    if k < 2 {
        return None;
    }
    let deg: Vec<f64> = (0..g.n())
        .map(|v| if active[v] { g.incident(v).filter(|&e| active[g.other(e, v)]).count() as f64 } else { 0.0 })
        .collect();
    let total: f64 = deg.iter().sum();
    let mut x: Vec<f64> = (0..g.n())
        .map(|v| ((v as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) >> 11) as f64 / (1u64 << 53) as f64 - 0.5)
        .collect();
    for _ in 0..400 {
        let mut y = vec![0.0; g.n()];
        for &v in &vs {
            if deg[v] == 0.0 {
                y[v] = x[v];
                continue;
            }
            let mut s = 0.0;
            for e in g.incident(v) {
                let w = g.other(e, v);
                if active[w] {
                    s += x[w];
                }
            }
            y[v] = 0.5 * x[v] + 0.5 * s / deg[v];
        }
        if total > 0.0 {
            let mean: f64 = vs.iter().map(|&v| deg[v] * y[v]).sum::<f64>() / total;
            for &v in &vs {
                y[v] -= mean;
            }
        }
        let norm = vs.iter().map(|&v| y[v] * y[v]).sum::<f64>().sqrt();
        if norm > 0.0 {
            for &v in &vs {
                y[v] /= norm;
            }
        }
        x = y;
    }
    let mut order = vs.clone();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(a.cmp(&b)));
    let mut side = vec![false; g.n()];
    let mut cut: i64 = 0;
    let mut best: Option<(Ratio, usize)> = None;
    for (i, &v) in order.iter().enumerate().take(k - 1) {
        side[v] = true;
        for e in g.incident(v) {
            let w = g.other(e, v);
            if w == v || !active[w] {
                continue;
            }
            cut += if side[w] { -1 } else { 1 };
        }
        let s = i + 1;
        let small = s.min(k - s);
        if small < min_side.max(1) {
            continue;
        }
        let r = Ratio { cut: cut as u64, size: small as u64 };
        if best.map_or(true, |(b, _)| r < b) {
            best = Some((r, s));
        }
    }
    best.map(|(ratio, s)| {
        let side = if 2 * s <= k { order[..s].to_vec() } else { order[s..].to_vec() };
        SparseCut { side, ratio }
    })
}

/// Exhaustive when small, sweep otherwise.
pub fn sparsest(g: &Multigraph, active: &[bool], min_side: usize, brute_limit: usize) -> (Option<SparseCut>, bool) {
    let k = active.iter().filter(|&&a| a).count();
    if k <= brute_limit {
        (brute_sparsest(g, active, min_side), true)
    } else {
        (sweep_sparsest(g, active, min_side), false)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Certificate {
    /// Exact expansion by enumerating every bipartition.
    BruteForce { cut: u64, size: u64 },
    /// Sweep estimate; an upper bound on the expansion, not a proof.
    ByConstruction { phi: f64, provenance: String },
}

impl Certificate {
    pub fn phi(&self) -> f64 {
        match self {
            Certificate::BruteForce { cut, size } => *cut as f64 / *size as f64,
            Certificate::ByConstruction { phi, .. } => *phi,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Certificate::BruteForce { .. })
    }
}

/// Expansion certificate for the active part of `g`. A single vertex gets
/// expansion 1 by convention.
pub fn certify(g: &Multigraph, active: &[bool]) -> Certificate {
    match sparsest(g, active, 1, BRUTE_LIMIT) {
        (Some(c), true) => Certificate::BruteForce { cut: c.ratio.cut, size: c.ratio.size },
        (None, true) => Certificate::BruteForce { cut: 1, size: 1 },
        (c, false) => Certificate::ByConstruction {
            phi: c.map_or(1.0, |c| c.ratio.value()),
            provenance: "spectral sweep".into(),
        },
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Expander {
    pub graph: Multigraph,
    pub cert: Certificate,
    pub max_degree: usize,
}

impl Expander {
    pub fn new(graph: Multigraph) -> Self {
        let active = vec![true; graph.n()];
        let cert = certify(&graph, &active);
        let max_degree = graph.max_degree();
        Expander { graph, cert, max_degree }
    }
}

/// Hop bound for shortest paths in a `phi`-expander: `ceil(8 delta log2 n / phi)`.
pub fn shortest_expander_path_bound(n: usize, delta: usize, phi: f64) -> u64 {
    (8.0 * delta as f64 * (n.max(1) as f64).log2() / phi).ceil() as u64
}

/// Circulant graph: `i` is joined to `i + j mod n` for every jump `j`.
pub fn circulant(n: usize, jumps: &[usize]) -> Multigraph {
    let mut g = Multigraph::new(n);
    let mut seen = BTreeSet::new();
    for i in 0..n {
        for &j in jumps {
            let k = (i + j) % n;
            let key = (i.min(k), i.max(k));
            if i != k && seen.insert(key) {
                g.add_edge(key.0, key.1);
            }
        }
    }
    g
}

// ---------------------------------------------------------------------------
// Cut player

#[derive(Clone, Debug, Serialize)]
pub enum CutPlayerOutcome {
    BalancedSparseCut { a: Vec<usize>, b: Vec<usize>, cut: u64 },
    ExpanderCore { core: Vec<usize>, cert: Certificate },
}

/// Looks for a balanced cut (both sides at least a quarter) sparser than
/// `phi`; otherwise peels sparse unbalanced pieces and certifies what remains.
pub fn cut_player(x: &Multigraph, active: &[bool], phi: f64) -> CutPlayerOutcome {
    let vs = active_list(active);
    let k = vs.len();
    if k >= 2 {
        let (c, _) = sparsest(x, active, k.div_ceil(4), BRUTE_LIMIT);
        if let Some(c) = c.filter(|c| c.ratio.less_than(phi)) {
            let mut side = vec![false; x.n()];
            for &v in &c.side {
                side[v] = true;
            }
            let b: Vec<usize> = vs.iter().copied().filter(|&v| !side[v]).collect();
            return CutPlayerOutcome::BalancedSparseCut { a: c.side, b, cut: c.ratio.cut };
        }
    }
    let mut core = active.to_vec();
    loop {
        let left = core.iter().filter(|&&a| a).count();
        let (c, _) = sparsest(x, &core, 1, BRUTE_LIMIT);
        match c {
            Some(c) if c.ratio.less_than(phi) && 2 * (left - c.side.len()) >= k => {
                for v in c.side {
                    core[v] = false;
                }
            }
            _ => break,
        }
    }
    let cert = certify(x, &core);
    CutPlayerOutcome::ExpanderCore { core: active_list(&core), cert }
}

// ---------------------------------------------------------------------------
// Matching player

/// A path routed between two terminals, as host edges and vertices.
#[derive(Clone, Debug, Serialize)]
pub struct Routed {
    pub a: VertexId,
    pub b: VertexId,
    pub walk: Walk,
}

#[derive(Clone, Debug, Serialize)]
pub enum RoundOutcome {
    Paths(Vec<Routed>),
    Cut { removed: Vec<EdgeId>, a: Vec<VertexId>, b: Vec<VertexId>, routed: Vec<Routed> },
}

/// Copy of the live part of `host` as a general graph with a source and a
/// sink appended. Returns the graph, the source, the sink and the map from
/// copied edges back to host edges.
fn augmented(host: &DynGraph) -> (DynGraph, VertexId, VertexId, Vec<Option<EdgeId>>) {
    let mut aug = DynGraph::new(u64::MAX / 8, false);
    for _ in 0..host.num_slots() {
        aug.add_vertex(Kind::Regular);
    }
    let mut back = Vec::new();
    for (e, a, b, len) in host.edge_list() {
        aug.add_edge(a, b, len).unwrap();
        back.push(Some(e));
    }
    let s = aug.add_vertex(Kind::Regular);
    let t = aug.add_vertex(Kind::Regular);
    (aug, s, t, back)
}

/// One matching round: route disjoint-endpoint paths of length at most
/// `d_prime` from `a` to `b`, removing host edges once they carry
/// `eta_prime` paths.
pub fn matching_round(host: &DynGraph, a: &[VertexId], b: &[VertexId], d_prime: u64, eta_prime: u64) -> RoundOutcome {
    let (mut aug, s, t, mut back) = augmented(host);
    let mut src = BTreeMap::new();
    let mut snk = BTreeMap::new();
    for &v in a {
        src.insert(aug.add_edge(s, v, 1).unwrap(), v);
        back.push(None);
    }
    for &v in b {
        snk.insert(aug.add_edge(v, t, 1).unwrap(), v);
        back.push(None);
    }
    let mut tree = EsTree::build(&aug, s, d_prime + 2).expect("lengths fit the depth");
    let mut usage: BTreeMap<EdgeId, u64> = BTreeMap::new();
    let mut removed = Vec::new();
    let mut routed = Vec::new();
    let mut matched_a = BTreeSet::new();
    let mut matched_b = BTreeSet::new();
    while let Some(p) = tree.path(t) {
        let first = p.edges[0];
        let last = *p.edges.last().unwrap();
        let (ra, rb) = (src[&first], snk[&last]);
        let inner_v = p.vertices[1..p.vertices.len() - 1].to_vec();
        let inner_e: Vec<EdgeId> = p.edges[1..p.edges.len() - 1].iter().map(|&e| back[e].unwrap()).collect();
        let len = p.len - 2;
        routed.push(Routed { a: ra, b: rb, walk: Walk { vertices: inner_v, edges: inner_e, len } });
        matched_a.insert(ra);
        matched_b.insert(rb);
        let mut kill = vec![first, last];
        for &e in &p.edges[1..p.edges.len() - 1] {
            let u = usage.entry(e).or_default();
            *u += 1;
            if *u >= eta_prime {
                kill.push(e);
                removed.push(back[e].unwrap());
            }
        }
        for e in kill {
            let rc = aug.apply(&UpdateOp::DeleteEdge(e)).unwrap();
            tree.on_update(&aug, &rc.change);
        }
    }
    if 2 * routed.len() >= a.len() {
        RoundOutcome::Paths(routed)
    } else {
        removed.sort();
        RoundOutcome::Cut {
            removed,
            a: a.iter().copied().filter(|v| !matched_a.contains(v)).collect(),
            b: b.iter().copied().filter(|v| !matched_b.contains(v)).collect(),
            routed,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Routing {
    pub paths: Vec<Routed>,
    /// Present when a round could not route half of the remaining terminals.
    pub cut: Option<RoundCut>,
    pub rounds: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct RoundCut {
    pub removed: Vec<EdgeId>,
    pub a: Vec<VertexId>,
    pub b: Vec<VertexId>,
}

/// Repeats matching rounds with congestion `eta / ceil(log2 |a|)` until at
/// most `z` terminals of `a` remain unrouted or a round fails.
pub fn matching_player(host: &DynGraph, a: &[VertexId], b: &[VertexId], d_prime: u64, eta: u64, z: usize) -> Routing {
    let logk = ((a.len().max(2)) as f64).log2().ceil() as u64;
    let eta_prime = (eta / logk).max(1);
    let mut left_a: Vec<VertexId> = a.to_vec();
    let mut left_b: Vec<VertexId> = b.to_vec();
    let mut paths = Vec::new();
    let mut rounds = 0;
    while left_a.len() > z && !left_b.is_empty() {
        rounds += 1;
        match matching_round(host, &left_a, &left_b, d_prime, eta_prime) {
            RoundOutcome::Paths(ps) => {
                let ma: BTreeSet<_> = ps.iter().map(|p| p.a).collect();
                let mb: BTreeSet<_> = ps.iter().map(|p| p.b).collect();
                left_a.retain(|v| !ma.contains(v));
                left_b.retain(|v| !mb.contains(v));
                paths.extend(ps);
            }
            RoundOutcome::Cut { removed, a, b, routed } => {
                paths.extend(routed);
                return Routing { paths, cut: Some(RoundCut { removed, a, b }), rounds };
            }
        }
    }
    Routing { paths, cut: None, rounds }
}

// ---------------------------------------------------------------------------
// Pruning

/// Certificate-driven expander pruning: after each deletion, sparse cuts of
/// the remaining graph below `phi / (6 delta)` are cut off and their smaller
/// side joins the pruned set.
#[derive(Clone, Debug)]
pub struct Pruner {
    x: Multigraph,
    phi: f64,
    delta: usize,
    pruned: Vec<bool>,
    snapshots: Vec<usize>,
    deletions: usize,
    limit: usize,
    brute_limit: usize,
    exact: bool,
}

impl Pruner {
    pub fn new(x: Multigraph, phi: f64, brute_limit: usize) -> Self {
        let delta = x.max_degree().max(1);
        let limit = (phi * x.num_live_edges() as f64 / (10.0 * delta as f64)).floor() as usize;
        let n = x.n();
        Pruner { x, phi, delta, pruned: vec![false; n], snapshots: vec![0], deletions: 0, limit, brute_limit, exact: true }
    }

    pub fn graph(&self) -> &Multigraph {
        &self.x
    }

    pub fn delta(&self) -> usize {
        self.delta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Deletions allowed before the guarantees lapse.
    pub fn limit(&self) -> usize {
        self.limit
    }

    pub fn deletions(&self) -> usize {
        self.deletions
    }

    pub fn is_pruned(&self, v: usize) -> bool {
        self.pruned[v]
    }

    pub fn pruned(&self) -> Vec<usize> {
        (0..self.x.n()).filter(|&v| self.pruned[v]).collect()
    }

    pub fn active(&self) -> Vec<bool> {
        self.pruned.iter().map(|&p| !p).collect()
    }

    /// Size of the pruned set after each deletion, starting with 0.
    pub fn snapshots(&self) -> &[usize] {
        &self.snapshots
    }

    /// False once a sweep (not exhaustive) search was needed.
    pub fn exact(&self) -> bool {
        self.exact
    }

    pub fn threshold(&self) -> f64 {
        self.phi / (6.0 * self.delta as f64)
    }

    /// Deletes edge `e`; returns the newly pruned vertices. Past the limit the
    /// deletion still happens but `StreamTooLong` is reported.
    pub fn delete(&mut self, e: usize) -> Result<Vec<usize>, ExpanderError> {
        let fresh = self.delete_unchecked(e);
        if self.deletions > self.limit {
            return Err(ExpanderError::StreamTooLong { len: self.deletions, limit: self.limit });
        }
        Ok(fresh)
    }

    /// Like `delete` but without the stream-length check.
    pub fn delete_unchecked(&mut self, e: usize) -> Vec<usize> {
        self.x.delete_edge(e);
        self.deletions += 1;
        let fresh = self.repair();
        self.snapshots.push(self.pruned.iter().filter(|&&p| p).count());
        fresh
    }

    /// Forces `v` into the pruned set (used when a level above loses it).
    pub fn force(&mut self, v: usize) -> Vec<usize> {
        let mut out = Vec::new();
        if !self.pruned[v] {
            self.pruned[v] = true;
            out.push(v);
        }
        out.extend(self.repair());
        out
    }

    fn repair(&mut self) -> Vec<usize> {
        let mut fresh = Vec::new();
        loop {
            let active = self.active();
            let (c, exact) = sparsest(&self.x, &active, 1, self.brute_limit);
            self.exact &= exact;
            match c {
                Some(c) if c.ratio.less_than(self.threshold()) => {
                    for v in c.side {
                        self.pruned[v] = true;
                        fresh.push(v);
                    }
                }
                _ => break,
            }
        }
        fresh.sort();
        fresh
    }

    /// Edges between the pruned set and the rest.
    pub fn boundary(&self) -> usize {
        self.x
            .live_edges()
            .filter(|&e| {
                let (a, b) = self.x.endpoints(e);
                self.pruned[a] != self.pruned[b]
            })
            .count()
    }
}

/// Runs a whole deletion stream through the pruner, returning the pruned
/// set after each deletion.
pub fn prune(x: &Multigraph, phi: f64, stream: &[usize]) -> Result<Vec<Vec<usize>>, ExpanderError> {
    let mut p = Pruner::new(x.clone(), phi, 14);
    if stream.len() > p.limit() {
        return Err(ExpanderError::StreamTooLong { len: stream.len(), limit: p.limit() });
    }
    let mut out = vec![Vec::new()];
    for &e in stream {
        p.delete(e)?;
        out.push(p.pruned());
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Cut-matching game

#[derive(Clone, Debug, Serialize)]
pub struct CmgConfig {
    /// Round cap multiplier: at most `c_hat * ceil(log2 k)` rounds.
    pub c_hat: f64,
    /// Sparsity below which the cut player reports a cut.
    pub phi: f64,
}

impl Default for CmgConfig {
    fn default() -> Self {
        CmgConfig { c_hat: 8.0, phi: 0.25 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CmgResult {
    /// Graph on terminal indices `0..k`.
    pub x: Multigraph,
    /// Host walk per edge of `x`; `None` marks a fake edge.
    pub paths: Vec<Option<Walk>>,
    /// Terminal indices that survived pruning of fake-edge damage.
    pub kept: Vec<usize>,
    pub rounds: usize,
    pub fake: usize,
    /// The first routing failure, with terminal indices.
    pub failure: Option<RoundCut>,
    pub cert: Certificate,
}

/// Terminals are indices `0..k`; `router(a, b)` routes from `a` into `b`
/// and returns the pairs it could connect with their host walks.
pub fn cut_matching(k: usize, cfg: &CmgConfig, router: &mut dyn FnMut(&[usize], &[usize]) -> Routing) -> CmgResult {
    let mut x = Multigraph::new(k);
    let mut paths = Vec::new();
    let mut fake = Vec::new();
    let mut failure = None;
    let max_rounds = (cfg.c_hat * (k.max(2) as f64).log2().ceil()).ceil() as usize;
    let all = vec![true; k];
    let mut rounds = 0;
    if k == 2 {
        let r = router(&[0], &[1]);
        match r.paths.into_iter().next() {
            Some(p) => {
                x.add_edge(0, 1);
                paths.push(Some(p.walk));
            }
            None => {
                fake.push(x.add_edge(0, 1));
                paths.push(None);
                failure = r.cut;
            }
        }
        rounds = 1;
    }
    while k > 2 && rounds < max_rounds {
        let (mut a, mut b) = match cut_player(&x, &all, cfg.phi) {
            CutPlayerOutcome::ExpanderCore { core, .. } if core.len() == k => break,
            CutPlayerOutcome::ExpanderCore { core, .. } => {
                let inside: BTreeSet<_> = core.iter().copied().collect();
                ((0..k).filter(|v| !inside.contains(v)).collect::<Vec<_>>(), core)
            }
            CutPlayerOutcome::BalancedSparseCut { a, b, .. } => (a, b),
        };
        if a.len() > b.len() {
            std::mem::swap(&mut a, &mut b);
        }
        rounds += 1;
        let r = router(&a, &b);
        let mut used_a = BTreeSet::new();
        let mut used_b = BTreeSet::new();
        for p in r.paths {
            used_a.insert(p.a);
            used_b.insert(p.b);
            x.add_edge(p.a, p.b);
            paths.push(Some(p.walk));
        }
        if failure.is_none() {
            failure = r.cut;
        }
        let free_b: Vec<usize> = b.iter().copied().filter(|v| !used_b.contains(v)).collect();
        for (i, &u) in a.iter().filter(|v| !used_a.contains(v)).enumerate() {
            let w = free_b[i % free_b.len().max(1)];
            fake.push(x.add_edge(u, w));
            paths.push(None);
        }
    }
    let mut kept: Vec<usize> = (0..k).collect();
    if !fake.is_empty() && k > 2 {
        let mut p = Pruner::new(x.clone(), cfg.phi, 14);
        for &e in &fake {
            let _ = p.delete(e);
        }
        kept = (0..k).filter(|&v| !p.is_pruned(v)).collect();
        for &e in &fake {
            x.delete_edge(e);
        }
    } else if !fake.is_empty() {
        x.delete_edge(fake[0]);
        kept = vec![0];
    }
    let mut active = vec![false; k];
    for &v in &kept {
        active[v] = true;
    }
    let cert = certify(&x, &active);
    CmgResult { x, paths, kept, rounds, fake: fake.len(), failure, cert }
}

// ---------------------------------------------------------------------------
// Embedding a small expander into a large one

#[derive(Clone, Debug, Serialize)]
pub struct Embedding {
    /// Host edge ids per embedded edge, in walk order.
    pub paths: Vec<Vec<usize>>,
    /// Host vertex sequence per embedded edge.
    pub vertices: Vec<Vec<usize>>,
    pub congestion: Vec<u64>,
}

impl Embedding {
    pub fn max_congestion(&self) -> u64 {
        self.congestion.iter().copied().max().unwrap_or(0)
    }

    pub fn max_len(&self) -> usize {
        self.paths.iter().map(|p| p.len()).max().unwrap_or(0)
    }

    fn from_paths(host_edges: usize, paths: Vec<Vec<usize>>, vertices: Vec<Vec<usize>>) -> Self {
        let mut congestion = vec![0; host_edges];
        for p in &paths {
            for &e in p {
                congestion[e] += 1;
            }
        }
        Embedding { paths, vertices, congestion }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EmbedConfig {
    pub cmg: CmgConfig,
    /// Terminal sets up to this size get a fixed small expander.
    pub small_k: usize,
    /// Congestion multiplier for routing rounds.
    pub eta_coef: f64,
}

impl Default for EmbedConfig {
    fn default() -> Self {
        EmbedConfig { cmg: CmgConfig::default(), small_k: 4, eta_coef: 2.0 }
    }
}

/// Vertex sequence of a host walk given by edges starting at `start`.
fn trace(host: &Multigraph, start: usize, edges: &[usize]) -> Vec<usize> {
    let mut vs = vec![start];
    for &e in edges {
        let v = host.other(e, *vs.last().unwrap());
        vs.push(v);
    }
    vs
}

/// Builds an expander over `terminals` and embeds it into the active part
/// of `host`. Vertex `i` of the result is terminal `terminals[kept[i]]`;
/// terminals cut off by pruning are left out.
pub fn embed_expander(
    host: &Multigraph,
    active: &[bool],
    terminals: &[usize],
    phi: f64,
    cfg: &EmbedConfig,
) -> Result<(Expander, Embedding, Vec<usize>), ExpanderError> {
    let k = terminals.len();
    if k <= cfg.small_k {
        let mut x = Multigraph::new(k);
        let mut paths = Vec::new();
        let mut verts = Vec::new();
        for i in 0..k {
            for j in i + 1..k {
                let p = host.bfs_path(terminals[i], terminals[j], active).ok_or(ExpanderError::NoPath(terminals[i], terminals[j]))?;
                verts.push(trace(host, terminals[i], &p));
                paths.push(p);
                x.add_edge(i, j);
            }
        }
        let emb = Embedding::from_paths(host.num_edge_slots(), paths, verts);
        return Ok((Expander::new(x), emb, (0..k).collect()));
    }
    // route on a unit-length copy of the active host
    let mut dg = DynGraph::new(u64::MAX / 8, false);
    for _ in 0..host.n() {
        dg.add_vertex(Kind::Regular);
    }
    let mut back = Vec::new();
    for e in host.live_edges() {
        let (a, b) = host.endpoints(e);
        if active[a] && active[b] && a != b {
            dg.add_edge(a, b, 1).unwrap();
            back.push(e);
        }
    }
    let n_active = active.iter().filter(|&&a| a).count();
    let delta = host.max_degree().max(1);
    let d_prime = shortest_expander_path_bound(n_active, delta, phi);
    let logn = (n_active.max(2) as f64).log2();
    let eta = (cfg.eta_coef * delta as f64 * logn / phi).ceil() as u64;
    let mut router = |a: &[usize], b: &[usize]| {
        let ta: Vec<usize> = a.iter().map(|&i| terminals[i]).collect();
        let tb: Vec<usize> = b.iter().map(|&i| terminals[i]).collect();
        let pos: BTreeMap<usize, usize> = terminals.iter().enumerate().map(|(i, &t)| (t, i)).collect();
        let mut r = matching_player(&dg, &ta, &tb, d_prime, eta, 0);
        for p in &mut r.paths {
            p.a = pos[&p.a];
            p.b = pos[&p.b];
        }
        if let Some(c) = &mut r.cut {
            c.a = c.a.iter().map(|v| pos[v]).collect();
            c.b = c.b.iter().map(|v| pos[v]).collect();
        }
        r
    };
    let res = cut_matching(k, &cfg.cmg, &mut router);
    let mut x = Multigraph::new(res.kept.len());
    let mut paths = Vec::new();
    let mut verts = Vec::new();
    let idx: BTreeMap<usize, usize> = res.kept.iter().enumerate().map(|(i, &t)| (t, i)).collect();
    for e in res.x.live_edges() {
        let (a, b) = res.x.endpoints(e);
        let (Some(&ia), Some(&ib)) = (idx.get(&a), idx.get(&b)) else { continue };
        let Some(w) = &res.paths[e] else { continue };
        let hp: Vec<usize> = w.edges.iter().map(|&d| back[d]).collect();
        x.add_edge(ia, ib);
        verts.push(w.vertices.clone());
        paths.push(hp);
    }
    let emb = Embedding::from_paths(host.num_edge_slots(), paths, verts);
    Ok((Expander::new(x), emb, res.kept))
}
