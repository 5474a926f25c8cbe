//! Dynamic neighborhood covers: layered ball cutting, the initial cover,
//! and the session that keeps a cover valid under graph updates.

use crate::estree::{EsTree, Induced, RemovedEdge};
use crate::graph::{Change, DynGraph, EdgeId, GraphError, UpdateOp, UpdateReceipt, VertexId, Walk, INF};
use crate::params::CoverConsts;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

pub type ClusterId = usize;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoverError {
    #[error("vertex {0} is not in cluster {1}")]
    VertexNotInCluster(VertexId, ClusterId),
    #[error("neither side of the bidirectional cut met an eligible layer in cluster {0}")]
    PreconditionUnmet(ClusterId),
    #[error("oracle for cluster {cluster} flagged ({x},{y}) at distance {dist}, need more than {need}")]
    OracleContractViolation { cluster: ClusterId, x: VertexId, y: VertexId, dist: u64, need: u64 },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QueryError {
    #[error("cluster {0} has a raised flag")]
    QueryWhileFlagged(ClusterId),
    #[error("vertex {0} is not in the cluster")]
    NotInCluster(VertexId),
    #[error("no covering cluster of {0} contains {1}")]
    NotCovered(VertexId, VertexId),
    #[error("{0} and {1} are not connected within the cluster")]
    Unreachable(VertexId, VertexId),
}

/// A vertex-induced subgraph of the host graph.
#[derive(Clone, Debug)]
pub struct Cluster {
    pub id: ClusterId,
    pub mask: Vec<bool>,
    pub members: BTreeSet<VertexId>,
    pub weight: u64,
    pub w0: u64,
    pub beta0: f64,
    pub parent: Option<ClusterId>,
}

impl Cluster {
    /// A standalone cluster over `members`, outside any session.
    pub fn of(g: &DynGraph, id: ClusterId, members: impl IntoIterator<Item = VertexId>) -> Self {
        let mut c = Cluster { id, mask: vec![false; g.num_slots()], members: BTreeSet::new(), weight: 0, w0: 0, beta0: 0.0, parent: None };
        for v in members {
            c.insert(g, v);
        }
        c.w0 = c.weight;
        c
    }

    /// Every live vertex of `g`.
    pub fn whole(g: &DynGraph) -> Self {
        Cluster::of(g, 0, g.vertices().collect::<Vec<_>>())
    }

    pub fn contains(&self, v: VertexId) -> bool {
        v < self.mask.len() && self.mask[v]
    }

    pub fn view<'a>(&'a self, g: &'a DynGraph) -> Induced<'a> {
        Induced { g, mask: &self.mask }
    }

    pub fn regular<'a>(&'a self, g: &'a DynGraph) -> impl Iterator<Item = VertexId> + 'a {
        self.members.iter().copied().filter(move |&v| g.is_regular(v))
    }

    /// Edges with both endpoints in the cluster.
    pub fn edges<'a>(&'a self, g: &'a DynGraph) -> impl Iterator<Item = EdgeId> + 'a {
        self.members.iter().flat_map(move |&v| {
            g.incident(v).filter(move |&e| {
                let ed = g.edge(e);
                ed.a == v && self.contains(ed.b) || ed.b == v && ed.a < v && self.contains(ed.a)
            })
        })
    }

    fn insert(&mut self, g: &DynGraph, v: VertexId) {
        if self.mask.len() <= v {
            self.mask.resize(v + 1, false);
        }
        if !self.mask[v] {
            self.mask[v] = true;
            self.members.insert(v);
            if g.is_regular(v) {
                self.weight += 1;
            }
        }
    }

    fn remove(&mut self, g: &DynGraph, v: VertexId) {
        if self.contains(v) {
            self.mask[v] = false;
            self.members.remove(&v);
            if g.is_regular(v) {
                self.weight -= 1;
            }
        }
    }

    /// Exact distances inside the cluster from `s`, up to `r`.
    pub fn dijkstra(&self, g: &DynGraph, s: VertexId, r: u64) -> BTreeMap<VertexId, u64> {
        let mut dist = BTreeMap::new();
        let mut pq = BTreeSet::new();
        pq.insert((0u64, s));
        while let Some((d, v)) = pq.pop_first() {
            if dist.contains_key(&v) {
                continue;
            }
            dist.insert(v, d);
            for e in g.incident(v) {
                let ed = g.edge(e);
                let w = ed.other(v);
                if self.contains(w) && !dist.contains_key(&w) && d + ed.len <= r {
                    pq.insert((d + ed.len, w));
                }
            }
        }
        dist
    }
}

/// Changes delivered to a per-cluster oracle. The cluster already reflects them.
#[derive(Clone, Debug)]
pub enum ClusterEvent {
    /// Edges and then isolated vertices removed from the cluster.
    Shrink { edges: Vec<RemovedEdge>, vertices: Vec<VertexId> },
    /// A supernode copy joined the cluster.
    Split { new: VertexId },
}

/// Per-cluster data structure driven by the cover session.
pub trait ClusterOracle {
    fn on_event(&mut self, g: &DynGraph, c: &Cluster, ev: &ClusterEvent);
    /// A pair of regular vertices whose distance in the cluster exceeds the
    /// flag distance, if the oracle has found one.
    fn flag(&self) -> Option<(VertexId, VertexId)>;
    /// A path in the cluster between regular vertices `a` and `b`.
    fn short_path(&self, g: &DynGraph, c: &Cluster, a: VertexId, b: VertexId) -> Result<Walk, QueryError>;
    fn name(&self) -> String;
}

/// Oracle that never flags and answers queries by Dijkstra. Used when the
/// cover is run without a cluster maintenance algorithm.
pub struct DijkstraOracle;

impl ClusterOracle for DijkstraOracle {
    fn on_event(&mut self, _: &DynGraph, _: &Cluster, _: &ClusterEvent) {}
    fn flag(&self) -> Option<(VertexId, VertexId)> {
        None
    }
    fn short_path(&self, g: &DynGraph, c: &Cluster, a: VertexId, b: VertexId) -> Result<Walk, QueryError> {
        cluster_shortest_path(g, c, a, b)
    }
    fn name(&self) -> String {
        "dijkstra".into()
    }
}

pub fn cluster_shortest_path(g: &DynGraph, c: &Cluster, a: VertexId, b: VertexId) -> Result<Walk, QueryError> {
    for v in [a, b] {
        if !c.contains(v) {
            return Err(QueryError::NotInCluster(v));
        }
    }
    let t = EsTree::build(&c.view(g), a, u64::MAX / 4).map_err(|_| QueryError::Unreachable(a, b))?;
    t.path(b).ok_or(QueryError::Unreachable(a, b))
}

pub type OracleFactory = Box<dyn FnMut(&DynGraph, &Cluster, &CoverConsts) -> Box<dyn ClusterOracle>>;

// ---------------------------------------------------------------------------
// Layered scans

/// Lazy Dijkstra over a cluster using length-sorted incidence lists, so the
/// work done is proportional to the edges among discovered vertices.
struct Scan {
    settled: BTreeMap<VertexId, u64>,
    heap: BTreeSet<(u64, VertexId, VertexId, u64, EdgeId)>,
    work: u64,
}

impl Scan {
    fn new(g: &DynGraph, mask: &[bool], x: VertexId) -> Self {
        let mut s = Scan { settled: BTreeMap::new(), heap: BTreeSet::new(), work: 1 };
        s.settled.insert(x, 0);
        s.push_next(g, mask, x, None);
        s
    }

    fn push_next(&mut self, g: &DynGraph, mask: &[bool], y: VertexId, after: Option<(u64, EdgeId)>) {
        let dy = self.settled[&y];
        for (len, e) in g.incident_by_len(y, after) {
            let a = g.edge(e).other(y);
            if a >= mask.len() || !mask[a] {
                continue;
            }
            self.work += 1;
            if self.settled.contains_key(&a) {
                continue;
            }
            self.heap.insert((dy + len, a, y, len, e));
            return;
        }
    }

    /// Settles the next vertex.
    fn step(&mut self, g: &DynGraph, mask: &[bool]) -> Option<(VertexId, u64)> {
        loop {
            let (key, a, y, len, e) = self.heap.pop_first()?;
            self.push_next(g, mask, y, Some((len, e)));
            if self.settled.contains_key(&a) {
                continue;
            }
            self.settled.insert(a, key);
            self.work += 1;
            self.push_next(g, mask, a, None);
            return Some((a, key));
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CutResult {
    pub center: VertexId,
    /// Index of the eligible layer.
    pub layer: u64,
    /// Vertices of the new cluster: layers 1..=layer.
    pub c_prime: Vec<VertexId>,
    /// Vertices leaving the old cluster: layers 1..layer.
    pub removed: Vec<VertexId>,
    /// Distance from the center for every vertex of `c_prime`.
    pub dist: BTreeMap<VertexId, u64>,
    pub work: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum CutOutcome {
    Fail { work: u64 },
    Cut(CutResult),
}

enum Tick {
    Running,
    Fail,
    Eligible(u64),
}

/// ProcCut state: a scan plus per-layer weight bookkeeping.
struct LayerScan<'a> {
    x: VertexId,
    scan: Scan,
    consts: &'a CoverConsts,
    total: u64,
    layer: u64,
    layer_of: BTreeMap<VertexId, u64>,
    prefix: u64,
    cur: u64,
    prefix_cls: Vec<u64>,
    cur_cls: Vec<u64>,
    exhausted: bool,
    pending: Option<(VertexId, u64)>,
}

impl<'a> LayerScan<'a> {
    fn new(g: &DynGraph, c: &Cluster, x: VertexId, consts: &'a CoverConsts, class: &dyn Fn(VertexId) -> u32) -> Self {
        let r = consts.r as usize;
        let mut s = LayerScan {
            x,
            scan: Scan::new(g, &c.mask, x),
            consts,
            total: c.weight,
            layer: 1,
            layer_of: BTreeMap::new(),
            prefix: 0,
            cur: 0,
            prefix_cls: vec![0; r + 1],
            cur_cls: vec![0; r + 1],
            exhausted: false,
            pending: None,
        };
        s.admit(g, x, 1, class);
        s
    }

    fn admit(&mut self, g: &DynGraph, v: VertexId, layer: u64, class: &dyn Fn(VertexId) -> u32) {
        self.layer_of.insert(v, layer);
        if g.is_regular(v) {
            self.cur += 1;
            let k = class(v).min(self.consts.r) as usize;
            for j in 1..=k {
                self.cur_cls[j] += 1;
            }
        }
    }

    fn layer_index(&self, d: u64) -> u64 {
        if d == 0 {
            1
        } else {
            d.div_ceil(2 * self.consts.d)
        }
    }

    /// Closes the current layer and decides Fail / Eligible / continue.
    fn close_layer(&mut self) -> Tick {
        let i = self.layer;
        if 2 * (self.prefix + self.cur) > self.total {
            return Tick::Fail;
        }
        let k = self.consts.kappa;
        let c2 = (self.cur as f64) * k <= self.prefix as f64;
        let c3 = (1..self.cur_cls.len()).all(|j| (self.cur_cls[j] as f64) * k <= self.prefix_cls[j] as f64);
        if i > 1 && c2 && c3 {
            return Tick::Eligible(i);
        }
        self.prefix += self.cur;
        self.cur = 0;
        for j in 0..self.cur_cls.len() {
            self.prefix_cls[j] += self.cur_cls[j];
            self.cur_cls[j] = 0;
        }
        self.layer += 1;
        Tick::Running
    }

    /// One settle step, possibly closing layers.
    fn tick(&mut self, g: &DynGraph, mask: &[bool], class: &dyn Fn(VertexId) -> u32) -> Tick {
        let next = match self.pending.take() {
            Some(p) => Some(p),
            None if self.exhausted => None,
            None => self.scan.step(g, mask),
        };
        match next {
            None => {
                self.exhausted = true;
                // the remaining layers are empty
                match self.close_layer() {
                    Tick::Running => self.close_layer(),
                    t => t,
                }
            }
            Some((v, d)) => {
                let li = self.layer_index(d);
                if li > self.layer {
                    self.pending = Some((v, d));
                    return self.close_layer();
                }
                self.admit(g, v, li, class);
                Tick::Running
            }
        }
    }

    fn result(&self, layer: u64) -> CutResult {
        let mut c_prime = Vec::new();
        let mut removed = Vec::new();
        let mut dist = BTreeMap::new();
        for (&v, &l) in &self.layer_of {
            if l <= layer {
                c_prime.push(v);
                dist.insert(v, self.scan.settled[&v]);
                if l < layer {
                    removed.push(v);
                }
            }
        }
        CutResult { center: self.x, layer, c_prime, removed, dist, work: self.scan.work }
    }
}

/// Ball-growing cut of `c` around `x`. `class(v)` is the class index of a
/// regular vertex (`floor(log2 n_v)` with `n_v` its cluster count).
pub fn proc_cut(
    g: &DynGraph,
    c: &Cluster,
    x: VertexId,
    consts: &CoverConsts,
    class: &dyn Fn(VertexId) -> u32,
) -> Result<CutOutcome, CoverError> {
    if !c.contains(x) || !g.has_vertex(x) {
        return Err(CoverError::VertexNotInCluster(x, c.id));
    }
    let mut s = LayerScan::new(g, c, x, consts, class);
    loop {
        match s.tick(g, &c.mask, class) {
            Tick::Running => {}
            Tick::Fail => return Ok(CutOutcome::Fail { work: s.scan.work }),
            Tick::Eligible(i) => return Ok(CutOutcome::Cut(s.result(i))),
        }
    }
}

/// Two interleaved scans from `x` and `y`; the side with less discovered work
/// advances, ties favour `x`. The first eligible layer wins.
pub fn proc_cut_bidir(
    g: &DynGraph,
    c: &Cluster,
    x: VertexId,
    y: VertexId,
    consts: &CoverConsts,
    class: &dyn Fn(VertexId) -> u32,
) -> Result<CutResult, CoverError> {
    for v in [x, y] {
        if !c.contains(v) || !g.has_vertex(v) {
            return Err(CoverError::VertexNotInCluster(v, c.id));
        }
    }
    let mut sides = [Some(LayerScan::new(g, c, x, consts, class)), Some(LayerScan::new(g, c, y, consts, class))];
    loop {
        let pick = match (&sides[0], &sides[1]) {
            (None, None) => return Err(CoverError::PreconditionUnmet(c.id)),
            (Some(_), None) => 0,
            (None, Some(_)) => 1,
            (Some(a), Some(b)) => usize::from(a.scan.work > b.scan.work),
        };
        let s = sides[pick].as_mut().unwrap();
        match s.tick(g, &c.mask, class) {
            Tick::Running => {}
            Tick::Fail => sides[pick] = None,
            Tick::Eligible(i) => return Ok(s.result(i)),
        }
    }
}

// ---------------------------------------------------------------------------
// Budget ledger

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BudgetSnapshot {
    pub total: f64,
    /// `ge[j]`: budget of regular vertices in classes `j` and above.
    pub ge: Vec<f64>,
    pub class: BTreeMap<VertexId, u32>,
    pub max_count: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct BudgetViolation {
    pub step: u64,
    pub what: String,
}

fn class_of_count(n: usize) -> u32 {
    if n == 0 {
        0
    } else {
        usize::BITS - 1 - n.leading_zeros()
    }
}

// ---------------------------------------------------------------------------
// Session

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum CoverEvent {
    Created { cluster: ClusterId, parent: Option<ClusterId>, center: VertexId, layer: u64, vertices: usize, weight: u64 },
    Shrunk { cluster: ClusterId, removed_vertices: usize, removed_edges: usize, weight: u64 },
    Flag { cluster: ClusterId, x: VertexId, y: VertexId },
    Reassigned { from: ClusterId, to: ClusterId, count: usize },
    BadIteration { center: VertexId },
    Update { step: u64, op: String, clusters: Vec<ClusterId> },
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct CoverStats {
    pub cuts: u64,
    pub init_cuts: u64,
    pub flags: u64,
    pub bad_iterations: u64,
    pub max_layer: u64,
    pub max_work_ratio: f64,
    pub steps: u64,
}

pub struct NcSession {
    host: DynGraph,
    consts: CoverConsts,
    clusters: Vec<Cluster>,
    lists: Vec<BTreeSet<ClusterId>>,
    covering: Vec<Option<ClusterId>>,
    oracles: Vec<Option<Box<dyn ClusterOracle>>>,
    factory: OracleFactory,
    memberships: Vec<u64>,
    events: Vec<CoverEvent>,
    check_budget: bool,
    check_flags: bool,
    violations: Vec<BudgetViolation>,
    stats: CoverStats,
}

pub struct SessionOptions {
    pub check_budget: bool,
    pub check_flags: bool,
}

impl Default for SessionOptions {
    fn default() -> Self {
        SessionOptions { check_budget: false, check_flags: true }
    }
}

/// The initial cluster `H` always has id 0 and ends as the distinguished cluster.
pub const DISTINGUISHED: ClusterId = 0;

impl NcSession {
    /// Builds the initial cover and one oracle per cluster.
    pub fn new(host: DynGraph, consts: CoverConsts, factory: OracleFactory, opts: SessionOptions) -> Result<Self, CoverError> {
        let n = host.num_slots();
        let mut s = NcSession {
            consts,
            clusters: Vec::new(),
            lists: vec![BTreeSet::new(); n],
            covering: vec![None; n],
            oracles: Vec::new(),
            factory,
            memberships: vec![0; n],
            events: Vec::new(),
            check_budget: opts.check_budget,
            check_flags: opts.check_flags,
            violations: Vec::new(),
            stats: CoverStats::default(),
            host,
        };
        s.init_nc()?;
        for i in 0..s.clusters.len() {
            let o = (s.factory)(&s.host, &s.clusters[i], &s.consts);
            s.oracles.push(Some(o));
        }
        s.settle_flags()?;
        Ok(s)
    }

    pub fn graph(&self) -> &DynGraph {
        &self.host
    }

    pub fn consts(&self) -> &CoverConsts {
        &self.consts
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn cluster(&self, id: ClusterId) -> &Cluster {
        &self.clusters[id]
    }

    pub fn cluster_list(&self, v: VertexId) -> &BTreeSet<ClusterId> {
        &self.lists[v]
    }

    /// Clusters containing both endpoints of `e`.
    pub fn clusters_of_edge(&self, e: EdgeId) -> Vec<ClusterId> {
        let ed = self.host.edge(e);
        self.lists[ed.a].intersection(&self.lists[ed.b]).copied().collect()
    }

    pub fn covering(&self, v: VertexId) -> Option<ClusterId> {
        self.covering.get(v).copied().flatten()
    }

    pub fn memberships(&self, v: VertexId) -> u64 {
        self.memberships[v]
    }

    pub fn events(&self) -> &[CoverEvent] {
        &self.events
    }

    pub fn take_events(&mut self) -> Vec<CoverEvent> {
        std::mem::take(&mut self.events)
    }

    pub fn stats(&self) -> &CoverStats {
        &self.stats
    }

    pub fn budget_violations(&self) -> &[BudgetViolation] {
        &self.violations
    }

    pub fn oracle_name(&self, id: ClusterId) -> String {
        self.oracles[id].as_ref().map(|o| o.name()).unwrap_or_default()
    }

    fn class(&self, v: VertexId) -> u32 {
        class_of_count(self.lists[v].len())
    }

    fn grow(&mut self) {
        let n = self.host.num_slots();
        if self.lists.len() < n {
            self.lists.resize(n, BTreeSet::new());
            self.covering.resize(n, None);
            self.memberships.resize(n, 0);
        }
    }

    pub fn budget_snapshot(&self) -> BudgetSnapshot {
        let r = self.consts.r as usize;
        let mut beta: BTreeMap<VertexId, f64> = BTreeMap::new();
        for c in &self.clusters {
            let coef = self.consts.budget_coef(c.weight);
            for v in c.regular(&self.host) {
                *beta.entry(v).or_default() += coef;
            }
        }
        let mut ge = vec![0.0; r + 2];
        let mut class = BTreeMap::new();
        let mut max_count = 0;
        for (&v, &b) in &beta {
            let k = self.class(v);
            max_count = max_count.max(self.lists[v].len());
            class.insert(v, k);
            for slot in ge.iter_mut().take((k as usize).min(r + 1) + 1).skip(1) {
                *slot += b;
            }
        }
        BudgetSnapshot { total: beta.values().sum(), ge, class, max_count }
    }

    fn check_step(&mut self, before: &BudgetSnapshot, what: &str) {
        let after = self.budget_snapshot();
        let tol = 1e-9 * before.total.max(1.0);
        let step = self.stats.steps;
        if after.total > before.total + tol {
            self.violations.push(BudgetViolation {
                step,
                what: format!("{what}: total budget rose from {} to {}", before.total, after.total),
            });
        }
        let r = self.consts.r as usize;
        for j in 1..=r {
            let joined = after
                .class
                .iter()
                .filter(|(v, &k)| k as usize == j && before.class.get(v).map_or(true, |&o| o as usize != j))
                .count() as f64;
            let allow = 2f64.powi(j as i32) * (1.0 + 1.0 / self.consts.log_w) * joined;
            if after.ge[j] > before.ge[j] + allow + tol {
                self.violations.push(BudgetViolation {
                    step,
                    what: format!("{what}: class >= {j} budget rose from {} to {} (allowance {allow})", before.ge[j], after.ge[j]),
                });
            }
        }
        if after.max_count >= 1usize << self.consts.r.min(60) {
            self.violations.push(BudgetViolation { step, what: format!("{what}: class S_r is non-empty") });
        }
    }

    fn new_cluster(&mut self, parent: Option<ClusterId>, members: &[VertexId]) -> ClusterId {
        let id = self.clusters.len();
        let mut c = Cluster {
            id,
            mask: vec![false; self.host.num_slots()],
            members: BTreeSet::new(),
            weight: 0,
            w0: 0,
            beta0: 0.0,
            parent,
        };
        for &v in members {
            c.insert(&self.host, v);
            self.lists[v].insert(id);
            self.memberships[v] += 1;
        }
        c.w0 = c.weight;
        c.beta0 = self.consts.budget_coef(c.weight) * c.weight as f64;
        self.clusters.push(c);
        id
    }

    /// Removes `vertices` from cluster `cid`; returns the event for its oracle.
    fn shrink(&mut self, cid: ClusterId, vertices: &[VertexId]) -> ClusterEvent {
        let mut seen = BTreeSet::new();
        let mut edges = Vec::new();
        {
            let c = &self.clusters[cid];
            for &z in vertices {
                for e in self.host.incident(z) {
                    let ed = self.host.edge(e);
                    if c.contains(ed.other(z)) && seen.insert(e) {
                        edges.push((ed.a, ed.b, ed.len, e));
                    }
                }
            }
        }
        for &z in vertices {
            self.clusters[cid].remove(&self.host, z);
            self.lists[z].remove(&cid);
        }
        self.events.push(CoverEvent::Shrunk {
            cluster: cid,
            removed_vertices: vertices.len(),
            removed_edges: edges.len(),
            weight: self.clusters[cid].weight,
        });
        ClusterEvent::Shrink { edges, vertices: vertices.to_vec() }
    }

    fn apply_cut(&mut self, cid: ClusterId, res: &CutResult, init: bool) -> ClusterId {
        let before = self.check_budget.then(|| self.budget_snapshot());
        let nid = self.new_cluster(Some(cid), &res.c_prime);
        let reach = 2 * res.layer * self.consts.d - self.consts.d;
        let mut moved = 0;
        for (&v, &d) in &res.dist {
            if !self.host.is_regular(v) || d > reach {
                continue;
            }
            let cov = self.covering[v];
            if (init && cov.is_none()) || (!init && cov == Some(cid)) {
                self.covering[v] = Some(nid);
                moved += 1;
            }
        }
        let ev = self.shrink(cid, &res.removed);
        let weight = self.clusters[nid].weight;
        self.events.push(CoverEvent::Created {
            cluster: nid,
            parent: Some(cid),
            center: res.center,
            layer: res.layer,
            vertices: res.c_prime.len(),
            weight,
        });
        if moved > 0 {
            self.events.push(CoverEvent::Reassigned { from: cid, to: nid, count: moved });
        }
        self.stats.cuts += 1;
        self.stats.max_layer = self.stats.max_layer.max(res.layer);
        let ce = self.clusters[nid].edges(&self.host).count().max(1) as f64;
        self.stats.max_work_ratio = self.stats.max_work_ratio.max(res.work as f64 / ce);
        if !init {
            if let Some(o) = self.oracles[cid].as_mut() {
                o.on_event(&self.host, &self.clusters[cid], &ev);
            }
            let o = (self.factory)(&self.host, &self.clusters[nid], &self.consts);
            self.oracles.push(Some(o));
        }
        if let Some(b) = before {
            self.check_step(&b, "cut");
        }
        nid
    }

    fn init_nc(&mut self) -> Result<(), CoverError> {
        let all: Vec<VertexId> = self.host.vertices().collect();
        let star = self.new_cluster(None, &all);
        self.events.push(CoverEvent::Created {
            cluster: star,
            parent: None,
            center: all.first().copied().unwrap_or(0),
            layer: 0,
            vertices: all.len(),
            weight: self.clusters[star].weight,
        });
        let mut pending: BTreeSet<VertexId> = all.iter().copied().collect();
        let mut tau: Option<EsTree> = None;
        while let Some(x) = pending.pop_first() {
            if !self.clusters[star].contains(x) {
                continue;
            }
            let out = {
                let cls = |v: VertexId| self.class(v);
                proc_cut(&self.host, &self.clusters[star], x, &self.consts, &cls)?
            };
            match out {
                CutOutcome::Cut(res) => {
                    self.stats.init_cuts += 1;
                    self.apply_cut(star, &res, true);
                    if let Some(t) = tau.as_mut() {
                        let ClusterEvent::Shrink { edges, vertices } = self.last_shrink(&res.removed) else { unreachable!() };
                        let view = self.clusters[star].view(&self.host);
                        t.delete_edges(&view, &edges);
                        for z in vertices {
                            t.delete_vertex(z);
                        }
                        for v in t.drain_departed() {
                            if self.clusters[star].contains(v) {
                                pending.insert(v);
                            }
                        }
                    }
                }
                CutOutcome::Fail { .. } => {
                    self.stats.bad_iterations += 1;
                    self.events.push(CoverEvent::BadIteration { center: x });
                    debug_assert!(tau.is_none(), "second bad iteration");
                    let view = self.clusters[star].view(&self.host);
                    let t = EsTree::build(&view, x, 2 * self.consts.scan_radius()).expect("edges are at most D");
                    pending.retain(|&v| !t.in_tree(v));
                    tau = Some(t);
                }
            }
        }
        for v in self.host.regular_vertices().collect::<Vec<_>>() {
            if self.covering[v].is_none() {
                self.covering[v] = Some(star);
            }
        }
        Ok(())
    }

    /// The edges a just-applied shrink removed, recomputed for the InitNC tree.
    fn last_shrink(&self, removed: &[VertexId]) -> ClusterEvent {
        let mut seen = BTreeSet::new();
        let mut edges = Vec::new();
        let c = &self.clusters[DISTINGUISHED];
        let gone: BTreeSet<_> = removed.iter().copied().collect();
        for &z in removed {
            for e in self.host.incident(z) {
                let ed = self.host.edge(e);
                let w = ed.other(z);
                if (c.contains(w) || gone.contains(&w)) && seen.insert(e) {
                    edges.push((ed.a, ed.b, ed.len, e));
                }
            }
        }
        ClusterEvent::Shrink { edges, vertices: removed.to_vec() }
    }

    /// Applies one update to the host graph and every cluster containing it,
    /// then resolves all raised flags.
    pub fn apply(&mut self, op: &UpdateOp) -> Result<UpdateReceipt, CoverError> {
        let before = self.check_budget.then(|| self.budget_snapshot());
        let rc = self.host.apply(op)?;
        self.grow();
        self.stats.steps += 1;
        let mut touched = Vec::new();
        match &rc.change {
            Change::EdgeDeleted { e, a, b, len } => {
                let ids: Vec<_> = self.lists[*a].intersection(&self.lists[*b]).copied().collect();
                for cid in ids {
                    let ev = ClusterEvent::Shrink { edges: vec![(*a, *b, *len, *e)], vertices: vec![] };
                    self.deliver(cid, &ev);
                    touched.push(cid);
                }
            }
            Change::VertexDeleted(v) => {
                let ids: Vec<_> = self.lists[*v].iter().copied().collect();
                for cid in ids {
                    self.clusters[cid].remove(&self.host, *v);
                    let ev = ClusterEvent::Shrink { edges: vec![], vertices: vec![*v] };
                    self.deliver(cid, &ev);
                    touched.push(cid);
                }
                self.lists[*v].clear();
                self.covering[*v] = None;
            }
            Change::Split { from, new, copies } => {
                let ids: Vec<_> = self.lists[*from].iter().copied().collect();
                for cid in ids {
                    let hit = copies.iter().any(|&(orig, _)| self.clusters[cid].contains(self.host.edge(orig).other(*from)));
                    if hit {
                        self.clusters[cid].insert(&self.host, *new);
                        self.lists[*new].insert(cid);
                        self.memberships[*new] += 1;
                        self.deliver(cid, &ClusterEvent::Split { new: *new });
                        touched.push(cid);
                    }
                }
            }
        }
        self.events.push(CoverEvent::Update { step: self.stats.steps, op: format!("{op:?}"), clusters: touched });
        if let Some(b) = before {
            self.check_step(&b, "update");
        }
        self.settle_flags()?;
        Ok(rc)
    }

    fn deliver(&mut self, cid: ClusterId, ev: &ClusterEvent) {
        if let Some(o) = self.oracles.get_mut(cid).and_then(|o| o.as_mut()) {
            o.on_event(&self.host, &self.clusters[cid], ev);
        }
    }

    fn settle_flags(&mut self) -> Result<(), CoverError> {
        loop {
            let flagged = (0..self.oracles.len()).find_map(|i| self.oracles[i].as_ref().and_then(|o| o.flag()).map(|f| (i, f)));
            let Some((cid, (x, y))) = flagged else { return Ok(()) };
            self.stats.flags += 1;
            self.events.push(CoverEvent::Flag { cluster: cid, x, y });
            if self.check_flags {
                let c = &self.clusters[cid];
                let need = self.consts.flag_dist();
                let d = c.dijkstra(&self.host, x, need).get(&y).copied().unwrap_or(INF);
                if d <= need {
                    return Err(CoverError::OracleContractViolation { cluster: cid, x, y, dist: d, need });
                }
            }
            let res = {
                let cls = |v: VertexId| self.class(v);
                proc_cut_bidir(&self.host, &self.clusters[cid], x, y, &self.consts, &cls)?
            };
            self.apply_cut(cid, &res, false);
            let c = &self.clusters[cid];
            if c.contains(x) && c.contains(y) {
                return Err(CoverError::PreconditionUnmet(cid));
            }
        }
    }

    /// Path between regular vertices `a` and `b` inside the covering cluster of `a`.
    pub fn short_path(&self, a: VertexId, b: VertexId) -> Result<Walk, QueryError> {
        let cid = self.covering(a).ok_or(QueryError::NotInCluster(a))?;
        let c = &self.clusters[cid];
        if !c.contains(b) {
            return Err(QueryError::NotCovered(a, b));
        }
        match self.oracles[cid].as_ref() {
            Some(o) => o.short_path(&self.host, c, a, b),
            None => cluster_shortest_path(&self.host, c, a, b),
        }
    }

    /// Exhaustive validity check; returns human-readable violations.
    pub fn verify(&self) -> Vec<String> {
        let mut out = Vec::new();
        for v in self.host.regular_vertices() {
            let Some(cid) = self.covering(v) else {
                out.push(format!("regular vertex {v} has no covering cluster"));
                continue;
            };
            let c = &self.clusters[cid];
            for w in self.host.ball(v, self.consts.d).unwrap_or_default() {
                if !c.contains(w) {
                    out.push(format!("ball of {v} leaves cluster {cid} at {w}"));
                    break;
                }
            }
        }
        for v in self.host.vertices() {
            let want: BTreeSet<ClusterId> = self.clusters.iter().filter(|c| c.contains(v)).map(|c| c.id).collect();
            if want != self.lists[v] {
                out.push(format!("cluster list of {v} is stale"));
            }
            if self.host.is_regular(v) && self.memberships[v] as f64 > self.consts.membership_bound() {
                out.push(format!("vertex {v} joined {} clusters", self.memberships[v]));
            }
            if self.lists[v].len() >= 1usize << self.consts.r.min(60) {
                out.push(format!("vertex {v} is in class S_r"));
            }
        }
        out
    }
}
