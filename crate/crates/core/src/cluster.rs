//! Per-cluster oracles: the ES-tree based slow algorithm, the good-cluster
//! algorithm driven by expander witnesses, and their composition.

use crate::cover::{cluster_shortest_path, Cluster, ClusterEvent, ClusterOracle, OracleFactory, QueryError};
use crate::estree::EsTree;
use crate::expander::hierarchy::{ExpanderSession, HierarchyConfig};
use crate::expander::ExpanderError;
use crate::graph::{Change, DynGraph, EdgeId, Kind, UpdateOp, VertexId, Walk};
use crate::params::{log2g, CoverConsts};
use crate::pseudocut::{default_d_hat, find_pseudocut_and_expander, GoodWitness, Pseudocut, PseudocutConfig};
use serde::Serialize;
use std::cell::{Cell, RefCell};
use std::collections::{BTreeMap, BTreeSet};

/// One ES-tree per regular vertex of the cluster, all at depth `alpha_d`.
/// A flag is raised while some regular vertex sees another regular vertex
/// outside its tree.
pub struct AlgSlow {
    alpha_d: u64,
    trees: BTreeMap<VertexId, EsTree>,
    /// Regular vertices outside the tree of each root.
    lists: BTreeMap<VertexId, BTreeSet<VertexId>>,
    work: u64,
}

impl AlgSlow {
    pub fn new(g: &DynGraph, c: &Cluster, alpha_d: u64) -> Self {
        let view = c.view(g);
        let regular: Vec<VertexId> = c.regular(g).collect();
        let mut trees = BTreeMap::new();
        let mut lists = BTreeMap::new();
        for &v in &regular {
            let t = EsTree::build(&view, v, alpha_d).expect("cluster edges are at most D");
            let out: BTreeSet<VertexId> = regular.iter().copied().filter(|&u| !t.in_tree(u)).collect();
            trees.insert(v, t);
            lists.insert(v, out);
        }
        AlgSlow { alpha_d, trees, lists, work: 0 }
    }

    pub fn depth(&self) -> u64 {
        self.alpha_d
    }

    /// Total label increase over all trees; a proxy for running time.
    pub fn work(&self) -> u64 {
        self.work
    }

    pub fn num_trees(&self) -> usize {
        self.trees.len()
    }

    fn collect(&mut self, g: &DynGraph, c: &Cluster) {
        for (root, t) in self.trees.iter_mut() {
            let list = self.lists.get_mut(root).unwrap();
            for v in t.drain_departed() {
                if c.contains(v) && g.is_regular(v) {
                    list.insert(v);
                }
            }
        }
    }
}

impl ClusterOracle for AlgSlow {
    fn on_event(&mut self, g: &DynGraph, c: &Cluster, ev: &ClusterEvent) {
        let view = c.view(g);
        match ev {
            ClusterEvent::Shrink { edges, vertices } => {
                for t in self.trees.values_mut() {
                    let before = t.total_increment();
                    if !edges.is_empty() {
                        t.delete_edges(&view, edges);
                    }
                    for &v in vertices {
                        t.delete_vertex(v);
                    }
                    self.work += t.total_increment() - before;
                }
                for v in vertices {
                    self.trees.remove(v);
                    self.lists.remove(v);
                    for l in self.lists.values_mut() {
                        l.remove(v);
                    }
                }
            }
            ClusterEvent::Split { new } => {
                for t in self.trees.values_mut() {
                    t.split(&view, *new);
                }
            }
        }
        self.collect(g, c);
    }

    fn flag(&self) -> Option<(VertexId, VertexId)> {
        self.lists.iter().find_map(|(&v, l)| l.first().map(|&u| (v, u)))
    }

    fn short_path(&self, _: &DynGraph, c: &Cluster, a: VertexId, b: VertexId) -> Result<Walk, QueryError> {
        if self.flag().is_some() {
            return Err(QueryError::QueryWhileFlagged(c.id));
        }
        let t = self.trees.get(&a).ok_or(QueryError::NotInCluster(a))?;
        t.path(b).ok_or(QueryError::Unreachable(a, b))
    }

    fn name(&self) -> String {
        "slow".into()
    }
}

/// Parameters of the good-cluster algorithm.
#[derive(Clone, Debug, Serialize)]
pub struct GoodParams {
    pub eps: f64,
    pub w_hat: u64,
    /// Multiplier on the default `d_hat`.
    pub d_hat_scale: f64,
    pub d2_factor: u64,
    pub eta: Option<u64>,
    pub hierarchy: HierarchyConfig,
}

impl GoodParams {
    pub fn new(eps: f64, w_hat: u64) -> Self {
        GoodParams { eps, w_hat, d_hat_scale: 1.0, d2_factor: 40, eta: None, hierarchy: HierarchyConfig::default() }
    }

    /// `d_hat` is raised to `2 * flag_dist + D` so that a vertex missing
    /// from the source tree is far from every live terminal.
    pub fn pseudocut_config(&self, consts: &CoverConsts) -> PseudocutConfig {
        let floor = consts.flag_dist().saturating_mul(2).saturating_add(consts.d);
        let d_hat = default_d_hat(consts.d, self.w_hat, self.d_hat_scale).max(floor);
        let mut cfg = PseudocutConfig::new(self.eps, self.w_hat, d_hat);
        cfg.d2_factor = self.d2_factor;
        cfg.eta = self.eta;
        cfg
    }
}

#[derive(Clone, Debug)]
pub struct BadWitness {
    pub cut: Pseudocut,
}

#[derive(Clone, Debug)]
pub enum Classification {
    Type1Good,
    Type2Good(GoodWitness),
    Bad(BadWitness),
}

/// Type 1 iff `W(C) <= w_hat^(10 eps)`; otherwise the pseudocut decides:
/// fewer than `W(C)/w_hat^eps` edges is a bad witness.
pub fn classify_cluster(g: &DynGraph, c: &Cluster, cfg: &PseudocutConfig) -> Classification {
    let w = c.weight as f64;
    if w <= (cfg.w_hat as f64).powf(10.0 * cfg.eps) {
        return Classification::Type1Good;
    }
    match find_pseudocut_and_expander(g, c, cfg) {
        Ok(out) => match out.witness {
            Some(wit) if out.cut.len() as f64 >= w / cfg.rho() => Classification::Type2Good(wit),
            _ => Classification::Bad(BadWitness { cut: out.cut }),
        },
        Err(e) => {
            log::warn!("cluster {}: {e}; treated as type 1", c.id);
            Classification::Type1Good
        }
    }
}

/// State of a type-2 phase: the witness kept alive by an expander session,
/// and an ES-tree from a virtual source joined to every live terminal.
struct Phase {
    wit: GoodWitness,
    session: RefCell<ExpanderSession>,
    aug: DynGraph,
    tree: EsTree,
    /// Virtual edge of each live expander vertex.
    src_edge: BTreeMap<usize, EdgeId>,
    /// Local edges of each host edge.
    locals: BTreeMap<EdgeId, Vec<EdgeId>>,
    /// Host regular vertices outside the tree.
    out: BTreeSet<VertexId>,
    /// Raised flag: an out-of-tree vertex and the closest in-tree one.
    pair: Option<(VertexId, VertexId)>,
    /// Largest edge length `D`; the flag partner must sit within `D + 1`
    /// of the source.
    d: u64,
    bound: u64,
}

impl Phase {
    fn start(g: &DynGraph, c: &Cluster, wit: GoodWitness, cfg: &PseudocutConfig, hcfg: &HierarchyConfig, cfg_d: u64) -> Option<Self> {
        let x = wit.expander.graph.clone();
        let k = x.n();
        let phi = wit.expander.cert.phi();
        let budget = (phi * k as f64 / (wit.congestion.max(1) as f64 * log2g(cfg.w_hat as f64))).floor().max(1.0) as u64;
        let terms = wit.terminals();
        let paths: Vec<Vec<EdgeId>> = wit.paths.iter().map(|p| p.edges.clone()).collect();
        let verts: Vec<Vec<VertexId>> = wit.paths.iter().map(|p| p.vertices.clone()).collect();
        let session = match ExpanderSession::new(x, terms.clone(), phi, paths, verts, budget, hcfg.clone()) {
            Ok(s) => s,
            Err(e) => {
                log::warn!("cluster {}: expander session failed: {e}", c.id);
                return None;
            }
        };
        let mut aug = wit.sub.graph.clone();
        let source = aug.add_vertex(Kind::Regular);
        let mut src_edge = BTreeMap::new();
        for v in session.live() {
            src_edge.insert(v, aug.add_edge(source, terms[v], 1).unwrap());
        }
        let tree = EsTree::build(&aug, source, cfg.d_hat + 1).ok()?;
        let mut locals: BTreeMap<EdgeId, Vec<EdgeId>> = BTreeMap::new();
        for (l, &h) in wit.sub.origin.iter().enumerate() {
            locals.entry(h).or_default().push(l);
        }
        let out = c.regular(g).filter(|v| !tree.in_tree(wit.sub.local[v])).collect();
        let hops = session.hierarchy().length_bound().min(1e15) as u64;
        let bound = (2 * cfg.d_hat).saturating_add(hops.saturating_mul(wit.d2));
        let mut p = Phase { wit, session: RefCell::new(session), aug, tree, src_edge, locals, out, pair: None, d: cfg_d, bound };
        p.refresh(g, c).ok()?;
        Some(p)
    }

    /// Mirrors a cluster shrink; `Err` ends the phase.
    fn shrink(&mut self, g: &DynGraph, c: &Cluster, edges: &[(VertexId, VertexId, u64, EdgeId)], vertices: &[VertexId]) -> Result<(), ExpanderError> {
        let mut removed = Vec::new();
        for &(.., e) in edges {
            for &l in self.locals.get(&e).map(|v| v.as_slice()).unwrap_or(&[]) {
                if let Ok(r) = self.aug.apply(&UpdateOp::DeleteEdge(l)) {
                    removed.push(r.change);
                }
            }
        }
        let mut res = Ok(());
        {
            let s = self.session.get_mut();
            for ch in &removed {
                if let Change::EdgeDeleted { e, .. } = ch {
                    if let Err(err) = s.on_host_update(Some(*e), 0) {
                        res = Err(err);
                    }
                }
            }
            if let Err(err) = s.on_host_update(None, (edges.len() + vertices.len()) as u64) {
                res = Err(err);
            }
        }
        // terminals that lost their edge or were pruned leave the source
        let live: BTreeSet<usize> = self.session.get_mut().live().into_iter().collect();
        let dead: Vec<usize> = self.src_edge.keys().copied().filter(|v| !live.contains(v)).collect();
        for v in dead {
            let e = self.src_edge.remove(&v).unwrap();
            removed.push(self.aug.apply(&UpdateOp::DeleteEdge(e)).unwrap().change);
        }
        for ch in &removed {
            self.tree.on_update(&self.aug, ch);
        }
        for &v in vertices {
            self.out.remove(&v);
            if let Some(&l) = self.wit.sub.local.get(&v) {
                if self.aug.has_vertex(l) && self.aug.degree(l) == 0 {
                    let ch = self.aug.apply(&UpdateOp::DeleteIsolatedVertex(l)).unwrap().change;
                    self.tree.on_update(&self.aug, &ch);
                }
            }
        }
        for l in self.tree.drain_departed() {
            if let Some(h) = self.wit.sub.host.get(l).copied().flatten() {
                if g.is_regular(h) && !vertices.contains(&h) {
                    self.out.insert(h);
                }
            }
        }
        if self.src_edge.is_empty() {
            return Err(ExpanderError::BudgetExhausted);
        }
        res?;
        self.refresh(g, c)
    }

    fn flag(&self) -> Option<(VertexId, VertexId)> {
        self.pair
    }

    /// Recomputes the flag; fails when no regular vertex is close enough
    /// to the source to certify it.
    fn refresh(&mut self, g: &DynGraph, c: &Cluster) -> Result<(), ExpanderError> {
        self.pair = None;
        let Some(&v) = self.out.first() else { return Ok(()) };
        let local = &self.wit.sub.local;
        let near = c.regular(g).filter(|u| self.tree.in_tree(local[u])).min_by_key(|u| (self.tree.dist(local[u]), *u));
        match near {
            Some(u) if self.tree.dist(local[&u]) <= self.d + 1 => {
                self.pair = Some((v, u));
                Ok(())
            }
            _ => Err(ExpanderError::BudgetExhausted),
        }
    }

    /// Local walk from `v` to the terminal its tree path enters through.
    fn to_terminal(&self, v: VertexId) -> Option<(usize, Walk)> {
        let w = self.tree.path(self.wit.sub.local[&v])?;
        let t = w.vertices[1];
        let idx = *self.src_edge.iter().find(|(&i, _)| self.wit.sub.terminal[&self.wit.edges[i]] == t)?.0;
        let local = Walk { vertices: w.vertices[1..].to_vec(), edges: w.edges[1..].to_vec(), len: w.len - 1 };
        Some((idx, local.reversed()))
    }

    fn query(&self, g: &DynGraph, a: VertexId, b: VertexId) -> Option<Walk> {
        let (ia, wa) = self.to_terminal(a)?;
        let (ib, wb) = self.to_terminal(b)?;
        let mid = self.session.borrow_mut().query(&self.aug, ia, ib).ok()?;
        let local = wa.join(mid).join(wb.reversed());
        Some(self.wit.sub.to_host(g, &local))
    }
}

enum Mode {
    Slow(AlgSlow),
    Type2(Box<Phase>),
    Bad(BadWitness),
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct GoodStats {
    pub type2_phases: u64,
    pub reclassifications: u64,
    /// Queries answered by cluster Dijkstra after the witness route failed.
    pub query_fallbacks: Cell<u64>,
    pub max_bound: u64,
}

/// The good-cluster algorithm: phases of type-2 maintenance, or the slow
/// algorithm for type-1 clusters; a bad classification raises the bad flag.
pub struct GoodCluster {
    cfg: PseudocutConfig,
    hcfg: HierarchyConfig,
    alpha_d: u64,
    d: u64,
    mode: Mode,
    stats: GoodStats,
}

impl GoodCluster {
    pub fn new(g: &DynGraph, c: &Cluster, consts: &CoverConsts, params: &GoodParams) -> Self {
        let cfg = params.pseudocut_config(consts);
        let mut s = GoodCluster {
            cfg,
            hcfg: params.hierarchy.clone(),
            alpha_d: consts.flag_dist(),
            d: consts.d,
            mode: Mode::Bad(BadWitness { cut: Pseudocut { edges: BTreeSet::new(), d_hat: 0, rho: 1.0, weight: 0 } }),
            stats: GoodStats::default(),
        };
        s.classify(g, c);
        s
    }

    fn classify(&mut self, g: &DynGraph, c: &Cluster) {
        self.stats.reclassifications += 1;
        self.mode = match classify_cluster(g, c, &self.cfg) {
            Classification::Type1Good => Mode::Slow(AlgSlow::new(g, c, self.alpha_d)),
            Classification::Bad(b) => Mode::Bad(b),
            Classification::Type2Good(w) => match Phase::start(g, c, w, &self.cfg, &self.hcfg, self.d) {
                Some(p) => {
                    self.stats.type2_phases += 1;
                    self.stats.max_bound = self.stats.max_bound.max(p.bound);
                    Mode::Type2(Box::new(p))
                }
                None => Mode::Slow(AlgSlow::new(g, c, self.alpha_d)),
            },
        };
    }

    pub fn bad_flag(&self) -> Option<&BadWitness> {
        match &self.mode {
            Mode::Bad(b) => Some(b),
            _ => None,
        }
    }

    pub fn is_type2(&self) -> bool {
        matches!(self.mode, Mode::Type2(_))
    }

    pub fn is_slow(&self) -> bool {
        matches!(self.mode, Mode::Slow(_))
    }

    pub fn stats(&self) -> &GoodStats {
        &self.stats
    }

    pub fn config(&self) -> &PseudocutConfig {
        &self.cfg
    }

    /// Length bound of answers in the current mode.
    pub fn length_bound(&self) -> u64 {
        match &self.mode {
            Mode::Type2(p) => p.bound,
            _ => self.alpha_d,
        }
    }

    /// Live terminal edges of the current type-2 witness.
    pub fn witness_edges(&self) -> Vec<EdgeId> {
        match &self.mode {
            Mode::Type2(p) => p.src_edge.keys().map(|&i| p.wit.edges[i]).collect(),
            _ => Vec::new(),
        }
    }
}

impl ClusterOracle for GoodCluster {
    fn on_event(&mut self, g: &DynGraph, c: &Cluster, ev: &ClusterEvent) {
        match &mut self.mode {
            Mode::Slow(s) => s.on_event(g, c, ev),
            Mode::Bad(_) => {}
            Mode::Type2(p) => {
                let ended = match ev {
                    ClusterEvent::Shrink { edges, vertices } => p.shrink(g, c, edges, vertices).is_err(),
                    ClusterEvent::Split { .. } => true,
                };
                if ended {
                    self.classify(g, c);
                }
            }
        }
    }

    fn flag(&self) -> Option<(VertexId, VertexId)> {
        match &self.mode {
            Mode::Slow(s) => s.flag(),
            Mode::Bad(_) => None,
            Mode::Type2(p) => p.flag(),
        }
    }

    fn short_path(&self, g: &DynGraph, c: &Cluster, a: VertexId, b: VertexId) -> Result<Walk, QueryError> {
        match &self.mode {
            Mode::Slow(s) => s.short_path(g, c, a, b),
            Mode::Bad(_) => Err(QueryError::QueryWhileFlagged(c.id)),
            Mode::Type2(p) => {
                if !p.out.is_empty() {
                    return Err(QueryError::QueryWhileFlagged(c.id));
                }
                for v in [a, b] {
                    if !c.contains(v) {
                        return Err(QueryError::NotInCluster(v));
                    }
                }
                if a == b {
                    return Ok(Walk::single(a));
                }
                match p.query(g, a, b) {
                    Some(w) => Ok(w),
                    None => {
                        self.stats.query_fallbacks.set(self.stats.query_fallbacks.get() + 1);
                        cluster_shortest_path(g, c, a, b)
                    }
                }
            }
        }
    }

    fn name(&self) -> String {
        match &self.mode {
            Mode::Slow(_) => "good/slow",
            Mode::Bad(_) => "good/bad",
            Mode::Type2(_) => "good/type2",
        }
        .into()
    }
}

/// The good-cluster algorithm until its first bad flag, then the slow
/// algorithm for the rest of the cluster's life.
pub struct FullOracle {
    good: Option<GoodCluster>,
    slow: Option<AlgSlow>,
    alpha_d: u64,
    handovers: u64,
}

impl FullOracle {
    pub fn new(g: &DynGraph, c: &Cluster, consts: &CoverConsts, params: &GoodParams) -> Self {
        let mut s = FullOracle { good: Some(GoodCluster::new(g, c, consts, params)), slow: None, alpha_d: consts.flag_dist(), handovers: 0 };
        s.settle(g, c);
        s
    }

    fn settle(&mut self, g: &DynGraph, c: &Cluster) {
        if self.good.as_ref().is_some_and(|gc| gc.bad_flag().is_some()) {
            self.good = None;
            self.slow = Some(AlgSlow::new(g, c, self.alpha_d));
            self.handovers += 1;
        }
    }

    pub fn good(&self) -> Option<&GoodCluster> {
        self.good.as_ref()
    }

    pub fn handovers(&self) -> u64 {
        self.handovers
    }

    pub fn length_bound(&self) -> u64 {
        self.good.as_ref().map_or(self.alpha_d, |g| g.length_bound())
    }

    fn inner(&self) -> &dyn ClusterOracle {
        match (&self.good, &self.slow) {
            (Some(g), _) => g,
            (None, Some(s)) => s,
            _ => unreachable!(),
        }
    }
}

impl ClusterOracle for FullOracle {
    fn on_event(&mut self, g: &DynGraph, c: &Cluster, ev: &ClusterEvent) {
        match (&mut self.good, &mut self.slow) {
            (Some(gc), _) => gc.on_event(g, c, ev),
            (None, Some(s)) => s.on_event(g, c, ev),
            _ => unreachable!(),
        }
        self.settle(g, c);
    }

    fn flag(&self) -> Option<(VertexId, VertexId)> {
        self.inner().flag()
    }

    fn short_path(&self, g: &DynGraph, c: &Cluster, a: VertexId, b: VertexId) -> Result<Walk, QueryError> {
        self.inner().short_path(g, c, a, b)
    }

    fn name(&self) -> String {
        match &self.good {
            Some(g) => format!("full/{}", g.name()),
            None => "full/slow".into(),
        }
    }
}

/// Factory for cover sessions using [`FullOracle`].
pub fn full_factory(params: GoodParams) -> OracleFactory {
    Box::new(move |g, c, k| Box::new(FullOracle::new(g, c, k, &params)))
}
